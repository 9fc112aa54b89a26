#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "dataset.hpp"
#include "modelspec.hpp"
#include "sampler.hpp"

namespace statecal::config {

struct SimulatorChoice {
  enum class Kind {
    builtin,             // closed-form model compiled in
    external_command,    // child process speaking the line protocol
    external_unattached  // declared external, no command: runs must refuse
  };
  Kind kind = Kind::builtin;
  std::string builtin_name = "quadratic";
  std::vector<std::string> command;
  bool concurrent_safe = false;
  double timeout_s = 60.0;
};

// Path constraint as configured: site in raw control units (scaled once the
// dataset's bounds are known).
struct ConstraintConfig {
  Eigen::VectorXd x_raw;
  double lower = 0.0;
  double upper = 0.0;
};

struct ParameterConfig {
  std::string name;
  ParameterSpec::Role role = ParameterSpec::Role::constant;
  double lower = 0.0;
  double upper = 1.0;
  std::vector<ConstraintConfig> constraints;
};

struct RunConfig {
  std::filesystem::path base_dir;  // config file's directory; input paths
                                   // resolve against it
  std::uint64_t seed = 0;
  std::filesystem::path out_dir = "out";
  std::filesystem::path data_file;
  std::optional<std::vector<Bounds>> x_bounds;  // default: data min/max

  Variant variant = Variant::gp;
  LinkKind link = LinkKind::logit;
  std::optional<double> mu_theta;
  Hyperpriors hyper;  // link-dependent defaults already applied
  std::vector<ParameterConfig> parameters;

  sampler::ChainConfig chains;  // .seed mirrors `seed`
  SimulatorChoice simulator;

  std::optional<Eigen::MatrixXd> prediction_x;  // raw units, one row per site
  int diag_n_rep = 2000;
  std::map<std::string, double> constants;  // frozen, recorded only
};

// Strict parse: unknown keys are errors (with a nearest-key suggestion),
// type mismatches and invalid values name the offending field, and
// referenced input files must exist.
RunConfig parse_config(const std::filesystem::path& path);
RunConfig parse_config_text(const std::string& text,
                            const std::filesystem::path& base_dir);

// Edit distance used for the unknown-key suggestions.
int levenshtein(const std::string& a, const std::string& b);

}  // namespace statecal::config
