#include "config.hpp"

#include <algorithm>
#include <fstream>
#include <limits>

#include <json.hpp>

#include "error.hpp"
#include "io.hpp"

namespace statecal::config {

using nlohmann::json;

int levenshtein(const std::string& a, const std::string& b) {
  const size_t n = a.size(), m = b.size();
  std::vector<int> prev(m + 1), cur(m + 1);
  for (size_t j = 0; j <= m; ++j) prev[j] = static_cast<int>(j);
  for (size_t i = 1; i <= n; ++i) {
    cur[0] = static_cast<int>(i);
    for (size_t j = 1; j <= m; ++j) {
      const int sub = prev[j - 1] + (a[i - 1] == b[j - 1] ? 0 : 1);
      cur[j] = std::min({prev[j] + 1, cur[j - 1] + 1, sub});
    }
    std::swap(prev, cur);
  }
  return prev[m];
}

namespace {

[[noreturn]] void config_fail(const std::string& where,
                              const std::string& what) {
  fail(ErrorCode::config,
       where.empty() ? what : "config field \"" + where + "\": " + what);
}

std::string join_path(const std::string& where, const std::string& key) {
  return where.empty() ? key : where + "." + key;
}

// Rejects keys outside `allowed`, suggesting the nearest allowed key.
void check_keys(const json& obj, const std::string& where,
                std::initializer_list<const char*> allowed) {
  for (const auto& item : obj.items()) {
    const std::string& key = item.key();
    if (std::any_of(allowed.begin(), allowed.end(),
                    [&](const char* k) { return key == k; }))
      continue;
    std::string best;
    int best_d = std::numeric_limits<int>::max();
    for (const char* k : allowed) {
      const int d = levenshtein(key, k);
      if (d < best_d) {
        best_d = d;
        best = k;
      }
    }
    std::string msg = "unknown key \"" + key + "\"" +
                      (where.empty() ? std::string(" at the top level")
                                     : " in \"" + where + "\"");
    if (!best.empty() && best_d <= static_cast<int>(key.size()))
      msg += "; did you mean \"" + best + "\"?";
    fail(ErrorCode::config, msg);
  }
}

const json* find(const json& obj, const char* key) {
  const auto it = obj.find(key);
  return it == obj.end() ? nullptr : &*it;
}

double require_number(const json& v, const std::string& where) {
  if (!v.is_number()) config_fail(where, "expected a number");
  return v.get<double>();
}

double number_or(const json& obj, const std::string& where, const char* key,
                 double fallback) {
  const json* v = find(obj, key);
  return v ? require_number(*v, join_path(where, key)) : fallback;
}

double positive_number(const json& obj, const std::string& where,
                       const char* key, double fallback) {
  const double x = number_or(obj, where, key, fallback);
  if (!(x > 0.0)) config_fail(join_path(where, key), "must be positive");
  return x;
}

int integer_or(const json& obj, const std::string& where, const char* key,
               int fallback) {
  const json* v = find(obj, key);
  if (!v) return fallback;
  if (!v->is_number_integer())
    config_fail(join_path(where, key), "expected an integer");
  return v->get<int>();
}

std::string require_string(const json& v, const std::string& where) {
  if (!v.is_string()) config_fail(where, "expected a string");
  return v.get<std::string>();
}

bool boolean_or(const json& obj, const std::string& where, const char* key,
                bool fallback) {
  const json* v = find(obj, key);
  if (!v) return fallback;
  if (!v->is_boolean())
    config_fail(join_path(where, key), "expected true or false");
  return v->get<bool>();
}

Eigen::MatrixXd parse_point_rows(const json& v, const std::string& where) {
  if (!v.is_array() || v.empty())
    config_fail(where, "expected a non-empty array of points");
  const bool nested = v.front().is_array();
  const int rows = static_cast<int>(v.size());
  const int cols = nested ? static_cast<int>(v.front().size()) : 1;
  if (nested && cols == 0) config_fail(where, "points must be non-empty");
  Eigen::MatrixXd out(rows, cols);
  for (int i = 0; i < rows; ++i) {
    const json& row = v[i];
    if (nested) {
      if (!row.is_array() || static_cast<int>(row.size()) != cols)
        config_fail(where, "points must all have the same dimension");
      for (int j = 0; j < cols; ++j)
        out(i, j) = require_number(
            row[j], where + "[" + std::to_string(i) + "]");
    } else {
      out(i, 0) = require_number(row, where + "[" + std::to_string(i) + "]");
    }
  }
  return out;
}

void parse_data_section(const json& obj, RunConfig& cfg) {
  check_keys(obj, "data", {"file", "x_bounds"});
  const json* file = find(obj, "file");
  if (!file) config_fail("data.file", "is required");
  cfg.data_file = cfg.base_dir / require_string(*file, "data.file");
  if (!std::filesystem::exists(cfg.data_file))
    config_fail("data.file",
                "file does not exist: " + cfg.data_file.string());
  if (const json* xb = find(obj, "x_bounds")) {
    if (!xb->is_array() || xb->empty())
      config_fail("data.x_bounds", "expected an array of [lo, hi] pairs");
    std::vector<Bounds> bounds;
    int i = 0;
    for (const json& pair : *xb) {
      const std::string where = "data.x_bounds[" + std::to_string(i++) + "]";
      if (!pair.is_array() || pair.size() != 2)
        config_fail(where, "expected [lo, hi]");
      Bounds b{require_number(pair[0], where), require_number(pair[1], where)};
      if (!(b.hi > b.lo)) config_fail(where, "needs lo < hi");
      bounds.push_back(b);
    }
    cfg.x_bounds = std::move(bounds);
  }
}

ParameterConfig parse_parameter(const json& obj, const std::string& where) {
  check_keys(obj, where, {"name", "role", "lower", "upper", "constraints"});
  ParameterConfig p;
  const json* name = find(obj, "name");
  if (!name) config_fail(join_path(where, "name"), "is required");
  p.name = require_string(*name, join_path(where, "name"));
  const json* role = find(obj, "role");
  if (!role) config_fail(join_path(where, "role"), "is required");
  const std::string role_text = require_string(*role, join_path(where, "role"));
  if (role_text == "functional")
    p.role = ParameterSpec::Role::functional;
  else if (role_text == "constant")
    p.role = ParameterSpec::Role::constant;
  else
    config_fail(join_path(where, "role"),
                "expected \"functional\" or \"constant\"");
  const json* lower = find(obj, "lower");
  const json* upper = find(obj, "upper");
  if (!lower || !upper)
    config_fail(where, "needs both \"lower\" and \"upper\"");
  p.lower = require_number(*lower, join_path(where, "lower"));
  p.upper = require_number(*upper, join_path(where, "upper"));
  if (const json* cons = find(obj, "constraints")) {
    if (!cons->is_array())
      config_fail(join_path(where, "constraints"), "expected an array");
    int i = 0;
    for (const json& c : *cons) {
      const std::string cw =
          join_path(where, "constraints[" + std::to_string(i++) + "]");
      check_keys(c, cw, {"x", "lower", "upper"});
      ConstraintConfig cc;
      const json* x = find(c, "x");
      if (!x) config_fail(join_path(cw, "x"), "is required");
      if (x->is_array()) {
        cc.x_raw.resize(static_cast<int>(x->size()));
        for (int j = 0; j < cc.x_raw.size(); ++j)
          cc.x_raw[j] = require_number((*x)[j], join_path(cw, "x"));
      } else {
        cc.x_raw = Eigen::VectorXd::Constant(
            1, require_number(*x, join_path(cw, "x")));
      }
      const json* clo = find(c, "lower");
      const json* chi = find(c, "upper");
      if (!clo || !chi) config_fail(cw, "needs both \"lower\" and \"upper\"");
      cc.lower = require_number(*clo, join_path(cw, "lower"));
      cc.upper = require_number(*chi, join_path(cw, "upper"));
      p.constraints.push_back(std::move(cc));
    }
  }
  return p;
}

void parse_model_section(const json& obj, RunConfig& cfg) {
  check_keys(obj, "model",
             {"variant", "link", "mu_theta", "hyper", "parameters"});
  if (const json* v = find(obj, "variant"))
    cfg.variant = parse_variant(require_string(*v, "model.variant"));
  if (const json* l = find(obj, "link"))
    cfg.link = linkfun::parse(require_string(*l, "model.link"));
  if (const json* mu = find(obj, "mu_theta"))
    cfg.mu_theta = require_number(*mu, "model.mu_theta");

  cfg.hyper.a_y = 5.0;
  cfg.hyper.b_y = 5.0;
  cfg.hyper.a_lambda_theta = default_a_lambda_theta(cfg.link);
  cfg.hyper.b_lambda_theta = cfg.hyper.a_lambda_theta;
  cfg.hyper.b_rho = 0.2;
  if (const json* h = find(obj, "hyper")) {
    check_keys(*h, "model.hyper",
               {"a_y", "b_y", "a_lambda_theta", "b_lambda_theta", "b_rho"});
    cfg.hyper.a_y = positive_number(*h, "model.hyper", "a_y", cfg.hyper.a_y);
    cfg.hyper.b_y = positive_number(*h, "model.hyper", "b_y", cfg.hyper.b_y);
    cfg.hyper.a_lambda_theta = positive_number(
        *h, "model.hyper", "a_lambda_theta", cfg.hyper.a_lambda_theta);
    cfg.hyper.b_lambda_theta = positive_number(
        *h, "model.hyper", "b_lambda_theta", cfg.hyper.b_lambda_theta);
    cfg.hyper.b_rho =
        positive_number(*h, "model.hyper", "b_rho", cfg.hyper.b_rho);
  }

  const json* params = find(obj, "parameters");
  if (!params) config_fail("model.parameters", "is required");
  if (!params->is_array() || params->empty() || params->size() > 2)
    config_fail("model.parameters", "expected one or two parameter objects");
  int i = 0;
  for (const json& p : *params)
    cfg.parameters.push_back(
        parse_parameter(p, "model.parameters[" + std::to_string(i++) + "]"));
}

void parse_chains_section(const json& obj, RunConfig& cfg) {
  check_keys(obj, "chains",
             {"n_burn", "n_post", "thin", "n_chains", "adapt_interval"});
  auto& c = cfg.chains;
  c.n_burn = integer_or(obj, "chains", "n_burn", c.n_burn);
  c.n_post = integer_or(obj, "chains", "n_post", c.n_post);
  c.thin = integer_or(obj, "chains", "thin", c.thin);
  c.n_chains = integer_or(obj, "chains", "n_chains", c.n_chains);
  c.adapt_interval = integer_or(obj, "chains", "adapt_interval",
                                c.adapt_interval);
}

void parse_simulator_section(const json& obj, RunConfig& cfg) {
  check_keys(obj, "simulator",
             {"builtin", "command", "external", "concurrent_safe",
              "timeout_s"});
  auto& s = cfg.simulator;
  const json* builtin = find(obj, "builtin");
  const json* command = find(obj, "command");
  const json* external = find(obj, "external");
  const int picked = (builtin != nullptr) + (command != nullptr) +
                     (external != nullptr);
  if (picked != 1)
    config_fail("simulator",
                "pick exactly one of \"builtin\", \"command\", \"external\"");
  s.concurrent_safe =
      boolean_or(obj, "simulator", "concurrent_safe", false);
  s.timeout_s = positive_number(obj, "simulator", "timeout_s", 60.0);
  if (builtin) {
    s.kind = SimulatorChoice::Kind::builtin;
    s.builtin_name = require_string(*builtin, "simulator.builtin");
  } else if (command) {
    s.kind = SimulatorChoice::Kind::external_command;
    if (command->is_string()) {
      s.command = {command->get<std::string>()};
    } else if (command->is_array() && !command->empty()) {
      for (const json& part : *command)
        s.command.push_back(require_string(part, "simulator.command"));
    } else {
      config_fail("simulator.command",
                  "expected a command string or argument array");
    }
  } else {
    if (!external->is_boolean() || !external->get<bool>())
      config_fail("simulator.external", "expected true");
    s.kind = SimulatorChoice::Kind::external_unattached;
  }
}

void parse_prediction_section(const json& obj, RunConfig& cfg) {
  check_keys(obj, "prediction", {"x", "file"});
  const json* x = find(obj, "x");
  const json* file = find(obj, "file");
  if ((x != nullptr) == (file != nullptr))
    config_fail("prediction", "pick exactly one of \"x\", \"file\"");
  if (x) {
    cfg.prediction_x = parse_point_rows(*x, "prediction.x");
  } else {
    const std::filesystem::path path =
        cfg.base_dir / require_string(*file, "prediction.file");
    if (!std::filesystem::exists(path))
      config_fail("prediction.file", "file does not exist: " + path.string());
    const io::Table t = io::read_csv(path);
    cfg.prediction_x = t.values;
  }
}

RunConfig parse_document(const json& doc,
                         const std::filesystem::path& base_dir) {
  if (!doc.is_object())
    fail(ErrorCode::config, "config root must be a JSON object");
  check_keys(doc, "",
             {"seed", "out_dir", "data", "model", "chains", "simulator",
              "prediction", "diagnostics", "constants"});

  RunConfig cfg;
  cfg.base_dir = base_dir;

  if (const json* seed = find(doc, "seed")) {
    if (!seed->is_number_unsigned())
      config_fail("seed", "expected a non-negative integer");
    cfg.seed = seed->get<std::uint64_t>();
  }
  if (const json* out = find(doc, "out_dir"))
    cfg.out_dir = require_string(*out, "out_dir");

  const json* data = find(doc, "data");
  if (!data) config_fail("data", "section is required");
  parse_data_section(*data, cfg);

  const json* model = find(doc, "model");
  if (!model) config_fail("model", "section is required");
  parse_model_section(*model, cfg);

  if (const json* chains = find(doc, "chains"))
    parse_chains_section(*chains, cfg);
  cfg.chains.seed = cfg.seed;
  cfg.chains.validate();

  if (const json* sim = find(doc, "simulator"))
    parse_simulator_section(*sim, cfg);

  if (const json* pred = find(doc, "prediction"))
    parse_prediction_section(*pred, cfg);

  if (const json* diag = find(doc, "diagnostics")) {
    check_keys(*diag, "diagnostics", {"n_rep"});
    cfg.diag_n_rep = integer_or(*diag, "diagnostics", "n_rep", cfg.diag_n_rep);
    if (cfg.diag_n_rep < 1)
      config_fail("diagnostics.n_rep", "must be at least 1");
  }

  if (const json* consts = find(doc, "constants")) {
    if (!consts->is_object())
      config_fail("constants", "expected an object of named numbers");
    for (const auto& item : consts->items())
      cfg.constants[item.key()] =
          require_number(item.value(), join_path("constants", item.key()));
  }

  // Cheap structural validation before any chain starts; full ModelSpec
  // validation happens again once constraints are scaled.
  for (const auto& p : cfg.parameters)
    if (!(p.upper > p.lower))
      config_fail("model.parameters", "parameter " + p.name +
                                          " has an empty range");
  return cfg;
}

}  // namespace

RunConfig parse_config_text(const std::string& text,
                            const std::filesystem::path& base_dir) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    fail(ErrorCode::config, std::string("config parse error: ") + e.what());
  }
  return parse_document(doc, base_dir);
}

RunConfig parse_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  require(in.good(), ErrorCode::config,
          "cannot open config file " + path.string());
  std::string text((std::istreambuf_iterator<char>(in)),
                   std::istreambuf_iterator<char>());
  return parse_config_text(text, path.parent_path());
}

}  // namespace statecal::config
