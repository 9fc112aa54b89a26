#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <vector>

#include "simulator.hpp"

namespace statecal {

// Client for an external simulator process speaking the line protocol
//   EVAL <id> <x_1> ... <x_dx> <t_1> ... <t_p>\n
// answered by
//   OK <id> <y>\n      or      ERR <id> <message>\n
// over the child's standard input/output.  Numbers travel as full
// round-trip decimals; responses may arrive out of order and are matched
// by id.  One instance owns one child process (one protocol session).
class ExternalSimulator final : public Simulator {
 public:
  ExternalSimulator(std::vector<std::string> command, int dim_x, int n_params,
                    double timeout_s = 60.0, bool concurrent_safe = false);
  ~ExternalSimulator() override;

  ExternalSimulator(const ExternalSimulator&) = delete;
  ExternalSimulator& operator=(const ExternalSimulator&) = delete;

  int dim_x() const override { return dim_x_; }
  int n_params() const override { return n_params_; }
  bool concurrent_safe() const override { return concurrent_safe_; }

  double eval(const Eigen::VectorXd& x_raw,
              const Eigen::VectorXd& t_raw) override;
  // Pipelines up to a bounded window of outstanding requests.
  Eigen::VectorXd eval_batch(const Eigen::MatrixXd& x_raw,
                             const Eigen::MatrixXd& t_raw) override;

 private:
  std::string request_line(std::uint64_t id, const Eigen::VectorXd& x,
                           const Eigen::VectorXd& t) const;
  void send(const std::string& line);
  // Blocks until the response for `id` arrives; stashes any others.
  double await(std::uint64_t id, const std::string& request);
  void read_more(const std::string& request);  // one poll+read round
  void shutdown() noexcept;

  std::vector<std::string> command_;
  int dim_x_;
  int n_params_;
  double timeout_s_;
  bool concurrent_safe_;

  int pid_ = -1;
  int to_child_ = -1;
  int from_child_ = -1;
  std::string rx_buffer_;
  std::map<std::uint64_t, double> ready_;
  std::uint64_t next_id_ = 1;
};

// Serializes a shared simulator behind a mutex so several chains can use a
// single protocol session that is not concurrency-safe.
class SerializedSimulator final : public Simulator {
 public:
  explicit SerializedSimulator(std::shared_ptr<Simulator> inner)
      : inner_(std::move(inner)) {}

  int dim_x() const override { return inner_->dim_x(); }
  int n_params() const override { return inner_->n_params(); }
  bool concurrent_safe() const override { return true; }

  double eval(const Eigen::VectorXd& x, const Eigen::VectorXd& t) override {
    std::lock_guard<std::mutex> lock(mutex_);
    return inner_->eval(x, t);
  }
  Eigen::VectorXd eval_batch(const Eigen::MatrixXd& x,
                             const Eigen::MatrixXd& t) override {
    std::lock_guard<std::mutex> lock(mutex_);
    return inner_->eval_batch(x, t);
  }

 private:
  std::shared_ptr<Simulator> inner_;
  std::mutex mutex_;
};

}  // namespace statecal
