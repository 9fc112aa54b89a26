#include "external_sim.hpp"

#include <fcntl.h>
#include <poll.h>
#include <signal.h>
#include <sys/wait.h>
#include <unistd.h>

#include <cerrno>
#include <chrono>
#include <cstdio>
#include <cstring>
#include <sstream>

#include "error.hpp"
#include "io.hpp"

namespace statecal {

namespace {
// Keeps pipe usage bounded while still exercising out-of-order pipelining.
constexpr int kMaxOutstanding = 64;

[[noreturn]] void protocol_fail(const std::string& what,
                                const std::string& request) {
  std::string line = request;
  if (!line.empty() && line.back() == '\n') line.pop_back();
  fail(ErrorCode::simulator_protocol, what + " (request: \"" + line + "\")");
}
}  // namespace

ExternalSimulator::ExternalSimulator(std::vector<std::string> command,
                                     int dim_x, int n_params, double timeout_s,
                                     bool concurrent_safe)
    : command_(std::move(command)),
      dim_x_(dim_x),
      n_params_(n_params),
      timeout_s_(timeout_s),
      concurrent_safe_(concurrent_safe) {
  require(!command_.empty(), ErrorCode::config,
          "external simulator command is empty");
  require(dim_x_ >= 1 && n_params_ >= 1, ErrorCode::config,
          "external simulator needs dim_x >= 1 and n_params >= 1");
  require(timeout_s_ > 0.0, ErrorCode::config,
          "external simulator timeout must be positive");

  int in_pipe[2];   // parent -> child
  int out_pipe[2];  // child -> parent
  require(::pipe(in_pipe) == 0 && ::pipe(out_pipe) == 0, ErrorCode::runtime,
          "pipe() failed for external simulator");

  pid_ = ::fork();
  require(pid_ >= 0, ErrorCode::runtime, "fork() failed for external simulator");
  if (pid_ == 0) {
    ::dup2(in_pipe[0], STDIN_FILENO);
    ::dup2(out_pipe[1], STDOUT_FILENO);
    ::close(in_pipe[0]);
    ::close(in_pipe[1]);
    ::close(out_pipe[0]);
    ::close(out_pipe[1]);
    std::vector<char*> argv;
    argv.reserve(command_.size() + 1);
    for (auto& s : command_) argv.push_back(s.data());
    argv.push_back(nullptr);
    ::execvp(argv[0], argv.data());
    std::fprintf(stderr, "exec %s: %s\n", argv[0], std::strerror(errno));
    ::_exit(127);
  }
  ::close(in_pipe[0]);
  ::close(out_pipe[1]);
  to_child_ = in_pipe[1];
  from_child_ = out_pipe[0];
  ::signal(SIGPIPE, SIG_IGN);
}

ExternalSimulator::~ExternalSimulator() { shutdown(); }

void ExternalSimulator::shutdown() noexcept {
  if (to_child_ >= 0) ::close(to_child_);
  if (from_child_ >= 0) ::close(from_child_);
  to_child_ = from_child_ = -1;
  if (pid_ > 0) {
    // Give the child a moment to exit on EOF, then insist.
    for (int i = 0; i < 50; ++i) {
      if (::waitpid(pid_, nullptr, WNOHANG) != 0) {
        pid_ = -1;
        return;
      }
      ::usleep(10000);
    }
    ::kill(pid_, SIGKILL);
    ::waitpid(pid_, nullptr, 0);
    pid_ = -1;
  }
}

std::string ExternalSimulator::request_line(std::uint64_t id,
                                            const Eigen::VectorXd& x,
                                            const Eigen::VectorXd& t) const {
  std::string line = "EVAL " + std::to_string(id);
  for (Eigen::Index k = 0; k < x.size(); ++k)
    line += " " + io::format_double(x(k));
  for (Eigen::Index k = 0; k < t.size(); ++k)
    line += " " + io::format_double(t(k));
  line += "\n";
  return line;
}

void ExternalSimulator::send(const std::string& line) {
  size_t off = 0;
  while (off < line.size()) {
    const ssize_t n = ::write(to_child_, line.data() + off, line.size() - off);
    if (n < 0) {
      if (errno == EINTR) continue;
      protocol_fail("simulator stdin closed (" + std::string(std::strerror(errno)) + ")",
                    line);
    }
    off += static_cast<size_t>(n);
  }
}

void ExternalSimulator::read_more(const std::string& request) {
  struct pollfd pfd{from_child_, POLLIN, 0};
  const int timeout_ms = static_cast<int>(timeout_s_ * 1000.0);
  const int rc = ::poll(&pfd, 1, timeout_ms);
  if (rc == 0)
    protocol_fail("simulator response timed out after " +
                      io::format_double(timeout_s_) + " s", request);
  require(rc > 0, ErrorCode::runtime, "poll() failed on simulator pipe");

  char chunk[4096];
  const ssize_t n = ::read(from_child_, chunk, sizeof chunk);
  if (n == 0) protocol_fail("simulator exited before responding", request);
  if (n < 0) {
    if (errno == EINTR) return;
    protocol_fail("read from simulator failed (" +
                      std::string(std::strerror(errno)) + ")", request);
  }
  rx_buffer_.append(chunk, static_cast<size_t>(n));

  size_t pos;
  while ((pos = rx_buffer_.find('\n')) != std::string::npos) {
    std::string line = rx_buffer_.substr(0, pos);
    rx_buffer_.erase(0, pos + 1);
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;

    std::istringstream in(line);
    std::string tag;
    std::uint64_t id = 0;
    in >> tag >> id;
    if (!in || (tag != "OK" && tag != "ERR"))
      protocol_fail("malformed simulator response \"" + line + "\"", request);
    if (tag == "ERR") {
      std::string message;
      std::getline(in, message);
      if (!message.empty() && message.front() == ' ') message.erase(0, 1);
      protocol_fail("simulator error for id " + std::to_string(id) + ": " +
                        message, request);
    }
    double y = 0.0;
    in >> y;
    if (!in)
      protocol_fail("malformed simulator response \"" + line + "\"", request);
    ready_[id] = y;
  }
}

double ExternalSimulator::await(std::uint64_t id, const std::string& request) {
  const auto deadline = std::chrono::steady_clock::now() +
                        std::chrono::duration<double>(timeout_s_);
  for (;;) {
    const auto it = ready_.find(id);
    if (it != ready_.end()) {
      const double y = it->second;
      ready_.erase(it);
      return y;
    }
    if (std::chrono::steady_clock::now() > deadline)
      protocol_fail("simulator response timed out after " +
                        io::format_double(timeout_s_) + " s", request);
    read_more(request);
  }
}

double ExternalSimulator::eval(const Eigen::VectorXd& x_raw,
                               const Eigen::VectorXd& t_raw) {
  require(x_raw.size() == dim_x_ && t_raw.size() == n_params_,
          ErrorCode::invalid_argument, "simulator input dimensions mismatch");
  const std::uint64_t id = next_id_++;
  const std::string line = request_line(id, x_raw, t_raw);
  send(line);
  return await(id, line);
}

Eigen::VectorXd ExternalSimulator::eval_batch(const Eigen::MatrixXd& x_raw,
                                              const Eigen::MatrixXd& t_raw) {
  require(x_raw.rows() == t_raw.rows(), ErrorCode::invalid_argument,
          "eval_batch: input and parameter row counts differ");
  const auto n = x_raw.rows();
  Eigen::VectorXd out(n);
  Eigen::Index sent = 0, done = 0;
  std::vector<std::uint64_t> ids(static_cast<size_t>(n));
  std::vector<std::string> lines(static_cast<size_t>(n));
  while (done < n) {
    while (sent < n && sent - done < kMaxOutstanding) {
      ids[sent] = next_id_++;
      lines[sent] = request_line(ids[sent], x_raw.row(sent), t_raw.row(sent));
      send(lines[sent]);
      ++sent;
    }
    out(done) = await(ids[done], lines[done]);
    ++done;
  }
  return out;
}

}  // namespace statecal
