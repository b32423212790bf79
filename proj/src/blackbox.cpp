// Copyright 2026 the rarebound authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "rarebound/blackbox.hpp"

#include <fcntl.h>
#include <poll.h>
#include <signal.h>
#include <sys/wait.h>
#include <unistd.h>

#include <cerrno>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <mutex>
#include <sstream>

namespace rarebound {

// ---- Box -------------------------------------------------------------------

Box::Box(Eigen::VectorXd lo, Eigen::VectorXd hi)
    : lower(std::move(lo)), upper(std::move(hi)) {
  if (lower.size() != upper.size() || lower.size() < 1)
    throw PreconditionError("box bounds must have equal, positive dimension");
  for (int i = 0; i < dim(); ++i)
    if (!(lower[i] < upper[i]))
      throw PreconditionError("box requires lower[i] < upper[i]");
}

Box Box::cube(double lo, double hi, int d) {
  return Box(Eigen::VectorXd::Constant(d, lo), Eigen::VectorXd::Constant(d, hi));
}

bool Box::contains(const Eigen::Ref<const Eigen::VectorXd>& x) const {
  if (x.size() != lower.size()) return false;
  for (int i = 0; i < dim(); ++i)
    if (x[i] < lower[i] || x[i] > upper[i]) return false;
  return true;
}

// ---- InputDistribution ------------------------------------------------------

InputDistribution InputDistribution::uniform_on_box(const Box& box) {
  InputDistribution d;
  d.box_ = box;
  return d;
}

InputDistribution InputDistribution::independent_marginals(
    const Box& box, std::vector<Marginal> marginals) {
  if (static_cast<int>(marginals.size()) != box.dim())
    throw PreconditionError("one marginal per dimension required");
  for (const auto& m : marginals)
    if (m.kind == Marginal::Kind::truncated_normal && !(m.sigma > 0.0))
      throw PreconditionError("truncated normal needs sigma > 0");
  InputDistribution d;
  d.box_ = box;
  d.marginals_ = std::move(marginals);
  return d;
}

void InputDistribution::sample(Rng& rng, Eigen::Ref<Eigen::VectorXd> out) const {
  const int d = dim();
  if (marginals_.empty()) {
    for (int i = 0; i < d; ++i) out[i] = rng.uniform(box_.lower[i], box_.upper[i]);
    return;
  }
  for (int i = 0; i < d; ++i) {
    const Marginal& m = marginals_[i];
    if (m.kind == Marginal::Kind::uniform) {
      out[i] = rng.uniform(box_.lower[i], box_.upper[i]);
    } else {
      // inverse-CDF sampling of the normal truncated to [lower, upper]
      const double za = (box_.lower[i] - m.mu) / m.sigma;
      const double zb = (box_.upper[i] - m.mu) / m.sigma;
      const double pa = norm_cdf(za), pb = norm_cdf(zb);
      const double u = pa + rng.uniform() * (pb - pa);
      double x = m.mu + m.sigma * norm_quantile(u);
      x = std::min(std::max(x, box_.lower[i]), box_.upper[i]);
      out[i] = x;
    }
  }
}

Eigen::MatrixXd InputDistribution::sample_matrix(Rng& rng,
                                                 Eigen::Index count) const {
  Eigen::MatrixXd out(count, dim());
  Eigen::VectorXd x(dim());
  for (Eigen::Index r = 0; r < count; ++r) {
    sample(rng, x);
    out.row(r) = x;
  }
  return out;
}

double InputDistribution::log_density(
    const Eigen::Ref<const Eigen::VectorXd>& x) const {
  if (!box_.contains(x)) return -std::numeric_limits<double>::infinity();
  if (marginals_.empty()) return 0.0;
  double ld = 0.0;
  for (int i = 0; i < dim(); ++i) {
    const Marginal& m = marginals_[i];
    if (m.kind == Marginal::Kind::truncated_normal) {
      const double z = (x[i] - m.mu) / m.sigma;
      ld += -0.5 * z * z;
    }
  }
  return ld;
}

// ---- BudgetedObjective ------------------------------------------------------

BudgetedObjective::BudgetedObjective(Evaluator evaluator, Box domain,
                                     std::uint64_t budget_total)
    : evaluator_(std::move(evaluator)),
      domain_(std::move(domain)),
      total_(budget_total) {
  if (!evaluator_) throw PreconditionError("objective needs an evaluator");
}

BudgetedObjective::BudgetedObjective(BudgetedObjective&& other) noexcept
    : evaluator_(std::move(other.evaluator_)),
      domain_(std::move(other.domain_)),
      total_(other.total_),
      used_(other.used_.load()) {}

double BudgetedObjective::eval(const Eigen::Ref<const Eigen::VectorXd>& x) {
  if (used_.load() >= total_)
    throw BudgetExhausted("all " + std::to_string(total_) + " calls consumed");
  if (!domain_.contains(x)) throw DomainViolation("point outside the domain box");
  // Reserve a slot; the check above makes the common error message cheap but
  // the reservation below is what enforces the contract under races.
  std::uint64_t used = used_.load();
  do {
    if (used >= total_)
      throw BudgetExhausted("all " + std::to_string(total_) + " calls consumed");
  } while (!used_.compare_exchange_weak(used, used + 1));

  double y;
  try {
    y = evaluator_(x);
  } catch (const EvalFailure&) {
    throw;
  } catch (const std::exception& e) {
    throw EvalFailure(std::string("evaluator threw: ") + e.what());
  }
  if (!std::isfinite(y)) throw EvalFailure("evaluator returned a non-finite value");
  return y;
}

// ---- toy function -----------------------------------------------------------

double sinc(double t) {
  if (std::abs(t) < 1e-6) {
    const double t2 = t * t;
    return 1.0 - t2 / 6.0 * (1.0 - t2 / 20.0);
  }
  return std::sin(t) / t;
}

double toy_f(double x1, double x2) { return -sinc(x1) - sinc(x2 + 2.0) + 2.0; }

void toy_f_batch(const Eigen::Ref<const Eigen::MatrixXd>& points,
                 Eigen::Ref<Eigen::VectorXd> out) {
  const Eigen::Index n = points.rows();
  for (Eigen::Index i = 0; i < n; ++i) out[i] = toy_f(points(i, 0), points(i, 1));
}

Box toy_box() { return Box::cube(-10.0, 10.0, 2); }

BudgetedObjective make_toy_objective(std::uint64_t budget) {
  return BudgetedObjective(
      [](const Eigen::VectorXd& x) { return toy_f(x[0], x[1]); }, toy_box(),
      budget);
}

// ---- external process adapter ----------------------------------------------

namespace {

/// One child process speaking the line protocol; access serialized by mutex.
class ExternalProcess {
 public:
  explicit ExternalProcess(ExternalProcessConfig config)
      : config_(std::move(config)) {
    if (config_.command.empty()) throw PreconditionError("empty command");
    ::signal(SIGPIPE, SIG_IGN);
  }

  ~ExternalProcess() { shutdown(); }

  double eval(const Eigen::VectorXd& x) {
    std::lock_guard<std::mutex> lock(mu_);
    if (pid_ < 0) start();
    write_request(x);
    const std::string line = read_line();
    return parse_value(line);
  }

 private:
  void start() {
    int to_child[2], from_child[2];
    if (::pipe(to_child) != 0 || ::pipe(from_child) != 0)
      throw ProcessFailure("pipe() failed");
    const pid_t pid = ::fork();
    if (pid < 0) throw ProcessFailure("fork() failed");
    if (pid == 0) {
      ::setpgid(0, 0);  // own process group, so shutdown reaps grandchildren
      ::dup2(to_child[0], STDIN_FILENO);
      ::dup2(from_child[1], STDOUT_FILENO);
      ::close(to_child[0]);
      ::close(to_child[1]);
      ::close(from_child[0]);
      ::close(from_child[1]);
      ::execl("/bin/sh", "sh", "-c", config_.command.c_str(), (char*)nullptr);
      std::_Exit(127);
    }
    ::close(to_child[0]);
    ::close(from_child[1]);
    pid_ = pid;
    in_fd_ = to_child[1];
    out_fd_ = from_child[0];
    buf_.clear();
  }

  void shutdown() noexcept {
    if (in_fd_ >= 0) ::close(in_fd_);
    if (out_fd_ >= 0) ::close(out_fd_);
    in_fd_ = out_fd_ = -1;
    if (pid_ > 0) {
      int status = 0;
      if (::waitpid(pid_, &status, WNOHANG) == 0) {
        ::kill(-pid_, SIGKILL);  // the whole group, including grandchildren
        ::kill(pid_, SIGKILL);
        ::waitpid(pid_, &status, 0);
      }
      pid_ = -1;
    }
  }

  [[noreturn]] void fail_with_exit_status(const std::string& context) {
    int status = 0;
    int exit_code = -1;
    if (pid_ > 0 && ::waitpid(pid_, &status, WNOHANG) == pid_) {
      if (WIFEXITED(status)) exit_code = WEXITSTATUS(status);
      pid_ = -1;
    }
    shutdown();
    throw ProcessFailure(context + " (exit status " +
                         std::to_string(exit_code) + ")");
  }

  void write_request(const Eigen::VectorXd& x) {
    char num[64];
    std::string req;
    for (Eigen::Index i = 0; i < x.size(); ++i) {
      std::snprintf(num, sizeof num, "%.17g", x[i]);
      if (i) req += ' ';
      req += num;
    }
    req += '\n';
    std::size_t off = 0;
    while (off < req.size()) {
      const ssize_t k = ::write(in_fd_, req.data() + off, req.size() - off);
      if (k < 0) {
        if (errno == EINTR) continue;
        fail_with_exit_status("write to evaluator failed");
      }
      off += static_cast<std::size_t>(k);
    }
  }

  std::string read_line() {
    const auto deadline = std::chrono::steady_clock::now() +
                          std::chrono::duration<double>(config_.timeout_sec);
    for (;;) {
      const auto nl = buf_.find('\n');
      if (nl != std::string::npos) {
        std::string line = buf_.substr(0, nl);
        buf_.erase(0, nl + 1);
        return line;
      }
      const auto now = std::chrono::steady_clock::now();
      if (now >= deadline) {
        shutdown();
        throw Timeout("no response within " +
                      std::to_string(config_.timeout_sec) + " s");
      }
      const auto left = std::chrono::duration_cast<std::chrono::milliseconds>(
          deadline - now);
      struct pollfd pfd = {out_fd_, POLLIN, 0};
      const int pr = ::poll(&pfd, 1, static_cast<int>(left.count()) + 1);
      if (pr < 0) {
        if (errno == EINTR) continue;
        fail_with_exit_status("poll on evaluator failed");
      }
      if (pr == 0) continue;  // loop re-checks the deadline
      char chunk[4096];
      const ssize_t k = ::read(out_fd_, chunk, sizeof chunk);
      if (k < 0) {
        if (errno == EINTR) continue;
        fail_with_exit_status("read from evaluator failed");
      }
      if (k == 0) fail_with_exit_status("evaluator closed its output");
      buf_.append(chunk, static_cast<std::size_t>(k));
    }
  }

  double parse_value(const std::string& line) {
    const char* s = line.c_str();
    char* end = nullptr;
    errno = 0;
    const double v = std::strtod(s, &end);
    if (end == s || errno == ERANGE) {
      shutdown();
      throw ProcessFailure("malformed response line: '" + line + "'");
    }
    while (*end == ' ' || *end == '\t' || *end == '\r') ++end;
    if (*end != '\0') {
      shutdown();
      throw ProcessFailure("trailing garbage in response line: '" + line + "'");
    }
    return v;
  }

  ExternalProcessConfig config_;
  std::mutex mu_;
  pid_t pid_ = -1;
  int in_fd_ = -1;
  int out_fd_ = -1;
  std::string buf_;
};

}  // namespace

BudgetedObjective make_external_objective(const ExternalProcessConfig& config,
                                          Box domain, std::uint64_t budget) {
  auto proc = std::make_shared<ExternalProcess>(config);
  return BudgetedObjective(
      [proc](const Eigen::VectorXd& x) { return proc->eval(x); },
      std::move(domain), budget);
}

}  // namespace rarebound
