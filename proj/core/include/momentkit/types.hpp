#pragma once

#include <Eigen/Dense>
#include <stdexcept>
#include <string>
#include <utility>

namespace momentkit {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

// Configuration input failed validation. `path` names the offending key,
// e.g. "dynamics.interaction.expr" or "fit.kappa[2]".
class ConfigError : public std::runtime_error {
 public:
  ConfigError(std::string path, const std::string& what)
      : std::runtime_error(path + ": " + what), path_(std::move(path)) {}
  const std::string& path() const { return path_; }

 private:
  std::string path_;
};

// An evaluation point fell outside the domain box.
class DomainViolation : public std::runtime_error {
 public:
  DomainViolation(int point_index, const std::string& what)
      : std::runtime_error(what), point_index_(point_index) {}
  int point_index() const { return point_index_; }

 private:
  int point_index_;
};

// A particle simulation failed: an agent left the (inflated) domain or its
// state stopped being finite.
class SimulationError : public std::runtime_error {
 public:
  SimulationError(double time, int agent, const std::string& what)
      : std::runtime_error(what), time_(time), agent_(agent) {}
  double time() const { return time_; }
  int agent() const { return agent_; }

 private:
  double time_;
  int agent_;
};

// An ODE solve produced a non-finite state. `time` is the first step at
// which the blow-up was detected.
class DivergedError : public std::runtime_error {
 public:
  DivergedError(double time, const std::string& what)
      : std::runtime_error(what), time_(time) {}
  double time() const { return time_; }

 private:
  double time_;
};

}  // namespace momentkit
