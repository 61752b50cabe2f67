// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <Eigen/Dense>

#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

namespace dcmg {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;
using Index = Eigen::Index;

/// Invalid or inconsistent microgrid description. The message carries a
/// path such as "dgus[2].R_t" when the error comes from a config document.
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A point-of-coupling voltage reached zero (or below the configured floor).
class VoltageCollapse : public std::domain_error {
 public:
  VoltageCollapse(int node, double voltage,
                  double time = std::numeric_limits<double>::quiet_NaN());

  int node() const noexcept { return node_; }
  double voltage() const noexcept { return voltage_; }
  double time() const noexcept { return time_; }

 private:
  int node_;
  double voltage_;
  double time_;
};

/// Iterative solver failed to converge; `history` holds the residual (or
/// step-gap) sequence observed before giving up.
class SolverError : public std::runtime_error {
 public:
  SolverError(const std::string& what, std::vector<double> history = {})
      : std::runtime_error(what), history_(std::move(history)) {}

  const std::vector<double>& history() const noexcept { return history_; }

 private:
  std::vector<double> history_;
};

}  // namespace dcmg
