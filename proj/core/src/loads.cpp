// SPDX-License-Identifier: Apache-2.0
#include "dcmg/loads.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace dcmg {
namespace {

void require_positive(double v) {
  if (!(v > 0.0)) {
    throw std::domain_error("load evaluated at nonpositive voltage " + std::to_string(v));
  }
}

}  // namespace

double exponential_current(const ZieLoad& load, double voltage) {
  if (load.power == 0.0) return 0.0;
  require_positive(voltage);
  return load.power * std::exp((load.exponent - 1.0) * std::log(voltage));
}

double load_current(const ZieLoad& load, double voltage) {
  require_positive(voltage);
  return load.conductance * voltage + load.constant_current + exponential_current(load, voltage);
}

double incremental_admittance(const ZieLoad& load, double voltage) {
  require_positive(voltage);
  if (load.power == 0.0 || load.exponent == 1.0) return load.conductance;
  return load.conductance +
         (load.exponent - 1.0) * load.power * std::exp((load.exponent - 2.0) * std::log(voltage));
}

double load_power(const ZieLoad& load, double voltage) {
  return voltage * load_current(load, voltage);
}

double exponential_power(const ZieLoad& load, double voltage) {
  return voltage * exponential_current(load, voltage);
}

}  // namespace dcmg
