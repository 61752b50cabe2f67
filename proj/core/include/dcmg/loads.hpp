// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "dcmg/types.hpp"

namespace dcmg {

/// Parallel constant-impedance, constant-current and exponential load:
///   I_L(V) = Y V + I + V^(r-1) P*
/// A node without a load is represented by {0, 0, 0, 1}.
struct ZieLoad {
  double conductance = 0.0;       // Y_L, siemens
  double constant_current = 0.0;  // I_L bar, ampere
  double power = 0.0;             // P*_L
  double exponent = 1.0;          // r

  bool is_zip() const noexcept { return exponent == 0.0 || power == 0.0; }
  friend bool operator==(const ZieLoad&, const ZieLoad&) = default;
};

/// V^(r-1) P* computed as P* exp((r-1) ln V). Requires V > 0.
double exponential_current(const ZieLoad& load, double voltage);

/// Total load current. Throws std::domain_error for V <= 0.
double load_current(const ZieLoad& load, double voltage);

/// dI_L/dV = Y + (r-1) V^(r-2) P*. Throws std::domain_error for V <= 0.
double incremental_admittance(const ZieLoad& load, double voltage);

/// Absorbed power V * I_L(V).
double load_power(const ZieLoad& load, double voltage);

/// Power drawn by the exponential part, P* V^r.
double exponential_power(const ZieLoad& load, double voltage);

}  // namespace dcmg
