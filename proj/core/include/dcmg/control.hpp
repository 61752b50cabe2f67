// SPDX-License-Identifier: Apache-2.0
#pragma once

// Primary PI gains and the consensus-based secondary layer.

#include "dcmg/network.hpp"
#include "dcmg/types.hpp"

#include <span>
#include <string>
#include <vector>

namespace dcmg {

/// Feedback gains of one DGU: V_t = k1 V + k2 I_t + k3 v + k4 omega.
struct PrimaryGains {
  double k1 = 0.0;
  double k2 = 0.0;
  double k3 = 0.0;
  double k4 = 0.0;

  friend bool operator==(const PrimaryGains&, const PrimaryGains&) = default;
};

/// Closed-loop coefficients of dI_t/dt = alpha V + beta I_t + gamma v + delta omega.
struct LoopCoefficients {
  double alpha = 0.0;
  double beta = 0.0;
  double gamma = 0.0;
  double delta = 0.0;

  /// gamma - alpha * beta; negative for every stabilizing gain set.
  double mu() const noexcept { return gamma - alpha * beta; }
};

LoopCoefficients derive_abgd(const PrimaryGains& k, double R_t, double L_t);
PrimaryGains gains_from_coefficients(const LoopCoefficients& c, double R_t, double L_t);

struct GainCheck {
  bool ok = true;
  std::vector<std::string> violations;

  explicit operator bool() const noexcept { return ok; }
};

/// Strict membership test for k1 < 1, k2 < R_t, 0 < k3 < (k1-1)(k2-R_t)/L_t.
GainCheck check_gain_set(double k1, double k2, double k3, double R_t, double L_t);

/// Deterministic interior point of the stabilizing gain region:
/// k1 = 0, k2 = R_t - 1, k3 = margin (k1-1)(k2-R_t)/L_t, k4 = k1 - 1.
PrimaryGains sample_stabilizing_gains(double R_t, double L_t, double margin);

/// Per-DGU gains together with the derived loop coefficients, stored as
/// vectors so that the assembled matrices can use them directly.
struct GainSet {
  std::vector<PrimaryGains> k;
  Vector alpha;
  Vector beta;
  Vector gamma;
  Vector delta;
  Vector mu;

  int size() const noexcept { return static_cast<int>(k.size()); }
};

GainSet make_gain_set(std::span<const PrimaryGains> gains, std::span<const DguParams> dgus);

/// True when every DGU's gains lie in the stabilizing region and k4 = k1 - 1.
bool secondary_compatible(const GainSet& gains, std::span<const DguParams> dgus,
                          double rtol = 1e-12);

struct ConsensusRates {
  Vector Omega_dot;  // L_c [I^s]^-1 I_t
  Vector omega;      // [I^s]^-1 L_c Omega
};

ConsensusRates consensus_rhs(const Vector& I_t, const Vector& Omega, const Matrix& L_c,
                             const Vector& ratings);

}  // namespace dcmg
