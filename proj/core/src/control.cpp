// SPDX-License-Identifier: Apache-2.0
#include "dcmg/control.hpp"

#include <cmath>
#include <sstream>

namespace dcmg {

LoopCoefficients derive_abgd(const PrimaryGains& k, double R_t, double L_t) {
  if (!(L_t > 0.0)) throw ConfigError("derive_abgd: L_t must be positive");
  return {(k.k1 - 1.0) / L_t, (k.k2 - R_t) / L_t, k.k3 / L_t, k.k4 / L_t};
}

PrimaryGains gains_from_coefficients(const LoopCoefficients& c, double R_t, double L_t) {
  if (!(L_t > 0.0)) throw ConfigError("gains_from_coefficients: L_t must be positive");
  return {c.alpha * L_t + 1.0, c.beta * L_t + R_t, c.gamma * L_t, c.delta * L_t};
}

GainCheck check_gain_set(double k1, double k2, double k3, double R_t, double L_t) {
  GainCheck out;
  auto fail = [&](std::string msg) {
    out.ok = false;
    out.violations.push_back(std::move(msg));
  };
  if (!(k1 < 1.0)) fail("k1 < 1 violated");
  if (!(k2 < R_t)) fail("k2 < R_t violated");
  if (!(k3 > 0.0)) fail("0 < k3 violated");
  const double bound = (k1 - 1.0) * (k2 - R_t) / L_t;
  if (!(k3 < bound)) {
    std::ostringstream os;
    os << "k3 < (k1-1)(k2-R_t)/L_t = " << bound << " violated";
    fail(os.str());
  }
  return out;
}

PrimaryGains sample_stabilizing_gains(double R_t, double L_t, double margin) {
  if (!(margin > 0.0 && margin < 1.0)) {
    throw ConfigError("sample_stabilizing_gains: margin must lie in (0, 1)");
  }
  if (!(L_t > 0.0)) throw ConfigError("sample_stabilizing_gains: L_t must be positive");
  constexpr double c = 1.0;
  const double k1 = 1.0 - c;
  const double k2 = R_t - c;
  const double k3 = margin * (k1 - 1.0) * (k2 - R_t) / L_t;
  return {k1, k2, k3, k1 - 1.0};
}

GainSet make_gain_set(std::span<const PrimaryGains> gains, std::span<const DguParams> dgus) {
  if (gains.size() != dgus.size()) {
    throw ConfigError("make_gain_set: " + std::to_string(gains.size()) + " gain sets for " +
                      std::to_string(dgus.size()) + " DGUs");
  }
  const Index n = static_cast<Index>(gains.size());
  GainSet g;
  g.k.assign(gains.begin(), gains.end());
  g.alpha.resize(n);
  g.beta.resize(n);
  g.gamma.resize(n);
  g.delta.resize(n);
  g.mu.resize(n);
  for (Index i = 0; i < n; ++i) {
    const LoopCoefficients c = derive_abgd(gains[i], dgus[i].R_t, dgus[i].L_t);
    g.alpha[i] = c.alpha;
    g.beta[i] = c.beta;
    g.gamma[i] = c.gamma;
    g.delta[i] = c.delta;
    g.mu[i] = c.mu();
  }
  return g;
}

bool secondary_compatible(const GainSet& gains, std::span<const DguParams> dgus, double rtol) {
  if (static_cast<std::size_t>(gains.size()) != dgus.size()) return false;
  for (std::size_t i = 0; i < dgus.size(); ++i) {
    const PrimaryGains& k = gains.k[i];
    if (!check_gain_set(k.k1, k.k2, k.k3, dgus[i].R_t, dgus[i].L_t)) return false;
    const double target = k.k1 - 1.0;
    if (std::abs(k.k4 - target) > rtol * std::max(1.0, std::abs(target))) return false;
  }
  return true;
}

ConsensusRates consensus_rhs(const Vector& I_t, const Vector& Omega, const Matrix& L_c,
                             const Vector& ratings) {
  const Index n = ratings.size();
  if (I_t.size() != n || Omega.size() != n || L_c.rows() != n || L_c.cols() != n) {
    throw ConfigError("consensus_rhs: dimension mismatch");
  }
  ConsensusRates out;
  out.Omega_dot = L_c * I_t.cwiseQuotient(ratings);
  out.omega = (L_c * Omega).cwiseQuotient(ratings);
  return out;
}

}  // namespace dcmg
