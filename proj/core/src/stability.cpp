// SPDX-License-Identifier: Apache-2.0
#include "dcmg/stability.hpp"

#include "dcmg/equilibrium.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

namespace dcmg {
namespace {

Definiteness combine(Definiteness a, Definiteness b) {
  if (a == Definiteness::indefinite || b == Definiteness::indefinite) {
    return Definiteness::indefinite;
  }
  if (a == Definiteness::positive_semidefinite || b == Definiteness::positive_semidefinite) {
    return Definiteness::positive_semidefinite;
  }
  return Definiteness::positive_definite;
}

Definiteness scalar_definiteness(const Vector& x, double tol) {
  Definiteness out = Definiteness::positive_definite;
  for (Index i = 0; i < x.size(); ++i) {
    if (x[i] > tol) continue;
    if (x[i] >= -tol) {
      out = combine(out, Definiteness::positive_semidefinite);
    } else {
      return Definiteness::indefinite;
    }
  }
  return out;
}

bool delta_matches_alpha(const GainSet& gains) {
  for (Index i = 0; i < gains.alpha.size(); ++i) {
    if (std::abs(gains.delta[i] - gains.alpha[i]) >
        1e-12 * std::max(1.0, std::abs(gains.alpha[i]))) {
      return false;
    }
  }
  return true;
}

struct Blocks {
  Vector a, b, d;
};

Blocks P_pair_blocks(const GainSet& g) {
  return {g.beta.cwiseQuotient(g.mu), g.gamma.cwiseQuotient(g.mu),
          g.alpha.cwiseProduct(g.gamma).cwiseQuotient(g.mu)};
}

Blocks negQ_pair_blocks(const GainSet& g) {
  return {-g.beta.cwiseAbs2().cwiseQuotient(g.mu),
          -g.beta.cwiseProduct(g.gamma).cwiseQuotient(g.mu),
          -g.gamma.cwiseAbs2().cwiseQuotient(g.mu)};
}

Vector secant_admittances(const MicrogridConfig& config, const Vector& V, const Vector& V_bar) {
  Vector out(config.n());
  for (int i = 0; i < config.n(); ++i) {
    out[i] = exponential_secant_admittance(config.dgus[i].load, V[i], V_bar[i]);
  }
  return out;
}

double max_abs(const Blocks& blk) {
  return std::max({blk.a.cwiseAbs().maxCoeff(), blk.b.cwiseAbs().maxCoeff(),
                   blk.d.cwiseAbs().maxCoeff()});
}

}  // namespace

const char* to_string(Definiteness d) {
  switch (d) {
    case Definiteness::positive_definite: return "positive definite";
    case Definiteness::positive_semidefinite: return "positive semidefinite";
    case Definiteness::indefinite: return "indefinite";
  }
  return "?";
}

Definiteness block_pd_test(const Vector& a, const Vector& b, const Vector& d) {
  if (a.size() != b.size() || a.size() != d.size()) {
    throw ConfigError("block_pd_test: block sizes differ");
  }
  Definiteness out = Definiteness::positive_definite;
  for (Index i = 0; i < a.size(); ++i) {
    const double scale = std::max({std::abs(a[i]), std::abs(b[i]), std::abs(d[i])});
    const double tol = 1e-12 * scale;
    const double det = a[i] * d[i] - b[i] * b[i];
    const double det_tol = 1e-12 * std::max(std::abs(a[i] * d[i]), b[i] * b[i]);
    if (a[i] > tol && det > det_tol) continue;
    if (a[i] >= -tol && d[i] >= -tol && det >= -det_tol) {
      out = Definiteness::positive_semidefinite;
    } else {
      return Definiteness::indefinite;
    }
  }
  return out;
}

Definiteness eigen_definiteness(const Matrix& m, double rtol) {
  if (m.size() == 0) return Definiteness::positive_definite;
  const double tol = rtol * m.cwiseAbs().maxCoeff();
  Eigen::SelfAdjointEigenSolver<Matrix> eig(m, Eigen::EigenvaluesOnly);
  const double lo = eig.eigenvalues().minCoeff();
  if (lo > tol) return Definiteness::positive_definite;
  if (lo >= -tol) return Definiteness::positive_semidefinite;
  return Definiteness::indefinite;
}

Matrix build_P(const MicrogridConfig& config, const GainSet& gains, ControlMode mode) {
  const int n = config.n();
  const int m = config.m();
  if (gains.size() != n) throw ConfigError("build_P: gain count");
  for (int i = 0; i < n; ++i) {
    if (gains.mu[i] == 0.0) {
      throw ConfigError("build_P: mu = gamma - alpha beta vanishes at DGU " + std::to_string(i));
    }
  }
  const StateLayout s{n, m, mode};
  Matrix P = Matrix::Zero(s.size(), s.size());
  const Blocks blk = P_pair_blocks(gains);
  const Vector C = config.capacitances();
  const Vector L = config.line_inductances();
  for (int i = 0; i < n; ++i) {
    P(s.V() + i, s.V() + i) = C[i];
    P(s.It() + i, s.It() + i) = blk.a[i];
    P(s.It() + i, s.v() + i) = blk.b[i];
    P(s.v() + i, s.It() + i) = blk.b[i];
    P(s.v() + i, s.v() + i) = blk.d[i];
    if (mode == ControlMode::secondary) P(s.Omega() + i, s.Omega() + i) = 1.0;
  }
  for (int l = 0; l < m; ++l) P(s.I() + l, s.I() + l) = L[l];
  return P;
}

Definiteness P_block_verdict(const MicrogridConfig& config, const GainSet& gains) {
  const Blocks blk = P_pair_blocks(gains);
  const double tol = 1e-12 * max_abs(blk);
  Definiteness out = block_pd_test(blk.a, blk.b, blk.d);
  out = combine(out, scalar_definiteness(config.capacitances(), tol));
  out = combine(out, scalar_definiteness(config.line_inductances(), tol));
  return out;
}

double exponential_secant_admittance(const ZieLoad& load, double V, double V_bar) {
  if (load.power == 0.0 || load.exponent == 1.0) return 0.0;
  if (!(V > 0.0) || !(V_bar > 0.0)) {
    throw std::domain_error("exponential_secant_admittance: nonpositive voltage");
  }
  if (std::abs(V - V_bar) < 1e-9 * V_bar) {
    return (load.exponent - 1.0) * load.power * std::pow(V_bar, load.exponent - 2.0);
  }
  return (exponential_current(load, V) - exponential_current(load, V_bar)) / (V - V_bar);
}

double equilibrium_damping(const ZieLoad& load, double V_bar) {
  const double P_bar = exponential_power(load, V_bar);
  return load.conductance - (1.0 - load.exponent) * P_bar / (V_bar * V_bar);
}

Matrix build_Q(const MicrogridConfig& config, const GainSet& gains, const Vector& V,
               const Vector& V_bar, ControlMode mode) {
  const int n = config.n();
  const int m = config.m();
  if (gains.size() != n) throw ConfigError("build_Q: gain count");
  if (mode == ControlMode::secondary && !delta_matches_alpha(gains)) {
    throw ConfigError("build_Q: the simplified form needs k4 = k1 - 1 at every DGU");
  }
  const StateLayout s{n, m, mode};
  Matrix negQ = Matrix::Zero(s.size(), s.size());
  const Vector YE = secant_admittances(config, V, V_bar);
  const Vector Y = config.conductances();
  const Blocks blk = negQ_pair_blocks(gains);
  for (int i = 0; i < n; ++i) {
    negQ(s.V() + i, s.V() + i) = Y[i] + YE[i];
    negQ(s.It() + i, s.It() + i) = blk.a[i];
    negQ(s.It() + i, s.v() + i) = blk.b[i];
    negQ(s.v() + i, s.It() + i) = blk.b[i];
    negQ(s.v() + i, s.v() + i) = blk.d[i];
  }
  const Vector R = config.line_resistances();
  for (int l = 0; l < m; ++l) {
    if (config.lines[l].closed) negQ(s.I() + l, s.I() + l) = R[l];
  }
  return -negQ;
}

Matrix build_Q_full(const MicrogridConfig& config, const GainSet& gains, const Vector& V,
                    const Vector& V_bar) {
  const AssembledSystem sys = assemble(config, gains, ControlMode::secondary);
  const Matrix P = build_P(config, gains, ControlMode::secondary);
  const Matrix PA = P * sys.A;
  Matrix Q = 0.5 * (PA + PA.transpose());
  const Vector YE = secant_admittances(config, V, V_bar);
  for (int i = 0; i < config.n(); ++i) Q(sys.layout.V() + i, sys.layout.V() + i) -= YE[i];
  return Q;
}

std::vector<bool> check_load_condition(const MicrogridConfig& config, const Vector& V_bar) {
  std::vector<bool> out(config.n());
  for (int i = 0; i < config.n(); ++i) {
    const ZieLoad& load = config.dgus[i].load;
    if (load.exponent >= 1.0) {
      out[i] = true;
      continue;
    }
    const double Vb = V_bar[i];
    out[i] = (1.0 - load.exponent) * load.power * std::pow(Vb, load.exponent) <
             load.conductance * Vb * Vb;
  }
  return out;
}

LyapunovReport lyapunov_decrease_check(const MicrogridConfig& config, const GainSet& gains,
                                       const Vector& X_bar, const std::vector<Vector>& samples,
                                       ControlMode mode, double rtol) {
  const Matrix P = build_P(config, gains, mode);
  LyapunovReport rep;
  rep.values.reserve(samples.size());
  for (const Vector& x : samples) {
    const Vector e = x - X_bar;
    rep.values.push_back(0.5 * e.dot(P * e));
  }
  const double peak =
      rep.values.empty() ? 0.0 : *std::max_element(rep.values.begin(), rep.values.end());
  rep.tolerance = rtol * std::max(1.0, peak);
  const double zero_dist = 1e-12 * std::max(1.0, X_bar.lpNorm<Eigen::Infinity>());
  for (std::size_t k = 0; k < samples.size(); ++k) {
    if (!rep.nonpositive_index && rep.values[k] <= 0.0 &&
        (samples[k] - X_bar).lpNorm<Eigen::Infinity>() > zero_dist) {
      rep.nonpositive_index = k;
    }
    if (k > 0 && !rep.violation_index && rep.values[k] > rep.values[k - 1] + rep.tolerance) {
      rep.violation_index = k;
    }
  }
  rep.ok = !rep.violation_index && !rep.nonpositive_index;
  return rep;
}

SpectrumReport linearized_spectrum(const MicrogridConfig& config, const GainSet& gains,
                                   const Vector& X_bar, ControlMode mode) {
  const AssembledSystem sys = assemble(config, gains, mode);
  const Matrix J = jacobian(sys, X_bar);
  Eigen::EigenSolver<Matrix> es(J, false);
  SpectrumReport rep;
  const auto& ev = es.eigenvalues();
  rep.eigenvalues.assign(ev.data(), ev.data() + ev.size());

  // Conserved Omega directions plus the frozen rows of offline DGUs and open lines.
  if (mode == ControlMode::secondary) {
    rep.structural_zero_modes = static_cast<int>(config.n() - numerical_rank(sys.L_c));
  }
  for (const auto& d : config.dgus) rep.structural_zero_modes += d.online ? 0 : 3;
  for (const auto& l : config.lines) rep.structural_zero_modes += l.closed ? 0 : 1;
  std::vector<Index> order(rep.eigenvalues.size());
  std::iota(order.begin(), order.end(), Index{0});
  std::sort(order.begin(), order.end(), [&](Index a, Index b) {
    return std::abs(rep.eigenvalues[a]) < std::abs(rep.eigenvalues[b]);
  });
  rep.max_real = -std::numeric_limits<double>::infinity();
  for (std::size_t k = rep.structural_zero_modes; k < order.size(); ++k) {
    const double re = rep.eigenvalues[order[k]].real();
    rep.max_real = std::max(rep.max_real, re);
    if (re > kUnstableThreshold) ++rep.unstable;
  }
  return rep;
}

const char* to_string(Verdict v) {
  switch (v) {
    case Verdict::certified_local: return "certified_local";
    case Verdict::certified_global: return "certified_global";
    case Verdict::not_certified: return "not_certified";
  }
  return "?";
}

StabilityReport assess_stability(const MicrogridConfig& config, const GainSet& gains,
                                 const Vector& V_bar) {
  require_analysis_ready(config);
  const int n = config.n();
  if (gains.size() != n) throw ConfigError("assess_stability: gain count");
  StabilityReport rep;
  rep.V_bar = V_bar;
  rep.gains_ok.resize(n);
  rep.f_bar.resize(n);
  for (int i = 0; i < n; ++i) {
    const DguParams& p = config.dgus[i].params;
    const PrimaryGains& k = gains.k[i];
    const bool k4_rule =
        std::abs(k.k4 - (k.k1 - 1.0)) <= 1e-12 * std::max(1.0, std::abs(k.k1 - 1.0));
    rep.gains_ok[i] = check_gain_set(k.k1, k.k2, k.k3, p.R_t, p.L_t).ok && k4_rule;
    rep.f_bar[i] = equilibrium_damping(config.dgus[i].load, V_bar[i]);
  }
  rep.load_ok = check_load_condition(config, V_bar);

  bool mu_ok = (gains.mu.array() != 0.0).all();
  if (mu_ok) {
    rep.P_blocks = P_block_verdict(config, gains);
    rep.P_eigen = eigen_definiteness(build_P(config, gains));
    const Blocks blk = P_pair_blocks(gains);
    rep.P_min_block_det = (blk.a.cwiseProduct(blk.d) - blk.b.cwiseAbs2()).minCoeff();
  }
  rep.P_pd = rep.P_blocks == Definiteness::positive_definite &&
             rep.P_eigen == Definiteness::positive_definite;

  if (mu_ok && delta_matches_alpha(gains)) {
    const Matrix negQ = -build_Q(config, gains, V_bar, V_bar);
    const Blocks blk = negQ_pair_blocks(gains);
    const double tol = 1e-12 * negQ.cwiseAbs().maxCoeff();
    Definiteness v = block_pd_test(blk.a, blk.b, blk.d);
    v = combine(v, scalar_definiteness(
                       config.conductances() + secant_admittances(config, V_bar, V_bar), tol));
    v = combine(v, scalar_definiteness(config.line_resistances(), tol));
    v = combine(v, Definiteness::positive_semidefinite);  // zero Omega block
    rep.negQ_blocks = v;
    rep.negQ_eigen = eigen_definiteness(negQ);
  } else if (mu_ok) {
    // Cross-couplings through Omega survive when k4 != k1 - 1; only the
    // eigenvalue route applies, and it is reported for both.
    rep.negQ_eigen = eigen_definiteness(-build_Q_full(config, gains, V_bar, V_bar));
    rep.negQ_blocks = rep.negQ_eigen;
  }
  rep.Q_nsd = rep.negQ_blocks != Definiteness::indefinite &&
              rep.negQ_eigen != Definiteness::indefinite;

  const bool all_gains = std::all_of(rep.gains_ok.begin(), rep.gains_ok.end(), [](bool b) { return b; });
  const bool all_loads = std::all_of(rep.load_ok.begin(), rep.load_ok.end(), [](bool b) { return b; });
  if (all_gains && all_loads && rep.P_pd && rep.Q_nsd) {
    rep.verdict = (config.powers().array() == 0.0).all() ? Verdict::certified_global
                                                        : Verdict::certified_local;
  }
  return rep;
}

}  // namespace dcmg
