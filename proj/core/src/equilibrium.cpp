// SPDX-License-Identifier: Apache-2.0
#include "dcmg/equilibrium.hpp"

#include <Eigen/QR>

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>
#include <string>

namespace dcmg {
namespace {

Vector load_currents(const MicrogridConfig& config, const Vector& V) {
  Vector out(config.n());
  for (int i = 0; i < config.n(); ++i) out[i] = load_current(config.dgus[i].load, V[i]);
  return out;
}

Vector incremental_admittances(const MicrogridConfig& config, const Vector& V) {
  Vector out(config.n());
  for (int i = 0; i < config.n(); ++i) {
    out[i] = incremental_admittance(config.dgus[i].load, V[i]);
  }
  return out;
}

double scaled_norm(const MicrogridConfig& config, const Vector& F) {
  const Vector Is = config.ratings();
  const int n = config.n();
  const double current_scale = std::max(1.0, Is.maxCoeff());
  const double balance_scale = Is.sum() * std::max(1.0, config.v_ref().maxCoeff());
  return std::max(F.head(n).lpNorm<Eigen::Infinity>() / current_scale,
                  std::abs(F[n]) / balance_scale);
}

}  // namespace

std::pair<double, double> deviation_roots(double Delta) {
  if (!(Delta >= 0.0 && Delta <= 1.0)) {
    throw std::domain_error("deviation_roots: Delta must lie in [0, 1]");
  }
  const double s = std::sqrt(1.0 - Delta);
  // 1 - s loses digits for tiny Delta; Delta / (1 + s) is the same quantity.
  const double lo = 0.5 * Delta / (1.0 + s);
  return {lo, 1.0 - lo};
}

void require_power_flow_ready(const MicrogridConfig& config) {
  validate(config);
  for (int i = 0; i < config.n(); ++i) {
    if (!config.dgus[i].online) {
      throw ConfigError("dgus[" + std::to_string(i) + "].online: steady-state analysis needs "
                        "every DGU online");
    }
  }
  for (int l = 0; l < config.m(); ++l) {
    if (!config.lines[l].closed) {
      throw ConfigError("lines[" + std::to_string(l) + "].closed: steady-state analysis needs "
                        "every line closed");
    }
  }
  if (!is_connected(config.n(), config.closed_edges())) {
    throw ConfigError("lines: electrical graph disconnected");
  }
}

SystemState primary_only_equilibrium(const MicrogridConfig& config, const GainSet& gains) {
  validate(config);
  if (gains.size() != config.n()) throw ConfigError("primary_only_equilibrium: gain count");
  const Vector Vref = config.v_ref();
  const Vector R = config.line_resistances();
  const Matrix B = config.incidence();
  SystemState X;
  X.V = Vref;
  X.I = R.cwiseInverse().asDiagonal() * (B.transpose() * Vref);
  X.It = B * X.I + load_currents(config, Vref);
  X.v = -(gains.alpha.cwiseProduct(Vref) + gains.beta.cwiseProduct(X.It))
             .cwiseQuotient(gains.gamma);
  return X;
}

Matrix pseudo_inverse_tall(const Matrix& tall) {
  if (tall.rows() < tall.cols()) throw ConfigError("pseudo_inverse_tall: matrix is not tall");
  if (numerical_rank(tall) < tall.cols()) {
    throw SolverError("constrained power-flow map singular");
  }
  const Matrix gram = tall.transpose() * tall;
  return gram.ldlt().solve(tall.transpose());
}

ExistenceCertificate certificate(const MicrogridConfig& config) {
  require_power_flow_ready(config);
  for (int i = 0; i < config.n(); ++i) {
    if (!config.dgus[i].load.is_zip()) {
      throw ConfigError("dgus[" + std::to_string(i) +
                        "].load.r: the certificate covers ZIP loads (r = 0) only; "
                        "use the Newton solver for other exponents");
    }
  }
  const int n = config.n();
  const Vector Is = config.ratings();
  const Matrix Lt = sharing_projector(Is);
  const Matrix Lt_Is = Lt * Is.cwiseInverse().asDiagonal();
  const Matrix Lp = config.electrical_laplacian() + Lt_Is * config.conductances().asDiagonal();

  ExistenceCertificate c;
  c.L_tilde.resize(n + 1, n);
  c.L_tilde << Lp, Is.transpose();
  c.I_tilde.resize(n + 1);
  c.I_tilde << -Lt_Is * config.constant_currents(), Is.dot(config.v_ref());
  c.L_tilde_t = Matrix::Zero(n + 1, n);
  c.L_tilde_t.topRows(n) = Lt_Is;
  c.L_tilde_pinv = pseudo_inverse_tall(c.L_tilde);
  c.V_star = c.L_tilde_pinv * c.I_tilde;
  for (int i = 0; i < n; ++i) {
    if (c.V_star[i] == 0.0 || !std::isfinite(c.V_star[i])) {
      throw SolverError("certificate: V* has a zero component at DGU " + std::to_string(i));
    }
  }
  const Vector inv = c.V_star.cwiseInverse();
  c.P_cri = 4.0 * inv.asDiagonal() * c.L_tilde_pinv * c.L_tilde_t * inv.asDiagonal();
  const Vector P = config.powers();
  c.Delta = (c.P_cri.cwiseAbs() * P.cwiseAbs()).maxCoeff();
  c.Delta_vector = (c.P_cri * P).lpNorm<Eigen::Infinity>();
  c.feasible = c.Delta < 1.0;
  if (c.Delta <= 1.0) {
    std::tie(c.delta_minus, c.delta_plus) = deviation_roots(c.Delta);
  } else {
    c.delta_minus = c.delta_plus = std::numeric_limits<double>::quiet_NaN();
  }
  return c;
}

const char* to_string(Region region) {
  switch (region) {
    case Region::in_H: return "H";
    case Region::in_I: return "I";
    case Region::in_J: return "J";
    case Region::outside: return "outside";
  }
  return "?";
}

Region membership(const Vector& V, const ExistenceCertificate& cert) {
  const Vector lo = cert.lower_bound();
  const Vector hi = cert.upper_bound();
  const Vector j_hi = (1.0 - cert.delta_plus) * cert.V_star;
  bool in_H = true;
  bool above_J = true;
  bool in_J = true;
  for (Index i = 0; i < V.size(); ++i) {
    in_H = in_H && V[i] >= lo[i] && V[i] <= hi[i];
    above_J = above_J && V[i] > j_hi[i];
    in_J = in_J && V[i] <= j_hi[i];
  }
  if (in_H) return Region::in_H;
  if (above_J) return Region::in_I;
  if (in_J) return Region::in_J;
  return Region::outside;
}

Vector power_flow_residual(const MicrogridConfig& config, const Vector& V) {
  const int n = config.n();
  const Vector Is = config.ratings();
  const Vector IL = load_currents(config, V);
  Vector F(n + 1);
  F.head(n) = config.electrical_laplacian() * V + sharing_projector(Is) * IL.cwiseQuotient(Is);
  F[n] = Is.dot(V - config.v_ref());
  return F;
}

double scaled_power_flow_residual(const MicrogridConfig& config, const Vector& V) {
  return scaled_norm(config, power_flow_residual(config, V));
}

Vector zip_residual(const MicrogridConfig& config, const ExistenceCertificate& cert,
                    const Vector& V) {
  return cert.L_tilde * V - cert.I_tilde +
         cert.L_tilde_t * config.powers().cwiseQuotient(V);
}

FixedPointResult solve_zip_fixed_point(const MicrogridConfig& config, double tol,
                                       int max_iter) {
  return solve_zip_fixed_point(config, certificate(config), tol, max_iter);
}

FixedPointResult solve_zip_fixed_point(const MicrogridConfig& config,
                                       const ExistenceCertificate& cert, double tol,
                                       int max_iter) {
  if (!cert.feasible) {
    std::ostringstream os;
    os << "fixed point refused: Delta = " << cert.Delta << " >= 1, no contraction guarantee";
    throw SolverError(os.str());
  }
  const Vector P = config.powers();
  const Index n = P.size();
  const Matrix K = -0.25 * cert.P_cri * P.asDiagonal();
  FixedPointResult out;
  Vector x = Vector::Zero(n);
  for (int k = 1; k <= max_iter; ++k) {
    const Vector r = (Vector::Ones(n) + x).cwiseInverse();
    const Vector next = K * r;
    const double gap = (next - x).lpNorm<Eigen::Infinity>();
    out.gaps.push_back(gap);
    x = next;
    out.iterations = k;
    if (!(x.lpNorm<Eigen::Infinity>() < cert.delta_plus)) {
      throw SolverError("fixed point diverged: iterate left the box |x| < delta+", out.gaps);
    }
    if (gap <= tol) {
      out.V = cert.V_star.cwiseProduct(Vector::Ones(n) + x);
      return out;
    }
  }
  throw SolverError("fixed point did not converge in " + std::to_string(max_iter) +
                        " iterations",
                    out.gaps);
}

NewtonResult solve_zie_newton(const MicrogridConfig& config, const Vector& V_init, double tol,
                              int max_iter) {
  require_power_flow_ready(config);
  const int n = config.n();
  if (V_init.size() != n) throw ConfigError("solve_zie_newton: initial guess dimension");
  if ((V_init.array() <= 0.0).any()) {
    throw ConfigError("solve_zie_newton: initial guess must be positive");
  }
  const Vector Is = config.ratings();
  const Matrix Le = config.electrical_laplacian();
  const Matrix Lt_Is = sharing_projector(Is) * Is.cwiseInverse().asDiagonal();

  NewtonResult out;
  Vector V = V_init;
  Vector F = power_flow_residual(config, V);
  double res = scaled_norm(config, F);
  out.residuals.push_back(res);
  for (int k = 0; k < max_iter; ++k) {
    if (res <= tol) {
      out.V = V;
      out.iterations = k;
      return out;
    }
    Matrix J(n + 1, n);
    J.topRows(n) = Le + Lt_Is * incremental_admittances(config, V).asDiagonal();
    J.row(n) = Is.transpose();
    const Vector step = J.colPivHouseholderQr().solve(-F);
    double lambda = 1.0;
    bool accepted = false;
    for (int h = 0; h <= 30; ++h, lambda *= 0.5) {
      const Vector trial = V + lambda * step;
      if ((trial.array() <= 0.0).any()) continue;
      const Vector F_trial = power_flow_residual(config, trial);
      const double res_trial = scaled_norm(config, F_trial);
      if (!(res_trial <= res)) continue;
      V = trial;
      F = F_trial;
      res = res_trial;
      accepted = true;
      break;
    }
    out.residuals.push_back(res);
    if (!accepted) {
      throw SolverError("Newton stalled: no damped step reduced the residual", out.residuals);
    }
  }
  if (res <= tol) {
    out.V = V;
    out.iterations = max_iter;
    return out;
  }
  throw SolverError("Newton did not converge in " + std::to_string(max_iter) + " iterations",
                    out.residuals);
}

EquilibriumSolution reconstruct_full(const MicrogridConfig& config, const GainSet& gains,
                                     const Vector& V_bar, double tol) {
  require_analysis_ready(config);
  if (gains.size() != config.n()) throw ConfigError("reconstruct_full: gain count");
  const double res = scaled_power_flow_residual(config, V_bar);
  if (!(res <= tol)) {
    std::ostringstream os;
    os << "reconstruct_full: voltage residual " << res << " exceeds " << tol;
    throw SolverError(os.str(), {res});
  }
  const Vector Is = config.ratings();
  const Vector Vref = config.v_ref();
  const Vector IL = load_currents(config, V_bar);

  EquilibriumSolution sol;
  sol.epsilon = IL.sum() / Is.sum();
  SystemState& X = sol.X;
  X.V = V_bar;
  X.It = sol.epsilon * Is;
  X.I = config.line_resistances().cwiseInverse().asDiagonal() *
        (config.incidence().transpose() * V_bar);
  const Matrix Lc_pinv = symmetric_pseudo_inverse(config.effective_comm_laplacian());
  X.Omega = Lc_pinv * Is.cwiseProduct(Vref - V_bar);
  X.v = ((gains.delta - gains.alpha).cwiseProduct(V_bar) - gains.delta.cwiseProduct(Vref) -
         gains.beta.cwiseProduct(X.It))
            .cwiseQuotient(gains.gamma);
  const Vector F = power_flow_residual(config, V_bar);
  sol.residual_nodes = F.head(config.n()).lpNorm<Eigen::Infinity>();
  sol.residual_balance = std::abs(F[config.n()]);
  return sol;
}

Vector solve_voltage(const MicrogridConfig& config) {
  if (config.all_zip()) {
    const ExistenceCertificate cert = certificate(config);
    if (cert.feasible) {
      try {
        return solve_zip_fixed_point(config, cert).V;
      } catch (const SolverError&) {
        // fall through to Newton
      }
    }
  }
  return solve_zie_newton(config, config.v_ref()).V;
}

}  // namespace dcmg
