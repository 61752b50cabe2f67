// SPDX-License-Identifier: Apache-2.0
#include "support/oracles.hpp"

#include "dcmg/loads.hpp"

#include <cmath>
#include <stdexcept>

namespace dcmg::testing {

namespace {

Vector square_residual(const MicrogridConfig& c, const Vector& V) {
  const int n = c.n();
  Vector node(n);
  node.setZero();
  for (const LineUnit& l : c.lines) {
    if (!l.closed) continue;
    const double i = (V[l.ends.source] - V[l.ends.sink]) / l.params.resistance;
    node[l.ends.source] += i;
    node[l.ends.sink] -= i;
  }
  // L_t [I^s]^-1 I_L: I_L,i - I^s_i * (sum_j I_L,j) / (sum_j I^s_j)
  double total_load = 0.0;
  double total_rating = 0.0;
  Vector IL(n);
  for (int i = 0; i < n; ++i) {
    IL[i] = load_current(c.dgus[i].load, V[i]);
    total_load += IL[i];
    total_rating += c.dgus[i].params.rated_current;
  }
  for (int i = 0; i < n; ++i) {
    node[i] += IL[i] - c.dgus[i].params.rated_current * total_load / total_rating;
  }
  Vector r(n);
  r.head(n - 1) = node.head(n - 1);
  double balance = 0.0;
  for (int i = 0; i < n; ++i) {
    balance += c.dgus[i].params.rated_current * (V[i] - c.dgus[i].params.v_ref);
  }
  r[n - 1] = balance;
  return r;
}

}  // namespace

Matrix fd_jacobian(const std::function<Vector(const Vector&)>& f, const Vector& x,
                   double rel_step) {
  const Vector f0 = f(x);
  Matrix J(f0.size(), x.size());
  for (Index k = 0; k < x.size(); ++k) {
    const double h = rel_step * std::max(1.0, std::abs(x[k]));
    Vector xp = x;
    Vector xm = x;
    xp[k] += h;
    xm[k] -= h;
    J.col(k) = (f(xp) - f(xm)) / (2.0 * h);
  }
  return J;
}

Vector newton_oracle(const MicrogridConfig& config, const Vector& V0, double tol,
                     int max_iter) {
  auto F = [&](const Vector& V) { return square_residual(config, V); };
  Vector V = V0;
  Vector r = F(V);
  for (int it = 0; it < max_iter; ++it) {
    if (r.cwiseAbs().maxCoeff() <= tol) return V;
    const Matrix J = fd_jacobian(F, V, 1e-7);
    const Vector step = J.fullPivLu().solve(-r);
    double t = 1.0;
    for (int h = 0; h < 40; ++h, t *= 0.5) {
      const Vector trial = V + t * step;
      if (trial.minCoeff() <= 0.0) continue;
      const Vector rt = F(trial);
      if (rt.cwiseAbs().maxCoeff() < r.cwiseAbs().maxCoeff() || h == 39) {
        V = trial;
        r = rt;
        break;
      }
    }
  }
  if (r.cwiseAbs().maxCoeff() > 1e3 * tol) throw std::runtime_error("newton oracle stalled");
  return V;
}

Matrix reduced_laplacian(const MicrogridConfig& c) {
  const int n = c.n();
  Matrix Lp = Matrix::Zero(n, n);
  for (const LineUnit& l : c.lines) {
    if (!l.closed) continue;
    const double g = 1.0 / l.params.resistance;
    const int a = l.ends.source;
    const int b = l.ends.sink;
    Lp(a, a) += g;
    Lp(b, b) += g;
    Lp(a, b) -= g;
    Lp(b, a) -= g;
  }
  double total_rating = 0.0;
  for (const DguUnit& d : c.dgus) total_rating += d.params.rated_current;
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      // (L_t [I^s]^-1)_{ij} = delta_ij - I^s_i / sum(I^s)
      const double lt = (i == j ? 1.0 : 0.0) - c.dgus[i].params.rated_current / total_rating;
      Lp(i, j) += lt * c.dgus[j].load.conductance;
    }
  }
  return Lp;
}

double max_abs(const Vector& v) { return v.size() == 0 ? 0.0 : v.cwiseAbs().maxCoeff(); }

double relative_error(const Vector& a, const Vector& b) {
  return max_abs(a - b) / std::max(1e-300, max_abs(b));
}

}  // namespace dcmg::testing
