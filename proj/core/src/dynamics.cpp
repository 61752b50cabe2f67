// SPDX-License-Identifier: Apache-2.0
#include "dcmg/dynamics.hpp"

#include <cmath>
#include <string>

namespace dcmg {

Vector SystemState::stacked() const {
  Vector x(V.size() + It.size() + v.size() + I.size() + Omega.size());
  x << V, It, v, I, Omega;
  return x;
}

SystemState SystemState::unstack(const Vector& x, const StateLayout& layout) {
  if (x.size() != layout.size()) {
    throw ConfigError("state has dimension " + std::to_string(x.size()) + ", expected " +
                      std::to_string(layout.size()));
  }
  SystemState s;
  const Index n = layout.n;
  s.V = x.segment(layout.V(), n);
  s.It = x.segment(layout.It(), n);
  s.v = x.segment(layout.v(), n);
  s.I = x.segment(layout.I(), layout.m);
  if (layout.mode == ControlMode::secondary) s.Omega = x.segment(layout.Omega(), n);
  return s;
}

SystemState SystemState::with_mode(ControlMode mode) const {
  SystemState s = *this;
  if (mode == ControlMode::secondary) {
    if (s.Omega.size() == 0) s.Omega = Vector::Zero(V.size());
  } else {
    s.Omega.resize(0);
  }
  return s;
}

Vector AssembledSystem::affine_term(const Vector& X) const {
  Vector b = Vector::Zero(layout.size());
  for (int i = 0; i < layout.n; ++i) {
    if (!online[i]) continue;
    const double Vi = X[layout.V() + i];
    const double e = P[i] == 0.0 ? 0.0 : P[i] * std::exp((r[i] - 1.0) * std::log(Vi));
    b[layout.V() + i] = -(Ibar[i] + e) / C[i];
    b[layout.v() + i] = v_ref[i];
  }
  return b;
}

AssembledSystem assemble(const MicrogridConfig& config, const GainSet& gains,
                         ControlMode mode) {
  validate(config);
  const int n = config.n();
  const int m = config.m();
  if (gains.size() != n) {
    throw ConfigError("assemble: " + std::to_string(gains.size()) + " gain sets for " +
                      std::to_string(n) + " DGUs");
  }

  AssembledSystem sys;
  sys.layout = {n, m, mode};
  sys.C = config.capacitances();
  sys.Y = config.conductances();
  sys.Ibar = config.constant_currents();
  sys.P = config.powers();
  sys.r = config.exponents();
  sys.ratings = config.ratings();
  sys.v_ref = config.v_ref();
  sys.alpha = gains.alpha;
  sys.beta = gains.beta;
  sys.gamma = gains.gamma;
  sys.delta = gains.delta;
  sys.online.resize(n);
  for (int i = 0; i < n; ++i) sys.online[i] = config.dgus[i].online ? 1 : 0;

  sys.R = config.line_resistances();
  sys.L = config.line_inductances();
  sys.ends.resize(m);
  sys.closed.resize(m);
  for (int l = 0; l < m; ++l) {
    const LineUnit& line = config.lines[l];
    sys.ends[l] = line.ends;
    sys.closed[l] = line.closed ? 1 : 0;
    if (line.closed && (!sys.online[line.ends.source] || !sys.online[line.ends.sink])) {
      throw ConfigError("lines[" + std::to_string(l) + "]: closed line touches an offline DGU");
    }
  }

  if (mode == ControlMode::secondary) {
    const Matrix W = config.effective_comm_weights();
    sys.L_c = laplacian_from_weights(W);
    std::vector<int> active;
    for (int i = 0; i < n; ++i) {
      if (config.dgus[i].online && config.dgus[i].secondary) active.push_back(i);
    }
    if (active.size() > 1) {
      UnionFind comm(n);
      UnionFind elec(n);
      for (int i = 0; i < n; ++i) {
        for (int j = i + 1; j < n; ++j) {
          if (W(i, j) > 0.0) {
            comm.unite(i, j);
            sys.links.push_back({i, j, W(i, j)});
          }
        }
      }
      for (const Edge& e : config.closed_edges()) elec.unite(e.source, e.sink);
      for (int i : active) {
        if (comm.find(i) != comm.find(active.front())) {
          throw ConfigError("communication graph disconnected among secondary-enabled DGUs");
        }
        if (elec.find(i) != elec.find(active.front())) {
          throw ConfigError("secondary-enabled DGUs span more than one electrical island");
        }
      }
    }
  } else {
    sys.L_c = Matrix::Zero(n, n);
  }

  const StateLayout& s = sys.layout;
  sys.A = Matrix::Zero(s.size(), s.size());
  Matrix& A = sys.A;
  const Matrix B = config.incidence();
  for (int i = 0; i < n; ++i) {
    if (!sys.online[i]) continue;
    const double invC = 1.0 / sys.C[i];
    A(s.V() + i, s.V() + i) = -sys.Y[i] * invC;
    A(s.V() + i, s.It() + i) = invC;
    for (int l = 0; l < m; ++l) A(s.V() + i, s.I() + l) = -B(i, l) * invC;

    A(s.It() + i, s.V() + i) = sys.alpha[i];
    A(s.It() + i, s.It() + i) = sys.beta[i];
    A(s.It() + i, s.v() + i) = sys.gamma[i];

    A(s.v() + i, s.V() + i) = -1.0;

    if (mode == ControlMode::secondary) {
      for (int j = 0; j < n; ++j) {
        const double lc = sys.L_c(i, j) / sys.ratings[i];
        A(s.It() + i, s.Omega() + j) = sys.delta[i] * lc;
        A(s.v() + i, s.Omega() + j) = -lc;
        A(s.Omega() + i, s.It() + j) = sys.L_c(i, j) / sys.ratings[j];
      }
    }
  }
  for (int l = 0; l < m; ++l) {
    if (!sys.closed[l]) continue;
    for (int i = 0; i < n; ++i) A(s.I() + l, s.V() + i) = B(i, l) / sys.L[l];
    A(s.I() + l, s.I() + l) = -sys.R[l] / sys.L[l];
  }
  return sys;
}

namespace {

void require_positive_voltage(const AssembledSystem& sys, const Vector& X) {
  for (int i = 0; i < sys.layout.n; ++i) {
    const double Vi = X[sys.layout.V() + i];
    if (sys.online[i] && !(Vi > 0.0)) throw VoltageCollapse(i, Vi);
  }
}

}  // namespace

Vector vector_field(const AssembledSystem& sys, const Vector& X) {
  if (X.size() != sys.layout.size()) throw ConfigError("vector_field: state dimension mismatch");
  require_positive_voltage(sys, X);
  return sys.A * X + sys.affine_term(X);
}

SystemState vector_field(const AssembledSystem& sys, const SystemState& X) {
  return SystemState::unstack(vector_field(sys, X.stacked()), sys.layout);
}

void vector_field_components(const AssembledSystem& sys, const Vector& X, Vector& dX) {
  const StateLayout& s = sys.layout;
  if (X.size() != s.size()) throw ConfigError("vector_field: state dimension mismatch");
  require_positive_voltage(sys, X);
  dX.setZero(s.size());
  const int n = s.n;
  const bool secondary = s.mode == ControlMode::secondary;

  // dX's V-block first collects the line injections -B I.
  for (int l = 0; l < s.m; ++l) {
    if (!sys.closed[l]) continue;
    const Edge e = sys.ends[l];
    const double Il = X[s.I() + l];
    dX[s.V() + e.source] -= Il;
    dX[s.V() + e.sink] += Il;
    dX[s.I() + l] = (X[s.V() + e.source] - X[s.V() + e.sink] - sys.R[l] * Il) / sys.L[l];
  }

  // dX's v-block temporarily holds L_c Omega.
  if (secondary) {
    for (const auto& k : sys.links) {
      const double dOmega = k.w * (X[s.Omega() + k.a] - X[s.Omega() + k.b]);
      dX[s.v() + k.a] += dOmega;
      dX[s.v() + k.b] -= dOmega;
      const double dy = k.w * (X[s.It() + k.a] / sys.ratings[k.a] -
                               X[s.It() + k.b] / sys.ratings[k.b]);
      dX[s.Omega() + k.a] += dy;
      dX[s.Omega() + k.b] -= dy;
    }
  }

  for (int i = 0; i < n; ++i) {
    if (!sys.online[i]) {
      dX[s.V() + i] = 0.0;
      dX[s.v() + i] = 0.0;
      continue;
    }
    const double Vi = X[s.V() + i];
    const double omega = dX[s.v() + i] / sys.ratings[i];
    const double e = sys.P[i] == 0.0 ? 0.0 : sys.P[i] * std::exp((sys.r[i] - 1.0) * std::log(Vi));
    dX[s.V() + i] =
        (dX[s.V() + i] - sys.Y[i] * Vi + X[s.It() + i] - sys.Ibar[i] - e) / sys.C[i];
    dX[s.It() + i] = sys.alpha[i] * Vi + sys.beta[i] * X[s.It() + i] +
                     sys.gamma[i] * X[s.v() + i] + sys.delta[i] * omega;
    dX[s.v() + i] = sys.v_ref[i] - Vi - omega;
  }
}

Vector vector_field_components(const AssembledSystem& sys, const Vector& X) {
  Vector dX;
  vector_field_components(sys, X, dX);
  return dX;
}

Matrix jacobian(const AssembledSystem& sys, const Vector& X) {
  if (X.size() != sys.layout.size()) throw ConfigError("jacobian: state dimension mismatch");
  require_positive_voltage(sys, X);
  Matrix J = sys.A;
  for (int i = 0; i < sys.layout.n; ++i) {
    if (!sys.online[i] || sys.P[i] == 0.0 || sys.r[i] == 1.0) continue;
    const double Vi = X[sys.layout.V() + i];
    const Index k = sys.layout.V() + i;
    J(k, k) -= (sys.r[i] - 1.0) * sys.P[i] * std::exp((sys.r[i] - 2.0) * std::log(Vi)) / sys.C[i];
  }
  return J;
}

}  // namespace dcmg
