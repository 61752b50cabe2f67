// SPDX-License-Identifier: Apache-2.0
#pragma once

// Closed-loop state-space model X' = A X + b(V).
//
// State ordering is (V, I_t, v, I, Omega): PC voltages, filter currents,
// PI integrator states, line currents and consensus integrators. In
// primary-only mode the Omega block is absent.

#include "dcmg/microgrid.hpp"

#include <vector>

namespace dcmg {

enum class ControlMode { secondary, primary_only };

struct StateLayout {
  int n = 0;
  int m = 0;
  ControlMode mode = ControlMode::secondary;

  Index size() const noexcept {
    return 3 * n + m + (mode == ControlMode::secondary ? n : 0);
  }
  Index V() const noexcept { return 0; }
  Index It() const noexcept { return n; }
  Index v() const noexcept { return 2 * n; }
  Index I() const noexcept { return 3 * n; }
  Index Omega() const noexcept { return 3 * n + m; }
};

struct SystemState {
  Vector V;
  Vector It;
  Vector v;
  Vector I;
  Vector Omega;  // empty in primary-only mode

  ControlMode mode() const noexcept {
    return Omega.size() > 0 || V.size() == 0 ? ControlMode::secondary
                                             : ControlMode::primary_only;
  }
  Vector stacked() const;
  static SystemState unstack(const Vector& x, const StateLayout& layout);
  /// Same electrical state with Omega = 0 appended (or dropped).
  SystemState with_mode(ControlMode mode) const;
};

/// Everything needed to evaluate the vector field, stored both as the dense
/// matrix A and as per-node/per-line coefficients for the component route.
class AssembledSystem {
 public:
  StateLayout layout;
  Matrix A;

  // Per node.
  Vector C;
  Vector Y;
  Vector Ibar;
  Vector P;
  Vector r;
  Vector ratings;
  Vector v_ref;
  Vector alpha;
  Vector beta;
  Vector gamma;
  Vector delta;
  std::vector<char> online;

  // Per line; open lines have closed == 0 and frozen current.
  std::vector<Edge> ends;
  Vector R;
  Vector L;
  std::vector<char> closed;

  // Effective communication graph as an edge list.
  struct WeightedLink {
    int a;
    int b;
    double w;
  };
  std::vector<WeightedLink> links;
  Matrix L_c;

  /// b(V): load constants in the V-rows and V_ref in the v-rows.
  Vector affine_term(const Vector& X) const;
};

/// Throws ConfigError when secondary mode is requested and the set of online
/// secondary-enabled DGUs is not connected by communication links or spans
/// more than one electrical island.
AssembledSystem assemble(const MicrogridConfig& config, const GainSet& gains,
                         ControlMode mode);

/// A X + b(V). Throws VoltageCollapse when an online V_i <= 0.
Vector vector_field(const AssembledSystem& sys, const Vector& X);
SystemState vector_field(const AssembledSystem& sys, const SystemState& X);

/// Same field evaluated node by node and line by line without A.
void vector_field_components(const AssembledSystem& sys, const Vector& X, Vector& dX);
Vector vector_field_components(const AssembledSystem& sys, const Vector& X);

/// A + d b / d X; only the V block picks up -(r-1) V^(r-2) P* / C.
Matrix jacobian(const AssembledSystem& sys, const Vector& X);

}  // namespace dcmg
