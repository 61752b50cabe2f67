// SPDX-License-Identifier: Apache-2.0
#pragma once

// Steady states under current sharing and voltage balancing.

#include "dcmg/dynamics.hpp"

#include <utility>
#include <vector>

namespace dcmg {

/// Existence certificate for ZIP loads. With
///   L~ = [L_p; 1^T [I^s]],  L_p = L_e + L_t [I^s]^-1 Y_L,
///   I~ = [-L_t [I^s]^-1 I_L; 1^T [I^s] V_ref],  L~_t = [L_t [I^s]^-1; 0],
/// V* = L~^+ I~ and P_cri = 4 [V*]^-1 L~^+ L~_t [V*]^-1.
///
/// Delta is the induced norm ||P_cri [P*]||_inf (max absolute row sum), which
/// bounds the fixed-point map on the box |x| <= delta for P_cri of either
/// sign. Delta_vector = ||P_cri P*||_inf is kept for reporting; the two
/// coincide when P_cri P* has no cancellations.
struct ExistenceCertificate {
  Vector V_star;
  Matrix P_cri;
  double Delta = 0.0;
  double Delta_vector = 0.0;
  double delta_minus = 0.0;
  double delta_plus = 1.0;
  bool feasible = false;

  Matrix L_tilde;
  Matrix L_tilde_pinv;
  Matrix L_tilde_t;
  Vector I_tilde;

  Vector lower_bound() const { return (1.0 - delta_minus) * V_star; }
  Vector upper_bound() const { return (1.0 + delta_minus) * V_star; }
};

/// Roots of Delta = 4 delta (1 - delta): {(1 - sqrt(1-Delta))/2, (1 + sqrt(1-Delta))/2}.
/// Requires 0 <= Delta <= 1.
std::pair<double, double> deviation_roots(double Delta);

/// Equilibrium of the primary-only loop, where every PC sits at V_ref.
SystemState primary_only_equilibrium(const MicrogridConfig& config, const GainSet& gains);

/// (L^T L)^-1 L^T for a tall matrix of full column rank.
Matrix pseudo_inverse_tall(const Matrix& tall);

/// Requires ZIP loads, every DGU online and every line closed on a connected
/// electrical graph. The communication graph plays no role.
ExistenceCertificate certificate(const MicrogridConfig& config);

/// Checks shared by the voltage solvers. Throws ConfigError.
void require_power_flow_ready(const MicrogridConfig& config);

enum class Region { in_H, in_I, in_J, outside };
const char* to_string(Region region);

/// Box classification against H(delta-), I and J.
Region membership(const Vector& V, const ExistenceCertificate& cert);

/// Stacked residual [L_e V + L_t [I^s]^-1 I_L(V); 1^T [I^s](V - V_ref)].
Vector power_flow_residual(const MicrogridConfig& config, const Vector& V);

/// Scaled max-norm of power_flow_residual: current rows over max(1, max I^s),
/// the balance row over 1^T I^s * max(1, max V_ref).
double scaled_power_flow_residual(const MicrogridConfig& config, const Vector& V);

/// L~ V - I~ + L~_t [V^-1] P* for ZIP loads.
Vector zip_residual(const MicrogridConfig& config, const ExistenceCertificate& cert,
                    const Vector& V);

struct FixedPointResult {
  Vector V;
  int iterations = 0;
  std::vector<double> gaps;  // ||x_{k+1} - x_k||_inf
};

inline constexpr double kFixedPointTol = 1e-10;
inline constexpr double kNewtonTol = 1e-9;
inline constexpr int kMaxIterations = 200;

/// Iterates x <- -(1/4) P_cri [P*] r(x) from x = 0 and returns V = [V*](1 + x).
/// Throws SolverError when Delta >= 1 or the iterate leaves the box
/// |x| < delta+.
FixedPointResult solve_zip_fixed_point(const MicrogridConfig& config,
                                       double tol = kFixedPointTol,
                                       int max_iter = kMaxIterations);
FixedPointResult solve_zip_fixed_point(const MicrogridConfig& config,
                                       const ExistenceCertificate& cert,
                                       double tol = kFixedPointTol,
                                       int max_iter = kMaxIterations);

struct NewtonResult {
  Vector V;
  int iterations = 0;
  std::vector<double> residuals;  // scaled residual per iterate
};

/// Damped Gauss-Newton on the (N+1) x N stacked residual for arbitrary
/// exponents. Steps are halved (at most 30 times) until V stays positive and
/// the residual does not grow.
NewtonResult solve_zie_newton(const MicrogridConfig& config, const Vector& V_init,
                              double tol = kNewtonTol, int max_iter = kMaxIterations);

struct EquilibriumSolution {
  SystemState X;
  double epsilon = 0.0;       // common per-unit current
  double residual_nodes = 0.0;  // ||L_e V + L_t [I^s]^-1 I_L(V)||_inf
  double residual_balance = 0.0;  // |1^T [I^s](V - V_ref)|
};

/// Rebuilds (I_t, v, I, Omega) from a voltage solution. Omega is the
/// zero-mean representative.
EquilibriumSolution reconstruct_full(const MicrogridConfig& config, const GainSet& gains,
                                     const Vector& V_bar, double tol = 1e-6);

/// Fixed point for feasible ZIP configurations, otherwise Newton from V_ref.
Vector solve_voltage(const MicrogridConfig& config);

}  // namespace dcmg
