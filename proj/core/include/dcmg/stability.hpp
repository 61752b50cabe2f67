// SPDX-License-Identifier: Apache-2.0
#pragma once

// Lyapunov certification of the closed loop.

#include "dcmg/dynamics.hpp"

#include <complex>
#include <optional>
#include <vector>

namespace dcmg {

enum class Definiteness { positive_definite, positive_semidefinite, indefinite };
const char* to_string(Definiteness d);

/// Classifies [[A, B], [B, D]] with diagonal blocks through its 2x2 blocks
/// [[a_i, b_i], [b_i, d_i]].
Definiteness block_pd_test(const Vector& a, const Vector& b, const Vector& d);

/// Eigenvalue classification of a symmetric matrix; eigenvalues within
/// rtol * max|m_ij| of zero count as zero.
Definiteness eigen_definiteness(const Matrix& m, double rtol = 1e-12);

/// Lyapunov weight blockdiag(C_t, [[beta/mu, gamma/mu], [gamma/mu, alpha gamma/mu]], L, I).
/// The trailing identity block is omitted in primary-only mode.
Matrix build_P(const MicrogridConfig& config, const GainSet& gains,
               ControlMode mode = ControlMode::secondary);

/// Block verdict for build_P without forming it.
Definiteness P_block_verdict(const MicrogridConfig& config, const GainSet& gains);

/// Y_Ei(V_i): secant admittance of the exponential part around V_bar. Uses
/// the limiting value -(1 - r) P* V_bar^(r-2) when |V - V_bar| < 1e-9 V_bar.
double exponential_secant_admittance(const ZieLoad& load, double V, double V_bar);

/// f_i(V_bar) = Y_L - (1 - r) P*_bar / V_bar^2 with P*_bar = P* V_bar^r.
double equilibrium_damping(const ZieLoad& load, double V_bar);

/// Simplified dissipation matrix (requires k4 = k1 - 1):
///   -Q = blockdiag(Y_L + Y_E(V), [[-beta^2/mu, -beta gamma/mu], [., -gamma^2/mu]], R, 0).
Matrix build_Q(const MicrogridConfig& config, const GainSet& gains, const Vector& V,
               const Vector& V_bar, ControlMode mode = ControlMode::secondary);

/// Dissipation matrix with the consensus cross-couplings written out; equals
/// build_Q exactly when delta = alpha.
Matrix build_Q_full(const MicrogridConfig& config, const GainSet& gains, const Vector& V,
                    const Vector& V_bar);

/// Load condition (1 - r) P* V^r < Y V^2 per DGU; always true for r >= 1.
std::vector<bool> check_load_condition(const MicrogridConfig& config, const Vector& V_bar);

struct LyapunovReport {
  bool ok = true;
  std::vector<double> values;                    // 1/2 (X - X_bar)^T P (X - X_bar)
  std::optional<std::size_t> violation_index;    // first sample that increased
  std::optional<std::size_t> nonpositive_index;  // first sample with value <= 0 away from X_bar
  double tolerance = 0.0;
};

LyapunovReport lyapunov_decrease_check(const MicrogridConfig& config, const GainSet& gains,
                                       const Vector& X_bar, const std::vector<Vector>& samples,
                                       ControlMode mode = ControlMode::secondary,
                                       double rtol = 1e-8);

struct SpectrumReport {
  std::vector<std::complex<double>> eigenvalues;
  int structural_zero_modes = 0;  // conserved Omega directions
  int unstable = 0;               // remaining eigenvalues with Re > threshold
  double max_real = 0.0;          // over the non-structural eigenvalues
};

inline constexpr double kUnstableThreshold = 1e-9;

SpectrumReport linearized_spectrum(const MicrogridConfig& config, const GainSet& gains,
                                   const Vector& X_bar,
                                   ControlMode mode = ControlMode::secondary);

enum class Verdict { certified_local, certified_global, not_certified };
const char* to_string(Verdict v);

struct StabilityReport {
  std::vector<bool> gains_ok;
  std::vector<bool> load_ok;
  Definiteness P_blocks = Definiteness::indefinite;
  Definiteness P_eigen = Definiteness::indefinite;
  bool P_pd = false;
  double P_min_block_det = 0.0;
  Definiteness negQ_blocks = Definiteness::indefinite;
  Definiteness negQ_eigen = Definiteness::indefinite;
  bool Q_nsd = false;
  Vector f_bar;
  Vector V_bar;
  Verdict verdict = Verdict::not_certified;

  bool methods_agree() const noexcept {
    return P_blocks == P_eigen && negQ_blocks == negQ_eigen;
  }
};

StabilityReport assess_stability(const MicrogridConfig& config, const GainSet& gains,
                                 const Vector& V_bar);

}  // namespace dcmg
