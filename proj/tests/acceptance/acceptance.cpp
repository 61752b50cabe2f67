// SPDX-License-Identifier: Apache-2.0
// Acceptance run: one [PASS]/[FAIL] line per criterion.

#include "cli/commands.hpp"
#include "dcmg/config_io.hpp"
#include "dcmg/equilibrium.hpp"
#include "dcmg/loads.hpp"
#include "dcmg/scenarios.hpp"
#include "dcmg/simulator.hpp"
#include "dcmg/stability.hpp"
#include "dcmg/trace_io.hpp"
#include "support/generators.hpp"
#include "support/oracles.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <sstream>
#include <string>

namespace {

using namespace dcmg;
using testing::max_abs;
using testing::relative_error;
using testing::Rng;
using testing::uniform;

struct Outcome {
  bool pass = false;
  std::string detail;
};

struct Timed {
  Outcome outcome;
  double seconds = 0.0;
};

std::string fmt(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3g", x);
  return buf;
}

Timed timed(const std::function<Outcome()>& fn) {
  const auto t0 = std::chrono::steady_clock::now();
  Outcome o;
  try {
    o = fn();
  } catch (const std::exception& e) {
    o = {false, std::string("exception: ") + e.what()};
  }
  const double s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return {o, s};
}

MicrogridConfig zero_power(MicrogridConfig c) {
  for (auto& d : c.dgus) d.load.power = 0.0;
  return c;
}

testing::RandomGridOptions sized(Rng& rng, int lo, int hi) {
  testing::RandomGridOptions o;
  o.n = std::uniform_int_distribution<int>(lo, hi)(rng);
  return o;
}

Outcome zero_power_exactness() {
  Rng rng(1001);
  double worst = 0.0;
  double worst_oracle = 0.0;
  for (int k = 0; k < 20; ++k) {
    const MicrogridConfig c = zero_power(testing::random_grid(rng, sized(rng, 2, 10)));
    const ExistenceCertificate cert = certificate(c);
    const Vector V = solve_zip_fixed_point(c, cert).V;
    worst = std::max(worst, max_abs(V - cert.V_star) / max_abs(cert.V_star));
    worst_oracle = std::max(worst_oracle, relative_error(V, testing::newton_oracle(c, c.v_ref())));
  }
  return {worst <= 1e-10 && worst_oracle <= 1e-10,
          "20 configs, max |V - V*|/|V*| = " + fmt(worst) + ", vs linear solve " + fmt(worst_oracle)};
}

Outcome contraction_box() {
  Rng rng(1002);
  double worst_res = 0.0;
  int inside = 0;
  double max_delta = 0.0;
  for (int k = 0; k < 20; ++k) {
    MicrogridConfig c = testing::random_grid(rng, sized(rng, 2, 10));
    const double target = uniform(rng, 0.05, 0.95);
    const double d0 = certificate(c).Delta;
    for (auto& d : c.dgus) d.load.power *= target / d0;  // Delta is linear in P*
    const ExistenceCertificate cert = certificate(c);
    if (!cert.feasible) return {false, "scaled config infeasible, Delta = " + fmt(cert.Delta)};
    max_delta = std::max(max_delta, cert.Delta);
    const Vector V = solve_zip_fixed_point(c, cert).V;
    if (membership(V, cert) == Region::in_H) ++inside;
    const Vector nonlinear =
        cert.L_tilde_t * c.powers().cwiseQuotient(V);
    const double scale = std::max({1.0, max_abs(cert.I_tilde), max_abs(nonlinear)});
    worst_res = std::max(worst_res, max_abs(zip_residual(c, cert, V)) / scale);
  }
  return {inside == 20 && worst_res <= 1e-8,
          std::to_string(inside) + "/20 in H(delta-), max Delta " + fmt(max_delta) +
              ", max scaled residual " + fmt(worst_res)};
}

Outcome oracle_equivalence() {
  Rng rng(1003);
  double worst = 0.0;
  for (int k = 0; k < 10; ++k) {
    testing::RandomGridOptions o;
    o.n = 2 + k % 2;
    o.max_power = 300.0;
    const MicrogridConfig c = testing::random_grid(rng, o);
    const Vector fp = solve_zip_fixed_point(c).V;
    const Vector nt = testing::newton_oracle(c, c.v_ref());
    worst = std::max(worst, relative_error(fp, nt));
  }
  return {worst <= 1e-7, "10 configs (N = 2, 3), max relative gap " + fmt(worst)};
}

Outcome root_identity() {
  double worst = 0.0;
  bool ordered = true;
  for (double D : {0.0, 0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 0.99}) {
    const auto [lo, hi] = deviation_roots(D);
    worst = std::max({worst, std::abs(4.0 * lo * (1.0 - lo) - D), std::abs(4.0 * hi * (1.0 - hi) - D)});
    ordered = ordered && lo < 0.5 && 0.5 < hi;
  }
  return {worst <= 1e-12 && ordered, "max |4d(1-d) - Delta| = " + fmt(worst)};
}

// Shared by the steady-state and Lyapunov criteria.
struct RingRun {
  MicrogridConfig config;
  GainSet gains;
  Vector X_bar;
  SimulationTrace trace;
  StabilityReport stability;
  bool certified = false;
  double seconds = 0.0;
};

const RingRun& ring_run() {
  static const RingRun run = [] {
    const auto t0 = std::chrono::steady_clock::now();
    RingRun r;
    r.config = ring_config(4);
    r.gains = resolve_gains(r.config);
    const ExistenceCertificate cert = certificate(r.config);
    const Vector V = solve_zip_fixed_point(r.config, cert).V;
    r.X_bar = reconstruct_full(r.config, r.gains, V).X.stacked();
    r.stability = assess_stability(r.config, r.gains, V);
    r.certified = cert.feasible && r.stability.verdict != Verdict::not_certified;
    const StateLayout L{r.config.n(), r.config.m(), ControlMode::secondary};
    Rng rng(1005);
    Vector X0 = r.X_bar;
    for (Index i = 0; i < L.n; ++i) {
      X0[L.V() + i] += uniform(rng, -2.0, 2.0);
      X0[L.It() + i] += uniform(rng, -1.0, 1.0);
      X0[L.v() + i] += uniform(rng, -0.01, 0.01);
    }
    for (Index l = 0; l < L.m; ++l) X0[L.I() + l] += uniform(rng, -1.0, 1.0);
    Vector dOmega(L.n);
    for (Index i = 0; i < L.n; ++i) dOmega[i] = uniform(rng, -0.05, 0.05);
    X0.segment(L.Omega(), L.n).array() += dOmega.array() - dOmega.mean();
    IntegratorOptions o;
    o.dt = 1e-5;
    o.t_end = 2.0;
    o.record_every = 1;
    r.trace = integrate(r.config, r.gains, X0, {}, o);
    r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return r;
  }();
  return run;
}

Outcome steady_state_objectives() {
  const RingRun& r = ring_run();
  if (!r.certified) return {false, "ring not certified"};
  if (r.trace.termination != Termination::completed) return {false, "run did not complete"};
  const auto T = detect_steady_state(r.trace, 0.2, 1e-3);
  if (!T) return {false, "no steady state detected"};
  std::size_t k = 0;
  while (k + 1 < r.trace.size() && r.trace.time[k] < *T) ++k;
  const SharingMetrics m = sharing_metrics(r.config, r.trace.states[k]);
  const double rel_disp = m.dispersion / std::abs(m.mean_ratio);
  const double bal_tol = 1e-3 * r.config.ratings().sum() * r.config.v_ref().mean();
  const double final_err = relative_error(r.trace.states.back(), r.X_bar);
  const bool ok = rel_disp <= 1e-3 && m.balance <= bal_tol && final_err <= 1e-4 && r.seconds < 60.0;
  return {ok, "steady at t = " + fmt(*T) + " s, relative dispersion " + fmt(rel_disp) +
                  ", balance " + fmt(m.balance) + " (tol " + fmt(bal_tol) +
                  "), final vs reconstruction " + fmt(final_err) + ", run " + fmt(r.seconds) + " s"};
}

Outcome lyapunov_monotonicity() {
  const RingRun& r = ring_run();
  const LyapunovReport rep =
      lyapunov_decrease_check(r.config, r.gains, r.X_bar, r.trace.states, ControlMode::secondary, 1e-8);
  const StabilityReport& s = r.stability;
  const bool P_ok = s.P_blocks == Definiteness::positive_definite &&
                    s.P_eigen == Definiteness::positive_definite;
  const bool Q_ok = s.negQ_blocks != Definiteness::indefinite &&
                    s.negQ_eigen != Definiteness::indefinite;
  std::string detail = std::to_string(rep.values.size()) + " samples, W(0) = " +
                       fmt(rep.values.front()) + ", W(end) = " + fmt(rep.values.back()) +
                       "; P " + to_string(s.P_blocks) + "/" + to_string(s.P_eigen) + ", -Q " +
                       to_string(s.negQ_blocks) + "/" + to_string(s.negQ_eigen);
  if (rep.violation_index) detail += ", first increase at sample " + std::to_string(*rep.violation_index);
  return {rep.ok && P_ok && Q_ok && s.methods_agree(), detail};
}

Outcome communication_fallback() {
  const MicrogridConfig c = ring_config(4);
  const GainSet g = resolve_gains(c);
  const Vector Xbar = reconstruct_full(c, g, solve_voltage(c)).X.stacked();
  std::vector<ScenarioEvent> events;
  for (int i = 0; i < c.n(); ++i) events.push_back({0.5, DisableSecondary{i}});
  IntegratorOptions o;
  o.dt = 1e-5;
  o.t_end = 5.0;
  o.record_every = 100;
  const SimulationTrace tr = integrate(c, g, Xbar, events, o);
  if (tr.termination != Termination::completed) return {false, "run did not complete"};
  const auto T = detect_steady_state(tr, 0.2, 1e-3, 0.5);
  const SystemState end = tr.state(tr.size() - 1);
  const double v_err = max_abs(end.V - c.v_ref());
  const SystemState ref = primary_only_equilibrium(c, g);
  SystemState got = end.with_mode(ControlMode::primary_only);
  const double x_err = relative_error(got.stacked(), ref.stacked());
  return {T.has_value() && v_err <= 1e-4 && x_err <= 1e-4,
          std::string("steady ") + (T ? "at t = " + fmt(*T) + " s" : "not detected") +
              ", max |V - V_ref| = " + fmt(v_err) + " V, vs primary-only equilibrium " + fmt(x_err)};
}

// First swept P* (as a multiple of Y V^2) whose linearization is unstable.
std::optional<double> first_unstable(double margin, int points, double top, bool* monotone) {
  MicrogridConfig c;
  DguUnit d;
  d.params = {0.2, 1.8e-3, 2.2e-3, 10.0, 48.0, 80.0};
  d.load = {0.2, 0.0, 0.0, 0.0};
  d.secondary = false;
  c.dgus.push_back(d);
  const double threshold = d.load.conductance * d.params.v_ref * d.params.v_ref;
  std::optional<double> flip;
  *monotone = true;
  for (int k = 0; k <= points; ++k) {
    const double ratio = top * k / points;
    c.dgus[0].load.power = ratio * threshold;
    const GainSet g = resolve_gains(c, margin);
    const SystemState eq = primary_only_equilibrium(c, g);
    const SpectrumReport s = linearized_spectrum(c, g, eq.stacked(), ControlMode::primary_only);
    if (s.unstable > 0 && !flip) flip = ratio;
    if (s.unstable == 0 && flip) *monotone = false;
  }
  return flip;
}

Outcome load_condition_boundary() {
  bool monotone = false;
  const auto flip = first_unstable(0.99, 400, 2.0, &monotone);
  bool mono_half = false;
  const auto flip_half = first_unstable(0.5, 400, 4.0, &mono_half);
  if (!flip) return {false, "no unstable eigenvalue up to 2 Y V^2"};
  const bool ok = monotone && *flip >= 0.95 && *flip <= 1.05;
  return {ok, "gain margin 0.99: flip at P*/(Y V^2) = " + fmt(*flip) +
                  (monotone ? "" : " (not monotone)") + "; margin 0.5 flips at " +
                  (flip_half ? fmt(*flip_half) : std::string("none below 4"))};
}

Outcome reference_scenario() {
  const MicrogridConfig c = six_dgu_config();
  const ReferenceScenarioResult res = run_reference_scenario(c, resolve_gains(c));
  std::string detail;
  for (const PhaseReport& p : res.phases) {
    detail += p.phase.name + (p.ok ? " ok" : " FAILED") + "; ";
  }
  const bool no_collapse = res.trace.termination == Termination::completed;
  bool plug_ok = false;
  bool unplug_ok = false;
  for (const PhaseReport& p : res.phases) {
    const bool has6 = std::find(p.sharing_set.begin(), p.sharing_set.end(), 5) != p.sharing_set.end();
    if (p.phase.start == 10.0) plug_ok = p.ok && has6;
    const bool isl5 = std::find(p.islanded.begin(), p.islanded.end(), 4) != p.islanded.end();
    if (p.phase.start == 22.0) unplug_ok = p.ok && isl5 && p.islanded_error <= 1e-4;
  }
  detail += "DGU 6 plug-in " + std::string(plug_ok ? "ok" : "failed") + ", DGU 5 islanded " +
            (unplug_ok ? "ok" : "failed");
  return {res.ok() && no_collapse && plug_ok && unplug_ok, detail};
}

Outcome nonexistence_collapse() {
  const MicrogridConfig c = collapse_config();
  const GainSet g = resolve_gains(c);
  const CollapseResult scaled = run_collapse_scenario(c, g, kCollapseResistanceScale, 1e-5, 1.0);
  const CollapseResult base = run_collapse_scenario(c, g, 1.0, 1e-5, 1.0);
  const bool collapsed = scaled.trace.termination == Termination::voltage_collapse;
  const bool contrast = base.trace.termination == Termination::completed && base.certificate.feasible;

  const auto path = std::filesystem::temp_directory_path() / "dcmg_acceptance_collapse.json";
  ConfigDocument doc;
  doc.config = scaled.scaled;
  save_config(doc, path);
  std::ostringstream out;
  std::ostringstream err;
  const int code = cli::cmd_certify(path.string(), out, err);
  std::filesystem::remove(path);

  std::string detail = "scaled Delta = " + fmt(scaled.certificate.Delta) + ", ";
  detail += collapsed ? "collapse at DGU " + std::to_string(scaled.trace.collapse->node + 1) +
                            ", t = " + fmt(scaled.trace.collapse->time) + " s"
                      : std::string("no collapse");
  detail += "; unscaled Delta = " + fmt(base.certificate.Delta) +
            (contrast ? ", completes" : ", did not complete") + "; certify exit " + std::to_string(code);
  return {scaled.certificate.Delta >= 1.0 && collapsed && contrast && code == cli::kExitNegative,
          detail};
}

Outcome structural_suites() {
  constexpr int kInstances = 50;
  Rng rng(1011);
  int laplacian_ok = 0;
  int admittance_ok = 0;
  int omega_ok = 0;
  int order_ok = 0;
  int csv_ok = 0;
  double order_lo = 1e9;
  double order_hi = -1e9;

  for (int k = 0; k < kInstances; ++k) {
    const MicrogridConfig c = testing::random_grid(rng, sized(rng, 2, 10));
    const Matrix B = c.incidence();
    const Matrix Le = c.electrical_laplacian();
    const Matrix Lp = testing::reduced_laplacian(c);
    const Vector one = Vector::Ones(c.n());
    const double s = Lp.cwiseAbs().maxCoeff();
    const bool ok = max_abs((one.transpose() * B).transpose()) == 0.0 &&
                    max_abs((one.transpose() * Le).transpose()) <= 1e-12 * s &&
                    numerical_rank(Le) == c.n() - 1 &&
                    max_abs((one.transpose() * Lp).transpose()) <= 1e-12 * s &&
                    numerical_rank(Lp) == c.n() - 1 &&
                    (certificate(c).L_tilde.topRows(c.n()) - Lp).cwiseAbs().maxCoeff() <= 1e-12 * s;
    laplacian_ok += ok;
  }

  for (int k = 0; k < kInstances; ++k) {
    const ZieLoad l = testing::random_load(rng, false);
    const double V = uniform(rng, 5.0, 100.0);
    const double h = 1e-5 * V;
    const double fd = (load_current(l, V + h) - load_current(l, V - h)) / (2.0 * h);
    const double exact = incremental_admittance(l, V);
    admittance_ok += std::abs(fd - exact) <= 1e-6 * std::max(1.0, std::abs(exact));
  }

  for (int k = 0; k < kInstances; ++k) {
    testing::RandomGridOptions o = sized(rng, 2, 8);
    o.zip = k % 2 == 0;
    const MicrogridConfig c = testing::random_grid(rng, o);
    const GainSet g = resolve_gains(c);
    const StateLayout L{c.n(), c.m(), ControlMode::secondary};
    // Started near the equilibrium: from primary_start, V_ref spreads of a
    // few volts across 50 mOhm lines can push a random grid into collapse.
    Vector X0 = reconstruct_full(c, g, solve_voltage(c)).X.stacked();
    for (int i = 0; i < c.n(); ++i) {
      X0[L.V() + i] += uniform(rng, -1.0, 1.0);
      X0[L.Omega() + i] = uniform(rng, -0.05, 0.05);
    }
    IntegratorOptions io;
    io.t_end = 0.02;
    io.record_every = 10;
    const SimulationTrace tr = integrate(c, g, X0, {}, io);
    const double m0 = X0.segment(L.Omega(), L.n).sum();
    bool ok = tr.termination == Termination::completed;
    for (const Vector& x : tr.states) {
      const Vector om = x.segment(L.Omega(), L.n);
      ok = ok && std::abs(om.sum() - m0) <= 1e-9 * std::max(1.0, max_abs(om));
    }
    omega_ok += ok;
  }

  for (int k = 0; k < kInstances; ++k) {
    testing::RandomGridOptions o = sized(rng, 2, 6);
    o.zip = k % 2 == 0;
    const MicrogridConfig c = testing::random_grid(rng, o);
    const GainSet g = resolve_gains(c);
    Vector X0 = reconstruct_full(c, g, solve_voltage(c)).X.stacked();
    for (Index i = 0; i < X0.size(); ++i) X0[i] += uniform(rng, -0.5, 0.5);
    auto end_state = [&](double dt) {
      IntegratorOptions io;
      io.dt = dt;
      io.t_end = 4e-4;  // short enough that the fast line modes still dominate the error
      io.record_every = 1 << 20;
      return integrate(c, g, X0, {}, io).states.back();
    };
    const Vector a = end_state(4e-6);
    const Vector b = end_state(2e-6);
    const Vector d = end_state(1e-6);
    const double order = std::log2(max_abs(a - b) / max_abs(b - d));
    order_lo = std::min(order_lo, order);
    order_hi = std::max(order_hi, order);
    order_ok += order >= 3.5 && order <= 4.5;
  }

  for (int k = 0; k < kInstances; ++k) {
    const MicrogridConfig c = testing::random_grid(rng, sized(rng, 2, 8));
    const GainSet g = resolve_gains(c);
    IntegratorOptions io;
    io.t_end = 0.01;
    io.record_every = 10;
    auto csv = [&] {
      std::ostringstream os;
      write_trace_csv(os, integrate(c, g, primary_start(c, g), {}, io));
      return os.str();
    };
    csv_ok += csv() == csv();
  }

  const int n = kInstances;
  const bool ok = laplacian_ok == n && admittance_ok == n && omega_ok == n && order_ok == n && csv_ok == n;
  return {ok, "laplacian " + std::to_string(laplacian_ok) + "/50, admittance " +
                  std::to_string(admittance_ok) + "/50, omega-mean " + std::to_string(omega_ok) +
                  "/50, rk4 order " + std::to_string(order_ok) + "/50 (observed " + fmt(order_lo) +
                  ".." + fmt(order_hi) + "), csv " + std::to_string(csv_ok) + "/50"};
}

struct Criterion {
  int id;
  const char* name;
  double budget_s;
  std::function<Outcome()> fn;
};

}  // namespace

int main() {
  const std::vector<Criterion> criteria{
      {1, "zero-power exactness", 5.0, zero_power_exactness},
      {2, "contraction-box containment", 10.0, contraction_box},
      {3, "oracle equivalence", 10.0, oracle_equivalence},
      {4, "deviation root identity", 1.0, root_identity},
      {5, "steady-state objectives", 60.0, steady_state_objectives},
      {6, "Lyapunov monotonicity", 60.0, lyapunov_monotonicity},
      {7, "communication-loss fallback", 60.0, communication_fallback},
      {8, "load-condition boundary", 10.0, load_condition_boundary},
      {9, "six-DGU scenario", 600.0, reference_scenario},
      {10, "nonexistence collapse", 600.0, nonexistence_collapse},
      {11, "structural property suites", 600.0, structural_suites},
  };
  int failed = 0;
  for (const Criterion& c : criteria) {
    const Timed t = timed(c.fn);
    const bool in_budget = t.seconds < c.budget_s;
    const bool pass = t.outcome.pass && in_budget;
    failed += !pass;
    std::printf("[%s] AC-%d %s: %s (%.2f s%s)\n", pass ? "PASS" : "FAIL", c.id, c.name,
                t.outcome.detail.c_str(), t.seconds, in_budget ? "" : ", over budget");
    std::fflush(stdout);
  }
  std::printf("%d/%zu criteria passed\n", static_cast<int>(criteria.size()) - failed, criteria.size());
  return failed == 0 ? 0 : 1;
}
