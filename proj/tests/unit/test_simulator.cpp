// SPDX-License-Identifier: Apache-2.0
#include "dcmg/equilibrium.hpp"
#include "dcmg/scenarios.hpp"
#include "dcmg/simulator.hpp"
#include "support/generators.hpp"
#include "support/oracles.hpp"

#include <gtest/gtest.h>

#include <cmath>

namespace dcmg {
namespace {

IntegratorOptions opts(double t_end, double dt = 1e-5, int record_every = 1) {
  IntegratorOptions o;
  o.t_end = t_end;
  o.dt = dt;
  o.record_every = record_every;
  return o;
}

double final_dx(const SimulationTrace& tr) {
  const std::size_t k = tr.size() - 1;
  return testing::max_abs(tr.states[k] - tr.states[k - 1]) / (tr.time[k] - tr.time[k - 1]);
}

TEST(Integrate, HoldsEquilibrium) {
  const MicrogridConfig c = six_dgu_connected_zip_config();
  const GainSet g = resolve_gains(c);
  const Vector Xbar = reconstruct_full(c, g, solve_voltage(c)).X.stacked();
  const SimulationTrace tr = integrate(c, g, Xbar, {}, opts(0.2, 1e-5, 100));
  EXPECT_EQ(tr.termination, Termination::completed);
  const double scale = testing::max_abs(Xbar);
  for (const Vector& x : tr.states) EXPECT_LE(testing::max_abs(x - Xbar), 1e-6 * scale);
}

TEST(Integrate, SingleDguReachesReference) {
  MicrogridConfig c;
  DguUnit d;
  d.params = {0.2, 0.0018, 0.0022, 10.0, 48.0, 80.0};
  d.load = {0.5, 0.0, 0.0, 1.0};
  d.secondary = false;
  c.dgus.push_back(d);
  const GainSet g = resolve_gains(c);
  IntegratorOptions o = opts(1.0, 1e-5, 10);
  o.mode = ControlMode::primary_only;
  Vector X0 = Vector::Zero(3);
  X0[0] = 1.0;  // capacitor nearly discharged, controller at rest
  const SimulationTrace tr = integrate(c, g, X0, {}, o);
  ASSERT_EQ(tr.termination, Termination::completed);
  EXPECT_LE(std::abs(tr.states.back()[0] - 48.0), 1e-6);
  EXPECT_LE(final_dx(tr), 1e-3);
}

TEST(Integrate, TwoNodeSecondaryConverges) {
  const MicrogridConfig c = two_node_config();
  const GainSet g = resolve_gains(c);
  const Vector X0 = primary_start(c, g);
  const SimulationTrace tr = integrate(c, g, X0, {}, opts(2.0, 1e-5, 100));
  ASSERT_EQ(tr.termination, Termination::completed);
  const Vector& Xf = tr.states.back();
  const SharingMetrics m = sharing_metrics(c, Xf);
  EXPECT_LE(m.dispersion, 1e-3 * std::abs(m.mean_ratio));
  const double scale = c.ratings().sum() * c.v_ref().mean();
  EXPECT_LE(m.balance, 1e-3 * scale);
  const Vector Xbar = reconstruct_full(c, g, solve_voltage(c)).X.stacked();
  const StateLayout& L = tr.layout;
  // Omega is compared modulo its conserved mean
  Vector Xc = Xf;
  Xc.segment(L.Omega(), L.n).array() -= Xf.segment(L.Omega(), L.n).mean();
  EXPECT_LE(testing::max_abs(Xc - Xbar), 1e-4 * testing::max_abs(Xbar));
}

TEST(Integrate, PrimaryOnlyModeMatchesSecondaryWithoutConsensus) {
  MicrogridConfig c = ring_config(4);
  for (auto& d : c.dgus) d.secondary = false;
  const GainSet g = resolve_gains(c);
  Vector Xp = primary_start(c, g, ControlMode::primary_only);
  Xp[0] -= 1.5;
  Xp[5] += 0.7;
  IntegratorOptions op = opts(0.05, 1e-5, 50);
  op.mode = ControlMode::primary_only;
  const SimulationTrace tp = integrate(c, g, Xp, {}, op);
  const StateLayout ls{c.n(), c.m(), ControlMode::secondary};
  const Vector Xs = SystemState::unstack(Xp, tp.layout).with_mode(ControlMode::secondary).stacked();
  const SimulationTrace ts = integrate(c, g, Xs, {}, opts(0.05, 1e-5, 50));
  ASSERT_EQ(tp.size(), ts.size());
  for (std::size_t k = 0; k < tp.size(); ++k) {
    EXPECT_EQ(ts.states[k].head(tp.layout.size()), tp.states[k]);
    EXPECT_EQ(ts.states[k].segment(ls.Omega(), ls.n).cwiseAbs().maxCoeff(), 0.0);
  }
}

TEST(Integrate, OmegaMeanConserved) {
  testing::Rng rng(61);
  for (int trial = 0; trial < 10; ++trial) {
    testing::RandomGridOptions go;
    go.n = 2 + trial % 5;
    const MicrogridConfig c = testing::random_grid(rng, go);
    const GainSet g = resolve_gains(c);
    Vector X0 = primary_start(c, g);
    const StateLayout L{c.n(), c.m(), ControlMode::secondary};
    for (int i = 0; i < c.n(); ++i) X0[L.Omega() + i] = testing::uniform(rng, -0.05, 0.05);
    const double m0 = X0.segment(L.Omega(), L.n).sum();
    const SimulationTrace tr = integrate(c, g, X0, {}, opts(0.05, 1e-5, 100));
    for (const Vector& x : tr.states) {
      EXPECT_NEAR(x.segment(L.Omega(), L.n).sum(), m0,
                  1e-9 * std::max(1.0, testing::max_abs(x.segment(L.Omega(), L.n))));
    }
  }
}

TEST(Integrate, FourthOrderConvergence) {
  const MicrogridConfig c = ring_config(4);
  const GainSet g = resolve_gains(c);
  Vector X0 = reconstruct_full(c, g, solve_voltage(c)).X.stacked();
  X0[0] += 2.0;
  X0[6] -= 1.0;
  auto end_state = [&](double dt) {
    return integrate(c, g, X0, {}, opts(4e-3, dt, 1 << 20)).states.back();
  };
  const Vector a = end_state(4e-5);
  const Vector b = end_state(2e-5);
  const Vector d = end_state(1e-5);
  const double ratio = testing::max_abs(a - b) / testing::max_abs(b - d);
  EXPECT_GT(std::log2(ratio), 3.5);
  EXPECT_LT(std::log2(ratio), 4.5);
}

TEST(Integrate, RejectsOffGridEvent) {
  const MicrogridConfig c = six_dgu_config();
  const GainSet g = resolve_gains(c);
  const Vector X0 = primary_start(c, g);
  const std::vector<ScenarioEvent> ev{{0.0100005, CloseLine{0}}};
  EXPECT_THROW(integrate(c, g, X0, ev, opts(0.02)), ConfigError);
  const std::vector<ScenarioEvent> late{{0.5, CloseLine{0}}};
  EXPECT_THROW(integrate(c, g, X0, late, opts(0.02)), ConfigError);
  const std::vector<ScenarioEvent> unsorted{{0.01, CloseLine{0}}, {0.005, CloseLine{1}}};
  EXPECT_THROW(integrate(c, g, X0, unsorted, opts(0.02)), ConfigError);
}

TEST(Integrate, EventsRecordedAndConfigHistoryTracked) {
  const MicrogridConfig c = six_dgu_config();
  const GainSet g = resolve_gains(c);
  const std::vector<ScenarioEvent> ev{{0.01, CloseLine{1}}, {0.01, EnableSecondary{0}},
                                      {0.01, EnableSecondary{2}}};
  const SimulationTrace tr = integrate(c, g, primary_start(c, g), ev, opts(0.02, 1e-5, 100));
  EXPECT_EQ(tr.events.size(), 3u);
  EXPECT_FALSE(tr.config_at(0.005).lines[1].closed);
  EXPECT_TRUE(tr.config_at(0.015).lines[1].closed);
  EXPECT_TRUE(tr.final_config().dgus[2].secondary);
  EXPECT_FALSE(tr.final_config().dgus[1].secondary);
}

TEST(Integrate, ReportsCollapse) {
  MicrogridConfig c;
  DguUnit d;
  d.params = {0.2, 0.0018, 0.0022, 10.0, 48.0, 80.0};
  d.load = {0.2, 0.0, 100.0, 0.0};
  d.secondary = false;
  c.dgus.push_back(d);
  const GainSet g = resolve_gains(c);
  IntegratorOptions o = opts(0.1, 1e-5, 10);
  o.mode = ControlMode::primary_only;
  o.voltage_floor = 20.0;
  Vector X0 = Vector::Zero(3);
  X0[0] = 5.0;  // starting below the floor trips immediately
  const SimulationTrace tr = integrate(c, g, X0, {}, o);
  EXPECT_EQ(tr.termination, Termination::voltage_collapse);
  ASSERT_TRUE(tr.collapse.has_value());
  EXPECT_EQ(tr.collapse->node, 0);
}

TEST(ApplyEvent, PlugInStartsAtIsolatedEquilibrium) {
  MicrogridConfig c = six_dgu_config();
  c.dgus[5].online = false;
  const GainSet g = resolve_gains(c);
  Vector X = primary_start(c, g);
  const StateLayout L{c.n(), c.m(), ControlMode::secondary};
  X[L.V() + 5] = 0.0;
  apply_event(c, g, X, {0.0, PlugInDgu{5, {2, 6}}});
  EXPECT_TRUE(c.dgus[5].online);
  EXPECT_TRUE(c.dgus[5].secondary);
  EXPECT_TRUE(c.lines[2].closed);
  EXPECT_TRUE(c.lines[6].closed);
  EXPECT_EQ(X[L.V() + 5], c.dgus[5].params.v_ref);
  EXPECT_EQ(X[L.Omega() + 5], 0.0);
}

TEST(ApplyEvent, UnplugOpensIncidentLines) {
  MicrogridConfig c = six_dgu_connected_zip_config();
  const GainSet g = resolve_gains(c);
  Vector X = reconstruct_full(c, g, solve_voltage(c)).X.stacked();
  const StateLayout L{c.n(), c.m(), ControlMode::secondary};
  apply_event(c, g, X, {0.0, UnplugDgu{4}});
  EXPECT_FALSE(c.lines[5].closed);
  EXPECT_FALSE(c.lines[6].closed);
  EXPECT_TRUE(c.lines[4].closed);
  EXPECT_FALSE(c.dgus[4].secondary);
  EXPECT_TRUE(c.dgus[4].online);
  EXPECT_EQ(X[L.I() + 5], 0.0);
}

TEST(ApplyEvent, RejectsInvalidIndex) {
  MicrogridConfig c = six_dgu_config();
  const GainSet g = resolve_gains(c);
  Vector X = primary_start(c, g);
  EXPECT_THROW(apply_event(c, g, X, {0.0, CloseLine{9}}), ConfigError);
}

SimulationTrace scalar_trace(const std::function<double(double)>& f, double t_end, double dt) {
  SimulationTrace tr;
  tr.layout = {1, 0, ControlMode::primary_only};
  for (double t = 0.0; t <= t_end + 1e-12; t += dt) {
    tr.time.push_back(t);
    Vector x(3);
    x << f(t), 0.0, 0.0;
    tr.states.push_back(x);
  }
  return tr;
}

TEST(DetectSteadyState, ConstantTrace) {
  const SimulationTrace tr = scalar_trace([](double) { return 5.0; }, 2.0, 0.01);
  const auto t = detect_steady_state(tr, 0.2, 1e-3);
  ASSERT_TRUE(t.has_value());
  EXPECT_NEAR(*t, 0.2, 1e-9);
}

TEST(DetectSteadyState, ExponentialDecay) {
  // |dx/dt| = 10 * 50 e^{-50 t} drops below 1e-3 * 10 at t = ln(5e4)/50
  const SimulationTrace tr = scalar_trace([](double t) { return 10.0 * std::exp(-50.0 * t); },
                                          2.0, 1e-3);
  const auto t = detect_steady_state(tr, 0.2, 1e-3);
  ASSERT_TRUE(t.has_value());
  const double quiet = std::log(5e4) / 50.0;
  EXPECT_NEAR(*t, quiet + 0.2, 5e-3);
}

TEST(DetectSteadyState, DivergingTrace) {
  const SimulationTrace tr = scalar_trace([](double t) { return std::exp(3.0 * t); }, 2.0, 1e-3);
  EXPECT_FALSE(detect_steady_state(tr, 0.2, 1e-3).has_value());
}

}  // namespace
}  // namespace dcmg
