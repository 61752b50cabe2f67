// SPDX-License-Identifier: Apache-2.0
#include "dcmg/scenarios.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace dcmg {
namespace {

constexpr double kCommWeight = 80.0;

DguUnit make_dgu(double rating, double v_ref, ZieLoad load) {
  DguUnit d;
  d.params = {0.2, 1.8e-3, 2.2e-3, rating, v_ref, 80.0};
  d.load = load;
  return d;
}

LineUnit make_line(int from, int to, double R, double L) {
  return {{from, to}, {R, L}, true};
}

// Exponential part with nominal power p_nom drawn at V_ref.
ZieLoad zie(double Y, double I, double p_nom, double r, double v_ref) {
  return {Y, I, p_nom / std::pow(v_ref, r), r};
}

ZieLoad with_exponent(const ZieLoad& load, double r, double v_ref) {
  const double p_nom = load.power * std::pow(v_ref, load.exponent);
  return zie(load.conductance, load.constant_current, p_nom, r, v_ref);
}

}  // namespace

MicrogridConfig six_dgu_config() {
  MicrogridConfig c;
  const double ratings[6] = {15.0, 12.0, 18.0, 14.0, 16.0, 15.0};
  const double v_ref[6] = {48.0, 47.5, 48.5, 47.0, 49.0, 48.0};
  const ZieLoad loads[6] = {
      {0.20, 2.0, 150.0, 0.0}, {0.15, 1.0, 100.0, 0.0}, {0.25, 0.0, 200.0, 0.0},
      {0.20, 1.5, 120.0, 0.0}, {0.18, 0.5, 150.0, 0.0}, zie(0.20, 1.0, 180.0, 0.65, v_ref[5]),
  };
  for (int i = 0; i < 6; ++i) {
    c.dgus.push_back(make_dgu(ratings[i], v_ref[i], loads[i]));
    c.dgus.back().secondary = false;
  }
  c.lines = {
      make_line(0, 1, 0.05, 2.1e-6), make_line(0, 2, 0.07, 2.4e-6),
      make_line(0, 5, 0.06, 2.2e-6), make_line(1, 3, 0.08, 2.5e-6),
      make_line(2, 3, 0.09, 2.8e-6), make_line(3, 4, 0.10, 3.0e-6),
      make_line(4, 5, 0.065, 2.3e-6),
  };
  for (auto& l : c.lines) l.closed = false;
  c.comm = {{0, 3, kCommWeight}, {0, 2, kCommWeight}, {1, 2, kCommWeight},
            {2, 3, kCommWeight}, {2, 4, kCommWeight}, {2, 5, kCommWeight}};
  return c;
}

MicrogridConfig six_dgu_connected_zip_config() {
  MicrogridConfig c = six_dgu_config();
  for (auto& d : c.dgus) {
    d.secondary = true;
    d.load = with_exponent(d.load, 0.0, d.params.v_ref);
  }
  for (auto& l : c.lines) l.closed = true;
  return c;
}

MicrogridConfig ring_config(int n) {
  if (n < 2) throw ConfigError("ring_config: need at least two DGUs");
  MicrogridConfig c;
  for (int i = 0; i < n; ++i) {
    const double rating = 12.0 + 2.0 * (i % 3);
    const double v_ref = 47.0 + 0.5 * (i % 4);
    const ZieLoad load{0.15 + 0.03 * (i % 3), 0.5 * (i % 2), 80.0 + 30.0 * (i % 4), 0.0};
    c.dgus.push_back(make_dgu(rating, v_ref, load));
  }
  for (int i = 0; i < n; ++i) {
    const int j = (i + 1) % n;
    if (n == 2 && i == 1) break;
    c.lines.push_back(make_line(i, j, 0.05 + 0.01 * (i % 5), 2.0e-6 + 0.2e-6 * (i % 5)));
    c.comm.push_back({i, j, kCommWeight});
  }
  return c;
}

MicrogridConfig two_node_config() {
  MicrogridConfig c;
  c.dgus.push_back(make_dgu(10.0, 48.0, {0.2, 1.0, 120.0, 0.0}));
  c.dgus.push_back(make_dgu(14.0, 47.0, {0.25, 0.0, 200.0, 0.0}));
  c.lines.push_back(make_line(0, 1, 0.07, 2.5e-6));
  c.comm.push_back({0, 1, kCommWeight});
  return c;
}

MicrogridConfig collapse_config() {
  MicrogridConfig c = six_dgu_connected_zip_config();
  // A small unit next to a large constant-power load: most of that load has
  // to be imported over the lines once currents are shared by rating.
  c.dgus[4].params.rated_current = 4.0;
  c.dgus[4].load = {0.2, 0.0, 440.0, 0.0};
  return c;
}

std::vector<ScenarioEvent> reference_scenario_events(const MicrogridConfig& config6) {
  if (config6.n() != 6 || config6.m() != 7) {
    throw ConfigError("six-DGU reference scenario needs the six-DGU, seven-line topology");
  }
  std::vector<ScenarioEvent> ev;
  for (int l : {0, 1, 3, 4, 5}) ev.push_back({1.5, CloseLine{l}});
  for (int i = 0; i < 5; ++i) ev.push_back({1.5, EnableSecondary{i}});

  for (int i : {0, 3}) {
    ZieLoad load = config6.dgus[i].load;
    load.conductance += 0.1;
    load.power += 100.0;
    ev.push_back({6.0, SetLoad{i, load}});
  }

  ev.push_back({10.0, PlugInDgu{5, {2, 6}}});
  auto exponent_event = [&](double t, int i, double r, const ZieLoad& current) {
    ev.push_back({t, SetLoad{i, with_exponent(current, r, config6.dgus[i].params.v_ref)}});
  };
  exponent_event(10.0, 1, 0.6, config6.dgus[1].load);
  exponent_event(10.0, 2, 0.55, config6.dgus[2].load);
  exponent_event(10.0, 4, 0.4, config6.dgus[4].load);
  const ZieLoad dgu3_at_10 =
      with_exponent(config6.dgus[2].load, 0.55, config6.dgus[2].params.v_ref);
  exponent_event(17.0, 2, 1.45, dgu3_at_10);
  exponent_event(17.0, 5, 1.35, config6.dgus[5].load);

  ev.push_back({22.0, UnplugDgu{4}});
  return ev;
}

std::vector<Phase> reference_scenario_phases(double t_end) {
  return {{"initialization", 0.0, 1.5},  {"connection", 1.5, 6.0},
          {"zip_load_change", 6.0, 10.0}, {"dgu6_plug_in", 10.0, 17.0},
          {"zie_load_change", 17.0, 22.0}, {"dgu5_unplug", 22.0, t_end}};
}

bool ReferenceScenarioResult::ok() const {
  if (trace.termination != Termination::completed) return false;
  return std::all_of(phases.begin(), phases.end(), [](const PhaseReport& p) { return p.ok; });
}

PhaseReport check_phase(const SimulationTrace& trace, const Phase& phase,
                        const ScenarioTolerances& tol) {
  PhaseReport rep;
  rep.phase = phase;
  if (trace.size() == 0) return rep;
  const bool final_phase = phase.end >= trace.time.back();
  // Last sample before the next phase's events fire.
  std::optional<std::size_t> k_end;
  for (std::size_t k = 0; k < trace.size(); ++k) {
    const double t = trace.time[k];
    if (t >= phase.start && (final_phase ? t <= phase.end : t < phase.end)) k_end = k;
  }
  if (!k_end) return rep;
  rep.end_time = trace.time[*k_end];
  rep.steady_time =
      detect_steady_state(trace, tol.steady_window, tol.steady_eps, phase.start, rep.end_time);

  const MicrogridConfig& cfg = trace.config_at(rep.end_time);
  const Vector& X = trace.states[*k_end];
  const StateLayout& s = trace.layout;
  double rating_sum = 0.0;
  double v_ref_sum = 0.0;
  std::vector<char> wired(cfg.n(), 0);
  for (const auto& l : cfg.lines) {
    if (l.closed) wired[l.ends.source] = wired[l.ends.sink] = 1;
  }
  for (int i = 0; i < cfg.n(); ++i) {
    const DguUnit& d = cfg.dgus[i];
    if (!d.online) continue;
    if (d.secondary) {
      rep.sharing_set.push_back(i);
      rating_sum += d.params.rated_current;
      v_ref_sum += d.params.v_ref;
    } else if (!wired[i]) {
      rep.islanded.push_back(i);
      rep.islanded_error =
          std::max(rep.islanded_error, std::abs(X[s.V() + i] - d.params.v_ref));
    }
  }
  const SharingMetrics met = sharing_metrics(cfg, X);
  rep.dispersion = met.dispersion;
  rep.relative_dispersion =
      met.mean_ratio != 0.0 ? met.dispersion / std::abs(met.mean_ratio) : met.dispersion;
  rep.balance = met.balance;
  if (!rep.sharing_set.empty()) {
    rep.balance_tolerance =
        tol.balance * rating_sum * v_ref_sum / static_cast<double>(rep.sharing_set.size());
  }
  rep.ok = rep.steady_time.has_value() && rep.relative_dispersion <= tol.sharing &&
           rep.balance <= rep.balance_tolerance && rep.islanded_error <= tol.islanded_voltage;
  return rep;
}

ReferenceScenarioResult run_reference_scenario(const MicrogridConfig& config6, const GainSet& gains,
                                       double dt, double t_end, int record_every,
                                       const ScenarioTolerances& tol) {
  const auto events = reference_scenario_events(config6);
  IntegratorOptions opts;
  opts.dt = dt;
  opts.t_end = t_end;
  opts.record_every = record_every;
  ReferenceScenarioResult out;
  out.trace = integrate(config6, gains, primary_start(config6, gains), events, opts);
  for (const Phase& p : reference_scenario_phases(t_end)) {
    out.phases.push_back(check_phase(out.trace, p, tol));
  }
  return out;
}

MicrogridConfig scale_line_resistances(const MicrogridConfig& config, double scale) {
  if (!(scale > 0.0)) throw ConfigError("resistance scale must be positive");
  MicrogridConfig out = config;
  for (auto& l : out.lines) {
    l.params.resistance *= scale;
    l.closed = true;
  }
  for (auto& d : out.dgus) d.secondary = true;
  return out;
}

double stable_step(const MicrogridConfig& config, double dt) {
  // RK4 needs |lambda dt| below about 2.8; the line pole sits at -R/L.
  double tau = std::numeric_limits<double>::infinity();
  for (const auto& l : config.lines) {
    tau = std::min(tau, l.params.inductance / l.params.resistance);
  }
  while (dt > 0.5 * tau) dt *= 0.5;
  return dt;
}

std::vector<ScenarioEvent> connect_all_events(const MicrogridConfig& config, double time) {
  std::vector<ScenarioEvent> ev;
  for (int l = 0; l < config.m(); ++l) ev.push_back({time, CloseLine{l}});
  for (int i = 0; i < config.n(); ++i) {
    if (config.dgus[i].online) ev.push_back({time, EnableSecondary{i}});
  }
  return ev;
}

CollapseResult run_collapse_scenario(const MicrogridConfig& config, const GainSet& gains,
                                     double resistance_scale, double dt, double t_end,
                                     double connect_time, int record_every) {
  CollapseResult out;
  out.scaled = scale_line_resistances(config, resistance_scale);
  out.certificate = certificate(out.scaled);

  MicrogridConfig start = out.scaled;
  for (auto& l : start.lines) l.closed = false;
  for (auto& d : start.dgus) d.secondary = false;
  const int refine = static_cast<int>(std::lround(dt / stable_step(out.scaled, dt)));
  IntegratorOptions opts;
  opts.dt = dt / refine;
  opts.t_end = t_end;
  opts.record_every = record_every * refine;
  const auto events = connect_all_events(start, connect_time);
  out.trace = integrate(start, gains, primary_start(start, gains), events, opts);
  return out;
}

}  // namespace dcmg
