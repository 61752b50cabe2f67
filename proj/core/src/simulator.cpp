// SPDX-License-Identifier: Apache-2.0
#include "dcmg/simulator.hpp"

#include "dcmg/equilibrium.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace dcmg {
namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

void check_node(const MicrogridConfig& c, int node, const char* what) {
  if (node < 0 || node >= c.n()) {
    throw ConfigError(std::string(what) + ": no DGU " + std::to_string(node));
  }
}

void check_line(const MicrogridConfig& c, int line, const char* what) {
  if (line < 0 || line >= c.m()) {
    throw ConfigError(std::string(what) + ": no line " + std::to_string(line));
  }
}

StateLayout layout_for(const MicrogridConfig& c, const Vector& X) {
  StateLayout s{c.n(), c.m(), ControlMode::secondary};
  if (X.size() == s.size()) return s;
  s.mode = ControlMode::primary_only;
  if (X.size() == s.size()) return s;
  throw ConfigError("state has dimension " + std::to_string(X.size()) + ", expected " +
                    std::to_string(4 * c.n() + c.m()) + " or " +
                    std::to_string(3 * c.n() + c.m()));
}

void close_line(MicrogridConfig& c, int l) {
  LineUnit& line = c.lines[l];
  if (!c.dgus[line.ends.source].online || !c.dgus[line.ends.sink].online) {
    throw ConfigError("close_line: line " + std::to_string(l) + " touches an offline DGU");
  }
  line.closed = true;
}

void open_line(MicrogridConfig& c, const StateLayout& s, Vector& X, int l) {
  c.lines[l].closed = false;
  X[s.I() + l] = 0.0;
}

void enable_secondary(MicrogridConfig& c, const StateLayout& s, Vector& X, int node) {
  if (s.mode != ControlMode::secondary) {
    throw ConfigError("enable_secondary: integration runs in primary-only mode");
  }
  if (!c.dgus[node].online) {
    throw ConfigError("enable_secondary: DGU " + std::to_string(node) + " is offline");
  }
  c.dgus[node].secondary = true;
  X[s.Omega() + node] = 0.0;
}

bool on_grid(double t, double dt, long long& step) {
  const double q = t / dt;
  step = std::llround(q);
  return std::abs(q - static_cast<double>(step)) <= 1e-6;
}

}  // namespace

const char* to_string(EventKind kind) {
  switch (kind) {
    case EventKind::close_line: return "close_line";
    case EventKind::open_line: return "open_line";
    case EventKind::set_load: return "set_load";
    case EventKind::plug_in_dgu: return "plug_in_dgu";
    case EventKind::unplug_dgu: return "unplug_dgu";
    case EventKind::enable_secondary: return "enable_secondary";
    case EventKind::disable_secondary: return "disable_secondary";
    case EventKind::set_comm_link: return "set_comm_link";
  }
  return "?";
}

std::string ScenarioEvent::describe() const {
  std::ostringstream os;
  os << to_string(kind()) << ' ';
  std::visit(overloaded{
                 [&](const CloseLine& e) { os << "line " << e.line; },
                 [&](const OpenLine& e) { os << "line " << e.line; },
                 [&](const SetLoad& e) {
                   os << "dgu " << e.node << " Y=" << e.load.conductance
                      << " I=" << e.load.constant_current << " P=" << e.load.power
                      << " r=" << e.load.exponent;
                 },
                 [&](const PlugInDgu& e) {
                   os << "dgu " << e.node << " lines";
                   for (int l : e.lines) os << ' ' << l;
                 },
                 [&](const UnplugDgu& e) { os << "dgu " << e.node; },
                 [&](const EnableSecondary& e) { os << "dgu " << e.node; },
                 [&](const DisableSecondary& e) { os << "dgu " << e.node; },
                 [&](const SetCommLink& e) {
                   os << e.a << '-' << e.b << " weight=" << e.weight;
                 },
             },
             action);
  return os.str();
}

SharingMetrics sharing_metrics(const MicrogridConfig& config, const Vector& X) {
  const StateLayout s = layout_for(config, X);
  SharingMetrics out;
  double lo = 0.0;
  double hi = 0.0;
  double sum_It = 0.0;
  double sum_Is = 0.0;
  double balance = 0.0;
  bool any = false;
  for (int i = 0; i < config.n(); ++i) {
    const DguUnit& d = config.dgus[i];
    if (!d.online || !d.secondary) continue;
    const double ratio = X[s.It() + i] / d.params.rated_current;
    lo = any ? std::min(lo, ratio) : ratio;
    hi = any ? std::max(hi, ratio) : ratio;
    any = true;
    sum_It += X[s.It() + i];
    sum_Is += d.params.rated_current;
    balance += d.params.rated_current * (X[s.V() + i] - d.params.v_ref);
  }
  if (any) {
    out.dispersion = hi - lo;
    out.balance = std::abs(balance);
    out.mean_ratio = sum_It / sum_Is;
  }
  return out;
}

void apply_event(MicrogridConfig& config, const GainSet& gains, Vector& X,
                 const ScenarioEvent& event) {
  const StateLayout s = layout_for(config, X);
  std::visit(
      overloaded{
          [&](const CloseLine& e) {
            check_line(config, e.line, "close_line");
            close_line(config, e.line);
          },
          [&](const OpenLine& e) {
            check_line(config, e.line, "open_line");
            open_line(config, s, X, e.line);
          },
          [&](const SetLoad& e) {
            check_node(config, e.node, "set_load");
            config.dgus[e.node].load = e.load;
          },
          [&](const PlugInDgu& e) {
            check_node(config, e.node, "plug_in_dgu");
            for (int l : e.lines) check_line(config, l, "plug_in_dgu");
            DguUnit& d = config.dgus[e.node];
            if (!d.online) {
              d.online = true;
              const int i = e.node;
              const double Vr = d.params.v_ref;
              const double It = load_current(d.load, Vr);
              X[s.V() + i] = Vr;
              X[s.It() + i] = It;
              X[s.v() + i] = -(gains.alpha[i] * Vr + gains.beta[i] * It) / gains.gamma[i];
            }
            for (int l : e.lines) close_line(config, l);
            if (s.mode == ControlMode::secondary) enable_secondary(config, s, X, e.node);
          },
          [&](const UnplugDgu& e) {
            check_node(config, e.node, "unplug_dgu");
            for (int l = 0; l < config.m(); ++l) {
              const Edge ends = config.lines[l].ends;
              if (ends.source == e.node || ends.sink == e.node) open_line(config, s, X, l);
            }
            config.dgus[e.node].secondary = false;
          },
          [&](const EnableSecondary& e) {
            check_node(config, e.node, "enable_secondary");
            enable_secondary(config, s, X, e.node);
          },
          [&](const DisableSecondary& e) {
            check_node(config, e.node, "disable_secondary");
            config.dgus[e.node].secondary = false;
          },
          [&](const SetCommLink& e) {
            check_node(config, e.a, "set_comm_link");
            check_node(config, e.b, "set_comm_link");
            if (e.a == e.b) throw ConfigError("set_comm_link: self-loop");
            auto it = std::find_if(config.comm.begin(), config.comm.end(), [&](const CommLink& c) {
              return (c.a == e.a && c.b == e.b) || (c.a == e.b && c.b == e.a);
            });
            if (e.weight == 0.0) {
              if (it != config.comm.end()) config.comm.erase(it);
            } else if (it != config.comm.end()) {
              it->weight = e.weight;
            } else {
              config.comm.push_back({e.a, e.b, e.weight});
            }
          },
      },
      event.action);
  validate(config);
}

Vector primary_start(const MicrogridConfig& config, const GainSet& gains, ControlMode mode) {
  return primary_only_equilibrium(config, gains).with_mode(mode).stacked();
}

SimulationTrace integrate(MicrogridConfig config, const GainSet& gains, const Vector& X0,
                          std::span<const ScenarioEvent> events,
                          const IntegratorOptions& options) {
  validate(config);
  const double dt = options.dt;
  if (!(dt > 0.0) || !std::isfinite(dt)) throw ConfigError("integrate: dt must be positive");
  if (!(options.t_end > 0.0)) throw ConfigError("integrate: t_end must be positive");
  if (options.record_every < 1) throw ConfigError("integrate: record_every must be >= 1");
  const StateLayout layout{config.n(), config.m(), options.mode};
  if (X0.size() != layout.size()) {
    throw ConfigError("integrate: X0 has dimension " + std::to_string(X0.size()) +
                      ", expected " + std::to_string(layout.size()));
  }
  for (int i = 0; i < config.n(); ++i) {
    if (config.dgus[i].online && !(X0[layout.V() + i] > 0.0)) {
      throw ConfigError("integrate: X0.V must be positive at DGU " + std::to_string(i));
    }
  }

  const long long n_steps = static_cast<long long>(std::ceil(options.t_end / dt - 1e-9));
  std::vector<long long> event_step(events.size());
  for (std::size_t e = 0; e < events.size(); ++e) {
    if (!on_grid(events[e].time, dt, event_step[e]) || event_step[e] < 0) {
      std::ostringstream os;
      os << "event " << e << " at t = " << events[e].time << " s is not on the dt grid";
      throw ConfigError(os.str());
    }
    if (event_step[e] > n_steps) {
      std::ostringstream os;
      os << "event " << e << " at t = " << events[e].time << " s is past t_end";
      throw ConfigError(os.str());
    }
    if (e > 0 && events[e].time < events[e - 1].time) {
      throw ConfigError("events must be sorted by time");
    }
  }

  SimulationTrace trace;
  trace.layout = layout;
  Vector X = X0;
  AssembledSystem sys = assemble(config, gains, options.mode);
  const Index dim = layout.size();
  Vector k1(dim), k2(dim), k3(dim), k4(dim), tmp(dim);

  auto record = [&](double t) {
    const SharingMetrics met = sharing_metrics(config, X);
    trace.time.push_back(t);
    trace.states.push_back(X);
    trace.sharing_dispersion.push_back(met.dispersion);
    trace.balance_error.push_back(met.balance);
  };

  std::size_t next_event = 0;
  for (long long k = 0;; ++k) {
    const double t = static_cast<double>(k) * dt;
    bool fired = false;
    while (next_event < events.size() && event_step[next_event] == k) {
      apply_event(config, gains, X, events[next_event]);
      trace.events.push_back({t, events[next_event].describe()});
      ++next_event;
      fired = true;
    }
    if (fired) {
      sys = assemble(config, gains, options.mode);
      if (k > 0) trace.config_history.emplace_back(t, config);
    }
    if (k == 0) trace.config_history.emplace_back(t, config);
    if (fired || k % options.record_every == 0 || k == n_steps) record(t);
    if (k == n_steps) break;

    int collapsed = -1;
    double collapsed_v = 0.0;
    try {
      vector_field_components(sys, X, k1);
      tmp = X + (0.5 * dt) * k1;
      vector_field_components(sys, tmp, k2);
      tmp = X + (0.5 * dt) * k2;
      vector_field_components(sys, tmp, k3);
      tmp = X + dt * k3;
      vector_field_components(sys, tmp, k4);
      X += (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
      for (int i = 0; i < layout.n; ++i) {
        const double Vi = X[layout.V() + i];
        if (sys.online[i] && !(Vi > options.voltage_floor && std::isfinite(Vi))) {
          collapsed = i;
          collapsed_v = Vi;
          break;
        }
      }
    } catch (const VoltageCollapse& c) {
      collapsed = c.node();
      collapsed_v = c.voltage();
    }
    if (collapsed >= 0) {
      const double t_next = static_cast<double>(k + 1) * dt;
      record(t_next);
      trace.termination = Termination::voltage_collapse;
      trace.collapse = CollapseRecord{collapsed, t_next, collapsed_v};
      break;
    }
  }
  return trace;
}

const MicrogridConfig& SimulationTrace::config_at(double t) const {
  if (config_history.empty()) throw ConfigError("trace has no config history");
  std::size_t k = 0;
  while (k + 1 < config_history.size() && config_history[k + 1].first <= t) ++k;
  return config_history[k].second;
}

std::optional<double> detect_steady_state(const SimulationTrace& trace, double window,
                                          double eps, double t_begin, double t_end) {
  if (!(window > 0.0)) throw ConfigError("detect_steady_state: window must be positive");
  std::size_t first = 0;
  while (first < trace.size() && trace.time[first] < t_begin) ++first;
  std::size_t last = first;
  while (last < trace.size() && trace.time[last] <= t_end) ++last;
  if (last - first < 2) return std::nullopt;

  double scale = 1.0;
  for (std::size_t k = first; k < last; ++k) {
    scale = std::max(scale, trace.states[k].lpNorm<Eigen::Infinity>());
  }
  const double limit = eps * scale;
  double quiet_from = trace.time[first];
  for (std::size_t k = first; k + 1 < last; ++k) {
    const double h = trace.time[k + 1] - trace.time[k];
    const double rate = (trace.states[k + 1] - trace.states[k]).lpNorm<Eigen::Infinity>() / h;
    if (!(rate <= limit)) quiet_from = trace.time[k + 1];
  }
  if (trace.time[last - 1] - quiet_from < window) return std::nullopt;
  return quiet_from + window;
}

}  // namespace dcmg
