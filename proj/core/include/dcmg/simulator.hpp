// SPDX-License-Identifier: Apache-2.0
#pragma once

// Fixed-step RK4 integration of the closed loop with a scripted timeline.

#include "dcmg/dynamics.hpp"

#include <optional>
#include <span>
#include <string>
#include <utility>
#include <variant>
#include <vector>

namespace dcmg {

struct CloseLine {
  int line = 0;
};
struct OpenLine {
  int line = 0;
};
struct SetLoad {
  int node = 0;
  ZieLoad load;
};
/// Brings a DGU into the network: closes `lines` and starts its consensus
/// controller from zero. An offline DGU is first placed at its isolated
/// primary-only equilibrium.
struct PlugInDgu {
  int node = 0;
  std::vector<int> lines;
};
/// Opens every closed line at `node` and stops its consensus controller; the
/// unit keeps running as an island.
struct UnplugDgu {
  int node = 0;
};
struct EnableSecondary {
  int node = 0;
};
struct DisableSecondary {
  int node = 0;
};
/// Sets the link weight between two DGUs; zero removes the link.
struct SetCommLink {
  int a = 0;
  int b = 0;
  double weight = 0.0;
};

using EventAction = std::variant<CloseLine, OpenLine, SetLoad, PlugInDgu, UnplugDgu,
                                 EnableSecondary, DisableSecondary, SetCommLink>;

enum class EventKind {
  close_line,
  open_line,
  set_load,
  plug_in_dgu,
  unplug_dgu,
  enable_secondary,
  disable_secondary,
  set_comm_link
};

const char* to_string(EventKind kind);

struct ScenarioEvent {
  double time = 0.0;
  EventAction action;

  EventKind kind() const noexcept { return static_cast<EventKind>(action.index()); }
  std::string describe() const;
};

struct IntegratorOptions {
  double dt = 1e-5;
  double t_end = 1.0;
  int record_every = 1;        // keep every k-th grid point
  double voltage_floor = 0.0;  // collapse when an online V_i <= floor
  ControlMode mode = ControlMode::secondary;
};

enum class Termination { completed, voltage_collapse };

struct CollapseRecord {
  int node = -1;
  double time = 0.0;
  double voltage = 0.0;  // first offending value; may be NaN
};

struct EventMarker {
  double time = 0.0;
  std::string description;
};

struct SimulationTrace {
  StateLayout layout;
  std::vector<double> time;
  std::vector<Vector> states;
  std::vector<double> sharing_dispersion;
  std::vector<double> balance_error;
  std::vector<EventMarker> events;
  Termination termination = Termination::completed;
  std::optional<CollapseRecord> collapse;
  // Config in effect from each time on; the first entry is at t = 0.
  std::vector<std::pair<double, MicrogridConfig>> config_history;

  std::size_t size() const noexcept { return time.size(); }
  SystemState state(std::size_t k) const { return SystemState::unstack(states[k], layout); }
  const MicrogridConfig& config_at(double t) const;
  const MicrogridConfig& final_config() const { return config_history.back().second; }
};

/// max_{i,j} |I_ti/I^s_i - I_tj/I^s_j| and |sum_i I^s_i (V_i - V_ref,i)| over
/// online, secondary-enabled DGUs (zero when that set is empty).
struct SharingMetrics {
  double dispersion = 0.0;
  double balance = 0.0;
  double mean_ratio = 0.0;
};
SharingMetrics sharing_metrics(const MicrogridConfig& config, const Vector& X);

/// Grid-aligned RK4. Events fire before the step starting at their time; all
/// events sharing a time are applied before the system is reassembled, and
/// the sample at that time is recorded afterwards. The state keeps a fixed
/// layout: offline DGUs and open lines are frozen rather than removed.
SimulationTrace integrate(MicrogridConfig config, const GainSet& gains, const Vector& X0,
                          std::span<const ScenarioEvent> events,
                          const IntegratorOptions& options);

/// Applies a single event to a config/state pair. Exposed for tests.
void apply_event(MicrogridConfig& config, const GainSet& gains, Vector& X,
                 const ScenarioEvent& event);

/// Earliest time T such that the finite-difference derivative of the
/// recorded state stays below eps * scale from T - window to the end of the
/// inspected range, where scale = max(1, max |X|). Returns T itself, i.e. the
/// end of the first quiet window.
std::optional<double> detect_steady_state(const SimulationTrace& trace, double window,
                                          double eps, double t_begin = -1e300,
                                          double t_end = 1e300);

/// Primary-only equilibrium of the current topology, stacked in the given
/// layout with Omega = 0. With every line open this is each DGU feeding its
/// own load at V_ref.
Vector primary_start(const MicrogridConfig& config, const GainSet& gains,
                     ControlMode mode = ControlMode::secondary);

}  // namespace dcmg
