// SPDX-License-Identifier: Apache-2.0
#pragma once

// Reference microgrids and scripted timelines.
//
// Filter and line parameters are toolkit defaults (R_t = 0.2 ohm,
// L_t = 1.8 mH, C_t = 2.2 mF, lines 50-100 mOhm / 2-3 uH, V_ref in
// [45, 50] V, V_s = 80 V). Loads are sized to satisfy the Z/E load
// condition at nominal voltage.

#include "dcmg/equilibrium.hpp"
#include "dcmg/simulator.hpp"

#include <string>
#include <vector>

namespace dcmg {

/// Six DGUs on the seven-line meshed topology with the six-link
/// communication graph. Lines start open and secondary control off; DGUs
/// 1-5 feed ZIP loads and DGU 6 an exponential load with r = 0.65.
MicrogridConfig six_dgu_config();

/// All seven lines closed, all DGUs secondary-enabled, ZIP loads only.
MicrogridConfig six_dgu_connected_zip_config();

/// N DGUs on a ring with a ring communication graph, ZIP loads.
MicrogridConfig ring_config(int n);

/// Two DGUs, one line, one link; used in docs and golden files.
MicrogridConfig two_node_config();

/// Six-DGU ZIP network with a heavily loaded far node, feasible as given but
/// not once line resistances are scaled up.
MicrogridConfig collapse_config();

/// Line-resistance factor that takes collapse_config past Delta >= 1.
inline constexpr double kCollapseResistanceScale = 40.0;

struct Phase {
  std::string name;
  double start = 0.0;
  double end = 0.0;
};

/// Timeline: connect l1,l2,l4,l5,l6 and enable secondary on DGUs 1-5 at
/// 1.5 s; heavier ZIP loads on DGUs 1 and 4 at 6 s; plug in DGU 6 via l3,l7
/// with exponents r2 = 0.6, r3 = 0.55, r5 = 0.4 at 10 s; r3 = 1.45,
/// r6 = 1.35 at 17 s; unplug DGU 5 at 22 s. Exponential loads keep their
/// nominal power at V_ref when the exponent changes.
std::vector<ScenarioEvent> reference_scenario_events(const MicrogridConfig& config6);
std::vector<Phase> reference_scenario_phases(double t_end = 27.0);

struct PhaseReport {
  Phase phase;
  std::vector<int> sharing_set;  // online, secondary-enabled DGUs at phase end
  std::vector<int> islanded;     // online DGUs with no closed line and no secondary
  std::optional<double> steady_time;
  double end_time = 0.0;  // time of the sample the metrics refer to
  double dispersion = 0.0;
  double relative_dispersion = 0.0;
  double balance = 0.0;
  double balance_tolerance = 0.0;
  double islanded_error = 0.0;  // max |V_i - V_ref,i| over `islanded`
  bool ok = false;
};

struct ScenarioTolerances {
  double sharing = 1e-3;  // relative to the common per-unit current
  double balance = 1e-3;  // relative to 1^T I^s * mean V_ref of the sharing set
  double islanded_voltage = 1e-4;  // volts
  double steady_window = 0.2;
  double steady_eps = 1e-3;
};

struct ReferenceScenarioResult {
  SimulationTrace trace;
  std::vector<PhaseReport> phases;

  bool ok() const;
};

ReferenceScenarioResult run_reference_scenario(const MicrogridConfig& config6, const GainSet& gains,
                                       double dt = 1e-5, double t_end = 27.0,
                                       int record_every = 100,
                                       const ScenarioTolerances& tol = {});

/// Phase checks shared by the six-DGU reference scenario and the CLI.
PhaseReport check_phase(const SimulationTrace& trace, const Phase& phase,
                        const ScenarioTolerances& tol);

struct CollapseResult {
  MicrogridConfig scaled;
  ExistenceCertificate certificate;
  SimulationTrace trace;
};

/// Scales every line resistance, starts all DGUs islanded, closes all lines
/// and enables secondary control at `connect_time`. The step is refined with
/// stable_step; the record stride is scaled with it so samples stay
/// `record_every * dt` apart.
CollapseResult run_collapse_scenario(const MicrogridConfig& config, const GainSet& gains,
                                     double resistance_scale, double dt = 1e-5,
                                     double t_end = 3.0, double connect_time = 0.1,
                                     int record_every = 100);

/// Every line resistance multiplied by `scale`, every line closed and every
/// DGU secondary-enabled.
MicrogridConfig scale_line_resistances(const MicrogridConfig& config, double scale);

/// dt / 2^k for the smallest k with dt / 2^k <= L/R / 2 on every line.
double stable_step(const MicrogridConfig& config, double dt);

/// Events that connect every line and enable every DGU's secondary control.
std::vector<ScenarioEvent> connect_all_events(const MicrogridConfig& config, double time);

}  // namespace dcmg
