// SPDX-License-Identifier: Apache-2.0
#pragma once

// Static description of an islanded DC microgrid.

#include "dcmg/control.hpp"
#include "dcmg/loads.hpp"
#include "dcmg/network.hpp"

#include <optional>
#include <vector>

namespace dcmg {

struct DguUnit {
  DguParams params;
  ZieLoad load;
  std::optional<PrimaryGains> gains;  // synthesized when absent
  bool secondary = true;              // consensus layer active
  bool online = true;                 // offline units are frozen until plugged in
};

struct LineUnit {
  Edge ends;
  LineParams params;
  bool closed = true;
};

struct CommLink {
  int a = 0;
  int b = 0;
  double weight = 0.0;
};

/// Node and line indices are fixed at construction; topology events flip
/// the `closed`, `secondary` and `online` flags instead of renumbering.
struct MicrogridConfig {
  std::vector<DguUnit> dgus;
  std::vector<LineUnit> lines;
  std::vector<CommLink> comm;

  int n() const noexcept { return static_cast<int>(dgus.size()); }
  int m() const noexcept { return static_cast<int>(lines.size()); }

  Vector ratings() const;
  Vector v_ref() const;
  Vector capacitances() const;
  Vector conductances() const;         // Y_L
  Vector constant_currents() const;    // I_L bar
  Vector powers() const;               // P*_L
  Vector exponents() const;            // r
  Vector line_resistances() const;
  Vector line_inductances() const;
  std::vector<DguParams> dgu_params() const;
  std::vector<Edge> closed_edges() const;

  /// Incidence over all lines; columns of open lines are zero.
  Matrix incidence() const;
  Matrix electrical_laplacian() const;

  /// Symmetric weight matrix of all configured links.
  Matrix comm_weights() const;
  /// Links restricted to online, secondary-enabled endpoints.
  Matrix effective_comm_weights() const;
  Matrix effective_comm_laplacian() const;

  MicrogridTopology topology() const;

  bool all_zip() const;
};

/// Structural checks: positive parameters, valid indices, no self-loops,
/// symmetric non-negative links. Throws ConfigError.
void validate(const MicrogridConfig& config);

/// Additional requirements for steady-state and stability analysis: every
/// DGU online with secondary control, every line closed, electrical and
/// communication graphs connected.
void require_analysis_ready(const MicrogridConfig& config);

/// Configured gains, with missing entries synthesized at the given margin.
GainSet resolve_gains(const MicrogridConfig& config, double margin = 0.5);

}  // namespace dcmg
