// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "dcmg/simulator.hpp"

#include <iosfwd>
#include <string>

namespace dcmg {

/// Header: time, V_1..V_N, It_1..It_N, v_1..v_N, I_1..I_M, Omega_1..Omega_N,
/// sharing_dispersion, balance_error. Values use shortest round-trip
/// formatting, so identical traces give identical bytes.
void write_trace_csv(std::ostream& out, const SimulationTrace& trace);
std::string trace_csv_header(const StateLayout& layout);

struct PlotOptions {
  int every = 1;
  bool per_unit = false;  // filter currents divided by their ratings
};

/// Tab-separated plot data: time, V_i, I_ti (or I_ti / I^s_i), and the
/// rating-weighted sums of V and V_ref over the online secondary-enabled DGUs.
void write_plot_tsv(std::ostream& out, const SimulationTrace& trace, const PlotOptions& opts);

/// Shortest decimal representation that parses back to the same double.
std::string format_double(double x);

}  // namespace dcmg
