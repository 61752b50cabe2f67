// SPDX-License-Identifier: Apache-2.0
#pragma once

// Seeded random microgrids for property tests.

#include "dcmg/microgrid.hpp"

#include <random>

namespace dcmg::testing {

using Rng = std::mt19937_64;

double uniform(Rng& rng, double lo, double hi);

struct RandomGridOptions {
  int n = 4;
  double extra_edge_probability = 0.3;
  double max_power = 150.0;      // P* drawn from [0, max_power]
  bool zip = true;               // r = 0 everywhere
  double comm_weight_lo = 60.0;
  double comm_weight_hi = 100.0;
};

/// Connected electrical and communication graphs (random spanning tree plus
/// extra edges), toolkit-range filter and line parameters, ZIP or ZIE loads.
MicrogridConfig random_grid(Rng& rng, const RandomGridOptions& opts = {});

/// Random connected simple graph as an edge list.
std::vector<Edge> random_connected_edges(Rng& rng, int n, double extra_edge_probability);

ZieLoad random_load(Rng& rng, bool zip);

}  // namespace dcmg::testing
