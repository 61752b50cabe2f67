// SPDX-License-Identifier: Apache-2.0
#pragma once

// Topology algebra for the electrical and communication graphs.

#include "dcmg/types.hpp"

#include <span>
#include <vector>

namespace dcmg {

/// A directed power line; the direction is only a sign convention for the
/// line current.
struct Edge {
  int source = 0;
  int sink = 0;
};

struct LineParams {
  double resistance = 0.0;  // ohm
  double inductance = 0.0;  // henry
};

struct DguParams {
  double R_t = 0.0;            // filter resistance, ohm
  double L_t = 0.0;            // filter inductance, henry
  double C_t = 0.0;            // filter (and lumped line) capacitance, farad
  double rated_current = 0.0;  // I_t^s, ampere
  double v_ref = 0.0;          // volt
  double v_source = 0.0;       // buck input, only used for duty-cycle reporting
};

struct MicrogridTopology {
  int n_dgus = 0;
  std::vector<Edge> lines;
  Matrix comm_weights;  // symmetric N x N, zero means no link
};

/// Relative singular-value cutoff used for every rank and null-space decision.
inline constexpr double kRankTolerance = 1e-9;

/// B with B(i,l) = +1 if i is the source of line l and -1 if it is the sink.
Matrix incidence_matrix(int n_nodes, std::span<const Edge> lines);
Matrix incidence_matrix(const MicrogridTopology& topology);

/// L_e = B R^-1 B^T.
Matrix electrical_laplacian(const Matrix& incidence, const Vector& line_resistance);

/// Laplacian of a weighted undirected graph. No connectivity requirement.
Matrix laplacian_from_weights(const Matrix& weights);

/// Communication Laplacian; rejects asymmetric or negative weights and a
/// disconnected communication graph.
Matrix comm_laplacian(const Matrix& weights);

/// L_t = [I^s] - (1^T [I^s] 1)^-1 [I^s] 1 1^T [I^s].
Matrix sharing_projector(const Vector& ratings);

bool is_connected(int n_nodes, std::span<const Edge> edges);
bool is_connected(const Matrix& weights);

/// Number of singular values above rtol * sigma_max.
Index numerical_rank(const Matrix& m, double rtol = kRankTolerance);

/// Moore-Penrose inverse of a symmetric matrix via its eigendecomposition,
/// discarding eigenvalues below rtol * |lambda|_max.
Matrix symmetric_pseudo_inverse(const Matrix& m, double rtol = kRankTolerance);

/// Disjoint-set forest with path halving and union by size.
class UnionFind {
 public:
  explicit UnionFind(int n);

  int find(int x);
  bool unite(int a, int b);
  int components() const noexcept { return components_; }

 private:
  std::vector<int> parent_;
  std::vector<int> size_;
  int components_;
};

}  // namespace dcmg
