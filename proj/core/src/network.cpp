// SPDX-License-Identifier: Apache-2.0
#include "dcmg/network.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

#include <cmath>
#include <numeric>
#include <string>

namespace dcmg {

Matrix incidence_matrix(int n_nodes, std::span<const Edge> lines) {
  if (n_nodes <= 0) throw ConfigError("incidence_matrix: need at least one node");
  Matrix B = Matrix::Zero(n_nodes, static_cast<Index>(lines.size()));
  for (std::size_t l = 0; l < lines.size(); ++l) {
    const Edge& e = lines[l];
    if (e.source < 0 || e.source >= n_nodes || e.sink < 0 || e.sink >= n_nodes) {
      throw ConfigError("incidence_matrix: line " + std::to_string(l) +
                        " has an endpoint outside [0, " + std::to_string(n_nodes) + ")");
    }
    if (e.source == e.sink) {
      throw ConfigError("incidence_matrix: line " + std::to_string(l) + " is a self-loop");
    }
    B(e.source, static_cast<Index>(l)) = 1.0;
    B(e.sink, static_cast<Index>(l)) = -1.0;
  }
  return B;
}

Matrix incidence_matrix(const MicrogridTopology& topology) {
  return incidence_matrix(topology.n_dgus, topology.lines);
}

Matrix electrical_laplacian(const Matrix& incidence, const Vector& line_resistance) {
  if (incidence.cols() != line_resistance.size()) {
    throw ConfigError("electrical_laplacian: resistance count does not match line count");
  }
  for (Index l = 0; l < line_resistance.size(); ++l) {
    if (!(line_resistance[l] > 0.0)) {
      throw ConfigError("electrical_laplacian: line " + std::to_string(l) +
                        " has nonpositive resistance");
    }
  }
  return incidence * line_resistance.cwiseInverse().asDiagonal() * incidence.transpose();
}

Matrix laplacian_from_weights(const Matrix& weights) {
  Matrix L = -weights;
  L.diagonal().setZero();
  for (Index i = 0; i < L.rows(); ++i) L(i, i) = -L.row(i).sum();
  return L;
}

Matrix comm_laplacian(const Matrix& weights) {
  if (weights.rows() != weights.cols()) throw ConfigError("comm_laplacian: weights not square");
  const Index n = weights.rows();
  for (Index i = 0; i < n; ++i) {
    for (Index j = 0; j < n; ++j) {
      if (weights(i, j) < 0.0) throw ConfigError("comm_laplacian: negative weight");
      if (weights(i, j) != weights(j, i)) throw ConfigError("comm_laplacian: asymmetric weights");
    }
  }
  if (!is_connected(weights)) throw ConfigError("communication graph disconnected");
  return laplacian_from_weights(weights);
}

Matrix sharing_projector(const Vector& ratings) {
  for (Index i = 0; i < ratings.size(); ++i) {
    if (!(ratings[i] > 0.0)) throw ConfigError("sharing_projector: nonpositive rating");
  }
  Matrix Lt = ratings.asDiagonal();
  Lt.noalias() -= ratings * ratings.transpose() / ratings.sum();
  return Lt;
}

bool is_connected(int n_nodes, std::span<const Edge> edges) {
  if (n_nodes <= 1) return n_nodes == 1;
  UnionFind uf(n_nodes);
  for (const Edge& e : edges) uf.unite(e.source, e.sink);
  return uf.components() == 1;
}

bool is_connected(const Matrix& weights) {
  const int n = static_cast<int>(weights.rows());
  if (n <= 1) return n == 1;
  UnionFind uf(n);
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      if (weights(i, j) > 0.0) uf.unite(i, j);
    }
  }
  return uf.components() == 1;
}

Index numerical_rank(const Matrix& m, double rtol) {
  if (m.size() == 0) return 0;
  Eigen::JacobiSVD<Matrix> svd(m);
  const Vector& s = svd.singularValues();
  if (s.size() == 0 || s[0] == 0.0) return 0;
  Index rank = 0;
  for (Index i = 0; i < s.size(); ++i) {
    if (s[i] > rtol * s[0]) ++rank;
  }
  return rank;
}

Matrix symmetric_pseudo_inverse(const Matrix& m, double rtol) {
  Eigen::SelfAdjointEigenSolver<Matrix> eig(m);
  const Vector& lam = eig.eigenvalues();
  const double cutoff = rtol * lam.cwiseAbs().maxCoeff();
  Vector inv = Vector::Zero(lam.size());
  for (Index i = 0; i < lam.size(); ++i) {
    if (std::abs(lam[i]) > cutoff) inv[i] = 1.0 / lam[i];
  }
  const Matrix& U = eig.eigenvectors();
  return U * inv.asDiagonal() * U.transpose();
}

UnionFind::UnionFind(int n) : parent_(n), size_(n, 1), components_(n) {
  std::iota(parent_.begin(), parent_.end(), 0);
}

int UnionFind::find(int x) {
  while (parent_[x] != x) {
    parent_[x] = parent_[parent_[x]];
    x = parent_[x];
  }
  return x;
}

bool UnionFind::unite(int a, int b) {
  a = find(a);
  b = find(b);
  if (a == b) return false;
  if (size_[a] < size_[b]) std::swap(a, b);
  parent_[b] = a;
  size_[a] += size_[b];
  --components_;
  return true;
}

}  // namespace dcmg
