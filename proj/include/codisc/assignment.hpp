#pragma once

#include <cstdint>
#include <vector>

#include "codisc/sparse_score.hpp"

namespace codisc {

// Candidate-neighbor mask (n x n, row-major). Zero means the ordered link
// (i, j) is excluded from the problem entirely.
using NeighborMask = std::vector<std::uint8_t>;

// Binary region indicators x (one vector per image) and directed link matrix
// e (n x n, zero diagonal).
struct Assignment {
  std::vector<std::vector<std::uint8_t>> x;
  std::vector<std::uint8_t> e;

  Assignment() = default;
  explicit Assignment(const std::vector<int>& proposals_per_image);

  int n() const { return static_cast<int>(x.size()); }
  std::uint8_t e_at(int i, int j) const { return e[static_cast<std::size_t>(i) * n() + j]; }
  void set_e(int i, int j, std::uint8_t v) { e[static_cast<std::size_t>(i) * n() + j] = v; }

  int x_row_sum(int i) const;
  int e_row_sum(int i) const;
};

// Same shape with values in [0, 1]; produced by the primal running average.
struct FractionalAssignment {
  std::vector<std::vector<double>> x;
  std::vector<double> e;

  FractionalAssignment() = default;
  explicit FractionalAssignment(const std::vector<int>& proposals_per_image);
  static FractionalAssignment all_ones(const std::vector<int>& proposals_per_image);

  int n() const { return static_cast<int>(x.size()); }
  double e_at(int i, int j) const { return e[static_cast<std::size_t>(i) * n() + j]; }
  void set_e(int i, int j, double v) { e[static_cast<std::size_t>(i) * n() + j] = v; }
};

FractionalAssignment to_fractional(const Assignment& a);

// Discrete objective of the joint matching problem:
//   sum over i != j of e_ij * x_i^T S_ij x_j,
// summing stored sparse entries only. Throws on shape mismatch.
double objective_value(const Assignment& a, const ScoreSet& scores);

// Tight concave extension: sum of S_ij^kl * min(e_ij, x_i^k, x_j^l) over
// stored entries. Coincides with objective_value at binary points.
double relaxed_objective_value(const FractionalAssignment& f, const ScoreSet& scores);

}  // namespace codisc
