#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "codisc/assignment.hpp"

namespace codisc {

// Elementwise pooling of the L independent greedy-ascent solutions. The
// pooled pair may violate the cardinality constraints; that is fine in this
// post-processing stage.
struct PooledSolution {
  std::vector<std::vector<std::uint8_t>> x;
  std::vector<std::uint8_t> e;

  int n() const { return static_cast<int>(x.size()); }
  std::uint8_t e_at(int i, int j) const { return e[static_cast<std::size_t>(i) * n() + j]; }
};

// Logical or across runs.
PooledSolution max_pool(std::span<const Assignment> solutions);

// Majority vote across runs (the average-pooling ablation; less effective
// than max pooling in practice, kept behind a flag).
PooledSolution average_pool(std::span<const Assignment> solutions);

// Ranking score per retained proposal:
//   u_i^k = sum over the tau strongest pooled neighbors j of
//           max_{l : pooled x_j^l = 1} S_ij^kl,
// zero for proposals not retained in the pooled solution. Fewer than tau
// neighbors means all of them count.
std::vector<std::vector<double>> region_scores(const PooledSolution& pooled,
                                               const ScoreSet& scores, int tau);

struct FinalSelection {
  // Per image, the retained proposals ranked by score, top_m entries at most
  // (the first one is the final object region).
  std::vector<std::vector<std::int32_t>> proposals;
  std::vector<std::uint8_t> e;  // n x n; rows hold at most tau links

  int n() const { return static_cast<int>(proposals.size()); }
};

// Picks the best-scoring retained proposal per image (lowest index on ties)
// and rebuilds the link matrix for that choice: row i keeps the tau largest
// positively-scoring x_i^T S_ij x_j. An image with nothing retained falls
// back to the proposal with the largest total score mass.
FinalSelection select_final(const PooledSolution& pooled,
                            const std::vector<std::vector<double>>& u,
                            const ScoreSet& scores, int tau, int top_m = 1,
                            const NeighborMask* mask = nullptr);

}  // namespace codisc
