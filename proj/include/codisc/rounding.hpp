#pragma once

#include <cstdint>
#include <vector>

#include "codisc/assignment.hpp"

namespace codisc {

struct RoundingOptions {
  int nu = 5;
  int tau = 10;
  std::uint64_t seed = 0;
  int max_sweeps = 50;
  // When set, links outside the mask are never created and never scored.
  const NeighborMask* mask = nullptr;
};

// Permutation-sweep greedy ascent. Starting from the fractional point, each
// sweep visits the images in a fresh random order and resets x_i to the
// indicator of the nu largest entries of
//   sum_{j != i} (e_ij S_ij + e_ji S_ji^T) x_j,
// then resets every e_i in parallel to the indicator of the tau largest
// x_i^T S_ij x_j. Sweeps repeat until a full sweep leaves (x, e) unchanged
// or max_sweeps is reached. The first sweep may read fractional x and e;
// afterwards everything is binary and each block update is an exact argmax,
// so the objective never decreases. Ties break toward the lowest index.
Assignment greedy_round(const FractionalAssignment& start, const ScoreSet& scores,
                        const RoundingOptions& opts);

struct AscentTrace {
  Assignment final;
  std::vector<double> objective_per_sweep;
};

// Same run as greedy_round, recording the objective after each sweep.
AscentTrace ascent_trace(const FractionalAssignment& start, const ScoreSet& scores,
                         const RoundingOptions& opts);

}  // namespace codisc
