#pragma once

#include <cstdint>
#include <vector>

#include "codisc/dataset.hpp"
#include "codisc/dense_matrix.hpp"
#include "codisc/sparse_score.hpp"

namespace codisc {

struct StandoutConfig {
  double rho = 0.5;    // part containment ratio
  double delta = 0.8;  // background overlap ratio
  double gamma = 2.0;  // background area ratio
  int q = 10000;       // heuristic queue size
  int top_k = 1000;    // sparsification budget per pair

  void validate() const;
};

// Per-proposal containment sets within one image:
//   parts[k]      = { l : A(r_k inter r_l) > rho * A(r_l) }
//   background[k] = { l : A(r_k inter r_l) > delta * A(r_k) and
//                         A(r_l) > gamma * A(r_k) }
struct ContainmentIndex {
  std::vector<std::vector<std::int32_t>> parts;
  std::vector<std::vector<std::int32_t>> background;
};

ContainmentIndex build_containment(const ImageRecord& image, const StandoutConfig& cfg);

// Exact stand-out scores: S^kl = max(0, s^kl - v^kl) where v^kl is the best
// similarity among matches of the two background sets (0 when either set is
// empty).
DenseMatrix standout_exact(const DenseMatrix& s, const ContainmentIndex& ci,
                           const ContainmentIndex& cj);

struct StandoutResult {
  DenseMatrix scores;
  // Share of positive-similarity entries whose v fell back to the exact
  // background maximum.
  double fallback_fraction = 0.0;
};

// Fast heuristic: the q strongest matches, visited in increasing score
// order, stamp their score onto the part products P_i^k' x P_j^l'; entries
// left untouched fall back to the exact background maximum. Fallback entries
// therefore agree with standout_exact; stamped entries may differ because
// parts and background sets are not exact inverses.
StandoutResult standout_fast(const DenseMatrix& s, const ContainmentIndex& ci,
                             const ContainmentIndex& cj, const StandoutConfig& cfg);

// Keeps the top_k largest positive entries; ties break toward the
// lexicographically smallest (row, col). Zeros are never stored.
SparseScoreMatrix sparsify_topk(const DenseMatrix& scores, int top_k);

}  // namespace codisc
