#include "codisc/standout.hpp"

#include <algorithm>
#include <string>

#include "codisc/errors.hpp"

namespace codisc {

void StandoutConfig::validate() const {
  if (!(rho > 0.0 && rho <= 1.0)) throw DataError("standout rho must be in (0,1]");
  if (!(delta > 0.0 && delta <= 1.0)) throw DataError("standout delta must be in (0,1]");
  if (!(gamma >= 1.0)) throw DataError("standout gamma must be >= 1");
  if (q < 0) throw DataError("standout q must be >= 0");
  if (top_k < 1) throw DataError("standout top_k must be >= 1");
}

ContainmentIndex build_containment(const ImageRecord& image, const StandoutConfig& cfg) {
  const int p = image.num_proposals();
  ContainmentIndex ci;
  ci.parts.resize(p);
  ci.background.resize(p);
  for (int k = 0; k < p; ++k) {
    const Rect& rk = image.proposals[k];
    const double area_k = rect_area(rk);
    for (int l = 0; l < p; ++l) {
      const Rect& rl = image.proposals[l];
      const double inter = rect_intersection_area(rk, rl);
      if (inter > cfg.rho * rect_area(rl)) ci.parts[k].push_back(l);
      if (inter > cfg.delta * area_k && rect_area(rl) > cfg.gamma * area_k) {
        ci.background[k].push_back(l);
      }
    }
  }
  return ci;
}

namespace {

double background_max(const DenseMatrix& s, const std::vector<std::int32_t>& bi,
                      const std::vector<std::int32_t>& bj) {
  if (bi.empty() || bj.empty()) return 0.0;
  double v = 0.0;
  for (std::int32_t kp : bi) {
    for (std::int32_t lp : bj) {
      v = std::max(v, s.at(kp, lp));
    }
  }
  return v;
}

void check_shapes(const DenseMatrix& s, const ContainmentIndex& ci,
                  const ContainmentIndex& cj) {
  if (static_cast<int>(ci.parts.size()) != s.rows ||
      static_cast<int>(cj.parts.size()) != s.cols) {
    throw DataError("standout: containment index shape does not match similarity matrix");
  }
}

}  // namespace

DenseMatrix standout_exact(const DenseMatrix& s, const ContainmentIndex& ci,
                           const ContainmentIndex& cj) {
  check_shapes(s, ci, cj);
  DenseMatrix out(s.rows, s.cols);
  for (int k = 0; k < s.rows; ++k) {
    for (int l = 0; l < s.cols; ++l) {
      const double v = background_max(s, ci.background[k], cj.background[l]);
      out.at(k, l) = std::max(0.0, s.at(k, l) - v);
    }
  }
  return out;
}

StandoutResult standout_fast(const DenseMatrix& s, const ContainmentIndex& ci,
                             const ContainmentIndex& cj, const StandoutConfig& cfg) {
  check_shapes(s, ci, cj);
  const int rows = s.rows, cols = s.cols;

  // Top-q positive matches; ties toward lexicographically smaller (k, l).
  std::vector<std::int32_t> order;
  order.reserve(static_cast<std::size_t>(rows) * cols);
  for (std::int32_t idx = 0; idx < rows * cols; ++idx) {
    if (s.data[idx] > 0.0) order.push_back(idx);
  }
  const std::size_t q = std::min<std::size_t>(cfg.q, order.size());
  std::partial_sort(order.begin(), order.begin() + q, order.end(),
                    [&](std::int32_t a, std::int32_t b) {
                      if (s.data[a] != s.data[b]) return s.data[a] > s.data[b];
                      return a < b;
                    });
  order.resize(q);
  // Increasing score so stronger matches overwrite weaker ones.
  std::reverse(order.begin(), order.end());

  DenseMatrix v(rows, cols);
  for (std::int32_t idx : order) {
    const int kp = idx / cols;
    const int lp = idx % cols;
    const double score = s.data[idx];
    for (std::int32_t k : ci.parts[kp]) {
      for (std::int32_t l : cj.parts[lp]) {
        // A region is a part of itself, so a match must never stamp its own
        // v (that would zero every queued stand-out score).
        if (k == kp && l == lp) continue;
        v.at(k, l) = score;
      }
    }
  }

  std::size_t positive = 0, fallback = 0;
  DenseMatrix out(rows, cols);
  for (int k = 0; k < rows; ++k) {
    for (int l = 0; l < cols; ++l) {
      const double sk = s.at(k, l);
      if (sk <= 0.0) continue;
      ++positive;
      double vk = v.at(k, l);
      if (vk == 0.0) {
        vk = background_max(s, ci.background[k], cj.background[l]);
        ++fallback;
      }
      out.at(k, l) = std::max(0.0, sk - vk);
    }
  }

  StandoutResult result;
  result.scores = std::move(out);
  result.fallback_fraction = positive == 0 ? 0.0 : static_cast<double>(fallback) / positive;
  return result;
}

SparseScoreMatrix sparsify_topk(const DenseMatrix& scores, int top_k) {
  if (top_k < 1) throw DataError("sparsify_topk: top_k must be >= 1");
  std::vector<std::int32_t> order;
  for (std::int32_t idx = 0; idx < scores.rows * scores.cols; ++idx) {
    if (scores.data[idx] > 0.0) order.push_back(idx);
  }
  const std::size_t keep = std::min<std::size_t>(top_k, order.size());
  std::partial_sort(order.begin(), order.begin() + keep, order.end(),
                    [&](std::int32_t a, std::int32_t b) {
                      if (scores.data[a] != scores.data[b]) return scores.data[a] > scores.data[b];
                      return a < b;
                    });
  order.resize(keep);

  std::vector<ScoreEntry> entries;
  entries.reserve(keep);
  for (std::int32_t idx : order) {
    entries.push_back({idx / scores.cols, idx % scores.cols, scores.data[idx]});
  }
  return SparseScoreMatrix::from_entries(scores.rows, scores.cols, std::move(entries));
}

}  // namespace codisc
