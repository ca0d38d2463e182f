#include "codisc/ensemble.hpp"

#include <algorithm>
#include <numeric>
#include <string>

#include "codisc/errors.hpp"

namespace codisc {

namespace {

void check_solutions(std::span<const Assignment> solutions) {
  if (solutions.empty()) throw DataError("pooling needs at least one solution");
  const Assignment& first = solutions.front();
  for (const Assignment& a : solutions) {
    if (a.n() != first.n()) throw DataError("pooled solutions disagree on n");
    for (int i = 0; i < a.n(); ++i) {
      if (a.x[i].size() != first.x[i].size()) {
        throw DataError("pooled solutions disagree on proposal counts");
      }
    }
  }
}

PooledSolution pool(std::span<const Assignment> solutions, std::size_t threshold) {
  check_solutions(solutions);
  const Assignment& first = solutions.front();
  PooledSolution p;
  p.x.reserve(first.x.size());
  for (const auto& xi : first.x) p.x.emplace_back(xi.size(), 0);
  p.e.assign(first.e.size(), 0);

  for (int i = 0; i < first.n(); ++i) {
    for (std::size_t k = 0; k < first.x[i].size(); ++k) {
      std::size_t votes = 0;
      for (const Assignment& a : solutions) votes += a.x[i][k];
      p.x[i][k] = votes >= threshold;
    }
  }
  for (std::size_t idx = 0; idx < first.e.size(); ++idx) {
    std::size_t votes = 0;
    for (const Assignment& a : solutions) votes += a.e[idx];
    p.e[idx] = votes >= threshold;
  }
  return p;
}

}  // namespace

PooledSolution max_pool(std::span<const Assignment> solutions) {
  return pool(solutions, 1);
}

PooledSolution average_pool(std::span<const Assignment> solutions) {
  if (solutions.empty()) throw DataError("pooling needs at least one solution");
  return pool(solutions, (solutions.size() + 1) / 2);
}

std::vector<std::vector<double>> region_scores(const PooledSolution& pooled,
                                               const ScoreSet& scores, int tau) {
  if (tau < 1) throw DataError("region_scores: tau must be >= 1");
  const int n = pooled.n();
  std::vector<std::vector<double>> u;
  u.reserve(n);
  for (const auto& xi : pooled.x) u.emplace_back(xi.size(), 0.0);

  for (int i = 0; i < n; ++i) {
    const int p = static_cast<int>(pooled.x[i].size());
    for (int k = 0; k < p; ++k) {
      if (!pooled.x[i][k]) continue;
      // Best retained match per pooled neighbor, then the tau strongest.
      std::vector<double> best;
      for (int j = 0; j < n; ++j) {
        if (j == i || !pooled.e_at(i, j)) continue;
        double b = 0.0;
        if (const SparseScoreMatrix* m = scores.find(i, j)) {
          for (const ScoreEntry& en : m->entries()) {
            if (en.row == k && pooled.x[j][en.col]) b = std::max(b, en.value);
          }
        }
        best.push_back(b);
      }
      std::sort(best.begin(), best.end(), std::greater<>());
      const std::size_t take = std::min<std::size_t>(tau, best.size());
      u[i][k] = std::accumulate(best.begin(), best.begin() + take, 0.0);
    }
  }
  return u;
}

FinalSelection select_final(const PooledSolution& pooled,
                            const std::vector<std::vector<double>>& u,
                            const ScoreSet& scores, int tau, int top_m,
                            const NeighborMask* mask) {
  const int n = pooled.n();
  if (static_cast<int>(u.size()) != n) throw DataError("select_final: score shape mismatch");
  if (top_m < 1) throw DataError("select_final: top_m must be >= 1");

  FinalSelection sel;
  sel.proposals.resize(n);
  sel.e.assign(static_cast<std::size_t>(n) * n, 0);

  for (int i = 0; i < n; ++i) {
    std::vector<std::int32_t> retained;
    for (std::size_t k = 0; k < pooled.x[i].size(); ++k) {
      if (pooled.x[i][k]) retained.push_back(static_cast<std::int32_t>(k));
    }
    if (retained.empty()) {
      // Degenerate pooled input; fall back to the heaviest row of the
      // summed score mass.
      std::vector<double> mass(pooled.x[i].size(), 0.0);
      for (int j = 0; j < n; ++j) {
        if (const SparseScoreMatrix* m = scores.find(i, j)) {
          for (const ScoreEntry& en : m->entries()) mass[en.row] += en.value;
        }
      }
      std::int32_t best = 0;
      for (std::size_t k = 1; k < mass.size(); ++k) {
        if (mass[k] > mass[best]) best = static_cast<std::int32_t>(k);
      }
      sel.proposals[i] = {best};
      continue;
    }
    std::stable_sort(retained.begin(), retained.end(), [&](std::int32_t a, std::int32_t b) {
      if (u[i][a] != u[i][b]) return u[i][a] > u[i][b];
      return a < b;
    });
    retained.resize(std::min<std::size_t>(top_m, retained.size()));
    sel.proposals[i] = std::move(retained);
  }

  // Final links given the selected regions, as in the greedy link update but
  // restricted to strictly positive scores.
  for (int i = 0; i < n; ++i) {
    std::vector<std::pair<double, int>> candidates;
    for (int j = 0; j < n; ++j) {
      if (j == i) continue;
      if (mask && !(*mask)[static_cast<std::size_t>(i) * n + j]) continue;
      double score = 0.0;
      if (const SparseScoreMatrix* m = scores.find(i, j)) {
        for (const ScoreEntry& en : m->entries()) {
          const bool ki = std::find(sel.proposals[i].begin(), sel.proposals[i].end(), en.row) !=
                          sel.proposals[i].end();
          const bool kj = std::find(sel.proposals[j].begin(), sel.proposals[j].end(), en.col) !=
                          sel.proposals[j].end();
          if (ki && kj) score += en.value;
        }
      }
      if (score > 0.0) candidates.emplace_back(score, j);
    }
    std::sort(candidates.begin(), candidates.end(), [](const auto& a, const auto& b) {
      if (a.first != b.first) return a.first > b.first;
      return a.second < b.second;
    });
    const std::size_t take = std::min<std::size_t>(tau, candidates.size());
    for (std::size_t c = 0; c < take; ++c) {
      sel.e[static_cast<std::size_t>(i) * n + candidates[c].second] = 1;
    }
  }
  return sel;
}

}  // namespace codisc
