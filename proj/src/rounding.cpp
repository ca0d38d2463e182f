#include "codisc/rounding.hpp"

#include <algorithm>
#include <numeric>
#include <string>

#include "codisc/errors.hpp"
#include "codisc/rng.hpp"

namespace codisc {

namespace {

// Indices of the m largest values; equal values keep the lower index.
std::vector<int> top_indices(const std::vector<double>& values, int m) {
  std::vector<int> idx(values.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::partial_sort(idx.begin(), idx.begin() + m, idx.end(), [&](int a, int b) {
    if (values[a] != values[b]) return values[a] > values[b];
    return a < b;
  });
  idx.resize(m);
  return idx;
}

bool mask_allows(const NeighborMask* mask, int n, int i, int j) {
  return !mask || (*mask)[static_cast<std::size_t>(i) * n + j];
}

AscentTrace run(const FractionalAssignment& start, const ScoreSet& scores,
                const RoundingOptions& opts, bool record_trace) {
  const int n = start.n();
  std::vector<int> p(n);
  for (int i = 0; i < n; ++i) p[i] = static_cast<int>(start.x[i].size());

  for (int i = 0; i < n; ++i) {
    if (opts.nu > p[i]) {
      throw DataError("nu=" + std::to_string(opts.nu) + " exceeds the " +
                      std::to_string(p[i]) + " proposals of image " + std::to_string(i));
    }
    int allowed = 0;
    for (int j = 0; j < n; ++j) {
      if (j != i && mask_allows(opts.mask, n, i, j)) ++allowed;
    }
    if (opts.tau > allowed) {
      throw DataError("tau=" + std::to_string(opts.tau) + " exceeds the " +
                      std::to_string(allowed) + " candidate neighbors of image " +
                      std::to_string(i));
    }
  }
  if (scores.n() != n) throw DataError("scores and starting point disagree on n");

  // Working state: fractional at first, binary after the first sweep.
  std::vector<std::vector<double>> x = start.x;
  std::vector<double> e = start.e;
  Rng rng(opts.seed);

  AscentTrace trace;
  std::vector<int> perm(n);
  std::iota(perm.begin(), perm.end(), 0);

  for (int sweep = 0; sweep < opts.max_sweeps; ++sweep) {
    const std::vector<std::vector<double>> prev_x = x;
    const std::vector<double> prev_e = e;

    rng.shuffle(perm);
    for (int pos = 0; pos < n; ++pos) {
      const int i = perm[pos];
      std::vector<double> w(p[i], 0.0);
      for (int j = 0; j < n; ++j) {
        if (j == i) continue;
        const double eij = e[static_cast<std::size_t>(i) * n + j];
        if (eij > 0.0) {
          if (const SparseScoreMatrix* m = scores.find(i, j)) {
            for (const ScoreEntry& en : m->entries()) {
              w[en.row] += eij * en.value * x[j][en.col];
            }
          }
        }
        const double eji = e[static_cast<std::size_t>(j) * n + i];
        if (eji > 0.0) {
          if (const SparseScoreMatrix* m = scores.find(j, i)) {
            for (const ScoreEntry& en : m->entries()) {
              w[en.col] += eji * en.value * x[j][en.row];
            }
          }
        }
      }
      std::fill(x[i].begin(), x[i].end(), 0.0);
      for (int k : top_indices(w, opts.nu)) x[i][k] = 1.0;
    }

    // Link update; depends only on x, so rows are independent.
    for (int i = 0; i < n; ++i) {
      std::vector<double> t(n, -1.0);  // masked/self stay below every real score
      for (int j = 0; j < n; ++j) {
        if (j == i || !mask_allows(opts.mask, n, i, j)) continue;
        double score = 0.0;
        if (const SparseScoreMatrix* m = scores.find(i, j)) {
          for (const ScoreEntry& en : m->entries()) {
            score += x[i][en.row] * en.value * x[j][en.col];
          }
        }
        t[j] = score;
      }
      for (int j = 0; j < n; ++j) e[static_cast<std::size_t>(i) * n + j] = 0.0;
      for (int j : top_indices(t, opts.tau)) e[static_cast<std::size_t>(i) * n + j] = 1.0;
    }

    if (record_trace) {
      Assignment a(p);
      for (int i = 0; i < n; ++i) {
        for (int k = 0; k < p[i]; ++k) a.x[i][k] = x[i][k] != 0.0;
        for (int j = 0; j < n; ++j) a.set_e(i, j, e[static_cast<std::size_t>(i) * n + j] != 0.0);
      }
      trace.objective_per_sweep.push_back(objective_value(a, scores));
    }

    if (x == prev_x && e == prev_e) break;
  }

  Assignment out(p);
  for (int i = 0; i < n; ++i) {
    for (int k = 0; k < p[i]; ++k) out.x[i][k] = x[i][k] != 0.0;
    for (int j = 0; j < n; ++j) out.set_e(i, j, e[static_cast<std::size_t>(i) * n + j] != 0.0);
  }
  trace.final = std::move(out);
  return trace;
}

}  // namespace

Assignment greedy_round(const FractionalAssignment& start, const ScoreSet& scores,
                        const RoundingOptions& opts) {
  return run(start, scores, opts, /*record_trace=*/false).final;
}

AscentTrace ascent_trace(const FractionalAssignment& start, const ScoreSet& scores,
                         const RoundingOptions& opts) {
  return run(start, scores, opts, /*record_trace=*/true);
}

}  // namespace codisc
