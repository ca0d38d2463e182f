#include "codisc/pipeline.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <numeric>

#include "codisc/errors.hpp"
#include "codisc/io.hpp"
#include "codisc/parallel.hpp"
#include "codisc/pbf.hpp"
#include "codisc/rng.hpp"
#include "codisc/rounding.hpp"

namespace codisc {

void PipelineConfig::validate() const {
  if (nu < 1) throw DataError("nu must be >= 1");
  if (tau < 1) throw DataError("tau must be >= 1");
  if (ensemble_runs < 1) throw DataError("ensemble-runs must be >= 1");
  if (!(alpha > 0.0) || !(beta > 0.0)) throw DataError("step sizes must be positive");
  if (iters < 1) throw DataError("iteration count must be >= 1");
  if (max_sweeps < 1) throw DataError("max-sweeps must be >= 1");
  if (top_m < 1) throw DataError("top-m must be >= 1");
  if (prefilter_k < 0) throw DataError("prefilter-k must be >= 0");
  if (setting != "mixed" && setting != "separate") {
    throw DataError("setting must be 'mixed' or 'separate'");
  }
  standout.validate();
  if (hough.tx_bins < 1 || hough.ty_bins < 1 || hough.sx_bins < 1 || hough.sy_bins < 1) {
    throw DataError("hough bin counts must be >= 1");
  }
}

ScoreSet compute_scores(const Dataset& dataset, const PipelineConfig& cfg,
                        const NeighborMask* mask, double* fallback_fraction_out) {
  const int n = dataset.n();
  if (!dataset.all_have_features()) {
    throw DataError("discovery needs features on every image");
  }

  const bool cache = !cfg.score_cache_dir.empty();
  if (cache) check_score_cache_meta(cfg.score_cache_dir, score_config_json(cfg));

  std::vector<ContainmentIndex> containment(n);
  parallel_for(n, cfg.workers, [&](std::size_t i) {
    containment[i] = build_containment(dataset.images[i], cfg.standout);
  });

  std::vector<std::pair<int, int>> pairs;
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      if (i == j) continue;
      if (mask && !(*mask)[static_cast<std::size_t>(i) * n + j]) continue;
      pairs.emplace_back(i, j);
    }
  }

  std::vector<SparseScoreMatrix> results(pairs.size());
  std::vector<double> fallback(pairs.size(), 0.0);
  parallel_for(pairs.size(), cfg.workers, [&](std::size_t t) {
    const auto [i, j] = pairs[t];
    const ImageRecord& a = dataset.images[i];
    const ImageRecord& b = dataset.images[j];
    if (cache) {
      if (auto m = read_score_cache_entry(cfg.score_cache_dir, a.id, b.id)) {
        results[t] = std::move(*m);
        return;
      }
    }
    const DenseMatrix sim = similarity_matrix(a, b, cfg.hough, cfg.normalize_similarity);
    DenseMatrix so;
    if (cfg.exact_standout) {
      so = standout_exact(sim, containment[i], containment[j]);
    } else {
      StandoutResult r = standout_fast(sim, containment[i], containment[j], cfg.standout);
      so = std::move(r.scores);
      fallback[t] = r.fallback_fraction;
    }
    results[t] = sparsify_topk(so, cfg.standout.top_k);
    if (cache) write_score_cache_entry(cfg.score_cache_dir, a.id, b.id, results[t]);
  });

  ScoreSet scores(n);
  for (std::size_t t = 0; t < pairs.size(); ++t) {
    scores.set(pairs[t].first, pairs[t].second, std::move(results[t]));
  }
  if (fallback_fraction_out) {
    *fallback_fraction_out =
        pairs.empty() ? 0.0
                      : std::accumulate(fallback.begin(), fallback.end(), 0.0) / pairs.size();
  }
  return scores;
}

namespace {

// One full solve over a (sub)dataset that is already a closed problem
// (whole set in the mixed setting, one class in the separate setting).
DiscoveryResult discover_single(const Dataset& dataset, const PipelineConfig& cfg,
                                const std::string& class_label, std::uint64_t seed,
                                bool allow_graph_dump) {
  const int n = dataset.n();
  if (n < 2) {
    throw DataError(class_label.empty()
                        ? "discovery needs at least 2 images"
                        : "separate setting: class '" + class_label +
                              "' has fewer than 2 images");
  }
  const std::vector<int> p = dataset.proposal_counts();
  if (cfg.nu > dataset.min_proposals()) {
    throw DataError("nu=" + std::to_string(cfg.nu) + " is infeasible: an image has only " +
                    std::to_string(dataset.min_proposals()) + " proposals");
  }
  const int max_links = cfg.prefilter_k > 0 ? std::min(cfg.prefilter_k, n - 1) : n - 1;
  if (cfg.tau > max_links) {
    throw DataError("tau=" + std::to_string(cfg.tau) + " is infeasible: images have " +
                    std::to_string(max_links) + " candidate neighbors");
  }

  DiscoveryResult result;
  result.image_ids.reserve(n);
  for (const ImageRecord& im : dataset.images) result.image_ids.push_back(im.id);

  std::optional<NeighborMask> mask;
  if (cfg.prefilter_k > 0) mask = prefilter_neighbors(dataset, cfg.prefilter_k);

  result.scores =
      compute_scores(dataset, cfg, mask ? &*mask : nullptr, &result.fallback_fraction);

  // Starting point for the greedy sweeps: all ones, or the primal average of
  // the dual descent when continuous optimization is enabled.
  FractionalAssignment start = FractionalAssignment::all_ones(p);
  if (mask) {
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j) {
        if (i != j && !(*mask)[static_cast<std::size_t>(i) * n + j]) start.set_e(i, j, 0.0);
      }
    }
  }

  DualConfig dual_cfg;
  dual_cfg.nu = cfg.nu;
  dual_cfg.tau = cfg.tau;
  dual_cfg.alpha = cfg.alpha;
  dual_cfg.beta = cfg.beta;
  dual_cfg.iters = cfg.iters;

  if (cfg.continuous_opt) {
    ScoreSet normalized = result.scores;
    const double norm = normalized.normalize();
    const VariableLayout layout(p, mask ? &*mask : nullptr);

    if (allow_graph_dump && !cfg.dump_conflict_graph.empty()) {
      const std::vector<double> zeros(n, 0.0);
      const CubicPBF f = build_lagrangian(normalized, layout, zeros, zeros, dual_cfg);
      std::ofstream out(cfg.dump_conflict_graph);
      if (!out) throw DataError("cannot write " + cfg.dump_conflict_graph);
      out << conflict_graph_dot(f);
    }

    const DualResult dual = run_dual(normalized, layout, dual_cfg, seed);
    start = dual.average;

    DualLog log;
    log.class_label = class_label;
    log.normalization = norm;
    log.bound_normalized = dual.dual_bound;
    log.bound_raw = dual.dual_bound * norm;
    log.iterations = dual.iterations;
    log.history = dual.history;
    result.duals.push_back(std::move(log));
  }

  RoundingOptions ropts;
  ropts.nu = cfg.nu;
  ropts.tau = cfg.tau;
  ropts.max_sweeps = cfg.max_sweeps;
  ropts.mask = mask ? &*mask : nullptr;

  result.runs.resize(cfg.ensemble_runs);
  parallel_for(cfg.ensemble_runs, cfg.workers, [&](std::size_t l) {
    RoundingOptions opts = ropts;
    opts.seed = derive_seed(seed, l);
    Assignment a = greedy_round(start, result.scores, opts);
    const double objective = objective_value(a, result.scores);
    result.runs[l] = RunRecord{std::move(a), objective};
  });

  if (cfg.continuous_opt) {
    double best_primal = 0.0;
    for (const RunRecord& r : result.runs) best_primal = std::max(best_primal, r.objective);
    DualLog& log = result.duals.back();
    log.gap = log.bound_normalized > 0.0
                  ? duality_gap(log.bound_normalized, best_primal / log.normalization)
                  : 0.0;
    result.duality_gap = log.gap;
  }

  std::vector<Assignment> assignments;
  assignments.reserve(result.runs.size());
  for (const RunRecord& r : result.runs) assignments.push_back(r.assignment);
  const PooledSolution pooled = cfg.pooling == Pooling::kMax ? max_pool(assignments)
                                                             : average_pool(assignments);
  const auto u = region_scores(pooled, result.scores, cfg.tau);
  result.final = select_final(pooled, u, result.scores, cfg.tau, cfg.top_m,
                              mask ? &*mask : nullptr);
  result.mask = std::move(mask);
  return result;
}

}  // namespace

DiscoveryResult discover(const Dataset& dataset, const PipelineConfig& cfg) {
  cfg.validate();
  if (dataset.n() < 2) throw DataError("discovery needs at least 2 images");

  if (cfg.setting == "mixed") {
    return discover_single(dataset, cfg, "", cfg.seed, true);
  }

  // Separate setting: one independent problem per class label, results
  // merged back into dataset order with no cross-class links.
  std::map<std::string, std::vector<int>> classes;
  for (int i = 0; i < dataset.n(); ++i) {
    classes[dataset.images[i].class_label].push_back(i);
  }

  const int n = dataset.n();
  DiscoveryResult merged;
  merged.image_ids.reserve(n);
  for (const ImageRecord& im : dataset.images) merged.image_ids.push_back(im.id);
  merged.scores = ScoreSet(n);
  merged.mask = NeighborMask(static_cast<std::size_t>(n) * n, 0);
  merged.runs.resize(cfg.ensemble_runs);
  for (RunRecord& r : merged.runs) r.assignment = Assignment(dataset.proposal_counts());
  merged.final.proposals.resize(n);
  merged.final.e.assign(static_cast<std::size_t>(n) * n, 0);
  merged.duality_gap = cfg.continuous_opt ? 0.0 : -1.0;

  std::size_t class_index = 0;
  double fallback_sum = 0.0;
  for (const auto& [label, indices] : classes) {
    Dataset sub;
    for (int idx : indices) sub.images.push_back(dataset.images[idx]);
    const DiscoveryResult part = discover_single(
        sub, cfg, label, derive_seed(cfg.seed, class_index), class_index == 0);
    ++class_index;
    fallback_sum += part.fallback_fraction;

    const int m = static_cast<int>(indices.size());
    for (const auto& [si, sj] : part.scores.stored_pairs()) {
      merged.scores.set(indices[si], indices[sj], *part.scores.find(si, sj));
    }
    for (int si = 0; si < m; ++si) {
      const int gi = indices[si];
      if (part.mask) {
        for (int sj = 0; sj < m; ++sj) {
          (*merged.mask)[static_cast<std::size_t>(gi) * n + indices[sj]] =
              (*part.mask)[static_cast<std::size_t>(si) * m + sj];
        }
      } else {
        for (int sj = 0; sj < m; ++sj) {
          if (si != sj) (*merged.mask)[static_cast<std::size_t>(gi) * n + indices[sj]] = 1;
        }
      }
      for (int l = 0; l < cfg.ensemble_runs; ++l) {
        merged.runs[l].assignment.x[gi] = part.runs[l].assignment.x[si];
        for (int sj = 0; sj < m; ++sj) {
          merged.runs[l].assignment.set_e(gi, indices[sj],
                                          part.runs[l].assignment.e_at(si, sj));
        }
      }
      merged.final.proposals[gi] = part.final.proposals[si];
      for (int sj = 0; sj < m; ++sj) {
        merged.final.e[static_cast<std::size_t>(gi) * n + indices[sj]] =
            part.final.e[static_cast<std::size_t>(si) * m + sj];
      }
    }
    for (int l = 0; l < cfg.ensemble_runs; ++l) {
      merged.runs[l].objective += part.runs[l].objective;
    }
    for (const DualLog& log : part.duals) {
      merged.duals.push_back(log);
      merged.duality_gap = std::max(merged.duality_gap, log.gap);
    }
  }
  merged.fallback_fraction = classes.empty() ? 0.0 : fallback_sum / classes.size();
  return merged;
}

}  // namespace codisc
