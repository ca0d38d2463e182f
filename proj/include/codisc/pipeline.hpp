#pragma once

#include <optional>
#include <string>
#include <vector>

#include "codisc/assignment.hpp"
#include "codisc/dataset.hpp"
#include "codisc/dual.hpp"
#include "codisc/ensemble.hpp"
#include "codisc/eval.hpp"
#include "codisc/hough.hpp"
#include "codisc/standout.hpp"

namespace codisc {

enum class Pooling { kMax, kAverage };

struct PipelineConfig {
  int nu = 5;
  int tau = 10;
  bool normalize_similarity = true;
  bool continuous_opt = true;
  int ensemble_runs = 5;
  std::uint64_t seed = 0;
  int prefilter_k = 0;  // 0 disables the global-descriptor prefilter
  bool exact_standout = false;
  int max_sweeps = 50;
  double alpha = 0.01;
  double beta = 0.01;
  int iters = 200;
  int top_m = 1;
  Pooling pooling = Pooling::kMax;
  int workers = 0;                 // 0 = hardware concurrency
  std::string setting = "mixed";   // or "separate": one run per class label
  HoughSpace hough;
  StandoutConfig standout;         // includes the per-pair top_k budget
  std::string score_cache_dir;     // empty disables the on-disk cache
  std::string dump_conflict_graph; // debug DOT of the first Lagrangian

  void validate() const;
};

// Dual log of one solved optimization problem (the whole dataset in the
// mixed setting, one class in the separate setting).
struct DualLog {
  std::string class_label;           // empty in the mixed setting
  double normalization = 1.0;        // score divisor used inside the dual
  double bound_normalized = 0.0;
  double bound_raw = 0.0;
  double gap = 0.0;
  int iterations = 0;
  std::vector<DualTracePoint> history;
};

struct RunRecord {
  Assignment assignment;
  double objective = 0.0;  // raw (un-normalized) score units
};

struct DiscoveryResult {
  std::vector<std::string> image_ids;
  ScoreSet scores;  // raw stand-out scores actually used (within-class only
                    // in the separate setting, prefiltered pairs absent)
  std::optional<NeighborMask> mask;
  std::vector<RunRecord> runs;
  FinalSelection final;
  std::vector<DualLog> duals;   // empty when continuous_opt is off
  double duality_gap = -1.0;    // max over duals; -1 when disabled
  double fallback_fraction = 0.0;  // mean over computed pairs
};

// Raw stand-out scores for every ordered pair allowed by the mask, computed
// on a worker pool (similarity -> stand-out -> top-k sparsification).
// fallback_fraction_out, when given, receives the mean fast-path fallback
// share. The cache directory, when set, is checked before computing and
// filled afterwards.
ScoreSet compute_scores(const Dataset& dataset, const PipelineConfig& cfg,
                        const NeighborMask* mask, double* fallback_fraction_out);

// Full discovery pipeline: (optional prefilter) -> pairwise scores ->
// (optional dual loop) -> L greedy-ascent runs -> ensemble pooling -> final
// region and link selection.
DiscoveryResult discover(const Dataset& dataset, const PipelineConfig& cfg);

}  // namespace codisc
