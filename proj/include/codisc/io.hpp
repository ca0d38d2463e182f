#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "codisc/dataset.hpp"
#include "codisc/eval.hpp"
#include "codisc/pipeline.hpp"

namespace codisc {

// ---- dataset interchange: JSON Lines, one object per image ----
// {"id": ..., "width": ..., "height": ..., "proposals": [[x,y,w,h],...],
//  "features": [[...],...] | "features_file": "relative/path.f32",
//  "gt": [[x,y,w,h],...], "class": "...", "global": [...]}
// The sidecar is raw little-endian float32, row-major p_i x d.

Dataset load_dataset(const std::filesystem::path& path);
void write_dataset(const Dataset& dataset, const std::filesystem::path& path,
                   bool sidecar_features = false);

// ---- per-pair score cache ----
// One binary file per ordered pair, named by 64-bit hashes of the two image
// ids: header (p_i:u32, p_j:u32, count:u32), then count little-endian
// (k:u32, l:u32, value:f64) triples. cache_meta.json pins the score-relevant
// configuration; a mismatch is an error so stale caches never leak into a
// run with different parameters.

nlohmann::json score_config_json(const PipelineConfig& cfg);
void check_score_cache_meta(const std::filesystem::path& dir, const nlohmann::json& cfg);
std::optional<SparseScoreMatrix> read_score_cache_entry(const std::filesystem::path& dir,
                                                        const std::string& id_i,
                                                        const std::string& id_j);
void write_score_cache_entry(const std::filesystem::path& dir, const std::string& id_i,
                             const std::string& id_j, const SparseScoreMatrix& matrix);

// ---- solution file: one self-describing JSON document ----

struct SolutionDualLog {
  std::string label;
  double normalization = 1.0;
  double bound_normalized = 0.0;
  double bound_raw = 0.0;
  double gap = 0.0;
  int iterations = 0;
};

struct SolutionRun {
  double objective = 0.0;
  std::vector<std::vector<std::int32_t>> x;  // selected proposal indices per image
  std::vector<std::vector<std::int32_t>> e;  // adjacency lists per image
};

struct SolutionFile {
  nlohmann::json config;
  std::vector<std::string> images;
  std::vector<SolutionRun> runs;
  std::vector<std::vector<std::int32_t>> final_proposals;  // ranked, best first
  std::vector<std::vector<std::int32_t>> final_e;          // adjacency lists
  std::vector<SolutionDualLog> duals;
  double duality_gap = -1.0;  // -1 when continuous optimization was off
  std::string trace_file;
};

SolutionFile make_solution(const PipelineConfig& cfg, const DiscoveryResult& result,
                           const std::string& trace_file);
void write_solution(const std::filesystem::path& path, const SolutionFile& solution);
SolutionFile load_solution(const std::filesystem::path& path);

// Per-iteration dual trace as CSV (t, dual_value, max_violation). In the
// separate setting each class gets its own file with the label spliced in
// before the extension; the written paths are returned.
std::vector<std::filesystem::path> write_traces(const std::filesystem::path& path,
                                                const DiscoveryResult& result);

// ---- config plumbing ----

nlohmann::json pipeline_config_to_json(const PipelineConfig& cfg);
PipelineConfig pipeline_config_from_json(const nlohmann::json& j);

SynthSpec synth_spec_from_json(const nlohmann::json& j);
SynthSpec load_synth_spec(const std::filesystem::path& path);

// CorLoc report as CSV rows (label, total, correct, percent) plus summary.
void write_corloc_csv(const std::filesystem::path& path, const CorLocReport& report);

}  // namespace codisc
