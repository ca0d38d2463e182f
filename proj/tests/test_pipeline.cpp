#include <doctest.h>

#include <filesystem>
#include <map>

#include "codisc/errors.hpp"
#include "codisc/eval.hpp"
#include "codisc/graph_export.hpp"
#include "codisc/io.hpp"
#include "codisc/pipeline.hpp"

using namespace codisc;

namespace {

// Small but structured instance; the full default scale lives in the
// acceptance suite.
SynthSpec small_spec() {
  SynthSpec spec;
  spec.n = 18;
  spec.classes = 3;
  spec.proposals = 10;
  spec.feature_dim = 16;
  spec.parts = 3;
  return spec;
}

PipelineConfig small_config() {
  PipelineConfig cfg;
  cfg.nu = 2;
  cfg.tau = 3;
  cfg.ensemble_runs = 3;
  cfg.iters = 60;
  cfg.workers = 2;
  return cfg;
}

std::map<std::string, Rect> predictions_of(const Dataset& ds, const DiscoveryResult& r) {
  std::map<std::string, Rect> pred;
  for (int i = 0; i < ds.n(); ++i) {
    pred[ds.images[i].id] = ds.images[i].proposals[r.final.proposals[i].front()];
  }
  return pred;
}

}  // namespace

TEST_CASE("small end-to-end discovery recovers the planted objects") {
  const Dataset ds = generate_synthetic(small_spec(), 11);
  const DiscoveryResult r = discover(ds, small_config());

  REQUIRE(static_cast<int>(r.final.proposals.size()) == 18);
  for (const auto& p : r.final.proposals) CHECK(p.size() == 1);
  for (int i = 0; i < 18; ++i) {
    int row = 0;
    for (int j = 0; j < 18; ++j) row += r.final.e[static_cast<std::size_t>(i) * 18 + j];
    CHECK(row <= 3);
  }
  CHECK(r.duality_gap >= 0.0);
  REQUIRE(r.runs.size() == 3);
  for (const RunRecord& run : r.runs) {
    for (int i = 0; i < 18; ++i) {
      CHECK(run.assignment.x_row_sum(i) == 2);
      CHECK(run.assignment.e_row_sum(i) == 3);
    }
  }

  const CorLocReport report = corloc(predictions_of(ds, r), ds);
  CHECK(report.mixed_percent >= 90.0);
}

TEST_CASE("discovery is deterministic given the seed") {
  const Dataset ds = generate_synthetic(small_spec(), 12);
  PipelineConfig cfg = small_config();
  const DiscoveryResult a = discover(ds, cfg);
  cfg.workers = 1;
  const DiscoveryResult b = discover(ds, cfg);
  CHECK(a.final.proposals == b.final.proposals);
  CHECK(a.final.e == b.final.e);
  for (std::size_t l = 0; l < a.runs.size(); ++l) {
    CHECK(a.runs[l].assignment.x == b.runs[l].assignment.x);
    CHECK(a.runs[l].assignment.e == b.runs[l].assignment.e);
    CHECK(a.runs[l].objective == b.runs[l].objective);
  }
  CHECK(a.duality_gap == b.duality_gap);
}

TEST_CASE("continuous optimization off still yields feasible output") {
  const Dataset ds = generate_synthetic(small_spec(), 13);
  PipelineConfig cfg = small_config();
  cfg.continuous_opt = false;
  const DiscoveryResult r = discover(ds, cfg);
  CHECK(r.duals.empty());
  CHECK(r.duality_gap == -1.0);
  const CorLocReport report = corloc(predictions_of(ds, r), ds);
  CHECK(report.mixed_percent >= 80.0);
}

TEST_CASE("separate setting solves classes independently") {
  const Dataset ds = generate_synthetic(small_spec(), 14);
  PipelineConfig cfg = small_config();
  cfg.setting = "separate";
  const DiscoveryResult r = discover(ds, cfg);
  REQUIRE(r.duals.size() == 3);  // one dual log per class
  for (const DualLog& log : r.duals) CHECK(!log.class_label.empty());

  // No cross-class links anywhere.
  for (const RunRecord& run : r.runs) {
    for (int i = 0; i < 18; ++i) {
      for (int j = 0; j < 18; ++j) {
        if (run.assignment.e_at(i, j)) {
          CHECK(ds.images[i].class_label == ds.images[j].class_label);
        }
      }
    }
  }
  const CorLocReport report = corloc(predictions_of(ds, r), ds);
  CHECK(report.separate_percent >= 90.0);
}

TEST_CASE("prefiltering masks links and stays feasible") {
  const Dataset ds = generate_synthetic(small_spec(), 15);
  PipelineConfig cfg = small_config();
  cfg.prefilter_k = 8;
  const DiscoveryResult r = discover(ds, cfg);
  REQUIRE(r.mask.has_value());
  for (const RunRecord& run : r.runs) {
    for (int i = 0; i < 18; ++i) {
      CHECK(run.assignment.e_row_sum(i) == 3);
      for (int j = 0; j < 18; ++j) {
        if (run.assignment.e_at(i, j)) {
          CHECK((*r.mask)[static_cast<std::size_t>(i) * 18 + j] == 1);
        }
      }
    }
  }

  // tau above the prefilter budget is infeasible.
  cfg.tau = 9;
  CHECK_THROWS_AS(discover(ds, cfg), DataError);
}

TEST_CASE("infeasible limits and missing features are data errors") {
  const Dataset ds = generate_synthetic(small_spec(), 16);
  PipelineConfig cfg = small_config();

  SUBCASE("nu larger than the smallest proposal count") {
    cfg.nu = 11;
    CHECK_THROWS_AS(discover(ds, cfg), DataError);
  }

  SUBCASE("tau larger than n-1") {
    cfg.tau = 18;
    CHECK_THROWS_AS(discover(ds, cfg), DataError);
  }

  SUBCASE("missing features") {
    Dataset stripped = ds;
    stripped.images[3].features.clear();
    CHECK_THROWS_AS(discover(stripped, cfg), DataError);
  }
}

TEST_CASE("average pooling is available behind the flag") {
  const Dataset ds = generate_synthetic(small_spec(), 17);
  PipelineConfig cfg = small_config();
  cfg.pooling = Pooling::kAverage;
  const DiscoveryResult r = discover(ds, cfg);
  const CorLocReport report = corloc(predictions_of(ds, r), ds);
  CHECK(report.mixed_percent >= 80.0);
}

TEST_CASE("top-m returns ranked candidates per image") {
  const Dataset ds = generate_synthetic(small_spec(), 18);
  PipelineConfig cfg = small_config();
  cfg.top_m = 3;
  const DiscoveryResult r = discover(ds, cfg);
  for (const auto& p : r.final.proposals) {
    CHECK(p.size() >= 1);
    CHECK(p.size() <= 3);
  }
}

TEST_CASE("component extraction separates the planted classes") {
  const Dataset ds = generate_synthetic(small_spec(), 19);
  const DiscoveryResult r = discover(ds, small_config());

  std::vector<std::int32_t> proposal(ds.n());
  for (int i = 0; i < ds.n(); ++i) proposal[i] = r.final.proposals[i].front();
  ComponentParams params;
  params.min_size = 3;
  params.target_components = 5;
  const std::vector<RegionComponent> comps =
      extract_components(proposal, r.final.e, r.scores, params);
  REQUIRE(!comps.empty());

  int pure = 0;
  for (const RegionComponent& c : comps) {
    CHECK(static_cast<int>(c.image_indices.size()) >= 3);
    CHECK(static_cast<int>(c.image_indices.size()) <= 9);  // n/2
    std::map<std::string, int> count;
    for (int i : c.image_indices) count[ds.images[i].class_label] += 1;
    int best = 0;
    for (const auto& [label, v] : count) best = std::max(best, v);
    if (2 * best > static_cast<int>(c.image_indices.size())) ++pure;
  }
  CHECK(pure == static_cast<int>(comps.size()));

  const std::string dot = components_dot(ds, proposal, r.final.e, r.scores, comps);
  CHECK(dot.find("graph region_components") != std::string::npos);
  CHECK(dot.find("cluster_0") != std::string::npos);
  const std::string listing = components_listing(ds, comps);
  CHECK(listing.find("component 0") != std::string::npos);
  CHECK(listing.find("majority:") != std::string::npos);
}

TEST_CASE("component extraction handles degenerate graphs") {
  ScoreSet s(4);
  const std::vector<std::int32_t> proposal{0, 0, 0, 0};
  const std::vector<std::uint8_t> no_links(16, 0);
  ComponentParams params;
  params.min_size = 2;
  CHECK(extract_components(proposal, no_links, s, params).empty());

  // A clique of identical scores collapses into one component at cutoff 0
  // (max_size must admit it; the n/2 default would not at n = 4).
  params.max_size = 4;
  ScoreSet clique(4);
  std::vector<std::uint8_t> links(16, 1);
  for (int i = 0; i < 4; ++i) {
    links[static_cast<std::size_t>(i) * 4 + i] = 0;
    for (int j = 0; j < 4; ++j) {
      if (i != j) clique.set(i, j, SparseScoreMatrix::from_entries(1, 1, {{0, 0, 0.5}}));
    }
  }
  const auto comps = extract_components(proposal, links, clique, params);
  REQUIRE(comps.size() == 1);
  CHECK(comps[0].image_indices == std::vector<int>{0, 1, 2, 3});
  CHECK(comps[0].threshold == 0.0);
}

TEST_CASE("make_solution mirrors the discovery result") {
  const Dataset ds = generate_synthetic(small_spec(), 20);
  const PipelineConfig cfg = small_config();
  const DiscoveryResult r = discover(ds, cfg);
  const SolutionFile s = make_solution(cfg, r, "trace.csv");
  CHECK(s.images.size() == 18);
  CHECK(s.runs.size() == 3);
  CHECK(s.final_proposals.size() == 18);
  REQUIRE(s.duals.size() == 1);
  CHECK(s.duals[0].gap == r.duality_gap);
  for (int i = 0; i < 18; ++i) {
    CHECK(s.runs[0].x[i].size() == 2);  // nu ones per image
    CHECK(s.runs[0].e[i].size() == 3);  // tau links per image
  }
}
