#include <doctest.h>

#include <filesystem>
#include <fstream>

#include "codisc/errors.hpp"
#include "codisc/eval.hpp"
#include "codisc/io.hpp"

using namespace codisc;
namespace fs = std::filesystem;

namespace {

struct TempDir {
  fs::path path;
  TempDir() {
    path = fs::temp_directory_path() /
           ("codisc_test_" + std::to_string(reinterpret_cast<std::uintptr_t>(this)));
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
};

bool datasets_equal(const Dataset& a, const Dataset& b) {
  if (a.n() != b.n()) return false;
  for (int i = 0; i < a.n(); ++i) {
    const ImageRecord& x = a.images[i];
    const ImageRecord& y = b.images[i];
    if (x.id != y.id || x.width != y.width || x.height != y.height) return false;
    if (x.proposals != y.proposals || x.features != y.features) return false;
    if (x.ground_truth != y.ground_truth || x.class_label != y.class_label) return false;
    if (x.global_descriptor != y.global_descriptor) return false;
  }
  return true;
}

}  // namespace

TEST_CASE("dataset round-trips through JSON lines") {
  TempDir tmp;
  SynthSpec spec;
  spec.n = 6;
  spec.classes = 2;
  spec.proposals = 5;
  spec.feature_dim = 4;
  const Dataset ds = generate_synthetic(spec, 42);

  SUBCASE("inline features") {
    write_dataset(ds, tmp.path / "d.jsonl");
    const Dataset back = load_dataset(tmp.path / "d.jsonl");
    CHECK(datasets_equal(ds, back));
  }

  SUBCASE("binary float32 sidecar") {
    write_dataset(ds, tmp.path / "d.jsonl", /*sidecar_features=*/true);
    CHECK(fs::exists(tmp.path / "d_features"));
    const Dataset back = load_dataset(tmp.path / "d.jsonl");
    CHECK(datasets_equal(ds, back));  // features are f32-exact by construction
  }

  SUBCASE("writes are byte-stable") {
    write_dataset(ds, tmp.path / "a.jsonl");
    write_dataset(ds, tmp.path / "b.jsonl");
    std::ifstream a(tmp.path / "a.jsonl"), b(tmp.path / "b.jsonl");
    std::string sa((std::istreambuf_iterator<char>(a)), std::istreambuf_iterator<char>());
    std::string sb((std::istreambuf_iterator<char>(b)), std::istreambuf_iterator<char>());
    CHECK(sa == sb);
  }
}

TEST_CASE("dataset loader reports bad input") {
  TempDir tmp;
  const fs::path p = tmp.path / "bad.jsonl";

  SUBCASE("broken json") {
    std::ofstream(p) << "{not json\n";
    CHECK_THROWS_AS(load_dataset(p), DataError);
  }

  SUBCASE("missing fields") {
    std::ofstream(p) << R"({"id":"a","width":10})" << "\n";
    CHECK_THROWS_AS(load_dataset(p), DataError);
  }

  SUBCASE("single image") {
    std::ofstream(p) << R"({"id":"a","width":10,"height":10,"proposals":[[0,0,5,5]]})" << "\n";
    CHECK_THROWS_AS(load_dataset(p), DataError);
  }

  SUBCASE("missing file") { CHECK_THROWS_AS(load_dataset(tmp.path / "nope.jsonl"), DataError); }
}

TEST_CASE("score cache round-trip and meta pinning") {
  TempDir tmp;
  const fs::path dir = tmp.path / "cache";
  PipelineConfig cfg;
  check_score_cache_meta(dir, score_config_json(cfg));

  const SparseScoreMatrix m = SparseScoreMatrix::from_entries(
      4, 5, {{0, 1, 0.25}, {2, 3, 1.5}, {3, 0, 1e-9}});
  CHECK(!read_score_cache_entry(dir, "im_a", "im_b").has_value());
  write_score_cache_entry(dir, "im_a", "im_b", m);
  const auto back = read_score_cache_entry(dir, "im_a", "im_b");
  REQUIRE(back.has_value());
  CHECK(back->rows() == 4);
  CHECK(back->cols() == 5);
  REQUIRE(back->entries().size() == 3);
  for (std::size_t i = 0; i < 3; ++i) {
    CHECK(back->entries()[i].row == m.entries()[i].row);
    CHECK(back->entries()[i].col == m.entries()[i].col);
    CHECK(back->entries()[i].value == m.entries()[i].value);  // f64 exact
  }
  // Ordered pairs are distinct cache entries.
  CHECK(!read_score_cache_entry(dir, "im_b", "im_a").has_value());

  // A config change must refuse the cache.
  PipelineConfig other = cfg;
  other.standout.rho = 0.7;
  CHECK_THROWS_AS(check_score_cache_meta(dir, score_config_json(other)), DataError);
  CHECK_NOTHROW(check_score_cache_meta(dir, score_config_json(cfg)));
}

TEST_CASE("cache entry format is the documented byte layout") {
  TempDir tmp;
  const fs::path dir = tmp.path / "cache";
  fs::create_directories(dir);
  const SparseScoreMatrix m = SparseScoreMatrix::from_entries(2, 3, {{1, 2, 0.5}});
  write_score_cache_entry(dir, "x", "y", m);
  fs::path file;
  for (const auto& entry : fs::directory_iterator(dir)) file = entry.path();
  std::ifstream in(file, std::ios::binary);
  std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  REQUIRE(bytes.size() == 12 + 16);
  // p_i=2, p_j=3, count=1, then k=1, l=2 little-endian.
  const unsigned char* b = reinterpret_cast<const unsigned char*>(bytes.data());
  CHECK(b[0] == 2);
  CHECK(b[4] == 3);
  CHECK(b[8] == 1);
  CHECK(b[12] == 1);
  CHECK(b[16] == 2);
  // 0.5 as IEEE double, little-endian: 3f e0 00 00 00 00 00 00 reversed.
  CHECK(b[27] == 0x3f);
  CHECK(b[26] == 0xe0);
}

TEST_CASE("pipeline config survives the json round-trip") {
  PipelineConfig cfg;
  cfg.nu = 3;
  cfg.tau = 7;
  cfg.normalize_similarity = false;
  cfg.continuous_opt = false;
  cfg.ensemble_runs = 2;
  cfg.seed = 987654321;
  cfg.prefilter_k = 12;
  cfg.exact_standout = true;
  cfg.alpha = 0.5;
  cfg.top_m = 2;
  cfg.pooling = Pooling::kAverage;
  cfg.setting = "separate";
  cfg.standout.top_k = 77;
  cfg.hough.sx_bins = 3;

  const PipelineConfig back = pipeline_config_from_json(pipeline_config_to_json(cfg));
  CHECK(back.nu == 3);
  CHECK(back.tau == 7);
  CHECK(back.normalize_similarity == false);
  CHECK(back.continuous_opt == false);
  CHECK(back.ensemble_runs == 2);
  CHECK(back.seed == 987654321);
  CHECK(back.prefilter_k == 12);
  CHECK(back.exact_standout == true);
  CHECK(back.alpha == 0.5);
  CHECK(back.top_m == 2);
  CHECK(back.pooling == Pooling::kAverage);
  CHECK(back.setting == "separate");
  CHECK(back.standout.top_k == 77);
  CHECK(back.hough.sx_bins == 3);
}

TEST_CASE("synth spec json accepts partial fields and validates") {
  const SynthSpec spec = synth_spec_from_json(nlohmann::json{{"n", 10}, {"noise", 0.3}});
  CHECK(spec.n == 10);
  CHECK(spec.noise == 0.3);
  CHECK(spec.classes == 3);  // default preserved
  CHECK_THROWS_AS(synth_spec_from_json(nlohmann::json{{"n", 1}}), DataError);
}

TEST_CASE("solution file round-trip") {
  TempDir tmp;
  SolutionFile s;
  s.config = pipeline_config_to_json(PipelineConfig{});
  s.images = {"a", "b"};
  SolutionRun run;
  run.objective = 1.5;
  run.x = {{0, 2}, {1}};
  run.e = {{1}, {0}};
  s.runs.push_back(run);
  s.final_proposals = {{2}, {1}};
  s.final_e = {{1}, {}};
  s.duals.push_back({"", 2.0, 10.0, 20.0, 0.05, 137});
  s.duality_gap = 0.05;
  s.trace_file = "trace.csv";

  const fs::path p = tmp.path / "sol.json";
  write_solution(p, s);
  const SolutionFile back = load_solution(p);
  CHECK(back.images == s.images);
  REQUIRE(back.runs.size() == 1);
  CHECK(back.runs[0].objective == 1.5);
  CHECK(back.runs[0].x == run.x);
  CHECK(back.runs[0].e == run.e);
  CHECK(back.final_proposals == s.final_proposals);
  CHECK(back.final_e == s.final_e);
  REQUIRE(back.duals.size() == 1);
  CHECK(back.duals[0].bound_raw == 20.0);
  CHECK(back.duals[0].iterations == 137);
  CHECK(back.duality_gap == 0.05);
  CHECK(back.trace_file == "trace.csv");

  std::ofstream(tmp.path / "junk.json") << "{\"format\": \"other\"}";
  CHECK_THROWS_AS(load_solution(tmp.path / "junk.json"), DataError);
}
