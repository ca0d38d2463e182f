#include "codisc/io.hpp"

#include <bit>
#include <cstdint>
#include <fstream>
#include <sstream>

#include "codisc/errors.hpp"

namespace codisc {

namespace {

using nlohmann::json;

// ---- little-endian packing (the formats are defined byte for byte) ----

void put_u32(std::string& out, std::uint32_t v) {
  for (int b = 0; b < 4; ++b) out.push_back(static_cast<char>((v >> (8 * b)) & 0xff));
}

void put_f64(std::string& out, double v) {
  const std::uint64_t bits = std::bit_cast<std::uint64_t>(v);
  for (int b = 0; b < 8; ++b) out.push_back(static_cast<char>((bits >> (8 * b)) & 0xff));
}

std::uint32_t get_u32(const std::string& in, std::size_t& pos) {
  if (pos + 4 > in.size()) throw DataError("truncated binary file");
  std::uint32_t v = 0;
  for (int b = 0; b < 4; ++b) v |= static_cast<std::uint32_t>(static_cast<unsigned char>(in[pos++])) << (8 * b);
  return v;
}

double get_f64(const std::string& in, std::size_t& pos) {
  if (pos + 8 > in.size()) throw DataError("truncated binary file");
  std::uint64_t v = 0;
  for (int b = 0; b < 8; ++b) v |= static_cast<std::uint64_t>(static_cast<unsigned char>(in[pos++])) << (8 * b);
  return std::bit_cast<double>(v);
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return std::move(buf).str();
}

void write_file(const std::filesystem::path& path, const std::string& bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("cannot write " + path.string());
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw DataError("failed writing " + path.string());
}

std::uint64_t fnv1a64(const std::string& s) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

std::string hex64(std::uint64_t v) {
  static const char* digits = "0123456789abcdef";
  std::string out(16, '0');
  for (int i = 15; i >= 0; --i) {
    out[i] = digits[v & 0xf];
    v >>= 4;
  }
  return out;
}

std::string sanitize_id(const std::string& id) {
  std::string out;
  for (char c : id) {
    const bool ok = (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') ||
                    (c >= '0' && c <= '9') || c == '-' || c == '_' || c == '.';
    out.push_back(ok ? c : '_');
  }
  return out;
}

std::vector<Rect> rects_from_json(const json& arr, const std::string& what) {
  std::vector<Rect> out;
  for (const json& r : arr) {
    if (!r.is_array() || r.size() != 4) throw DataError(what + ": expected [x,y,w,h]");
    out.push_back({r[0].get<double>(), r[1].get<double>(), r[2].get<double>(),
                   r[3].get<double>()});
  }
  return out;
}

json rects_to_json(const std::vector<Rect>& rects) {
  json arr = json::array();
  for (const Rect& r : rects) arr.push_back({r.x, r.y, r.w, r.h});
  return arr;
}

std::vector<std::vector<double>> read_feature_sidecar(const std::filesystem::path& path,
                                                      int proposals) {
  const std::string bytes = read_file(path);
  if (bytes.size() % 4 != 0 || bytes.size() % (4 * proposals) != 0 || bytes.empty()) {
    throw DataError("feature sidecar " + path.string() + " has " +
                    std::to_string(bytes.size()) + " bytes, not divisible into " +
                    std::to_string(proposals) + " float32 rows");
  }
  const std::size_t dim = bytes.size() / 4 / proposals;
  std::vector<std::vector<double>> features(proposals, std::vector<double>(dim));
  std::size_t pos = 0;
  for (auto& row : features) {
    for (double& v : row) {
      std::uint32_t bits = 0;
      for (int b = 0; b < 4; ++b) {
        bits |= static_cast<std::uint32_t>(static_cast<unsigned char>(bytes[pos++])) << (8 * b);
      }
      v = static_cast<double>(std::bit_cast<float>(bits));
    }
  }
  return features;
}

}  // namespace

Dataset load_dataset(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open dataset " + path.string());
  const std::filesystem::path base = path.parent_path();

  Dataset ds;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    json j;
    try {
      j = json::parse(line);
    } catch (const json::exception& e) {
      throw DataError(path.string() + ":" + std::to_string(line_no) + ": " + e.what());
    }
    ImageRecord im;
    try {
      im.id = j.at("id").get<std::string>();
      im.width = j.at("width").get<double>();
      im.height = j.at("height").get<double>();
      im.proposals = rects_from_json(j.at("proposals"), "proposals");
      if (j.contains("features")) {
        im.features = j["features"].get<std::vector<std::vector<double>>>();
      } else if (j.contains("features_file")) {
        im.features = read_feature_sidecar(base / j["features_file"].get<std::string>(),
                                           im.num_proposals());
      }
      if (j.contains("gt")) im.ground_truth = rects_from_json(j["gt"], "gt");
      if (j.contains("class")) im.class_label = j["class"].get<std::string>();
      if (j.contains("global")) im.global_descriptor = j["global"].get<std::vector<double>>();
    } catch (const json::exception& e) {
      throw DataError(path.string() + ":" + std::to_string(line_no) + ": " + e.what());
    }
    ds.images.push_back(std::move(im));
  }
  validate_dataset(ds);
  return ds;
}

void write_dataset(const Dataset& dataset, const std::filesystem::path& path,
                   bool sidecar_features) {
  std::filesystem::path sidecar_dir;
  std::string sidecar_rel;
  if (sidecar_features) {
    sidecar_rel = path.stem().string() + "_features";
    sidecar_dir = path.parent_path() / sidecar_rel;
    std::filesystem::create_directories(sidecar_dir);
  }

  std::ofstream out(path, std::ios::trunc);
  if (!out) throw DataError("cannot write dataset " + path.string());
  for (std::size_t i = 0; i < dataset.images.size(); ++i) {
    const ImageRecord& im = dataset.images[i];
    json j;
    j["id"] = im.id;
    j["width"] = im.width;
    j["height"] = im.height;
    j["proposals"] = rects_to_json(im.proposals);
    if (!im.features.empty()) {
      if (sidecar_features) {
        const std::string name = std::to_string(i) + "_" + sanitize_id(im.id) + ".f32";
        std::string bytes;
        bytes.reserve(im.features.size() * im.features.front().size() * 4);
        for (const auto& row : im.features) {
          for (double v : row) {
            const std::uint32_t bits = std::bit_cast<std::uint32_t>(static_cast<float>(v));
            for (int b = 0; b < 4; ++b) {
              bytes.push_back(static_cast<char>((bits >> (8 * b)) & 0xff));
            }
          }
        }
        write_file(sidecar_dir / name, bytes);
        j["features_file"] = sidecar_rel + "/" + name;
      } else {
        j["features"] = im.features;
      }
    }
    if (!im.ground_truth.empty()) j["gt"] = rects_to_json(im.ground_truth);
    if (!im.class_label.empty()) j["class"] = im.class_label;
    if (!im.global_descriptor.empty()) j["global"] = im.global_descriptor;
    out << j.dump() << "\n";
  }
  if (!out) throw DataError("failed writing dataset " + path.string());
}

nlohmann::json score_config_json(const PipelineConfig& cfg) {
  return json{{"normalize_similarity", cfg.normalize_similarity},
              {"exact_standout", cfg.exact_standout},
              {"rho", cfg.standout.rho},
              {"delta", cfg.standout.delta},
              {"gamma", cfg.standout.gamma},
              {"q", cfg.standout.q},
              {"top_k", cfg.standout.top_k},
              {"tx_bins", cfg.hough.tx_bins},
              {"ty_bins", cfg.hough.ty_bins},
              {"sx_bins", cfg.hough.sx_bins},
              {"sy_bins", cfg.hough.sy_bins},
              {"translation_range", cfg.hough.translation_range},
              {"log_scale_range", cfg.hough.log_scale_range}};
}

void check_score_cache_meta(const std::filesystem::path& dir, const nlohmann::json& cfg) {
  std::filesystem::create_directories(dir);
  const std::filesystem::path meta = dir / "cache_meta.json";
  if (std::filesystem::exists(meta)) {
    const json existing = json::parse(read_file(meta));
    if (existing != cfg) {
      throw DataError("score cache " + dir.string() +
                      " was built with different score parameters; clear it first");
    }
    return;
  }
  write_file(meta, cfg.dump(2) + "\n");
}

namespace {

std::filesystem::path cache_entry_path(const std::filesystem::path& dir,
                                       const std::string& id_i, const std::string& id_j) {
  return dir / ("s_" + hex64(fnv1a64(id_i)) + "_" + hex64(fnv1a64(id_j)) + ".bin");
}

}  // namespace

std::optional<SparseScoreMatrix> read_score_cache_entry(const std::filesystem::path& dir,
                                                        const std::string& id_i,
                                                        const std::string& id_j) {
  const std::filesystem::path file = cache_entry_path(dir, id_i, id_j);
  if (!std::filesystem::exists(file)) return std::nullopt;
  const std::string bytes = read_file(file);
  std::size_t pos = 0;
  const std::uint32_t rows = get_u32(bytes, pos);
  const std::uint32_t cols = get_u32(bytes, pos);
  const std::uint32_t count = get_u32(bytes, pos);
  std::vector<ScoreEntry> entries;
  entries.reserve(count);
  for (std::uint32_t t = 0; t < count; ++t) {
    const std::uint32_t k = get_u32(bytes, pos);
    const std::uint32_t l = get_u32(bytes, pos);
    const double v = get_f64(bytes, pos);
    entries.push_back({static_cast<std::int32_t>(k), static_cast<std::int32_t>(l), v});
  }
  if (pos != bytes.size()) throw DataError("trailing bytes in cache entry " + file.string());
  return SparseScoreMatrix::from_entries(static_cast<int>(rows), static_cast<int>(cols),
                                         std::move(entries));
}

void write_score_cache_entry(const std::filesystem::path& dir, const std::string& id_i,
                             const std::string& id_j, const SparseScoreMatrix& matrix) {
  std::string bytes;
  bytes.reserve(12 + matrix.entries().size() * 16);
  put_u32(bytes, static_cast<std::uint32_t>(matrix.rows()));
  put_u32(bytes, static_cast<std::uint32_t>(matrix.cols()));
  put_u32(bytes, static_cast<std::uint32_t>(matrix.entries().size()));
  for (const ScoreEntry& e : matrix.entries()) {
    put_u32(bytes, static_cast<std::uint32_t>(e.row));
    put_u32(bytes, static_cast<std::uint32_t>(e.col));
    put_f64(bytes, e.value);
  }
  write_file(cache_entry_path(dir, id_i, id_j), bytes);
}

namespace {

std::vector<std::vector<std::int32_t>> x_lists(const Assignment& a) {
  std::vector<std::vector<std::int32_t>> out(a.n());
  for (int i = 0; i < a.n(); ++i) {
    for (std::size_t k = 0; k < a.x[i].size(); ++k) {
      if (a.x[i][k]) out[i].push_back(static_cast<std::int32_t>(k));
    }
  }
  return out;
}

std::vector<std::vector<std::int32_t>> e_lists(const std::vector<std::uint8_t>& e, int n) {
  std::vector<std::vector<std::int32_t>> out(n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      if (e[static_cast<std::size_t>(i) * n + j]) out[i].push_back(j);
    }
  }
  return out;
}

}  // namespace

SolutionFile make_solution(const PipelineConfig& cfg, const DiscoveryResult& result,
                           const std::string& trace_file) {
  SolutionFile s;
  s.config = pipeline_config_to_json(cfg);
  s.images = result.image_ids;
  for (const RunRecord& r : result.runs) {
    SolutionRun run;
    run.objective = r.objective;
    run.x = x_lists(r.assignment);
    run.e = e_lists(r.assignment.e, r.assignment.n());
    s.runs.push_back(std::move(run));
  }
  s.final_proposals = result.final.proposals;
  s.final_e = e_lists(result.final.e, result.final.n());
  for (const DualLog& d : result.duals) {
    s.duals.push_back({d.class_label, d.normalization, d.bound_normalized, d.bound_raw,
                       d.gap, d.iterations});
  }
  s.duality_gap = result.duality_gap;
  s.trace_file = trace_file;
  return s;
}

void write_solution(const std::filesystem::path& path, const SolutionFile& solution) {
  json j;
  j["format"] = "codisc-solution-v1";
  j["config"] = solution.config;
  j["images"] = solution.images;
  json runs = json::array();
  for (const SolutionRun& r : solution.runs) {
    runs.push_back({{"objective", r.objective}, {"x", r.x}, {"e", r.e}});
  }
  j["runs"] = std::move(runs);
  j["final"] = {{"proposals", solution.final_proposals}, {"e", solution.final_e}};
  json duals = json::array();
  for (const SolutionDualLog& d : solution.duals) {
    duals.push_back({{"label", d.label},
                     {"normalization", d.normalization},
                     {"bound_normalized", d.bound_normalized},
                     {"bound_raw", d.bound_raw},
                     {"gap", d.gap},
                     {"iterations", d.iterations}});
  }
  j["duals"] = std::move(duals);
  j["duality_gap"] = solution.duality_gap;
  if (!solution.trace_file.empty()) j["trace_file"] = solution.trace_file;
  write_file(path, j.dump(2) + "\n");
}

SolutionFile load_solution(const std::filesystem::path& path) {
  json j;
  try {
    j = json::parse(read_file(path));
  } catch (const json::exception& e) {
    throw DataError("solution " + path.string() + ": " + e.what());
  }
  if (j.value("format", "") != "codisc-solution-v1") {
    throw DataError(path.string() + " is not a codisc solution file");
  }
  SolutionFile s;
  try {
    s.config = j.at("config");
    s.images = j.at("images").get<std::vector<std::string>>();
    for (const json& r : j.at("runs")) {
      SolutionRun run;
      run.objective = r.at("objective").get<double>();
      run.x = r.at("x").get<std::vector<std::vector<std::int32_t>>>();
      run.e = r.at("e").get<std::vector<std::vector<std::int32_t>>>();
      s.runs.push_back(std::move(run));
    }
    s.final_proposals = j.at("final").at("proposals").get<std::vector<std::vector<std::int32_t>>>();
    s.final_e = j.at("final").at("e").get<std::vector<std::vector<std::int32_t>>>();
    for (const json& d : j.at("duals")) {
      s.duals.push_back({d.at("label").get<std::string>(), d.at("normalization").get<double>(),
                         d.at("bound_normalized").get<double>(),
                         d.at("bound_raw").get<double>(), d.at("gap").get<double>(),
                         d.at("iterations").get<int>()});
    }
    s.duality_gap = j.at("duality_gap").get<double>();
    s.trace_file = j.value("trace_file", "");
  } catch (const json::exception& e) {
    throw DataError("solution " + path.string() + ": " + e.what());
  }
  return s;
}

std::vector<std::filesystem::path> write_traces(const std::filesystem::path& path,
                                                const DiscoveryResult& result) {
  std::vector<std::filesystem::path> written;
  for (const DualLog& log : result.duals) {
    std::filesystem::path file = path;
    if (!log.class_label.empty()) {
      file = path.parent_path() /
             (path.stem().string() + "." + sanitize_id(log.class_label) +
              path.extension().string());
    }
    std::ofstream out(file, std::ios::trunc);
    if (!out) throw DataError("cannot write trace " + file.string());
    out << "t,dual_value,max_violation\n";
    for (const DualTracePoint& pt : log.history) {
      out << pt.t << "," << json(pt.dual_value).dump() << ","
          << json(pt.max_violation).dump() << "\n";
    }
    written.push_back(file);
  }
  return written;
}

nlohmann::json pipeline_config_to_json(const PipelineConfig& cfg) {
  json j;
  j["nu"] = cfg.nu;
  j["tau"] = cfg.tau;
  j["normalize_similarity"] = cfg.normalize_similarity;
  j["continuous_opt"] = cfg.continuous_opt;
  j["ensemble_runs"] = cfg.ensemble_runs;
  j["seed"] = cfg.seed;
  j["prefilter_k"] = cfg.prefilter_k;
  j["exact_standout"] = cfg.exact_standout;
  j["max_sweeps"] = cfg.max_sweeps;
  j["alpha"] = cfg.alpha;
  j["beta"] = cfg.beta;
  j["iters"] = cfg.iters;
  j["top_m"] = cfg.top_m;
  j["pooling"] = cfg.pooling == Pooling::kMax ? "max" : "average";
  j["workers"] = cfg.workers;
  j["setting"] = cfg.setting;
  j["hough"] = {{"tx_bins", cfg.hough.tx_bins},
                {"ty_bins", cfg.hough.ty_bins},
                {"sx_bins", cfg.hough.sx_bins},
                {"sy_bins", cfg.hough.sy_bins},
                {"translation_range", cfg.hough.translation_range},
                {"log_scale_range", cfg.hough.log_scale_range}};
  j["standout"] = {{"rho", cfg.standout.rho},
                   {"delta", cfg.standout.delta},
                   {"gamma", cfg.standout.gamma},
                   {"q", cfg.standout.q},
                   {"top_k", cfg.standout.top_k}};
  return j;
}

PipelineConfig pipeline_config_from_json(const nlohmann::json& j) {
  PipelineConfig cfg;
  try {
    cfg.nu = j.value("nu", cfg.nu);
    cfg.tau = j.value("tau", cfg.tau);
    cfg.normalize_similarity = j.value("normalize_similarity", cfg.normalize_similarity);
    cfg.continuous_opt = j.value("continuous_opt", cfg.continuous_opt);
    cfg.ensemble_runs = j.value("ensemble_runs", cfg.ensemble_runs);
    cfg.seed = j.value("seed", cfg.seed);
    cfg.prefilter_k = j.value("prefilter_k", cfg.prefilter_k);
    cfg.exact_standout = j.value("exact_standout", cfg.exact_standout);
    cfg.max_sweeps = j.value("max_sweeps", cfg.max_sweeps);
    cfg.alpha = j.value("alpha", cfg.alpha);
    cfg.beta = j.value("beta", cfg.beta);
    cfg.iters = j.value("iters", cfg.iters);
    cfg.top_m = j.value("top_m", cfg.top_m);
    cfg.pooling = j.value("pooling", "max") == "average" ? Pooling::kAverage : Pooling::kMax;
    cfg.workers = j.value("workers", cfg.workers);
    cfg.setting = j.value("setting", cfg.setting);
    if (j.contains("hough")) {
      const json& h = j["hough"];
      cfg.hough.tx_bins = h.value("tx_bins", cfg.hough.tx_bins);
      cfg.hough.ty_bins = h.value("ty_bins", cfg.hough.ty_bins);
      cfg.hough.sx_bins = h.value("sx_bins", cfg.hough.sx_bins);
      cfg.hough.sy_bins = h.value("sy_bins", cfg.hough.sy_bins);
      cfg.hough.translation_range = h.value("translation_range", cfg.hough.translation_range);
      cfg.hough.log_scale_range = h.value("log_scale_range", cfg.hough.log_scale_range);
    }
    if (j.contains("standout")) {
      const json& s = j["standout"];
      cfg.standout.rho = s.value("rho", cfg.standout.rho);
      cfg.standout.delta = s.value("delta", cfg.standout.delta);
      cfg.standout.gamma = s.value("gamma", cfg.standout.gamma);
      cfg.standout.q = s.value("q", cfg.standout.q);
      cfg.standout.top_k = s.value("top_k", cfg.standout.top_k);
    }
  } catch (const json::exception& e) {
    throw DataError(std::string("bad pipeline config: ") + e.what());
  }
  return cfg;
}

SynthSpec synth_spec_from_json(const nlohmann::json& j) {
  SynthSpec spec;
  try {
    spec.n = j.value("n", spec.n);
    spec.classes = j.value("classes", spec.classes);
    spec.proposals = j.value("proposals", spec.proposals);
    spec.feature_dim = j.value("feature_dim", spec.feature_dim);
    spec.noise = j.value("noise", spec.noise);
    spec.jitter = j.value("jitter", spec.jitter);
    spec.image_width = j.value("image_width", spec.image_width);
    spec.image_height = j.value("image_height", spec.image_height);
  } catch (const json::exception& e) {
    throw DataError(std::string("bad synthetic spec: ") + e.what());
  }
  spec.validate();
  return spec;
}

SynthSpec load_synth_spec(const std::filesystem::path& path) {
  json j;
  try {
    j = json::parse(read_file(path));
  } catch (const json::exception& e) {
    throw DataError("synthetic spec " + path.string() + ": " + e.what());
  }
  return synth_spec_from_json(j);
}

void write_corloc_csv(const std::filesystem::path& path, const CorLocReport& report) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw DataError("cannot write " + path.string());
  out << "label,total,correct,percent\n";
  for (const ClassCorLoc& c : report.per_class) {
    out << (c.label.empty() ? "(unlabeled)" : c.label) << "," << c.total << "," << c.correct
        << "," << nlohmann::json(c.percent()).dump() << "\n";
  }
  out << "mixed," << report.total << "," << report.correct << ","
      << nlohmann::json(report.mixed_percent).dump() << "\n";
  out << "separate,,," << nlohmann::json(report.separate_percent).dump() << "\n";
}

}  // namespace codisc
