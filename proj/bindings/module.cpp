#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "codisc/assignment.hpp"
#include "codisc/dataset.hpp"
#include "codisc/dual.hpp"
#include "codisc/ensemble.hpp"
#include "codisc/errors.hpp"
#include "codisc/eval.hpp"
#include "codisc/geometry.hpp"
#include "codisc/graph_export.hpp"
#include "codisc/hough.hpp"
#include "codisc/io.hpp"
#include "codisc/pbf.hpp"
#include "codisc/pipeline.hpp"
#include "codisc/rounding.hpp"
#include "codisc/standout.hpp"

namespace py = pybind11;
using namespace codisc;

namespace {

std::vector<std::vector<double>> dense_rows(const DenseMatrix& m) {
  std::vector<std::vector<double>> rows(m.rows);
  for (int r = 0; r < m.rows; ++r) {
    rows[r].assign(m.data.begin() + static_cast<std::size_t>(r) * m.cols,
                   m.data.begin() + static_cast<std::size_t>(r + 1) * m.cols);
  }
  return rows;
}

DenseMatrix dense_from_rows(const std::vector<std::vector<double>>& rows) {
  if (rows.empty()) return DenseMatrix();
  DenseMatrix m(static_cast<int>(rows.size()), static_cast<int>(rows.front().size()));
  for (int r = 0; r < m.rows; ++r) {
    if (static_cast<int>(rows[r].size()) != m.cols) {
      throw DataError("ragged matrix rows");
    }
    for (int c = 0; c < m.cols; ++c) m.at(r, c) = rows[r][c];
  }
  return m;
}

}  // namespace

PYBIND11_MODULE(_codisc, m) {
  m.doc() = "Joint image matching and object discovery as constrained supermodular "
            "maximization";

  py::register_exception<DataError>(m, "DataError");
  py::register_exception<InternalError>(m, "InternalError");

  // ---- geometry and dataset ----
  py::class_<Rect>(m, "Rect")
      .def(py::init<>())
      .def(py::init([](double x, double y, double w, double h) {
             return Rect{x, y, w, h};
           }),
           py::arg("x"), py::arg("y"), py::arg("w"), py::arg("h"))
      .def_readwrite("x", &Rect::x)
      .def_readwrite("y", &Rect::y)
      .def_readwrite("w", &Rect::w)
      .def_readwrite("h", &Rect::h)
      .def("__repr__", [](const Rect& r) {
        return "Rect(" + std::to_string(r.x) + ", " + std::to_string(r.y) + ", " +
               std::to_string(r.w) + ", " + std::to_string(r.h) + ")";
      });
  m.def("rect_area", &rect_area, py::arg("r"));
  m.def("rect_intersection_area", &rect_intersection_area, py::arg("r"), py::arg("s"));
  m.def("iou", &iou, py::arg("r"), py::arg("s"));

  py::class_<ImageRecord>(m, "ImageRecord")
      .def(py::init<>())
      .def_readwrite("id", &ImageRecord::id)
      .def_readwrite("width", &ImageRecord::width)
      .def_readwrite("height", &ImageRecord::height)
      .def_readwrite("proposals", &ImageRecord::proposals)
      .def_readwrite("features", &ImageRecord::features)
      .def_readwrite("ground_truth", &ImageRecord::ground_truth)
      .def_readwrite("class_label", &ImageRecord::class_label)
      .def_readwrite("global_descriptor", &ImageRecord::global_descriptor)
      .def_property_readonly("num_proposals", &ImageRecord::num_proposals);

  py::class_<Dataset>(m, "Dataset")
      .def(py::init<>())
      .def_readwrite("images", &Dataset::images)
      .def_property_readonly("n", &Dataset::n);
  m.def("validate_dataset", &validate_dataset, py::arg("dataset"));
  m.def("load_dataset", &load_dataset, py::arg("path"));
  m.def("write_dataset", &write_dataset, py::arg("dataset"), py::arg("path"),
        py::arg("sidecar_features") = false);

  // ---- scores and the objective ----
  py::class_<ScoreEntry>(m, "ScoreEntry")
      .def(py::init([](int row, int col, double value) {
             return ScoreEntry{row, col, value};
           }),
           py::arg("row"), py::arg("col"), py::arg("value"))
      .def_readonly("row", &ScoreEntry::row)
      .def_readonly("col", &ScoreEntry::col)
      .def_readonly("value", &ScoreEntry::value);

  py::class_<SparseScoreMatrix>(m, "SparseScoreMatrix")
      .def_static("from_entries", &SparseScoreMatrix::from_entries, py::arg("rows"),
                  py::arg("cols"), py::arg("entries"))
      .def_property_readonly("rows", &SparseScoreMatrix::rows)
      .def_property_readonly("cols", &SparseScoreMatrix::cols)
      .def_property_readonly("entries", &SparseScoreMatrix::entries);

  py::class_<ScoreSet>(m, "ScoreSet")
      .def(py::init<int>(), py::arg("n"))
      .def_property_readonly("n", &ScoreSet::n)
      .def("set", &ScoreSet::set, py::arg("i"), py::arg("j"), py::arg("matrix"))
      .def("find",
           [](const ScoreSet& s, int i, int j) -> std::optional<SparseScoreMatrix> {
             const SparseScoreMatrix* m = s.find(i, j);
             if (!m) return std::nullopt;
             return *m;
           },
           py::arg("i"), py::arg("j"))
      .def_property_readonly("stored_pairs", &ScoreSet::stored_pairs)
      .def("max_value", &ScoreSet::max_value)
      .def("total_entries", &ScoreSet::total_entries);

  py::class_<Assignment>(m, "Assignment")
      .def(py::init<const std::vector<int>&>(), py::arg("proposals_per_image"))
      .def_readwrite("x", &Assignment::x)
      .def_readwrite("e", &Assignment::e)
      .def_property_readonly("n", &Assignment::n)
      .def("e_at", &Assignment::e_at, py::arg("i"), py::arg("j"))
      .def("set_e", &Assignment::set_e, py::arg("i"), py::arg("j"), py::arg("value"))
      .def("x_row_sum", &Assignment::x_row_sum, py::arg("i"))
      .def("e_row_sum", &Assignment::e_row_sum, py::arg("i"));

  py::class_<FractionalAssignment>(m, "FractionalAssignment")
      .def(py::init<const std::vector<int>&>(), py::arg("proposals_per_image"))
      .def_static("all_ones", &FractionalAssignment::all_ones, py::arg("proposals_per_image"))
      .def_readwrite("x", &FractionalAssignment::x)
      .def_readwrite("e", &FractionalAssignment::e)
      .def_property_readonly("n", &FractionalAssignment::n)
      .def("e_at", &FractionalAssignment::e_at, py::arg("i"), py::arg("j"))
      .def("set_e", &FractionalAssignment::set_e, py::arg("i"), py::arg("j"), py::arg("value"));

  m.def("to_fractional", &to_fractional, py::arg("assignment"));
  m.def("objective_value", &objective_value, py::arg("assignment"), py::arg("scores"));
  m.def("relaxed_objective_value", &relaxed_objective_value, py::arg("fractional"),
        py::arg("scores"));

  // ---- similarity ----
  py::class_<HoughSpace>(m, "HoughSpace")
      .def(py::init<>())
      .def_readwrite("tx_bins", &HoughSpace::tx_bins)
      .def_readwrite("ty_bins", &HoughSpace::ty_bins)
      .def_readwrite("sx_bins", &HoughSpace::sx_bins)
      .def_readwrite("sy_bins", &HoughSpace::sy_bins)
      .def_readwrite("translation_range", &HoughSpace::translation_range)
      .def_readwrite("log_scale_range", &HoughSpace::log_scale_range)
      .def_property_readonly("size", &HoughSpace::size)
      .def_property_readonly("overflow_bin", &HoughSpace::overflow_bin);

  m.def("appearance_similarity",
        [](const std::vector<double>& f, const std::vector<double>& g) {
          return appearance_similarity(f, g);
        },
        py::arg("f"), py::arg("g"));
  m.def("offset_bin", &offset_bin, py::arg("r"), py::arg("s"), py::arg("width_i"),
        py::arg("height_i"), py::arg("width_j"), py::arg("height_j"), py::arg("space"));
  m.def("similarity_matrix",
        [](const ImageRecord& a, const ImageRecord& b, const HoughSpace& space,
           bool normalize) { return dense_rows(similarity_matrix(a, b, space, normalize)); },
        py::arg("image_i"), py::arg("image_j"), py::arg("space") = HoughSpace{},
        py::arg("normalize") = true);

  // ---- stand-out ----
  py::class_<StandoutConfig>(m, "StandoutConfig")
      .def(py::init<>())
      .def_readwrite("rho", &StandoutConfig::rho)
      .def_readwrite("delta", &StandoutConfig::delta)
      .def_readwrite("gamma", &StandoutConfig::gamma)
      .def_readwrite("q", &StandoutConfig::q)
      .def_readwrite("top_k", &StandoutConfig::top_k);

  py::class_<ContainmentIndex>(m, "ContainmentIndex")
      .def_readonly("parts", &ContainmentIndex::parts)
      .def_readonly("background", &ContainmentIndex::background);

  m.def("build_containment", &build_containment, py::arg("image"), py::arg("config"));
  m.def("standout_exact",
        [](const std::vector<std::vector<double>>& s, const ContainmentIndex& ci,
           const ContainmentIndex& cj) {
          return dense_rows(standout_exact(dense_from_rows(s), ci, cj));
        },
        py::arg("similarity"), py::arg("containment_i"), py::arg("containment_j"));
  m.def("standout_fast",
        [](const std::vector<std::vector<double>>& s, const ContainmentIndex& ci,
           const ContainmentIndex& cj, const StandoutConfig& cfg) {
          StandoutResult r = standout_fast(dense_from_rows(s), ci, cj, cfg);
          return py::make_tuple(dense_rows(r.scores), r.fallback_fraction);
        },
        py::arg("similarity"), py::arg("containment_i"), py::arg("containment_j"),
        py::arg("config"));
  m.def("sparsify_topk",
        [](const std::vector<std::vector<double>>& s, int top_k) {
          return sparsify_topk(dense_from_rows(s), top_k);
        },
        py::arg("scores"), py::arg("top_k"));

  // ---- pseudo-Boolean maximization ----
  py::class_<CubicPBF>(m, "CubicPBF")
      .def(py::init<int>(), py::arg("num_vars"))
      .def("add_unary", &CubicPBF::add_unary, py::arg("var"), py::arg("coeff"))
      .def("add_triple", &CubicPBF::add_triple, py::arg("a"), py::arg("b"), py::arg("c"),
           py::arg("coeff"))
      .def("set_constant", &CubicPBF::set_constant, py::arg("constant"))
      .def_property_readonly("num_vars", &CubicPBF::num_vars)
      .def("evaluate", &CubicPBF::evaluate, py::arg("point"));

  py::class_<MaximizeResult>(m, "MaximizeResult")
      .def_readonly("point", &MaximizeResult::point)
      .def_readonly("value", &MaximizeResult::value);

  m.def("maximize",
        [](const CubicPBF& f, double scale) { return maximize(f, PbfOptions{scale}); },
        py::arg("f"), py::arg("scale") = 1e9);
  m.def("brute_force_maximize", &brute_force_maximize, py::arg("f"));
  m.def("conflict_graph_dot", &conflict_graph_dot, py::arg("f"));

  // ---- dual ----
  py::class_<DualConfig>(m, "DualConfig")
      .def(py::init<>())
      .def_readwrite("nu", &DualConfig::nu)
      .def_readwrite("tau", &DualConfig::tau)
      .def_readwrite("alpha", &DualConfig::alpha)
      .def_readwrite("beta", &DualConfig::beta)
      .def_readwrite("iters", &DualConfig::iters)
      .def_readwrite("stop_tol", &DualConfig::stop_tol);

  py::class_<VariableLayout>(m, "VariableLayout")
      .def(py::init([](std::vector<int> p) { return VariableLayout(std::move(p)); }),
           py::arg("proposals_per_image"))
      .def_property_readonly("num_vars", &VariableLayout::num_vars)
      .def("x_var", &VariableLayout::x_var, py::arg("i"), py::arg("k"))
      .def("e_var", &VariableLayout::e_var, py::arg("i"), py::arg("j"));

  m.def("build_lagrangian",
        [](const ScoreSet& s, const VariableLayout& layout, const std::vector<double>& lambda,
           const std::vector<double>& mu, const DualConfig& cfg) {
          return build_lagrangian(s, layout, lambda, mu, cfg);
        },
        py::arg("scores"), py::arg("layout"), py::arg("lambda_"), py::arg("mu"),
        py::arg("config"));

  py::class_<DualTracePoint>(m, "DualTracePoint")
      .def_readonly("t", &DualTracePoint::t)
      .def_readonly("dual_value", &DualTracePoint::dual_value)
      .def_readonly("max_violation", &DualTracePoint::max_violation);

  py::class_<DualResult>(m, "DualResult")
      .def_readonly("average", &DualResult::average)
      .def_readonly("dual_bound", &DualResult::dual_bound)
      .def_readonly("history", &DualResult::history)
      .def_readonly("iterations", &DualResult::iterations);

  m.def("run_dual",
        [](const ScoreSet& s, const VariableLayout& layout, const DualConfig& cfg,
           std::uint64_t seed) { return run_dual(s, layout, cfg, seed); },
        py::arg("scores"), py::arg("layout"), py::arg("config"), py::arg("seed") = 0);
  m.def("duality_gap", &duality_gap, py::arg("dual_bound"), py::arg("best_primal_value"));

  // ---- rounding and ensemble ----
  py::class_<RoundingOptions>(m, "RoundingOptions")
      .def(py::init<>())
      .def_readwrite("nu", &RoundingOptions::nu)
      .def_readwrite("tau", &RoundingOptions::tau)
      .def_readwrite("seed", &RoundingOptions::seed)
      .def_readwrite("max_sweeps", &RoundingOptions::max_sweeps);

  m.def("greedy_round", &greedy_round, py::arg("start"), py::arg("scores"), py::arg("options"));
  m.def("ascent_trace",
        [](const FractionalAssignment& start, const ScoreSet& s, const RoundingOptions& opts) {
          AscentTrace t = ascent_trace(start, s, opts);
          return py::make_tuple(t.final, t.objective_per_sweep);
        },
        py::arg("start"), py::arg("scores"), py::arg("options"));

  py::class_<PooledSolution>(m, "PooledSolution")
      .def_readonly("x", &PooledSolution::x)
      .def_readonly("e", &PooledSolution::e)
      .def_property_readonly("n", &PooledSolution::n);

  m.def("max_pool",
        [](const std::vector<Assignment>& runs) { return max_pool(runs); },
        py::arg("solutions"));
  m.def("average_pool",
        [](const std::vector<Assignment>& runs) { return average_pool(runs); },
        py::arg("solutions"));
  m.def("region_scores", &region_scores, py::arg("pooled"), py::arg("scores"), py::arg("tau"));
  m.def("select_final",
        [](const PooledSolution& pooled, const std::vector<std::vector<double>>& u,
           const ScoreSet& s, int tau, int top_m) {
          return select_final(pooled, u, s, tau, top_m);
        },
        py::arg("pooled"), py::arg("scores_u"), py::arg("scores"), py::arg("tau"),
        py::arg("top_m") = 1);

  py::class_<FinalSelection>(m, "FinalSelection")
      .def_readonly("proposals", &FinalSelection::proposals)
      .def_readonly("e", &FinalSelection::e);

  // ---- evaluation and synthesis ----
  py::class_<ClassCorLoc>(m, "ClassCorLoc")
      .def_readonly("label", &ClassCorLoc::label)
      .def_readonly("total", &ClassCorLoc::total)
      .def_readonly("correct", &ClassCorLoc::correct)
      .def_property_readonly("percent", &ClassCorLoc::percent);

  py::class_<CorLocReport>(m, "CorLocReport")
      .def_readonly("total", &CorLocReport::total)
      .def_readonly("correct", &CorLocReport::correct)
      .def_readonly("mixed_percent", &CorLocReport::mixed_percent)
      .def_readonly("separate_percent", &CorLocReport::separate_percent)
      .def_readonly("per_class", &CorLocReport::per_class);

  m.def("corloc", &corloc, py::arg("predictions"), py::arg("dataset"));
  m.def("prefilter_neighbors", &prefilter_neighbors, py::arg("dataset"), py::arg("k"));

  py::class_<SynthSpec>(m, "SynthSpec")
      .def(py::init<>())
      .def_readwrite("n", &SynthSpec::n)
      .def_readwrite("classes", &SynthSpec::classes)
      .def_readwrite("proposals", &SynthSpec::proposals)
      .def_readwrite("feature_dim", &SynthSpec::feature_dim)
      .def_readwrite("parts", &SynthSpec::parts)
      .def_readwrite("noise", &SynthSpec::noise)
      .def_readwrite("jitter", &SynthSpec::jitter)
      .def_readwrite("image_width", &SynthSpec::image_width)
      .def_readwrite("image_height", &SynthSpec::image_height);

  m.def("generate_synthetic", &generate_synthetic, py::arg("spec"), py::arg("seed"));

  // ---- pipeline ----
  py::enum_<Pooling>(m, "Pooling")
      .value("MAX", Pooling::kMax)
      .value("AVERAGE", Pooling::kAverage);

  py::class_<PipelineConfig>(m, "PipelineConfig")
      .def(py::init<>())
      .def_readwrite("nu", &PipelineConfig::nu)
      .def_readwrite("tau", &PipelineConfig::tau)
      .def_readwrite("normalize_similarity", &PipelineConfig::normalize_similarity)
      .def_readwrite("continuous_opt", &PipelineConfig::continuous_opt)
      .def_readwrite("ensemble_runs", &PipelineConfig::ensemble_runs)
      .def_readwrite("seed", &PipelineConfig::seed)
      .def_readwrite("prefilter_k", &PipelineConfig::prefilter_k)
      .def_readwrite("exact_standout", &PipelineConfig::exact_standout)
      .def_readwrite("max_sweeps", &PipelineConfig::max_sweeps)
      .def_readwrite("alpha", &PipelineConfig::alpha)
      .def_readwrite("beta", &PipelineConfig::beta)
      .def_readwrite("iters", &PipelineConfig::iters)
      .def_readwrite("top_m", &PipelineConfig::top_m)
      .def_readwrite("pooling", &PipelineConfig::pooling)
      .def_readwrite("workers", &PipelineConfig::workers)
      .def_readwrite("setting", &PipelineConfig::setting)
      .def_readwrite("hough", &PipelineConfig::hough)
      .def_readwrite("standout", &PipelineConfig::standout)
      .def_readwrite("score_cache_dir", &PipelineConfig::score_cache_dir);

  py::class_<DualLog>(m, "DualLog")
      .def_readonly("class_label", &DualLog::class_label)
      .def_readonly("normalization", &DualLog::normalization)
      .def_readonly("bound_normalized", &DualLog::bound_normalized)
      .def_readonly("bound_raw", &DualLog::bound_raw)
      .def_readonly("gap", &DualLog::gap)
      .def_readonly("iterations", &DualLog::iterations);

  py::class_<RunRecord>(m, "RunRecord")
      .def_readonly("assignment", &RunRecord::assignment)
      .def_readonly("objective", &RunRecord::objective);

  py::class_<DiscoveryResult>(m, "DiscoveryResult")
      .def_readonly("image_ids", &DiscoveryResult::image_ids)
      .def_readonly("scores", &DiscoveryResult::scores)
      .def_readonly("runs", &DiscoveryResult::runs)
      .def_readonly("final", &DiscoveryResult::final)
      .def_readonly("duals", &DiscoveryResult::duals)
      .def_readonly("duality_gap", &DiscoveryResult::duality_gap)
      .def_readonly("fallback_fraction", &DiscoveryResult::fallback_fraction);

  m.def("discover", &discover, py::arg("dataset"), py::arg("config") = PipelineConfig{},
        py::call_guard<py::gil_scoped_release>());

  // ---- region-graph components ----
  py::class_<ComponentParams>(m, "ComponentParams")
      .def(py::init<>())
      .def_readwrite("min_size", &ComponentParams::min_size)
      .def_readwrite("max_size", &ComponentParams::max_size)
      .def_readwrite("target_components", &ComponentParams::target_components);

  py::class_<RegionComponent>(m, "RegionComponent")
      .def_readonly("threshold", &RegionComponent::threshold)
      .def_readonly("image_indices", &RegionComponent::image_indices);

  m.def("extract_components", &extract_components, py::arg("final_proposal_per_image"),
        py::arg("final_e"), py::arg("scores"), py::arg("params") = ComponentParams{});
}
