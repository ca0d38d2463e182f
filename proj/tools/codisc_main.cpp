#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <string>

#include <CLI11.hpp>

#include "codisc/errors.hpp"
#include "codisc/eval.hpp"
#include "codisc/graph_export.hpp"
#include "codisc/io.hpp"
#include "codisc/pipeline.hpp"

namespace {

using namespace codisc;

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitData = 2;
constexpr int kExitInternal = 3;

struct SynthArgs {
  std::string spec_path;
  std::string out_path;
  std::uint64_t seed = 0;
  bool sidecar = false;
};

int run_synth(const SynthArgs& args) {
  SynthSpec spec;
  if (!args.spec_path.empty()) spec = load_synth_spec(args.spec_path);
  const Dataset ds = generate_synthetic(spec, args.seed);
  write_dataset(ds, args.out_path, args.sidecar);
  std::cout << "wrote " << ds.n() << " images to " << args.out_path << "\n";
  return kExitOk;
}

struct DiscoverArgs {
  std::string dataset_path;
  std::string out_path;
  std::string trace_path;
  PipelineConfig cfg;
};

int run_discover(const DiscoverArgs& args) {
  const Dataset ds = load_dataset(args.dataset_path);
  const DiscoveryResult result = discover(ds, args.cfg);

  std::string trace_file;
  if (!args.trace_path.empty() && !result.duals.empty()) {
    write_traces(args.trace_path, result);
    trace_file = args.trace_path;
  }
  write_solution(args.out_path, make_solution(args.cfg, result, trace_file));

  double best = 0.0;
  for (const RunRecord& r : result.runs) best = std::max(best, r.objective);
  std::cout << "images: " << ds.n() << "\n";
  std::cout << "stored score entries: " << result.scores.total_entries() << "\n";
  if (!args.cfg.exact_standout) {
    std::cout << "standout fallback fraction: " << result.fallback_fraction << "\n";
  }
  std::cout << "best run objective: " << best << "\n";
  if (result.duality_gap >= 0.0) {
    std::cout << "duality gap: " << result.duality_gap << "\n";
  }
  std::cout << "wrote solution to " << args.out_path << "\n";
  return kExitOk;
}

struct EvaluateArgs {
  std::string dataset_path;
  std::string solution_path;
  std::string setting = "mixed";
  std::string csv_path;
};

int run_evaluate(const EvaluateArgs& args) {
  const Dataset ds = load_dataset(args.dataset_path);
  const SolutionFile sol = load_solution(args.solution_path);
  if (static_cast<int>(sol.images.size()) != ds.n()) {
    throw DataError("solution has " + std::to_string(sol.images.size()) +
                    " images, dataset has " + std::to_string(ds.n()));
  }

  std::map<std::string, Rect> predictions;
  for (std::size_t i = 0; i < sol.images.size(); ++i) {
    const int idx = ds.find_image(sol.images[i]);
    if (idx < 0) throw DataError("solution image '" + sol.images[i] + "' not in dataset");
    if (sol.final_proposals[i].empty()) {
      throw DataError("solution has no final proposal for image '" + sol.images[i] + "'");
    }
    const int k = sol.final_proposals[i].front();
    if (k < 0 || k >= ds.images[idx].num_proposals()) {
      throw DataError("final proposal index out of range for image '" + sol.images[i] + "'");
    }
    predictions[sol.images[i]] = ds.images[idx].proposals[k];
  }

  const CorLocReport report = corloc(predictions, ds);
  if (args.setting == "separate") {
    std::cout << "CorLoc (separate): " << report.separate_percent << "%\n";
    for (const ClassCorLoc& c : report.per_class) {
      std::cout << "  " << (c.label.empty() ? "(unlabeled)" : c.label) << ": " << c.percent()
                << "% (" << c.correct << "/" << c.total << ")\n";
    }
  } else {
    std::cout << "CorLoc (mixed): " << report.mixed_percent << "% (" << report.correct << "/"
              << report.total << ")\n";
  }
  if (!args.csv_path.empty()) {
    write_corloc_csv(args.csv_path, report);
    std::cout << "wrote report to " << args.csv_path << "\n";
  }
  return kExitOk;
}

struct ExportGraphArgs {
  std::string dataset_path;
  std::string solution_path;
  std::string out_path;
  std::string list_path;
  ComponentParams params;
};

int run_export_graph(const ExportGraphArgs& args) {
  const Dataset ds = load_dataset(args.dataset_path);
  const SolutionFile sol = load_solution(args.solution_path);
  const int n = ds.n();
  if (static_cast<int>(sol.images.size()) != n) {
    throw DataError("solution and dataset image counts differ");
  }

  std::vector<std::int32_t> proposal(n);
  std::vector<std::uint8_t> final_e(static_cast<std::size_t>(n) * n, 0);
  std::vector<int> order(n);  // solution row -> dataset index
  for (int i = 0; i < n; ++i) {
    const int idx = ds.find_image(sol.images[i]);
    if (idx < 0) throw DataError("solution image '" + sol.images[i] + "' not in dataset");
    order[i] = idx;
  }
  for (int i = 0; i < n; ++i) {
    if (sol.final_proposals[i].empty()) throw DataError("missing final proposal");
    proposal[order[i]] = sol.final_proposals[i].front();
    for (std::int32_t j : sol.final_e[i]) {
      final_e[static_cast<std::size_t>(order[i]) * n + order[j]] = 1;
    }
  }

  // Stand-out scores are only needed for linked pairs; recompute them with
  // the configuration echoed in the solution.
  PipelineConfig cfg = pipeline_config_from_json(sol.config);
  NeighborMask linked(static_cast<std::size_t>(n) * n, 0);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      if (i == j) continue;
      if (final_e[static_cast<std::size_t>(i) * n + j] ||
          final_e[static_cast<std::size_t>(j) * n + i]) {
        linked[static_cast<std::size_t>(i) * n + j] = 1;
      }
    }
  }
  const ScoreSet scores = compute_scores(ds, cfg, &linked, nullptr);

  const std::vector<RegionComponent> components =
      extract_components(proposal, final_e, scores, args.params);
  const std::string dot = components_dot(ds, proposal, final_e, scores, components);
  {
    std::ofstream out(args.out_path, std::ios::trunc);
    if (!out) throw DataError("cannot write " + args.out_path);
    out << dot;
  }
  const std::string listing = components_listing(ds, components);
  if (args.list_path.empty()) {
    std::cout << listing;
  } else {
    std::ofstream out(args.list_path, std::ios::trunc);
    if (!out) throw DataError("cannot write " + args.list_path);
    out << listing;
  }
  std::cout << "extracted " << components.size() << " components; wrote " << args.out_path
            << "\n";
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"codisc: unsupervised joint image matching and object discovery"};
  app.require_subcommand(1);

  SynthArgs synth;
  CLI::App* synth_cmd = app.add_subcommand("synth", "Generate a synthetic dataset");
  synth_cmd->add_option("--spec", synth.spec_path, "Generator spec JSON file");
  synth_cmd->add_option("--out", synth.out_path, "Output dataset (JSON lines)")->required();
  synth_cmd->add_option("--seed", synth.seed, "Generator seed");
  synth_cmd->add_flag("--sidecar-features", synth.sidecar,
                      "Store features as binary float32 sidecars");

  DiscoverArgs disc;
  CLI::App* disc_cmd = app.add_subcommand("discover", "Run the full discovery pipeline");
  disc_cmd->add_option("--dataset", disc.dataset_path, "Input dataset (JSON lines)")->required();
  disc_cmd->add_option("--out", disc.out_path, "Output solution JSON")->required();
  disc_cmd->add_option("--nu", disc.cfg.nu, "Max regions per image")->capture_default_str();
  disc_cmd->add_option("--tau", disc.cfg.tau, "Max links per image")->capture_default_str();
  disc_cmd->add_option("--top-k", disc.cfg.standout.top_k, "Kept entries per score matrix")
      ->capture_default_str();
  disc_cmd->add_option("--normalize-similarity", disc.cfg.normalize_similarity,
                       "Divide similarity by p_i*p_j")
      ->capture_default_str();
  disc_cmd->add_option("--continuous-opt", disc.cfg.continuous_opt,
                       "Start greedy ascent from the dual average")
      ->capture_default_str();
  disc_cmd->add_option("--ensemble-runs", disc.cfg.ensemble_runs, "Greedy runs to pool")
      ->capture_default_str();
  disc_cmd->add_option("--seed", disc.cfg.seed, "Master seed")->capture_default_str();
  disc_cmd->add_option("--prefilter-k", disc.cfg.prefilter_k,
                       "Neighbor candidates per image (0 = off)")
      ->capture_default_str();
  disc_cmd->add_flag("--exact-standout", disc.cfg.exact_standout,
                     "Exact background maxima instead of the fast heuristic");
  disc_cmd->add_option("--max-sweeps", disc.cfg.max_sweeps, "Greedy sweep limit")
      ->capture_default_str();
  disc_cmd->add_option("--alpha", disc.cfg.alpha, "Lambda step size")->capture_default_str();
  disc_cmd->add_option("--beta", disc.cfg.beta, "Mu step size")->capture_default_str();
  disc_cmd->add_option("--iters", disc.cfg.iters, "Dual iterations")->capture_default_str();
  disc_cmd->add_option("--top-m", disc.cfg.top_m, "Final regions kept per image")
      ->capture_default_str();
  std::string pooling = "max";
  disc_cmd->add_option("--pooling", pooling, "Ensemble pooling: max or average")
      ->check(CLI::IsMember({"max", "average"}))
      ->capture_default_str();
  disc_cmd->add_option("--workers", disc.cfg.workers, "Worker threads (0 = auto)")
      ->capture_default_str();
  disc_cmd->add_option("--setting", disc.cfg.setting, "mixed or separate")
      ->check(CLI::IsMember({"mixed", "separate"}))
      ->capture_default_str();
  disc_cmd->add_option("--standout-q", disc.cfg.standout.q, "Fast stand-out queue size")
      ->capture_default_str();
  disc_cmd->add_option("--standout-rho", disc.cfg.standout.rho, "Part containment ratio")
      ->capture_default_str();
  disc_cmd->add_option("--standout-delta", disc.cfg.standout.delta, "Background overlap ratio")
      ->capture_default_str();
  disc_cmd->add_option("--standout-gamma", disc.cfg.standout.gamma, "Background area ratio")
      ->capture_default_str();
  disc_cmd->add_option("--score-cache", disc.cfg.score_cache_dir,
                       "Directory for cached score matrices");
  disc_cmd->add_option("--trace", disc.trace_path, "Per-iteration dual trace CSV");
  disc_cmd->add_option("--dump-conflict-graph", disc.cfg.dump_conflict_graph,
                       "Write the first Lagrangian conflict graph as DOT");

  EvaluateArgs eval;
  CLI::App* eval_cmd = app.add_subcommand("evaluate", "CorLoc report for a solution");
  eval_cmd->add_option("--dataset", eval.dataset_path, "Dataset (JSON lines)")->required();
  eval_cmd->add_option("--solution", eval.solution_path, "Solution JSON")->required();
  eval_cmd->add_option("--setting", eval.setting, "mixed or separate")
      ->check(CLI::IsMember({"mixed", "separate"}))
      ->capture_default_str();
  eval_cmd->add_option("--csv", eval.csv_path, "Also write the report as CSV");

  ExportGraphArgs graph;
  CLI::App* graph_cmd =
      app.add_subcommand("export-graph", "Extract region-graph components as DOT");
  graph_cmd->add_option("--dataset", graph.dataset_path, "Dataset (JSON lines)")->required();
  graph_cmd->add_option("--solution", graph.solution_path, "Solution JSON")->required();
  graph_cmd->add_option("--out", graph.out_path, "Output DOT file")->required();
  graph_cmd->add_option("--list", graph.list_path, "Component listing file (default stdout)");
  graph_cmd->add_option("--min-size", graph.params.min_size, "Smallest emitted component")
      ->capture_default_str();
  graph_cmd->add_option("--max-size", graph.params.max_size,
                        "Largest emitted component (0 = n/2)")
      ->capture_default_str();
  graph_cmd->add_option("--target-components", graph.params.target_components,
                        "Stop after this many components")
      ->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  try {
    if (*synth_cmd) return run_synth(synth);
    if (*disc_cmd) {
      disc.cfg.pooling = pooling == "average" ? Pooling::kAverage : Pooling::kMax;
      return run_discover(disc);
    }
    if (*eval_cmd) return run_evaluate(eval);
    if (*graph_cmd) return run_export_graph(graph);
  } catch (const DataError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitData;
  } catch (const InternalError& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return kExitInternal;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return kExitInternal;
  }
  return kExitUsage;
}
