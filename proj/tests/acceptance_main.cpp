// Acceptance suite: one pass/fail line per criterion, nonzero exit when a
// gated criterion fails. The end-to-end criteria drive the real CLI binary;
// everything else runs in-process against independent oracles.
//
// Usage: codisc_acceptance <path-to-codisc-cli> [scratch-dir]

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "codisc/dual.hpp"
#include "codisc/eval.hpp"
#include "codisc/graph_export.hpp"
#include "codisc/hough.hpp"
#include "codisc/io.hpp"
#include "codisc/pbf.hpp"
#include "codisc/pipeline.hpp"
#include "codisc/rng.hpp"
#include "codisc/rounding.hpp"
#include "codisc/standout.hpp"

using namespace codisc;
namespace fs = std::filesystem;

namespace {

int g_failures = 0;

void report(int criterion, bool pass, const std::string& detail) {
  std::cout << (pass ? "[PASS]" : "[FAIL]") << " criterion " << criterion << ": " << detail
            << std::endl;
  if (!pass) ++g_failures;
}

void report_soft(int criterion, bool pass, const std::string& detail) {
  std::cout << "[REPORT] criterion " << criterion << " (" << (pass ? "holds" : "does not hold")
            << ", not gated): " << detail << std::endl;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

// ---------- shared generators ----------

ScoreSet random_scores(Rng& rng, const std::vector<int>& p, double density,
                       double max_value = 3.0) {
  const int n = static_cast<int>(p.size());
  ScoreSet s(n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      if (i == j) continue;
      std::vector<ScoreEntry> entries;
      for (int k = 0; k < p[i]; ++k) {
        for (int l = 0; l < p[j]; ++l) {
          if (rng.uniform() < density) entries.push_back({k, l, rng.uniform(0.0, max_value)});
        }
      }
      s.set(i, j, SparseScoreMatrix::from_entries(p[i], p[j], std::move(entries)));
    }
  }
  return s;
}

ImageRecord random_image(Rng& rng, const std::string& id, int p, int d) {
  ImageRecord im;
  im.id = id;
  im.width = 120;
  im.height = 90;
  for (int k = 0; k < p; ++k) {
    const double w = rng.uniform(4, 40);
    const double h = rng.uniform(4, 30);
    im.proposals.push_back({rng.uniform(0, 120 - w), rng.uniform(0, 90 - h), w, h});
    std::vector<double> f(d);
    for (double& v : f) v = rng.normal();
    im.features.push_back(std::move(f));
  }
  return im;
}

// ---------- criterion 1 ----------

void criterion_1() {
  const auto t0 = std::chrono::steady_clock::now();
  Rng rng(10001);
  // Coefficients on a dyadic grid (multiples of 2^-10 in [0,10]) with a
  // power-of-two scale keep the integer scaling lossless, so value equality
  // is exact rather than probabilistic.
  const PbfOptions exact_scale{/*scale=*/1099511627776.0};  // 2^40
  int mismatches = 0;
  for (int trial = 0; trial < 200; ++trial) {
    const int n = 3 + static_cast<int>(rng.uniform_index(18));  // N <= 20
    CubicPBF f(n);
    const auto coeff = [&rng] {
      return static_cast<double>(rng.uniform_index(10 * 1024 + 1)) / 1024.0;
    };
    const int nu = static_cast<int>(rng.uniform_index(9));
    for (int i = 0; i < nu; ++i) f.add_unary(static_cast<int>(rng.uniform_index(n)), coeff());
    const int nt = static_cast<int>(rng.uniform_index(16));
    for (int i = 0; i < nt; ++i) {
      const int a = static_cast<int>(rng.uniform_index(n));
      const int b = static_cast<int>(rng.uniform_index(n));
      const int c = static_cast<int>(rng.uniform_index(n));
      if (a == b || a == c || b == c) continue;
      f.add_triple(a, b, c, coeff());
    }
    const MaximizeResult flow = maximize(f, exact_scale);
    const MaximizeResult brute = brute_force_maximize(f);
    if (flow.value != brute.value || flow.value != f.evaluate(flow.point)) ++mismatches;
  }
  const double dt = seconds_since(t0);
  std::ostringstream detail;
  detail << "pbf flow maximizer vs exhaustive oracle, 200 instances, " << mismatches
         << " mismatches, " << dt << " s (< 60 s required)";
  report(1, mismatches == 0 && dt < 60.0, detail.str());
}

// ---------- criterion 2 ----------

void criterion_2() {
  Rng rng(10002);
  int bad = 0;
  for (int instance = 0; instance < 100; ++instance) {
    const int n = 2 + static_cast<int>(rng.uniform_index(2));
    std::vector<int> p(n);
    for (int& pi : p) pi = 1 + static_cast<int>(rng.uniform_index(3));
    const ScoreSet s = random_scores(rng, p, 0.5);
    DualConfig cfg;
    cfg.nu = 1 + static_cast<int>(rng.uniform_index(2));
    cfg.tau = 1 + static_cast<int>(rng.uniform_index(2));
    std::vector<double> lambda(n), mu(n);
    for (double& v : lambda) v = rng.uniform(0.0, 2.0);
    for (double& v : mu) v = rng.uniform(0.0, 2.0);
    const VariableLayout layout(p);
    const CubicPBF f = build_lagrangian(s, layout, lambda, mu, cfg);

    for (int trial = 0; trial < 50; ++trial) {
      Assignment a(p);
      for (auto& xi : a.x) {
        for (auto& v : xi) v = rng.uniform() < 0.5;
      }
      for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
          if (i != j) a.set_e(i, j, rng.uniform() < 0.5);
        }
      }
      // Direct transcription of the Lagrangian at a binary point.
      double direct = objective_value(a, s);
      for (int i = 0; i < n; ++i) {
        direct -= lambda[i] * (a.x_row_sum(i) - cfg.nu);
        direct -= mu[i] * (a.e_row_sum(i) - cfg.tau);
      }
      std::vector<std::uint8_t> point(layout.num_vars(), 0);
      for (int i = 0; i < n; ++i) {
        for (int k = 0; k < p[i]; ++k) point[layout.x_var(i, k)] = a.x[i][k];
        for (int j = 0; j < n; ++j) {
          if (i != j) point[layout.e_var(i, j)] = a.e_at(i, j);
        }
      }
      const double built = f.evaluate(point);
      const double tol = 1e-9 * std::max(1.0, std::abs(direct));
      if (std::abs(built - direct) > tol) ++bad;
    }
  }
  report(2, bad == 0,
         "lagrangian construction vs direct transcription, 100 instances x 50 points, " +
             std::to_string(bad) + " beyond 1e-9");
}

// ---------- criterion 3 ----------

void criterion_3() {
  Rng rng(10003);
  int violations = 0;
  double worst_gap = 0.0;
  for (int instance = 0; instance < 20; ++instance) {
    const std::vector<int> p{3, 3, 3};
    const ScoreSet s = random_scores(rng, p, 0.3);
    DualConfig cfg;
    cfg.nu = 1;
    cfg.tau = 1;
    cfg.iters = 60;
    const DualResult r = run_dual(s, VariableLayout(p), cfg);

    // Exhaustive constrained optimum over all binary points with
    // x_i . 1 <= 1 and e_i . 1 <= 1.
    double best = 0.0;
    for (std::uint32_t mask = 0; mask < (1u << 15); ++mask) {
      Assignment a(p);
      int bit = 0;
      for (int i = 0; i < 3; ++i) {
        for (int k = 0; k < 3; ++k) a.x[i][k] = (mask >> bit++) & 1u;
      }
      for (int i = 0; i < 3; ++i) {
        for (int j = 0; j < 3; ++j) {
          if (i != j) a.set_e(i, j, (mask >> bit++) & 1u);
        }
      }
      bool feasible = true;
      for (int i = 0; i < 3 && feasible; ++i) {
        feasible = a.x_row_sum(i) <= 1 && a.e_row_sum(i) <= 1;
      }
      if (feasible) best = std::max(best, objective_value(a, s));
    }

    if (r.dual_bound < best - 1e-9) ++violations;
    if (r.dual_bound > 0.0) {
      const double gap = duality_gap(r.dual_bound, std::min(best, r.dual_bound));
      if (gap < 0.0) ++violations;
      worst_gap = std::max(worst_gap, gap);
    }
  }
  report(3, violations == 0,
         "weak duality vs exhaustive optimum on 20 instances (n=3, p=3, nu=tau=1), " +
             std::to_string(violations) + " violations");
}

// ---------- criteria 4, 8, 10: CLI end to end ----------

struct CliRuns {
  bool synth_ok = false;
  bool runs_ok = false;
  bool bytes_identical = false;
  double discover_seconds = 0.0;
  double gap = -1.0;
  double corloc_mixed = -1.0;
  fs::path dataset;
  fs::path solution;
};

std::string quoted(const fs::path& p) { return "\"" + p.string() + "\""; }

bool run_cmd(const std::string& cmd) { return std::system(cmd.c_str()) == 0; }

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream out;
  out << in.rdbuf();
  return out.str();
}

CliRuns run_cli_pipeline(const fs::path& cli, const fs::path& dir) {
  CliRuns r;
  r.dataset = dir / "default.jsonl";
  r.solution = dir / "solution.json";
  const fs::path solution2 = dir / "solution2.json";
  const fs::path log = dir / "cli.log";

  r.synth_ok = run_cmd(quoted(cli) + " synth --seed 0 --out " + quoted(r.dataset) + " >> " +
                       quoted(log) + " 2>&1");
  if (!r.synth_ok) return r;

  const auto t0 = std::chrono::steady_clock::now();
  const std::string discover_flags = " discover --seed 0 --dataset " + quoted(r.dataset);
  if (!run_cmd(quoted(cli) + discover_flags + " --out " + quoted(r.solution) + " >> " +
               quoted(log) + " 2>&1")) {
    return r;
  }
  r.discover_seconds = seconds_since(t0);
  if (!run_cmd(quoted(cli) + discover_flags + " --out " + quoted(solution2) + " >> " +
               quoted(log) + " 2>&1")) {
    return r;
  }
  r.runs_ok = true;
  r.bytes_identical = slurp(r.solution) == slurp(solution2);

  const SolutionFile sol = load_solution(r.solution);
  r.gap = sol.duality_gap;

  const fs::path csv = dir / "corloc.csv";
  if (!run_cmd(quoted(cli) + " evaluate --dataset " + quoted(r.dataset) + " --solution " +
               quoted(r.solution) + " --csv " + quoted(csv) + " >> " + quoted(log) + " 2>&1")) {
    r.runs_ok = false;
    return r;
  }
  std::ifstream in(csv);
  std::string line;
  while (std::getline(in, line)) {
    if (line.rfind("mixed,", 0) == 0) {
      r.corloc_mixed = std::stod(line.substr(line.rfind(',') + 1));
    }
  }
  return r;
}

void criterion_4(const CliRuns& r) {
  std::ostringstream detail;
  detail << "duality gap on the default synthetic run: " << r.gap
         << " (<= 0.15 required), discover wall time " << r.discover_seconds
         << " s (< 600 s required)";
  report(4, r.runs_ok && r.gap >= 0.0 && r.gap <= 0.15 && r.discover_seconds < 600.0,
         detail.str());
}

void criterion_8(const CliRuns& r) {
  std::ostringstream detail;
  detail << "synth + discover + evaluate: mixed CorLoc " << r.corloc_mixed
         << "% (>= 90 required), repeated run bytes "
         << (r.bytes_identical ? "identical" : "differ");
  report(8, r.runs_ok && r.corloc_mixed >= 90.0 && r.bytes_identical, detail.str());
}

void criterion_10(const CliRuns& r, const fs::path& cli, const fs::path& dir) {
  const fs::path dot = dir / "graph.dot";
  const fs::path listing = dir / "components.txt";
  const fs::path log = dir / "cli.log";
  bool ok = r.runs_ok && run_cmd(quoted(cli) + " export-graph --dataset " + quoted(r.dataset) +
                                 " --solution " + quoted(r.solution) + " --out " + quoted(dot) +
                                 " --list " + quoted(listing) + " >> " + quoted(log) + " 2>&1");
  int majority_pure = 0;
  int inspected = 0;
  if (ok) {
    // Count, among the first three components, those whose majority class
    // holds a strict majority.
    const Dataset ds = load_dataset(r.dataset);
    const SolutionFile sol = load_solution(r.solution);
    const std::string text = slurp(listing);
    std::istringstream in(text);
    std::string line;
    std::vector<std::vector<std::string>> members;
    while (std::getline(in, line)) {
      if (line.rfind("component ", 0) == 0) {
        if (static_cast<int>(members.size()) == 3) break;
        members.emplace_back();
      } else if (!members.empty() && line.rfind("  synthetic", 0) == 0) {
        const auto open = line.find('(');
        const auto close = line.find(')');
        if (open != std::string::npos && close != std::string::npos) {
          members.back().push_back(line.substr(open + 1, close - open - 1));
        }
      }
    }
    inspected = static_cast<int>(members.size());
    for (const auto& comp : members) {
      std::map<std::string, int> count;
      for (const std::string& label : comp) count[label] += 1;
      int best = 0;
      for (const auto& [label, c] : count) best = std::max(best, c);
      if (2 * best > static_cast<int>(comp.size())) ++majority_pure;
    }
  }
  std::ostringstream detail;
  detail << "component extraction: " << majority_pure << " of the first " << inspected
         << " components majority-pure (>= 2 of 3 required)";
  report(10, ok && inspected >= 2 && majority_pure >= std::min(2, inspected), detail.str());
}

// ---------- criterion 5 ----------

void criterion_5() {
  Rng rng(10005);
  int feasibility_bad = 0;
  int monotonicity_bad = 0;
  for (int trial = 0; trial < 100; ++trial) {
    const int n = 3 + static_cast<int>(rng.uniform_index(3));
    std::vector<int> p(n);
    for (int& pi : p) pi = 2 + static_cast<int>(rng.uniform_index(4));
    const ScoreSet s = random_scores(rng, p, 0.5);
    RoundingOptions opts;
    opts.nu = 1 + static_cast<int>(rng.uniform_index(2));
    opts.tau = 1 + static_cast<int>(rng.uniform_index(n - 1));
    opts.seed = rng.bits();

    FractionalAssignment start(p);
    for (auto& xi : start.x) {
      for (double& v : xi) v = rng.uniform();
    }
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j) {
        if (i != j) start.set_e(i, j, rng.uniform());
      }
    }

    const AscentTrace trace = ascent_trace(start, s, opts);
    for (int i = 0; i < n; ++i) {
      if (trace.final.x_row_sum(i) != opts.nu || trace.final.e_row_sum(i) != opts.tau) {
        ++feasibility_bad;
      }
    }
    for (std::size_t t = 1; t < trace.objective_per_sweep.size(); ++t) {
      if (trace.objective_per_sweep[t] < trace.objective_per_sweep[t - 1] - 1e-12) {
        ++monotonicity_bad;
      }
    }
  }
  report(5, feasibility_bad == 0 && monotonicity_bad == 0,
         "greedy rounding on 100 random instances: " + std::to_string(feasibility_bad) +
             " row-sum violations, " + std::to_string(monotonicity_bad) +
             " trace decreases");
}

// ---------- criterion 6 ----------

void criterion_6() {
  Rng rng(10006);
  int q0_bad = 0;
  int fallback_bad = 0;
  for (int trial = 0; trial < 100; ++trial) {
    const int pa = 2 + static_cast<int>(rng.uniform_index(29));
    const int pb = 2 + static_cast<int>(rng.uniform_index(29));
    const ImageRecord a = random_image(rng, "a", pa, 4);
    const ImageRecord b = random_image(rng, "b", pb, 4);
    StandoutConfig cfg;
    const ContainmentIndex ca = build_containment(a, cfg);
    const ContainmentIndex cb = build_containment(b, cfg);
    DenseMatrix s(pa, pb);
    for (double& v : s.data) v = rng.uniform() < 0.2 ? 0.0 : rng.uniform(0.0, 1.0);
    const DenseMatrix exact = standout_exact(s, ca, cb);

    StandoutConfig zero_q = cfg;
    zero_q.q = 0;
    if (standout_fast(s, ca, cb, zero_q).scores.data != exact.data) ++q0_bad;

    // At an arbitrary queue size, entries never stamped by the queue pass
    // (the fallback path) must equal the exact value.
    StandoutConfig small_q = cfg;
    small_q.q = static_cast<int>(rng.uniform_index(20));
    const StandoutResult fast = standout_fast(s, ca, cb, small_q);
    std::vector<std::int32_t> order;
    for (std::int32_t idx = 0; idx < pa * pb; ++idx) {
      if (s.data[idx] > 0.0) order.push_back(idx);
    }
    std::sort(order.begin(), order.end(), [&](std::int32_t x, std::int32_t y) {
      if (s.data[x] != s.data[y]) return s.data[x] > s.data[y];
      return x < y;
    });
    order.resize(std::min<std::size_t>(small_q.q, order.size()));
    std::vector<std::uint8_t> stamped(static_cast<std::size_t>(pa) * pb, 0);
    for (std::int32_t idx : order) {
      const int kp = idx / pb;
      const int lp = idx % pb;
      for (std::int32_t k : ca.parts[kp]) {
        for (std::int32_t l : cb.parts[lp]) {
          if (k == kp && l == lp) continue;
          stamped[static_cast<std::size_t>(k) * pb + l] = 1;
        }
      }
    }
    for (int idx = 0; idx < pa * pb; ++idx) {
      if (s.data[idx] > 0.0 && !stamped[idx] && fast.scores.data[idx] != exact.data[idx]) {
        ++fallback_bad;
      }
    }
  }
  report(6, q0_bad == 0 && fallback_bad == 0,
         "stand-out heuristic vs exact oracle: " + std::to_string(q0_bad) +
             " q=0 mismatches, " + std::to_string(fallback_bad) + " fallback mismatches");
}

// ---------- criterion 7 ----------

void criterion_7() {
  Rng rng(10007);
  int factorization_bad = 0;
  int normalization_bad = 0;
  const HoughSpace space;
  for (int trial = 0; trial < 100; ++trial) {
    const int pa = 2 + static_cast<int>(rng.uniform_index(19));
    const int pb = 2 + static_cast<int>(rng.uniform_index(19));
    const ImageRecord a = random_image(rng, "a", pa, 5);
    const ImageRecord b = random_image(rng, "b", pb, 5);
    const DenseMatrix fast = similarity_matrix(a, b, space, false);

    // Direct double sum over offsets and proposal pairs.
    for (int k = 0; k < pa; ++k) {
      for (int l = 0; l < pb; ++l) {
        const int bin =
            offset_bin(a.proposals[k], b.proposals[l], a.width, a.height, b.width, b.height,
                       space);
        double direct = 0.0;
        if (bin != space.overflow_bin()) {
          double mass = 0.0;
          for (int kp = 0; kp < pa; ++kp) {
            for (int lp = 0; lp < pb; ++lp) {
              if (offset_bin(a.proposals[kp], b.proposals[lp], a.width, a.height, b.width,
                             b.height, space) == bin) {
                mass += appearance_similarity(a.features[kp], b.features[lp]);
              }
            }
          }
          direct = appearance_similarity(a.features[k], b.features[l]) * mass;
        }
        const double got = fast.at(k, l);
        if (std::abs(got - direct) > 1e-9 * std::max(1.0, std::abs(direct))) {
          ++factorization_bad;
        }
      }
    }

    const DenseMatrix normalized = similarity_matrix(a, b, space, true);
    const double inv = 1.0 / (static_cast<double>(pa) * pb);
    for (std::size_t i = 0; i < normalized.data.size(); ++i) {
      if (normalized.data[i] != fast.data[i] * inv) ++normalization_bad;
    }
  }
  report(7, factorization_bad == 0 && normalization_bad == 0,
         "similarity factorization vs direct double sum: " +
             std::to_string(factorization_bad) + " entries beyond 1e-9, " +
             std::to_string(normalization_bad) + " normalization mismatches");
}

// ---------- criterion 9 (soft) ----------

void criterion_9() {
  SynthSpec spec;
  spec.n = 30;
  spec.classes = 3;
  spec.proposals = 10;
  spec.feature_dim = 16;
  spec.parts = 2;
  spec.noise = 0.45;
  spec.jitter = 0.3;

  auto corloc_of = [&](const Dataset& ds, int runs, std::uint64_t seed) {
    PipelineConfig cfg;
    cfg.nu = 2;
    cfg.tau = 4;
    cfg.continuous_opt = false;  // the ablation axis is the ensemble
    cfg.ensemble_runs = runs;
    cfg.seed = seed;
    const DiscoveryResult r = discover(ds, cfg);
    std::map<std::string, Rect> pred;
    for (int i = 0; i < ds.n(); ++i) {
      pred[ds.images[i].id] = ds.images[i].proposals[r.final.proposals[i].front()];
    }
    return corloc(pred, ds).mixed_percent;
  };

  std::vector<double> with_em, without_em;
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const Dataset ds = generate_synthetic(spec, 900 + seed);
    with_em.push_back(corloc_of(ds, 5, seed));
    without_em.push_back(corloc_of(ds, 1, seed));
  }
  auto mean = [](const std::vector<double>& v) {
    double s = 0.0;
    for (double x : v) s += x;
    return s / static_cast<double>(v.size());
  };
  auto stddev = [&](const std::vector<double>& v) {
    const double m = mean(v);
    double s = 0.0;
    for (double x : v) s += (x - m) * (x - m);
    return std::sqrt(s / static_cast<double>(v.size()));
  };
  const double m_with = mean(with_em), m_without = mean(without_em);
  const double s_with = stddev(with_em), s_without = stddev(without_em);
  std::ostringstream detail;
  detail << "ensemble ablation over 10 seeds: CorLoc mean " << m_with << "% (L=5) vs "
         << m_without << "% (L=1), std " << s_with << " vs " << s_without;
  report_soft(9, m_with >= m_without && s_with <= s_without, detail.str());
}

}  // namespace

int main(int argc, char** argv) {
  if (argc < 2) {
    std::cerr << "usage: codisc_acceptance <path-to-codisc-cli> [scratch-dir]\n";
    return 2;
  }
  const fs::path cli = argv[1];
  fs::path scratch;
  if (argc >= 3) {
    scratch = argv[2];
  } else {
    scratch = fs::temp_directory_path() / "codisc_acceptance";
  }
  fs::remove_all(scratch);
  fs::create_directories(scratch);

  try {
    criterion_1();
    criterion_2();
    criterion_3();
    const CliRuns cli_runs = run_cli_pipeline(cli, scratch);
    criterion_4(cli_runs);
    criterion_5();
    criterion_6();
    criterion_7();
    criterion_8(cli_runs);
    criterion_9();
    criterion_10(cli_runs, cli, scratch);
  } catch (const std::exception& e) {
    std::cout << "[FAIL] acceptance suite aborted: " << e.what() << std::endl;
    return 1;
  }

  if (g_failures == 0) {
    std::cout << "all gated criteria passed" << std::endl;
    return 0;
  }
  std::cout << g_failures << " gated criteria failed" << std::endl;
  return 1;
}
