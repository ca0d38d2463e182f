#include "codisc/pbf.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "codisc/errors.hpp"
#include "codisc/maxflow.hpp"

namespace codisc {

namespace {

void check_var(int var, int num_vars) {
  if (var < 0 || var >= num_vars) {
    throw DataError("pbf variable " + std::to_string(var) + " outside [0," +
                    std::to_string(num_vars) + ")");
  }
}

void check_coeff(double coeff) {
  if (!(coeff >= 0.0)) throw DataError("pbf coefficients must be nonnegative");
}

}  // namespace

void CubicPBF::add_unary(int var, double coeff) {
  check_var(var, num_vars_);
  check_coeff(coeff);
  unary_.push_back({var, coeff});
}

void CubicPBF::add_triple(int a, int b, int c, double coeff) {
  check_var(a, num_vars_);
  check_var(b, num_vars_);
  check_var(c, num_vars_);
  if (a == b || a == c || b == c) {
    throw DataError("pbf triple members must be distinct");
  }
  check_coeff(coeff);
  triples_.push_back({{a, b, c}, coeff});
}

void CubicPBF::set_unary_coeff(std::size_t term_index, double coeff) {
  if (term_index >= unary_.size()) {
    throw InternalError("set_unary_coeff: term index out of range");
  }
  check_coeff(coeff);
  unary_[term_index].coeff = coeff;
}

double CubicPBF::evaluate(const std::vector<std::uint8_t>& point) const {
  if (static_cast<int>(point.size()) != num_vars_) {
    throw DataError("pbf evaluate: point has " + std::to_string(point.size()) +
                    " entries, function has " + std::to_string(num_vars_) + " variables");
  }
  double v = constant_;
  for (const UnaryTerm& u : unary_) {
    if (!point[u.var]) v += u.coeff;
  }
  for (const TripleTerm& t : triples_) {
    if (point[t.vars[0]] && point[t.vars[1]] && point[t.vars[2]]) v += t.coeff;
  }
  return v;
}

struct CubicPbfSolver::Impl {
  CubicPBF f;
  PbfOptions options;
  MaxFlowGraph graph;
  std::vector<int> source_edges;  // per unary term
  std::vector<int> sink_edges;    // per triple
  std::vector<int> inf_edges;     // conflict edges V-W
  std::vector<std::int64_t> triple_caps;

  static constexpr int kSource = 0;
  static constexpr int kSink = 1;

  Impl(CubicPBF fn, PbfOptions opts)
      : f(std::move(fn)),
        options(opts),
        graph(2 + static_cast<int>(f.unary().size()) + static_cast<int>(f.triples().size())) {
    if (!(options.scale > 0.0)) throw DataError("pbf scale must be positive");
    const int num_unary = static_cast<int>(f.unary().size());

    // V nodes follow the source/sink, then W nodes; a variable may carry
    // several unary terms, each with its own node.
    std::vector<std::vector<int>> var_vnodes(f.num_vars());
    source_edges.reserve(f.unary().size());
    for (int u = 0; u < num_unary; ++u) {
      var_vnodes[f.unary()[u].var].push_back(2 + u);
      source_edges.push_back(graph.add_edge(kSource, 2 + u, 0));
    }
    sink_edges.reserve(f.triples().size());
    triple_caps.reserve(f.triples().size());
    for (std::size_t t = 0; t < f.triples().size(); ++t) {
      const int w = 2 + num_unary + static_cast<int>(t);
      triple_caps.push_back(scaled(f.triples()[t].coeff));
      sink_edges.push_back(graph.add_edge(w, kSink, triple_caps.back()));
      for (int var : f.triples()[t].vars) {
        for (int v : var_vnodes[var]) {
          inf_edges.push_back(graph.add_edge(v, w, 0));
        }
      }
    }
  }

  std::int64_t scaled(double coeff) const {
    const double s = coeff * options.scale;
    if (!(s <= 9.0e17)) {
      throw DataError("pbf coefficient overflow under integer scaling (coefficient " +
                      std::to_string(coeff) + ", scale " + std::to_string(options.scale) + ")");
    }
    return std::llround(s);
  }

  MaximizeResult solve() {
    // Refresh scaled capacities; the triple side is fixed, the unary side
    // tracks the current coefficients.
    unsigned __int128 total = 0;
    for (std::size_t u = 0; u < f.unary().size(); ++u) {
      const std::int64_t c = scaled(f.unary()[u].coeff);
      graph.set_capacity(source_edges[u], c);
      total += static_cast<unsigned __int128>(c);
    }
    for (std::int64_t c : triple_caps) total += static_cast<unsigned __int128>(c);
    if (total + 1 > static_cast<unsigned __int128>(std::numeric_limits<std::int64_t>::max() / 2)) {
      throw DataError("pbf coefficient overflow under integer scaling (total capacity)");
    }
    // Uncuttable stand-in for infinity: one more than all finite capacity.
    const std::int64_t inf = static_cast<std::int64_t>(total) + 1;
    for (int e : inf_edges) graph.set_capacity(e, inf);

    graph.max_flow(kSource, kSink);
    const std::vector<bool> in_source_side = graph.min_cut_source_side(kSource);

    // Stable set: V nodes on the source side, W nodes on the sink side.
    // Selected complemented monomials force their variable to 0; everything
    // else (selected triples, free variables) is 1.
    MaximizeResult result;
    result.point.assign(f.num_vars(), 1);
    const int num_unary = static_cast<int>(f.unary().size());
    for (int u = 0; u < num_unary; ++u) {
      if (in_source_side[2 + u]) result.point[f.unary()[u].var] = 0;
    }
    for (std::size_t t = 0; t < f.triples().size(); ++t) {
      if (in_source_side[2 + num_unary + static_cast<int>(t)]) continue;
      for (int var : f.triples()[t].vars) {
        if (!result.point[var]) {
          throw InternalError("pbf min cut selected conflicting monomials");
        }
      }
    }
    result.value = f.evaluate(result.point);
    return result;
  }
};

CubicPbfSolver::CubicPbfSolver(CubicPBF f, PbfOptions options)
    : impl_(std::make_unique<Impl>(std::move(f), options)) {}

CubicPbfSolver::~CubicPbfSolver() = default;
CubicPbfSolver::CubicPbfSolver(CubicPbfSolver&&) noexcept = default;
CubicPbfSolver& CubicPbfSolver::operator=(CubicPbfSolver&&) noexcept = default;

void CubicPbfSolver::set_unary_coeff(std::size_t term_index, double coeff) {
  impl_->f.set_unary_coeff(term_index, coeff);
}

void CubicPbfSolver::set_constant(double c) { impl_->f.set_constant(c); }

MaximizeResult CubicPbfSolver::solve() { return impl_->solve(); }

const CubicPBF& CubicPbfSolver::function() const { return impl_->f; }

MaximizeResult maximize(const CubicPBF& f, PbfOptions options) {
  return CubicPbfSolver(f, options).solve();
}

MaximizeResult brute_force_maximize(const CubicPBF& f) {
  if (f.num_vars() > 25) {
    throw DataError("brute_force_maximize supports at most 25 variables");
  }
  MaximizeResult best;
  best.point.assign(f.num_vars(), 0);
  best.value = -std::numeric_limits<double>::infinity();
  std::vector<std::uint8_t> point(f.num_vars(), 0);
  const std::uint32_t limit = 1u << f.num_vars();
  for (std::uint32_t mask = 0; mask < limit; ++mask) {
    for (int k = 0; k < f.num_vars(); ++k) point[k] = (mask >> k) & 1u;
    const double v = f.evaluate(point);
    if (v > best.value) {
      best.value = v;
      best.point = point;
    }
  }
  return best;
}

std::string conflict_graph_dot(const CubicPBF& f) {
  std::ostringstream out;
  out << "graph conflict_graph {\n";
  out << "  node [shape=box];\n";
  for (std::size_t u = 0; u < f.unary().size(); ++u) {
    out << "  v" << u << " [label=\"~x" << f.unary()[u].var << " ("
        << f.unary()[u].coeff << ")\"];\n";
  }
  for (std::size_t t = 0; t < f.triples().size(); ++t) {
    const auto& tr = f.triples()[t];
    out << "  w" << t << " [label=\"x" << tr.vars[0] << ".x" << tr.vars[1] << ".x"
        << tr.vars[2] << " (" << tr.coeff << ")\"];\n";
  }
  for (std::size_t u = 0; u < f.unary().size(); ++u) {
    const int var = f.unary()[u].var;
    for (std::size_t t = 0; t < f.triples().size(); ++t) {
      const auto& vars = f.triples()[t].vars;
      if (vars[0] == var || vars[1] == var || vars[2] == var) {
        out << "  v" << u << " -- w" << t << ";\n";
      }
    }
  }
  out << "}\n";
  return out.str();
}

}  // namespace codisc
