#include "codisc/dual.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "codisc/errors.hpp"

namespace codisc {

void DualConfig::validate() const {
  if (nu < 1) throw DataError("nu must be >= 1");
  if (tau < 1) throw DataError("tau must be >= 1");
  if (!(alpha > 0.0) || !(beta > 0.0)) throw DataError("step sizes must be positive");
  if (iters < 1) throw DataError("iteration count must be >= 1");
}

VariableLayout::VariableLayout(std::vector<int> proposals_per_image, const NeighborMask* mask)
    : proposals_(std::move(proposals_per_image)) {
  const int n = static_cast<int>(proposals_.size());
  if (mask && static_cast<int>(mask->size()) != n * n) {
    throw DataError("neighbor mask size does not match the dataset");
  }
  x_offset_.resize(n + 1, 0);
  for (int i = 0; i < n; ++i) {
    if (proposals_[i] < 1) throw DataError("every image needs at least one proposal");
    x_offset_[i + 1] = x_offset_[i] + proposals_[i];
  }
  num_vars_ = x_offset_[n];
  e_var_.assign(static_cast<std::size_t>(n) * n, -1);
  allowed_links_.assign(n, 0);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      if (i == j) continue;
      if (mask && !(*mask)[static_cast<std::size_t>(i) * n + j]) continue;
      e_var_[static_cast<std::size_t>(i) * n + j] = num_vars_++;
      ++allowed_links_[i];
    }
  }
}

Assignment VariableLayout::to_assignment(std::span<const std::uint8_t> point) const {
  if (static_cast<int>(point.size()) != num_vars_) {
    throw InternalError("layout/point size mismatch");
  }
  Assignment a(proposals_);
  const int nn = n();
  for (int i = 0; i < nn; ++i) {
    for (int k = 0; k < proposals_[i]; ++k) a.x[i][k] = point[x_var(i, k)];
    for (int j = 0; j < nn; ++j) {
      const int v = e_var(i, j);
      if (v >= 0) a.set_e(i, j, point[v]);
    }
  }
  return a;
}

CubicPBF build_lagrangian(const ScoreSet& scores, const VariableLayout& layout,
                          std::span<const double> lambda, std::span<const double> mu,
                          const DualConfig& cfg, bool include_zero_unary) {
  const int n = layout.n();
  if (static_cast<int>(lambda.size()) != n || static_cast<int>(mu.size()) != n) {
    throw DataError("multiplier vectors must have one entry per image");
  }
  for (int i = 0; i < n; ++i) {
    if (lambda[i] < 0.0 || mu[i] < 0.0) {
      throw DataError("Lagrange multipliers must be nonnegative");
    }
  }
  if (scores.n() != n) throw DataError("score set and layout disagree on n");

  CubicPBF f(layout.num_vars());
  double constant = 0.0;
  for (int i = 0; i < n; ++i) {
    if (lambda[i] > 0.0 || include_zero_unary) {
      for (int k = 0; k < layout.proposals(i); ++k) f.add_unary(layout.x_var(i, k), lambda[i]);
    }
    for (int j = 0; j < n; ++j) {
      const int v = layout.e_var(i, j);
      if (v >= 0 && (mu[i] > 0.0 || include_zero_unary)) f.add_unary(v, mu[i]);
    }
    constant += lambda[i] * (cfg.nu - layout.proposals(i));
    constant += mu[i] * (cfg.tau - layout.allowed_links(i));
  }
  f.set_constant(constant);

  for (const auto& [i, j] : scores.stored_pairs()) {
    const int ev = layout.e_var(i, j);
    if (ev < 0) continue;  // masked-out pair contributes nothing
    const SparseScoreMatrix* m = scores.find(i, j);
    if (m->rows() != layout.proposals(i) || m->cols() != layout.proposals(j)) {
      throw DataError("score matrix shape disagrees with the layout at pair (" +
                      std::to_string(i) + "," + std::to_string(j) + ")");
    }
    for (const ScoreEntry& e : m->entries()) {
      f.add_triple(ev, layout.x_var(i, e.row), layout.x_var(j, e.col), e.value);
    }
  }
  return f;
}

DualState::DualState(const VariableLayout& layout)
    : lambda(layout.n(), 0.0), mu(layout.n(), 0.0) {
  primal_sum_x.reserve(layout.n());
  for (int i = 0; i < layout.n(); ++i) {
    primal_sum_x.emplace_back(layout.proposals(i), 0.0);
  }
  primal_sum_e.assign(static_cast<std::size_t>(layout.n()) * layout.n(), 0.0);
}

void subgradient_step(DualState& state, const Assignment& inner, double inner_value,
                      const DualConfig& cfg) {
  const int n = inner.n();
  if (static_cast<int>(state.lambda.size()) != n) {
    throw InternalError("dual state and assignment disagree on n");
  }
  for (int i = 0; i < n; ++i) {
    state.lambda[i] = std::max(0.0, state.lambda[i] + cfg.alpha * (inner.x_row_sum(i) - cfg.nu));
    state.mu[i] = std::max(0.0, state.mu[i] + cfg.beta * (inner.e_row_sum(i) - cfg.tau));
    for (std::size_t k = 0; k < state.primal_sum_x[i].size(); ++k) {
      state.primal_sum_x[i][k] += inner.x[i][k];
    }
  }
  for (std::size_t idx = 0; idx < state.primal_sum_e.size(); ++idx) {
    state.primal_sum_e[idx] += inner.e[idx];
  }
  state.dual_values.push_back(inner_value);
  state.t += 1;
}

DualResult run_dual(const ScoreSet& scores, const VariableLayout& layout,
                    const DualConfig& cfg, std::uint64_t /*seed*/) {
  cfg.validate();
  DualState state(layout);

  // The triple terms never change across iterations; build the function once
  // with unary slots for every multiplier and rewrite their coefficients in
  // place. Slot order: for image i, its p_i region slots then its link
  // slots, matching build_lagrangian's emission order.
  CubicPBF f = build_lagrangian(scores, layout, state.lambda, state.mu, cfg,
                                /*include_zero_unary=*/true);
  CubicPbfSolver solver(std::move(f));

  const int n = layout.n();
  std::vector<std::size_t> image_slot_start(n + 1, 0);
  for (int i = 0; i < n; ++i) {
    image_slot_start[i + 1] =
        image_slot_start[i] + layout.proposals(i) + layout.allowed_links(i);
  }

  DualResult result;
  for (int t = 0; t < cfg.iters; ++t) {
    if (t > 0) {
      double constant = 0.0;
      for (int i = 0; i < n; ++i) {
        std::size_t slot = image_slot_start[i];
        for (int k = 0; k < layout.proposals(i); ++k) {
          solver.set_unary_coeff(slot++, state.lambda[i]);
        }
        for (int l = 0; l < layout.allowed_links(i); ++l) {
          solver.set_unary_coeff(slot++, state.mu[i]);
        }
        constant += state.lambda[i] * (cfg.nu - layout.proposals(i));
        constant += state.mu[i] * (cfg.tau - layout.allowed_links(i));
      }
      solver.set_constant(constant);
    }

    const MaximizeResult inner = solver.solve();
    const Assignment a = layout.to_assignment(inner.point);

    double violation = 0.0;
    for (int i = 0; i < n; ++i) {
      violation = std::max(violation, static_cast<double>(a.x_row_sum(i) - cfg.nu));
      violation = std::max(violation, static_cast<double>(a.e_row_sum(i) - cfg.tau));
    }
    result.history.push_back({t, inner.value, violation});

    const std::vector<double> old_lambda = state.lambda;
    const std::vector<double> old_mu = state.mu;
    subgradient_step(state, a, inner.value, cfg);

    double movement = 0.0;
    for (int i = 0; i < n; ++i) {
      movement = std::max(movement, std::abs(state.lambda[i] - old_lambda[i]));
      movement = std::max(movement, std::abs(state.mu[i] - old_mu[i]));
    }
    if (movement < cfg.stop_tol) break;
  }

  result.iterations = state.t;
  result.dual_bound = *std::min_element(state.dual_values.begin(), state.dual_values.end());

  FractionalAssignment avg(layout.proposal_counts());
  const double inv = 1.0 / state.t;
  for (int i = 0; i < n; ++i) {
    for (std::size_t k = 0; k < avg.x[i].size(); ++k) {
      avg.x[i][k] = state.primal_sum_x[i][k] * inv;
    }
  }
  for (std::size_t idx = 0; idx < avg.e.size(); ++idx) {
    avg.e[idx] = state.primal_sum_e[idx] * inv;
  }
  result.average = std::move(avg);
  return result;
}

double duality_gap(double dual_bound, double best_primal_value) {
  if (best_primal_value < 0.0) {
    throw InternalError("duality_gap: negative primal value");
  }
  if (!(dual_bound > 0.0)) {
    throw DataError("duality_gap: dual bound must be positive");
  }
  if (best_primal_value > dual_bound * (1.0 + 1e-9) + 1e-12) {
    throw InternalError("duality_gap: weak duality violated (primal " +
                        std::to_string(best_primal_value) + " > dual bound " +
                        std::to_string(dual_bound) + ")");
  }
  return std::max(0.0, (dual_bound - best_primal_value) / dual_bound);
}

}  // namespace codisc
