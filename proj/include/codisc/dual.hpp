#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "codisc/assignment.hpp"
#include "codisc/pbf.hpp"
#include "codisc/sparse_score.hpp"

namespace codisc {

struct DualConfig {
  int nu = 5;               // max objects per image
  int tau = 10;             // max neighbors per image
  double alpha = 0.01;      // lambda step size (scores normalized beforehand)
  double beta = 0.01;       // mu step size
  int iters = 200;
  double stop_tol = 1e-7;   // early stop on multiplier movement (max norm)

  void validate() const;
};

// Flat variable numbering of the joint problem: region variables x_i^k
// first, then link variables e_ij. Links excluded by the candidate mask
// are not variables at all (hard zero).
class VariableLayout {
 public:
  VariableLayout(std::vector<int> proposals_per_image, const NeighborMask* mask = nullptr);

  int n() const { return static_cast<int>(proposals_.size()); }
  int num_vars() const { return num_vars_; }
  int num_x_vars() const { return x_offset_.back(); }

  int x_var(int i, int k) const { return x_offset_[i] + k; }
  // -1 when the link is masked out (or i == j).
  int e_var(int i, int j) const { return e_var_[static_cast<std::size_t>(i) * n() + j]; }

  int proposals(int i) const { return proposals_[i]; }
  const std::vector<int>& proposal_counts() const { return proposals_; }
  // Number of link variables in row i (n-1 without a mask).
  int allowed_links(int i) const { return allowed_links_[i]; }

  Assignment to_assignment(std::span<const std::uint8_t> point) const;

 private:
  std::vector<int> proposals_;
  std::vector<int> x_offset_;       // prefix sums, size n+1
  std::vector<int> e_var_;          // n*n -> variable id or -1
  std::vector<int> allowed_links_;
  int num_vars_ = 0;
};

// Lagrangian of the relaxed problem for fixed multipliers, in complemented
// unary form: the stored score entries become triples (e_ij, x_i^k, x_j^l),
// the multiplier penalties become lambda_i on each complemented region
// variable of image i and mu_i on each complemented link variable of row i,
// and the constant collects nu*lambda_i + tau*mu_i - lambda_i*p_i -
// mu_i*allowed_links(i). Evaluating the result at a binary point gives the
// Lagrangian value exactly.
// include_zero_unary keeps zero-coefficient unary slots so a solver built on
// the result can be reused across multiplier updates.
CubicPBF build_lagrangian(const ScoreSet& scores, const VariableLayout& layout,
                          std::span<const double> lambda, std::span<const double> mu,
                          const DualConfig& cfg, bool include_zero_unary = false);

struct DualState {
  std::vector<double> lambda;
  std::vector<double> mu;
  int t = 0;
  std::vector<std::vector<double>> primal_sum_x;
  std::vector<double> primal_sum_e;
  std::vector<double> dual_values;

  explicit DualState(const VariableLayout& layout);
};

// Projected subgradient update from the current inner maximizer:
//   lambda_i <- [lambda_i + alpha (x_i . 1 - nu)]_+
//   mu_i     <- [mu_i + beta (e_i . 1 - tau)]_+
// Also folds the maximizer into the primal running sums and appends
// inner_value to the dual history.
void subgradient_step(DualState& state, const Assignment& inner, double inner_value,
                      const DualConfig& cfg);

struct DualTracePoint {
  int t = 0;
  double dual_value = 0.0;
  double max_violation = 0.0;  // max over rows of the signed constraint slack
};

struct DualResult {
  FractionalAssignment average;  // running primal average (Eq. of the relaxation)
  double dual_bound = 0.0;       // min over iterations of the dual value
  std::vector<DualTracePoint> history;
  int iterations = 0;
};

// Subgradient descent on the dual: every iteration maximizes the Lagrangian
// exactly via the conflict-graph flow solver (binary maximizers suffice for
// supermodular functions) and steps the multipliers. The seed is accepted
// for interface stability; the loop itself is deterministic.
DualResult run_dual(const ScoreSet& scores, const VariableLayout& layout,
                    const DualConfig& cfg, std::uint64_t seed = 0);

// Relative gap (dual_bound - best_primal) / dual_bound. Requires weak
// duality to hold; a violation beyond rounding noise is an internal bug.
double duality_gap(double dual_bound, double best_primal_value);

}  // namespace codisc
