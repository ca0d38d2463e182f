#pragma once

#include <array>
#include <cstdint>
#include <memory>
#include <string>
#include <vector>

namespace codisc {

struct UnaryTerm {
  int var = 0;
  double coeff = 0.0;  // weight of the complemented monomial (1 - x_var)
};

struct TripleTerm {
  std::array<int, 3> vars{};
  double coeff = 0.0;  // weight of x_a * x_b * x_c
};

// Supermodular cubic pseudo-Boolean function in complemented-unary form:
//   f(x) = constant + sum c_i * (1 - x_i) + sum c_abc * x_a * x_b * x_c,
// all coefficients nonnegative, no quadratic terms. This is exactly the form
// the Lagrangian of the matching problem takes for fixed multipliers.
class CubicPBF {
 public:
  CubicPBF() = default;
  explicit CubicPBF(int num_vars) : num_vars_(num_vars) {}

  void add_unary(int var, double coeff);
  void add_triple(int a, int b, int c, double coeff);
  void set_constant(double c) { constant_ = c; }
  // Rewrites the coefficient of an existing unary term; the variable slot
  // stays fixed so solvers can reuse their graph structure.
  void set_unary_coeff(std::size_t term_index, double coeff);

  int num_vars() const { return num_vars_; }
  double constant() const { return constant_; }
  const std::vector<UnaryTerm>& unary() const { return unary_; }
  const std::vector<TripleTerm>& triples() const { return triples_; }

  double evaluate(const std::vector<std::uint8_t>& point) const;

 private:
  int num_vars_ = 0;
  double constant_ = 0.0;
  std::vector<UnaryTerm> unary_;
  std::vector<TripleTerm> triples_;
};

struct MaximizeResult {
  std::vector<std::uint8_t> point;
  double value = 0.0;  // equals evaluate(f, point)
};

struct PbfOptions {
  // Coefficients are scaled to 64-bit integers before the flow computation
  // so the min cut is exact; overflow is reported, never wrapped.
  double scale = 1e9;
};

// Exact maximizer via the bipartite conflict graph and a max-flow min cut:
// source->V edges carry the unary weights, W->sink edges the triple weights,
// V-W conflict edges are uncuttable. The stable set read off the cut fixes
// the selected monomials to 1; variables in no selected monomial default
// to 1 (weakly dominant when every term is nonnegative).
// Repeated solves with updated unary coefficients reuse the graph structure.
class CubicPbfSolver {
 public:
  explicit CubicPbfSolver(CubicPBF f, PbfOptions options = {});
  ~CubicPbfSolver();
  CubicPbfSolver(CubicPbfSolver&&) noexcept;
  CubicPbfSolver& operator=(CubicPbfSolver&&) noexcept;

  // Replaces the coefficient of unary term #term_index (the variable slot is
  // fixed at construction).
  void set_unary_coeff(std::size_t term_index, double coeff);
  void set_constant(double c);

  MaximizeResult solve();

  const CubicPBF& function() const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

MaximizeResult maximize(const CubicPBF& f, PbfOptions options = {});

// Exhaustive oracle, N <= 25. Ties break toward the point whose bits, read
// as an integer (variable k -> bit k), are smallest.
MaximizeResult brute_force_maximize(const CubicPBF& f);

// Conflict graph in DOT format (debugging aid).
std::string conflict_graph_dot(const CubicPBF& f);

}  // namespace codisc
