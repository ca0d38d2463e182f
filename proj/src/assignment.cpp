#include "codisc/assignment.hpp"

#include <algorithm>
#include <string>

#include "codisc/errors.hpp"

namespace codisc {

namespace {

void check_shapes(int n, const std::vector<std::vector<double>>* xf,
                  const std::vector<std::vector<std::uint8_t>>* xb,
                  const ScoreSet& scores) {
  if (scores.n() != 0 && scores.n() != n) {
    throw DataError("assignment has " + std::to_string(n) + " images, scores have " +
                    std::to_string(scores.n()));
  }
  for (const auto& [i, j] : scores.stored_pairs()) {
    const SparseScoreMatrix* m = scores.find(i, j);
    const int pi = xf ? static_cast<int>((*xf)[i].size()) : static_cast<int>((*xb)[i].size());
    const int pj = xf ? static_cast<int>((*xf)[j].size()) : static_cast<int>((*xb)[j].size());
    if (m->rows() != pi || m->cols() != pj) {
      throw DataError("score matrix (" + std::to_string(i) + "," + std::to_string(j) +
                      ") is " + std::to_string(m->rows()) + "x" + std::to_string(m->cols()) +
                      ", expected " + std::to_string(pi) + "x" + std::to_string(pj));
    }
  }
}

}  // namespace

Assignment::Assignment(const std::vector<int>& proposals_per_image) {
  x.reserve(proposals_per_image.size());
  for (int p : proposals_per_image) x.emplace_back(p, 0);
  e.assign(proposals_per_image.size() * proposals_per_image.size(), 0);
}

int Assignment::x_row_sum(int i) const {
  int s = 0;
  for (std::uint8_t v : x[i]) s += v;
  return s;
}

int Assignment::e_row_sum(int i) const {
  int s = 0;
  for (int j = 0; j < n(); ++j) s += e_at(i, j);
  return s;
}

FractionalAssignment::FractionalAssignment(const std::vector<int>& proposals_per_image) {
  x.reserve(proposals_per_image.size());
  for (int p : proposals_per_image) x.emplace_back(p, 0.0);
  e.assign(proposals_per_image.size() * proposals_per_image.size(), 0.0);
}

FractionalAssignment FractionalAssignment::all_ones(
    const std::vector<int>& proposals_per_image) {
  FractionalAssignment f(proposals_per_image);
  for (auto& xi : f.x) std::fill(xi.begin(), xi.end(), 1.0);
  const int n = f.n();
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      if (i != j) f.set_e(i, j, 1.0);
    }
  }
  return f;
}

FractionalAssignment to_fractional(const Assignment& a) {
  FractionalAssignment f;
  f.x.reserve(a.x.size());
  for (const auto& xi : a.x) f.x.emplace_back(xi.begin(), xi.end());
  f.e.assign(a.e.begin(), a.e.end());
  return f;
}

double objective_value(const Assignment& a, const ScoreSet& scores) {
  check_shapes(a.n(), nullptr, &a.x, scores);
  double total = 0.0;
  for (const auto& [i, j] : scores.stored_pairs()) {
    if (!a.e_at(i, j)) continue;
    const SparseScoreMatrix* m = scores.find(i, j);
    for (const ScoreEntry& en : m->entries()) {
      if (a.x[i][en.row] && a.x[j][en.col]) total += en.value;
    }
  }
  return total;
}

double relaxed_objective_value(const FractionalAssignment& f, const ScoreSet& scores) {
  check_shapes(f.n(), &f.x, nullptr, scores);
  const int n = f.n();
  for (int i = 0; i < n; ++i) {
    if (f.e_at(i, i) != 0.0) throw DataError("fractional e has a nonzero diagonal");
    for (double v : f.x[i]) {
      if (v < 0.0 || v > 1.0) throw DataError("fractional x entry outside [0,1]");
    }
    for (int j = 0; j < n; ++j) {
      const double v = f.e_at(i, j);
      if (v < 0.0 || v > 1.0) throw DataError("fractional e entry outside [0,1]");
    }
  }
  double total = 0.0;
  for (const auto& [i, j] : scores.stored_pairs()) {
    const double eij = f.e_at(i, j);
    const SparseScoreMatrix* m = scores.find(i, j);
    for (const ScoreEntry& en : m->entries()) {
      total += en.value * std::min({eij, f.x[i][en.row], f.x[j][en.col]});
    }
  }
  return total;
}

}  // namespace codisc
