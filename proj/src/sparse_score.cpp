#include "codisc/sparse_score.hpp"

#include <algorithm>
#include <string>

#include "codisc/errors.hpp"

namespace codisc {

SparseScoreMatrix SparseScoreMatrix::from_entries(int rows, int cols,
                                                  std::vector<ScoreEntry> entries) {
  SparseScoreMatrix m(rows, cols);
  std::erase_if(entries, [](const ScoreEntry& e) { return e.value == 0.0; });
  for (const ScoreEntry& e : entries) {
    if (e.row < 0 || e.row >= rows || e.col < 0 || e.col >= cols) {
      throw DataError("score entry (" + std::to_string(e.row) + "," +
                      std::to_string(e.col) + ") outside " + std::to_string(rows) +
                      "x" + std::to_string(cols) + " matrix");
    }
    if (e.value < 0.0) {
      throw DataError("negative score entry at (" + std::to_string(e.row) + "," +
                      std::to_string(e.col) + ")");
    }
  }
  std::sort(entries.begin(), entries.end(), [](const ScoreEntry& a, const ScoreEntry& b) {
    return std::pair(a.row, a.col) < std::pair(b.row, b.col);
  });
  for (std::size_t i = 1; i < entries.size(); ++i) {
    if (entries[i - 1].row == entries[i].row && entries[i - 1].col == entries[i].col) {
      throw DataError("duplicate score entry at (" + std::to_string(entries[i].row) +
                      "," + std::to_string(entries[i].col) + ")");
    }
  }
  m.entries_ = std::move(entries);
  return m;
}

double SparseScoreMatrix::max_value() const {
  double m = 0.0;
  for (const ScoreEntry& e : entries_) m = std::max(m, e.value);
  return m;
}

void SparseScoreMatrix::scale(double factor) {
  for (ScoreEntry& e : entries_) e.value *= factor;
}

ScoreSet::ScoreSet(int n) : n_(n), slot_(static_cast<std::size_t>(n) * n, -1) {}

void ScoreSet::set(int i, int j, SparseScoreMatrix matrix) {
  if (i < 0 || i >= n_ || j < 0 || j >= n_ || i == j) {
    throw InternalError("ScoreSet::set: bad pair (" + std::to_string(i) + "," +
                        std::to_string(j) + ")");
  }
  const std::size_t key = static_cast<std::size_t>(i) * n_ + j;
  if (slot_[key] >= 0) {
    matrices_[slot_[key]] = std::move(matrix);
    return;
  }
  slot_[key] = static_cast<std::int32_t>(matrices_.size());
  matrices_.push_back(std::move(matrix));
  pairs_.emplace_back(i, j);
}

const SparseScoreMatrix* ScoreSet::find(int i, int j) const {
  if (i < 0 || i >= n_ || j < 0 || j >= n_) return nullptr;
  const std::int32_t s = slot_[static_cast<std::size_t>(i) * n_ + j];
  return s < 0 ? nullptr : &matrices_[s];
}

double ScoreSet::max_value() const {
  double m = 0.0;
  for (const auto& mat : matrices_) m = std::max(m, mat.max_value());
  return m;
}

double ScoreSet::normalize() {
  const double m = max_value();
  if (m <= 0.0) return 1.0;
  for (auto& mat : matrices_) mat.scale(1.0 / m);
  return m;
}

std::size_t ScoreSet::total_entries() const {
  std::size_t t = 0;
  for (const auto& mat : matrices_) t += mat.entries().size();
  return t;
}

}  // namespace codisc
