#pragma once

#include <cstdint>
#include <utility>
#include <vector>

namespace codisc {

struct ScoreEntry {
  std::int32_t row = 0;  // proposal index in image i
  std::int32_t col = 0;  // proposal index in image j
  double value = 0.0;    // nonnegative stand-out score
};

// Sparse nonnegative score matrix for one ordered image pair (i, j).
// Missing entries are semantically zero. Entries are stored sorted by
// (row, col) with at most one entry per cell.
class SparseScoreMatrix {
 public:
  SparseScoreMatrix() = default;
  SparseScoreMatrix(int rows, int cols) : rows_(rows), cols_(cols) {}

  // Validates bounds, nonnegativity and cell uniqueness; sorts by (row, col).
  // Zero values are dropped.
  static SparseScoreMatrix from_entries(int rows, int cols,
                                        std::vector<ScoreEntry> entries);

  int rows() const { return rows_; }
  int cols() const { return cols_; }
  const std::vector<ScoreEntry>& entries() const { return entries_; }
  bool empty() const { return entries_.empty(); }

  double max_value() const;
  void scale(double factor);

 private:
  int rows_ = 0;
  int cols_ = 0;
  std::vector<ScoreEntry> entries_;
};

// All pairwise score matrices of one problem instance. Pairs never computed
// (prefiltered away, or empty after stand-out) are simply absent and read as
// all-zero. Iteration order over stored pairs is (i, j) lexicographic.
class ScoreSet {
 public:
  ScoreSet() = default;
  explicit ScoreSet(int n);

  int n() const { return n_; }

  void set(int i, int j, SparseScoreMatrix matrix);
  const SparseScoreMatrix* find(int i, int j) const;

  const std::vector<std::pair<int, int>>& stored_pairs() const { return pairs_; }

  double max_value() const;
  // Divides every entry by the global maximum so energies are scale-free;
  // returns the divisor (1 when all scores are zero).
  double normalize();
  std::size_t total_entries() const;

 private:
  int n_ = 0;
  std::vector<std::int32_t> slot_;  // n*n -> index into matrices_, -1 absent
  std::vector<SparseScoreMatrix> matrices_;
  std::vector<std::pair<int, int>> pairs_;
};

}  // namespace codisc
