#pragma once

#include <cstddef>
#include <vector>

namespace codisc {

// Minimal row-major dense matrix of doubles; enough for the per-pair
// similarity and stand-out stages, which never exceed p_i x p_j.
struct DenseMatrix {
  int rows = 0;
  int cols = 0;
  std::vector<double> data;

  DenseMatrix() = default;
  DenseMatrix(int r, int c, double fill = 0.0)
      : rows(r), cols(c), data(static_cast<std::size_t>(r) * c, fill) {}

  double& at(int r, int c) { return data[static_cast<std::size_t>(r) * cols + c]; }
  double at(int r, int c) const { return data[static_cast<std::size_t>(r) * cols + c]; }
};

}  // namespace codisc
