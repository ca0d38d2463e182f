#pragma once

#include <span>
#include <vector>

#include "codisc/dataset.hpp"
#include "codisc/dense_matrix.hpp"

namespace codisc {

// Discretized offset space for the geometric-consistency vote: normalized
// center translation over [-1, 1] x [-1, 1] and per-axis log scale ratio
// over [-ln 4, ln 4]. Offsets outside either range land in a dedicated
// overflow bin that never matches a real grid cell.
struct HoughSpace {
  int tx_bins = 8;
  int ty_bins = 8;
  int sx_bins = 5;
  int sy_bins = 5;
  double translation_range = 1.0;                    // [-range, range]
  double log_scale_range = 1.3862943611198906188;    // ln 4

  int size() const { return tx_bins * ty_bins * sx_bins * sy_bins; }
  int overflow_bin() const { return size(); }
};

// Appearance vote mass per offset bin: c[o] accumulates the appearance
// similarity of every proposal pair whose offset quantizes to o.
struct HoughAccumulator {
  std::vector<double> c;  // length |O|; overflow votes are discarded
};

// Cosine of the two vectors after unit normalization, clamped below at 0 so
// downstream scores stay nonnegative. Throws on zero-length input.
double appearance_similarity(std::span<const double> f, std::span<const double> g);

// Bin index of the offset taking r (in an image of dims_i) to s (in an image
// of dims_j): center translation normalized by the mean image width/height,
// log width and height ratios. Returns space.overflow_bin() when any
// component leaves its range.
int offset_bin(const Rect& r, const Rect& s, double width_i, double height_i,
               double width_j, double height_j, const HoughSpace& space);

// Hough-rescaled similarity matrix s_ij for one ordered image pair: each
// entry is its appearance score times the accumulated appearance mass of its
// own offset bin (pairs voting into the overflow bin score 0). With the hard
// binning the full offset sum collapses to one accumulator lookup, so the
// whole matrix costs one O(p_i * p_j) pass. The normalized variant divides
// by p_i * p_j to remove the bias toward proposal-rich images.
DenseMatrix similarity_matrix(const ImageRecord& image_i, const ImageRecord& image_j,
                              const HoughSpace& space, bool normalize);

}  // namespace codisc
