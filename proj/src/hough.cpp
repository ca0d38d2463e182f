#include "codisc/hough.hpp"

#include <cmath>

#include "codisc/errors.hpp"

namespace codisc {

namespace {

// Quantizes u over [-range, range] into bins cells; -1 signals overflow.
int quantize(double u, double range, int bins) {
  if (u < -range || u > range) return -1;
  const int idx = static_cast<int>((u + range) / (2.0 * range) * bins);
  return idx >= bins ? bins - 1 : idx;
}

std::vector<std::vector<double>> unit_normalized(const ImageRecord& image) {
  std::vector<std::vector<double>> out;
  out.reserve(image.features.size());
  for (std::size_t k = 0; k < image.features.size(); ++k) {
    const auto& f = image.features[k];
    double norm2 = 0.0;
    for (double v : f) norm2 += v * v;
    if (norm2 <= 0.0) {
      throw DataError("image '" + image.id + "': zero-length feature vector at proposal " +
                      std::to_string(k));
    }
    const double inv = 1.0 / std::sqrt(norm2);
    std::vector<double> g(f.size());
    for (std::size_t i = 0; i < f.size(); ++i) g[i] = f[i] * inv;
    out.push_back(std::move(g));
  }
  return out;
}

}  // namespace

double appearance_similarity(std::span<const double> f, std::span<const double> g) {
  if (f.size() != g.size()) {
    throw DataError("appearance_similarity: dimension mismatch");
  }
  double ff = 0.0, gg = 0.0, fg = 0.0;
  for (std::size_t i = 0; i < f.size(); ++i) {
    ff += f[i] * f[i];
    gg += g[i] * g[i];
    fg += f[i] * g[i];
  }
  if (ff <= 0.0 || gg <= 0.0) {
    throw DataError("appearance_similarity: zero-length feature vector");
  }
  const double cosine = fg / std::sqrt(ff * gg);
  return cosine > 0.0 ? cosine : 0.0;
}

int offset_bin(const Rect& r, const Rect& s, double width_i, double height_i,
               double width_j, double height_j, const HoughSpace& space) {
  const double mean_w = 0.5 * (width_i + width_j);
  const double mean_h = 0.5 * (height_i + height_j);
  const int tx = quantize((s.cx() - r.cx()) / mean_w, space.translation_range, space.tx_bins);
  const int ty = quantize((s.cy() - r.cy()) / mean_h, space.translation_range, space.ty_bins);
  const int sx = quantize(std::log(s.w / r.w), space.log_scale_range, space.sx_bins);
  const int sy = quantize(std::log(s.h / r.h), space.log_scale_range, space.sy_bins);
  if (tx < 0 || ty < 0 || sx < 0 || sy < 0) return space.overflow_bin();
  return ((tx * space.ty_bins + ty) * space.sx_bins + sx) * space.sy_bins + sy;
}

DenseMatrix similarity_matrix(const ImageRecord& image_i, const ImageRecord& image_j,
                              const HoughSpace& space, bool normalize) {
  if (!image_i.has_features() || !image_j.has_features()) {
    throw DataError("similarity_matrix: missing features ('" + image_i.id + "', '" +
                    image_j.id + "')");
  }
  const int pi = image_i.num_proposals();
  const int pj = image_j.num_proposals();
  const auto fi = unit_normalized(image_i);
  const auto fj = unit_normalized(image_j);

  DenseMatrix appearance(pi, pj);
  std::vector<int> bins(static_cast<std::size_t>(pi) * pj);
  HoughAccumulator acc{std::vector<double>(space.size(), 0.0)};
  const int overflow = space.overflow_bin();

  for (int k = 0; k < pi; ++k) {
    for (int l = 0; l < pj; ++l) {
      double dot = 0.0;
      const auto& a = fi[k];
      const auto& b = fj[l];
      if (a.size() != b.size()) {
        throw DataError("similarity_matrix: feature dimension mismatch between '" +
                        image_i.id + "' and '" + image_j.id + "'");
      }
      for (std::size_t t = 0; t < a.size(); ++t) dot += a[t] * b[t];
      const double ap = dot > 0.0 ? dot : 0.0;
      appearance.at(k, l) = ap;
      const int bin = offset_bin(image_i.proposals[k], image_j.proposals[l], image_i.width,
                                 image_i.height, image_j.width, image_j.height, space);
      bins[static_cast<std::size_t>(k) * pj + l] = bin;
      if (bin != overflow) acc.c[bin] += ap;
    }
  }

  DenseMatrix s(pi, pj);
  const double norm = normalize ? 1.0 / (static_cast<double>(pi) * pj) : 1.0;
  for (int k = 0; k < pi; ++k) {
    for (int l = 0; l < pj; ++l) {
      const int bin = bins[static_cast<std::size_t>(k) * pj + l];
      if (bin == overflow) continue;
      s.at(k, l) = appearance.at(k, l) * acc.c[bin] * norm;
    }
  }
  return s;
}

}  // namespace codisc
