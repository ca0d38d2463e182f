#include "codisc/eval.hpp"

#include <algorithm>
#include <cmath>

#include "codisc/errors.hpp"
#include "codisc/rng.hpp"

namespace codisc {

CorLocReport corloc(const std::map<std::string, Rect>& predictions, const Dataset& dataset) {
  for (const auto& [id, rect] : predictions) {
    if (dataset.find_image(id) < 0) throw DataError("prediction for unknown image '" + id + "'");
    if (!rect.valid()) throw DataError("degenerate prediction for image '" + id + "'");
  }

  CorLocReport report;
  report.total = dataset.n();
  std::map<std::string, ClassCorLoc> classes;
  for (const ImageRecord& im : dataset.images) {
    bool ok = false;
    if (auto it = predictions.find(im.id); it != predictions.end()) {
      for (const Rect& gt : im.ground_truth) {
        if (iou(it->second, gt) > 0.5) {
          ok = true;
          break;
        }
      }
    }
    report.correct += ok;
    ClassCorLoc& c = classes[im.class_label];
    c.label = im.class_label;
    c.total += 1;
    c.correct += ok;
  }
  report.mixed_percent = report.total == 0 ? 0.0 : 100.0 * report.correct / report.total;
  double sum = 0.0;
  for (auto& [label, c] : classes) {
    sum += c.percent();
    report.per_class.push_back(c);
  }
  report.separate_percent = classes.empty() ? 0.0 : sum / classes.size();
  return report;
}

NeighborMask prefilter_neighbors(const Dataset& dataset, int k) {
  if (k < 1) throw DataError("prefilter k must be >= 1");
  if (!dataset.all_have_global_descriptors()) {
    throw DataError("prefiltering needs a global descriptor on every image");
  }
  const int n = dataset.n();
  const std::size_t dim = dataset.images.front().global_descriptor.size();
  for (const ImageRecord& im : dataset.images) {
    if (im.global_descriptor.size() != dim) {
      throw DataError("image '" + im.id + "': global descriptor dimension mismatch");
    }
  }

  NeighborMask mask(static_cast<std::size_t>(n) * n, 0);
  std::vector<std::pair<double, int>> dist;
  for (int i = 0; i < n; ++i) {
    dist.clear();
    for (int j = 0; j < n; ++j) {
      if (j == i) continue;
      double d2 = 0.0;
      for (std::size_t t = 0; t < dim; ++t) {
        const double d = dataset.images[i].global_descriptor[t] -
                         dataset.images[j].global_descriptor[t];
        d2 += d * d;
      }
      dist.emplace_back(d2, j);
    }
    std::sort(dist.begin(), dist.end());
    const std::size_t take = std::min<std::size_t>(k, dist.size());
    for (std::size_t t = 0; t < take; ++t) {
      mask[static_cast<std::size_t>(i) * n + dist[t].second] = 1;
    }
  }
  return mask;
}

void SynthSpec::validate() const {
  if (n < 2) throw DataError("synthetic spec: n must be >= 2");
  if (classes < 1) throw DataError("synthetic spec: classes must be >= 1");
  if (proposals < 2) throw DataError("synthetic spec: proposals must be >= 2");
  if (feature_dim < 1) throw DataError("synthetic spec: feature_dim must be >= 1");
  if (parts < 0) throw DataError("synthetic spec: parts must be >= 0");
  if (noise < 0.0 || jitter < 0.0) throw DataError("synthetic spec: negative noise/jitter");
  if (image_width <= 0.0 || image_height <= 0.0) {
    throw DataError("synthetic spec: non-positive image size");
  }
}

namespace {

// Features are rounded to float32 so inline-JSON and binary-sidecar storage
// round-trip identically.
double as_f32(double v) { return static_cast<double>(static_cast<float>(v)); }

std::vector<double> f32_vector(std::vector<double> v) {
  for (double& x : v) x = as_f32(x);
  return v;
}

}  // namespace

namespace {

struct PartLayout {
  double cx = 0.5;  // center, relative to the object box
  double cy = 0.5;
  double fw = 0.25;  // size, relative to the object box
  double fh = 0.25;
};

}  // namespace

Dataset generate_synthetic(const SynthSpec& spec, std::uint64_t seed) {
  spec.validate();
  Rng rng(seed);
  // At least one distractor stays.
  const int num_parts = std::min(spec.parts, spec.proposals - 2);

  // Prototypes for the objects and their parts: orthonormal random
  // directions while the feature dimension allows, so appearance carries no
  // cross-class or part-vs-object signal. Every image of a class repeats
  // the same part layout inside its object box; those part matches vote
  // into the same offset bin as the object match, which is what makes the
  // planted structure dominate the accumulated scores (and what the
  // stand-out step then prunes back to the enclosing object).
  std::vector<std::vector<double>> prototypes;
  auto draw_prototype = [&] {
    std::vector<double> proto(spec.feature_dim);
    for (double& v : proto) v = rng.normal();
    if (static_cast<int>(prototypes.size()) < spec.feature_dim) {
      for (const auto& prev : prototypes) {
        double dot = 0.0;
        for (int t = 0; t < spec.feature_dim; ++t) dot += proto[t] * prev[t];
        for (int t = 0; t < spec.feature_dim; ++t) proto[t] -= dot * prev[t];
      }
    }
    double norm2 = 0.0;
    for (double v : proto) norm2 += v * v;
    const double inv = 1.0 / std::sqrt(std::max(norm2, 1e-12));
    for (double& v : proto) v *= inv;
    prototypes.push_back(std::move(proto));
    return static_cast<int>(prototypes.size()) - 1;
  };

  std::vector<int> object_proto(spec.classes);
  std::vector<std::vector<int>> part_proto(spec.classes);
  std::vector<std::pair<double, double>> box_sizes;
  std::vector<std::vector<PartLayout>> part_layout(spec.classes);
  for (int c = 0; c < spec.classes; ++c) {
    object_proto[c] = draw_prototype();
    box_sizes.emplace_back(rng.uniform(0.28, 0.42) * spec.image_width,
                           rng.uniform(0.28, 0.42) * spec.image_height);
    for (int j = 0; j < num_parts; ++j) {
      part_proto[c].push_back(draw_prototype());
      part_layout[c].push_back({rng.uniform(0.25, 0.75), rng.uniform(0.25, 0.75),
                                rng.uniform(0.2, 0.35), rng.uniform(0.2, 0.35)});
    }
  }

  auto noisy_feature = [&](int proto_index) {
    std::vector<double> f(spec.feature_dim);
    for (int t = 0; t < spec.feature_dim; ++t) {
      f[t] = prototypes[proto_index][t] + spec.noise * rng.normal();
    }
    return f;
  };

  Dataset ds;
  ds.images.reserve(spec.n);
  for (int i = 0; i < spec.n; ++i) {
    const int c = i % spec.classes;
    ImageRecord im;
    im.id = "synthetic_" + std::to_string(i);
    im.width = spec.image_width;
    im.height = spec.image_height;
    im.class_label = "class_" + std::to_string(c);

    // Planted object box: class-consistent size up to jitter, free position.
    const double w = box_sizes[c].first * (1.0 + spec.jitter * (2.0 * rng.uniform() - 1.0));
    const double h = box_sizes[c].second * (1.0 + spec.jitter * (2.0 * rng.uniform() - 1.0));
    const Rect planted{rng.uniform(0.0, spec.image_width - w),
                       rng.uniform(0.0, spec.image_height - h), w, h};
    const std::vector<double> planted_feature = noisy_feature(object_proto[c]);

    std::vector<std::pair<Rect, std::vector<double>>> proposals;
    proposals.reserve(spec.proposals);
    proposals.emplace_back(planted, planted_feature);
    for (int j = 0; j < num_parts; ++j) {
      const PartLayout& pl = part_layout[c][j];
      proposals.emplace_back(Rect{planted.x + (pl.cx - 0.5 * pl.fw) * planted.w,
                                  planted.y + (pl.cy - 0.5 * pl.fh) * planted.h,
                                  pl.fw * planted.w, pl.fh * planted.h},
                             noisy_feature(part_proto[c][j]));
    }
    for (int k = 1 + num_parts; k < spec.proposals; ++k) {
      // Distractors: unrelated features, log-uniform sizes over a wide
      // range so most distractor matches fall outside the geometric offset
      // ranges and collect no votes.
      const double dw = std::exp(rng.uniform(std::log(0.02), std::log(0.95))) * spec.image_width;
      const double dh = std::exp(rng.uniform(std::log(0.02), std::log(0.95))) * spec.image_height;
      std::vector<double> f(spec.feature_dim);
      for (double& v : f) v = rng.normal();
      proposals.emplace_back(Rect{rng.uniform(0.0, spec.image_width - dw),
                                  rng.uniform(0.0, spec.image_height - dh), dw, dh},
                             std::move(f));
    }
    rng.shuffle(proposals);
    for (auto& [rect, feature] : proposals) {
      im.proposals.push_back(rect);
      im.features.push_back(f32_vector(std::move(feature)));
    }

    im.ground_truth.push_back(planted);

    // Global descriptor with class signal, for the prefiltering path.
    std::vector<double> global(spec.feature_dim);
    for (int t = 0; t < spec.feature_dim; ++t) {
      global[t] = planted_feature[t] + spec.noise * rng.normal();
    }
    im.global_descriptor = f32_vector(std::move(global));

    validate_image(im);
    ds.images.push_back(std::move(im));
  }
  return ds;
}

}  // namespace codisc
