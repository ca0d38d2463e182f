#include "codisc/dataset.hpp"

#include <algorithm>
#include <unordered_set>

#include "codisc/errors.hpp"

namespace codisc {

namespace {

Rect clamp_to_image(const Rect& r, double width, double height) {
  const double x0 = std::clamp(r.x, 0.0, width);
  const double y0 = std::clamp(r.y, 0.0, height);
  const double x1 = std::clamp(r.x + r.w, 0.0, width);
  const double y1 = std::clamp(r.y + r.h, 0.0, height);
  return Rect{x0, y0, x1 - x0, y1 - y0};
}

}  // namespace

int Dataset::min_proposals() const {
  int m = images.empty() ? 0 : images.front().num_proposals();
  for (const auto& im : images) m = std::min(m, im.num_proposals());
  return m;
}

bool Dataset::all_have_features() const {
  return std::all_of(images.begin(), images.end(),
                     [](const ImageRecord& im) { return im.has_features(); });
}

bool Dataset::all_have_global_descriptors() const {
  return std::all_of(images.begin(), images.end(), [](const ImageRecord& im) {
    return !im.global_descriptor.empty();
  });
}

int Dataset::find_image(const std::string& id) const {
  for (int i = 0; i < n(); ++i) {
    if (images[i].id == id) return i;
  }
  return -1;
}

void validate_image(ImageRecord& image) {
  if (image.id.empty()) throw DataError("image record without an id");
  if (image.width <= 0.0 || image.height <= 0.0) {
    throw DataError("image '" + image.id + "': non-positive dimensions");
  }
  if (image.proposals.empty()) {
    throw DataError("image '" + image.id + "': no proposals");
  }
  for (std::size_t k = 0; k < image.proposals.size(); ++k) {
    Rect clamped = clamp_to_image(image.proposals[k], image.width, image.height);
    if (!clamped.valid()) {
      throw DataError("image '" + image.id + "': proposal " + std::to_string(k) +
                      " has zero area after clamping to image bounds");
    }
    image.proposals[k] = clamped;
  }
  for (Rect& gt : image.ground_truth) {
    gt = clamp_to_image(gt, image.width, image.height);
  }
  if (!image.features.empty()) {
    if (image.features.size() != image.proposals.size()) {
      throw DataError("image '" + image.id + "': " +
                      std::to_string(image.features.size()) + " feature vectors for " +
                      std::to_string(image.proposals.size()) + " proposals");
    }
    const std::size_t d = image.features.front().size();
    for (const auto& f : image.features) {
      if (f.size() != d || d == 0) {
        throw DataError("image '" + image.id + "': inconsistent feature dimensions");
      }
    }
  }
}

void validate_dataset(Dataset& dataset) {
  if (dataset.n() < 2) throw DataError("dataset needs at least 2 images");
  std::unordered_set<std::string> ids;
  std::size_t feature_dim = 0;
  for (auto& image : dataset.images) {
    validate_image(image);
    if (!ids.insert(image.id).second) {
      throw DataError("duplicate image id '" + image.id + "'");
    }
    if (image.has_features()) {
      const std::size_t d = image.features.front().size();
      if (feature_dim == 0) feature_dim = d;
      if (d != feature_dim) {
        throw DataError("image '" + image.id + "': feature dimension " +
                        std::to_string(d) + " differs from dataset dimension " +
                        std::to_string(feature_dim));
      }
    }
  }
}

}  // namespace codisc
