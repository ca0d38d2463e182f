#pragma once

#include <optional>
#include <string>
#include <vector>

#include "codisc/geometry.hpp"

namespace codisc {

// One image with its rectangular region proposals. Pixels are never touched:
// features and proposals are inputs produced elsewhere.
struct ImageRecord {
  std::string id;
  double width = 0.0;
  double height = 0.0;
  std::vector<Rect> proposals;                    // p_i >= 1
  std::vector<std::vector<double>> features;      // empty or one vector per proposal
  std::vector<Rect> ground_truth;                 // evaluation only, may be empty
  std::string class_label;                        // evaluation only, may be empty
  std::vector<double> global_descriptor;          // prefiltering only, may be empty

  int num_proposals() const { return static_cast<int>(proposals.size()); }
  bool has_features() const { return !features.empty(); }
};

struct Dataset {
  std::vector<ImageRecord> images;

  int n() const { return static_cast<int>(images.size()); }

  std::vector<int> proposal_counts() const {
    std::vector<int> p;
    p.reserve(images.size());
    for (const auto& im : images) p.push_back(im.num_proposals());
    return p;
  }

  int min_proposals() const;
  bool all_have_features() const;
  bool all_have_global_descriptors() const;
  int find_image(const std::string& id) const;  // -1 when absent
};

// Clamps proposals and ground-truth boxes to the image bounds and rejects
// records that end up degenerate (zero-area proposal, feature count mismatch,
// inconsistent feature dimension). Throws DataError with the offending id.
void validate_image(ImageRecord& image);

// validate_image on every record plus dataset-level checks: n >= 2, unique
// ids, a single feature dimension across the whole set.
void validate_dataset(Dataset& dataset);

}  // namespace codisc
