#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "codisc/assignment.hpp"
#include "codisc/dataset.hpp"

namespace codisc {

struct ClassCorLoc {
  std::string label;
  int total = 0;
  int correct = 0;
  double percent() const { return total == 0 ? 0.0 : 100.0 * correct / total; }
};

struct CorLocReport {
  int total = 0;
  int correct = 0;
  double mixed_percent = 0.0;     // correct / n over the whole set
  double separate_percent = 0.0;  // unweighted mean of per-class percentages
  std::vector<ClassCorLoc> per_class;
};

// An image counts as correctly localized when its predicted region overlaps
// some ground-truth box with IoU > 0.5. Images without ground truth
// (outliers) and images without a prediction count as incorrect but stay in
// the denominators. Predictions for unknown ids are an error.
CorLocReport corloc(const std::map<std::string, Rect>& predictions, const Dataset& dataset);

// Candidate-neighbor mask from Euclidean distances between global
// descriptors: row i marks the min(K, n-1) nearest other images, ties broken
// by index, diagonal zero. The mask is asymmetric in general.
NeighborMask prefilter_neighbors(const Dataset& dataset, int k);

// Desk-scale dataset with planted structure: every image carries one
// "object" proposal whose feature is its class prototype plus noise and
// whose rectangle has class-consistent size up to jitter, buried among
// unrelated distractor proposals. The planted box doubles as ground truth,
// so a pipeline run can be scored with corloc against a known answer.
struct SynthSpec {
  int n = 60;
  int classes = 3;
  int proposals = 20;
  int feature_dim = 32;
  int parts = 5;           // part proposals nested inside the planted object,
                           // at class-consistent relative geometry (clamped
                           // to proposals - 2 so distractors remain)
  double noise = 0.1;      // stddev of the feature perturbation
  double jitter = 0.2;     // relative size jitter of the planted box
  double image_width = 640.0;
  double image_height = 480.0;

  void validate() const;
};

Dataset generate_synthetic(const SynthSpec& spec, std::uint64_t seed);

}  // namespace codisc
