#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "codisc/dataset.hpp"
#include "codisc/sparse_score.hpp"

namespace codisc {

struct ComponentParams {
  int min_size = 4;
  int max_size = 0;  // 0 means n/2, resolved at extraction time
  int target_components = 10;
};

struct RegionComponent {
  double threshold = 0.0;           // score cutoff this component was emitted at
  std::vector<int> image_indices;   // members, ascending
};

// Region graph over the final selections: one node per image (its chosen
// region), an undirected edge between i and j when the images are linked in
// either direction and the stand-out score between the two chosen regions
// exceeds the threshold. Components are peeled off iteratively: at each
// round the smallest threshold (among the remaining distinct edge scores,
// plus zero) whose qualifying components - those with at least min_size
// nodes - all stay within max_size is applied, the qualifying components are
// emitted and removed, and the search repeats until target_components is
// reached or no threshold qualifies.
std::vector<RegionComponent> extract_components(
    const std::vector<std::int32_t>& final_proposal_per_image,
    const std::vector<std::uint8_t>& final_e, const ScoreSet& scores,
    const ComponentParams& params);

// DOT rendering of the emitted components, one cluster each, labeled with
// image ids (and class labels when present).
std::string components_dot(const Dataset& dataset,
                           const std::vector<std::int32_t>& final_proposal_per_image,
                           const std::vector<std::uint8_t>& final_e, const ScoreSet& scores,
                           const std::vector<RegionComponent>& components);

// Plain-text component listing (index, threshold, size, members).
std::string components_listing(const Dataset& dataset,
                               const std::vector<RegionComponent>& components);

}  // namespace codisc
