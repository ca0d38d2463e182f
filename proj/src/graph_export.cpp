#include "codisc/graph_export.hpp"

#include <algorithm>
#include <map>
#include <set>
#include <sstream>

#include "codisc/errors.hpp"

namespace codisc {

namespace {

struct Edge {
  int a = 0;
  int b = 0;
  double weight = 0.0;
};

// Undirected weighted edges of the region graph.
std::vector<Edge> build_edges(const std::vector<std::int32_t>& proposal,
                              const std::vector<std::uint8_t>& e, const ScoreSet& scores) {
  const int n = static_cast<int>(proposal.size());
  if (static_cast<int>(e.size()) != n * n) {
    throw DataError("final link matrix does not match the image count");
  }
  auto score_at = [&](int i, int j) {
    const SparseScoreMatrix* m = scores.find(i, j);
    if (!m) return 0.0;
    for (const ScoreEntry& en : m->entries()) {
      if (en.row == proposal[i] && en.col == proposal[j]) return en.value;
    }
    return 0.0;
  };
  std::vector<Edge> edges;
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      if (!e[static_cast<std::size_t>(i) * n + j] && !e[static_cast<std::size_t>(j) * n + i]) {
        continue;
      }
      const double w = std::max(score_at(i, j), score_at(j, i));
      if (w > 0.0) edges.push_back({i, j, w});
    }
  }
  return edges;
}

struct UnionFind {
  std::vector<int> parent;
  explicit UnionFind(int n) : parent(n) {
    for (int i = 0; i < n; ++i) parent[i] = i;
  }
  int find(int x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  }
  void unite(int a, int b) { parent[find(a)] = find(b); }
};

}  // namespace

std::vector<RegionComponent> extract_components(
    const std::vector<std::int32_t>& final_proposal_per_image,
    const std::vector<std::uint8_t>& final_e, const ScoreSet& scores,
    const ComponentParams& params) {
  const int n = static_cast<int>(final_proposal_per_image.size());
  const int min_size = params.min_size;
  const int max_size = params.max_size > 0 ? params.max_size : std::max(min_size, n / 2);
  if (min_size < 2) throw DataError("component min_size must be >= 2");
  if (max_size < min_size) throw DataError("component max_size must be >= min_size");

  std::vector<Edge> edges = build_edges(final_proposal_per_image, final_e, scores);
  std::vector<bool> removed(n, false);
  std::vector<RegionComponent> out;

  while (static_cast<int>(out.size()) < params.target_components) {
    std::vector<Edge> remaining;
    for (const Edge& e : edges) {
      if (!removed[e.a] && !removed[e.b]) remaining.push_back(e);
    }
    if (remaining.empty()) break;

    // Candidate cutoffs: every remaining distinct score plus zero, ascending;
    // an edge survives cutoff t when its score is strictly greater.
    std::set<double> cutoffs{0.0};
    for (const Edge& e : remaining) cutoffs.insert(e.weight);

    bool emitted = false;
    for (double t : cutoffs) {
      UnionFind uf(n);
      for (const Edge& e : remaining) {
        if (e.weight > t) uf.unite(e.a, e.b);
      }
      std::map<int, std::vector<int>> groups;
      for (int i = 0; i < n; ++i) {
        if (!removed[i]) groups[uf.find(i)].push_back(i);
      }
      std::vector<std::vector<int>> qualifying;
      bool oversize = false;
      for (auto& [root, members] : groups) {
        if (static_cast<int>(members.size()) >= min_size) {
          if (static_cast<int>(members.size()) > max_size) {
            oversize = true;
            break;
          }
          qualifying.push_back(std::move(members));
        }
      }
      if (oversize || qualifying.empty()) continue;

      // Larger components first, then earliest member.
      std::sort(qualifying.begin(), qualifying.end(),
                [](const std::vector<int>& a, const std::vector<int>& b) {
                  if (a.size() != b.size()) return a.size() > b.size();
                  return a.front() < b.front();
                });
      for (auto& members : qualifying) {
        for (int i : members) removed[i] = true;
        out.push_back({t, std::move(members)});
        if (static_cast<int>(out.size()) >= params.target_components) break;
      }
      emitted = true;
      break;
    }
    if (!emitted) break;
  }
  return out;
}

std::string components_dot(const Dataset& dataset,
                           const std::vector<std::int32_t>& final_proposal_per_image,
                           const std::vector<std::uint8_t>& final_e, const ScoreSet& scores,
                           const std::vector<RegionComponent>& components) {
  const std::vector<Edge> edges = build_edges(final_proposal_per_image, final_e, scores);
  std::ostringstream dot;
  dot << "graph region_components {\n";
  dot << "  node [shape=box];\n";
  for (std::size_t c = 0; c < components.size(); ++c) {
    const RegionComponent& comp = components[c];
    dot << "  subgraph cluster_" << c << " {\n";
    dot << "    label=\"component " << c << " (threshold " << comp.threshold << ")\";\n";
    std::set<int> members(comp.image_indices.begin(), comp.image_indices.end());
    for (int i : comp.image_indices) {
      const ImageRecord& im = dataset.images[i];
      dot << "    n" << i << " [label=\"" << im.id;
      if (!im.class_label.empty()) dot << "\\n" << im.class_label;
      dot << "\\nregion " << final_proposal_per_image[i] << "\"];\n";
    }
    for (const Edge& e : edges) {
      if (members.count(e.a) && members.count(e.b) && e.weight > comp.threshold) {
        dot << "    n" << e.a << " -- n" << e.b << ";\n";
      }
    }
    dot << "  }\n";
  }
  dot << "}\n";
  return dot.str();
}

std::string components_listing(const Dataset& dataset,
                               const std::vector<RegionComponent>& components) {
  std::ostringstream out;
  for (std::size_t c = 0; c < components.size(); ++c) {
    const RegionComponent& comp = components[c];
    out << "component " << c << ": size " << comp.image_indices.size() << ", threshold "
        << comp.threshold << "\n";
    std::map<std::string, int> labels;
    for (int i : comp.image_indices) {
      const ImageRecord& im = dataset.images[i];
      out << "  " << im.id;
      if (!im.class_label.empty()) {
        out << " (" << im.class_label << ")";
        labels[im.class_label] += 1;
      }
      out << "\n";
    }
    if (!labels.empty()) {
      out << "  majority:";
      auto best = std::max_element(labels.begin(), labels.end(),
                                   [](const auto& a, const auto& b) {
                                     return a.second < b.second;
                                   });
      out << " " << best->first << " (" << best->second << "/" << comp.image_indices.size()
          << ")\n";
    }
  }
  return out.str();
}

}  // namespace codisc
