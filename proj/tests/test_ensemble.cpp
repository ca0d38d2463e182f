#include <doctest.h>

#include <vector>

#include "codisc/ensemble.hpp"
#include "codisc/errors.hpp"
#include "codisc/rng.hpp"
#include "codisc/rounding.hpp"

using namespace codisc;

namespace {

Assignment make_assignment(const std::vector<std::vector<std::uint8_t>>& x,
                           const std::vector<std::pair<int, int>>& links) {
  std::vector<int> p;
  for (const auto& xi : x) p.push_back(static_cast<int>(xi.size()));
  Assignment a(p);
  a.x = x;
  for (const auto& [i, j] : links) a.set_e(i, j, 1);
  return a;
}

}  // namespace

TEST_CASE("max pooling") {
  const Assignment a = make_assignment({{1, 0}, {0, 1}}, {{0, 1}});
  const Assignment b = make_assignment({{0, 1}, {0, 1}}, {{1, 0}});

  SUBCASE("single run is the identity") {
    const PooledSolution p = max_pool(std::vector<Assignment>{a});
    CHECK(p.x == a.x);
    CHECK(p.e == a.e);
  }

  SUBCASE("two runs combine with logical or") {
    const PooledSolution p = max_pool(std::vector<Assignment>{a, b});
    CHECK(p.x[0] == std::vector<std::uint8_t>{1, 1});
    CHECK(p.x[1] == std::vector<std::uint8_t>{0, 1});
    CHECK(p.e_at(0, 1) == 1);
    CHECK(p.e_at(1, 0) == 1);
  }

  SUBCASE("identical runs pool to themselves") {
    const PooledSolution p = max_pool(std::vector<Assignment>{a, a, a});
    CHECK(p.x == a.x);
    CHECK(p.e == a.e);
  }

  SUBCASE("empty input is rejected") {
    CHECK_THROWS_AS(max_pool(std::vector<Assignment>{}), DataError);
  }
}

TEST_CASE("max pooling is monotone in the run list") {
  Rng rng(3);
  std::vector<Assignment> runs;
  for (int l = 0; l < 4; ++l) {
    Assignment a({3, 3});
    for (auto& xi : a.x) {
      for (auto& v : xi) v = rng.uniform() < 0.5;
    }
    a.set_e(0, 1, rng.uniform() < 0.5);
    a.set_e(1, 0, rng.uniform() < 0.5);
    runs.push_back(a);
    const PooledSolution p = max_pool(runs);
    if (runs.size() > 1) {
      const PooledSolution prev =
          max_pool(std::span<const Assignment>(runs.data(), runs.size() - 1));
      for (int i = 0; i < 2; ++i) {
        for (int k = 0; k < 3; ++k) CHECK(p.x[i][k] >= prev.x[i][k]);
      }
      for (std::size_t idx = 0; idx < p.e.size(); ++idx) CHECK(p.e[idx] >= prev.e[idx]);
    }
  }
}

TEST_CASE("average pooling keeps the majority") {
  const Assignment a = make_assignment({{1, 0}}, {});
  const Assignment b = make_assignment({{1, 1}}, {});
  const Assignment c = make_assignment({{0, 1}}, {});
  // Proposal 0 has 2/3 votes, proposal 1 has 2/3 votes.
  const PooledSolution p = average_pool(std::vector<Assignment>{a, b, c});
  CHECK(p.x[0] == std::vector<std::uint8_t>{1, 1});
  const PooledSolution q = average_pool(std::vector<Assignment>{a, a, c});
  CHECK(q.x[0] == std::vector<std::uint8_t>{1, 0});
}

TEST_CASE("region scores follow the pooled structure") {
  // Two images; image 0 retains proposals {0}, image 1 retains {1}.
  ScoreSet s(2);
  s.set(0, 1, SparseScoreMatrix::from_entries(2, 2, {{0, 0, 0.4}, {0, 1, 0.7}}));

  PooledSolution p;
  p.x = {{1, 0}, {0, 1}};
  p.e = {0, 1, 0, 0};  // only 0 -> 1

  const auto u = region_scores(p, s, /*tau=*/10);
  CHECK(u[0][0] == 0.7);  // best retained match of the single neighbor
  CHECK(u[0][1] == 0.0);  // not retained
  CHECK(u[1][0] == 0.0);
  CHECK(u[1][1] == 0.0);  // no pooled neighbors in row 1
}

TEST_CASE("region scores cap the neighbor count at tau") {
  // Image 0 linked to three neighbors with best matches 0.9, 0.5, 0.2.
  ScoreSet s(4);
  s.set(0, 1, SparseScoreMatrix::from_entries(1, 1, {{0, 0, 0.9}}));
  s.set(0, 2, SparseScoreMatrix::from_entries(1, 1, {{0, 0, 0.5}}));
  s.set(0, 3, SparseScoreMatrix::from_entries(1, 1, {{0, 0, 0.2}}));
  PooledSolution p;
  p.x = {{1}, {1}, {1}, {1}};
  p.e.assign(16, 0);
  p.e[0 * 4 + 1] = p.e[0 * 4 + 2] = p.e[0 * 4 + 3] = 1;

  CHECK(region_scores(p, s, 2)[0][0] == doctest::Approx(1.4));  // two strongest
  CHECK(region_scores(p, s, 10)[0][0] == doctest::Approx(1.6));  // all of them
}

TEST_CASE("final selection picks the best retained proposal") {
  ScoreSet s(2);
  s.set(0, 1, SparseScoreMatrix::from_entries(3, 1, {{0, 0, 0.2}, {1, 0, 0.9}, {2, 0, 0.9}}));
  s.set(1, 0, SparseScoreMatrix::from_entries(1, 3, {{0, 1, 0.9}}));
  PooledSolution p;
  p.x = {{1, 1, 1}, {1}};
  p.e = {0, 1, 1, 0};

  const auto u = region_scores(p, s, 10);
  CHECK(u[0] == std::vector<double>{0.2, 0.9, 0.9});
  const FinalSelection sel = select_final(p, u, s, /*tau=*/1);
  REQUIRE(sel.proposals[0].size() == 1);
  CHECK(sel.proposals[0][0] == 1);  // tie between 1 and 2 -> lowest index
  CHECK(sel.proposals[1][0] == 0);  // singleton
  CHECK(sel.e[0 * 2 + 1] == 1);     // positive interaction via proposal 1
  CHECK(sel.e[1 * 2 + 0] == 1);
}

TEST_CASE("final link rows hold min(tau, positive neighbors) ones") {
  Rng rng(7);
  ScoreSet s(5);
  std::vector<int> p(5, 2);
  for (int i = 0; i < 5; ++i) {
    for (int j = 0; j < 5; ++j) {
      if (i == j) continue;
      std::vector<ScoreEntry> entries;
      if (rng.uniform() < 0.6) entries.push_back({0, 0, rng.uniform(0.1, 1.0)});
      s.set(i, j, SparseScoreMatrix::from_entries(2, 2, std::move(entries)));
    }
  }
  PooledSolution pooled;
  pooled.x.assign(5, {1, 0});
  pooled.e.assign(25, 1);
  for (int i = 0; i < 5; ++i) pooled.e[static_cast<std::size_t>(i) * 5 + i] = 0;

  const auto u = region_scores(pooled, s, 2);
  const FinalSelection sel = select_final(pooled, u, s, /*tau=*/2);
  for (int i = 0; i < 5; ++i) {
    int positive = 0;
    for (int j = 0; j < 5; ++j) {
      if (j == i) continue;
      const SparseScoreMatrix* m = s.find(i, j);
      if (!m || m->empty()) continue;
      // Selected proposals are retained 0s; entry (0,0) decides.
      for (const ScoreEntry& en : m->entries()) {
        if (en.row == sel.proposals[i][0] && en.col == sel.proposals[j][0] && en.value > 0.0) {
          ++positive;
        }
      }
    }
    int row = 0;
    for (int j = 0; j < 5; ++j) row += sel.e[static_cast<std::size_t>(i) * 5 + j];
    CHECK(row == std::min(2, positive));
  }
}

TEST_CASE("fallback when an image retains nothing") {
  ScoreSet s(2);
  s.set(0, 1, SparseScoreMatrix::from_entries(2, 1, {{0, 0, 0.1}, {1, 0, 0.8}}));
  PooledSolution p;
  p.x = {{0, 0}, {1}};  // degenerate pooled x for image 0
  p.e = {0, 1, 1, 0};
  const auto u = region_scores(p, s, 1);
  const FinalSelection sel = select_final(p, u, s, 1);
  CHECK(sel.proposals[0][0] == 1);  // heaviest row mass
}

TEST_CASE("top-m selection returns ranked retained proposals") {
  ScoreSet s(2);
  s.set(0, 1, SparseScoreMatrix::from_entries(3, 1, {{0, 0, 0.3}, {1, 0, 0.9}, {2, 0, 0.5}}));
  PooledSolution p;
  p.x = {{1, 1, 1}, {1}};
  p.e = {0, 1, 1, 0};
  const auto u = region_scores(p, s, 1);
  const FinalSelection sel = select_final(p, u, s, 1, /*top_m=*/2);
  CHECK(sel.proposals[0] == std::vector<std::int32_t>{1, 2});
}
