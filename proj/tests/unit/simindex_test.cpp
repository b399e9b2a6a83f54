#include <cmath>

#include <gtest/gtest.h>

#include "flowdep/error.hpp"
#include "flowdep/rng.hpp"
#include "flowdep/simindex.hpp"
#include "metric_oracles.hpp"

using namespace flowdep;
using flowdep::testing::naive_kendall;
using flowdep::testing::naive_spearman;

namespace {

using EdgeList = std::vector<std::pair<VertexId, VertexId>>;

// a=0, b=1, v=2, y=3, z=4
SimpleDigraph fan() {
  const EdgeList edges{{0, 2}, {1, 2}, {2, 3}, {2, 4}};
  return SimpleDigraph(5, edges);
}

std::vector<double> random_values(Rng& rng, std::size_t n, int distinct) {
  std::vector<double> v(n);
  for (auto& x : v) x = static_cast<double>(uniform_index(rng, static_cast<std::size_t>(distinct)));
  return v;
}

}  // namespace

TEST(IndexScore, Examples) {
  const auto g = fan();
  EXPECT_EQ(index_score(g, 0, 3, IndexKind::CN), 1.0);
  EXPECT_EQ(index_score(g, 0, 3, IndexKind::RA), 0.5);
  EXPECT_EQ(index_score(g, 0, 3, IndexKind::PA), 1.0);
  EXPECT_NEAR(index_score(g, 0, 3, IndexKind::AA), 1.4427, 1e-4);
  EXPECT_DOUBLE_EQ(index_score(g, 0, 3, IndexKind::AA), 1.0 / std::log(2.0));
}

TEST(IndexScore, EmptyNeighbourhoodsAndDirection) {
  const auto g = fan();
  for (const auto k : kAllIndexKinds) {
    EXPECT_EQ(index_score(g, 3, 0, k), 0.0);
  }
  EXPECT_EQ(index_score(g, 0, 1, IndexKind::PA), 0.0);
}

TEST(IndexScore, AdamicAdarSkipsSingleSuccessor) {
  const EdgeList edges{{0, 1}, {1, 2}};
  const SimpleDigraph g(3, edges);
  EXPECT_EQ(index_score(g, 0, 2, IndexKind::CN), 1.0);
  EXPECT_EQ(index_score(g, 0, 2, IndexKind::RA), 1.0);
  EXPECT_EQ(index_score(g, 0, 2, IndexKind::AA), 0.0);
}

TEST(IndexScore, MatchesBruteForceOnRandomGraphs) {
  Rng rng(12);
  for (int trial = 0; trial < 30; ++trial) {
    const std::size_t n = 3 + uniform_index(rng, 10);
    EdgeList edges;
    std::vector<std::vector<bool>> adj(n, std::vector<bool>(n));
    for (std::size_t k = 0; k < 3 * n; ++k) {
      const auto a = static_cast<VertexId>(uniform_index(rng, n));
      const auto b = static_cast<VertexId>(uniform_index(rng, n));
      edges.emplace_back(a, b);  // duplicates collapse
      adj[a][b] = true;
    }
    const SimpleDigraph g(n, edges);
    auto out_deg = [&](std::size_t v) {
      std::size_t d = 0;
      for (std::size_t w = 0; w < n; ++w) d += adj[v][w];
      return d;
    };
    auto in_deg = [&](std::size_t v) {
      std::size_t d = 0;
      for (std::size_t w = 0; w < n; ++w) d += adj[w][v];
      return d;
    };
    for (VertexId x = 0; x < n; ++x) {
      for (VertexId y = 0; y < n; ++y) {
        double cn = 0, ra = 0, aa = 0;
        for (std::size_t v = 0; v < n; ++v) {
          if (!adj[x][v] || !adj[v][y]) continue;
          cn += 1;
          ra += 1.0 / static_cast<double>(out_deg(v));
          if (out_deg(v) != 1) aa += 1.0 / std::log(static_cast<double>(out_deg(v)));
        }
        EXPECT_EQ(index_score(g, x, y, IndexKind::CN), cn);
        EXPECT_NEAR(index_score(g, x, y, IndexKind::RA), ra, 1e-12);
        EXPECT_NEAR(index_score(g, x, y, IndexKind::AA), aa, 1e-12);
        EXPECT_EQ(index_score(g, x, y, IndexKind::PA),
                  static_cast<double>(out_deg(x) * in_deg(y)));
      }
    }
  }
}

TEST(RankCorrelation, Examples) {
  const std::vector<double> x{1, 2, 3, 4, 5};
  const std::vector<double> rev{5, 4, 3, 2, 1};
  EXPECT_DOUBLE_EQ(*spearman(x, x), 1.0);
  EXPECT_DOUBLE_EQ(*spearman(x, rev), -1.0);
  EXPECT_DOUBLE_EQ(*kendall_tau(x, x), 1.0);
  EXPECT_DOUBLE_EQ(*kendall_tau(x, rev), -1.0);

  const std::vector<double> a{1, 2, 2, 4}, b{1, 3, 2, 4};
  EXPECT_EQ(spearman(a, b), naive_spearman(a, b));
  // Mid-ranks (1, 2.5, 2.5, 4) against (1, 3, 2, 4).
  EXPECT_NEAR(*spearman(a, b), 4.5 / std::sqrt(4.5 * 5.0), 1e-12);
}

TEST(RankCorrelation, UndefinedAndErrors) {
  const std::vector<double> flat{3, 3, 3}, x{1, 2, 3};
  EXPECT_FALSE(spearman(flat, x).has_value());
  EXPECT_FALSE(kendall_tau(x, flat).has_value());
  const std::vector<double> one{1}, two{1, 2};
  EXPECT_THROW(spearman(one, one), ConfigError);
  EXPECT_THROW(kendall_tau(x, two), ConfigError);
}

TEST(RankCorrelation, MatchesQuadraticOracles) {
  Rng rng(99);
  for (int trial = 0; trial < 100; ++trial) {
    const auto xs = random_values(rng, 50, trial % 2 ? 10 : 1000);
    const auto ys = random_values(rng, 50, trial % 3 ? 8 : 1000);
    EXPECT_EQ(spearman(xs, ys), naive_spearman(xs, ys));
    EXPECT_EQ(kendall_tau(xs, ys), naive_kendall(xs, ys));
  }
}

TEST(RankCorrelation, SymmetricAndMonotoneInvariant) {
  Rng rng(4);
  for (int trial = 0; trial < 50; ++trial) {
    const auto xs = random_values(rng, 30, 12);
    const auto ys = random_values(rng, 30, 12);
    std::vector<double> warped(xs.size());
    for (std::size_t i = 0; i < xs.size(); ++i) warped[i] = std::exp(xs[i]) * 3 - 7;
    EXPECT_EQ(spearman(xs, ys), spearman(ys, xs));
    EXPECT_EQ(kendall_tau(xs, ys), kendall_tau(ys, xs));
    EXPECT_EQ(spearman(warped, ys), spearman(xs, ys));
    EXPECT_EQ(kendall_tau(warped, ys), kendall_tau(xs, ys));
  }
}

TEST(Correlate, OneEntryPerIndex) {
  const auto g = fan();
  const EdgeList pairs{{0, 3}, {1, 4}, {0, 1}, {2, 3}};
  const std::vector<double> prob{0.9, 0.8, 0.1, 0.5};
  const auto rows = score_pairs(g, pairs, prob);
  ASSERT_EQ(rows.size(), 4u);
  EXPECT_EQ(rows[0].scores[1], 1.0);  // CN
  EXPECT_EQ(rows[3].model_probability, 0.5);
  const auto corr = correlate(rows);
  ASSERT_EQ(corr.size(), kAllIndexKinds.size());
  for (std::size_t k = 0; k < corr.size(); ++k) EXPECT_EQ(corr[k].kind, kAllIndexKinds[k]);
}
