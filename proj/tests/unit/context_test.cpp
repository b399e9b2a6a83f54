#include <gtest/gtest.h>

#include "fixtures.hpp"
#include "flowdep/context.hpp"
#include "flowdep/rng.hpp"

using namespace flowdep;

namespace {

using Pairs = std::vector<std::pair<VertexId, VertexId>>;

Pairs pairs_of(const std::vector<CandidateDependency>& deps) {
  Pairs out;
  for (const auto& d : deps) out.emplace_back(d.first, d.second);
  return out;
}

Pairs split(std::vector<VertexId> walk, std::size_t ctx, bool trailing = false) {
  return pairs_of(split_walk(walk, WalkLabel::Positive, {ctx, trailing}));
}

}  // namespace

TEST(SplitWalk, Examples) {
  EXPECT_EQ(split({11, 12, 13, 16}, 3), (Pairs{{11, 12}, {11, 13}, {12, 13}, {12, 16}}));
  EXPECT_EQ(split({1, 2}, 4), (Pairs{{1, 2}}));
  EXPECT_EQ(split({1, 2, 1}, 3), (Pairs{{1, 2}}));
}

TEST(SplitWalk, TrailingWindows) {
  EXPECT_EQ(split({11, 12, 13, 16}, 3, true),
            (Pairs{{11, 12}, {11, 13}, {12, 13}, {12, 16}, {13, 16}}));
}

TEST(SplitWalk, KeepsLabelAndDuplicates) {
  const std::vector<VertexId> walk{1, 2, 1, 2};
  const auto deps = split_walk(walk, WalkLabel::Negative, {2, false});
  ASSERT_EQ(deps.size(), 3u);
  for (const auto& d : deps) EXPECT_EQ(d.source_label, WalkLabel::Negative);
  EXPECT_EQ(pairs_of(deps), (Pairs{{1, 2}, {2, 1}, {1, 2}}));
}

TEST(SplitWalk, CountFormulaOnDistinctWalks) {
  Rng rng(17);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t ctx = 2 + uniform_index(rng, 6);
    const std::size_t len = ctx + uniform_index(rng, 20);
    std::vector<VertexId> walk(len);
    for (std::size_t i = 0; i < len; ++i) walk[i] = static_cast<VertexId>(i * 3 + 1);
    const auto full = (len - ctx + 1) * (ctx - 1);
    EXPECT_EQ(split(walk, ctx).size(), full);
    EXPECT_EQ(split(walk, ctx, true).size(), full + (ctx - 2) * (ctx - 1) / 2);
  }
}

TEST(SplitWalk, OneSided) {
  Rng rng(5);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<VertexId> walk(2 + uniform_index(rng, 15));
    for (auto& v : walk) v = static_cast<VertexId>(uniform_index(rng, 6));
    const std::size_t ctx = 2 + uniform_index(rng, 5);
    for (const auto& [a, b] : split(walk, ctx, trial % 2 == 0)) {
      EXPECT_NE(a, b);
      // Some occurrence of a precedes some occurrence of b within ctx - 1 steps.
      bool ok = false;
      for (std::size_t i = 0; i < walk.size() && !ok; ++i) {
        for (std::size_t j = i + 1; j < walk.size() && j < i + ctx && !ok; ++j) {
          ok = walk[i] == a && walk[j] == b;
        }
      }
      EXPECT_TRUE(ok);
    }
  }
}

TEST(SplitWalks, ConcatenatesInOrder) {
  RandomWalk a{{1, 2, 3}, {}, {}, WalkLabel::Positive};
  RandomWalk b{{4, 5}, {}, {}, WalkLabel::Negative};
  const std::vector<RandomWalk> walks{a, b};
  const auto deps = split_walks(walks, {3, false});
  EXPECT_EQ(pairs_of(deps), (Pairs{{1, 2}, {1, 3}, {4, 5}}));
  EXPECT_EQ(deps.back().source_label, WalkLabel::Negative);
}
