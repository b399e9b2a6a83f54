#pragma once

#include <span>
#include <vector>

#include "flowdep/graph.hpp"
#include "flowdep/walks.hpp"

namespace flowdep {

/// Ordered pair taken from one context window: the head and a later member.
struct CandidateDependency {
  VertexId first = 0;
  VertexId second = 0;
  WalkLabel source_label = WalkLabel::Positive;

  friend bool operator==(const CandidateDependency&, const CandidateDependency&) = default;
};

struct SplitOptions {
  std::size_t context_size = 4;
  /// Also emit the shrinking windows at the end of the walk.
  bool trailing_windows = false;
};

/// One-sided sliding window. Windows of context_size vertices with stride 1
/// pair their head with every later member; a walk shorter than the window
/// yields a single truncated window. Pairs with first == second are skipped,
/// duplicates are kept.
std::vector<CandidateDependency> split_walk(std::span<const VertexId> walk, WalkLabel label,
                                            const SplitOptions& options);

inline std::vector<CandidateDependency> split_walk(const RandomWalk& walk,
                                                   const SplitOptions& options) {
  return split_walk(walk.vertices, walk.label, options);
}

std::vector<CandidateDependency> split_walks(std::span<const RandomWalk> walks,
                                             const SplitOptions& options);

}  // namespace flowdep
