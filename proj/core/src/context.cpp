#include "flowdep/context.hpp"

#include <algorithm>

#include "flowdep/error.hpp"

namespace flowdep {

std::vector<CandidateDependency> split_walk(std::span<const VertexId> walk, WalkLabel label,
                                            const SplitOptions& options) {
  if (options.context_size < 2) throw ConfigError("context size must be >= 2");
  std::vector<CandidateDependency> pairs;
  const auto length = walk.size();
  if (length < 2) return pairs;

  const auto ctx = options.context_size;
  // Heads of full windows, then (optionally) of truncated tail windows.
  std::size_t last_head = length >= ctx ? length - ctx : 0;
  if (options.trailing_windows) last_head = length - 2;

  for (std::size_t head = 0; head <= last_head; ++head) {
    const auto end = std::min(length, head + ctx);
    for (std::size_t k = head + 1; k < end; ++k) {
      if (walk[k] == walk[head]) continue;
      pairs.push_back({walk[head], walk[k], label});
    }
  }
  return pairs;
}

std::vector<CandidateDependency> split_walks(std::span<const RandomWalk> walks,
                                             const SplitOptions& options) {
  std::vector<CandidateDependency> pairs;
  for (const auto& w : walks) {
    auto part = split_walk(w, options);
    pairs.insert(pairs.end(), part.begin(), part.end());
  }
  return pairs;
}

}  // namespace flowdep
