#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <memory>
#include <span>
#include <vector>

#include "flowdep/conditions.hpp"
#include "flowdep/graph.hpp"
#include "flowdep/rng.hpp"

namespace flowdep {

struct WalkConfig {
  std::size_t walk_length = 5;
  std::size_t walks_per_vertex = 10;
  Millis epsilon = 1000;
  std::size_t n_t = 10;
  std::uint64_t rng_seed = 0;
  /// Worker threads for positive walks; 0 picks hardware concurrency.
  unsigned threads = 1;

  void validate() const;
};

enum class WalkLabel : std::uint8_t { Positive, Negative };

std::string_view to_string(WalkLabel label) noexcept;

/// A walk over vertex ids. For positive walks `step_edges[k]` is the edge
/// instance recorded for the move to vertices[k + 1] (its source is
/// vertices[k], or vertices[k - 1] after a remote-remote skip) and
/// `condition_trace[k]` holds the conditions satisfied when vertices[k + 2]
/// was chosen. Negative walks carry neither.
struct RandomWalk {
  std::vector<VertexId> vertices;
  std::vector<EdgeId> step_edges;
  std::vector<ConditionSet> condition_trace;
  WalkLabel label = WalkLabel::Positive;
};

/// One admissible next vertex together with the conditions it satisfies and
/// the edge instance that represents the move.
struct StepCandidate {
  VertexId vertex = 0;
  ConditionSet conditions;
  EdgeId edge = 0;
};

/// Constrained random walk generator. Pair-level condition checks are cached
/// per (previous, current) vertex pair, so one instance should serve many
/// walks. Not thread-safe; generate_walks uses one instance per worker.
class WalkGenerator {
 public:
  WalkGenerator(const CommGraph& graph, WalkConfig cfg);
  ~WalkGenerator();
  WalkGenerator(WalkGenerator&&) noexcept;
  WalkGenerator& operator=(WalkGenerator&&) = delete;

  /// Candidates for the step after `prefix` whose last move used
  /// `last_edge`. Vertices satisfying at least one timestamp condition are
  /// returned if any exist; otherwise the threshold fallback, then the
  /// any-neighbour fallback. Sorted by vertex id.
  std::vector<StepCandidate> next_candidates(std::span<const VertexId> prefix,
                                             EdgeId last_edge);

  /// First move from `start`: out-neighbours meeting n_t, else all of them.
  std::vector<StepCandidate> first_candidates(VertexId start) const;

  /// A single walk; stops early at vertices without outgoing edges. Returns a
  /// one-vertex walk if `start` has no outgoing edges.
  RandomWalk walk_from(VertexId start, Rng& rng);

 private:
  struct Cache;
  const CommGraph* graph_;
  WalkConfig cfg_;
  std::unique_ptr<Cache> cache_;
};

/// walks_per_vertex positive walks from every vertex with an outgoing edge,
/// ordered by start vertex. Vertex v draws from the stream derive_seed(seed, v),
/// so the output does not depend on the thread count.
std::vector<RandomWalk> generate_walks(const CommGraph& graph, const WalkConfig& cfg);

/// One negative walk per positive, same length, consecutive vertices distinct,
/// with at least one consecutive pair that is not an edge of the graph.
/// Throws ExhaustedError after 100 * length failed draws for one walk.
std::vector<RandomWalk> generate_negative_walks(const CommGraph& graph,
                                                std::span<const RandomWalk> positives,
                                                const WalkConfig& cfg);

/// JSON-lines, one walk per line: label, vertices (addresses), step_edges,
/// condition_trace (lists of condition names).
void write_walks_jsonl(std::ostream& out, const CommGraph& graph,
                       std::span<const RandomWalk> walks);
std::vector<RandomWalk> read_walks_jsonl(std::istream& in, const CommGraph& graph);
void write_walks_file(const std::filesystem::path& path, const CommGraph& graph,
                      std::span<const RandomWalk> walks);
std::vector<RandomWalk> read_walks_file(const std::filesystem::path& path,
                                        const CommGraph& graph);

}  // namespace flowdep
