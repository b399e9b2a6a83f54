#pragma once

#include <array>
#include <optional>
#include <span>
#include <string_view>
#include <utility>
#include <vector>

#include "flowdep/graph.hpp"

namespace flowdep {

enum class IndexKind : std::uint8_t { AA, CN, PA, RA };

inline constexpr std::array<IndexKind, 4> kAllIndexKinds = {IndexKind::AA, IndexKind::CN,
                                                            IndexKind::PA, IndexKind::RA};

std::string_view to_string(IndexKind kind) noexcept;

/// The multigraph collapsed to distinct directed pairs.
class SimpleDigraph {
 public:
  explicit SimpleDigraph(const CommGraph& graph);
  SimpleDigraph(std::size_t vertex_count, std::span<const std::pair<VertexId, VertexId>> edges);

  std::size_t vertex_count() const noexcept { return out_.size(); }
  /// Sorted, distinct.
  std::span<const VertexId> out_neighbors(VertexId v) const { return out_.at(v); }
  std::span<const VertexId> in_neighbors(VertexId v) const { return in_.at(v); }

 private:
  std::vector<std::vector<VertexId>> out_;
  std::vector<std::vector<VertexId>> in_;
};

/// Directed local indices through intermediates v with x->v->y:
/// CN counts them, RA sums 1/|out(v)|, AA sums 1/ln|out(v)| skipping
/// |out(v)| = 1, PA is |out(x)| * |in(y)|.
double index_score(const SimpleDigraph& g, VertexId x, VertexId y, IndexKind kind);

/// Pearson correlation of mid-ranks. Empty when either side has no rank
/// variance. Throws ConfigError on unequal lengths or fewer than 2 values.
std::optional<double> spearman(std::span<const double> xs, std::span<const double> ys);

/// Tau-b in O(n log n). Empty when either side is all ties.
std::optional<double> kendall_tau(std::span<const double> xs, std::span<const double> ys);

struct SimIndexRow {
  VertexId src = 0;
  VertexId dst = 0;
  std::array<double, 4> scores{};  // in kAllIndexKinds order
  double model_probability = 0.0;
};

struct IndexCorrelation {
  IndexKind kind = IndexKind::AA;
  std::optional<double> spearman;
  std::optional<double> kendall;
};

std::vector<SimIndexRow> score_pairs(const SimpleDigraph& g,
                                     std::span<const std::pair<VertexId, VertexId>> pairs,
                                     std::span<const double> probabilities);

/// Correlation of each index with the model probability; rows must number at
/// least 2.
std::vector<IndexCorrelation> correlate(std::span<const SimIndexRow> rows);

}  // namespace flowdep
