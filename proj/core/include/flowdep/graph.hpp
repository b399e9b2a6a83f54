#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <unordered_map>
#include <vector>

#include "flowdep/flow.hpp"

namespace flowdep {

using VertexId = std::uint32_t;
using EdgeId = std::uint32_t;

/// One sampled flow as a directed multigraph edge.
struct Edge {
  VertexId src = 0;
  VertexId dst = 0;
  std::uint16_t src_port = 0;
  std::uint16_t dst_port = 0;
  Protocol proto = Protocol::Tcp;
  Millis t_start = 0;
  Millis t_end = 0;

  friend bool operator==(const Edge&, const Edge&) = default;
};

/// Directed communication multigraph over selected addresses. Parallel edges
/// keep their flow attributes; per-pair counts are maintained on insertion.
class CommGraph {
 public:
  CommGraph() = default;
  explicit CommGraph(std::span<const Address> vertices);

  /// Returns the existing id when the address is already present.
  VertexId add_vertex(const Address& address);

  /// Both endpoints must already be vertices (UnknownAddressError otherwise).
  EdgeId add_edge(const FlowRecord& flow);
  EdgeId add_edge(const Edge& edge);

  std::size_t vertex_count() const noexcept { return addresses_.size(); }
  std::size_t edge_count() const noexcept { return edges_.size(); }

  const Address& address(VertexId v) const { return addresses_.at(v); }
  std::span<const Address> addresses() const noexcept { return addresses_; }
  std::optional<VertexId> find(const Address& address) const;
  /// Throws UnknownAddressError.
  VertexId index_of(const Address& address) const;

  std::span<const Edge> edges() const noexcept { return edges_; }
  const Edge& edge(EdgeId e) const { return edges_.at(e); }

  /// Parallel edges src -> dst in insertion order.
  std::span<const EdgeId> edges_between(VertexId src, VertexId dst) const;
  std::size_t pair_flow_count(VertexId src, VertexId dst) const;
  std::size_t pair_flow_count(const Address& src, const Address& dst) const;
  bool has_edge(VertexId src, VertexId dst) const;

  /// Distinct successors / predecessors in ascending id order.
  std::span<const VertexId> out_neighbors(VertexId v) const { return out_.at(v); }
  std::span<const VertexId> in_neighbors(VertexId v) const { return in_.at(v); }

  /// Number of distinct (src, dst) pairs with at least one edge.
  std::size_t pair_count() const noexcept { return pairs_.size(); }

 private:
  static std::uint64_t key(VertexId a, VertexId b) noexcept {
    return (std::uint64_t{a} << 32) | b;
  }

  std::vector<Address> addresses_;
  std::unordered_map<Address, VertexId> index_;
  std::vector<Edge> edges_;
  std::unordered_map<std::uint64_t, std::vector<EdgeId>> pairs_;
  std::vector<std::vector<VertexId>> out_;
  std::vector<std::vector<VertexId>> in_;
};

/// JSON-lines dump: first line {"kind":"vertices","vertices":[...]}, then one
/// {"kind":"edge",...} object per edge with all attributes.
void write_graph_jsonl(std::ostream& out, const CommGraph& graph);
CommGraph read_graph_jsonl(std::istream& in);
void write_graph_file(const std::filesystem::path& path, const CommGraph& graph);
CommGraph read_graph_file(const std::filesystem::path& path);

}  // namespace flowdep
