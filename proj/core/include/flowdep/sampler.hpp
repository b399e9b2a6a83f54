#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "flowdep/address.hpp"
#include "flowdep/flow.hpp"
#include "flowdep/graph.hpp"

namespace flowdep {

struct SamplerConfig {
  std::size_t n_internal = 100;
  std::size_t m_external = 0;
  std::size_t k_edges = 20000;
  std::vector<CidrPrefix> internal_prefixes;
  std::uint64_t rng_seed = 0;
  /// Drop addresses that mostly initiate unanswered flows (scan-like).
  bool exclude_scanners = false;
  double scanner_fraction = 0.25;

  /// Throws ConfigError listing every violated constraint.
  void validate() const;
};

bool is_internal(const Address& address, std::span<const CidrPrefix> prefixes);

struct AddressSelection {
  std::vector<Address> addresses;  // ascending
  std::vector<std::string> warnings;
};

/// Picks the n_internal internal and m_external external addresses that take
/// part (as source or destination) in the most flows. Ties go to the
/// lexicographically smaller address.
AddressSelection select_top_addresses(std::span<const FlowRecord> flows,
                                      const SamplerConfig& cfg);

struct SampleResult {
  CommGraph graph;
  std::size_t eligible_flows = 0;
  std::vector<std::string> warnings;
};

/// Single global reservoir of k_edges over the flows whose endpoints are both
/// selected. The graph has every selected address as a vertex and the
/// retained flows as edges, in stream order.
SampleResult reservoir_sample_edges(std::span<const FlowRecord> flows,
                                    std::span<const Address> selected,
                                    const SamplerConfig& cfg);

/// select_top_addresses followed by reservoir_sample_edges.
SampleResult sample_graph(std::span<const FlowRecord> flows, const SamplerConfig& cfg);

}  // namespace flowdep
