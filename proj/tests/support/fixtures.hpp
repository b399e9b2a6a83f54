#pragma once

#include <cstdint>
#include <vector>

#include "flowdep/flow.hpp"
#include "flowdep/graph.hpp"
#include "flowdep/rng.hpp"

namespace flowdep::testing {

FlowRecord make_flow(const Address& src, const Address& dst, Millis start, Millis end,
                     std::uint16_t sport = 50000, std::uint16_t dport = 443,
                     Protocol proto = Protocol::Tcp);

/// Small dense trace for oracle cross-checks: few hosts, few ports, short
/// time span, and a share of flows that are mirrored replies of earlier ones.
std::vector<FlowRecord> random_oracle_fixture(Rng& rng, std::size_t max_flows);

/// Multigraph with every address as a vertex and every flow as an edge.
CommGraph graph_of(const std::vector<FlowRecord>& flows);

}  // namespace flowdep::testing
