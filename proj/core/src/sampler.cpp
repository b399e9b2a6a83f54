#include "flowdep/sampler.hpp"

#include <algorithm>
#include <map>
#include <set>
#include <unordered_map>
#include <unordered_set>

#include "flowdep/error.hpp"
#include "flowdep/reservoir.hpp"

namespace flowdep {
namespace {

// Fraction of flows initiated by each address whose (dst, src) pair never
// appears in the input.
std::unordered_map<Address, double> unanswered_fraction(std::span<const FlowRecord> flows) {
  std::set<std::pair<std::string_view, std::string_view>> pairs;
  for (const auto& f : flows) pairs.emplace(f.src_ip, f.dst_ip);
  std::unordered_map<Address, std::pair<std::size_t, std::size_t>> counts;
  for (const auto& f : flows) {
    auto& [unanswered, total] = counts[f.src_ip];
    ++total;
    if (!pairs.contains({f.dst_ip, f.src_ip})) ++unanswered;
  }
  std::unordered_map<Address, double> fraction;
  for (const auto& [address, c] : counts) {
    fraction[address] = static_cast<double>(c.first) / static_cast<double>(c.second);
  }
  return fraction;
}

}  // namespace

void SamplerConfig::validate() const {
  std::vector<std::string> problems;
  if (k_edges < 1) problems.emplace_back("sampler.k_edges must be >= 1");
  if (scanner_fraction < 0.0 || scanner_fraction > 1.0) {
    problems.emplace_back("sampler.scanner_fraction must lie in [0, 1]");
  }
  if (!problems.empty()) {
    std::string msg;
    for (const auto& p : problems) msg += (msg.empty() ? "" : "; ") + p;
    throw ConfigError(msg);
  }
}

bool is_internal(const Address& address, std::span<const CidrPrefix> prefixes) {
  return std::any_of(prefixes.begin(), prefixes.end(),
                     [&](const CidrPrefix& p) { return p.contains(address); });
}

AddressSelection select_top_addresses(std::span<const FlowRecord> flows,
                                      const SamplerConfig& cfg) {
  std::map<Address, std::size_t> counts;
  for (const auto& f : flows) {
    ++counts[f.src_ip];
    ++counts[f.dst_ip];
  }

  std::unordered_set<Address> excluded;
  if (cfg.exclude_scanners) {
    for (const auto& [address, fraction] : unanswered_fraction(flows)) {
      if (fraction > cfg.scanner_fraction) excluded.insert(address);
    }
  }

  std::vector<std::pair<Address, std::size_t>> internal;
  std::vector<std::pair<Address, std::size_t>> external;
  for (const auto& [address, count] : counts) {
    if (excluded.contains(address)) continue;
    (is_internal(address, cfg.internal_prefixes) ? internal : external)
        .emplace_back(address, count);
  }

  AddressSelection selection;
  const auto take = [&](std::vector<std::pair<Address, std::size_t>>& pool,
                        std::size_t wanted, const char* label) {
    // counts was a std::map, so equal counts are already in address order and
    // a stable sort keeps them that way.
    std::stable_sort(pool.begin(), pool.end(),
                     [](const auto& a, const auto& b) { return a.second > b.second; });
    if (pool.size() < wanted) {
      selection.warnings.push_back("requested " + std::to_string(wanted) + " " + label +
                                   " addresses, only " + std::to_string(pool.size()) +
                                   " available");
    }
    const auto n = std::min(wanted, pool.size());
    for (std::size_t i = 0; i < n; ++i) selection.addresses.push_back(pool[i].first);
  };
  take(internal, cfg.n_internal, "internal");
  take(external, cfg.m_external, "external");
  std::sort(selection.addresses.begin(), selection.addresses.end());
  return selection;
}

SampleResult reservoir_sample_edges(std::span<const FlowRecord> flows,
                                    std::span<const Address> selected,
                                    const SamplerConfig& cfg) {
  cfg.validate();
  const std::unordered_set<std::string_view> members(selected.begin(), selected.end());

  // Reservoir holds stream positions so the graph can be built in input order.
  Reservoir<std::size_t> reservoir(cfg.k_edges, cfg.rng_seed);
  for (std::size_t i = 0; i < flows.size(); ++i) {
    if (members.contains(flows[i].src_ip) && members.contains(flows[i].dst_ip)) {
      reservoir.offer(i);
    }
  }

  SampleResult result;
  result.eligible_flows = reservoir.seen();
  result.graph = CommGraph(selected);
  auto kept = std::move(reservoir).release();
  std::sort(kept.begin(), kept.end());
  for (const auto i : kept) result.graph.add_edge(flows[i]);
  if (result.eligible_flows == 0) {
    result.warnings.emplace_back("no flow has both endpoints among the selected addresses");
  }
  return result;
}

SampleResult sample_graph(std::span<const FlowRecord> flows, const SamplerConfig& cfg) {
  auto selection = select_top_addresses(flows, cfg);
  auto result = reservoir_sample_edges(flows, selection.addresses, cfg);
  result.warnings.insert(result.warnings.begin(), selection.warnings.begin(),
                         selection.warnings.end());
  return result;
}

}  // namespace flowdep
