#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <tuple>
#include <utility>
#include <vector>

#include "flowdep/flow.hpp"

namespace flowdep {

enum class DependencyKind : std::uint8_t { DD, RR, RR3, TD, TD3 };

std::string_view to_string(DependencyKind kind) noexcept;
std::optional<DependencyKind> parse_dependency_kind(std::string_view text) noexcept;

/// `dependent` depends on `target`. `via` lists the intermediate servers of
/// a chain, separated by '|'; it is empty for DD and RR.
struct DependencyRecord {
  DependencyKind kind = DependencyKind::DD;
  Address dependent;
  Address target;
  std::string via;
  std::uint64_t witness_count = 0;

  friend bool operator==(const DependencyRecord&, const DependencyRecord&) = default;
  friend auto operator<=>(const DependencyRecord& a, const DependencyRecord& b) {
    return std::tie(a.kind, a.dependent, a.target, a.via, a.witness_count) <=>
           std::tie(b.kind, b.dependent, b.target, b.via, b.witness_count);
  }
};

struct OracleConfig {
  std::uint64_t n_t_direct = 10;  // DD and TD
  std::uint64_t n_t_remote = 10;  // RR and RR3
  Millis epsilon = 1000;
  std::size_t max_chain_vertices = 4;  // 3 disables RR3/TD3

  void validate() const;
};

/// Flows grouped by 5-tuple; a group of at least n_t_direct flows makes its
/// IP pair a DD. Several qualifying 5-tuples on one pair sum their counts.
std::vector<DependencyRecord> enumerate_dd(std::span<const FlowRecord> flows,
                                           const OracleConfig& cfg);

/// RR: U->S1, a mirrored reply S1->U, then U->S2 starting at most epsilon
/// after the reply ends. S2 depends on S1. RR3 continues with a reply from S2
/// and U->S3; S3 depends on S1 via S2. Witnesses are counted once per
/// initiating U->S1 flow.
struct RemoteDependencies {
  std::vector<DependencyRecord> rr;
  std::vector<DependencyRecord> rr3;
};
RemoteDependencies enumerate_rr(std::span<const FlowRecord> flows, const OracleConfig& cfg);

/// TD: a flow A->B containing a flow B->C, both from qualifying DD 5-tuple
/// groups and A != C; A depends on C via B. TD3 nests one more hop over four
/// distinct addresses. Witnesses are counted once per outer A->B flow.
struct TransitiveDependencies {
  std::vector<DependencyRecord> td;
  std::vector<DependencyRecord> td3;
};
TransitiveDependencies enumerate_td(std::span<const FlowRecord> flows, const OracleConfig& cfg);

/// All five kinds, sorted.
std::vector<DependencyRecord> run_oracle(std::span<const FlowRecord> flows,
                                         const OracleConfig& cfg);

/// Ordered (dependent, target) pairs of the records, duplicates collapsed.
std::set<std::pair<Address, Address>> dependency_pairs(std::span<const DependencyRecord> records);

/// CSV: kind,src,dst,witness_count,via (src is the dependent side).
void write_ground_truth(std::ostream& out, std::span<const DependencyRecord> records);
std::vector<DependencyRecord> read_ground_truth(std::istream& in);
void write_ground_truth_file(const std::filesystem::path& path,
                             std::span<const DependencyRecord> records);
std::vector<DependencyRecord> read_ground_truth_file(const std::filesystem::path& path);

}  // namespace flowdep
