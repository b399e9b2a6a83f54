#include "flowdep/oracle.hpp"

#include <algorithm>
#include <fstream>
#include <limits>
#include <map>
#include <ostream>
#include <sstream>
#include <tuple>
#include <unordered_map>

#include "flowdep/conditions.hpp"
#include "flowdep/error.hpp"

namespace flowdep {
namespace {

using FiveTuple = std::tuple<Address, Address, std::uint16_t, std::uint16_t, Protocol>;

FiveTuple five_tuple(const FlowRecord& f) {
  return {f.src_ip, f.dst_ip, f.src_port, f.dst_port, f.proto};
}

/// Flow indices grouped by a key, each group sorted by start time.
template <typename Key>
class StartIndex {
 public:
  void add(const Key& key, std::size_t flow) { groups_[key].push_back(flow); }

  void finish(std::span<const FlowRecord> flows) {
    for (auto& [_, list] : groups_) {
      std::sort(list.begin(), list.end(), [&](std::size_t a, std::size_t b) {
        return std::tie(flows[a].t_start, a) < std::tie(flows[b].t_start, b);
      });
    }
  }

  /// Flows of `key` with lo <= t_start <= hi.
  template <typename F>
  void for_range(std::span<const FlowRecord> flows, const Key& key, Millis lo, Millis hi,
                 F&& visit) const {
    const auto it = groups_.find(key);
    if (it == groups_.end()) return;
    const auto& list = it->second;
    auto pos = std::lower_bound(list.begin(), list.end(), lo, [&](std::size_t i, Millis t) {
      return flows[i].t_start < t;
    });
    for (; pos != list.end() && flows[*pos].t_start <= hi; ++pos) visit(*pos);
  }

  template <typename F>
  void for_all(const Key& key, F&& visit) const {
    const auto it = groups_.find(key);
    if (it == groups_.end()) return;
    for (const auto i : it->second) visit(i);
  }

 private:
  std::map<Key, std::vector<std::size_t>> groups_;
};

using PortKey = std::tuple<Address, Address, std::uint16_t, std::uint16_t>;

struct ChainKey {
  Address dependent;
  Address target;
  std::string via;
  auto operator<=>(const ChainKey&) const = default;
};

std::vector<DependencyRecord> emit(DependencyKind kind, const std::map<ChainKey, std::uint64_t>& counts,
                                   std::uint64_t threshold) {
  std::vector<DependencyRecord> out;
  for (const auto& [key, count] : counts) {
    if (count >= threshold) out.push_back({kind, key.dependent, key.target, key.via, count});
  }
  return out;
}

/// Indices of flows that belong to a 5-tuple group of at least n flows.
std::vector<std::size_t> dd_flow_indices(std::span<const FlowRecord> flows, std::uint64_t n) {
  std::map<FiveTuple, std::vector<std::size_t>> groups;
  for (std::size_t i = 0; i < flows.size(); ++i) groups[five_tuple(flows[i])].push_back(i);
  std::vector<std::size_t> out;
  for (const auto& [_, members] : groups) {
    if (members.size() >= n) out.insert(out.end(), members.begin(), members.end());
  }
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace

std::string_view to_string(DependencyKind kind) noexcept {
  switch (kind) {
    case DependencyKind::DD: return "DD";
    case DependencyKind::RR: return "RR";
    case DependencyKind::RR3: return "RR3";
    case DependencyKind::TD: return "TD";
    case DependencyKind::TD3: return "TD3";
  }
  return "DD";
}

std::optional<DependencyKind> parse_dependency_kind(std::string_view text) noexcept {
  for (auto k : {DependencyKind::DD, DependencyKind::RR, DependencyKind::RR3, DependencyKind::TD,
                 DependencyKind::TD3}) {
    if (text == to_string(k)) return k;
  }
  return std::nullopt;
}

void OracleConfig::validate() const {
  std::vector<std::string> problems;
  if (n_t_direct < 1) problems.emplace_back("oracle.n_t_direct must be >= 1");
  if (n_t_remote < 1) problems.emplace_back("oracle.n_t_remote must be >= 1");
  if (epsilon < 0) problems.emplace_back("oracle.epsilon must be >= 0");
  if (max_chain_vertices != 3 && max_chain_vertices != 4) {
    problems.emplace_back("oracle.max_chain_vertices must be 3 or 4");
  }
  if (!problems.empty()) {
    std::string msg;
    for (const auto& p : problems) msg += (msg.empty() ? "" : "; ") + p;
    throw ConfigError(msg);
  }
}

std::vector<DependencyRecord> enumerate_dd(std::span<const FlowRecord> flows,
                                           const OracleConfig& cfg) {
  cfg.validate();
  std::map<FiveTuple, std::uint64_t> groups;
  for (const auto& f : flows) ++groups[five_tuple(f)];
  std::map<ChainKey, std::uint64_t> pairs;
  for (const auto& [key, count] : groups) {
    if (count >= cfg.n_t_direct) pairs[{std::get<0>(key), std::get<1>(key), {}}] += count;
  }
  return emit(DependencyKind::DD, pairs, 1);
}

RemoteDependencies enumerate_rr(std::span<const FlowRecord> flows, const OracleConfig& cfg) {
  cfg.validate();
  StartIndex<PortKey> by_ports;  // replies: (src, dst, sport, dport)
  StartIndex<Address> by_src;
  for (std::size_t i = 0; i < flows.size(); ++i) {
    const auto& f = flows[i];
    by_ports.add({f.src_ip, f.dst_ip, f.src_port, f.dst_port}, i);
    by_src.add(f.src_ip, i);
  }
  by_ports.finish(flows);
  by_src.finish(flows);

  const bool chains = cfg.max_chain_vertices >= 4;
  const Millis eps = cfg.epsilon;

  // Replies to `req`, then requests from the client within epsilon of each
  // reply's end.
  const auto follow_ups = [&](std::size_t req, auto&& visit) {
    const auto& f = flows[req];
    by_ports.for_range(flows, {f.dst_ip, f.src_ip, f.dst_port, f.src_port}, f.t_start,
                       std::numeric_limits<Millis>::max(), [&](std::size_t r) {
                         const auto& reply = flows[r];
                         if (!rev_return(f, reply, eps)) return;
                         by_src.for_range(flows, f.src_ip, reply.t_end, reply.t_end + eps,
                                          [&](std::size_t n) {
                                            if (rr_open(reply, flows[n], eps)) visit(n);
                                          });
                       });
  };

  std::map<ChainKey, std::uint64_t> rr;
  std::map<ChainKey, std::uint64_t> rr3;
  for (std::size_t i = 0; i < flows.size(); ++i) {
    const auto& f1 = flows[i];
    const Address& u = f1.src_ip;
    const Address& s1 = f1.dst_ip;
    std::set<Address> seconds;
    std::set<std::pair<Address, Address>> thirds;
    follow_ups(i, [&](std::size_t j) {
      const Address& s2 = flows[j].dst_ip;
      if (s2 == u || s2 == s1) return;
      seconds.insert(s2);
      if (!chains) return;
      follow_ups(j, [&](std::size_t k) {
        const Address& s3 = flows[k].dst_ip;
        if (s3 == u || s3 == s1 || s3 == s2) return;
        thirds.emplace(s2, s3);
      });
    });
    for (const auto& s2 : seconds) ++rr[{s2, s1, {}}];
    for (const auto& [s2, s3] : thirds) ++rr3[{s3, s1, s2}];
  }
  return {emit(DependencyKind::RR, rr, cfg.n_t_remote), emit(DependencyKind::RR3, rr3, cfg.n_t_remote)};
}

TransitiveDependencies enumerate_td(std::span<const FlowRecord> flows, const OracleConfig& cfg) {
  cfg.validate();
  const auto members = dd_flow_indices(flows, cfg.n_t_direct);
  StartIndex<Address> by_src;
  for (const auto i : members) by_src.add(flows[i].src_ip, i);
  by_src.finish(flows);
  const bool chains = cfg.max_chain_vertices >= 4;

  const auto inner = [&](std::size_t outer, auto&& visit) {
    const auto& f = flows[outer];
    by_src.for_range(flows, f.dst_ip, f.t_start, f.t_end, [&](std::size_t g) {
      if (lr_open(f, flows[g])) visit(g);
    });
  };

  std::map<ChainKey, std::uint64_t> td;
  std::map<ChainKey, std::uint64_t> td3;
  for (const auto i : members) {
    const Address& a = flows[i].src_ip;
    const Address& b = flows[i].dst_ip;
    std::set<Address> seconds;
    std::set<std::pair<Address, Address>> thirds;
    inner(i, [&](std::size_t j) {
      const Address& c = flows[j].dst_ip;
      if (c == a) return;
      seconds.insert(c);
      if (!chains) return;
      inner(j, [&](std::size_t k) {
        const Address& d = flows[k].dst_ip;
        if (d == a || d == b) return;
        thirds.emplace(c, d);
      });
    });
    for (const auto& c : seconds) ++td[{a, c, b}];
    for (const auto& [c, d] : thirds) ++td3[{a, d, b + "|" + c}];
  }
  return {emit(DependencyKind::TD, td, cfg.n_t_direct), emit(DependencyKind::TD3, td3, cfg.n_t_direct)};
}

std::vector<DependencyRecord> run_oracle(std::span<const FlowRecord> flows,
                                         const OracleConfig& cfg) {
  auto out = enumerate_dd(flows, cfg);
  auto remote = enumerate_rr(flows, cfg);
  auto transitive = enumerate_td(flows, cfg);
  for (auto* part : {&remote.rr, &remote.rr3, &transitive.td, &transitive.td3}) {
    out.insert(out.end(), part->begin(), part->end());
  }
  std::sort(out.begin(), out.end());
  return out;
}

std::set<std::pair<Address, Address>> dependency_pairs(std::span<const DependencyRecord> records) {
  std::set<std::pair<Address, Address>> out;
  for (const auto& r : records) out.emplace(r.dependent, r.target);
  return out;
}

void write_ground_truth(std::ostream& out, std::span<const DependencyRecord> records) {
  out << "kind,src,dst,witness_count,via\n";
  for (const auto& r : records) {
    out << to_string(r.kind) << ',' << r.dependent << ',' << r.target << ',' << r.witness_count
        << ',' << r.via << '\n';
  }
}

std::vector<DependencyRecord> read_ground_truth(std::istream& in) {
  std::vector<DependencyRecord> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || (line_no == 1 && line.rfind("kind,", 0) == 0)) continue;
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    if (!line.empty() && line.back() == ',') cells.emplace_back();
    const auto fail = [&](const std::string& why) {
      return IoError("ground truth line " + std::to_string(line_no) + ": " + why);
    };
    if (cells.size() != 4 && cells.size() != 5) throw fail("expected 4 or 5 columns");
    const auto kind = parse_dependency_kind(cells[0]);
    if (!kind) throw fail("unknown kind '" + cells[0] + "'");
    DependencyRecord r;
    r.kind = *kind;
    r.dependent = cells[1];
    r.target = cells[2];
    try {
      std::size_t used = 0;
      r.witness_count = std::stoull(cells[3], &used);
      if (used != cells[3].size()) throw std::invalid_argument("trailing");
    } catch (const std::exception&) {
      throw fail("bad witness_count '" + cells[3] + "'");
    }
    if (cells.size() == 5) r.via = cells[4];
    out.push_back(std::move(r));
  }
  return out;
}

void write_ground_truth_file(const std::filesystem::path& path,
                             std::span<const DependencyRecord> records) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write ground truth file: " + path.string());
  write_ground_truth(out, records);
}

std::vector<DependencyRecord> read_ground_truth_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open ground truth file: " + path.string());
  return read_ground_truth(in);
}

}  // namespace flowdep
