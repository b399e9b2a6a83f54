#include "reference_oracle.hpp"

#include <algorithm>
#include <cstdlib>
#include <map>
#include <set>
#include <tuple>

namespace flowdep::testing {
namespace {

bool same_tuple(const FlowRecord& a, const FlowRecord& b) {
  return a.src_ip == b.src_ip && a.dst_ip == b.dst_ip && a.src_port == b.src_port &&
         a.dst_port == b.dst_port && a.proto == b.proto;
}

bool is_reply(const FlowRecord& req, const FlowRecord& rep, Millis eps) {
  return rep.src_ip == req.dst_ip && rep.dst_ip == req.src_ip && rep.src_port == req.dst_port &&
         rep.dst_port == req.src_port && req.t_start <= rep.t_start &&
         std::llabs(req.t_end - rep.t_end) <= eps;
}

bool next_request(const FlowRecord& rep, const FlowRecord& req, Millis eps) {
  return req.src_ip == rep.dst_ip && rep.t_end <= req.t_start && req.t_start - rep.t_end <= eps;
}

bool inside(const FlowRecord& outer, const FlowRecord& inner) {
  return inner.src_ip == outer.dst_ip && outer.t_start <= inner.t_start &&
         inner.t_start <= inner.t_end && inner.t_end <= outer.t_end;
}

using Key = std::tuple<Address, Address, std::string>;

void emit(std::vector<DependencyRecord>& out, DependencyKind kind,
          const std::map<Key, std::uint64_t>& counts, std::uint64_t threshold) {
  for (const auto& [key, n] : counts) {
    if (n >= threshold) out.push_back({kind, std::get<0>(key), std::get<1>(key), std::get<2>(key), n});
  }
}

}  // namespace

std::vector<DependencyRecord> reference_oracle(std::span<const FlowRecord> flows,
                                               const OracleConfig& cfg) {
  const auto n = flows.size();
  const Millis eps = cfg.epsilon;
  const bool long_chains = cfg.max_chain_vertices >= 4;
  std::vector<DependencyRecord> out;

  // DD: size of each flow's 5-tuple group by pairwise comparison.
  std::vector<std::uint64_t> group(n, 0);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) group[i] += same_tuple(flows[i], flows[j]) ? 1 : 0;
  }
  std::vector<bool> in_dd(n);
  std::map<Key, std::uint64_t> dd;
  for (std::size_t i = 0; i < n; ++i) {
    in_dd[i] = group[i] >= cfg.n_t_direct;
    if (in_dd[i]) ++dd[{flows[i].src_ip, flows[i].dst_ip, ""}];
  }
  emit(out, DependencyKind::DD, dd, 1);

  // RR / RR3: f1 request, f2 reply, f3 next request, f4 reply, f5 next request.
  std::map<Key, std::uint64_t> rr, rr3;
  for (std::size_t a = 0; a < n; ++a) {
    const auto& f1 = flows[a];
    std::set<Key> hit2, hit3;
    for (std::size_t b = 0; b < n; ++b) {
      if (!is_reply(f1, flows[b], eps)) continue;
      for (std::size_t c = 0; c < n; ++c) {
        const auto& f3 = flows[c];
        if (!next_request(flows[b], f3, eps)) continue;
        if (f3.dst_ip == f1.src_ip || f3.dst_ip == f1.dst_ip) continue;
        hit2.insert({f3.dst_ip, f1.dst_ip, ""});
        if (!long_chains) continue;
        for (std::size_t d = 0; d < n; ++d) {
          if (!is_reply(f3, flows[d], eps)) continue;
          for (std::size_t e = 0; e < n; ++e) {
            const auto& f5 = flows[e];
            if (!next_request(flows[d], f5, eps)) continue;
            if (f5.dst_ip == f1.src_ip || f5.dst_ip == f1.dst_ip || f5.dst_ip == f3.dst_ip) continue;
            hit3.insert({f5.dst_ip, f1.dst_ip, f3.dst_ip});
          }
        }
      }
    }
    for (const auto& k : hit2) ++rr[k];
    for (const auto& k : hit3) ++rr3[k];
  }
  emit(out, DependencyKind::RR, rr, cfg.n_t_remote);
  emit(out, DependencyKind::RR3, rr3, cfg.n_t_remote);

  // TD / TD3 over flows of qualifying 5-tuple groups.
  std::map<Key, std::uint64_t> td, td3;
  for (std::size_t a = 0; a < n; ++a) {
    if (!in_dd[a]) continue;
    const auto& f = flows[a];
    std::set<Key> hit2, hit3;
    for (std::size_t b = 0; b < n; ++b) {
      if (!in_dd[b] || !inside(f, flows[b])) continue;
      const auto& g = flows[b];
      if (g.dst_ip == f.src_ip) continue;
      hit2.insert({f.src_ip, g.dst_ip, f.dst_ip});
      if (!long_chains) continue;
      for (std::size_t c = 0; c < n; ++c) {
        if (!in_dd[c] || !inside(g, flows[c])) continue;
        const auto& h = flows[c];
        if (h.dst_ip == f.src_ip || h.dst_ip == f.dst_ip) continue;
        hit3.insert({f.src_ip, h.dst_ip, f.dst_ip + "|" + g.dst_ip});
      }
    }
    for (const auto& k : hit2) ++td[k];
    for (const auto& k : hit3) ++td3[k];
  }
  emit(out, DependencyKind::TD, td, cfg.n_t_direct);
  emit(out, DependencyKind::TD3, td3, cfg.n_t_direct);

  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace flowdep::testing
