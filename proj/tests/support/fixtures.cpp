#include "fixtures.hpp"

#include <set>

namespace flowdep::testing {

FlowRecord make_flow(const Address& src, const Address& dst, Millis start, Millis end,
                     std::uint16_t sport, std::uint16_t dport, Protocol proto) {
  return {start, end, src, dst, sport, dport, proto};
}

std::vector<FlowRecord> random_oracle_fixture(Rng& rng, std::size_t max_flows) {
  const std::size_t hosts = 3 + uniform_index(rng, 4);
  const std::size_t n = 20 + uniform_index(rng, max_flows - 19);
  const Millis span = 200 + static_cast<Millis>(uniform_index(rng, 1000));
  std::vector<FlowRecord> flows;
  while (flows.size() < n) {
    if (!flows.empty() && uniform_index(rng, 3) == 0) {
      const auto& req = flows[uniform_index(rng, flows.size())];
      const Millis start = req.t_start + static_cast<Millis>(uniform_index(rng, 5));
      const Millis end = std::max(start, req.t_end + static_cast<Millis>(uniform_index(rng, 40)) - 20);
      flows.push_back({start, end, req.dst_ip, req.src_ip, req.dst_port, req.src_port, req.proto});
      continue;
    }
    const auto a = uniform_index(rng, hosts);
    auto b = uniform_index(rng, hosts - 1);
    if (b >= a) ++b;
    const Millis start = static_cast<Millis>(uniform_index(rng, static_cast<std::size_t>(span)));
    const Millis end = start + static_cast<Millis>(uniform_index(rng, 120));
    flows.push_back({start, end, "10.9.0." + std::to_string(a + 1), "10.9.0." + std::to_string(b + 1),
                     static_cast<std::uint16_t>(1000 + uniform_index(rng, 2)),
                     static_cast<std::uint16_t>(80 + uniform_index(rng, 2)),
                     uniform_index(rng, 2) == 0 ? Protocol::Tcp : Protocol::Udp});
  }
  return flows;
}

CommGraph graph_of(const std::vector<FlowRecord>& flows) {
  std::set<Address> addresses;
  for (const auto& f : flows) {
    addresses.insert(f.src_ip);
    addresses.insert(f.dst_ip);
  }
  const std::vector<Address> sorted(addresses.begin(), addresses.end());
  CommGraph g(sorted);
  for (const auto& f : flows) g.add_edge(f);
  return g;
}

}  // namespace flowdep::testing
