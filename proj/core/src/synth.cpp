#include "flowdep/synth.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "flowdep/error.hpp"
#include "flowdep/rng.hpp"

namespace flowdep {
namespace {

constexpr std::uint16_t kWebPort = 443;
constexpr std::uint16_t kDbPort = 5432;
constexpr std::uint16_t kDnsPort = 53;

Address host(int block, std::size_t i) {
  return "10.0." + std::to_string(block) + "." + std::to_string(i + 1);
}

Address noise_host(std::size_t i) {
  return "198.18." + std::to_string(i / 250) + "." + std::to_string(i % 250 + 1);
}

FlowRecord flow(const Address& src, const Address& dst, std::uint16_t sport, std::uint16_t dport,
                Protocol proto, Millis start, Millis end) {
  return {start, end, src, dst, sport, dport, proto};
}

FlowRecord reply_to(const FlowRecord& f) {
  const Millis start = std::min(f.t_start + 1, f.t_end);
  return {start, f.t_end, f.dst_ip, f.src_ip, f.dst_port, f.src_port, f.proto};
}

}  // namespace

void ScenarioConfig::validate() const {
  std::vector<std::string> problems;
  if (!(duration_s > 0)) problems.emplace_back("synth.duration_s must be > 0");
  if (session_rate < 0) problems.emplace_back("synth.session_rate must be >= 0");
  if (latency_min < 1 || latency_max < latency_min) {
    problems.emplace_back("synth.latency_min must be >= 1 and <= latency_max");
  }
  if (epsilon < 4) problems.emplace_back("synth.epsilon must be >= 4");
  if (noise_fraction < 0 || noise_fraction >= 1) problems.emplace_back("synth.noise_fraction must lie in [0, 1)");
  if ((noise_flows > 0 || noise_fraction > 0) && noise_hosts < 2) {
    problems.emplace_back("synth.noise_hosts must be >= 2 when noise is requested");
  }
  if (noise_hosts > 250 * 512) problems.emplace_back("synth.noise_hosts exceeds the noise block");
  const bool sessions = (lr_web_db || rr_dns_web) && session_rate > 0;
  if (sessions && (n_clients == 0 || n_web == 0)) {
    problems.emplace_back("synth sessions need n_clients >= 1 and n_web >= 1");
  }
  if (sessions && lr_web_db && n_db == 0) problems.emplace_back("synth.lr_web_db needs n_db >= 1");
  if (sessions && rr_dns_web && n_dns == 0) problems.emplace_back("synth.rr_dns_web needs n_dns >= 1");
  if (std::max({n_clients, n_web, n_db, n_dns}) > 254) {
    problems.emplace_back("synth host counts must be <= 254");
  }
  if (!problems.empty()) {
    std::string msg;
    for (const auto& p : problems) msg += (msg.empty() ? "" : "; ") + p;
    throw ConfigError(msg);
  }
}

SynthTrace generate_scenario(const ScenarioConfig& cfg) {
  cfg.validate();
  Rng rng(cfg.rng_seed);
  const auto duration_ms = static_cast<Millis>(cfg.duration_s * 1000.0);
  const auto uniform = [&](Millis lo, Millis hi) {
    return lo + static_cast<Millis>(uniform_index(rng, static_cast<std::size_t>(hi - lo + 1)));
  };
  const auto latency = [&] { return uniform(cfg.latency_min, cfg.latency_max); };

  SynthTrace trace;
  auto& flows = trace.flows;
  std::map<std::size_t, std::uint64_t> client_sessions;                  // client -> sessions
  std::map<std::size_t, std::uint64_t> web_lr_sessions;                  // web -> db calls
  std::map<std::pair<std::size_t, std::size_t>, std::uint64_t> dns_use;  // (client, dns) -> RR sessions
  std::map<std::pair<std::size_t, std::size_t>, std::uint64_t> rr_pairs;  // (web, dns) -> RR sessions

  const bool sessions_on = cfg.lr_web_db || cfg.rr_dns_web;
  const auto n_sessions =
      sessions_on ? static_cast<std::size_t>(std::llround(cfg.session_rate * cfg.duration_s)) : 0;
  for (std::size_t s = 0; s < n_sessions; ++s) {
    const auto c = uniform_index(rng, cfg.n_clients);
    const auto w = c % cfg.n_web;
    const Address client = host(1, c);
    const Address web = host(2, w);
    Millis t = cfg.start_time + uniform(0, duration_ms - 1);

    if (cfg.rr_dns_web) {
      const auto d = uniform_index(rng, cfg.n_dns);
      const auto query = flow(client, host(4, d), static_cast<std::uint16_t>(40000 + c), kDnsPort,
                              Protocol::Udp, t, t + latency());
      const auto answer = reply_to(query);
      flows.push_back(query);
      flows.push_back(answer);
      t = answer.t_end + uniform(cfg.epsilon / 4, cfg.epsilon / 2);
      ++dns_use[{c, d}];
      ++rr_pairs[{w, d}];
    }

    const Millis before = latency();
    Millis inner = 0;
    if (cfg.lr_web_db) {
      const auto db = w % cfg.n_db;
      inner = latency();
      const auto call = flow(web, host(3, db), static_cast<std::uint16_t>(30000 + w), kDbPort,
                             Protocol::Tcp, t + before, t + before + inner);
      flows.push_back(call);
      flows.push_back(reply_to(call));
      ++web_lr_sessions[w];
    }
    const auto request = flow(client, web, static_cast<std::uint16_t>(20000 + c), kWebPort,
                              Protocol::Tcp, t, t + before + inner + latency());
    flows.push_back(request);
    flows.push_back(reply_to(request));
    ++client_sessions[c];
  }

  const auto planted = flows.size();
  std::size_t noise = cfg.noise_flows;
  if (cfg.noise_fraction > 0) {
    noise = static_cast<std::size_t>(
        std::llround(cfg.noise_fraction / (1.0 - cfg.noise_fraction) * static_cast<double>(planted)));
  }
  for (std::size_t i = 0; i < noise; ++i) {
    const auto a = uniform_index(rng, cfg.noise_hosts);
    auto b = uniform_index(rng, cfg.noise_hosts - 1);
    if (b >= a) ++b;
    const Millis start = cfg.start_time + uniform(0, duration_ms - 1);
    flows.push_back(flow(noise_host(a), noise_host(b),
                         static_cast<std::uint16_t>(uniform(1024, 65535)),
                         static_cast<std::uint16_t>(uniform(1, 65535)),
                         uniform(0, 1) == 0 ? Protocol::Tcp : Protocol::Udp, start,
                         start + uniform(1, 1000)));
  }
  std::stable_sort(flows.begin(), flows.end(),
                   [](const FlowRecord& a, const FlowRecord& b) { return a.t_start < b.t_start; });

  auto& truth = trace.planted;
  for (const auto& [c, count] : client_sessions) {
    if (count < cfg.n_t_direct) continue;
    const auto w = c % cfg.n_web;
    truth.push_back({DependencyKind::DD, host(1, c), host(2, w), {}, count});
    if (cfg.lr_web_db && web_lr_sessions[w] >= cfg.n_t_direct) {
      truth.push_back({DependencyKind::TD, host(1, c), host(3, w % cfg.n_db), host(2, w), count});
    }
  }
  for (const auto& [w, count] : web_lr_sessions) {
    if (count >= cfg.n_t_direct) {
      truth.push_back({DependencyKind::DD, host(2, w), host(3, w % cfg.n_db), {}, count});
    }
  }
  for (const auto& [key, count] : dns_use) {
    if (count >= cfg.n_t_direct) {
      truth.push_back({DependencyKind::DD, host(1, key.first), host(4, key.second), {}, count});
    }
  }
  for (const auto& [key, count] : rr_pairs) {
    if (count >= cfg.n_t_remote) {
      truth.push_back({DependencyKind::RR, host(2, key.first), host(4, key.second), {}, count});
    }
  }
  std::sort(truth.begin(), truth.end());
  return trace;
}

}  // namespace flowdep
