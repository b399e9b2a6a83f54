#pragma once

#include <cstdint>
#include <vector>

#include "flowdep/flow.hpp"
#include "flowdep/oracle.hpp"

namespace flowdep {

/// Client c talks to web server c mod n_web and web server w queries
/// database w mod n_db. Planted hosts live in 10.0.1-4.x, noise hosts in
/// 198.18.0.0/15.
struct ScenarioConfig {
  std::size_t n_clients = 40;
  std::size_t n_web = 3;
  std::size_t n_db = 2;
  std::size_t n_dns = 1;
  double session_rate = 5.0;  // sessions per simulated second
  double duration_s = 300.0;
  bool lr_web_db = true;
  bool rr_dns_web = true;
  std::size_t noise_flows = 0;
  double noise_fraction = 0.0;  // when > 0, overrides noise_flows as a share of all flows
  std::size_t noise_hosts = 60;
  Millis latency_min = 5;
  Millis latency_max = 50;
  Millis epsilon = 1000;  // RR gaps are drawn from [epsilon/4, epsilon/2]
  Millis start_time = 1'700'000'000'000;
  std::uint64_t n_t_direct = 10;  // planted records below these counts are not listed
  std::uint64_t n_t_remote = 10;
  std::uint64_t rng_seed = 0;

  void validate() const;
};

struct SynthTrace {
  std::vector<FlowRecord> flows;  // sorted by start time
  std::vector<DependencyRecord> planted;
};

SynthTrace generate_scenario(const ScenarioConfig& cfg);

}  // namespace flowdep
