#include "flowdep/walks.hpp"

#include <algorithm>
#include <fstream>
#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <stdexcept>
#include <thread>
#include <unordered_map>

#include <json.hpp>

#include "flowdep/error.hpp"

namespace flowdep {

bool forward_direction_seen(std::span<const VertexId> prefix, VertexId candidate) noexcept {
  if (prefix.size() < 2) return false;
  const std::size_t i = prefix.size() - 2;
  const VertexId middle = prefix.back();
  for (std::size_t j = 0; j + 1 < prefix.size(); ++j) {
    if (j != i && prefix[j] == candidate && prefix[j + 1] == middle) return true;
  }
  return false;
}

std::string_view to_string(Condition c) noexcept {
  switch (c) {
    case Condition::LrOpen:
      return "LR_OPEN";
    case Condition::LrReturn:
      return "LR_RETURN";
    case Condition::RrOpen:
      return "RR_OPEN";
    case Condition::RevReturn:
      return "REV_RETURN";
    case Condition::FallbackThreshold:
      return "FALLBACK_THRESHOLD";
    case Condition::FallbackAny:
      break;
  }
  return "FALLBACK_ANY";
}

Condition parse_condition(std::string_view text) {
  for (auto c : kAllConditions) {
    if (to_string(c) == text) return c;
  }
  throw std::invalid_argument("unknown condition '" + std::string(text) + "'");
}

std::string_view to_string(WalkLabel label) noexcept {
  return label == WalkLabel::Positive ? "POSITIVE" : "NEGATIVE";
}

void WalkConfig::validate() const {
  std::vector<std::string> problems;
  if (walk_length < 3) problems.emplace_back("walks.length must be >= 3");
  if (walks_per_vertex < 1) problems.emplace_back("walks.per_vertex must be >= 1");
  if (epsilon < 0) problems.emplace_back("walks.epsilon_ms must be >= 0");
  if (n_t < 1) problems.emplace_back("walks.n_t must be >= 1");
  if (!problems.empty()) {
    std::string msg;
    for (const auto& p : problems) msg += (msg.empty() ? "" : "; ") + p;
    throw ConfigError(msg);
  }
}

namespace {

// Edge instances of one directed pair, indexed for interval queries.
struct PairIndex {
  std::vector<EdgeId> by_start;      // ascending t_start
  std::vector<EdgeId> longest_upto;  // argmax t_end over by_start[0..k]
  std::vector<EdgeId> by_end;        // ascending t_end
};

// Outcome of the pair-level checks for one (previous, current) vertex pair.
struct TimedHit {
  VertexId target = 0;
  std::optional<EdgeId> lr_open;
  std::optional<EdgeId> lr_return;  // timing clause only
  std::optional<EdgeId> rev_return;
};

struct RemoteHit {
  VertexId target = 0;
  EdgeId edge = 0;
};

struct PairChecks {
  std::vector<TimedHit> from_current;  // out-neighbours of the current vertex
  std::vector<RemoteHit> from_previous;  // rr_open hits leaving the previous vertex
};

std::uint64_t pair_key(VertexId a, VertexId b) { return (std::uint64_t{a} << 32) | b; }

}  // namespace

struct WalkGenerator::Cache {
  std::unordered_map<std::uint64_t, PairIndex> indexes;
  std::unordered_map<std::uint64_t, PairChecks> checks;
};

WalkGenerator::WalkGenerator(const CommGraph& graph, WalkConfig cfg)
    : graph_(&graph), cfg_(cfg), cache_(std::make_unique<Cache>()) {
  cfg_.validate();
}

WalkGenerator::~WalkGenerator() = default;
WalkGenerator::WalkGenerator(WalkGenerator&&) noexcept = default;

namespace {

const PairIndex& index_for(const CommGraph& g,
                           std::unordered_map<std::uint64_t, PairIndex>& indexes,
                           VertexId src, VertexId dst) {
  const auto key = pair_key(src, dst);
  if (const auto it = indexes.find(key); it != indexes.end()) return it->second;
  PairIndex idx;
  const auto ids = g.edges_between(src, dst);
  idx.by_start.assign(ids.begin(), ids.end());
  std::stable_sort(idx.by_start.begin(), idx.by_start.end(), [&](EdgeId a, EdgeId b) {
    return g.edge(a).t_start < g.edge(b).t_start;
  });
  idx.longest_upto.reserve(idx.by_start.size());
  for (std::size_t k = 0; k < idx.by_start.size(); ++k) {
    const auto e = idx.by_start[k];
    if (k == 0 || g.edge(e).t_end > g.edge(idx.longest_upto.back()).t_end) {
      idx.longest_upto.push_back(e);
    } else {
      idx.longest_upto.push_back(idx.longest_upto.back());
    }
  }
  idx.by_end = idx.by_start;
  std::stable_sort(idx.by_end.begin(), idx.by_end.end(), [&](EdgeId a, EdgeId b) {
    return g.edge(a).t_end < g.edge(b).t_end;
  });
  return indexes.emplace(key, std::move(idx)).first->second;
}

// Some edge of `idx` with t_start <= start and t_end >= end.
std::optional<EdgeId> enclosing(const CommGraph& g, const PairIndex& idx, Millis start,
                                Millis end) {
  const auto pos = std::upper_bound(
      idx.by_start.begin(), idx.by_start.end(), start,
      [&](Millis t, EdgeId e) { return t < g.edge(e).t_start; });
  if (pos == idx.by_start.begin()) return std::nullopt;
  const auto best = idx.longest_upto[static_cast<std::size_t>(pos - idx.by_start.begin()) - 1];
  if (g.edge(best).t_end >= end) return best;
  return std::nullopt;
}

// Some edge of `idx` whose t_end lies in [lo, hi].
bool ends_within(const CommGraph& g, const PairIndex& idx, Millis lo, Millis hi) {
  const auto pos = std::lower_bound(idx.by_end.begin(), idx.by_end.end(), lo,
                                    [&](EdgeId e, Millis t) { return g.edge(e).t_end < t; });
  return pos != idx.by_end.end() && g.edge(*pos).t_end <= hi;
}

}  // namespace

std::vector<StepCandidate> WalkGenerator::first_candidates(VertexId start) const {
  const auto& g = *graph_;
  std::vector<StepCandidate> thresholded;
  std::vector<StepCandidate> any;
  for (const auto w : g.out_neighbors(start)) {
    const auto parallel = g.edges_between(start, w);
    any.push_back({w, {Condition::FallbackAny}, parallel.front()});
    if (parallel.size() >= cfg_.n_t) {
      thresholded.push_back({w, {Condition::FallbackThreshold}, parallel.front()});
    }
  }
  return thresholded.empty() ? any : thresholded;
}

std::vector<StepCandidate> WalkGenerator::next_candidates(std::span<const VertexId> prefix,
                                                          EdgeId last_edge) {
  const auto& g = *graph_;
  const VertexId current = prefix.back();
  const VertexId previous = g.edge(last_edge).src;

  auto& checks_map = cache_->checks;
  auto found = checks_map.find(pair_key(previous, current));
  if (found == checks_map.end()) {
    PairChecks checks;
    const auto& incoming = index_for(g, cache_->indexes, previous, current);
    const auto incoming_edges = g.edges_between(previous, current);
    for (const auto w : g.out_neighbors(current)) {
      TimedHit hit{w, {}, {}, {}};
      const auto& outgoing = index_for(g, cache_->indexes, current, w);
      for (const auto b : g.edges_between(current, w)) {
        const auto& next = g.edge(b);
        if (enclosing(g, incoming, next.t_start, next.t_end)) {
          hit.lr_open = b;
          break;
        }
      }
      for (const auto a : incoming_edges) {
        const auto& prev = g.edge(a);
        if (const auto b = enclosing(g, outgoing, prev.t_start, prev.t_end)) {
          hit.lr_return = *b;
          break;
        }
      }
      if (w == previous) {
        for (const auto r : g.edges_between(current, previous)) {
          const auto& rev = g.edge(r);
          const bool matched =
              std::any_of(incoming_edges.begin(), incoming_edges.end(), [&](EdgeId a) {
                return rev_return(g.edge(a), rev, cfg_.epsilon);
              });
          if (matched) {
            hit.rev_return = r;
            break;
          }
        }
      }
      checks.from_current.push_back(hit);
    }
    for (const auto w : g.out_neighbors(previous)) {
      if (w == current) continue;
      for (const auto c : g.edges_between(previous, w)) {
        const auto& next = g.edge(c);
        if (ends_within(g, incoming, next.t_start - cfg_.epsilon, next.t_start)) {
          checks.from_previous.push_back({w, c});
          break;
        }
      }
    }
    found = checks_map.emplace(pair_key(previous, current), std::move(checks)).first;
  }
  const PairChecks& checks = found->second;

  std::map<VertexId, StepCandidate> merged;
  for (const auto& hit : checks.from_current) {
    if (g.pair_flow_count(current, hit.target) < cfg_.n_t) continue;
    StepCandidate cand{hit.target, {}, 0};
    std::optional<EdgeId> edge;
    if (hit.lr_open) {
      cand.conditions.insert(Condition::LrOpen);
      edge = edge ? edge : hit.lr_open;
    }
    if (hit.lr_return && forward_direction_seen(prefix, hit.target)) {
      cand.conditions.insert(Condition::LrReturn);
      edge = edge ? edge : hit.lr_return;
    }
    if (hit.rev_return) {
      cand.conditions.insert(Condition::RevReturn);
      edge = edge ? edge : hit.rev_return;
    }
    if (edge) {
      cand.edge = *edge;
      merged.emplace(cand.vertex, cand);
    }
  }
  for (const auto& hit : checks.from_previous) {
    if (g.pair_flow_count(previous, hit.target) < cfg_.n_t) continue;
    auto [it, inserted] = merged.try_emplace(hit.target, StepCandidate{hit.target, {}, hit.edge});
    it->second.conditions.insert(Condition::RrOpen);
  }

  std::vector<StepCandidate> out;
  if (!merged.empty()) {
    out.reserve(merged.size());
    for (auto& [v, cand] : merged) out.push_back(cand);
    return out;
  }
  for (const auto w : g.out_neighbors(current)) {
    const auto parallel = g.edges_between(current, w);
    if (parallel.size() >= cfg_.n_t) {
      out.push_back({w, {Condition::FallbackThreshold}, parallel.front()});
    }
  }
  if (!out.empty()) return out;
  for (const auto w : g.out_neighbors(current)) {
    out.push_back({w, {Condition::FallbackAny}, g.edges_between(current, w).front()});
  }
  return out;
}

RandomWalk WalkGenerator::walk_from(VertexId start, Rng& rng) {
  RandomWalk walk;
  walk.label = WalkLabel::Positive;
  walk.vertices.push_back(start);
  const auto first = first_candidates(start);
  if (first.empty()) return walk;
  const auto& step = first[uniform_index(rng, first.size())];
  walk.vertices.push_back(step.vertex);
  walk.step_edges.push_back(step.edge);
  while (walk.vertices.size() < cfg_.walk_length) {
    const auto cands = next_candidates(walk.vertices, walk.step_edges.back());
    if (cands.empty()) break;
    const auto& chosen = cands[uniform_index(rng, cands.size())];
    walk.vertices.push_back(chosen.vertex);
    walk.step_edges.push_back(chosen.edge);
    walk.condition_trace.push_back(chosen.conditions);
  }
  return walk;
}

std::vector<RandomWalk> generate_walks(const CommGraph& graph, const WalkConfig& cfg) {
  cfg.validate();
  std::vector<VertexId> starts;
  for (VertexId v = 0; v < graph.vertex_count(); ++v) {
    if (!graph.out_neighbors(v).empty()) starts.push_back(v);
  }

  unsigned workers = cfg.threads == 0 ? std::thread::hardware_concurrency() : cfg.threads;
  workers = std::max(1u, std::min<unsigned>(workers, static_cast<unsigned>(starts.size())));

  std::vector<std::vector<RandomWalk>> per_start(starts.size());
  const auto work = [&](unsigned worker) {
    WalkGenerator generator(graph, cfg);
    for (std::size_t s = worker; s < starts.size(); s += workers) {
      Rng rng(derive_seed(cfg.rng_seed, std::uint64_t{starts[s]}));
      auto& out = per_start[s];
      out.reserve(cfg.walks_per_vertex);
      for (std::size_t r = 0; r < cfg.walks_per_vertex; ++r) {
        out.push_back(generator.walk_from(starts[s], rng));
      }
    }
  };
  if (workers <= 1) {
    work(0);
  } else {
    std::vector<std::jthread> pool;
    for (unsigned w = 0; w < workers; ++w) pool.emplace_back(work, w);
  }

  std::vector<RandomWalk> walks;
  walks.reserve(starts.size() * cfg.walks_per_vertex);
  for (auto& batch : per_start) {
    for (auto& w : batch) walks.push_back(std::move(w));
  }
  return walks;
}

std::vector<RandomWalk> generate_negative_walks(const CommGraph& graph,
                                                std::span<const RandomWalk> positives,
                                                const WalkConfig& cfg) {
  const auto n = graph.vertex_count();
  Rng rng(derive_seed(cfg.rng_seed, "negative"));
  std::vector<RandomWalk> negatives;
  negatives.reserve(positives.size());
  for (const auto& positive : positives) {
    const auto length = positive.vertices.size();
    const auto budget = 100 * length;
    bool found = false;
    RandomWalk walk;
    walk.label = WalkLabel::Negative;
    for (std::size_t attempt = 0; attempt < budget && n >= 2; ++attempt) {
      walk.vertices.clear();
      walk.vertices.push_back(static_cast<VertexId>(uniform_index(rng, n)));
      bool has_gap = false;
      while (walk.vertices.size() < length) {
        // Uniform over the other n - 1 vertices.
        auto v = static_cast<VertexId>(uniform_index(rng, n - 1));
        if (v >= walk.vertices.back()) ++v;
        if (!graph.has_edge(walk.vertices.back(), v)) has_gap = true;
        walk.vertices.push_back(v);
      }
      if (has_gap) {
        found = true;
        break;
      }
    }
    if (!found) {
      throw ExhaustedError("no negative walk of length " + std::to_string(length) +
                           " found within the retry bound of " + std::to_string(budget) +
                           " attempts");
    }
    negatives.push_back(std::move(walk));
  }
  return negatives;
}

void write_walks_jsonl(std::ostream& out, const CommGraph& graph,
                       std::span<const RandomWalk> walks) {
  for (const auto& w : walks) {
    nlohmann::json vertices = nlohmann::json::array();
    for (const auto v : w.vertices) vertices.push_back(graph.address(v));
    nlohmann::json trace = nlohmann::json::array();
    for (const auto& set : w.condition_trace) {
      nlohmann::json ids = nlohmann::json::array();
      for (const auto c : kAllConditions) {
        if (set.contains(c)) ids.push_back(std::string(to_string(c)));
      }
      trace.push_back(std::move(ids));
    }
    nlohmann::json line{{"label", std::string(to_string(w.label))},
                        {"vertices", std::move(vertices)},
                        {"step_edges", w.step_edges},
                        {"condition_trace", std::move(trace)}};
    out << line.dump() << '\n';
  }
}

std::vector<RandomWalk> read_walks_jsonl(std::istream& in, const CommGraph& graph) {
  std::vector<RandomWalk> walks;
  std::string line;
  std::size_t number = 0;
  while (std::getline(in, line)) {
    ++number;
    if (line.empty()) continue;
    try {
      const auto obj = nlohmann::json::parse(line);
      RandomWalk w;
      const auto label = obj.at("label").get<std::string>();
      if (label == "POSITIVE") {
        w.label = WalkLabel::Positive;
      } else if (label == "NEGATIVE") {
        w.label = WalkLabel::Negative;
      } else {
        throw IoError("unknown walk label '" + label + "'");
      }
      for (const auto& a : obj.at("vertices")) w.vertices.push_back(graph.index_of(a.get<Address>()));
      w.step_edges = obj.at("step_edges").get<std::vector<EdgeId>>();
      for (const auto& ids : obj.at("condition_trace")) {
        ConditionSet set;
        for (const auto& id : ids) set.insert(parse_condition(id.get<std::string>()));
        w.condition_trace.push_back(set);
      }
      walks.push_back(std::move(w));
    } catch (const nlohmann::json::exception& e) {
      throw IoError("walk dump line " + std::to_string(number) + ": " + e.what());
    } catch (const std::invalid_argument& e) {
      throw IoError("walk dump line " + std::to_string(number) + ": " + e.what());
    } catch (const UnknownAddressError& e) {
      throw IoError("walk dump line " + std::to_string(number) + ": " + e.what());
    }
  }
  return walks;
}

void write_walks_file(const std::filesystem::path& path, const CommGraph& graph,
                      std::span<const RandomWalk> walks) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write walk file: " + path.string());
  write_walks_jsonl(out, graph, walks);
}

std::vector<RandomWalk> read_walks_file(const std::filesystem::path& path,
                                        const CommGraph& graph) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open walk file: " + path.string());
  return read_walks_jsonl(in, graph);
}

}  // namespace flowdep
