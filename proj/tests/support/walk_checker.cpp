#include "walk_checker.hpp"

#include <cstdlib>

namespace flowdep::testing {
namespace {

// Deliberately written out again instead of reusing the library predicates.
bool contains(const Edge& outer, const Edge& inner) {
  return outer.t_start <= inner.t_start && inner.t_start <= inner.t_end &&
         inner.t_end <= outer.t_end;
}

bool reply_of(const Edge& fwd, const Edge& rev, Millis eps) {
  return fwd.src_port == rev.dst_port && fwd.dst_port == rev.src_port &&
         fwd.t_start <= rev.t_start && std::llabs(fwd.t_end - rev.t_end) <= eps;
}

bool follows_within(const Edge& first, const Edge& second, Millis eps) {
  return first.t_end <= second.t_start && second.t_start <= first.t_end + eps;
}

bool seen_forward(const std::vector<VertexId>& prefix, VertexId candidate) {
  // prefix ends with the current vertex; position i = size - 2 is excluded.
  const std::size_t i = prefix.size() - 2;
  for (std::size_t j = 0; j + 1 < prefix.size(); ++j) {
    if (j == i) continue;
    if (prefix[j] == candidate && prefix[j + 1] == prefix.back()) return true;
  }
  return false;
}

std::string describe(std::size_t step, const std::string& what) {
  return "step " + std::to_string(step) + ": " + what;
}

}  // namespace

WalkChecker::WalkChecker(const CommGraph& graph, const WalkConfig& cfg) : graph_(graph), cfg_(cfg) {
  for (const auto& e : graph.edges()) pairs_[{e.src, e.dst}].push_back(&e);
}

const std::vector<const Edge*>& WalkChecker::edges_of(VertexId a, VertexId b) const {
  static const std::vector<const Edge*> none;
  const auto it = pairs_.find({a, b});
  return it == pairs_.end() ? none : it->second;
}

ConditionSet WalkChecker::timed_conditions(const std::vector<VertexId>& prefix, VertexId prev,
                                           VertexId cur, VertexId cand) const {
  const auto& cfg = cfg_;
  ConditionSet set;
  const auto& incoming = edges_of(prev, cur);
  const auto& outgoing = edges_of(cur, cand);
  if (outgoing.size() >= cfg.n_t) {
    for (const auto* a : incoming) {
      for (const auto* b : outgoing) {
        if (contains(*a, *b)) set.insert(Condition::LrOpen);
        if (contains(*b, *a) && seen_forward(prefix, cand)) set.insert(Condition::LrReturn);
        if (cand == prev && reply_of(*a, *b, cfg.epsilon)) set.insert(Condition::RevReturn);
      }
    }
  }
  if (cand != cur && cand != prev) {
    const auto& remote = edges_of(prev, cand);
    if (remote.size() >= cfg.n_t) {
      for (const auto* a : incoming) {
        for (const auto* c : remote) {
          if (follows_within(*a, *c, cfg.epsilon)) set.insert(Condition::RrOpen);
        }
      }
    }
  }
  return set;
}

std::size_t recorded_condition_count(const RandomWalk& walk) {
  std::size_t n = 0;
  for (const auto& set : walk.condition_trace) {
    for (const auto c : kAllConditions) n += set.contains(c) ? 1 : 0;
  }
  return n;
}

std::vector<std::string> WalkChecker::check(const RandomWalk& walk) const {
  const auto& g = graph_;
  const auto& cfg = cfg_;
  std::vector<std::string> problems;
  const auto& v = walk.vertices;
  if (v.size() < 2) return problems;
  if (walk.step_edges.size() != v.size() - 1) problems.push_back("step_edges length mismatch");
  if (walk.condition_trace.size() != v.size() - 2) {
    problems.push_back("condition_trace length mismatch");
  }
  if (!problems.empty()) return problems;

  const auto& first = g.edge(walk.step_edges[0]);
  if (first.src != v[0] || first.dst != v[1]) problems.push_back(describe(0, "first edge mismatch"));

  for (std::size_t k = 0; k + 2 < v.size(); ++k) {
    const VertexId cur = v[k + 1];
    const VertexId cand = v[k + 2];
    const VertexId prev = g.edge(walk.step_edges[k]).src;
    const std::vector<VertexId> prefix(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(k + 2));
    const ConditionSet recorded = walk.condition_trace[k];
    const auto& step = g.edge(walk.step_edges[k + 1]);

    if (step.dst != cand) problems.push_back(describe(k, "step edge does not reach the vertex"));
    const bool via_remote = step.src == prev && step.src != cur;
    if (step.src != cur && !(via_remote && recorded.contains(Condition::RrOpen))) {
      problems.push_back(describe(k, "step edge leaves an unexpected vertex"));
    }

    if (recorded.any_timed()) {
      const auto expected = timed_conditions(prefix, prev, cur, cand);
      if (!(expected == recorded)) {
        problems.push_back(describe(k, "recorded bits " + std::to_string(recorded.bits()) +
                                           " but brute force gives " +
                                           std::to_string(expected.bits())));
      }
      continue;
    }

    // Fallback: no vertex at all may satisfy a timed condition.
    for (VertexId w = 0; w < g.vertex_count(); ++w) {
      if (w == cur) continue;
      if (!timed_conditions(prefix, prev, cur, w).empty()) {
        problems.push_back(describe(k, "fallback taken although vertex " + std::to_string(w) +
                                           " satisfies a condition"));
        break;
      }
    }
    const auto direct = edges_of(cur, cand).size();
    if (recorded == ConditionSet{Condition::FallbackThreshold}) {
      if (direct < cfg.n_t) problems.push_back(describe(k, "threshold fallback below n_t"));
    } else if (recorded == ConditionSet{Condition::FallbackAny}) {
      if (direct == 0) problems.push_back(describe(k, "any-fallback to a non-neighbour"));
      for (VertexId w = 0; w < g.vertex_count(); ++w) {
        if (edges_of(cur, w).size() >= cfg.n_t) {
          problems.push_back(describe(k, "any-fallback although a neighbour meets n_t"));
          break;
        }
      }
    } else {
      problems.push_back(describe(k, "malformed condition set"));
    }
  }
  return problems;
}

}  // namespace flowdep::testing
