#include "flowdep/simindex.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "flowdep/error.hpp"

namespace flowdep {
namespace {

__extension__ using Wide = __int128;

void check_lengths(std::span<const double> xs, std::span<const double> ys) {
  if (xs.size() != ys.size()) throw ConfigError("rank correlation needs equal-length inputs");
  if (xs.size() < 2) throw ConfigError("rank correlation needs at least 2 values");
}

/// Mid-ranks times two, so ties stay integral.
std::vector<std::int64_t> doubled_ranks(std::span<const double> v) {
  std::vector<std::size_t> order(v.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return v[a] < v[b]; });
  std::vector<std::int64_t> ranks(v.size());
  for (std::size_t i = 0; i < order.size();) {
    std::size_t j = i;
    while (j < order.size() && v[order[j]] == v[order[i]]) ++j;
    for (std::size_t k = i; k < j; ++k) ranks[order[k]] = static_cast<std::int64_t>(i + j + 1);
    i = j;
  }
  return ranks;
}

Wide tie_pairs(std::size_t run) { return static_cast<Wide>(run) * (static_cast<Wide>(run) - 1) / 2; }

/// Sorts `v` and returns the number of strictly inverted pairs.
Wide merge_count(std::vector<double>& v, std::vector<double>& buf, std::size_t lo, std::size_t hi) {
  if (hi - lo < 2) return 0;
  const std::size_t mid = lo + (hi - lo) / 2;
  Wide swaps = merge_count(v, buf, lo, mid) + merge_count(v, buf, mid, hi);
  std::size_t i = lo, j = mid, k = lo;
  while (i < mid && j < hi) {
    if (v[j] < v[i]) {
      swaps += static_cast<Wide>(mid - i);
      buf[k++] = v[j++];
    } else {
      buf[k++] = v[i++];
    }
  }
  while (i < mid) buf[k++] = v[i++];
  while (j < hi) buf[k++] = v[j++];
  std::copy(buf.begin() + static_cast<std::ptrdiff_t>(lo), buf.begin() + static_cast<std::ptrdiff_t>(hi),
            v.begin() + static_cast<std::ptrdiff_t>(lo));
  return swaps;
}

}  // namespace

std::string_view to_string(IndexKind kind) noexcept {
  switch (kind) {
    case IndexKind::AA: return "AA";
    case IndexKind::CN: return "CN";
    case IndexKind::PA: return "PA";
    case IndexKind::RA: return "RA";
  }
  return "AA";
}

SimpleDigraph::SimpleDigraph(const CommGraph& graph)
    : out_(graph.vertex_count()), in_(graph.vertex_count()) {
  for (VertexId v = 0; v < graph.vertex_count(); ++v) {
    const auto outs = graph.out_neighbors(v);
    const auto ins = graph.in_neighbors(v);
    out_[v].assign(outs.begin(), outs.end());
    in_[v].assign(ins.begin(), ins.end());
  }
}

SimpleDigraph::SimpleDigraph(std::size_t vertex_count,
                             std::span<const std::pair<VertexId, VertexId>> edges)
    : out_(vertex_count), in_(vertex_count) {
  for (const auto& [a, b] : edges) {
    if (a >= vertex_count || b >= vertex_count) throw ConfigError("edge endpoint out of range");
    out_[a].push_back(b);
    in_[b].push_back(a);
  }
  for (auto* side : {&out_, &in_}) {
    for (auto& list : *side) {
      std::sort(list.begin(), list.end());
      list.erase(std::unique(list.begin(), list.end()), list.end());
    }
  }
}

double index_score(const SimpleDigraph& g, VertexId x, VertexId y, IndexKind kind) {
  const auto outs = g.out_neighbors(x);
  const auto ins = g.in_neighbors(y);
  if (kind == IndexKind::PA) return static_cast<double>(outs.size() * ins.size());
  std::vector<VertexId> common;
  std::set_intersection(outs.begin(), outs.end(), ins.begin(), ins.end(),
                        std::back_inserter(common));
  if (kind == IndexKind::CN) return static_cast<double>(common.size());
  double sum = 0.0;
  for (const auto v : common) {
    const auto degree = static_cast<double>(g.out_neighbors(v).size());
    if (kind == IndexKind::RA) {
      sum += 1.0 / degree;
    } else if (degree != 1.0) {
      sum += 1.0 / std::log(degree);
    }
  }
  return sum;
}

std::optional<double> spearman(std::span<const double> xs, std::span<const double> ys) {
  check_lengths(xs, ys);
  const auto rx = doubled_ranks(xs);
  const auto ry = doubled_ranks(ys);
  Wide sx = 0, sy = 0, sxx = 0, syy = 0, sxy = 0;
  for (std::size_t i = 0; i < rx.size(); ++i) {
    sx += rx[i];
    sy += ry[i];
    sxx += static_cast<Wide>(rx[i]) * rx[i];
    syy += static_cast<Wide>(ry[i]) * ry[i];
    sxy += static_cast<Wide>(rx[i]) * ry[i];
  }
  const Wide n = static_cast<Wide>(rx.size());
  const Wide num = n * sxy - sx * sy;
  const Wide vx = n * sxx - sx * sx;
  const Wide vy = n * syy - sy * sy;
  if (vx == 0 || vy == 0) return std::nullopt;
  return static_cast<double>(num) / std::sqrt(static_cast<double>(vx) * static_cast<double>(vy));
}

std::optional<double> kendall_tau(std::span<const double> xs, std::span<const double> ys) {
  check_lengths(xs, ys);
  const std::size_t n = xs.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return xs[a] < xs[b] || (xs[a] == xs[b] && ys[a] < ys[b]);
  });

  Wide x_ties = 0, joint_ties = 0;
  for (std::size_t i = 0; i < n;) {
    std::size_t j = i;
    while (j < n && xs[order[j]] == xs[order[i]]) ++j;
    x_ties += tie_pairs(j - i);
    for (std::size_t a = i; a < j;) {
      std::size_t b = a;
      while (b < j && ys[order[b]] == ys[order[a]]) ++b;
      joint_ties += tie_pairs(b - a);
      a = b;
    }
    i = j;
  }

  std::vector<double> y(n);
  for (std::size_t i = 0; i < n; ++i) y[i] = ys[order[i]];
  std::vector<double> buf(n);
  const Wide swaps = merge_count(y, buf, 0, n);
  Wide y_ties = 0;
  for (std::size_t i = 0; i < n;) {
    std::size_t j = i;
    while (j < n && y[j] == y[i]) ++j;
    y_ties += tie_pairs(j - i);
    i = j;
  }

  const Wide total = tie_pairs(n);
  const Wide diff = total - x_ties - y_ties + joint_ties - 2 * swaps;  // concordant - discordant
  const Wide dx = total - x_ties;
  const Wide dy = total - y_ties;
  if (dx == 0 || dy == 0) return std::nullopt;
  return static_cast<double>(diff) / std::sqrt(static_cast<double>(dx) * static_cast<double>(dy));
}

std::vector<SimIndexRow> score_pairs(const SimpleDigraph& g,
                                     std::span<const std::pair<VertexId, VertexId>> pairs,
                                     std::span<const double> probabilities) {
  if (pairs.size() != probabilities.size()) {
    throw ConfigError("one model probability is needed per scored pair");
  }
  std::vector<SimIndexRow> rows;
  rows.reserve(pairs.size());
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    SimIndexRow row{pairs[i].first, pairs[i].second, {}, probabilities[i]};
    for (std::size_t k = 0; k < kAllIndexKinds.size(); ++k) {
      row.scores[k] = index_score(g, row.src, row.dst, kAllIndexKinds[k]);
    }
    rows.push_back(row);
  }
  return rows;
}

std::vector<IndexCorrelation> correlate(std::span<const SimIndexRow> rows) {
  std::vector<double> probs;
  for (const auto& r : rows) probs.push_back(r.model_probability);
  std::vector<IndexCorrelation> out;
  for (std::size_t k = 0; k < kAllIndexKinds.size(); ++k) {
    std::vector<double> scores;
    for (const auto& r : rows) scores.push_back(r.scores[k]);
    out.push_back({kAllIndexKinds[k], spearman(scores, probs), kendall_tau(scores, probs)});
  }
  return out;
}

}  // namespace flowdep
