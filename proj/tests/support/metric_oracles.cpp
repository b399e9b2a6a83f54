#include "metric_oracles.hpp"

#include <cmath>
#include <set>
#include <vector>

namespace flowdep::testing {

namespace {

__extension__ using Wide = __int128;

// Twice the 1-based mid-rank: 2 * less + equal + 1.
std::vector<Wide> doubled_ranks(std::span<const double> v) {
  std::vector<Wide> r(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) {
    Wide less = 0, equal = 0;
    for (const double w : v) {
      less += w < v[i];
      equal += w == v[i];
    }
    r[i] = 2 * less + equal + 1;
  }
  return r;
}

}  // namespace

double pairwise_auc(std::span<const double> scores, std::span<const std::uint8_t> labels) {
  Wide wins = 0, pos = 0, neg = 0;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    if (!labels[i]) continue;
    ++pos;
    for (std::size_t j = 0; j < scores.size(); ++j) {
      if (labels[j]) continue;
      wins += scores[i] > scores[j] ? 2 : scores[i] == scores[j] ? 1 : 0;
    }
  }
  for (const auto l : labels) neg += l ? 0 : 1;
  return static_cast<double>(wins) / (2.0 * static_cast<double>(pos) * static_cast<double>(neg));
}

double threshold_sweep_ap(std::span<const double> scores, std::span<const std::uint8_t> labels) {
  const std::set<double, std::greater<>> thresholds(scores.begin(), scores.end());
  std::size_t pos = 0;
  for (const auto l : labels) pos += l ? 1 : 0;
  double ap = 0.0;
  std::size_t previous_tp = 0;
  for (const double t : thresholds) {
    std::size_t tp = 0, predicted = 0;
    for (std::size_t i = 0; i < scores.size(); ++i) {
      if (scores[i] >= t) {
        ++predicted;
        tp += labels[i] ? 1 : 0;
      }
    }
    ap += static_cast<double>(tp - previous_tp) / static_cast<double>(pos) *
          (static_cast<double>(tp) / static_cast<double>(predicted));
    previous_tp = tp;
  }
  return ap;
}

std::optional<double> naive_spearman(std::span<const double> xs, std::span<const double> ys) {
  const auto rx = doubled_ranks(xs);
  const auto ry = doubled_ranks(ys);
  const Wide n = static_cast<Wide>(xs.size());
  Wide sx = 0, sy = 0;
  for (std::size_t i = 0; i < rx.size(); ++i) {
    sx += rx[i];
    sy += ry[i];
  }
  // Centered sums scaled by n so they stay integral, then divided back out.
  Wide cxy = 0, cxx = 0, cyy = 0;
  for (std::size_t i = 0; i < rx.size(); ++i) {
    const Wide dx = n * rx[i] - sx;
    const Wide dy = n * ry[i] - sy;
    cxy += dx * dy;
    cxx += dx * dx;
    cyy += dy * dy;
  }
  if (cxx == 0 || cyy == 0) return std::nullopt;
  const Wide num = cxy / n, vx = cxx / n, vy = cyy / n;
  return static_cast<double>(num) / std::sqrt(static_cast<double>(vx) * static_cast<double>(vy));
}

std::optional<double> naive_kendall(std::span<const double> xs, std::span<const double> ys) {
  Wide concordant = 0, discordant = 0, x_ties = 0, y_ties = 0, total = 0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    for (std::size_t j = i + 1; j < xs.size(); ++j) {
      ++total;
      const bool tx = xs[i] == xs[j], ty = ys[i] == ys[j];
      x_ties += tx;
      y_ties += ty;
      if (tx || ty) continue;
      ((xs[i] < xs[j]) == (ys[i] < ys[j]) ? concordant : discordant) += 1;
    }
  }
  const Wide dx = total - x_ties, dy = total - y_ties;
  if (dx == 0 || dy == 0) return std::nullopt;
  return static_cast<double>(concordant - discordant) /
         std::sqrt(static_cast<double>(dx) * static_cast<double>(dy));
}

}  // namespace flowdep::testing
