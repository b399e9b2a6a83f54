#include "flowdep/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>

#include <json.hpp>

#include "flowdep/error.hpp"
#include "flowdep/rng.hpp"

namespace flowdep {
namespace {

__extension__ using Wide = unsigned __int128;

struct Mean {
  double sum = 0.0;
  std::size_t n = 0;
  void add(double v) {
    sum += v;
    ++n;
  }
  void add(const std::optional<double>& v) {
    if (v) add(*v);
  }
  std::optional<double> value() const {
    if (n == 0) return std::nullopt;
    return sum / static_cast<double>(n);
  }
};

nlohmann::json optional_json(const std::optional<double>& v) {
  return v ? nlohmann::json(*v) : nlohmann::json(nullptr);
}

nlohmann::json curve_json(std::span<const CurvePoint> points) {
  auto out = nlohmann::json::array();
  for (const auto& p : points) out.push_back({p.x, p.y});
  return out;
}

}  // namespace

SplitIndices split_indices(std::size_t n, double test_fraction, std::uint64_t seed) {
  if (!(test_fraction > 0.0 && test_fraction < 1.0)) {
    throw ConfigError("test fraction must lie strictly between 0 and 1");
  }
  const auto test_size = static_cast<std::size_t>(std::floor(test_fraction * static_cast<double>(n) + 0.5));
  if (test_size == 0 || test_size >= n) {
    throw ConfigError("split of " + std::to_string(n) + " items at fraction " +
                      std::to_string(test_fraction) + " leaves an empty side");
  }
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  Rng rng(seed);
  for (std::size_t i = 0; i < test_size; ++i) {
    std::swap(order[i], order[i + uniform_index(rng, n - i)]);
  }
  SplitIndices out;
  out.test.assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(test_size));
  out.train.assign(order.begin() + static_cast<std::ptrdiff_t>(test_size), order.end());
  std::sort(out.test.begin(), out.test.end());
  std::sort(out.train.begin(), out.train.end());
  return out;
}

EvalReport compute_metrics(std::span<const double> scores, std::span<const std::uint8_t> labels,
                           double threshold) {
  if (scores.size() != labels.size()) throw ConfigError("scores and labels differ in length");
  if (scores.empty()) throw ConfigError("cannot evaluate an empty test set");
  for (const auto s : scores) {
    if (!std::isfinite(s)) throw ConfigError("scores must be finite");
  }

  EvalReport r;
  r.n_test = scores.size();
  std::uint64_t tp = 0, fp = 0, tn = 0, fn = 0;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    const bool predicted = scores[i] >= threshold;
    const bool actual = labels[i] != 0;
    if (predicted && actual) ++tp;
    else if (predicted) ++fp;
    else if (actual) ++fn;
    else ++tn;
  }
  const auto pos = tp + fn;
  const auto neg = fp + tn;
  const auto n = static_cast<double>(scores.size());
  r.accuracy = static_cast<double>(tp + tn) / n;
  r.precision = tp + fp > 0 ? static_cast<double>(tp) / static_cast<double>(tp + fp) : 0.0;
  r.recall = pos > 0 ? static_cast<double>(tp) / static_cast<double>(pos) : 0.0;
  r.f1 = r.precision + r.recall > 0 ? 2 * r.precision * r.recall / (r.precision + r.recall) : 0.0;
  r.chance_level = static_cast<double>(pos) / n;
  if (pos == 0 || neg == 0) return r;

  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });

  // Twice the area times pos * neg stays integral: each tie group adds
  // d_fp * (tp_before + tp_after).
  Wide doubled_area = 0;
  std::uint64_t seen_tp = 0, seen_fp = 0;
  double ap = 0.0;
  r.roc.push_back({0.0, 0.0});
  r.pr.push_back({0.0, 1.0});
  for (std::size_t i = 0; i < order.size();) {
    std::size_t j = i;
    std::uint64_t group_tp = 0, group_fp = 0;
    while (j < order.size() && scores[order[j]] == scores[order[i]]) {
      (labels[order[j]] != 0 ? group_tp : group_fp) += 1;
      ++j;
    }
    doubled_area += static_cast<Wide>(group_fp) * (2 * seen_tp + group_tp);
    seen_tp += group_tp;
    seen_fp += group_fp;
    const double precision = static_cast<double>(seen_tp) / static_cast<double>(seen_tp + seen_fp);
    const double recall = static_cast<double>(seen_tp) / static_cast<double>(pos);
    ap += static_cast<double>(group_tp) / static_cast<double>(pos) * precision;
    r.roc.push_back({static_cast<double>(seen_fp) / static_cast<double>(neg), recall});
    r.pr.push_back({recall, precision});
    i = j;
  }
  r.roc_auc = static_cast<double>(doubled_area) /
              (2.0 * static_cast<double>(pos) * static_cast<double>(neg));
  r.average_precision = ap;
  return r;
}

void EvalConfig::validate() const {
  std::vector<std::string> problems;
  if (n_splits < 1) problems.emplace_back("eval.n_splits must be >= 1");
  if (fractions.empty()) problems.emplace_back("eval.fractions must not be empty");
  for (const auto f : fractions) {
    if (!(f > 0.0 && f < 1.0)) problems.emplace_back("eval.fractions must lie in (0, 1)");
  }
  if (std::find(fractions.begin(), fractions.end(), auc_fraction) == fractions.end()) {
    problems.emplace_back("eval.auc_fraction must be one of eval.fractions");
  }
  if (!problems.empty()) {
    std::string msg;
    for (const auto& p : problems) msg += (msg.empty() ? "" : "; ") + p;
    throw ConfigError(msg);
  }
}

AggregateReport repeated_eval(std::span<const std::uint8_t> labels, const Scorer& scorer,
                              const EvalConfig& cfg) {
  cfg.validate();
  AggregateReport out;
  out.n_splits = cfg.n_splits;
  out.auc_fraction = cfg.auc_fraction;
  const auto positives = std::count_if(labels.begin(), labels.end(), [](auto l) { return l != 0; });
  out.chance_level = labels.empty() ? 0.0 : static_cast<double>(positives) / static_cast<double>(labels.size());

  Mean headline_auc, headline_ap;
  for (std::size_t f = 0; f < cfg.fractions.size(); ++f) {
    const double fraction = cfg.fractions[f];
    Mean acc, prec, rec, f1, auc, ap;
    FractionSummary summary;
    summary.test_fraction = fraction;
    for (std::size_t s = 0; s < cfg.n_splits; ++s) {
      const auto split =
          split_indices(labels.size(), fraction, derive_seed(cfg.rng_seed, std::uint64_t{f * cfg.n_splits + s}));
      const auto scores = scorer(split.train, split.test);
      if (scores.size() != split.test.size()) throw ConfigError("scorer returned the wrong number of scores");
      std::vector<std::uint8_t> test_labels;
      for (const auto i : split.test) test_labels.push_back(labels[i]);
      auto report = compute_metrics(scores, test_labels, cfg.threshold);
      summary.n_test = report.n_test;
      acc.add(report.accuracy);
      prec.add(report.precision);
      rec.add(report.recall);
      f1.add(report.f1);
      auc.add(report.roc_auc);
      ap.add(report.average_precision);
      if (fraction == cfg.auc_fraction) {
        headline_auc.add(report.roc_auc);
        headline_ap.add(report.average_precision);
        if (s == 0) {
          out.roc = std::move(report.roc);
          out.pr = std::move(report.pr);
        }
      }
    }
    summary.accuracy = *acc.value();
    summary.precision = *prec.value();
    summary.recall = *rec.value();
    summary.f1 = *f1.value();
    summary.roc_auc = auc.value();
    summary.average_precision = ap.value();
    out.fractions.push_back(summary);
  }
  out.roc_auc = headline_auc.value();
  out.average_precision = headline_ap.value();
  return out;
}

std::string report_json(const AggregateReport& report) {
  auto fractions = nlohmann::json::array();
  for (const auto& f : report.fractions) {
    fractions.push_back({{"test_fraction", f.test_fraction},
                         {"n_test", f.n_test},
                         {"accuracy", f.accuracy},
                         {"precision", f.precision},
                         {"recall", f.recall},
                         {"f1", f.f1},
                         {"roc_auc", optional_json(f.roc_auc)},
                         {"average_precision", optional_json(f.average_precision)}});
  }
  nlohmann::json doc{{"n_splits", report.n_splits},
                     {"fractions", std::move(fractions)},
                     {"roc_auc", optional_json(report.roc_auc)},
                     {"average_precision", optional_json(report.average_precision)},
                     {"chance_level", report.chance_level},
                     {"auc_source", {{"test_fraction", report.auc_fraction},
                                     {"aggregate", "mean over splits"},
                                     {"curves", "first split"}}},
                     {"roc_curve", curve_json(report.roc)},
                     {"pr_curve", curve_json(report.pr)}};
  return doc.dump(2) + "\n";
}

void write_report_file(const std::filesystem::path& path, const AggregateReport& report) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write report: " + path.string());
  out << report_json(report);
}

void write_curve_csv(const std::filesystem::path& path, std::span<const CurvePoint> points,
                     const std::string& x_name, const std::string& y_name) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write curve: " + path.string());
  out << x_name << ',' << y_name << '\n';
  out.precision(17);
  for (const auto& p : points) out << p.x << ',' << p.y << '\n';
}

}  // namespace flowdep
