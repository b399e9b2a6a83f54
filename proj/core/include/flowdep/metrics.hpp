#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace flowdep {

struct SplitIndices {
  std::vector<std::size_t> train;  // ascending
  std::vector<std::size_t> test;   // ascending
};

/// Uniform split without stratification. The test set holds
/// floor(fraction * n + 0.5) items. Throws ConfigError when either side
/// would be empty or fraction is outside (0, 1).
SplitIndices split_indices(std::size_t n, double test_fraction, std::uint64_t seed);

struct CurvePoint {
  double x = 0.0;
  double y = 0.0;
  friend bool operator==(const CurvePoint&, const CurvePoint&) = default;
};

struct EvalReport {
  double test_fraction = 0.0;
  std::size_t n_test = 0;
  double accuracy = 0.0;
  double precision = 0.0;  // 0 when nothing is predicted positive
  double recall = 0.0;     // 0 when there are no positives
  double f1 = 0.0;         // 0 when precision + recall is 0
  std::optional<double> roc_auc;            // empty for single-class labels
  std::optional<double> average_precision;  // empty for single-class labels
  double chance_level = 0.0;                // positive fraction
  std::vector<CurvePoint> roc;              // (fpr, tpr) from (0,0) to (1,1)
  std::vector<CurvePoint> pr;               // (recall, precision) from (0,1)
};

/// Scores at or above `threshold` are predicted positive. The ROC is the
/// exact step curve with tied scores moved together; AUC is its trapezoid
/// area and AP the step sum of recall increments times precision.
EvalReport compute_metrics(std::span<const double> scores, std::span<const std::uint8_t> labels,
                           double threshold = 0.5);

struct EvalConfig {
  std::size_t n_splits = 15;
  std::vector<double> fractions{0.25, 0.5};
  double auc_fraction = 0.5;  // AUC/AP/curves come from this fraction's splits
  double threshold = 0.5;
  std::uint64_t rng_seed = 0;

  void validate() const;
};

/// Returns scores for `test` after fitting on `train` (indices into the label set).
using Scorer = std::function<std::vector<double>(std::span<const std::size_t> train,
                                                 std::span<const std::size_t> test)>;

struct FractionSummary {
  double test_fraction = 0.0;
  std::size_t n_test = 0;
  double accuracy = 0.0;
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  std::optional<double> roc_auc;
  std::optional<double> average_precision;
};

struct AggregateReport {
  std::size_t n_splits = 0;
  std::vector<FractionSummary> fractions;
  double auc_fraction = 0.0;
  std::optional<double> roc_auc;  // mean over the auc_fraction splits
  std::optional<double> average_precision;
  double chance_level = 0.0;
  std::vector<CurvePoint> roc;  // first auc_fraction split
  std::vector<CurvePoint> pr;
};

/// Means over seeded splits per fraction. Split s of fraction f uses
/// derive_seed(seed, f * n_splits + s).
AggregateReport repeated_eval(std::span<const std::uint8_t> labels, const Scorer& scorer,
                              const EvalConfig& cfg);

std::string report_json(const AggregateReport& report);
void write_report_file(const std::filesystem::path& path, const AggregateReport& report);
void write_curve_csv(const std::filesystem::path& path, std::span<const CurvePoint> points,
                     const std::string& x_name, const std::string& y_name);

}  // namespace flowdep
