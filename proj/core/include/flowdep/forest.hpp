#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <vector>

namespace flowdep {

struct ForestConfig {
  std::size_t n_trees = 100;
  std::size_t max_depth = 0;  // 0 = unlimited
  std::size_t min_samples_leaf = 1;
  std::size_t features_per_split = 0;  // 0 = ceil(sqrt(dims))
  bool bootstrap = true;
  std::uint64_t rng_seed = 0;
  unsigned threads = 0;  // 0 = hardware concurrency

  void validate() const;
};

/// Row-major float feature matrix with boolean labels.
struct Dataset {
  std::size_t dims = 0;
  std::vector<float> features;
  std::vector<std::uint8_t> labels;

  std::size_t size() const noexcept { return labels.size(); }
  std::span<const float> row(std::size_t i) const { return {features.data() + i * dims, dims}; }
  void add(std::span<const float> x, bool label);
};

/// Gini-split CART ensemble with bootstrap resampling and per-node feature
/// subsampling. Immutable once trained.
class RandomForest {
 public:
  /// Throws ConfigError for empty or single-class data. Training rows are
  /// put in a canonical order first, so the model does not depend on the
  /// order of the input rows; tree t draws from derive_seed(seed, t).
  static RandomForest train(const Dataset& data, const ForestConfig& cfg);

  /// Fraction of trees voting for the positive class. Throws ConfigError on
  /// a dimension mismatch.
  double predict_proba(std::span<const float> x) const;
  bool classify(std::span<const float> x) const { return predict_proba(x) >= 0.5; }

  std::size_t dims() const noexcept { return dims_; }
  std::size_t tree_count() const noexcept { return trees_.size(); }

  void save(std::ostream& out) const;
  static RandomForest load(std::istream& in);
  void save_file(const std::filesystem::path& path) const;
  static RandomForest load_file(const std::filesystem::path& path);

  struct Node {
    // Leaf when feature < 0; then `vote` holds the predicted class.
    std::int32_t feature = -1;
    double threshold = 0.0;  // go left when x[feature] <= threshold
    std::int32_t left = -1;
    std::int32_t right = -1;
    bool vote = false;
  };
  using Tree = std::vector<Node>;

  std::span<const Tree> trees() const noexcept { return trees_; }

 private:
  std::size_t dims_ = 0;
  std::vector<Tree> trees_;
};

}  // namespace flowdep
