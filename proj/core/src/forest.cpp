#include "flowdep/forest.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <limits>
#include <numeric>
#include <ostream>
#include <thread>

#include <json.hpp>

#include "flowdep/error.hpp"
#include "flowdep/rng.hpp"

namespace flowdep {
namespace {

struct Split {
  std::int32_t feature = -1;
  double threshold = 0.0;
  double impurity = 0.0;  // weighted child Gini
};

double gini(std::size_t positives, std::size_t total) {
  if (total == 0) return 0.0;
  const double p = static_cast<double>(positives) / static_cast<double>(total);
  return 2.0 * p * (1.0 - p);
}

class TreeBuilder {
 public:
  TreeBuilder(const Dataset& data, const ForestConfig& cfg, std::size_t mtry, Rng& rng)
      : data_(data), cfg_(cfg), mtry_(mtry), rng_(rng), features_(data.dims) {
    std::iota(features_.begin(), features_.end(), 0);
  }

  RandomForest::Tree build(std::vector<std::size_t> rows) {
    tree_.clear();
    grow(std::move(rows), 0);
    return std::move(tree_);
  }

 private:
  std::int32_t grow(std::vector<std::size_t> rows, std::size_t depth) {
    const auto id = static_cast<std::int32_t>(tree_.size());
    tree_.emplace_back();
    std::size_t positives = 0;
    for (const auto r : rows) positives += data_.labels[r];
    const bool pure = positives == 0 || positives == rows.size();
    const bool depth_capped = cfg_.max_depth != 0 && depth >= cfg_.max_depth;
    const bool too_small = rows.size() < 2 * cfg_.min_samples_leaf;

    Split split;
    if (!pure && !depth_capped && !too_small) split = best_split(rows, positives);
    if (split.feature < 0) {
      tree_[id].vote = 2 * positives >= rows.size();
      return id;
    }

    std::vector<std::size_t> left;
    std::vector<std::size_t> right;
    for (const auto r : rows) {
      (data_.row(r)[split.feature] <= split.threshold ? left : right).push_back(r);
    }
    rows.clear();
    rows.shrink_to_fit();
    tree_[id].feature = split.feature;
    tree_[id].threshold = split.threshold;
    const auto l = grow(std::move(left), depth + 1);
    const auto r = grow(std::move(right), depth + 1);
    tree_[id].left = l;
    tree_[id].right = r;
    return id;
  }

  Split best_split(const std::vector<std::size_t>& rows, std::size_t positives) {
    Split best;
    best.impurity = std::numeric_limits<double>::infinity();
    const auto n = rows.size();
    const auto min_leaf = std::max<std::size_t>(1, cfg_.min_samples_leaf);
    std::vector<std::pair<float, std::uint8_t>> column(n);

    // Visit features in random order; stop once mtry have been tried and a
    // usable split exists.
    for (std::size_t k = 0; k < features_.size(); ++k) {
      const auto pick = k + uniform_index(rng_, features_.size() - k);
      std::swap(features_[k], features_[pick]);
      if (k >= mtry_ && best.feature >= 0) break;
      const auto f = features_[k];
      for (std::size_t i = 0; i < n; ++i) column[i] = {data_.row(rows[i])[f], data_.labels[rows[i]]};
      std::sort(column.begin(), column.end());
      std::size_t left_pos = 0;
      for (std::size_t i = 0; i + 1 < n; ++i) {
        left_pos += column[i].second;
        if (column[i].first == column[i + 1].first) continue;
        const auto nl = i + 1;
        const auto nr = n - nl;
        if (nl < min_leaf || nr < min_leaf) continue;
        const double impurity = (static_cast<double>(nl) * gini(left_pos, nl) +
                                 static_cast<double>(nr) * gini(positives - left_pos, nr)) /
                                static_cast<double>(n);
        if (impurity < best.impurity) {
          best.feature = static_cast<std::int32_t>(f);
          best.threshold = (static_cast<double>(column[i].first) +
                            static_cast<double>(column[i + 1].first)) /
                           2.0;
          best.impurity = impurity;
        }
      }
    }
    return best;
  }

  const Dataset& data_;
  const ForestConfig& cfg_;
  std::size_t mtry_;
  Rng& rng_;
  std::vector<std::size_t> features_;
  RandomForest::Tree tree_;
};

Dataset canonical_order(const Dataset& data) {
  std::vector<std::size_t> order(data.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    const auto ra = data.row(a);
    const auto rb = data.row(b);
    if (std::lexicographical_compare(ra.begin(), ra.end(), rb.begin(), rb.end())) return true;
    if (std::lexicographical_compare(rb.begin(), rb.end(), ra.begin(), ra.end())) return false;
    return data.labels[a] < data.labels[b];
  });
  Dataset sorted;
  sorted.dims = data.dims;
  sorted.features.reserve(data.features.size());
  sorted.labels.reserve(data.size());
  for (const auto i : order) sorted.add(data.row(i), data.labels[i] != 0);
  return sorted;
}

}  // namespace

void ForestConfig::validate() const {
  std::vector<std::string> problems;
  if (n_trees < 1) problems.emplace_back("forest.trees must be >= 1");
  if (min_samples_leaf < 1) problems.emplace_back("forest.min_samples_leaf must be >= 1");
  if (!problems.empty()) {
    std::string msg;
    for (const auto& p : problems) msg += (msg.empty() ? "" : "; ") + p;
    throw ConfigError(msg);
  }
}

void Dataset::add(std::span<const float> x, bool label) {
  if (dims == 0 && labels.empty()) dims = x.size();
  if (x.size() != dims) throw ConfigError("feature vector length does not match dataset dims");
  features.insert(features.end(), x.begin(), x.end());
  labels.push_back(label ? 1 : 0);
}

RandomForest RandomForest::train(const Dataset& input, const ForestConfig& cfg) {
  cfg.validate();
  if (input.size() == 0) throw ConfigError("cannot train a forest on an empty dataset");
  if (input.dims == 0) throw ConfigError("cannot train a forest on zero-dimensional features");
  const auto positives = std::count(input.labels.begin(), input.labels.end(), 1);
  if (positives == 0 || static_cast<std::size_t>(positives) == input.size()) {
    throw ConfigError("forest training data must contain both classes");
  }
  const Dataset data = canonical_order(input);
  const auto mtry =
      cfg.features_per_split != 0
          ? std::min(cfg.features_per_split, data.dims)
          : static_cast<std::size_t>(std::ceil(std::sqrt(static_cast<double>(data.dims))));

  RandomForest forest;
  forest.dims_ = data.dims;
  forest.trees_.resize(cfg.n_trees);
  const auto grow_tree = [&](std::size_t t) {
    Rng rng(derive_seed(cfg.rng_seed, std::uint64_t{t}));
    std::vector<std::size_t> rows(data.size());
    if (cfg.bootstrap) {
      for (auto& r : rows) r = uniform_index(rng, data.size());
    } else {
      std::iota(rows.begin(), rows.end(), 0);
    }
    TreeBuilder builder(data, cfg, mtry, rng);
    forest.trees_[t] = builder.build(std::move(rows));
  };

  unsigned workers = cfg.threads == 0 ? std::thread::hardware_concurrency() : cfg.threads;
  workers = std::max(1u, std::min<unsigned>(workers, static_cast<unsigned>(cfg.n_trees)));
  if (workers == 1) {
    for (std::size_t t = 0; t < cfg.n_trees; ++t) grow_tree(t);
  } else {
    std::vector<std::jthread> pool;
    for (unsigned w = 0; w < workers; ++w) {
      pool.emplace_back([&, w] {
        for (std::size_t t = w; t < cfg.n_trees; t += workers) grow_tree(t);
      });
    }
  }
  return forest;
}

double RandomForest::predict_proba(std::span<const float> x) const {
  if (x.size() != dims_) {
    throw ConfigError("feature vector has " + std::to_string(x.size()) +
                      " values, model expects " + std::to_string(dims_));
  }
  std::size_t votes = 0;
  for (const auto& tree : trees_) {
    std::int32_t node = 0;
    while (tree[node].feature >= 0) {
      node = x[tree[node].feature] <= tree[node].threshold ? tree[node].left : tree[node].right;
    }
    votes += tree[node].vote ? 1 : 0;
  }
  return static_cast<double>(votes) / static_cast<double>(trees_.size());
}

void RandomForest::save(std::ostream& out) const {
  nlohmann::json trees = nlohmann::json::array();
  for (const auto& tree : trees_) {
    nlohmann::json nodes = nlohmann::json::array();
    for (const auto& n : tree) {
      if (n.feature < 0) {
        nodes.push_back({{"vote", n.vote ? 1 : 0}});
      } else {
        nodes.push_back({{"feature", n.feature},
                         {"threshold", n.threshold},
                         {"left", n.left},
                         {"right", n.right}});
      }
    }
    trees.push_back(std::move(nodes));
  }
  nlohmann::json doc{{"format", "flowdep-forest"},
                     {"version", 1},
                     {"dims", dims_},
                     {"trees", std::move(trees)}};
  out << doc.dump() << '\n';
}

RandomForest RandomForest::load(std::istream& in) {
  try {
    const auto doc = nlohmann::json::parse(in);
    if (doc.at("format") != "flowdep-forest" || doc.at("version") != 1) {
      throw IoError("unsupported model format");
    }
    RandomForest forest;
    forest.dims_ = doc.at("dims").get<std::size_t>();
    for (const auto& nodes : doc.at("trees")) {
      Tree tree;
      for (const auto& n : nodes) {
        Node node;
        if (n.contains("vote")) {
          node.vote = n.at("vote").get<int>() != 0;
        } else {
          node.feature = n.at("feature").get<std::int32_t>();
          node.threshold = n.at("threshold").get<double>();
          node.left = n.at("left").get<std::int32_t>();
          node.right = n.at("right").get<std::int32_t>();
        }
        tree.push_back(node);
      }
      if (tree.empty()) throw IoError("empty tree in model");
      forest.trees_.push_back(std::move(tree));
    }
    if (forest.trees_.empty()) throw IoError("model has no trees");
    return forest;
  } catch (const nlohmann::json::exception& e) {
    throw IoError(std::string("malformed model: ") + e.what());
  }
}

void RandomForest::save_file(const std::filesystem::path& path) const {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write model file: " + path.string());
  save(out);
}

RandomForest RandomForest::load_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open model file: " + path.string());
  return load(in);
}

}  // namespace flowdep
