#pragma once

#include <cstdint>
#include <filesystem>
#include <set>
#include <span>
#include <utility>
#include <vector>

#include "flowdep/embedding.hpp"
#include "flowdep/forest.hpp"
#include "flowdep/graph.hpp"

namespace flowdep {

struct LabelDescriptor {
  VertexId src = 0;
  VertexId dst = 0;
  bool label = false;

  friend bool operator==(const LabelDescriptor&, const LabelDescriptor&) = default;
};

/// A labeled candidate pair with its dependency vector.
struct LabeledPair {
  VertexId src = 0;
  VertexId dst = 0;
  std::vector<float> features;
  bool label = false;
};

using PairSet = std::set<std::pair<VertexId, VertexId>>;

/// Every ground-truth pair labeled true followed by the same number of
/// distinct, uniformly drawn non-dependency pairs labeled false. With
/// `unordered` pairs are normalized to (min, max) first. Throws
/// ExhaustedError when too few non-dependency pairs exist.
std::vector<LabelDescriptor> build_label_set(const PairSet& truth, std::size_t vertex_count,
                                             std::uint64_t seed, bool unordered = false);

std::vector<LabeledPair> attach_features(const EmbeddingMatrix& emb,
                                         std::span<const LabelDescriptor> labels);

Dataset to_dataset(std::span<const LabeledPair> pairs);

/// CSV: src,dst,label (addresses, 0/1).
void write_labels_file(const std::filesystem::path& path, std::span<const Address> addresses,
                       std::span<const LabelDescriptor> labels);
std::vector<LabelDescriptor> read_labels_file(const std::filesystem::path& path,
                                              std::span<const Address> addresses);

}  // namespace flowdep
