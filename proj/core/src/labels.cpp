#include "flowdep/labels.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>
#include <unordered_map>

#include "flowdep/error.hpp"
#include "flowdep/rng.hpp"

namespace flowdep {
namespace {

std::pair<VertexId, VertexId> normalize(VertexId a, VertexId b, bool unordered) {
  if (unordered && b < a) return {b, a};
  return {a, b};
}

}  // namespace

std::vector<LabelDescriptor> build_label_set(const PairSet& truth, std::size_t vertex_count,
                                             std::uint64_t seed, bool unordered) {
  PairSet positives;
  for (const auto& [a, b] : truth) {
    if (a == b) continue;
    if (a >= vertex_count || b >= vertex_count) {
      throw ConfigError("ground-truth pair references a vertex outside the graph");
    }
    positives.insert(normalize(a, b, unordered));
  }

  const std::uint64_t n = vertex_count;
  const std::uint64_t universe = unordered ? n * (n - (n > 0 ? 1 : 0)) / 2 : n * (n > 0 ? n - 1 : 0);
  const std::uint64_t available = universe - positives.size();
  if (available < positives.size()) {
    throw ExhaustedError("only " + std::to_string(available) +
                         " non-dependency pairs available for " +
                         std::to_string(positives.size()) + " dependencies");
  }

  std::vector<LabelDescriptor> out;
  out.reserve(2 * positives.size());
  for (const auto& [a, b] : positives) out.push_back({a, b, true});

  Rng rng(seed);
  PairSet negatives;
  if (positives.size() * 2 <= available) {
    // Rejection sampling converges quickly when at most half the pool is needed.
    while (negatives.size() < positives.size()) {
      const auto a = static_cast<VertexId>(uniform_index(rng, vertex_count));
      const auto b = static_cast<VertexId>(uniform_index(rng, vertex_count));
      if (a == b) continue;
      const auto p = normalize(a, b, unordered);
      if (positives.contains(p) || !negatives.insert(p).second) continue;
      out.push_back({p.first, p.second, false});
    }
  } else {
    std::vector<std::pair<VertexId, VertexId>> pool;
    for (VertexId a = 0; a < vertex_count; ++a) {
      for (VertexId b = unordered ? a + 1 : 0; b < vertex_count; ++b) {
        if (a != b && !positives.contains({a, b})) pool.emplace_back(a, b);
      }
    }
    for (std::size_t i = 0; i < positives.size(); ++i) {
      const auto j = i + uniform_index(rng, pool.size() - i);
      std::swap(pool[i], pool[j]);
      out.push_back({pool[i].first, pool[i].second, false});
    }
  }
  return out;
}

std::vector<LabeledPair> attach_features(const EmbeddingMatrix& emb,
                                         std::span<const LabelDescriptor> labels) {
  std::vector<LabeledPair> out;
  out.reserve(labels.size());
  for (const auto& l : labels) {
    out.push_back({l.src, l.dst, dependency_vector(emb, l.src, l.dst), l.label});
  }
  return out;
}

Dataset to_dataset(std::span<const LabeledPair> pairs) {
  Dataset data;
  for (const auto& p : pairs) data.add(p.features, p.label);
  return data;
}

void write_labels_file(const std::filesystem::path& path, std::span<const Address> addresses,
                       std::span<const LabelDescriptor> labels) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write labels file: " + path.string());
  out << "src,dst,label\n";
  for (const auto& l : labels) {
    if (l.src >= addresses.size() || l.dst >= addresses.size()) {
      throw ConfigError("label references a vertex outside the address list");
    }
    out << addresses[l.src] << ',' << addresses[l.dst] << ',' << (l.label ? 1 : 0) << '\n';
  }
}

std::vector<LabelDescriptor> read_labels_file(const std::filesystem::path& path,
                                              std::span<const Address> addresses) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open labels file: " + path.string());
  std::unordered_map<Address, VertexId> index;
  for (VertexId i = 0; i < addresses.size(); ++i) index.emplace(addresses[i], i);

  std::vector<LabelDescriptor> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || (line_no == 1 && line.rfind("src,", 0) == 0)) continue;
    std::stringstream ss(line);
    std::string src, dst, label;
    if (!std::getline(ss, src, ',') || !std::getline(ss, dst, ',') || !std::getline(ss, label)) {
      throw IoError(path.string() + ":" + std::to_string(line_no) + ": expected src,dst,label");
    }
    const auto s = index.find(src);
    if (s == index.end()) throw UnknownAddressError(src);
    const auto d = index.find(dst);
    if (d == index.end()) throw UnknownAddressError(dst);
    if (label != "0" && label != "1") {
      throw IoError(path.string() + ":" + std::to_string(line_no) + ": label must be 0 or 1");
    }
    out.push_back({s->second, d->second, label == "1"});
  }
  return out;
}

}  // namespace flowdep
