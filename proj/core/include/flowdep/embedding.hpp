#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <unordered_map>
#include <vector>

#include "flowdep/context.hpp"
#include "flowdep/flow.hpp"
#include "flowdep/graph.hpp"

namespace flowdep {

struct EmbeddingConfig {
  std::size_t dims = 64;
  std::size_t epochs = 5;
  double learning_rate = 0.01;
  /// Extra uniformly drawn negative contexts per positive pair, per epoch.
  std::size_t neg_samples_per_positive = 1;
  std::uint64_t rng_seed = 0;
  /// Hogwild-style sharding of head batches; results are not reproducible.
  bool parallel = false;
  unsigned threads = 0;

  void validate() const;
};

/// Dense row-major matrix of doubles.
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double value = 0.0)
      : rows_(rows), cols_(cols), data_(rows * cols, value) {}

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  std::span<double> row(std::size_t r) { return {data_.data() + r * cols_, cols_}; }
  std::span<const double> row(std::size_t r) const { return {data_.data() + r * cols_, cols_}; }
  std::span<double> data() noexcept { return data_; }
  std::span<const double> data() const noexcept { return data_; }

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

/// Target (published) and context matrices of the two-matrix skip-gram model.
struct SkipGramParams {
  Matrix target;
  Matrix context;
};

struct TrainingPair {
  VertexId head = 0;
  VertexId context = 0;
  bool positive = true;
};

/// Logistic function with the argument clamped to [-30, 30].
double sigmoid(double x) noexcept;

/// Sum over pairs of -log sigma(u_h . v_c) (positive) or -log sigma(-u_h . v_c).
double skipgram_loss(const SkipGramParams& params, std::span<const TrainingPair> pairs);

/// Analytic gradient of skipgram_loss with respect to both matrices.
SkipGramParams skipgram_gradient(const SkipGramParams& params,
                                 std::span<const TrainingPair> pairs);

/// Published vertex embedding: one float row per address.
class EmbeddingMatrix {
 public:
  EmbeddingMatrix() = default;
  EmbeddingMatrix(std::vector<Address> addresses, std::size_t dims, std::vector<float> values);

  std::size_t dims() const noexcept { return dims_; }
  std::size_t size() const noexcept { return addresses_.size(); }
  std::span<const Address> addresses() const noexcept { return addresses_; }
  std::span<const float> row(VertexId v) const;
  std::span<const float> values() const noexcept { return values_; }
  /// Throws UnknownAddressError.
  VertexId index_of(const Address& address) const;

  friend bool operator==(const EmbeddingMatrix& a, const EmbeddingMatrix& b) {
    return a.dims_ == b.dims_ && a.addresses_ == b.addresses_ && a.values_ == b.values_;
  }

 private:
  std::vector<Address> addresses_;
  std::unordered_map<Address, VertexId> index_;
  std::size_t dims_ = 0;
  std::vector<float> values_;
};

struct EmbeddingResult {
  EmbeddingMatrix embedding;
  SkipGramParams params;
  std::vector<double> epoch_losses;  // mean pair loss per epoch
};

/// Skip-gram with negative sampling trained by SGD. Pairs sharing a head
/// vertex form one batch whose gradient is applied at once; batch order is
/// reshuffled each epoch. Throws TrainingError on a non-finite loss.
EmbeddingResult train_embedding(std::span<const CandidateDependency> positives,
                                std::span<const CandidateDependency> negatives,
                                std::span<const Address> vertices, const EmbeddingConfig& cfg);

/// Element-wise product of the two vertex rows (commutative).
std::vector<float> dependency_vector(const EmbeddingMatrix& emb, VertexId src, VertexId dst);
std::vector<float> dependency_vector(const EmbeddingMatrix& emb, const Address& src,
                                     const Address& dst);

/// Binary layout (little endian): magic "FDEMB001", u32 dims, u32 count,
/// count x (u16 length, address bytes), count x dims float32 row-major.
void write_embedding(const std::filesystem::path& path, const EmbeddingMatrix& emb);
EmbeddingMatrix read_embedding(const std::filesystem::path& path);

/// JSON manifest next to the binary dump.
void write_embedding_manifest(const std::filesystem::path& path, const EmbeddingMatrix& emb,
                              std::span<const double> epoch_losses,
                              const EmbeddingConfig& cfg);

}  // namespace flowdep
