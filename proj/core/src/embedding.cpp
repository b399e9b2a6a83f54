#include "flowdep/embedding.hpp"

#include <algorithm>
#include <atomic>
#include <bit>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "flowdep/error.hpp"
#include "flowdep/rng.hpp"

namespace flowdep {
namespace {

constexpr double kClamp = 30.0;
constexpr char kMagic[8] = {'F', 'D', 'E', 'M', 'B', '0', '0', '1'};

double clamp_score(double s) noexcept { return std::clamp(s, -kClamp, kClamp); }

// -log sigma(s) for positives, -log sigma(-s) for negatives.
double pair_loss(double score, bool positive) noexcept {
  const double x = clamp_score(positive ? score : -score);
  return std::log1p(std::exp(-x));
}

template <bool Atomic>
double load(const double& x) noexcept {
  if constexpr (Atomic) {
    return std::atomic_ref<double>(const_cast<double&>(x)).load(std::memory_order_relaxed);
  } else {
    return x;
  }
}

template <bool Atomic>
void add(double& x, double delta) noexcept {
  if constexpr (Atomic) {
    std::atomic_ref<double> ref(x);
    ref.store(ref.load(std::memory_order_relaxed) + delta, std::memory_order_relaxed);
  } else {
    x += delta;
  }
}

struct BatchItem {
  VertexId context;
  bool positive;
};

// One simultaneous SGD step on all pairs of a head batch. Gradients are taken
// at the parameters as they were when the batch started. Returns summed loss.
template <bool Atomic>
double train_batch(SkipGramParams& params, VertexId head, std::span<const BatchItem> items,
                   double lr, std::vector<double>& head_grad, std::vector<double>& ctx_grad,
                   std::vector<double>& u) {
  const auto dims = params.target.cols();
  auto target = params.target.row(head);
  for (std::size_t d = 0; d < dims; ++d) u[d] = load<Atomic>(target[d]);
  std::fill(head_grad.begin(), head_grad.end(), 0.0);
  ctx_grad.assign(items.size() * dims, 0.0);

  double loss = 0.0;
  for (std::size_t k = 0; k < items.size(); ++k) {
    const auto v = params.context.row(items[k].context);
    double score = 0.0;
    for (std::size_t d = 0; d < dims; ++d) score += u[d] * load<Atomic>(v[d]);
    loss += pair_loss(score, items[k].positive);
    const double g = sigmoid(score) - (items[k].positive ? 1.0 : 0.0);
    for (std::size_t d = 0; d < dims; ++d) {
      head_grad[d] += g * load<Atomic>(v[d]);
      ctx_grad[k * dims + d] = g * u[d];
    }
  }
  for (std::size_t k = 0; k < items.size(); ++k) {
    auto v = params.context.row(items[k].context);
    for (std::size_t d = 0; d < dims; ++d) add<Atomic>(v[d], -lr * ctx_grad[k * dims + d]);
  }
  for (std::size_t d = 0; d < dims; ++d) add<Atomic>(target[d], -lr * head_grad[d]);
  return loss;
}

void put_u32(std::ostream& out, std::uint32_t v) {
  const char bytes[4] = {static_cast<char>(v & 0xff), static_cast<char>((v >> 8) & 0xff),
                         static_cast<char>((v >> 16) & 0xff),
                         static_cast<char>((v >> 24) & 0xff)};
  out.write(bytes, 4);
}

std::uint32_t get_u32(std::istream& in) {
  unsigned char b[4];
  if (!in.read(reinterpret_cast<char*>(b), 4)) throw IoError("truncated embedding file");
  return std::uint32_t{b[0]} | (std::uint32_t{b[1]} << 8) | (std::uint32_t{b[2]} << 16) |
         (std::uint32_t{b[3]} << 24);
}

}  // namespace

void EmbeddingConfig::validate() const {
  std::vector<std::string> problems;
  if (dims < 1) problems.emplace_back("embedding.dims must be >= 1");
  if (epochs < 1) problems.emplace_back("embedding.epochs must be >= 1");
  if (!(learning_rate > 0.0)) problems.emplace_back("embedding.learning_rate must be > 0");
  if (!problems.empty()) {
    std::string msg;
    for (const auto& p : problems) msg += (msg.empty() ? "" : "; ") + p;
    throw ConfigError(msg);
  }
}

double sigmoid(double x) noexcept { return 1.0 / (1.0 + std::exp(-clamp_score(x))); }

double skipgram_loss(const SkipGramParams& params, std::span<const TrainingPair> pairs) {
  double loss = 0.0;
  for (const auto& p : pairs) {
    const auto u = params.target.row(p.head);
    const auto v = params.context.row(p.context);
    loss += pair_loss(std::inner_product(u.begin(), u.end(), v.begin(), 0.0), p.positive);
  }
  return loss;
}

SkipGramParams skipgram_gradient(const SkipGramParams& params,
                                 std::span<const TrainingPair> pairs) {
  SkipGramParams grad{Matrix(params.target.rows(), params.target.cols()),
                      Matrix(params.context.rows(), params.context.cols())};
  for (const auto& p : pairs) {
    const auto u = params.target.row(p.head);
    const auto v = params.context.row(p.context);
    const double score = std::inner_product(u.begin(), u.end(), v.begin(), 0.0);
    const double g = sigmoid(score) - (p.positive ? 1.0 : 0.0);
    auto gu = grad.target.row(p.head);
    auto gv = grad.context.row(p.context);
    for (std::size_t d = 0; d < u.size(); ++d) {
      gu[d] += g * v[d];
      gv[d] += g * u[d];
    }
  }
  return grad;
}

EmbeddingMatrix::EmbeddingMatrix(std::vector<Address> addresses, std::size_t dims,
                                 std::vector<float> values)
    : addresses_(std::move(addresses)), dims_(dims), values_(std::move(values)) {
  if (values_.size() != addresses_.size() * dims_) {
    throw Error("embedding value count does not match addresses x dims");
  }
  for (std::size_t i = 0; i < addresses_.size(); ++i) {
    index_.emplace(addresses_[i], static_cast<VertexId>(i));
  }
}

std::span<const float> EmbeddingMatrix::row(VertexId v) const {
  if (v >= addresses_.size()) throw Error("embedding row out of range");
  return {values_.data() + std::size_t{v} * dims_, dims_};
}

VertexId EmbeddingMatrix::index_of(const Address& address) const {
  const auto it = index_.find(address);
  if (it == index_.end()) throw UnknownAddressError(address);
  return it->second;
}

EmbeddingResult train_embedding(std::span<const CandidateDependency> positives,
                                std::span<const CandidateDependency> negatives,
                                std::span<const Address> vertices, const EmbeddingConfig& cfg) {
  cfg.validate();
  const auto n = vertices.size();
  const auto dims = cfg.dims;
  for (const auto* set : {&positives, &negatives}) {
    for (const auto& p : *set) {
      if (p.first >= n || p.second >= n) throw ConfigError("training pair references unknown vertex");
    }
  }

  Rng rng(cfg.rng_seed);
  EmbeddingResult result;
  result.params = {Matrix(n, dims), Matrix(n, dims)};
  const double bound = 0.5 / static_cast<double>(dims);
  std::uniform_real_distribution<double> init(-bound, bound);
  for (auto& x : result.params.target.data()) x = init(rng);
  for (auto& x : result.params.context.data()) x = init(rng);

  // Fixed part of each head's batch; sampled negatives are appended per epoch.
  std::vector<std::vector<BatchItem>> fixed(n);
  std::vector<std::size_t> positive_count(n, 0);
  for (const auto& p : positives) {
    fixed[p.first].push_back({p.second, true});
    ++positive_count[p.first];
  }
  for (const auto& p : negatives) fixed[p.first].push_back({p.second, false});

  std::vector<VertexId> heads;
  for (VertexId v = 0; v < n; ++v) {
    if (!fixed[v].empty()) heads.push_back(v);
  }

  for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
    std::shuffle(heads.begin(), heads.end(), rng);
    std::vector<std::vector<BatchItem>> batches(heads.size());
    std::size_t pair_total = 0;
    for (std::size_t b = 0; b < heads.size(); ++b) {
      const auto h = heads[b];
      auto& batch = batches[b];
      batch = fixed[h];
      if (n >= 2) {
        for (std::size_t k = 0; k < positive_count[h] * cfg.neg_samples_per_positive; ++k) {
          auto c = static_cast<VertexId>(uniform_index(rng, n - 1));
          if (c >= h) ++c;
          batch.push_back({c, false});
        }
      }
      pair_total += batch.size();
    }

    double epoch_loss = 0.0;
    if (!cfg.parallel) {
      std::vector<double> head_grad(dims), ctx_grad, u(dims);
      for (std::size_t b = 0; b < heads.size(); ++b) {
        epoch_loss += train_batch<false>(result.params, heads[b], batches[b],
                                         cfg.learning_rate, head_grad, ctx_grad, u);
      }
    } else {
      unsigned workers = cfg.threads == 0 ? std::thread::hardware_concurrency() : cfg.threads;
      workers = std::max(1u, workers);
      std::vector<double> partial(workers, 0.0);
      {
        std::vector<std::jthread> pool;
        for (unsigned w = 0; w < workers; ++w) {
          pool.emplace_back([&, w] {
            std::vector<double> head_grad(dims), ctx_grad, u(dims);
            for (std::size_t b = w; b < heads.size(); b += workers) {
              partial[w] += train_batch<true>(result.params, heads[b], batches[b],
                                              cfg.learning_rate, head_grad, ctx_grad, u);
            }
          });
        }
      }
      epoch_loss = std::accumulate(partial.begin(), partial.end(), 0.0);
    }
    const double mean = pair_total ? epoch_loss / static_cast<double>(pair_total) : 0.0;
    if (!std::isfinite(mean)) {
      std::ostringstream msg;
      msg << "embedding training diverged in epoch " << epoch + 1 << " (learning rate "
          << cfg.learning_rate << ")";
      throw TrainingError(msg.str());
    }
    result.epoch_losses.push_back(mean);
  }

  std::vector<float> values(n * dims);
  const auto target = result.params.target.data();
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (!std::isfinite(target[i])) {
      throw TrainingError("non-finite embedding value (learning rate " +
                          std::to_string(cfg.learning_rate) + ")");
    }
    values[i] = static_cast<float>(target[i]);
  }
  result.embedding =
      EmbeddingMatrix(std::vector<Address>(vertices.begin(), vertices.end()), dims, std::move(values));
  return result;
}

std::vector<float> dependency_vector(const EmbeddingMatrix& emb, VertexId src, VertexId dst) {
  const auto a = emb.row(src);
  const auto b = emb.row(dst);
  std::vector<float> out(a.size());
  std::transform(a.begin(), a.end(), b.begin(), out.begin(), std::multiplies<>{});
  return out;
}

std::vector<float> dependency_vector(const EmbeddingMatrix& emb, const Address& src,
                                     const Address& dst) {
  return dependency_vector(emb, emb.index_of(src), emb.index_of(dst));
}

void write_embedding(const std::filesystem::path& path, const EmbeddingMatrix& emb) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write embedding file: " + path.string());
  out.write(kMagic, sizeof kMagic);
  put_u32(out, static_cast<std::uint32_t>(emb.dims()));
  put_u32(out, static_cast<std::uint32_t>(emb.size()));
  for (const auto& a : emb.addresses()) {
    const auto len = static_cast<std::uint16_t>(a.size());
    const char bytes[2] = {static_cast<char>(len & 0xff), static_cast<char>(len >> 8)};
    out.write(bytes, 2);
    out.write(a.data(), static_cast<std::streamsize>(a.size()));
  }
  for (const float x : emb.values()) put_u32(out, std::bit_cast<std::uint32_t>(x));
  if (!out) throw IoError("write failed: " + path.string());
}

EmbeddingMatrix read_embedding(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open embedding file: " + path.string());
  char magic[8];
  if (!in.read(magic, 8) || !std::equal(magic, magic + 8, kMagic)) {
    throw IoError("not an embedding file: " + path.string());
  }
  const auto dims = get_u32(in);
  const auto count = get_u32(in);
  std::vector<Address> addresses;
  addresses.reserve(count);
  for (std::uint32_t i = 0; i < count; ++i) {
    unsigned char len[2];
    if (!in.read(reinterpret_cast<char*>(len), 2)) throw IoError("truncated embedding file");
    Address a(std::size_t{len[0]} | (std::size_t{len[1]} << 8), '\0');
    if (!in.read(a.data(), static_cast<std::streamsize>(a.size()))) {
      throw IoError("truncated embedding file");
    }
    addresses.push_back(std::move(a));
  }
  std::vector<float> values(std::size_t{count} * dims);
  for (auto& x : values) x = std::bit_cast<float>(get_u32(in));
  return EmbeddingMatrix(std::move(addresses), dims, std::move(values));
}

void write_embedding_manifest(const std::filesystem::path& path, const EmbeddingMatrix& emb,
                              std::span<const double> epoch_losses,
                              const EmbeddingConfig& cfg) {
  nlohmann::json manifest{
      {"format", "flowdep-embedding"},
      {"version", 1},
      {"dims", emb.dims()},
      {"vertices", emb.size()},
      {"addresses", std::vector<Address>(emb.addresses().begin(), emb.addresses().end())},
      {"epochs", cfg.epochs},
      {"learning_rate", cfg.learning_rate},
      {"neg_samples_per_positive", cfg.neg_samples_per_positive},
      {"epoch_losses", std::vector<double>(epoch_losses.begin(), epoch_losses.end())}};
  std::ofstream out(path);
  if (!out) throw IoError("cannot write embedding manifest: " + path.string());
  out << manifest.dump(2) << '\n';
}

}  // namespace flowdep
