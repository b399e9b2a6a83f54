#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace flowdep {

using Rng = std::mt19937_64;

/// SplitMix64 finalizer. Used to decorrelate derived seeds.
std::uint64_t mix64(std::uint64_t x) noexcept;

/// Seed for an independent stream keyed by an integer (vertex, tree, split...).
std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream) noexcept;

/// Seed for a named module: mix64(master ^ fnv1a64(name)).
std::uint64_t derive_seed(std::uint64_t master, std::string_view name) noexcept;

/// Uniform index in [0, n). n must be positive.
std::size_t uniform_index(Rng& rng, std::size_t n);

}  // namespace flowdep
