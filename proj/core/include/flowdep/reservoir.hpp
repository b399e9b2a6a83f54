#pragma once

#include <cstddef>
#include <random>
#include <utility>
#include <vector>

#include "flowdep/rng.hpp"

namespace flowdep {

/// Fixed-capacity uniform reservoir (Vitter's algorithm R). After `seen()`
/// offers every offered item is held with probability capacity / seen.
template <typename T>
class Reservoir {
 public:
  Reservoir(std::size_t capacity, std::uint64_t seed) : capacity_(capacity), rng_(seed) {
    items_.reserve(capacity_);
  }

  void offer(T item) {
    if (items_.size() < capacity_) {
      items_.push_back(std::move(item));
    } else {
      std::uniform_int_distribution<std::size_t> pick(0, seen_);
      const auto slot = pick(rng_);
      if (slot < capacity_) items_[slot] = std::move(item);
    }
    ++seen_;
  }

  std::size_t capacity() const noexcept { return capacity_; }
  std::size_t seen() const noexcept { return seen_; }
  const std::vector<T>& items() const noexcept { return items_; }
  std::vector<T> release() && { return std::move(items_); }

 private:
  std::size_t capacity_;
  std::size_t seen_ = 0;
  Rng rng_;
  std::vector<T> items_;
};

}  // namespace flowdep
