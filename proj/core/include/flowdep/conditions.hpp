#pragma once

#include <concepts>
#include <cstdint>
#include <initializer_list>
#include <span>
#include <string_view>

#include "flowdep/flow.hpp"
#include "flowdep/graph.hpp"

namespace flowdep {

/// Anything carrying flow timestamps and transport ports (FlowRecord, Edge).
template <typename T>
concept TimedFlow = requires(const T& f) {
  { f.t_start } -> std::convertible_to<Millis>;
  { f.t_end } -> std::convertible_to<Millis>;
  { f.src_port } -> std::convertible_to<std::uint16_t>;
  { f.dst_port } -> std::convertible_to<std::uint16_t>;
};

/// Opening of a local-remote dependency: `next` on (v[i+1], v[i+2]) lies
/// inside `prev` on (v[i], v[i+1]).
template <TimedFlow A, TimedFlow B>
constexpr bool lr_open(const A& prev, const B& next) noexcept {
  return prev.t_start <= next.t_start && next.t_start <= next.t_end &&
         next.t_end <= prev.t_end;
}

/// Timestamp part of the local-remote return: `prev` lies inside `next`.
template <TimedFlow A, TimedFlow B>
constexpr bool lr_return_timing(const A& prev, const B& next) noexcept {
  return next.t_start <= prev.t_start && prev.t_start <= prev.t_end &&
         prev.t_end <= next.t_end;
}

/// Existential part of the local-remote return. `prefix` is the walk up to
/// and including the current vertex v[i+1]; v[i] is prefix[size - 2]. True if
/// some j != i has prefix[j] == candidate and prefix[j + 1] == v[i+1].
bool forward_direction_seen(std::span<const VertexId> prefix, VertexId candidate) noexcept;

/// Full local-remote return condition for candidate v[i+2].
template <TimedFlow A, TimedFlow B>
bool lr_return(const A& prev, const B& next, std::span<const VertexId> prefix,
               VertexId candidate) noexcept {
  return lr_return_timing(prev, next) && forward_direction_seen(prefix, candidate);
}

/// Opening of a remote-remote dependency. Both flows leave v[i]: `prev` goes
/// to v[i+1], `next` to v[i+2]; `next` starts within epsilon after `prev` ends.
template <TimedFlow A, TimedFlow B>
constexpr bool rr_open(const A& prev, const B& next, Millis epsilon) noexcept {
  return prev.t_end <= next.t_start && next.t_start - prev.t_end <= epsilon;
}

/// Return over the reverse flow: ports mirrored, reverse starts no earlier,
/// ends within epsilon of each other.
template <TimedFlow A, TimedFlow B>
constexpr bool rev_return(const A& fwd, const B& rev, Millis epsilon) noexcept {
  const Millis end_gap = fwd.t_end >= rev.t_end ? fwd.t_end - rev.t_end : rev.t_end - fwd.t_end;
  return fwd.src_port == rev.dst_port && fwd.dst_port == rev.src_port &&
         fwd.t_start <= rev.t_start && end_gap <= epsilon;
}

enum class Condition : std::uint8_t {
  LrOpen = 0,
  LrReturn = 1,
  RrOpen = 2,
  RevReturn = 3,
  FallbackThreshold = 4,
  FallbackAny = 5,
};

inline constexpr Condition kAllConditions[] = {
    Condition::LrOpen,    Condition::LrReturn,          Condition::RrOpen,
    Condition::RevReturn, Condition::FallbackThreshold, Condition::FallbackAny};

std::string_view to_string(Condition c) noexcept;
/// Throws std::invalid_argument.
Condition parse_condition(std::string_view text);

/// Small bit set of condition ids.
class ConditionSet {
 public:
  constexpr ConditionSet() = default;
  constexpr ConditionSet(std::initializer_list<Condition> list) {
    for (auto c : list) insert(c);
  }

  constexpr void insert(Condition c) noexcept { bits_ |= bit(c); }
  constexpr bool contains(Condition c) const noexcept { return (bits_ & bit(c)) != 0; }
  constexpr bool empty() const noexcept { return bits_ == 0; }
  constexpr std::uint8_t bits() const noexcept { return bits_; }
  /// True if any of the four timestamp conditions is present.
  constexpr bool any_timed() const noexcept { return (bits_ & 0x0f) != 0; }

  friend constexpr bool operator==(ConditionSet, ConditionSet) = default;

 private:
  static constexpr std::uint8_t bit(Condition c) noexcept {
    return static_cast<std::uint8_t>(1u << static_cast<unsigned>(c));
  }
  std::uint8_t bits_ = 0;
};

}  // namespace flowdep
