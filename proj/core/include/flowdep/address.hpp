#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <string_view>

#include "flowdep/flow.hpp"

namespace flowdep {

/// An IPv4 or IPv6 network prefix, e.g. "147.251.0.0/16".
class CidrPrefix {
 public:
  /// Throws ConfigError on malformed text.
  static CidrPrefix parse(std::string_view text);

  /// False for addresses of the other family or unparsable text.
  bool contains(std::string_view address) const;

  const std::string& text() const noexcept { return text_; }

 private:
  std::string text_;
  bool v6_ = false;
  std::array<std::uint8_t, 16> bytes_{};
  unsigned length_ = 0;
};

}  // namespace flowdep
