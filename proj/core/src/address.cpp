#include "flowdep/address.hpp"

#include <arpa/inet.h>

#include <charconv>

#include "flowdep/error.hpp"

namespace flowdep {
namespace {

// Returns the number of significant bytes (4 or 16), 0 if unparsable.
int to_bytes(const std::string& text, std::array<std::uint8_t, 16>& out) {
  out.fill(0);
  if (inet_pton(AF_INET, text.c_str(), out.data()) == 1) return 4;
  if (inet_pton(AF_INET6, text.c_str(), out.data()) == 1) return 16;
  return 0;
}

bool prefix_equal(const std::array<std::uint8_t, 16>& a,
                  const std::array<std::uint8_t, 16>& b, unsigned bits) {
  unsigned full = bits / 8;
  for (unsigned i = 0; i < full; ++i) {
    if (a[i] != b[i]) return false;
  }
  const unsigned rest = bits % 8;
  if (rest == 0) return true;
  const auto mask = static_cast<std::uint8_t>(0xff << (8 - rest));
  return (a[full] & mask) == (b[full] & mask);
}

}  // namespace

CidrPrefix CidrPrefix::parse(std::string_view text) {
  const auto slash = text.find('/');
  if (slash == std::string_view::npos) {
    throw ConfigError("CIDR prefix without length: " + std::string(text));
  }
  CidrPrefix prefix;
  prefix.text_ = std::string(text);
  const int width = to_bytes(std::string(text.substr(0, slash)), prefix.bytes_);
  if (width == 0) throw ConfigError("malformed CIDR address: " + std::string(text));
  prefix.v6_ = width == 16;
  const auto len = text.substr(slash + 1);
  const auto [ptr, ec] = std::from_chars(len.data(), len.data() + len.size(), prefix.length_);
  if (ec != std::errc{} || ptr != len.data() + len.size() || len.empty() ||
      prefix.length_ > static_cast<unsigned>(width * 8)) {
    throw ConfigError("malformed CIDR length: " + std::string(text));
  }
  return prefix;
}

bool CidrPrefix::contains(std::string_view address) const {
  std::array<std::uint8_t, 16> bytes{};
  const int width = to_bytes(std::string(address), bytes);
  if (width == 0 || (width == 16) != v6_) return false;
  return prefix_equal(bytes, bytes_, length_);
}

}  // namespace flowdep
