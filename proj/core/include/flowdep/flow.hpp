#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace flowdep {

/// IP addresses are opaque, comparable keys (IPv4 or IPv6 text form).
using Address = std::string;

/// Milliseconds since the Unix epoch.
using Millis = std::int64_t;

enum class Protocol : std::uint8_t { Tcp, Udp, Other };

std::string_view to_string(Protocol proto) noexcept;

/// Accepts names (TCP, udp, ...) and IANA numbers (6, 17). Anything else is
/// Protocol::Other.
Protocol parse_protocol(std::string_view text) noexcept;

/// One unidirectional IP flow.
struct FlowRecord {
  Millis t_start = 0;
  Millis t_end = 0;
  Address src_ip;
  Address dst_ip;
  std::uint16_t src_port = 0;
  std::uint16_t dst_port = 0;
  Protocol proto = Protocol::Tcp;

  friend bool operator==(const FlowRecord&, const FlowRecord&) = default;
};

/// A forward/reverse pair of flows of one connection. Counts are carried for
/// completeness and never used downstream.
struct BiflowRecord {
  Millis t_start = 0;
  Millis t_end = 0;
  Address src_ip;
  Address dst_ip;
  std::uint16_t src_port = 0;
  std::uint16_t dst_port = 0;
  Protocol proto = Protocol::Tcp;
  std::optional<std::uint64_t> fwd_bytes;
  std::optional<std::uint64_t> rev_bytes;
  std::optional<std::uint64_t> fwd_packets;
  std::optional<std::uint64_t> rev_packets;
};

enum class FlowFormat { Csv, Jsonl };

enum class SplitMode { SameTimestamps, DistinctTimestamps };

struct LineError {
  std::size_t line = 0;  // 1-based
  std::string message;
};

struct ParseReport {
  std::vector<FlowRecord> flows;
  std::vector<LineError> errors;
  std::size_t self_loops_dropped = 0;
};

struct BiflowParseReport {
  std::vector<BiflowRecord> biflows;
  std::vector<LineError> errors;
  std::size_t self_loops_dropped = 0;
};

/// CSV header of the canonical flow file.
inline constexpr std::string_view kFlowCsvHeader =
    "t_start,t_end,src_ip,dst_ip,src_port,dst_port,proto";

/// Parses flows line by line. CSV columns are fixed to
/// (t_start, t_end, src_ip, dst_ip, src_port, dst_port, proto) and the header
/// is optional; JSONL objects use the same field names. Timestamps are integer
/// milliseconds or RFC3339 strings. Bad lines are reported and skipped;
/// self-loops are dropped silently (counted).
ParseReport parse_flows(std::istream& source, FlowFormat format);

/// As parse_flows, reading from a file. Throws IoError if it cannot be opened.
ParseReport read_flow_file(const std::filesystem::path& path, FlowFormat format);

/// Biflow input: the seven flow columns optionally followed by
/// fwd_bytes, rev_bytes, fwd_packets, rev_packets.
BiflowParseReport parse_biflows(std::istream& source, FlowFormat format);

/// Forward keeps the 5-tuple, reverse swaps addresses and ports. In
/// DistinctTimestamps mode the reverse flow starts 1 ms after the forward one
/// (clamped to t_end).
std::pair<FlowRecord, FlowRecord> biflow_to_uniflows(const BiflowRecord& biflow,
                                                     SplitMode mode);

std::vector<FlowRecord> filter_tcp_udp(std::span<const FlowRecord> flows);

std::string format_flow_csv(const FlowRecord& flow);
void write_flows_csv(std::ostream& out, std::span<const FlowRecord> flows,
                     bool header = true);
void write_flow_file(const std::filesystem::path& path,
                     std::span<const FlowRecord> flows);

/// Integer milliseconds, or RFC3339 ("2023-02-01T10:00:00.250Z",
/// "...+01:00"). Throws std::invalid_argument.
Millis parse_timestamp(std::string_view text);

/// True for textual IPv4 or IPv6 addresses.
bool is_valid_address(std::string_view text);

}  // namespace flowdep
