#include "flowdep/flow.hpp"

#include <arpa/inet.h>

#include <algorithm>
#include <cctype>
#include <charconv>
#include <chrono>
#include <fstream>
#include <istream>
#include <ostream>
#include <stdexcept>

#include <json.hpp>

#include "flowdep/error.hpp"

namespace flowdep {
namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r'))
    s.remove_suffix(1);
  return s;
}

std::vector<std::string_view> split_csv(std::string_view line) {
  std::vector<std::string_view> fields;
  std::size_t start = 0;
  while (true) {
    const auto comma = line.find(',', start);
    if (comma == std::string_view::npos) {
      fields.push_back(trim(line.substr(start)));
      break;
    }
    fields.push_back(trim(line.substr(start, comma - start)));
    start = comma + 1;
  }
  return fields;
}

template <typename T>
T parse_integer(std::string_view text, const char* what) {
  T value{};
  const auto* end = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(text.data(), end, value);
  if (ec != std::errc{} || ptr != end || text.empty()) {
    throw std::invalid_argument(std::string("malformed ") + what + " '" +
                                std::string(text) + "'");
  }
  return value;
}

std::uint16_t parse_port(std::string_view text) {
  return parse_integer<std::uint16_t>(text, "port");
}

int two_digits(std::string_view s, std::size_t pos) {
  if (pos + 2 > s.size() || !std::isdigit(static_cast<unsigned char>(s[pos])) ||
      !std::isdigit(static_cast<unsigned char>(s[pos + 1]))) {
    throw std::invalid_argument("malformed timestamp '" + std::string(s) + "'");
  }
  return (s[pos] - '0') * 10 + (s[pos + 1] - '0');
}

Millis parse_rfc3339(std::string_view s) {
  // YYYY-MM-DDTHH:MM:SS[.frac](Z|+HH:MM|-HH:MM)
  const auto bad = [&] {
    return std::invalid_argument("malformed timestamp '" + std::string(s) + "'");
  };
  if (s.size() < 20 || s[4] != '-' || s[7] != '-' ||
      (s[10] != 'T' && s[10] != 't' && s[10] != ' ') || s[13] != ':' ||
      s[16] != ':') {
    throw bad();
  }
  const int year = parse_integer<int>(s.substr(0, 4), "timestamp");
  const int month = two_digits(s, 5);
  const int day = two_digits(s, 8);
  const int hour = two_digits(s, 11);
  const int minute = two_digits(s, 14);
  const int second = two_digits(s, 17);
  std::size_t pos = 19;
  Millis millis = 0;
  if (pos < s.size() && s[pos] == '.') {
    ++pos;
    int digits = 0;
    while (pos < s.size() && std::isdigit(static_cast<unsigned char>(s[pos]))) {
      if (digits < 3) millis = millis * 10 + (s[pos] - '0');
      ++digits;
      ++pos;
    }
    if (digits == 0) throw bad();
    for (int d = digits; d < 3; ++d) millis *= 10;
  }
  if (pos >= s.size()) throw bad();
  Millis offset_minutes = 0;
  if (s[pos] == 'Z' || s[pos] == 'z') {
    ++pos;
  } else if (s[pos] == '+' || s[pos] == '-') {
    const int sign = s[pos] == '+' ? 1 : -1;
    if (pos + 6 != s.size() || s[pos + 3] != ':') throw bad();
    offset_minutes = sign * (two_digits(s, pos + 1) * 60 + two_digits(s, pos + 4));
    pos += 6;
  } else {
    throw bad();
  }
  if (pos != s.size()) throw bad();

  using namespace std::chrono;
  const year_month_day ymd{std::chrono::year{year},
                           std::chrono::month{static_cast<unsigned>(month)},
                           std::chrono::day{static_cast<unsigned>(day)}};
  if (!ymd.ok() || hour > 23 || minute > 59 || second > 60) throw bad();
  const auto days = sys_days{ymd}.time_since_epoch();
  const Millis base = duration_cast<milliseconds>(days).count();
  return base + ((hour * 60 + minute) * 60 + second) * Millis{1000} + millis -
         offset_minutes * 60 * 1000;
}

FlowRecord flow_from_fields(std::span<const std::string_view> f) {
  FlowRecord flow;
  flow.t_start = parse_timestamp(f[0]);
  flow.t_end = parse_timestamp(f[1]);
  flow.src_ip = std::string(f[2]);
  flow.dst_ip = std::string(f[3]);
  flow.src_port = parse_port(f[4]);
  flow.dst_port = parse_port(f[5]);
  if (f[6].empty()) throw std::invalid_argument("empty protocol");
  flow.proto = parse_protocol(f[6]);
  return flow;
}

void validate(const FlowRecord& flow) {
  if (!is_valid_address(flow.src_ip)) {
    throw std::invalid_argument("malformed address '" + flow.src_ip + "'");
  }
  if (!is_valid_address(flow.dst_ip)) {
    throw std::invalid_argument("malformed address '" + flow.dst_ip + "'");
  }
  if (flow.t_end < flow.t_start) {
    throw std::invalid_argument("t_end precedes t_start");
  }
}

Millis json_timestamp(const nlohmann::json& value) {
  if (value.is_number_integer()) return value.get<Millis>();
  if (value.is_string()) return parse_timestamp(value.get<std::string>());
  throw std::invalid_argument("malformed timestamp");
}

std::uint16_t json_port(const nlohmann::json& value) {
  if (!value.is_number_integer()) throw std::invalid_argument("malformed port");
  const auto v = value.get<std::int64_t>();
  if (v < 0 || v > 65535) throw std::invalid_argument("port out of range");
  return static_cast<std::uint16_t>(v);
}

Protocol json_protocol(const nlohmann::json& value) {
  if (value.is_string()) return parse_protocol(value.get<std::string>());
  if (value.is_number_integer()) return parse_protocol(std::to_string(value.get<int>()));
  throw std::invalid_argument("malformed protocol");
}

FlowRecord flow_from_json(const nlohmann::json& obj) {
  if (!obj.is_object()) throw std::invalid_argument("line is not a JSON object");
  FlowRecord flow;
  flow.t_start = json_timestamp(obj.at("t_start"));
  flow.t_end = json_timestamp(obj.at("t_end"));
  flow.src_ip = obj.at("src_ip").get<std::string>();
  flow.dst_ip = obj.at("dst_ip").get<std::string>();
  flow.src_port = json_port(obj.at("src_port"));
  flow.dst_port = json_port(obj.at("dst_port"));
  flow.proto = json_protocol(obj.at("proto"));
  return flow;
}

bool is_header(std::string_view line) {
  return trim(line).substr(0, 7) == "t_start";
}

// Shared line loop: calls `handle(line_view)` for data lines and collects
// recoverable errors with 1-based line numbers.
template <typename Handle>
std::vector<LineError> for_each_line(std::istream& source, FlowFormat format,
                                     Handle&& handle) {
  std::vector<LineError> errors;
  std::string line;
  std::size_t number = 0;
  while (std::getline(source, line)) {
    ++number;
    const auto view = trim(line);
    if (view.empty()) continue;
    if (number == 1 && format == FlowFormat::Csv && is_header(view)) continue;
    try {
      handle(view);
    } catch (const nlohmann::json::exception& e) {
      errors.push_back({number, e.what()});
    } catch (const std::invalid_argument& e) {
      errors.push_back({number, e.what()});
    } catch (const std::out_of_range& e) {
      errors.push_back({number, e.what()});
    }
  }
  if (source.bad()) throw IoError("read error while parsing flows");
  return errors;
}

std::optional<std::uint64_t> optional_count(std::span<const std::string_view> f,
                                            std::size_t i) {
  if (i >= f.size() || f[i].empty()) return std::nullopt;
  return parse_integer<std::uint64_t>(f[i], "count");
}

}  // namespace

std::string_view to_string(Protocol proto) noexcept {
  switch (proto) {
    case Protocol::Tcp:
      return "TCP";
    case Protocol::Udp:
      return "UDP";
    case Protocol::Other:
      break;
  }
  return "OTHER";
}

Protocol parse_protocol(std::string_view text) noexcept {
  std::string upper(text);
  std::transform(upper.begin(), upper.end(), upper.begin(),
                 [](unsigned char c) { return static_cast<char>(std::toupper(c)); });
  if (upper == "TCP" || upper == "6") return Protocol::Tcp;
  if (upper == "UDP" || upper == "17") return Protocol::Udp;
  return Protocol::Other;
}

Millis parse_timestamp(std::string_view text) {
  text = trim(text);
  if (text.empty()) throw std::invalid_argument("empty timestamp");
  const bool integer = std::all_of(text.begin(), text.end(), [](char c) {
    return std::isdigit(static_cast<unsigned char>(c)) || c == '-';
  });
  if (integer) return parse_integer<Millis>(text, "timestamp");
  return parse_rfc3339(text);
}

bool is_valid_address(std::string_view text) {
  const std::string s(text);
  unsigned char buf[16];
  return inet_pton(AF_INET, s.c_str(), buf) == 1 ||
         inet_pton(AF_INET6, s.c_str(), buf) == 1;
}

ParseReport parse_flows(std::istream& source, FlowFormat format) {
  ParseReport report;
  report.errors = for_each_line(source, format, [&](std::string_view line) {
    FlowRecord flow;
    if (format == FlowFormat::Csv) {
      const auto fields = split_csv(line);
      if (fields.size() != 7) {
        throw std::invalid_argument("expected 7 columns, got " +
                                    std::to_string(fields.size()));
      }
      flow = flow_from_fields(fields);
    } else {
      flow = flow_from_json(nlohmann::json::parse(line));
    }
    validate(flow);
    if (flow.src_ip == flow.dst_ip) {
      ++report.self_loops_dropped;
      return;
    }
    report.flows.push_back(std::move(flow));
  });
  return report;
}

ParseReport read_flow_file(const std::filesystem::path& path, FlowFormat format) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open flow file: " + path.string());
  return parse_flows(in, format);
}

BiflowParseReport parse_biflows(std::istream& source, FlowFormat format) {
  BiflowParseReport report;
  report.errors = for_each_line(source, format, [&](std::string_view line) {
    BiflowRecord b;
    FlowRecord base;
    if (format == FlowFormat::Csv) {
      const auto fields = split_csv(line);
      if (fields.size() != 7 && fields.size() != 11) {
        throw std::invalid_argument("expected 7 or 11 columns, got " +
                                    std::to_string(fields.size()));
      }
      base = flow_from_fields(fields);
      b.fwd_bytes = optional_count(fields, 7);
      b.rev_bytes = optional_count(fields, 8);
      b.fwd_packets = optional_count(fields, 9);
      b.rev_packets = optional_count(fields, 10);
    } else {
      const auto obj = nlohmann::json::parse(line);
      base = flow_from_json(obj);
      const auto count = [&](const char* key) -> std::optional<std::uint64_t> {
        if (!obj.contains(key)) return std::nullopt;
        return obj.at(key).get<std::uint64_t>();
      };
      b.fwd_bytes = count("fwd_bytes");
      b.rev_bytes = count("rev_bytes");
      b.fwd_packets = count("fwd_packets");
      b.rev_packets = count("rev_packets");
    }
    validate(base);
    if (base.src_ip == base.dst_ip) {
      ++report.self_loops_dropped;
      return;
    }
    b.t_start = base.t_start;
    b.t_end = base.t_end;
    b.src_ip = std::move(base.src_ip);
    b.dst_ip = std::move(base.dst_ip);
    b.src_port = base.src_port;
    b.dst_port = base.dst_port;
    b.proto = base.proto;
    report.biflows.push_back(std::move(b));
  });
  return report;
}

std::pair<FlowRecord, FlowRecord> biflow_to_uniflows(const BiflowRecord& b,
                                                     SplitMode mode) {
  FlowRecord forward{b.t_start, b.t_end, b.src_ip, b.dst_ip,
                     b.src_port, b.dst_port, b.proto};
  FlowRecord reverse{b.t_start, b.t_end, b.dst_ip, b.src_ip,
                     b.dst_port, b.src_port, b.proto};
  if (mode == SplitMode::DistinctTimestamps) {
    reverse.t_start = std::min(b.t_start + 1, b.t_end);
  }
  return {std::move(forward), std::move(reverse)};
}

std::vector<FlowRecord> filter_tcp_udp(std::span<const FlowRecord> flows) {
  std::vector<FlowRecord> out;
  out.reserve(flows.size());
  std::copy_if(flows.begin(), flows.end(), std::back_inserter(out),
               [](const FlowRecord& f) { return f.proto != Protocol::Other; });
  return out;
}

std::string format_flow_csv(const FlowRecord& f) {
  std::string line;
  line.reserve(64);
  line += std::to_string(f.t_start);
  line += ',';
  line += std::to_string(f.t_end);
  line += ',';
  line += f.src_ip;
  line += ',';
  line += f.dst_ip;
  line += ',';
  line += std::to_string(f.src_port);
  line += ',';
  line += std::to_string(f.dst_port);
  line += ',';
  line += to_string(f.proto);
  return line;
}

void write_flows_csv(std::ostream& out, std::span<const FlowRecord> flows,
                     bool header) {
  if (header) out << kFlowCsvHeader << '\n';
  for (const auto& f : flows) out << format_flow_csv(f) << '\n';
}

void write_flow_file(const std::filesystem::path& path,
                     std::span<const FlowRecord> flows) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write flow file: " + path.string());
  write_flows_csv(out, flows);
  if (!out) throw IoError("write failed: " + path.string());
}

}  // namespace flowdep
