#include <sstream>

#include <gtest/gtest.h>

#include "fixtures.hpp"
#include "flowdep/error.hpp"
#include "flowdep/flow.hpp"
#include "flowdep/rng.hpp"

using namespace flowdep;

namespace {

ParseReport parse_csv(const std::string& text) {
  std::istringstream in(text);
  return parse_flows(in, FlowFormat::Csv);
}

}  // namespace

TEST(ParseFlows, MapsCsvFields) {
  const auto r = parse_csv("1000,2000,10.0.0.1,10.0.0.2,50000,443,TCP\n");
  ASSERT_EQ(r.flows.size(), 1u);
  EXPECT_TRUE(r.errors.empty());
  const auto& f = r.flows[0];
  EXPECT_EQ(f.t_start, 1000);
  EXPECT_EQ(f.t_end, 2000);
  EXPECT_EQ(f.src_ip, "10.0.0.1");
  EXPECT_EQ(f.dst_ip, "10.0.0.2");
  EXPECT_EQ(f.src_port, 50000);
  EXPECT_EQ(f.dst_port, 443);
  EXPECT_EQ(f.proto, Protocol::Tcp);
}

TEST(ParseFlows, EmptyInput) {
  const auto r = parse_csv("");
  EXPECT_TRUE(r.flows.empty());
  EXPECT_TRUE(r.errors.empty());
}

TEST(ParseFlows, RejectsEndBeforeStartWithLineNumber) {
  const auto r = parse_csv(std::string(kFlowCsvHeader) +
                           "\n0,5,10.0.0.1,10.0.0.2,1,2,UDP\n9,3,10.0.0.1,10.0.0.2,1,2,UDP\n");
  EXPECT_EQ(r.flows.size(), 1u);
  ASSERT_EQ(r.errors.size(), 1u);
  EXPECT_EQ(r.errors[0].line, 3u);
}

TEST(ParseFlows, ReportsBadAddressAndTimestamp) {
  const auto r = parse_csv("0,5,10.0.0.300,10.0.0.2,1,2,TCP\nabc,5,10.0.0.1,10.0.0.2,1,2,TCP\n"
                           "0,5,10.0.0.1,10.0.0.2,1,2,TCP\n");
  EXPECT_EQ(r.flows.size(), 1u);
  ASSERT_EQ(r.errors.size(), 2u);
  EXPECT_EQ(r.errors[0].line, 1u);
  EXPECT_EQ(r.errors[1].line, 2u);
}

TEST(ParseFlows, DropsSelfLoops) {
  const auto r = parse_csv("0,5,10.0.0.1,10.0.0.1,1,2,TCP\n0,5,10.0.0.1,10.0.0.2,1,2,TCP\n");
  EXPECT_EQ(r.flows.size(), 1u);
  EXPECT_EQ(r.self_loops_dropped, 1u);
  EXPECT_TRUE(r.errors.empty());
}

TEST(ParseFlows, JsonLinesWithRfc3339) {
  std::istringstream in(
      R"({"t_start":"1970-01-01T00:00:01.250Z","t_end":2000,"src_ip":"10.0.0.1","dst_ip":"fd00::2","src_port":5,"dst_port":53,"proto":17})"
      "\n");
  const auto r = parse_flows(in, FlowFormat::Jsonl);
  ASSERT_EQ(r.flows.size(), 1u);
  EXPECT_EQ(r.flows[0].t_start, 1250);
  EXPECT_EQ(r.flows[0].proto, Protocol::Udp);
  EXPECT_EQ(r.flows[0].dst_ip, "fd00::2");
}

TEST(ParseTimestamp, IntegerAndOffsets) {
  EXPECT_EQ(parse_timestamp("123"), 123);
  EXPECT_EQ(parse_timestamp("1970-01-01T00:00:00Z"), 0);
  EXPECT_EQ(parse_timestamp("1970-01-01T01:00:00+01:00"), 0);
  EXPECT_EQ(parse_timestamp("2000-03-01T00:00:00.5Z"), 951868800500);
  EXPECT_THROW(parse_timestamp("2000-13-01T00:00:00Z"), std::invalid_argument);
  EXPECT_THROW(parse_timestamp("yesterday"), std::invalid_argument);
}

TEST(Biflows, SameTimestamps) {
  BiflowRecord b{0, 10, "A", "B", 50000, 443, Protocol::Tcp, {}, {}, {}, {}};
  const auto [fwd, rev] = biflow_to_uniflows(b, SplitMode::SameTimestamps);
  EXPECT_EQ(fwd, (FlowRecord{0, 10, "A", "B", 50000, 443, Protocol::Tcp}));
  EXPECT_EQ(rev, (FlowRecord{0, 10, "B", "A", 443, 50000, Protocol::Tcp}));
}

TEST(Biflows, DistinctTimestamps) {
  BiflowRecord b{0, 10, "A", "B", 50000, 443, Protocol::Tcp, {}, {}, {}, {}};
  const auto [fwd, rev] = biflow_to_uniflows(b, SplitMode::DistinctTimestamps);
  EXPECT_EQ(fwd.t_start, 0);
  EXPECT_EQ(fwd.t_end, 10);
  EXPECT_EQ(rev.t_start, 1);
  EXPECT_EQ(rev.t_end, 10);
}

TEST(Biflows, DegenerateDuration) {
  BiflowRecord b{5, 5, "A", "B", 1, 2, Protocol::Udp, {}, {}, {}, {}};
  for (auto mode : {SplitMode::SameTimestamps, SplitMode::DistinctTimestamps}) {
    const auto [fwd, rev] = biflow_to_uniflows(b, mode);
    EXPECT_EQ(fwd.t_start, 5);
    EXPECT_EQ(rev.t_start, 5);
    EXPECT_EQ(rev.t_end, 5);
  }
}

TEST(Biflows, SwapIsAnInvolution) {
  Rng rng(7);
  for (int i = 0; i < 200; ++i) {
    BiflowRecord b{0, 10, "10.0.0." + std::to_string(uniform_index(rng, 9) + 1), "192.168.0.1",
                   static_cast<std::uint16_t>(uniform_index(rng, 65536)),
                   static_cast<std::uint16_t>(uniform_index(rng, 65536)), Protocol::Udp,
                   {}, {}, {}, {}};
    const auto [fwd, rev] = biflow_to_uniflows(b, SplitMode::SameTimestamps);
    BiflowRecord back{rev.t_start, rev.t_end, rev.src_ip, rev.dst_ip, rev.src_port, rev.dst_port,
                      rev.proto, {}, {}, {}, {}};
    const auto swapped_rev = biflow_to_uniflows(back, SplitMode::SameTimestamps).second;
    EXPECT_EQ(swapped_rev.src_ip, fwd.src_ip);
    EXPECT_EQ(swapped_rev.dst_ip, fwd.dst_ip);
    EXPECT_EQ(swapped_rev.src_port, fwd.src_port);
    EXPECT_EQ(swapped_rev.dst_port, fwd.dst_port);
  }
}

TEST(Biflows, ParsesOptionalCounts) {
  std::istringstream in("0,10,10.0.0.1,10.0.0.2,1,2,TCP,100,200,3,4\n0,10,10.0.0.1,10.0.0.2,1,2,TCP\n");
  const auto r = parse_biflows(in, FlowFormat::Csv);
  ASSERT_EQ(r.biflows.size(), 2u);
  EXPECT_EQ(r.biflows[0].rev_bytes, 200u);
  EXPECT_FALSE(r.biflows[1].fwd_bytes.has_value());
}

TEST(FilterTcpUdp, Examples) {
  using flowdep::testing::make_flow;
  const std::vector<FlowRecord> mixed{make_flow("A", "B", 0, 1, 1, 2, Protocol::Tcp),
                                      make_flow("A", "B", 0, 1, 1, 2, Protocol::Udp),
                                      make_flow("A", "B", 0, 1, 1, 2, Protocol::Other)};
  const auto kept = filter_tcp_udp(mixed);
  ASSERT_EQ(kept.size(), 2u);
  EXPECT_EQ(kept[0].proto, Protocol::Tcp);
  EXPECT_EQ(kept[1].proto, Protocol::Udp);
  EXPECT_TRUE(filter_tcp_udp(std::vector<FlowRecord>{mixed[2], mixed[2]}).empty());
  EXPECT_TRUE(filter_tcp_udp({}).empty());
}

TEST(FilterTcpUdp, KeptPlusRejectedIsInput) {
  Rng rng(3);
  for (int round = 0; round < 50; ++round) {
    std::vector<FlowRecord> flows;
    std::size_t other = 0;
    const auto n = uniform_index(rng, 40);
    for (std::size_t i = 0; i < n; ++i) {
      const auto p = static_cast<Protocol>(uniform_index(rng, 3));
      other += p == Protocol::Other ? 1 : 0;
      flows.push_back(flowdep::testing::make_flow("A", "B", 0, 1, 1, 2, p));
    }
    const auto kept = filter_tcp_udp(flows);
    EXPECT_EQ(kept.size() + other, flows.size());
  }
}

TEST(FlowCsv, RoundTripIsByteIdentical) {
  Rng rng(11);
  std::ostringstream original;
  original << kFlowCsvHeader << '\n';
  for (int i = 0; i < 300; ++i) {
    const auto start = static_cast<Millis>(uniform_index(rng, 1'000'000'000));
    FlowRecord f{start, start + static_cast<Millis>(uniform_index(rng, 5000)),
                 "10.1." + std::to_string(uniform_index(rng, 256)) + ".1",
                 i % 2 ? "2001:db8::" + std::to_string(uniform_index(rng, 100)) : "192.0.2.7",
                 static_cast<std::uint16_t>(uniform_index(rng, 65536)),
                 static_cast<std::uint16_t>(uniform_index(rng, 65536)),
                 uniform_index(rng, 2) ? Protocol::Tcp : Protocol::Udp};
    original << format_flow_csv(f) << '\n';
  }
  std::istringstream in(original.str());
  const auto report = parse_flows(in, FlowFormat::Csv);
  ASSERT_TRUE(report.errors.empty());
  std::ostringstream again;
  write_flows_csv(again, report.flows);
  EXPECT_EQ(again.str(), original.str());
}

TEST(FlowFile, MissingFileIsIoError) {
  EXPECT_THROW(read_flow_file("/nonexistent/flows.csv", FlowFormat::Csv), IoError);
}
