#include "flowdep/graph.hpp"

#include <algorithm>
#include <fstream>
#include <istream>
#include <ostream>

#include <json.hpp>

#include "flowdep/error.hpp"

namespace flowdep {
namespace {

void insert_sorted(std::vector<VertexId>& list, VertexId v) {
  const auto it = std::lower_bound(list.begin(), list.end(), v);
  if (it == list.end() || *it != v) list.insert(it, v);
}

}  // namespace

CommGraph::CommGraph(std::span<const Address> vertices) {
  for (const auto& a : vertices) add_vertex(a);
}

VertexId CommGraph::add_vertex(const Address& address) {
  if (const auto it = index_.find(address); it != index_.end()) return it->second;
  const auto id = static_cast<VertexId>(addresses_.size());
  addresses_.push_back(address);
  index_.emplace(address, id);
  out_.emplace_back();
  in_.emplace_back();
  return id;
}

EdgeId CommGraph::add_edge(const FlowRecord& flow) {
  return add_edge(Edge{index_of(flow.src_ip), index_of(flow.dst_ip), flow.src_port,
                       flow.dst_port, flow.proto, flow.t_start, flow.t_end});
}

EdgeId CommGraph::add_edge(const Edge& edge) {
  if (edge.src >= vertex_count() || edge.dst >= vertex_count()) {
    throw Error("edge endpoint out of range");
  }
  const auto id = static_cast<EdgeId>(edges_.size());
  edges_.push_back(edge);
  auto& parallel = pairs_[key(edge.src, edge.dst)];
  if (parallel.empty()) {
    insert_sorted(out_[edge.src], edge.dst);
    insert_sorted(in_[edge.dst], edge.src);
  }
  parallel.push_back(id);
  return id;
}

std::optional<VertexId> CommGraph::find(const Address& address) const {
  const auto it = index_.find(address);
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

VertexId CommGraph::index_of(const Address& address) const {
  const auto id = find(address);
  if (!id) throw UnknownAddressError(address);
  return *id;
}

std::span<const EdgeId> CommGraph::edges_between(VertexId src, VertexId dst) const {
  const auto it = pairs_.find(key(src, dst));
  if (it == pairs_.end()) return {};
  return it->second;
}

std::size_t CommGraph::pair_flow_count(VertexId src, VertexId dst) const {
  return edges_between(src, dst).size();
}

std::size_t CommGraph::pair_flow_count(const Address& src, const Address& dst) const {
  const auto s = find(src);
  const auto d = find(dst);
  if (!s || !d) return 0;
  return pair_flow_count(*s, *d);
}

bool CommGraph::has_edge(VertexId src, VertexId dst) const {
  return pairs_.contains(key(src, dst));
}

void write_graph_jsonl(std::ostream& out, const CommGraph& graph) {
  nlohmann::json manifest{{"kind", "vertices"},
                          {"vertices", std::vector<Address>(graph.addresses().begin(),
                                                            graph.addresses().end())}};
  out << manifest.dump() << '\n';
  for (const auto& e : graph.edges()) {
    nlohmann::json line{{"kind", "edge"},
                        {"src", graph.address(e.src)},
                        {"dst", graph.address(e.dst)},
                        {"src_port", e.src_port},
                        {"dst_port", e.dst_port},
                        {"proto", std::string(to_string(e.proto))},
                        {"t_start", e.t_start},
                        {"t_end", e.t_end}};
    out << line.dump() << '\n';
  }
}

CommGraph read_graph_jsonl(std::istream& in) {
  CommGraph graph;
  std::string line;
  std::size_t number = 0;
  bool have_manifest = false;
  while (std::getline(in, line)) {
    ++number;
    if (line.empty()) continue;
    try {
      const auto obj = nlohmann::json::parse(line);
      const auto kind = obj.at("kind").get<std::string>();
      if (kind == "vertices") {
        for (const auto& a : obj.at("vertices")) graph.add_vertex(a.get<Address>());
        have_manifest = true;
      } else if (kind == "edge") {
        if (!have_manifest) throw IoError("edge before vertex manifest");
        FlowRecord f;
        f.src_ip = obj.at("src").get<Address>();
        f.dst_ip = obj.at("dst").get<Address>();
        f.src_port = obj.at("src_port").get<std::uint16_t>();
        f.dst_port = obj.at("dst_port").get<std::uint16_t>();
        f.proto = parse_protocol(obj.at("proto").get<std::string>());
        f.t_start = obj.at("t_start").get<Millis>();
        f.t_end = obj.at("t_end").get<Millis>();
        graph.add_edge(f);
      } else {
        throw IoError("unknown record kind '" + kind + "'");
      }
    } catch (const nlohmann::json::exception& e) {
      throw IoError("graph dump line " + std::to_string(number) + ": " + e.what());
    } catch (const UnknownAddressError& e) {
      throw IoError("graph dump line " + std::to_string(number) + ": " + e.what());
    }
  }
  return graph;
}

void write_graph_file(const std::filesystem::path& path, const CommGraph& graph) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write graph file: " + path.string());
  write_graph_jsonl(out, graph);
}

CommGraph read_graph_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open graph file: " + path.string());
  return read_graph_jsonl(in);
}

}  // namespace flowdep
