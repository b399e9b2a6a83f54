#include "config.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include <yaml-cpp/yaml.h>

#include "flowdep/error.hpp"
#include "flowdep/rng.hpp"

namespace flowdep::app {
namespace {

class Reader {
 public:
  explicit Reader(std::vector<std::string>& problems) : problems_(problems) {}

  /// Calls `fn(key, node)` for each entry of `section`, then reports keys
  /// nobody consumed.
  template <typename Fn>
  void section(const YAML::Node& root, const std::string& name, Fn&& fn) {
    const auto node = root[name];
    if (!node) return;
    if (!node.IsMap()) {
      problems_.push_back(name + ": expected a mapping");
      return;
    }
    for (const auto& entry : node) {
      const auto key = entry.first.as<std::string>();
      if (!fn(key, entry.second)) problems_.push_back(name + "." + key + ": unknown key");
    }
  }

  template <typename T>
  bool get(const YAML::Node& node, const std::string& where, T& out) {
    try {
      out = node.as<T>();
    } catch (const YAML::Exception&) {
      problems_.push_back(where + ": invalid value '" + YAML::Dump(node) + "'");
    }
    return true;
  }

 private:
  std::vector<std::string>& problems_;
};

FlowFormat parse_format(const std::string& text) {
  if (text == "csv") return FlowFormat::Csv;
  if (text == "jsonl") return FlowFormat::Jsonl;
  throw ConfigError("ingest.format must be csv or jsonl");
}

SplitMode parse_split(const std::string& text) {
  if (text == "same") return SplitMode::SameTimestamps;
  if (text == "distinct") return SplitMode::DistinctTimestamps;
  throw ConfigError("ingest.split_mode must be same or distinct");
}

template <typename Fn>
void collect(std::vector<std::string>& problems, Fn&& fn) {
  try {
    fn();
  } catch (const ConfigError& e) {
    std::stringstream ss(e.what());
    std::string part;
    while (std::getline(ss, part, ';')) {
      while (!part.empty() && part.front() == ' ') part.erase(part.begin());
      problems.push_back(part);
    }
  }
}

}  // namespace

PipelineConfig::PipelineConfig() {
  for (const char* prefix : {"10.0.0.0/8", "172.16.0.0/12", "192.168.0.0/16", "fc00::/7"}) {
    sampler.internal_prefixes.push_back(CidrPrefix::parse(prefix));
  }
}

std::vector<std::string> PipelineConfig::violations() const {
  std::vector<std::string> problems;
  collect(problems, [&] { sampler.validate(); });
  collect(problems, [&] { walks.validate(); });
  collect(problems, [&] { embedding.validate(); });
  collect(problems, [&] { oracle.validate(); });
  collect(problems, [&] { forest.validate(); });
  collect(problems, [&] { eval.validate(); });
  collect(problems, [&] { synth.validate(); });
  if (context.context_size < 2) problems.emplace_back("context.size must be >= 2");
  if (context.context_size > walks.walk_length) {
    problems.emplace_back("context.size must not exceed walks.length");
  }
  if (workdir.empty()) problems.emplace_back("workdir must not be empty");
  return problems;
}

void PipelineConfig::validate() const {
  const auto problems = violations();
  if (problems.empty()) return;
  std::string msg = "invalid configuration:";
  for (const auto& p : problems) msg += "\n  - " + p;
  throw ConfigError(msg);
}

PipelineConfig parse_config(const std::string& yaml_text) {
  YAML::Node root;
  try {
    root = YAML::Load(yaml_text);
  } catch (const YAML::Exception& e) {
    throw ConfigError(std::string("config is not valid YAML: ") + e.what());
  }
  PipelineConfig cfg;
  if (!root || root.IsNull()) return cfg;
  if (!root.IsMap()) throw ConfigError("config must be a YAML mapping");

  std::vector<std::string> problems;
  Reader r(problems);
  static const std::set<std::string> sections{"seed",   "workdir",   "ingest", "sampler",
                                              "walks",  "context",   "embedding", "oracle",
                                              "forest", "eval",      "labels", "synth"};
  for (const auto& entry : root) {
    const auto key = entry.first.as<std::string>();
    if (!sections.contains(key)) problems.push_back(key + ": unknown section");
  }
  if (root["seed"]) r.get(root["seed"], "seed", cfg.seed);
  if (root["workdir"]) {
    std::string dir;
    r.get(root["workdir"], "workdir", dir);
    cfg.workdir = dir;
  }

  r.section(root, "ingest", [&](const std::string& k, const YAML::Node& v) {
    std::string text;
    if (k == "input") {
      r.get(v, "ingest.input", text);
      cfg.ingest.input = text;
      return true;
    }
    if (k == "biflows") return r.get(v, "ingest.biflows", cfg.ingest.biflows);
    if (k == "format" || k == "split_mode") {
      r.get(v, "ingest." + k, text);
      collect(problems, [&] {
        if (k == "format") cfg.ingest.format = parse_format(text);
        else cfg.ingest.split_mode = parse_split(text);
      });
      return true;
    }
    return false;
  });
  r.section(root, "sampler", [&](const std::string& k, const YAML::Node& v) {
    auto& s = cfg.sampler;
    if (k == "n_internal") return r.get(v, "sampler.n_internal", s.n_internal);
    if (k == "m_external") return r.get(v, "sampler.m_external", s.m_external);
    if (k == "k_edges") return r.get(v, "sampler.k_edges", s.k_edges);
    if (k == "exclude_scanners") return r.get(v, "sampler.exclude_scanners", s.exclude_scanners);
    if (k == "scanner_fraction") return r.get(v, "sampler.scanner_fraction", s.scanner_fraction);
    if (k == "internal_prefixes") {
      std::vector<std::string> texts;
      r.get(v, "sampler.internal_prefixes", texts);
      s.internal_prefixes.clear();
      for (const auto& t : texts) collect(problems, [&] { s.internal_prefixes.push_back(CidrPrefix::parse(t)); });
      return true;
    }
    return false;
  });
  r.section(root, "walks", [&](const std::string& k, const YAML::Node& v) {
    auto& w = cfg.walks;
    if (k == "length") return r.get(v, "walks.length", w.walk_length);
    if (k == "per_vertex") return r.get(v, "walks.per_vertex", w.walks_per_vertex);
    if (k == "epsilon_ms") return r.get(v, "walks.epsilon_ms", w.epsilon);
    if (k == "n_t") return r.get(v, "walks.n_t", w.n_t);
    if (k == "threads") return r.get(v, "walks.threads", w.threads);
    return false;
  });
  r.section(root, "context", [&](const std::string& k, const YAML::Node& v) {
    if (k == "size") return r.get(v, "context.size", cfg.context.context_size);
    if (k == "trailing_windows") return r.get(v, "context.trailing_windows", cfg.context.trailing_windows);
    return false;
  });
  r.section(root, "embedding", [&](const std::string& k, const YAML::Node& v) {
    auto& e = cfg.embedding;
    if (k == "dims") return r.get(v, "embedding.dims", e.dims);
    if (k == "epochs") return r.get(v, "embedding.epochs", e.epochs);
    if (k == "learning_rate") return r.get(v, "embedding.learning_rate", e.learning_rate);
    if (k == "negatives_per_positive") return r.get(v, "embedding.negatives_per_positive", e.neg_samples_per_positive);
    if (k == "parallel") return r.get(v, "embedding.parallel", e.parallel);
    if (k == "threads") return r.get(v, "embedding.threads", e.threads);
    return false;
  });
  r.section(root, "oracle", [&](const std::string& k, const YAML::Node& v) {
    auto& o = cfg.oracle;
    if (k == "n_t_direct") return r.get(v, "oracle.n_t_direct", o.n_t_direct);
    if (k == "n_t_remote") return r.get(v, "oracle.n_t_remote", o.n_t_remote);
    if (k == "epsilon_ms") return r.get(v, "oracle.epsilon_ms", o.epsilon);
    if (k == "max_chain_vertices") return r.get(v, "oracle.max_chain_vertices", o.max_chain_vertices);
    return false;
  });
  r.section(root, "forest", [&](const std::string& k, const YAML::Node& v) {
    auto& f = cfg.forest;
    if (k == "trees") return r.get(v, "forest.trees", f.n_trees);
    if (k == "max_depth") return r.get(v, "forest.max_depth", f.max_depth);
    if (k == "min_samples_leaf") return r.get(v, "forest.min_samples_leaf", f.min_samples_leaf);
    if (k == "features_per_split") return r.get(v, "forest.features_per_split", f.features_per_split);
    if (k == "bootstrap") return r.get(v, "forest.bootstrap", f.bootstrap);
    if (k == "threads") return r.get(v, "forest.threads", f.threads);
    return false;
  });
  r.section(root, "eval", [&](const std::string& k, const YAML::Node& v) {
    auto& e = cfg.eval;
    if (k == "splits") return r.get(v, "eval.splits", e.n_splits);
    if (k == "fractions") return r.get(v, "eval.fractions", e.fractions);
    if (k == "auc_fraction") return r.get(v, "eval.auc_fraction", e.auc_fraction);
    if (k == "threshold") return r.get(v, "eval.threshold", e.threshold);
    return false;
  });
  r.section(root, "labels", [&](const std::string& k, const YAML::Node& v) {
    if (k == "unordered") return r.get(v, "labels.unordered", cfg.unordered_labels);
    return false;
  });
  r.section(root, "synth", [&](const std::string& k, const YAML::Node& v) {
    auto& s = cfg.synth;
    if (k == "clients") return r.get(v, "synth.clients", s.n_clients);
    if (k == "web") return r.get(v, "synth.web", s.n_web);
    if (k == "db") return r.get(v, "synth.db", s.n_db);
    if (k == "dns") return r.get(v, "synth.dns", s.n_dns);
    if (k == "session_rate") return r.get(v, "synth.session_rate", s.session_rate);
    if (k == "duration_s") return r.get(v, "synth.duration_s", s.duration_s);
    if (k == "lr_web_db") return r.get(v, "synth.lr_web_db", s.lr_web_db);
    if (k == "rr_dns_web") return r.get(v, "synth.rr_dns_web", s.rr_dns_web);
    if (k == "noise_flows") return r.get(v, "synth.noise_flows", s.noise_flows);
    if (k == "noise_fraction") return r.get(v, "synth.noise_fraction", s.noise_fraction);
    if (k == "noise_hosts") return r.get(v, "synth.noise_hosts", s.noise_hosts);
    if (k == "latency_min_ms") return r.get(v, "synth.latency_min_ms", s.latency_min);
    if (k == "latency_max_ms") return r.get(v, "synth.latency_max_ms", s.latency_max);
    if (k == "epsilon_ms") return r.get(v, "synth.epsilon_ms", s.epsilon);
    return false;
  });

  if (!problems.empty()) {
    std::string msg = "invalid configuration:";
    for (const auto& p : problems) msg += "\n  - " + p;
    throw ConfigError(msg);
  }
  return cfg;
}

PipelineConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file: " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

std::uint64_t module_seed(const PipelineConfig& cfg, std::string_view module) {
  return derive_seed(cfg.seed, module);
}

}  // namespace flowdep::app
