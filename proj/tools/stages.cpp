#include "stages.hpp"

#include <charconv>
#include <fstream>
#include <map>
#include <sstream>

#include <json.hpp>

#include "flowdep/error.hpp"
#include "flowdep/labels.hpp"
#include "flowdep/simindex.hpp"

namespace flowdep::app {
namespace {

std::string fmt(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return {buf, res.ptr};
}

void ensure_dir(const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw IoError("cannot create work directory " + dir.string() + ": " + ec.message());
}

std::vector<FlowRecord> load_flows(const std::filesystem::path& path, const Log& log) {
  require_file(path);
  auto report = read_flow_file(path, FlowFormat::Csv);
  if (!report.errors.empty()) {
    log(path.string() + ": skipped " + std::to_string(report.errors.size()) + " bad lines");
  }
  return std::move(report.flows);
}

CommGraph load_graph(const Artifacts& a) {
  require_file(a.graph());
  return read_graph_file(a.graph());
}

EmbeddingMatrix load_embedding(const Artifacts& a, const CommGraph& graph) {
  require_file(a.embedding());
  auto emb = read_embedding(a.embedding());
  const auto addresses = emb.addresses();
  const auto expected = graph.addresses();
  if (!std::equal(addresses.begin(), addresses.end(), expected.begin(), expected.end())) {
    throw Error("embedding vertices do not match the graph; rerun embed");
  }
  return emb;
}

std::vector<LabelDescriptor> load_labels(const Artifacts& a, const CommGraph& graph) {
  require_file(a.labels());
  return read_labels_file(a.labels(), graph.addresses());
}

struct PairRow {
  VertexId src = 0;
  VertexId dst = 0;
  std::string label;  // "0", "1" or empty
  double probability = 0.0;
};

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> cells;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) cells.push_back(cell);
  if (!line.empty() && line.back() == ',') cells.emplace_back();
  return cells;
}

/// src,dst[,label[,probability]] with an optional header line.
std::vector<PairRow> read_pair_rows(const std::filesystem::path& path, const EmbeddingMatrix& emb,
                                    bool need_probability) {
  require_file(path);
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  std::vector<PairRow> rows;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || (line_no == 1 && line.rfind("src,", 0) == 0)) continue;
    const auto cells = split_csv(line);
    const auto where = path.string() + ":" + std::to_string(line_no);
    if (cells.size() < (need_probability ? 4u : 2u)) throw IoError(where + ": too few columns");
    PairRow row;
    row.src = emb.index_of(cells[0]);
    row.dst = emb.index_of(cells[1]);
    if (cells.size() > 2) row.label = cells[2];
    if (need_probability) {
      const auto& text = cells[3];
      const auto res = std::from_chars(text.data(), text.data() + text.size(), row.probability);
      if (res.ec != std::errc{} || res.ptr != text.data() + text.size()) {
        throw IoError(where + ": bad probability '" + text + "'");
      }
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

template <typename T>
T with_seed(T cfg, std::uint64_t seed) {
  cfg.rng_seed = seed;
  return cfg;
}

}  // namespace

void require_file(const std::filesystem::path& path) {
  if (path.empty()) throw UsageError("no input file given");
  if (!std::filesystem::exists(path)) throw UsageError("missing input file: " + path.string());
}

void run_ingest(const PipelineConfig& cfg, const Log& log) {
  const Artifacts a{cfg.workdir};
  require_file(cfg.ingest.input);
  std::vector<FlowRecord> flows;
  std::size_t bad = 0;
  std::size_t loops = 0;
  if (cfg.ingest.biflows) {
    std::ifstream in(cfg.ingest.input);
    if (!in) throw IoError("cannot open " + cfg.ingest.input.string());
    const auto report = parse_biflows(in, cfg.ingest.format);
    for (const auto& b : report.biflows) {
      auto [fwd, rev] = biflow_to_uniflows(b, cfg.ingest.split_mode);
      flows.push_back(std::move(fwd));
      flows.push_back(std::move(rev));
    }
    bad = report.errors.size();
    loops = report.self_loops_dropped;
    for (std::size_t i = 0; i < std::min<std::size_t>(bad, 5); ++i) {
      log("line " + std::to_string(report.errors[i].line) + ": " + report.errors[i].message);
    }
  } else {
    auto report = read_flow_file(cfg.ingest.input, cfg.ingest.format);
    flows = std::move(report.flows);
    bad = report.errors.size();
    loops = report.self_loops_dropped;
    for (std::size_t i = 0; i < std::min<std::size_t>(bad, 5); ++i) {
      log("line " + std::to_string(report.errors[i].line) + ": " + report.errors[i].message);
    }
  }
  const auto kept = filter_tcp_udp(flows);
  ensure_dir(a.dir);
  write_flow_file(a.flows(), kept);
  log("ingest: " + std::to_string(kept.size()) + " flows kept, " + std::to_string(bad) +
      " bad lines, " + std::to_string(loops) + " self-loops, " +
      std::to_string(flows.size() - kept.size()) + " non-TCP/UDP");
}

void run_sample(const PipelineConfig& cfg, const Log& log) {
  const Artifacts a{cfg.workdir};
  const auto flows = load_flows(a.flows(), log);
  const auto result = sample_graph(flows, with_seed(cfg.sampler, module_seed(cfg, "sampler")));
  for (const auto& w : result.warnings) log("sample: warning: " + w);
  write_graph_file(a.graph(), result.graph);
  log("sample: " + std::to_string(result.graph.vertex_count()) + " vertices, " +
      std::to_string(result.graph.edge_count()) + " edges from " +
      std::to_string(result.eligible_flows) + " eligible flows");
}

void run_walks(const PipelineConfig& cfg, const Log& log) {
  const Artifacts a{cfg.workdir};
  const auto graph = load_graph(a);
  const auto wc = with_seed(cfg.walks, module_seed(cfg, "walks"));
  auto walks = generate_walks(graph, wc);
  const auto negatives = generate_negative_walks(graph, walks, wc);
  const auto positives = walks.size();
  walks.insert(walks.end(), negatives.begin(), negatives.end());
  write_walks_file(a.walks(), graph, walks);
  log("walks: " + std::to_string(positives) + " positive, " + std::to_string(negatives.size()) +
      " negative");
}

void run_embed(const PipelineConfig& cfg, const Log& log) {
  const Artifacts a{cfg.workdir};
  const auto graph = load_graph(a);
  require_file(a.walks());
  const auto walks = read_walks_file(a.walks(), graph);
  std::vector<CandidateDependency> positives;
  std::vector<CandidateDependency> negatives;
  for (const auto& pair : split_walks(walks, cfg.context)) {
    (pair.source_label == WalkLabel::Positive ? positives : negatives).push_back(pair);
  }
  const auto ec = with_seed(cfg.embedding, module_seed(cfg, "embedding"));
  const auto result = train_embedding(positives, negatives, graph.addresses(), ec);
  write_embedding(a.embedding(), result.embedding);
  write_embedding_manifest(a.embedding_manifest(), result.embedding, result.epoch_losses, ec);
  log("embed: " + std::to_string(positives.size()) + " positive and " +
      std::to_string(negatives.size()) + " negative pairs, final loss " +
      (result.epoch_losses.empty() ? std::string("n/a") : fmt(result.epoch_losses.back())));
}

void run_oracle_stage(const PipelineConfig& cfg, const Log& log) {
  const Artifacts a{cfg.workdir};
  const auto flows = load_flows(a.flows(), log);
  const auto records = run_oracle(flows, cfg.oracle);
  write_ground_truth_file(a.ground_truth(), records);
  std::map<std::string_view, std::size_t> counts;
  for (const auto& r : records) ++counts[to_string(r.kind)];
  std::string summary;
  for (const auto& [kind, n] : counts) summary += " " + std::string(kind) + "=" + std::to_string(n);
  log("oracle: " + std::to_string(records.size()) + " records" + summary);
}

void run_train(const PipelineConfig& cfg, const Log& log) {
  const Artifacts a{cfg.workdir};
  const auto graph = load_graph(a);
  const auto emb = load_embedding(a, graph);
  require_file(a.ground_truth());
  const auto records = read_ground_truth_file(a.ground_truth());

  PairSet truth;
  for (const auto& [dep, target] : dependency_pairs(records)) {
    const auto s = graph.find(dep);
    const auto d = graph.find(target);
    if (s && d) truth.emplace(*s, *d);
  }
  if (truth.empty()) throw Error("no ground-truth dependency has both ends in the sampled graph");
  const auto labels =
      build_label_set(truth, graph.vertex_count(), module_seed(cfg, "labels"), cfg.unordered_labels);
  write_labels_file(a.labels(), graph.addresses(), labels);

  const auto data = to_dataset(attach_features(emb, labels));
  const auto forest = RandomForest::train(data, with_seed(cfg.forest, module_seed(cfg, "forest")));
  forest.save_file(a.model());
  log("train: " + std::to_string(labels.size()) + " labels (" + std::to_string(labels.size() / 2) +
      " dependencies), " + std::to_string(forest.tree_count()) + " trees");
}

void run_predict(const PipelineConfig& cfg, const std::filesystem::path& pairs_file,
                 const Log& log) {
  const Artifacts a{cfg.workdir};
  const auto graph = load_graph(a);
  const auto emb = load_embedding(a, graph);
  require_file(a.model());
  const auto forest = RandomForest::load_file(a.model());
  const auto rows = read_pair_rows(pairs_file.empty() ? a.labels() : pairs_file, emb, false);

  std::ofstream out(a.predictions(), std::ios::binary);
  if (!out) throw IoError("cannot write " + a.predictions().string());
  out << "src,dst,label,probability\n";
  for (const auto& row : rows) {
    const auto p = forest.predict_proba(dependency_vector(emb, row.src, row.dst));
    out << emb.addresses()[row.src] << ',' << emb.addresses()[row.dst] << ',' << row.label << ','
        << fmt(p) << '\n';
  }
  log("predict: scored " + std::to_string(rows.size()) + " pairs");
}

void run_eval(const PipelineConfig& cfg, const Log& log) {
  const Artifacts a{cfg.workdir};
  const auto graph = load_graph(a);
  const auto emb = load_embedding(a, graph);
  const auto labels = load_labels(a, graph);
  const auto data = to_dataset(attach_features(emb, labels));
  const auto forest_cfg = with_seed(cfg.forest, module_seed(cfg, "forest"));

  const Scorer scorer = [&](std::span<const std::size_t> train, std::span<const std::size_t> test) {
    Dataset subset;
    for (const auto i : train) subset.add(data.row(i), data.labels[i] != 0);
    const auto forest = RandomForest::train(subset, forest_cfg);
    std::vector<double> scores;
    for (const auto i : test) scores.push_back(forest.predict_proba(data.row(i)));
    return scores;
  };
  const auto report = repeated_eval(data.labels, scorer, with_seed(cfg.eval, module_seed(cfg, "eval")));
  write_report_file(a.eval_report(), report);
  write_curve_csv(a.roc_curve(), report.roc, "fpr", "tpr");
  write_curve_csv(a.pr_curve(), report.pr, "recall", "precision");
  const auto show = [](const std::optional<double>& v) { return v ? fmt(*v) : std::string("undefined"); };
  log("eval: roc_auc=" + show(report.roc_auc) + " average_precision=" + show(report.average_precision) +
      " chance=" + fmt(report.chance_level));
}

void run_simindex(const PipelineConfig& cfg, const Log& log) {
  const Artifacts a{cfg.workdir};
  const auto graph = load_graph(a);
  const auto emb = load_embedding(a, graph);
  const auto rows = read_pair_rows(a.predictions(), emb, true);
  std::vector<std::pair<VertexId, VertexId>> pairs;
  std::vector<double> probabilities;
  for (const auto& r : rows) {
    pairs.emplace_back(r.src, r.dst);
    probabilities.push_back(r.probability);
  }
  const SimpleDigraph simple(graph);
  const auto scored = score_pairs(simple, pairs, probabilities);

  std::ofstream out(a.simindex(), std::ios::binary);
  if (!out) throw IoError("cannot write " + a.simindex().string());
  out << "src,dst";
  for (const auto k : kAllIndexKinds) out << ',' << to_string(k);
  out << ",model_probability\n";
  for (const auto& r : scored) {
    out << graph.address(r.src) << ',' << graph.address(r.dst);
    for (const auto s : r.scores) out << ',' << fmt(s);
    out << ',' << fmt(r.model_probability) << '\n';
  }

  nlohmann::json correlations = nlohmann::json::array();
  if (scored.size() >= 2) {
    for (const auto& c : correlate(scored)) {
      correlations.push_back(
          {{"index", to_string(c.kind)},
           {"spearman", c.spearman ? nlohmann::json(*c.spearman) : nlohmann::json(nullptr)},
           {"kendall_tau", c.kendall ? nlohmann::json(*c.kendall) : nlohmann::json(nullptr)}});
    }
  }
  std::ofstream summary(a.simindex_summary(), std::ios::binary);
  if (!summary) throw IoError("cannot write " + a.simindex_summary().string());
  summary << nlohmann::json{{"pairs", scored.size()}, {"correlations", correlations}}.dump(2) << '\n';
  log("simindex: " + std::to_string(scored.size()) + " pairs scored");
}

void run_synth(const PipelineConfig& cfg, const std::filesystem::path& flows_out,
               const std::filesystem::path& truth_out, const Log& log) {
  auto sc = with_seed(cfg.synth, module_seed(cfg, "synth"));
  const auto trace = generate_scenario(sc);
  for (const auto& p : {flows_out, truth_out}) {
    if (p.has_parent_path()) ensure_dir(p.parent_path());
  }
  write_flow_file(flows_out, trace.flows);
  write_ground_truth_file(truth_out, trace.planted);
  log("synth: " + std::to_string(trace.flows.size()) + " flows, " +
      std::to_string(trace.planted.size()) + " planted records");
}

std::vector<StageInfo> pipeline_stages(const Artifacts& a) {
  return {{"ingest", {a.flows()}},
          {"sample", {a.graph()}},
          {"walks", {a.walks()}},
          {"embed", {a.embedding(), a.embedding_manifest()}},
          {"oracle", {a.ground_truth()}},
          {"train", {a.labels(), a.model()}},
          {"predict", {a.predictions()}},
          {"eval", {a.eval_report(), a.roc_curve(), a.pr_curve()}},
          {"simindex", {a.simindex(), a.simindex_summary()}}};
}

void run_pipeline(const PipelineConfig& cfg, bool resume, const Log& log) {
  const Artifacts a{cfg.workdir};
  ensure_dir(a.dir);
  for (const auto& stage : pipeline_stages(a)) {
    if (resume && std::all_of(stage.outputs.begin(), stage.outputs.end(),
                              [](const auto& p) { return std::filesystem::exists(p); })) {
      log(std::string(stage.name) + ": outputs present, skipped");
      continue;
    }
    if (stage.name == "ingest") run_ingest(cfg, log);
    else if (stage.name == "sample") run_sample(cfg, log);
    else if (stage.name == "walks") run_walks(cfg, log);
    else if (stage.name == "embed") run_embed(cfg, log);
    else if (stage.name == "oracle") run_oracle_stage(cfg, log);
    else if (stage.name == "train") run_train(cfg, log);
    else if (stage.name == "predict") run_predict(cfg, {}, log);
    else if (stage.name == "eval") run_eval(cfg, log);
    else if (stage.name == "simindex") run_simindex(cfg, log);
  }
}

}  // namespace flowdep::app
