#include "cli.hpp"

#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "config.hpp"
#include "stages.hpp"

namespace flowdep::app {
namespace {

/// Flag values that, when given, replace the config file values.
struct Overrides {
  std::optional<std::string> workdir;
  std::optional<std::uint64_t> seed;

  std::optional<std::string> input;
  std::optional<std::string> format;
  bool biflows = false;
  std::optional<std::string> split_mode;

  std::optional<std::size_t> n_internal, m_external, k_edges;
  std::vector<std::string> internal_prefixes;
  bool exclude_scanners = false;

  std::optional<std::size_t> walk_length, walks_per_vertex, n_t;
  std::optional<Millis> walk_epsilon;
  std::optional<unsigned> threads;
  std::optional<std::size_t> context_size;

  std::optional<std::size_t> dims, epochs;
  std::optional<double> learning_rate;

  std::optional<std::uint64_t> n_t_direct, n_t_remote;
  std::optional<Millis> oracle_epsilon;

  std::optional<std::size_t> trees;
  std::optional<std::size_t> splits;
  bool unordered = false;

  std::optional<std::size_t> clients, web, db, dns;
  std::optional<double> session_rate, duration, noise_fraction;
  bool no_lr = false;
  bool no_rr = false;
};

template <typename T>
void apply(const std::optional<T>& value, T& target) {
  if (value) target = *value;
}

void apply_overrides(const Overrides& o, PipelineConfig& cfg) {
  if (o.workdir) cfg.workdir = *o.workdir;
  apply(o.seed, cfg.seed);
  if (o.input) cfg.ingest.input = *o.input;
  if (o.format) {
    if (*o.format == "csv") cfg.ingest.format = FlowFormat::Csv;
    else if (*o.format == "jsonl") cfg.ingest.format = FlowFormat::Jsonl;
    else throw UsageError("--format must be csv or jsonl");
  }
  if (o.biflows) cfg.ingest.biflows = true;
  if (o.split_mode) {
    if (*o.split_mode == "same") cfg.ingest.split_mode = SplitMode::SameTimestamps;
    else if (*o.split_mode == "distinct") cfg.ingest.split_mode = SplitMode::DistinctTimestamps;
    else throw UsageError("--split-mode must be same or distinct");
  }
  apply(o.n_internal, cfg.sampler.n_internal);
  apply(o.m_external, cfg.sampler.m_external);
  apply(o.k_edges, cfg.sampler.k_edges);
  if (!o.internal_prefixes.empty()) {
    cfg.sampler.internal_prefixes.clear();
    for (const auto& p : o.internal_prefixes) cfg.sampler.internal_prefixes.push_back(CidrPrefix::parse(p));
  }
  if (o.exclude_scanners) cfg.sampler.exclude_scanners = true;
  apply(o.walk_length, cfg.walks.walk_length);
  apply(o.walks_per_vertex, cfg.walks.walks_per_vertex);
  apply(o.n_t, cfg.walks.n_t);
  apply(o.walk_epsilon, cfg.walks.epsilon);
  apply(o.threads, cfg.walks.threads);
  apply(o.threads, cfg.forest.threads);
  apply(o.context_size, cfg.context.context_size);
  apply(o.dims, cfg.embedding.dims);
  apply(o.epochs, cfg.embedding.epochs);
  apply(o.learning_rate, cfg.embedding.learning_rate);
  apply(o.n_t_direct, cfg.oracle.n_t_direct);
  apply(o.n_t_remote, cfg.oracle.n_t_remote);
  apply(o.oracle_epsilon, cfg.oracle.epsilon);
  apply(o.trees, cfg.forest.n_trees);
  apply(o.splits, cfg.eval.n_splits);
  if (o.unordered) cfg.unordered_labels = true;
  apply(o.clients, cfg.synth.n_clients);
  apply(o.web, cfg.synth.n_web);
  apply(o.db, cfg.synth.n_db);
  apply(o.dns, cfg.synth.n_dns);
  apply(o.session_rate, cfg.synth.session_rate);
  apply(o.duration, cfg.synth.duration_s);
  apply(o.noise_fraction, cfg.synth.noise_fraction);
  if (o.no_lr) cfg.synth.lr_web_db = false;
  if (o.no_rr) cfg.synth.rr_dns_web = false;
}

void ingest_options(CLI::App& sub, Overrides& o) {
  sub.add_option("--input,-i", o.input, "Flow file to ingest");
  sub.add_option("--format", o.format, "csv or jsonl");
  sub.add_flag("--biflows", o.biflows, "Input rows are biflows");
  sub.add_option("--split-mode", o.split_mode, "same or distinct biflow timestamps");
}

void sampler_options(CLI::App& sub, Overrides& o) {
  sub.add_option("--n-internal", o.n_internal, "Internal addresses to keep");
  sub.add_option("--m-external", o.m_external, "External addresses to keep");
  sub.add_option("--k-edges", o.k_edges, "Reservoir capacity in edges");
  sub.add_option("--internal-prefix", o.internal_prefixes, "CIDR prefix of internal space (repeatable)");
  sub.add_flag("--exclude-scanners", o.exclude_scanners, "Drop scan-like addresses");
}

void walk_options(CLI::App& sub, Overrides& o) {
  sub.add_option("--walk-length", o.walk_length, "Vertices per walk");
  sub.add_option("--walks-per-vertex", o.walks_per_vertex, "Walks started at each vertex");
  sub.add_option("--epsilon", o.walk_epsilon, "Walk epsilon in ms");
  sub.add_option("--n-t", o.n_t, "Flow-count threshold for walk steps");
  sub.add_option("--threads", o.threads, "Worker threads (0 = all cores)");
}

void embed_options(CLI::App& sub, Overrides& o) {
  sub.add_option("--context-size", o.context_size, "Context window size");
  sub.add_option("--dims", o.dims, "Embedding dimensions");
  sub.add_option("--epochs", o.epochs, "Training epochs");
  sub.add_option("--learning-rate", o.learning_rate, "SGD learning rate");
}

void oracle_options(CLI::App& sub, Overrides& o) {
  sub.add_option("--n-t-direct", o.n_t_direct, "Threshold for DD and TD");
  sub.add_option("--n-t-remote", o.n_t_remote, "Threshold for RR and RR3");
  sub.add_option("--oracle-epsilon", o.oracle_epsilon, "Oracle epsilon in ms");
}

void train_options(CLI::App& sub, Overrides& o) {
  sub.add_option("--trees", o.trees, "Trees in the forest");
  sub.add_flag("--unordered", o.unordered, "Treat dependency pairs as unordered");
}

void synth_options(CLI::App& sub, Overrides& o) {
  sub.add_option("--clients", o.clients);
  sub.add_option("--web", o.web);
  sub.add_option("--db", o.db);
  sub.add_option("--dns", o.dns);
  sub.add_option("--session-rate", o.session_rate, "Sessions per simulated second");
  sub.add_option("--duration", o.duration, "Simulated seconds");
  sub.add_option("--noise-fraction", o.noise_fraction, "Share of noise flows in the trace");
  sub.add_flag("--no-lr", o.no_lr, "Do not plant web->db containment");
  sub.add_flag("--no-rr", o.no_rr, "Do not plant dns->web sequences");
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Service dependency detection from unidirectional IP flows", "flowdep"};
  app.require_subcommand(1);
  app.fallthrough();
  app.set_version_flag("--version", "flowdep 0.1.0");

  Overrides o;
  std::string config_path;
  bool quiet = false;
  app.add_option("--config,-c", config_path, "YAML configuration file");
  app.add_option("--workdir,-w", o.workdir, "Directory holding stage artifacts");
  app.add_option("--seed,-s", o.seed, "Master seed");
  app.add_flag("--quiet,-q", quiet, "Suppress progress output");

  auto* ingest = app.add_subcommand("ingest", "Parse and filter flows into flows.csv");
  ingest_options(*ingest, o);
  auto* sample = app.add_subcommand("sample", "Select addresses and sample graph.jsonl");
  sampler_options(*sample, o);
  auto* walks = app.add_subcommand("walks", "Generate positive and negative walks");
  walk_options(*walks, o);
  auto* embed = app.add_subcommand("embed", "Train the skip-gram embedding");
  embed_options(*embed, o);
  auto* oracle = app.add_subcommand("oracle", "Enumerate ground-truth dependencies");
  oracle_options(*oracle, o);
  auto* train = app.add_subcommand("train", "Build labels and train the forest");
  train_options(*train, o);
  auto* predict = app.add_subcommand("predict", "Score candidate pairs");
  std::string pairs_file;
  predict->add_option("--pairs", pairs_file, "CSV of src,dst pairs (default: labels.csv)");
  auto* eval = app.add_subcommand("eval", "Repeated train/test evaluation");
  eval->add_option("--splits", o.splits, "Splits per test fraction");
  train_options(*eval, o);
  auto* simindex = app.add_subcommand("simindex", "Similarity-index baseline and correlations");
  auto* synth = app.add_subcommand("synth", "Generate a synthetic trace with planted dependencies");
  synth_options(*synth, o);
  std::string flows_out;
  std::string truth_out;
  synth->add_option("--flows-out", flows_out, "Output flow CSV (default: <workdir>/synth_flows.csv)");
  synth->add_option("--truth-out", truth_out, "Planted truth CSV (default: <workdir>/planted.csv)");
  auto* pipeline = app.add_subcommand("pipeline", "Run every stage in order");
  bool resume = false;
  pipeline->add_flag("--resume", resume, "Skip stages whose outputs already exist");
  ingest_options(*pipeline, o);
  sampler_options(*pipeline, o);
  walk_options(*pipeline, o);
  embed_options(*pipeline, o);
  oracle_options(*pipeline, o);
  train_options(*pipeline, o);
  pipeline->add_option("--splits", o.splits, "Splits per test fraction");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  const Log log = [&](const std::string& line) {
    if (!quiet) err << "flowdep: " << line << '\n';
  };

  PipelineConfig cfg;
  try {
    if (!config_path.empty()) {
      if (!std::filesystem::exists(config_path)) throw UsageError("missing config file: " + config_path);
      cfg = load_config(config_path);
    }
    apply_overrides(o, cfg);
    cfg.validate();
  } catch (const flowdep::Error& e) {
    err << "flowdep: " << e.what() << '\n';
    return kExitUsage;
  }

  try {
    if (*ingest) run_ingest(cfg, log);
    else if (*sample) run_sample(cfg, log);
    else if (*walks) run_walks(cfg, log);
    else if (*embed) run_embed(cfg, log);
    else if (*oracle) run_oracle_stage(cfg, log);
    else if (*train) run_train(cfg, log);
    else if (*predict) run_predict(cfg, pairs_file, log);
    else if (*eval) run_eval(cfg, log);
    else if (*simindex) run_simindex(cfg, log);
    else if (*synth) {
      const Artifacts a{cfg.workdir};
      run_synth(cfg, flows_out.empty() ? a.dir / "synth_flows.csv" : std::filesystem::path(flows_out),
                truth_out.empty() ? a.dir / "planted.csv" : std::filesystem::path(truth_out), log);
    } else if (*pipeline) {
      run_pipeline(cfg, resume, log);
    }
  } catch (const UsageError& e) {
    err << "flowdep: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "flowdep: error: " << e.what() << '\n';
    return kExitStageFailure;
  }
  return kExitOk;
}

}  // namespace flowdep::app
