#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "flowdep/context.hpp"
#include "flowdep/embedding.hpp"
#include "flowdep/flow.hpp"
#include "flowdep/forest.hpp"
#include "flowdep/metrics.hpp"
#include "flowdep/oracle.hpp"
#include "flowdep/sampler.hpp"
#include "flowdep/synth.hpp"
#include "flowdep/walks.hpp"

namespace flowdep::app {

struct IngestConfig {
  std::filesystem::path input;
  FlowFormat format = FlowFormat::Csv;
  bool biflows = false;
  SplitMode split_mode = SplitMode::SameTimestamps;
};

/// Everything one pipeline run needs. Module seeds are not stored here; they
/// are derived from `seed` by module name when a stage runs.
struct PipelineConfig {
  std::uint64_t seed = 0;
  std::filesystem::path workdir = "flowdep-out";
  IngestConfig ingest;
  SamplerConfig sampler;
  WalkConfig walks;
  SplitOptions context;
  EmbeddingConfig embedding;
  OracleConfig oracle;
  ForestConfig forest;
  EvalConfig eval;
  bool unordered_labels = false;
  ScenarioConfig synth;

  PipelineConfig();

  /// Every violated constraint, across all sections.
  std::vector<std::string> violations() const;
  /// Throws ConfigError naming all violations.
  void validate() const;
};

/// Reads a YAML document with one mapping per module (ingest, sampler,
/// walks, context, embedding, oracle, forest, eval, labels, synth) plus the
/// top-level keys seed and workdir. Unknown keys are errors.
PipelineConfig load_config(const std::filesystem::path& path);
PipelineConfig parse_config(const std::string& yaml_text);

/// derive_seed(master, module) for a module name such as "walks".
std::uint64_t module_seed(const PipelineConfig& cfg, std::string_view module);

}  // namespace flowdep::app
