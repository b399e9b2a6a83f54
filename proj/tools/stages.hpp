#pragma once

#include <filesystem>
#include <functional>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include "config.hpp"
#include "flowdep/error.hpp"

namespace flowdep::app {

/// File names of the stage artifacts inside the work directory.
struct Artifacts {
  std::filesystem::path dir;

  std::filesystem::path flows() const { return dir / "flows.csv"; }
  std::filesystem::path graph() const { return dir / "graph.jsonl"; }
  std::filesystem::path walks() const { return dir / "walks.jsonl"; }
  std::filesystem::path embedding() const { return dir / "embedding.bin"; }
  std::filesystem::path embedding_manifest() const { return dir / "embedding.json"; }
  std::filesystem::path ground_truth() const { return dir / "ground_truth.csv"; }
  std::filesystem::path labels() const { return dir / "labels.csv"; }
  std::filesystem::path model() const { return dir / "model.json"; }
  std::filesystem::path predictions() const { return dir / "predictions.csv"; }
  std::filesystem::path eval_report() const { return dir / "eval.json"; }
  std::filesystem::path roc_curve() const { return dir / "roc.csv"; }
  std::filesystem::path pr_curve() const { return dir / "pr.csv"; }
  std::filesystem::path simindex() const { return dir / "simindex.csv"; }
  std::filesystem::path simindex_summary() const { return dir / "simindex_summary.json"; }
};

/// Progress sink; stages report one line per notable event.
using Log = std::function<void(const std::string&)>;

/// Caller mistakes (missing inputs, bad flags). The CLI maps these to the
/// usage exit code; every other error is a stage failure.
class UsageError : public flowdep::Error {
 public:
  using Error::Error;
};

/// Throws UsageError naming the path when it does not exist.
void require_file(const std::filesystem::path& path);

void run_ingest(const PipelineConfig& cfg, const Log& log);
void run_sample(const PipelineConfig& cfg, const Log& log);
void run_walks(const PipelineConfig& cfg, const Log& log);
void run_embed(const PipelineConfig& cfg, const Log& log);
void run_oracle_stage(const PipelineConfig& cfg, const Log& log);
void run_train(const PipelineConfig& cfg, const Log& log);
/// Scores `pairs_file` (src,dst[,label] CSV) or, when empty, the label set.
void run_predict(const PipelineConfig& cfg, const std::filesystem::path& pairs_file,
                 const Log& log);
void run_eval(const PipelineConfig& cfg, const Log& log);
void run_simindex(const PipelineConfig& cfg, const Log& log);
/// Writes the generated trace and its planted truth.
void run_synth(const PipelineConfig& cfg, const std::filesystem::path& flows_out,
               const std::filesystem::path& truth_out, const Log& log);

struct StageInfo {
  std::string_view name;
  std::vector<std::filesystem::path> outputs;
};

/// Stage order of `pipeline`.
std::vector<StageInfo> pipeline_stages(const Artifacts& artifacts);

/// Runs every stage in order. With `resume`, stages whose outputs all exist
/// are skipped.
void run_pipeline(const PipelineConfig& cfg, bool resume, const Log& log);

}  // namespace flowdep::app
