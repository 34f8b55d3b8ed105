#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "sentrisk/design.hpp"
#include "sentrisk/hbart.hpp"

namespace sentrisk {

// Settings shared by the pipeline stages. Loaded from an INI-style config
// file ([section] headers, key = value lines, # or ; comments); every key
// must be known. Command-line flags override file values.
struct PipelineConfig {
  // [data]
  std::string data_path;
  std::string schema_path;
  std::string out_dir = ".";
  double train_fraction = 0.8;
  // [split]
  std::uint64_t seed_split = 1;
  // [stage1]
  HbartConfig stage1;
  std::uint64_t seed_mcmc = 2;
  // [flag]
  double alpha = 0.1;
  std::string bin_column;  // optional factor for the flag-rate table
  // [stage2]
  std::size_t stage2_grid = 100;
  std::size_t stage2_folds = 10;
  double stage2_lambda_min_ratio = 1e-4;
  std::uint64_t seed_cv = 3;
  std::vector<std::string> exclude;        // factors/columns left out of stage 2
  std::vector<Interaction> interactions;   // factor pairs, expanded pairwise
  // [sweep]
  std::vector<double> sweep_alphas = {0.10, 0.15, 0.20, 0.25};
  // [synth]
  std::size_t synth_n = 20000;
  std::uint64_t synth_seed = 4;
  double synth_leak_shift = 0.0;

  void validate_common() const;  // paths and ranges shared by all stages
};

PipelineConfig load_pipeline_config(const std::string& path);

// Artifacts written by one stage run (paths relative to out_dir) plus the
// manifest fingerprint embedded in each of them.
struct StageResult {
  std::vector<std::string> files;
  std::string manifest_hash;
};

StageResult run_synth(const PipelineConfig& cfg);
StageResult run_train_stage1(const PipelineConfig& cfg);
StageResult run_flag(const PipelineConfig& cfg);
StageResult run_train_stage2(const PipelineConfig& cfg);
StageResult run_evaluate(const PipelineConfig& cfg);
StageResult run_sweep_alpha(const PipelineConfig& cfg);

}  // namespace sentrisk
