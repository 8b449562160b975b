// Copyright 2026 The Shuffle Bandits Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Seeded regret experiments over the elimination engines.
//
// Config files are plain text, one `key = value` per line, `#` comments:
//
//   k           = 5
//   means       = 0.75, 0.625, 0.5, 0.375, 0.25
//   horizon     = 10000
//   variants    = sdp-ae, vb-sdp-ae, ae-baseline
//   privacy     = 1.0:1e-5, 0.25:1e-5        # epsilon:delta pairs
//   seeds       = 100
//   master_seed = 2024
//   output      = out/k5
//   checkpoints = 1000, 5000, 10000          # default: horizon
//   sdp_ae_batch   = 42                      # optional, default ceil(sigma)
//   baseline_batch = 10                      # optional, default 1
//
// Outputs (under `output`): results.csv, plotdata.csv, manifest.json and one
// checkpointed trace per episode in traces/.

#ifndef SHUFFLE_BANDITS_HARNESS_H_
#define SHUFFLE_BANDITS_HARNESS_H_

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "absl/status/status.h"
#include "absl/status/statusor.h"
#include "absl/strings/string_view.h"
#include "shuffle_bandits/bandit.h"
#include "shuffle_bandits/env.h"
#include "shuffle_bandits/mechanism.h"

namespace shuffle_bandits {

struct PrivacySetting {
  double epsilon = 0.0;
  double delta = 0.0;
};

struct ExperimentConfig {
  int k = 0;
  std::vector<double> means;
  std::int64_t horizon = 0;
  std::vector<Variant> variants;
  std::vector<PrivacySetting> privacy;
  std::int64_t seeds = 1;
  std::uint64_t master_seed = 0;
  std::filesystem::path output;
  std::vector<std::int64_t> checkpoints;
  std::optional<std::int64_t> sdp_ae_batch;
  std::optional<std::int64_t> baseline_batch;
};

// Parses and validates; errors carry "line N:" context where one exists.
absl::StatusOr<ExperimentConfig> ParseConfigText(absl::string_view text);
absl::StatusOr<ExperimentConfig> ParseConfig(const std::filesystem::path& path);

// Cross-field checks shared by the parser and programmatic callers.
absl::Status ValidateConfig(const ExperimentConfig& config);

struct RunOptions {
  int threads = 1;
  bool full_trace = false;
};

// One (variant, privacy setting) combination. The baseline gets a single
// cell with no privacy setting.
struct ExperimentCell {
  Variant variant = Variant::kAeBaseline;
  std::optional<PrivacySetting> privacy;
  EngineConfig engine;
};

struct EpisodeRecord {
  std::size_t cell = 0;
  std::int64_t seed_index = 0;
  absl::Status status;
  RegretTrace trace;
};

struct AggregateRow {
  std::size_t cell = 0;
  std::int64_t checkpoint = 0;
  double mean_regret = 0.0;
  double stderr_regret = 0.0;
  double min_regret = 0.0;
  double max_regret = 0.0;
  std::int64_t clean_violations = 0;
};

struct ExperimentResult {
  std::vector<ExperimentCell> cells;
  // Cell-major, seed-minor.
  std::vector<EpisodeRecord> episodes;
  // Cell-major, checkpoint-minor.
  std::vector<AggregateRow> rows;
  std::int64_t failed_episodes = 0;
};

absl::StatusOr<std::vector<ExperimentCell>> BuildCells(
    const ExperimentConfig& config);

// Runs every cell for every seed. Episodes are independent and may run on
// several threads; results are collected by index, so the outcome does not
// depend on `threads`. A failing episode is recorded, not fatal.
absl::StatusOr<ExperimentResult> RunExperiment(const ExperimentConfig& config,
                                               const RunOptions& options = {});

// Mean, sample-stddev / sqrt(n), min and max over successful episodes.
std::vector<AggregateRow> Aggregate(const ExperimentConfig& config,
                                    const std::vector<ExperimentCell>& cells,
                                    const std::vector<EpisodeRecord>& episodes);

inline constexpr absl::string_view kResultsHeader =
    "variant,epsilon,delta,checkpoint,mean_regret,stderr,min,max,"
    "clean_violations";

std::string ResultsCsv(const ExperimentConfig& config,
                       const ExperimentResult& result);
std::string PlotDataCsv(const ExperimentConfig& config,
                        const ExperimentResult& result);
std::string ManifestJson(const ExperimentConfig& config,
                         const ExperimentResult& result,
                         const RunOptions& options);

// traces/<variant>_<eps>_<seed>.csv, with the delta spliced in when two
// settings share an epsilon.
std::string TraceFileName(const ExperimentConfig& config,
                          const ExperimentResult& result,
                          const EpisodeRecord& episode);

// Writes every output file under config.output.
absl::Status EmitOutputs(const ExperimentResult& result,
                         const ExperimentConfig& config,
                         const RunOptions& options = {});

}  // namespace shuffle_bandits

#endif  // SHUFFLE_BANDITS_HARNESS_H_
