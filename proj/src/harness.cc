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

#include "shuffle_bandits/harness.h"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <fstream>
#include <map>
#include <sstream>
#include <thread>
#include <utility>

#include "absl/strings/ascii.h"
#include "absl/strings/numbers.h"
#include "absl/strings/str_cat.h"
#include "absl/strings/str_split.h"
#include "nlohmann/json.hpp"
#include "shuffle_bandits/format.h"

namespace shuffle_bandits {
namespace {

constexpr absl::string_view kVersion = "0.1.0";

absl::Status LineError(int line, absl::string_view key, absl::string_view what) {
  return absl::InvalidArgumentError(
      absl::StrCat("line ", line, ": ", key, ": ", what));
}

std::vector<std::string> SplitList(absl::string_view value) {
  std::vector<std::string> items;
  for (absl::string_view piece : absl::StrSplit(value, ',')) {
    items.emplace_back(absl::StripAsciiWhitespace(piece));
  }
  return items;
}

absl::StatusOr<std::vector<double>> ParseDoubles(absl::string_view value) {
  std::vector<double> out;
  for (const std::string& item : SplitList(value)) {
    double x = 0.0;
    if (!absl::SimpleAtod(item, &x)) {
      return absl::InvalidArgumentError(
          absl::StrCat("'", item, "' is not a number"));
    }
    out.push_back(x);
  }
  return out;
}

absl::StatusOr<std::vector<std::int64_t>> ParseIntegers(
    absl::string_view value) {
  std::vector<std::int64_t> out;
  for (const std::string& item : SplitList(value)) {
    std::int64_t x = 0;
    if (!absl::SimpleAtoi(item, &x)) {
      return absl::InvalidArgumentError(
          absl::StrCat("'", item, "' is not an integer"));
    }
    out.push_back(x);
  }
  return out;
}

absl::StatusOr<std::int64_t> ParseInteger(absl::string_view value) {
  std::int64_t x = 0;
  if (!absl::SimpleAtoi(absl::StripAsciiWhitespace(value), &x)) {
    return absl::InvalidArgumentError(
        absl::StrCat("'", value, "' is not an integer"));
  }
  return x;
}

absl::StatusOr<PrivacySetting> ParsePrivacyPair(absl::string_view item) {
  std::vector<absl::string_view> parts = absl::StrSplit(item, ':');
  PrivacySetting setting;
  if (parts.size() != 2 ||
      !absl::SimpleAtod(absl::StripAsciiWhitespace(parts[0]),
                        &setting.epsilon) ||
      !absl::SimpleAtod(absl::StripAsciiWhitespace(parts[1]),
                        &setting.delta)) {
    return absl::InvalidArgumentError(
        absl::StrCat("'", item, "' is not an epsilon:delta pair"));
  }
  return setting;
}

std::string EpsilonField(const ExperimentCell& cell) {
  return cell.privacy ? FormatDouble(cell.privacy->epsilon) : "none";
}

std::string DeltaField(const ExperimentCell& cell) {
  return cell.privacy ? FormatDouble(cell.privacy->delta) : "none";
}

// Cumulative regret at user count c. Traces always contain c: either it is a
// configured checkpoint or the trace covers every pull.
double RegretAt(const RegretTrace& trace, std::int64_t c) {
  auto it = std::lower_bound(trace.checkpoints.begin(),
                             trace.checkpoints.end(), c);
  return trace.cumulative_regret[static_cast<std::size_t>(
      it - trace.checkpoints.begin())];
}

absl::Status WriteFile(const std::filesystem::path& path,
                       absl::string_view contents) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) {
    return absl::UnavailableError(
        absl::StrCat("cannot open ", path.string(), " for writing"));
  }
  out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
  out.close();
  if (!out) {
    return absl::UnavailableError(
        absl::StrCat("failed writing ", path.string()));
  }
  return absl::OkStatus();
}

}  // namespace

absl::Status ValidateConfig(const ExperimentConfig& config) {
  if (config.k < 1) {
    return absl::InvalidArgumentError(
        absl::StrCat("k: must be >= 1, got ", config.k));
  }
  absl::StatusOr<BanditInstance> instance =
      MakeInstance(config.k, config.means, config.horizon);
  if (!instance.ok()) {
    return absl::InvalidArgumentError(
        absl::StrCat("means/horizon: ", instance.status().message()));
  }
  if (config.variants.empty()) {
    return absl::InvalidArgumentError("variants: at least one is required");
  }
  const bool any_private =
      std::any_of(config.variants.begin(), config.variants.end(), IsPrivate);
  if (any_private && config.privacy.empty()) {
    return absl::InvalidArgumentError(
        "privacy: private variants need at least one epsilon:delta pair");
  }
  for (const PrivacySetting& p : config.privacy) {
    absl::StatusOr<PrivacyParams> params =
        PrivacyParams::Create(p.epsilon, p.delta);
    if (!params.ok()) {
      return absl::InvalidArgumentError(
          absl::StrCat("privacy: ", params.status().message()));
    }
  }
  if (config.seeds < 1) {
    return absl::InvalidArgumentError(
        absl::StrCat("seeds: must be >= 1, got ", config.seeds));
  }
  if (config.output.empty()) {
    return absl::InvalidArgumentError("output: a directory is required");
  }
  if (config.checkpoints.empty()) {
    return absl::InvalidArgumentError("checkpoints: list is empty");
  }
  for (std::size_t i = 0; i < config.checkpoints.size(); ++i) {
    const std::int64_t c = config.checkpoints[i];
    if (c < 1 || c > config.horizon) {
      return absl::InvalidArgumentError(absl::StrCat(
          "checkpoints: ", c, " is outside [1, ", config.horizon, "]"));
    }
    if (i > 0 && c <= config.checkpoints[i - 1]) {
      return absl::InvalidArgumentError(absl::StrCat(
          "checkpoints: must be sorted and distinct, but ", c, " follows ",
          config.checkpoints[i - 1]));
    }
  }
  for (const auto& [name, batch] :
       {std::pair{"sdp_ae_batch", config.sdp_ae_batch},
        std::pair{"baseline_batch", config.baseline_batch}}) {
    if (batch.has_value() && *batch < 1) {
      return absl::InvalidArgumentError(
          absl::StrCat(name, ": must be >= 1, got ", *batch));
    }
  }
  return absl::OkStatus();
}

absl::StatusOr<ExperimentConfig> ParseConfigText(absl::string_view text) {
  ExperimentConfig config;
  std::map<std::string, int> lines;
  int line_number = 0;
  for (absl::string_view raw : absl::StrSplit(text, '\n')) {
    ++line_number;
    absl::string_view line = raw;
    if (auto hash = line.find('#'); hash != absl::string_view::npos) {
      line = line.substr(0, hash);
    }
    line = absl::StripAsciiWhitespace(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == absl::string_view::npos) {
      return absl::InvalidArgumentError(absl::StrCat(
          "line ", line_number, ": expected 'key = value', got '", line, "'"));
    }
    const std::string key(absl::StripAsciiWhitespace(line.substr(0, eq)));
    const absl::string_view value =
        absl::StripAsciiWhitespace(line.substr(eq + 1));
    if (lines.count(key) != 0) {
      return LineError(line_number, key,
                       absl::StrCat("already set on line ", lines[key]));
    }
    lines[key] = line_number;

    absl::Status status;
    if (key == "k") {
      absl::StatusOr<std::int64_t> k = ParseInteger(value);
      if (k.ok()) config.k = static_cast<int>(*k);
      status = k.status();
    } else if (key == "means") {
      absl::StatusOr<std::vector<double>> means = ParseDoubles(value);
      if (means.ok()) {
        for (std::size_t a = 0; a < means->size(); ++a) {
          const double mu = (*means)[a];
          if (!(mu >= 0.0 && mu <= 1.0)) {
            return LineError(line_number, key,
                             absl::StrCat("means[", a, "] = ", mu,
                                          " is outside [0, 1]"));
          }
        }
        config.means = *std::move(means);
      }
      status = means.status();
    } else if (key == "horizon") {
      absl::StatusOr<std::int64_t> t = ParseInteger(value);
      if (t.ok()) config.horizon = *t;
      status = t.status();
    } else if (key == "variants") {
      for (const std::string& item : SplitList(value)) {
        absl::StatusOr<Variant> v = ParseVariant(item);
        if (!v.ok()) return LineError(line_number, key, v.status().message());
        config.variants.push_back(*v);
      }
    } else if (key == "privacy") {
      for (const std::string& item : SplitList(value)) {
        absl::StatusOr<PrivacySetting> p = ParsePrivacyPair(item);
        if (!p.ok()) return LineError(line_number, key, p.status().message());
        config.privacy.push_back(*p);
      }
    } else if (key == "seeds") {
      absl::StatusOr<std::int64_t> s = ParseInteger(value);
      if (s.ok()) config.seeds = *s;
      status = s.status();
    } else if (key == "master_seed") {
      std::uint64_t seed = 0;
      if (absl::SimpleAtoi(value, &seed)) {
        config.master_seed = seed;
      } else {
        status = absl::InvalidArgumentError(
            absl::StrCat("'", value, "' is not an unsigned 64-bit integer"));
      }
    } else if (key == "output") {
      config.output = std::filesystem::path(std::string(value));
    } else if (key == "checkpoints") {
      absl::StatusOr<std::vector<std::int64_t>> c = ParseIntegers(value);
      if (c.ok()) config.checkpoints = *std::move(c);
      status = c.status();
    } else if (key == "sdp_ae_batch" || key == "baseline_batch") {
      absl::StatusOr<std::int64_t> m = ParseInteger(value);
      if (m.ok()) {
        (key == "sdp_ae_batch" ? config.sdp_ae_batch : config.baseline_batch) =
            *m;
      }
      status = m.status();
    } else {
      return LineError(line_number, key, "unknown key");
    }
    if (!status.ok()) return LineError(line_number, key, status.message());
  }

  for (const char* required :
       {"k", "means", "horizon", "variants", "seeds", "output"}) {
    if (lines.count(required) == 0) {
      return absl::InvalidArgumentError(
          absl::StrCat(required, ": missing required key"));
    }
  }
  if (config.checkpoints.empty() && lines.count("checkpoints") == 0) {
    config.checkpoints = {config.horizon};
  }

  absl::Status valid = ValidateConfig(config);
  if (!valid.ok()) {
    // Point at the offending line when the message names a single key.
    const std::string message(valid.message());
    const std::string key = message.substr(0, message.find(':'));
    if (lines.count(key) != 0) {
      return absl::InvalidArgumentError(
          absl::StrCat("line ", lines[key], ": ", message));
    }
    return valid;
  }
  return config;
}

absl::StatusOr<ExperimentConfig> ParseConfig(
    const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    return absl::NotFoundError(
        absl::StrCat("cannot read config ", path.string()));
  }
  std::stringstream buffer;
  buffer << in.rdbuf();
  absl::StatusOr<ExperimentConfig> config = ParseConfigText(buffer.str());
  if (!config.ok()) {
    return absl::InvalidArgumentError(
        absl::StrCat(path.string(), ": ", config.status().message()));
  }
  return config;
}

absl::StatusOr<std::vector<ExperimentCell>> BuildCells(
    const ExperimentConfig& config) {
  std::vector<ExperimentCell> cells;
  for (Variant variant : config.variants) {
    VariantOptions options;
    if (variant == Variant::kSdpAe) options.constant_batch = config.sdp_ae_batch;
    if (variant == Variant::kAeBaseline) {
      options.constant_batch = config.baseline_batch;
    }
    auto add = [&](std::optional<PrivacySetting> setting) -> absl::Status {
      std::optional<PrivacyParams> params;
      if (setting) {
        absl::StatusOr<PrivacyParams> p =
            PrivacyParams::Create(setting->epsilon, setting->delta);
        if (!p.ok()) return p.status();
        params = *p;
      }
      absl::StatusOr<EngineConfig> engine =
          MakeEngineConfig(variant, params, config.horizon, options);
      if (!engine.ok()) return engine.status();
      engine->checkpoints = config.checkpoints;
      cells.push_back({variant, setting, *std::move(engine)});
      return absl::OkStatus();
    };
    if (IsPrivate(variant)) {
      for (const PrivacySetting& setting : config.privacy) {
        if (absl::Status s = add(setting); !s.ok()) return s;
      }
    } else {
      if (absl::Status s = add(std::nullopt); !s.ok()) return s;
    }
  }
  return cells;
}

absl::StatusOr<ExperimentResult> RunExperiment(const ExperimentConfig& config,
                                               const RunOptions& options) {
  if (absl::Status valid = ValidateConfig(config); !valid.ok()) return valid;
  absl::StatusOr<BanditInstance> instance =
      MakeInstance(config.k, config.means, config.horizon);
  if (!instance.ok()) return instance.status();
  absl::StatusOr<std::vector<ExperimentCell>> cells = BuildCells(config);
  if (!cells.ok()) return cells.status();

  ExperimentResult result;
  result.cells = *std::move(cells);
  for (ExperimentCell& cell : result.cells) {
    cell.engine.full_trace = options.full_trace;
  }
  const std::size_t seeds = static_cast<std::size_t>(config.seeds);
  result.episodes.resize(result.cells.size() * seeds);
  for (std::size_t i = 0; i < result.episodes.size(); ++i) {
    result.episodes[i].cell = i / seeds;
    result.episodes[i].seed_index = static_cast<std::int64_t>(i % seeds);
  }

  std::atomic<std::size_t> next{0};
  auto worker = [&]() {
    for (std::size_t i = next++; i < result.episodes.size(); i = next++) {
      EpisodeRecord& episode = result.episodes[i];
      const SeedSpec seed{config.master_seed,
                          static_cast<std::uint64_t>(episode.seed_index)};
      try {
        absl::StatusOr<RegretTrace> trace =
            RunEpisode(*instance, result.cells[episode.cell].engine, seed);
        if (trace.ok()) {
          episode.trace = *std::move(trace);
        } else {
          episode.status = trace.status();
        }
      } catch (const std::exception& e) {
        episode.status = absl::InternalError(
            absl::StrCat("episode threw: ", e.what()));
      }
    }
  };
  const int threads = std::max(1, options.threads);
  if (threads == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(threads));
    for (int t = 0; t < threads; ++t) pool.emplace_back(worker);
    for (std::thread& t : pool) t.join();
  }

  for (const EpisodeRecord& e : result.episodes) {
    if (!e.status.ok()) ++result.failed_episodes;
  }
  result.rows = Aggregate(config, result.cells, result.episodes);
  return result;
}

std::vector<AggregateRow> Aggregate(const ExperimentConfig& config,
                                    const std::vector<ExperimentCell>& cells,
                                    const std::vector<EpisodeRecord>& episodes) {
  std::vector<AggregateRow> rows;
  for (std::size_t cell = 0; cell < cells.size(); ++cell) {
    std::vector<const EpisodeRecord*> members;
    for (const EpisodeRecord& e : episodes) {
      if (e.cell == cell && e.status.ok()) members.push_back(&e);
    }
    std::sort(members.begin(), members.end(),
              [](const EpisodeRecord* a, const EpisodeRecord* b) {
                return a->seed_index < b->seed_index;
              });
    std::int64_t violations = 0;
    for (const EpisodeRecord* e : members) {
      if (e->trace.clean_event_violated) ++violations;
    }
    for (std::int64_t checkpoint : config.checkpoints) {
      AggregateRow row;
      row.cell = cell;
      row.checkpoint = checkpoint;
      row.clean_violations = violations;
      const auto n = static_cast<double>(members.size());
      if (!members.empty()) {
        double sum = 0.0;
        row.min_regret = std::numeric_limits<double>::infinity();
        row.max_regret = -std::numeric_limits<double>::infinity();
        for (const EpisodeRecord* e : members) {
          const double r = RegretAt(e->trace, checkpoint);
          sum += r;
          row.min_regret = std::min(row.min_regret, r);
          row.max_regret = std::max(row.max_regret, r);
        }
        row.mean_regret = sum / n;
        if (row.min_regret == row.max_regret) {
          row.mean_regret = row.min_regret;
        } else {
          double squares = 0.0;
          for (const EpisodeRecord* e : members) {
            const double d = RegretAt(e->trace, checkpoint) - row.mean_regret;
            squares += d * d;
          }
          row.stderr_regret = std::sqrt(squares / (n - 1.0)) / std::sqrt(n);
        }
        // Rounding in the mean must not escape the observed range.
        row.mean_regret =
            std::clamp(row.mean_regret, row.min_regret, row.max_regret);
      }
      rows.push_back(row);
    }
  }
  return rows;
}

std::string ResultsCsv(const ExperimentConfig& /*config*/,
                       const ExperimentResult& result) {
  std::string out = absl::StrCat(kResultsHeader, "\n");
  for (const AggregateRow& row : result.rows) {
    const ExperimentCell& cell = result.cells[row.cell];
    absl::StrAppend(&out, VariantName(cell.variant), ",", EpsilonField(cell),
                    ",", DeltaField(cell), ",", row.checkpoint, ",",
                    FormatDouble(row.mean_regret), ",",
                    FormatDouble(row.stderr_regret), ",",
                    FormatDouble(row.min_regret), ",",
                    FormatDouble(row.max_regret), ",", row.clean_violations,
                    "\n");
  }
  return out;
}

std::string PlotDataCsv(const ExperimentConfig& config,
                        const ExperimentResult& result) {
  std::string out =
      "variant,epsilon,delta,seed,checkpoint,cumulative_regret\n";
  for (const EpisodeRecord& e : result.episodes) {
    if (!e.status.ok()) continue;
    const ExperimentCell& cell = result.cells[e.cell];
    for (std::int64_t checkpoint : config.checkpoints) {
      absl::StrAppend(&out, VariantName(cell.variant), ",", EpsilonField(cell),
                      ",", DeltaField(cell), ",", e.seed_index, ",",
                      checkpoint, ",",
                      FormatDouble(RegretAt(e.trace, checkpoint)), "\n");
    }
  }
  return out;
}

std::string TraceFileName(const ExperimentConfig& config,
                          const ExperimentResult& result,
                          const EpisodeRecord& episode) {
  const ExperimentCell& cell = result.cells[episode.cell];
  std::string eps = EpsilonField(cell);
  if (cell.privacy) {
    const auto shared = std::count_if(
        config.privacy.begin(), config.privacy.end(),
        [&](const PrivacySetting& p) {
          return p.epsilon == cell.privacy->epsilon;
        });
    if (shared > 1) absl::StrAppend(&eps, "_d", DeltaField(cell));
  }
  return absl::StrCat(VariantName(cell.variant), "_", eps, "_",
                      episode.seed_index, ".csv");
}

std::string ManifestJson(const ExperimentConfig& config,
                         const ExperimentResult& result,
                         const RunOptions& options) {
  using nlohmann::ordered_json;
  ordered_json manifest;
  manifest["tool"] = "shuffle_bandits";
  manifest["version"] = kVersion;
  ordered_json echo;
  echo["k"] = config.k;
  echo["means"] = config.means;
  echo["horizon"] = config.horizon;
  ordered_json variants = ordered_json::array();
  for (Variant v : config.variants) variants.push_back(std::string(VariantName(v)));
  echo["variants"] = variants;
  ordered_json privacy = ordered_json::array();
  for (const PrivacySetting& p : config.privacy) {
    privacy.push_back({{"epsilon", p.epsilon}, {"delta", p.delta}});
  }
  echo["privacy"] = privacy;
  echo["seeds"] = config.seeds;
  echo["master_seed"] = config.master_seed;
  echo["output"] = config.output.generic_string();
  echo["checkpoints"] = config.checkpoints;
  if (config.sdp_ae_batch) echo["sdp_ae_batch"] = *config.sdp_ae_batch;
  if (config.baseline_batch) echo["baseline_batch"] = *config.baseline_batch;
  manifest["config"] = echo;
  manifest["full_trace"] = options.full_trace;
  manifest["rng"] = "mt19937_64, splitmix64 stream derivation";

  ordered_json cells = ordered_json::array();
  for (std::size_t c = 0; c < result.cells.size(); ++c) {
    const ExperimentCell& cell = result.cells[c];
    ordered_json entry;
    entry["variant"] = std::string(VariantName(cell.variant));
    if (cell.engine.privacy) {
      entry["epsilon"] = cell.engine.privacy->epsilon();
      entry["delta"] = cell.engine.privacy->delta();
      entry["tau"] = cell.engine.privacy->tau();
      entry["sigma"] = cell.engine.privacy->sigma();
    }
    entry["schedule"] =
        cell.engine.schedule.kind() == BatchSchedule::Kind::kDoubling
            ? "doubling"
            : absl::StrCat("constant:", cell.engine.schedule.constant_m());
    std::int64_t violations = 0;
    std::int64_t optimal_eliminated = 0;
    ordered_json failures = ordered_json::array();
    for (const EpisodeRecord& e : result.episodes) {
      if (e.cell != c) continue;
      if (!e.status.ok()) {
        failures.push_back({{"seed", e.seed_index},
                            {"error", std::string(e.status.message())}});
        continue;
      }
      if (e.trace.clean_event_violated) ++violations;
      if (e.trace.optimal_arm_eliminated) ++optimal_eliminated;
    }
    entry["clean_violations"] = violations;
    entry["optimal_arm_eliminations"] = optimal_eliminated;
    entry["failed_episodes"] = failures;
    cells.push_back(entry);
  }
  manifest["cells"] = cells;
  manifest["failed_episodes"] = result.failed_episodes;
  return manifest.dump(2) + "\n";
}

absl::Status EmitOutputs(const ExperimentResult& result,
                         const ExperimentConfig& config,
                         const RunOptions& options) {
  std::error_code ec;
  const std::filesystem::path traces = config.output / "traces";
  std::filesystem::create_directories(traces, ec);
  if (ec) {
    return absl::UnavailableError(absl::StrCat(
        "cannot create ", traces.string(), ": ", ec.message()));
  }
  if (absl::Status s = WriteFile(config.output / "results.csv",
                                 ResultsCsv(config, result));
      !s.ok()) {
    return s;
  }
  if (absl::Status s = WriteFile(config.output / "plotdata.csv",
                                 PlotDataCsv(config, result));
      !s.ok()) {
    return s;
  }
  if (absl::Status s = WriteFile(config.output / "manifest.json",
                                 ManifestJson(config, result, options));
      !s.ok()) {
    return s;
  }
  for (const EpisodeRecord& e : result.episodes) {
    if (!e.status.ok()) continue;
    std::string csv = "checkpoint,cumulative_regret\n";
    for (std::size_t i = 0; i < e.trace.checkpoints.size(); ++i) {
      absl::StrAppend(&csv, e.trace.checkpoints[i], ",",
                      FormatDouble(e.trace.cumulative_regret[i]), "\n");
    }
    if (absl::Status s =
            WriteFile(traces / TraceFileName(config, result, e), csv);
        !s.ok()) {
      return s;
    }
  }
  return absl::OkStatus();
}

}  // namespace shuffle_bandits
