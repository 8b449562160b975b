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

// shuffle_bandits command line.
//
//   shuffle_bandits run --config exp.cfg [--threads N] [--full-trace]
//   shuffle_bandits audit --m 1,5,tau,4tau --eps 0.3,0.9 --delta 1e-2,1e-5
//   shuffle_bandits mechanism sample --m 300 --eps 0.8 --delta 1e-3 --n 1000
//
// Exit status: 0 success, 1 invalid input, 2 runtime failure.

#include <cstdint>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "absl/status/status.h"
#include "shuffle_bandits/audit.h"
#include "shuffle_bandits/format.h"
#include "shuffle_bandits/harness.h"
#include "shuffle_bandits/mechanism.h"
#include "shuffle_bandits/random.h"

namespace {

using namespace shuffle_bandits;

constexpr int kOk = 0;
constexpr int kInvalid = 1;
constexpr int kRuntime = 2;

int Fail(const absl::Status& status, int code) {
  std::cerr << "error: " << status.message() << "\n";
  return code;
}

int RunCommand(const std::string& config_path, int threads, bool full_trace) {
  absl::StatusOr<ExperimentConfig> config = ParseConfig(config_path);
  if (!config.ok()) return Fail(config.status(), kInvalid);
  const RunOptions options{threads, full_trace};
  absl::StatusOr<ExperimentResult> result = RunExperiment(*config, options);
  if (!result.ok()) {
    return Fail(result.status(), absl::IsInvalidArgument(result.status())
                                     ? kInvalid
                                     : kRuntime);
  }
  if (absl::Status s = EmitOutputs(*result, *config, options); !s.ok()) {
    return Fail(s, kRuntime);
  }
  std::cout << ResultsCsv(*config, *result);
  if (result->failed_episodes > 0) {
    std::cerr << "error: " << result->failed_episodes
              << " episode(s) failed; see manifest.json\n";
    return kRuntime;
  }
  return kOk;
}

int AuditCommand(const std::vector<std::string>& m_tokens,
                 const std::vector<double>& epsilons,
                 const std::vector<double>& deltas, std::int64_t cap) {
  std::vector<BatchSizeSpec> ms;
  for (const std::string& token : m_tokens) {
    absl::StatusOr<BatchSizeSpec> spec = BatchSizeSpec::Parse(token);
    if (!spec.ok()) return Fail(spec.status(), kInvalid);
    ms.push_back(*spec);
  }
  bool any_invalid = false;
  std::cout << AuditCsvHeader() << "\n";
  for (const AuditCell& cell : AuditGrid(ms, epsilons, deltas, cap)) {
    std::cout << AuditCsvRow(cell) << "\n";
    if (!cell.status.ok()) {
      any_invalid = true;
      std::cerr << "cell m=" << cell.m_spec.ToString()
                << " eps=" << FormatDouble(cell.epsilon)
                << " delta=" << FormatDouble(cell.delta) << ": "
                << cell.status.message() << "\n";
    }
  }
  return any_invalid ? kInvalid : kOk;
}

int SampleCommand(std::int64_t m, double epsilon, double delta, std::int64_t n,
                  std::uint64_t seed, std::int64_t ones) {
  absl::StatusOr<PrivacyParams> params = PrivacyParams::Create(epsilon, delta);
  if (!params.ok()) return Fail(params.status(), kInvalid);
  if (m < 1 || n < 0 || ones < 0 || ones > m) {
    return Fail(absl::InvalidArgumentError(
                    "need m >= 1, n >= 0 and 0 <= ones <= m"),
                kInvalid);
  }
  std::vector<std::uint8_t> bits(static_cast<std::size_t>(m), 0);
  for (std::int64_t i = 0; i < ones; ++i) bits[i] = 1;
  const SeedSpec spec{seed, 0};
  std::string out;
  for (std::int64_t run = 0; run < n; ++run) {
    Engine rng = spec.MakeEngine(StreamLabel::kAdHoc, 0,
                                 static_cast<std::uint64_t>(run));
    absl::StatusOr<SumEstimate> estimate = PrivateSum(bits, *params, rng);
    if (!estimate.ok()) return Fail(estimate.status(), kRuntime);
    out += FormatDouble(estimate->ErrorFrom(ones));
    out += '\n';
    if (out.size() > (1 << 16)) {
      std::cout << out;
      out.clear();
    }
  }
  std::cout << out;
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Shuffle-model private bandit simulator"};
  app.require_subcommand(1);

  std::string config_path;
  int threads = 1;
  bool full_trace = false;
  CLI::App* run = app.add_subcommand("run", "Run a regret experiment");
  run->add_option("--config", config_path, "Experiment config file")
      ->required();
  run->add_option("--threads", threads, "Worker threads")
      ->check(CLI::PositiveNumber);
  run->add_flag("--full-trace", full_trace, "Record regret after every pull");

  std::vector<std::string> audit_m;
  std::vector<double> audit_eps;
  std::vector<double> audit_delta;
  std::int64_t cap = kDefaultSupportCap;
  CLI::App* audit =
      app.add_subcommand("audit", "Exact hockey-stick privacy audit");
  audit->add_option("--m", audit_m, "Batch sizes (integers, tau, <c>tau)")
      ->required()
      ->delimiter(',');
  audit->add_option("--eps", audit_eps, "Epsilons")->required()->delimiter(',');
  audit->add_option("--delta", audit_delta, "Deltas")
      ->required()
      ->delimiter(',');
  audit->add_option("--support-cap", cap, "Largest pmf support to evaluate");

  CLI::App* mechanism =
      app.add_subcommand("mechanism", "Summation mechanism tools");
  mechanism->require_subcommand(1);
  std::int64_t sample_m = 1;
  double sample_eps = 0.0;
  double sample_delta = 0.0;
  std::int64_t sample_n = 1;
  std::uint64_t sample_seed = 0;
  std::int64_t sample_ones = 0;
  CLI::App* sample = mechanism->add_subcommand(
      "sample", "Print one summation error per line");
  sample->add_option("--m", sample_m, "Batch size")->required();
  sample->add_option("--eps", sample_eps, "Epsilon")->required();
  sample->add_option("--delta", sample_delta, "Delta")->required();
  sample->add_option("--n", sample_n, "Number of samples")->required();
  sample->add_option("--seed", sample_seed, "Master seed");
  sample->add_option("--ones", sample_ones, "Users holding a 1 bit");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kInvalid;
  }

  if (*run) return RunCommand(config_path, threads, full_trace);
  if (*audit) return AuditCommand(audit_m, audit_eps, audit_delta, cap);
  if (*sample) {
    return SampleCommand(sample_m, sample_eps, sample_delta, sample_n,
                         sample_seed, sample_ones);
  }
  return kInvalid;
}
