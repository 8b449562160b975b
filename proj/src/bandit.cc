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

#include "shuffle_bandits/bandit.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <utility>

#include "absl/status/status.h"
#include "absl/strings/str_cat.h"

namespace shuffle_bandits {

absl::string_view VariantName(Variant variant) {
  switch (variant) {
    case Variant::kSdpAe:
      return "sdp-ae";
    case Variant::kVbSdpAe:
      return "vb-sdp-ae";
    case Variant::kAeBaseline:
      return "ae-baseline";
  }
  return "unknown";
}

absl::StatusOr<Variant> ParseVariant(absl::string_view name) {
  for (Variant v : {Variant::kSdpAe, Variant::kVbSdpAe, Variant::kAeBaseline}) {
    if (name == VariantName(v)) return v;
  }
  return absl::InvalidArgumentError(absl::StrCat(
      "unknown variant '", name, "' (expected sdp-ae, vb-sdp-ae or "
      "ae-baseline)"));
}

std::int64_t BatchSchedule::BatchSize(std::int64_t phase) const {
  if (kind_ == Kind::kConstant) return constant_m_;
  if (phase >= 62) return std::int64_t{1} << 62;
  return std::int64_t{1} << phase;
}

std::int64_t DefaultConstantBatch(const PrivacyParams& params) {
  return static_cast<std::int64_t>(std::ceil(params.sigma()));
}

absl::StatusOr<EngineConfig> MakeEngineConfig(
    Variant variant, std::optional<PrivacyParams> privacy,
    std::int64_t horizon, const VariantOptions& options) {
  if (horizon < 1) {
    return absl::InvalidArgumentError(
        absl::StrCat("horizon must be >= 1, got ", horizon));
  }
  if (IsPrivate(variant) != privacy.has_value()) {
    return absl::InvalidArgumentError(
        absl::StrCat(VariantName(variant),
                     IsPrivate(variant) ? " needs privacy parameters"
                                        : " takes no privacy parameters"));
  }
  if (options.constant_batch.has_value() && *options.constant_batch < 1) {
    return absl::InvalidArgumentError(absl::StrCat(
        "constant batch size must be >= 1, got ", *options.constant_batch));
  }
  EngineConfig config;
  config.privacy = privacy;
  config.horizon = horizon;
  config.noiseless = options.noiseless;
  switch (variant) {
    case Variant::kSdpAe:
      config.schedule = BatchSchedule::Constant(
          options.constant_batch.value_or(DefaultConstantBatch(*privacy)));
      break;
    case Variant::kVbSdpAe:
      config.schedule = BatchSchedule::Doubling();
      break;
    case Variant::kAeBaseline:
      config.schedule =
          BatchSchedule::Constant(options.constant_batch.value_or(1));
      break;
  }
  return config;
}

double ConfidenceRadius(std::int64_t pulls, std::int64_t phases,
                        std::int64_t horizon, double sigma) {
  const double n = static_cast<double>(pulls);
  const double privacy_term =
      2.0 * std::sqrt(static_cast<double>(phases)) * sigma / n;
  const double sampling_term = 1.0 / std::sqrt(n);
  return (privacy_term + sampling_term) *
         std::sqrt(2.0 * std::log(static_cast<double>(horizon)));
}

ArmState UpdateConfidence(ArmState state, std::int64_t phases,
                          std::int64_t horizon, double sigma) {
  state.radius = ConfidenceRadius(state.pulls, phases, horizon, sigma);
  return state;
}

std::vector<int> Eliminate(std::span<ArmState> arms) {
  double best_lcb = -std::numeric_limits<double>::infinity();
  for (const ArmState& arm : arms) {
    if (arm.active) best_lcb = std::max(best_lcb, arm.lcb());
  }
  std::vector<int> removed;
  for (std::size_t a = 0; a < arms.size(); ++a) {
    if (arms[a].active && arms[a].ucb() < best_lcb) {
      arms[a].active = false;
      removed.push_back(static_cast<int>(a));
    }
  }
  return removed;
}

absl::StatusOr<EliminationEngine> EliminationEngine::Create(
    const BanditInstance& instance, EngineConfig config, const SeedSpec& seed) {
  if (config.horizon != instance.horizon()) {
    return absl::InvalidArgumentError(
        absl::StrCat("engine horizon ", config.horizon,
                     " differs from the instance horizon ",
                     instance.horizon()));
  }
  if (config.schedule.kind() == BatchSchedule::Kind::kConstant &&
      config.schedule.constant_m() < 1) {
    return absl::InvalidArgumentError("constant batch size must be >= 1");
  }
  if (config.full_trace) {
    config.checkpoints.resize(static_cast<std::size_t>(config.horizon));
    std::iota(config.checkpoints.begin(), config.checkpoints.end(), 1);
  }
  for (std::size_t i = 0; i < config.checkpoints.size(); ++i) {
    const std::int64_t c = config.checkpoints[i];
    if (c < 1 || c > config.horizon) {
      return absl::InvalidArgumentError(absl::StrCat(
          "checkpoint ", c, " is outside [1, ", config.horizon, "]"));
    }
    if (i > 0 && c <= config.checkpoints[i - 1]) {
      return absl::InvalidArgumentError(
          "checkpoints must be strictly increasing");
    }
  }
  return EliminationEngine(instance, std::move(config), seed);
}

EliminationEngine::EliminationEngine(const BanditInstance& instance,
                                     EngineConfig config, const SeedSpec& seed)
    : instance_(instance), config_(std::move(config)), seed_(seed) {
  if (config_.privacy.has_value()) sigma_ = config_.privacy->sigma();
  const int k = instance_.num_arms();
  arms_.resize(static_cast<std::size_t>(k));
  tapes_.reserve(static_cast<std::size_t>(k));
  for (int a = 0; a < k; ++a) tapes_.emplace_back(a, instance_.mean(a), seed_);
  batches_summed_.assign(static_cast<std::size_t>(k), 0);
  trace_.total_pulls.assign(static_cast<std::size_t>(k), 0);
  trace_.checkpoints = config_.checkpoints;
  trace_.cumulative_regret.reserve(config_.checkpoints.size());
}

double EliminationEngine::CurrentRegret() const {
  double regret = 0.0;
  for (int a = 0; a < instance_.num_arms(); ++a) {
    regret += static_cast<double>(trace_.total_pulls[a]) * instance_.gap(a);
  }
  return regret;
}

void EliminationEngine::AdvanceUsers(int arm, std::int64_t count) {
  const std::int64_t start = users_;
  const std::int64_t base = trace_.total_pulls[arm];
  const auto& checkpoints = config_.checkpoints;
  while (next_checkpoint_ < checkpoints.size() &&
         checkpoints[next_checkpoint_] <= start + count) {
    trace_.total_pulls[arm] = base + (checkpoints[next_checkpoint_] - start);
    trace_.cumulative_regret.push_back(CurrentRegret());
    ++next_checkpoint_;
  }
  trace_.total_pulls[arm] = base + count;
  users_ = start + count;
}

absl::StatusOr<double> EliminationEngine::Aggregate(
    int arm, std::span<const std::uint8_t> bits) {
  const std::uint64_t ordinal = batches_summed_[arm]++;
  if (!config_.privacy.has_value() || config_.noiseless) {
    return static_cast<double>(std::count(bits.begin(), bits.end(), 1));
  }
  Engine noise = seed_.MakeEngine(StreamLabel::kMechanismNoise,
                                  static_cast<std::uint64_t>(arm), ordinal);
  ++trace_.mechanism_invocations;
  absl::StatusOr<SumEstimate> estimate =
      PrivateSum(bits, *config_.privacy, noise);
  if (!estimate.ok()) return estimate.status();
  return estimate->value;
}

absl::StatusOr<EliminationEngine::PhaseResult> EliminationEngine::RunPhase() {
  PhaseResult result;
  if (finished()) {
    result.horizon_reached = true;
    return result;
  }
  const std::int64_t phase = trace_.phases_completed + 1;
  const std::int64_t m = config_.schedule.BatchSize(phase);
  for (int a = 0; a < instance_.num_arms(); ++a) {
    ArmState& arm = arms_[a];
    if (!arm.active) continue;
    const std::int64_t take = std::min(m, config_.horizon - users_);
    rewards_.clear();
    tapes_[a].DrawBatch(take, rewards_);
    AdvanceUsers(a, take);
    result.users += take;
    if (finished()) {
      // The T-th pull ends the run before this batch reaches the analyzer.
      trace_.partial_batch_pulls = take;
      result.horizon_reached = true;
      return result;
    }
    absl::StatusOr<double> sum = Aggregate(a, rewards_);
    if (!sum.ok()) return sum.status();
    arm.noisy_sum += *sum;
    arm.pulls += m;
    arm.mean_estimate = arm.noisy_sum / static_cast<double>(arm.pulls);
  }

  trace_.phases_completed = phase;
  for (int a = 0; a < instance_.num_arms(); ++a) {
    ArmState& arm = arms_[a];
    if (!arm.active) continue;
    arm = UpdateConfidence(arm, phase, config_.horizon, sigma_);
    if (std::abs(arm.mean_estimate - instance_.mean(a)) > arm.radius) {
      trace_.clean_event_violated = true;
    }
  }
  for (int a : Eliminate(arms_)) {
    trace_.eliminations.push_back({a, phase});
    if (instance_.gap(a) == 0.0) trace_.optimal_arm_eliminated = true;
  }
  return result;
}

absl::StatusOr<RegretTrace> EliminationEngine::Run() {
  while (!finished()) {
    absl::StatusOr<PhaseResult> phase = RunPhase();
    if (!phase.ok()) return phase.status();
  }
  trace_.final_regret = CurrentRegret();
  return trace_;
}

absl::StatusOr<RegretTrace> RunEpisode(const BanditInstance& instance,
                                       const EngineConfig& config,
                                       const SeedSpec& seed) {
  absl::StatusOr<EliminationEngine> engine =
      EliminationEngine::Create(instance, config, seed);
  if (!engine.ok()) return engine.status();
  return engine->Run();
}

}  // namespace shuffle_bandits
