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

// Batched arm elimination over the shuffle-model summation mechanism.
//
// Each phase visits the active arms in ascending index order and gives each
// one a batch of fresh users. A completed batch is summed through the
// private mechanism and folded into the arm's running estimate. After the
// phase every active arm gets the confidence radius
//
//   I = (2 sqrt(t) sigma / N + 1 / sqrt(N)) * sqrt(2 ln T)
//
// and any arm whose UCB is strictly below the best LCB is dropped.
// When the T-th user pulls, the episode ends on the spot: the interrupted
// batch is charged to regret but never aggregated.

#ifndef SHUFFLE_BANDITS_BANDIT_H_
#define SHUFFLE_BANDITS_BANDIT_H_

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "absl/status/statusor.h"
#include "absl/strings/string_view.h"
#include "shuffle_bandits/env.h"
#include "shuffle_bandits/mechanism.h"
#include "shuffle_bandits/random.h"

namespace shuffle_bandits {

enum class Variant { kSdpAe, kVbSdpAe, kAeBaseline };

// "sdp-ae", "vb-sdp-ae", "ae-baseline".
absl::string_view VariantName(Variant variant);
absl::StatusOr<Variant> ParseVariant(absl::string_view name);
inline bool IsPrivate(Variant v) { return v != Variant::kAeBaseline; }

class BatchSchedule {
 public:
  enum class Kind { kConstant, kDoubling };

  static BatchSchedule Constant(std::int64_t m) {
    return BatchSchedule(Kind::kConstant, m);
  }
  // m^t = 2^t.
  static BatchSchedule Doubling() { return BatchSchedule(Kind::kDoubling, 0); }

  Kind kind() const { return kind_; }
  std::int64_t constant_m() const { return constant_m_; }

  // Batch size of phase t >= 1.
  std::int64_t BatchSize(std::int64_t phase) const;

 private:
  BatchSchedule(Kind kind, std::int64_t m) : kind_(kind), constant_m_(m) {}

  Kind kind_;
  std::int64_t constant_m_;
};

// ceil(sigma), the constant batch size that balances the two error terms.
std::int64_t DefaultConstantBatch(const PrivacyParams& params);

struct EngineConfig {
  BatchSchedule schedule = BatchSchedule::Constant(1);
  // Absent for the non-private baseline, which uses exact sums and sigma = 0.
  std::optional<PrivacyParams> privacy;
  std::int64_t horizon = 1;
  // Test hook: private variants keep their sigma in the radius but sum
  // exactly.
  bool noiseless = false;
  // Sorted user counts in [1, horizon] at which cumulative regret is kept.
  std::vector<std::int64_t> checkpoints;
  // Record cumulative regret after every pull; overrides checkpoints.
  bool full_trace = false;
};

struct VariantOptions {
  // Constant batch size; defaults to ceil(sigma) for SDP-AE and 1 for the
  // baseline. Ignored by VB-SDP-AE.
  std::optional<std::int64_t> constant_batch;
  bool noiseless = false;
};

// Builds the configuration of one algorithm. Private variants need privacy
// parameters and the baseline must not have any.
absl::StatusOr<EngineConfig> MakeEngineConfig(
    Variant variant, std::optional<PrivacyParams> privacy,
    std::int64_t horizon, const VariantOptions& options = {});

struct ArmState {
  double noisy_sum = 0.0;
  // Users aggregated into noisy_sum; excludes an interrupted final batch.
  std::int64_t pulls = 0;
  double mean_estimate = 0.0;
  double radius = 0.0;
  bool active = true;

  double ucb() const { return mean_estimate + radius; }
  double lcb() const { return mean_estimate - radius; }
};

// (2 sqrt(phases) sigma / pulls + 1 / sqrt(pulls)) sqrt(2 ln horizon).
double ConfidenceRadius(std::int64_t pulls, std::int64_t phases,
                        std::int64_t horizon, double sigma);

// Returns `state` with its radius recomputed for `phases` completed phases.
ArmState UpdateConfidence(ArmState state, std::int64_t phases,
                          std::int64_t horizon, double sigma);

// Deactivates every active arm whose UCB is strictly below the largest LCB
// among active arms and returns their indices in ascending order.
std::vector<int> Eliminate(std::span<ArmState> arms);

struct EliminationEvent {
  int arm = 0;
  std::int64_t phase = 0;
};

struct RegretTrace {
  std::vector<std::int64_t> checkpoints;
  // Sum over arms of pulls-so-far times gap, at each checkpoint.
  std::vector<double> cumulative_regret;
  double final_regret = 0.0;
  // Every pull, including the interrupted final batch.
  std::vector<std::int64_t> total_pulls;
  std::int64_t partial_batch_pulls = 0;
  std::int64_t phases_completed = 0;
  std::int64_t mechanism_invocations = 0;
  std::vector<EliminationEvent> eliminations;
  // Some completed phase left an active arm with |mean_estimate - mu| > I.
  bool clean_event_violated = false;
  // Some arm with zero gap was eliminated.
  bool optimal_arm_eliminated = false;
};

// Runs one episode phase by phase. The engine owns the reward tapes and the
// per-arm noise streams; the ground-truth means feed only the regret and
// clean-event bookkeeping.
class EliminationEngine {
 public:
  static absl::StatusOr<EliminationEngine> Create(
      const BanditInstance& instance, EngineConfig config,
      const SeedSpec& seed);

  struct PhaseResult {
    std::int64_t users = 0;
    bool horizon_reached = false;
  };

  // One phase over the active arms. No-op once the horizon is reached.
  absl::StatusOr<PhaseResult> RunPhase();

  absl::StatusOr<RegretTrace> Run();

  std::span<const ArmState> arms() const { return arms_; }
  std::int64_t users_consumed() const { return users_; }
  std::int64_t phases_completed() const { return trace_.phases_completed; }
  bool finished() const { return users_ >= config_.horizon; }
  double sigma() const { return sigma_; }
  const RegretTrace& trace() const { return trace_; }

 private:
  EliminationEngine(const BanditInstance& instance, EngineConfig config,
                    const SeedSpec& seed);

  double CurrentRegret() const;
  // Records checkpoints reached while `count` users pull `arm`.
  void AdvanceUsers(int arm, std::int64_t count);
  absl::StatusOr<double> Aggregate(int arm, std::span<const std::uint8_t> bits);

  BanditInstance instance_;
  EngineConfig config_;
  SeedSpec seed_;
  double sigma_ = 0.0;
  std::vector<ArmState> arms_;
  std::vector<RewardTape> tapes_;
  std::vector<std::uint64_t> batches_summed_;
  std::int64_t users_ = 0;
  std::size_t next_checkpoint_ = 0;
  std::vector<std::uint8_t> rewards_;
  RegretTrace trace_;
};

absl::StatusOr<RegretTrace> RunEpisode(const BanditInstance& instance,
                                       const EngineConfig& config,
                                       const SeedSpec& seed);

}  // namespace shuffle_bandits

#endif  // SHUFFLE_BANDITS_BANDIT_H_
