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

#ifndef SHUFFLE_BANDITS_ENV_H_
#define SHUFFLE_BANDITS_ENV_H_

#include <cstdint>
#include <span>
#include <vector>

#include "absl/status/statusor.h"
#include "shuffle_bandits/random.h"

namespace shuffle_bandits {

// A stochastic k-armed bandit with Bernoulli rewards and a known horizon.
class BanditInstance {
 public:
  // Fails on empty means, means outside [0, 1], or horizon < 1.
  static absl::StatusOr<BanditInstance> Create(std::vector<double> means,
                                               std::int64_t horizon);

  int num_arms() const { return static_cast<int>(means_.size()); }
  std::int64_t horizon() const { return horizon_; }
  std::span<const double> means() const { return means_; }
  double mean(int arm) const { return means_[arm]; }

  // Lowest index among the arms with the largest mean.
  int optimal_arm() const { return optimal_arm_; }
  double optimal_mean() const { return means_[optimal_arm_]; }
  std::span<const double> gaps() const { return gaps_; }
  double gap(int arm) const { return gaps_[arm]; }

 private:
  BanditInstance(std::vector<double> means, std::int64_t horizon);

  std::vector<double> means_;
  std::vector<double> gaps_;
  std::int64_t horizon_;
  int optimal_arm_ = 0;
};

// Checks k against the means list before delegating to BanditInstance::Create.
absl::StatusOr<BanditInstance> MakeInstance(int k, std::vector<double> means,
                                            std::int64_t horizon);

// Lazily generated iid Bernoulli(mean) rewards for one arm. The j-th draw
// depends only on (seed, arm, j), never on how draws are grouped into
// batches or on what other arms do.
class RewardTape {
 public:
  RewardTape(int arm, double mean, const SeedSpec& seed);

  // Appends batch_size draws to `out` and advances the cursor.
  void DrawBatch(std::int64_t batch_size, std::vector<std::uint8_t>& out);
  std::vector<std::uint8_t> DrawBatch(std::int64_t batch_size);

  int arm() const { return arm_; }
  double mean() const { return mean_; }
  std::int64_t cursor() const { return cursor_; }

 private:
  int arm_;
  double mean_;
  Engine engine_;
  std::int64_t cursor_ = 0;
};

}  // namespace shuffle_bandits

#endif  // SHUFFLE_BANDITS_ENV_H_
