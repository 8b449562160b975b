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

#include "shuffle_bandits/env.h"

#include <cmath>
#include <string>
#include <utility>

#include "absl/status/status.h"
#include "absl/strings/str_cat.h"

namespace shuffle_bandits {

absl::StatusOr<BanditInstance> BanditInstance::Create(std::vector<double> means,
                                                      std::int64_t horizon) {
  if (means.empty()) {
    return absl::InvalidArgumentError("means must list at least one arm");
  }
  for (std::size_t a = 0; a < means.size(); ++a) {
    if (!(means[a] >= 0.0 && means[a] <= 1.0)) {
      return absl::InvalidArgumentError(
          absl::StrCat("means[", a, "] = ", means[a], " is outside [0, 1]"));
    }
  }
  if (horizon < 1) {
    return absl::InvalidArgumentError(
        absl::StrCat("horizon must be >= 1, got ", horizon));
  }
  return BanditInstance(std::move(means), horizon);
}

BanditInstance::BanditInstance(std::vector<double> means, std::int64_t horizon)
    : means_(std::move(means)), horizon_(horizon) {
  for (int a = 1; a < num_arms(); ++a) {
    if (means_[a] > means_[optimal_arm_]) optimal_arm_ = a;
  }
  gaps_.reserve(means_.size());
  for (double mu : means_) gaps_.push_back(means_[optimal_arm_] - mu);
}

absl::StatusOr<BanditInstance> MakeInstance(int k, std::vector<double> means,
                                            std::int64_t horizon) {
  if (k < 1) {
    return absl::InvalidArgumentError(absl::StrCat("k must be >= 1, got ", k));
  }
  if (static_cast<std::size_t>(k) != means.size()) {
    return absl::InvalidArgumentError(absl::StrCat(
        "k = ", k, " but ", means.size(), " means were given"));
  }
  return BanditInstance::Create(std::move(means), horizon);
}

RewardTape::RewardTape(int arm, double mean, const SeedSpec& seed)
    : arm_(arm),
      mean_(mean),
      engine_(seed.MakeEngine(StreamLabel::kReward,
                              static_cast<std::uint64_t>(arm), 0)) {}

void RewardTape::DrawBatch(std::int64_t batch_size,
                           std::vector<std::uint8_t>& out) {
  out.reserve(out.size() + static_cast<std::size_t>(batch_size));
  for (std::int64_t i = 0; i < batch_size; ++i) {
    out.push_back(BernoulliDraw(engine_, mean_) ? 1 : 0);
  }
  cursor_ += batch_size;
}

std::vector<std::uint8_t> RewardTape::DrawBatch(std::int64_t batch_size) {
  std::vector<std::uint8_t> out;
  DrawBatch(batch_size, out);
  return out;
}

}  // namespace shuffle_bandits
