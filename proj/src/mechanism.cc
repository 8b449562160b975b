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

#include "shuffle_bandits/mechanism.h"

#include <algorithm>
#include <cmath>

namespace shuffle_bandits {

double NoiseThreshold(double epsilon, double delta) {
  return 96.0 * std::log(2.0 / delta) / (epsilon * epsilon);
}

absl::StatusOr<PrivacyParams> PrivacyParams::Create(double epsilon,
                                                    double delta) {
  if (!(epsilon > 0.0 && epsilon <= 1.0)) {
    return absl::InvalidArgumentError(
        absl::StrCat("epsilon must lie in (0, 1], got ", epsilon));
  }
  if (!(delta > 0.0 && delta < 1.0)) {
    return absl::InvalidArgumentError(
        absl::StrCat("delta must lie in (0, 1), got ", delta));
  }
  return PrivacyParams(epsilon, delta, NoiseThreshold(epsilon, delta));
}

absl::StatusOr<PrivacyParams> PrivacyParams::WithThresholdForAudit(
    double epsilon, double delta, double tau) {
  absl::StatusOr<PrivacyParams> base = Create(epsilon, delta);
  if (!base.ok()) return base.status();
  if (!(tau > 0.0) || !std::isfinite(tau)) {
    return absl::InvalidArgumentError(
        absl::StrCat("tau must be positive and finite, got ", tau));
  }
  return PrivacyParams(epsilon, delta, tau);
}

const char* RegimeName(Regime regime) {
  return regime == Regime::kSmall ? "small" : "large";
}

std::int64_t NoiseBitsPerUser(std::int64_t m, const PrivacyParams& params) {
  if (RegimeFor(m, params) == Regime::kLarge) return 1;
  return static_cast<std::int64_t>(
      std::ceil(params.tau() / static_cast<double>(m)));
}

double NoiseOffset(std::int64_t m, const PrivacyParams& params) {
  if (RegimeFor(m, params) == Regime::kLarge) return params.tau() / 2.0;
  return static_cast<double>(NoiseBitsPerUser(m, params) * m) / 2.0;
}

absl::StatusOr<SumEstimate> Analyze(const ShuffledBatch& batch, std::int64_t m,
                                    const PrivacyParams& params) {
  if (m < 1) {
    return absl::InvalidArgumentError(
        absl::StrCat("batch size must be >= 1, got ", m));
  }
  if (batch.m != m) {
    return absl::InvalidArgumentError(absl::StrCat(
        "batch was shuffled for ", batch.m, " users, analyzer told ", m));
  }
  const Regime regime = RegimeFor(m, params);
  if (batch.regime != regime) {
    return absl::InvalidArgumentError(
        absl::StrCat("batch regime is ", RegimeName(batch.regime),
                     " but m = ", m, " is in the ", RegimeName(regime),
                     " regime"));
  }
  const auto expected = static_cast<std::size_t>(ShuffledLength(m, params));
  if (batch.bits.size() != expected) {
    return absl::InvalidArgumentError(
        absl::StrCat("batch holds ", batch.bits.size(), " bits, expected ",
                     expected));
  }
  const std::int64_t ones = std::count_if(
      batch.bits.begin(), batch.bits.end(), [](std::uint8_t b) { return b; });
  const double offset = NoiseOffset(m, params);
  return SumEstimate{static_cast<double>(ones) - offset,
                     static_cast<std::int64_t>(ones), offset};
}

}  // namespace shuffle_bandits
