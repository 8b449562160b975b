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

// Shuffle-model private binary summation.
//
// Each of m users holds a bit x. The local randomizer appends noise bits to
// x; the shuffler flattens every user's payload into one multiset and
// permutes it uniformly; the analyzer counts ones and subtracts the expected
// noise count. With tau = 96 ln(2/delta) / epsilon^2:
//
//   m <= tau : p = ceil(tau / m) fair coins per user,  B ~ Bin(p m, 1/2)
//   m >  tau : one Bernoulli(tau / 2m) coin per user,  B ~ Bin(m, tau / 2m)
//
// The estimate is sum(x) + B - E[B]. Its error depends on the noise bits only
// and is sub-Gaussian with variance at most sigma2 = 1.5 tau.

#ifndef SHUFFLE_BANDITS_MECHANISM_H_
#define SHUFFLE_BANDITS_MECHANISM_H_

#include <cmath>
#include <cstdint>
#include <span>
#include <vector>

#include "absl/status/status.h"
#include "absl/status/statusor.h"
#include "absl/strings/str_cat.h"
#include "shuffle_bandits/random.h"

namespace shuffle_bandits {

class PrivacyParams {
 public:
  // Requires epsilon in (0, 1] and delta in (0, 1).
  static absl::StatusOr<PrivacyParams> Create(double epsilon, double delta);

  // Audit-only: keeps (epsilon, delta) but replaces the derived noise
  // threshold. Used to probe undersized noise and tiny brute-force cases.
  // The result carries no privacy guarantee.
  static absl::StatusOr<PrivacyParams> WithThresholdForAudit(double epsilon,
                                                             double delta,
                                                             double tau);

  double epsilon() const { return epsilon_; }
  double delta() const { return delta_; }
  double tau() const { return tau_; }
  double sigma2() const { return 1.5 * tau_; }
  double sigma() const { return std::sqrt(sigma2()); }

 private:
  PrivacyParams(double epsilon, double delta, double tau)
      : epsilon_(epsilon), delta_(delta), tau_(tau) {}

  double epsilon_;
  double delta_;
  double tau_;
};

inline absl::StatusOr<PrivacyParams> DeriveParams(double epsilon,
                                                  double delta) {
  return PrivacyParams::Create(epsilon, delta);
}

// 96 ln(2 / delta) / epsilon^2, natural log.
double NoiseThreshold(double epsilon, double delta);

enum class Regime { kSmall, kLarge };

const char* RegimeName(Regime regime);

inline Regime RegimeFor(std::int64_t m, const PrivacyParams& params) {
  return static_cast<double>(m) <= params.tau() ? Regime::kSmall
                                                : Regime::kLarge;
}

// p = ceil(tau / m) in the small regime, 1 in the large regime.
std::int64_t NoiseBitsPerUser(std::int64_t m, const PrivacyParams& params);

inline std::int64_t PayloadLength(std::int64_t m, const PrivacyParams& params) {
  return 1 + NoiseBitsPerUser(m, params);
}

inline std::int64_t ShuffledLength(std::int64_t m,
                                   const PrivacyParams& params) {
  return m * PayloadLength(m, params);
}

// E[B]: p m / 2 in the small regime, tau / 2 in the large regime.
double NoiseOffset(std::int64_t m, const PrivacyParams& params);

// Bernoulli success probability of each large-regime noise coin.
inline double LargeRegimeCoinBias(std::int64_t m, const PrivacyParams& params) {
  return params.tau() / (2.0 * static_cast<double>(m));
}

// One user's report: the data bit in slot 0, then its noise bits.
struct EncodedMessage {
  std::vector<std::uint8_t> payload;
};

// All bits of one batch after the shuffler. Order carries no information.
struct ShuffledBatch {
  std::vector<std::uint8_t> bits;
  std::int64_t m = 0;
  Regime regime = Regime::kSmall;
};

struct SumEstimate {
  // Debiased noisy sum. Not clamped: may be negative or exceed m.
  double value = 0.0;
  // Ones in the shuffled batch and the expected noise count subtracted.
  std::int64_t ones = 0;
  double offset = 0.0;

  // value - true_sum, formed from the integer excess so that it depends only
  // on the noise bits.
  double ErrorFrom(std::int64_t true_sum) const {
    return static_cast<double>(ones - true_sum) - offset;
  }
};

// Local randomizer. Consumes the same amount of randomness whatever x is, so
// a fixed generator state yields the same noise bits for x = 0 and x = 1.
template <BitGenerator G>
EncodedMessage Encode(std::uint8_t x, std::int64_t m,
                      const PrivacyParams& params, G& rng) {
  EncodedMessage message;
  const std::int64_t noise_bits = NoiseBitsPerUser(m, params);
  message.payload.reserve(static_cast<std::size_t>(1 + noise_bits));
  message.payload.push_back(x != 0 ? 1 : 0);
  if (RegimeFor(m, params) == Regime::kSmall) {
    std::int64_t remaining = noise_bits;
    while (remaining > 0) {
      std::uint64_t word = rng();
      const int take = remaining < 64 ? static_cast<int>(remaining) : 64;
      for (int b = 0; b < take; ++b) {
        message.payload.push_back(static_cast<std::uint8_t>(word & 1U));
        word >>= 1;
      }
      remaining -= take;
    }
  } else {
    message.payload.push_back(
        BernoulliDraw(rng, LargeRegimeCoinBias(m, params)) ? 1 : 0);
  }
  return message;
}

// Flattens every payload and permutes the bits uniformly. The batch size is
// the number of messages; each payload must have the length the mechanism
// prescribes for that batch size.
template <BitGenerator G>
absl::StatusOr<ShuffledBatch> Shuffle(std::span<const EncodedMessage> messages,
                                      const PrivacyParams& params, G& rng) {
  ShuffledBatch batch;
  batch.m = static_cast<std::int64_t>(messages.size());
  if (messages.empty()) return batch;
  batch.regime = RegimeFor(batch.m, params);
  const auto expected =
      static_cast<std::size_t>(PayloadLength(batch.m, params));
  batch.bits.reserve(expected * messages.size());
  for (std::size_t i = 0; i < messages.size(); ++i) {
    const auto& payload = messages[i].payload;
    if (payload.size() != expected) {
      return absl::InvalidArgumentError(absl::StrCat(
          "message ", i, " has ", payload.size(), " bits; a ",
          RegimeName(batch.regime), "-regime batch of ", batch.m,
          " users needs ", expected));
    }
    batch.bits.insert(batch.bits.end(), payload.begin(), payload.end());
  }
  ShuffleInPlace(std::span<std::uint8_t>(batch.bits), rng);
  return batch;
}

// Ones count minus the expected noise count.
absl::StatusOr<SumEstimate> Analyze(const ShuffledBatch& batch, std::int64_t m,
                                    const PrivacyParams& params);

// Analyze(Shuffle(Encode(x) for x in bits)).
template <BitGenerator G>
absl::StatusOr<SumEstimate> PrivateSum(std::span<const std::uint8_t> bits,
                                       const PrivacyParams& params, G& rng) {
  if (bits.empty()) {
    return absl::InvalidArgumentError("private sum needs at least one user");
  }
  const auto m = static_cast<std::int64_t>(bits.size());
  std::vector<EncodedMessage> messages;
  messages.reserve(bits.size());
  for (std::uint8_t x : bits) messages.push_back(Encode(x, m, params, rng));
  absl::StatusOr<ShuffledBatch> batch =
      Shuffle(std::span<const EncodedMessage>(messages), params, rng);
  if (!batch.ok()) return batch.status();
  return Analyze(*batch, m, params);
}

}  // namespace shuffle_bandits

#endif  // SHUFFLE_BANDITS_MECHANISM_H_
