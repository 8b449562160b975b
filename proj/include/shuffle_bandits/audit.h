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

// Exact (epsilon, delta) verification of the binary summation mechanism.
//
// The shuffler's output is a uniform permutation of a fixed-length bit
// vector, so it is a post-processing of its ones count
// M*(X) = sum(x) + B. Neighboring inputs X = (0, x_2..x_m) and
// X' = (1, x_2..x_m) give M*(X) = k + B and M*(X') = k + 1 + B, where B is
// the binomial noise count. The hockey-stick divergence between these two
// laws does not depend on k and reduces to sums over the pmf of B and its
// unit shift.

#ifndef SHUFFLE_BANDITS_AUDIT_H_
#define SHUFFLE_BANDITS_AUDIT_H_

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "absl/status/status.h"
#include "absl/status/statusor.h"
#include "absl/strings/string_view.h"
#include "shuffle_bandits/mechanism.h"

namespace shuffle_bandits {

inline constexpr std::int64_t kDefaultSupportCap = 1'000'000;

// Binomial(trials, success) noise count for a batch of m users.
struct NoiseModel {
  std::int64_t trials = 0;
  double success = 0.0;
};

NoiseModel NoiseModelFor(std::int64_t m, const PrivacyParams& params);

// Binomial pmf over its full support 0..trials.
struct BinomialPmf {
  std::int64_t trials = 0;
  double success = 0.0;
  std::vector<double> mass;
  // Natural log of mass; -inf where the mass is exactly zero.
  std::vector<double> log_mass;
};

// Evaluated in log space outward from the mode and normalized after
// subtracting the mode's log weight, so large supports never underflow the
// bulk of the distribution.
absl::StatusOr<BinomialPmf> Binomial(std::int64_t trials, double success,
                                     std::int64_t support_cap =
                                         kDefaultSupportCap);

absl::StatusOr<BinomialPmf> NoiseDistribution(
    std::int64_t m, const PrivacyParams& params,
    std::int64_t support_cap = kDefaultSupportCap);

// sum_i max(0, p[i] - e^epsilon q[i]) over aligned supports. A shorter
// operand is treated as zero-padded.
double HockeyStickDivergence(std::span<const double> p,
                             std::span<const double> q, double epsilon);

struct Divergences {
  // D_{e^eps}(law(B) || law(B + 1))
  double forward = 0.0;
  // D_{e^eps}(law(B + 1) || law(B))
  double backward = 0.0;
};

// Both directions between the pmf and its unit shift. epsilon >= 0; at
// epsilon = 0 each direction is the total variation distance.
Divergences UnitShiftDivergences(const BinomialPmf& pmf, double epsilon);

// X = (0, x_2..x_m) against X' = (1, x_2..x_m) with sum(x_2..x_m) = k_rest.
struct NeighborPair {
  std::int64_t m = 1;
  std::int64_t k_rest = 0;
};

// Laws of the ones count M* under X and X', over 0..trials + m.
struct NeighborOutputs {
  std::vector<double> without_user;
  std::vector<double> with_user;
};

absl::StatusOr<NeighborOutputs> NeighborOutputDistributions(
    const NeighborPair& pair, const PrivacyParams& params,
    std::int64_t support_cap = kDefaultSupportCap);

struct AuditReport {
  std::int64_t m = 0;
  double epsilon = 0.0;
  double delta = 0.0;
  double tau = 0.0;
  Regime regime = Regime::kSmall;
  double divergence_forward = 0.0;
  double divergence_backward = 0.0;
  bool pass = false;
};

absl::StatusOr<AuditReport> HockeyStick(
    std::int64_t m, const PrivacyParams& params,
    std::int64_t support_cap = kDefaultSupportCap);

// A grid batch size: either a literal count or a multiple of ceil(tau),
// written "12", "tau" or "4tau".
struct BatchSizeSpec {
  std::int64_t value = 1;
  bool tau_multiple = false;

  static absl::StatusOr<BatchSizeSpec> Parse(absl::string_view text);
  static BatchSizeSpec Literal(std::int64_t m) { return {m, false}; }
  static BatchSizeSpec CeilTauTimes(std::int64_t c) { return {c, true}; }

  std::int64_t Resolve(const PrivacyParams& params) const;
  std::string ToString() const;
};

struct AuditCell {
  BatchSizeSpec m_spec;
  std::int64_t m = 0;  // 0 when the cell could not be resolved
  double epsilon = 0.0;
  double delta = 0.0;
  absl::Status status;
  AuditReport report;  // meaningful iff status.ok()
};

// Cartesian product in (m, epsilon, delta) order. A cell with invalid
// parameters records its error and the sweep continues.
std::vector<AuditCell> AuditGrid(std::span<const BatchSizeSpec> ms,
                                 std::span<const double> epsilons,
                                 std::span<const double> deltas,
                                 std::int64_t support_cap = kDefaultSupportCap);

// CSV with header m,epsilon,delta,div_forward,div_backward,pass. Failed
// cells print "error" in the pass column.
std::string AuditCsvHeader();
std::string AuditCsvRow(const AuditCell& cell);

}  // namespace shuffle_bandits

#endif  // SHUFFLE_BANDITS_AUDIT_H_
