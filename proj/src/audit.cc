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

#include "shuffle_bandits/audit.h"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <limits>

#include "absl/strings/str_cat.h"
#include "shuffle_bandits/format.h"

namespace shuffle_bandits {
namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

// Neumaier-compensated running sum.
class CompensatedSum {
 public:
  void Add(double x) {
    const double t = sum_ + x;
    if (std::abs(sum_) >= std::abs(x)) {
      compensation_ += (sum_ - t) + x;
    } else {
      compensation_ += (x - t) + sum_;
    }
    sum_ = t;
  }
  double value() const { return sum_ + compensation_; }

 private:
  double sum_ = 0.0;
  double compensation_ = 0.0;
};

// max(0, exp(log_a) - exp(log_b)) without cancellation blowup.
double PositivePart(double log_a, double log_b) {
  if (log_a == kNegInf || log_a <= log_b) return 0.0;
  if (log_b == kNegInf) return std::exp(log_a);
  return std::exp(log_a) * -std::expm1(log_b - log_a);
}

double LogMassAt(const BinomialPmf& pmf, std::int64_t s) {
  if (s < 0 || s > pmf.trials) return kNegInf;
  return pmf.log_mass[static_cast<std::size_t>(s)];
}

}  // namespace

NoiseModel NoiseModelFor(std::int64_t m, const PrivacyParams& params) {
  if (RegimeFor(m, params) == Regime::kSmall) {
    return {NoiseBitsPerUser(m, params) * m, 0.5};
  }
  return {m, LargeRegimeCoinBias(m, params)};
}

absl::StatusOr<BinomialPmf> Binomial(std::int64_t trials, double success,
                                     std::int64_t support_cap) {
  if (trials < 0) {
    return absl::InvalidArgumentError(
        absl::StrCat("binomial trials must be >= 0, got ", trials));
  }
  if (!(success >= 0.0 && success <= 1.0)) {
    return absl::InvalidArgumentError(
        absl::StrCat("binomial success must lie in [0, 1], got ", success));
  }
  if (trials + 1 > support_cap) {
    return absl::ResourceExhaustedError(
        absl::StrCat("binomial support of ", trials + 1,
                     " points exceeds the cap of ", support_cap));
  }
  BinomialPmf pmf;
  pmf.trials = trials;
  pmf.success = success;
  const auto size = static_cast<std::size_t>(trials + 1);
  pmf.log_mass.assign(size, kNegInf);
  pmf.mass.assign(size, 0.0);

  if (success == 0.0 || success == 1.0) {
    const std::size_t point = success == 0.0 ? 0 : size - 1;
    pmf.log_mass[point] = 0.0;
    pmf.mass[point] = 1.0;
    return pmf;
  }

  // Unnormalized log weights relative to the mode, where the weight is 1.
  const double n = static_cast<double>(trials);
  const double log_odds = std::log(success) - std::log1p(-success);
  const auto mode = std::min<std::int64_t>(
      trials, static_cast<std::int64_t>(std::floor((n + 1.0) * success)));
  std::vector<double>& w = pmf.log_mass;
  w[static_cast<std::size_t>(mode)] = 0.0;
  for (std::int64_t i = mode + 1; i <= trials; ++i) {
    w[i] = w[i - 1] + std::log((n - static_cast<double>(i) + 1.0) /
                               static_cast<double>(i)) +
           log_odds;
  }
  for (std::int64_t i = mode - 1; i >= 0; --i) {
    w[i] = w[i + 1] - std::log((n - static_cast<double>(i)) /
                               static_cast<double>(i + 1)) -
           log_odds;
  }

  CompensatedSum total;
  for (double lw : w) total.Add(std::exp(lw));
  const double log_total = std::log(total.value());
  for (std::size_t i = 0; i < size; ++i) {
    w[i] -= log_total;
    pmf.mass[i] = std::exp(w[i]);
  }
  return pmf;
}

absl::StatusOr<BinomialPmf> NoiseDistribution(std::int64_t m,
                                              const PrivacyParams& params,
                                              std::int64_t support_cap) {
  if (m < 1) {
    return absl::InvalidArgumentError(
        absl::StrCat("batch size must be >= 1, got ", m));
  }
  const NoiseModel model = NoiseModelFor(m, params);
  return Binomial(model.trials, model.success, support_cap);
}

double HockeyStickDivergence(std::span<const double> p,
                             std::span<const double> q, double epsilon) {
  const double scale = std::exp(epsilon);
  CompensatedSum total;
  for (std::size_t i = 0; i < p.size(); ++i) {
    const double qi = i < q.size() ? q[i] : 0.0;
    const double term = p[i] - scale * qi;
    if (term > 0.0) total.Add(term);
  }
  return total.value();
}

Divergences UnitShiftDivergences(const BinomialPmf& pmf, double epsilon) {
  CompensatedSum forward;
  CompensatedSum backward;
  for (std::int64_t s = 0; s <= pmf.trials + 1; ++s) {
    const double here = LogMassAt(pmf, s);
    const double below = LogMassAt(pmf, s - 1);
    forward.Add(PositivePart(here, epsilon + below));
    backward.Add(PositivePart(below, epsilon + here));
  }
  return {forward.value(), backward.value()};
}

absl::StatusOr<NeighborOutputs> NeighborOutputDistributions(
    const NeighborPair& pair, const PrivacyParams& params,
    std::int64_t support_cap) {
  if (pair.m < 1 || pair.k_rest < 0 || pair.k_rest > pair.m - 1) {
    return absl::InvalidArgumentError(
        absl::StrCat("need m >= 1 and 0 <= k_rest <= m - 1, got m = ", pair.m,
                     ", k_rest = ", pair.k_rest));
  }
  absl::StatusOr<BinomialPmf> noise =
      NoiseDistribution(pair.m, params, support_cap);
  if (!noise.ok()) return noise.status();
  const auto size = static_cast<std::size_t>(noise->trials + pair.m + 1);
  NeighborOutputs out;
  out.without_user.assign(size, 0.0);
  out.with_user.assign(size, 0.0);
  for (std::size_t b = 0; b < noise->mass.size(); ++b) {
    const auto k = static_cast<std::size_t>(pair.k_rest);
    out.without_user[b + k] = noise->mass[b];
    out.with_user[b + k + 1] = noise->mass[b];
  }
  return out;
}

absl::StatusOr<AuditReport> HockeyStick(std::int64_t m,
                                        const PrivacyParams& params,
                                        std::int64_t support_cap) {
  absl::StatusOr<BinomialPmf> noise = NoiseDistribution(m, params, support_cap);
  if (!noise.ok()) return noise.status();
  const Divergences d = UnitShiftDivergences(*noise, params.epsilon());
  AuditReport report;
  report.m = m;
  report.epsilon = params.epsilon();
  report.delta = params.delta();
  report.tau = params.tau();
  report.regime = RegimeFor(m, params);
  report.divergence_forward = d.forward;
  report.divergence_backward = d.backward;
  report.pass = std::max(d.forward, d.backward) <= params.delta();
  return report;
}

absl::StatusOr<BatchSizeSpec> BatchSizeSpec::Parse(absl::string_view text) {
  const absl::string_view original = text;
  bool tau = false;
  if (text.size() >= 3 && text.substr(text.size() - 3) == "tau") {
    tau = true;
    text.remove_suffix(3);
    if (text.empty()) return CeilTauTimes(1);
  }
  std::int64_t value = 0;
  auto [end, ec] = std::from_chars(text.data(), text.data() + text.size(),
                                   value);
  if (ec != std::errc() || end != text.data() + text.size() || value < 1) {
    return absl::InvalidArgumentError(
        absl::StrCat("batch size '", original,
                     "' is not a positive integer, 'tau' or '<c>tau'"));
  }
  return BatchSizeSpec{value, tau};
}

std::int64_t BatchSizeSpec::Resolve(const PrivacyParams& params) const {
  if (!tau_multiple) return value;
  return value * static_cast<std::int64_t>(std::ceil(params.tau()));
}

std::string BatchSizeSpec::ToString() const {
  if (!tau_multiple) return absl::StrCat(value);
  return value == 1 ? "tau" : absl::StrCat(value, "tau");
}

std::vector<AuditCell> AuditGrid(std::span<const BatchSizeSpec> ms,
                                 std::span<const double> epsilons,
                                 std::span<const double> deltas,
                                 std::int64_t support_cap) {
  std::vector<AuditCell> cells;
  cells.reserve(ms.size() * epsilons.size() * deltas.size());
  for (const BatchSizeSpec& m_spec : ms) {
    for (double epsilon : epsilons) {
      for (double delta : deltas) {
        AuditCell& cell = cells.emplace_back();
        cell.m_spec = m_spec;
        cell.epsilon = epsilon;
        cell.delta = delta;
        absl::StatusOr<PrivacyParams> params =
            PrivacyParams::Create(epsilon, delta);
        if (!params.ok()) {
          cell.status = params.status();
          continue;
        }
        cell.m = m_spec.Resolve(*params);
        absl::StatusOr<AuditReport> report =
            HockeyStick(cell.m, *params, support_cap);
        if (!report.ok()) {
          cell.status = report.status();
          continue;
        }
        cell.report = *report;
      }
    }
  }
  return cells;
}

std::string AuditCsvHeader() {
  return "m,epsilon,delta,div_forward,div_backward,pass";
}

std::string AuditCsvRow(const AuditCell& cell) {
  const std::string m =
      cell.m > 0 ? absl::StrCat(cell.m) : cell.m_spec.ToString();
  if (!cell.status.ok()) {
    return absl::StrCat(m, ",", FormatDouble(cell.epsilon), ",",
                        FormatDouble(cell.delta), ",,,error");
  }
  return absl::StrCat(m, ",", FormatDouble(cell.epsilon), ",",
                      FormatDouble(cell.delta), ",",
                      FormatDouble(cell.report.divergence_forward), ",",
                      FormatDouble(cell.report.divergence_backward), ",",
                      cell.report.pass ? "true" : "false");
}

}  // namespace shuffle_bandits
