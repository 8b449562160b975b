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

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <cstdint>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "absl/status/status.h"
#include "absl/status/statusor.h"
#include "shuffle_bandits/audit.h"
#include "shuffle_bandits/bandit.h"
#include "shuffle_bandits/env.h"
#include "shuffle_bandits/harness.h"
#include "shuffle_bandits/mechanism.h"
#include "shuffle_bandits/random.h"

namespace py = pybind11;
using namespace shuffle_bandits;

namespace {

void Raise(const absl::Status& status) {
  const std::string message(status.message());
  if (absl::IsInvalidArgument(status)) throw py::value_error(message);
  if (absl::IsNotFound(status)) {
    PyErr_SetString(PyExc_FileNotFoundError, message.c_str());
    throw py::error_already_set();
  }
  throw std::runtime_error(message);
}

template <typename T>
T Unwrap(absl::StatusOr<T> value) {
  if (!value.ok()) Raise(value.status());
  return *std::move(value);
}

py::dict ReportDict(const AuditReport& r) {
  py::dict d;
  d["m"] = r.m;
  d["epsilon"] = r.epsilon;
  d["delta"] = r.delta;
  d["tau"] = r.tau;
  d["regime"] = RegimeName(r.regime);
  d["div_forward"] = r.divergence_forward;
  d["div_backward"] = r.divergence_backward;
  d["pass"] = r.pass;
  return d;
}

BatchSizeSpec ToBatchSpec(const std::variant<std::int64_t, std::string>& m) {
  if (const auto* literal = std::get_if<std::int64_t>(&m)) {
    return BatchSizeSpec::Literal(*literal);
  }
  return Unwrap(BatchSizeSpec::Parse(std::get<std::string>(m)));
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Shuffle-model private bandits: mechanism, audit and engines";

  py::class_<PrivacyParams>(m, "PrivacyParams")
      .def_property_readonly("epsilon", &PrivacyParams::epsilon)
      .def_property_readonly("delta", &PrivacyParams::delta)
      .def_property_readonly("tau", &PrivacyParams::tau)
      .def_property_readonly("sigma2", &PrivacyParams::sigma2)
      .def_property_readonly("sigma", &PrivacyParams::sigma)
      .def("__repr__", [](const PrivacyParams& p) {
        return "PrivacyParams(epsilon=" + std::to_string(p.epsilon()) +
               ", delta=" + std::to_string(p.delta()) +
               ", tau=" + std::to_string(p.tau()) + ")";
      });

  m.def(
      "derive_params",
      [](double epsilon, double delta) {
        return Unwrap(PrivacyParams::Create(epsilon, delta));
      },
      py::arg("epsilon"), py::arg("delta"));

  m.def(
      "regime",
      [](std::int64_t batch, const PrivacyParams& p) {
        return std::string(RegimeName(RegimeFor(batch, p)));
      },
      py::arg("m"), py::arg("params"));
  m.def("payload_length", &PayloadLength, py::arg("m"), py::arg("params"));
  m.def("noise_offset", &NoiseOffset, py::arg("m"), py::arg("params"));

  m.def(
      "private_sum",
      [](const std::vector<std::uint8_t>& bits, const PrivacyParams& p,
         std::uint64_t seed) {
        Engine rng = SeedSpec{seed, 0}.MakeEngine(StreamLabel::kAdHoc, 0, 0);
        return Unwrap(PrivateSum(bits, p, rng)).value;
      },
      py::arg("bits"), py::arg("params"), py::arg("seed") = 0,
      "Debiased shuffle-model sum of a batch of bits.");

  m.def(
      "sample_errors",
      [](std::int64_t batch, const PrivacyParams& p, std::int64_t n,
         std::uint64_t seed, std::int64_t ones) {
        if (batch < 1 || ones < 0 || ones > batch || n < 0) {
          throw py::value_error("need m >= 1, n >= 0 and 0 <= ones <= m");
        }
        std::vector<std::uint8_t> bits(static_cast<std::size_t>(batch), 0);
        for (std::int64_t i = 0; i < ones; ++i) bits[i] = 1;
        std::vector<double> errors;
        errors.reserve(static_cast<std::size_t>(n));
        const SeedSpec spec{seed, 0};
        for (std::int64_t run = 0; run < n; ++run) {
          Engine rng = spec.MakeEngine(StreamLabel::kAdHoc, 0,
                                       static_cast<std::uint64_t>(run));
          errors.push_back(Unwrap(PrivateSum(bits, p, rng)).ErrorFrom(ones));
        }
        return errors;
      },
      py::arg("m"), py::arg("params"), py::arg("n"), py::arg("seed") = 0,
      py::arg("ones") = 0,
      "Summation errors over n seeded runs; same streams as the CLI.");

  m.def(
      "noise_distribution",
      [](std::int64_t batch, const PrivacyParams& p, std::int64_t cap) {
        return Unwrap(NoiseDistribution(batch, p, cap)).mass;
      },
      py::arg("m"), py::arg("params"), py::arg("support_cap") =
                                           kDefaultSupportCap);

  m.def(
      "hockey_stick",
      [](std::int64_t batch, const PrivacyParams& p) {
        return ReportDict(Unwrap(HockeyStick(batch, p)));
      },
      py::arg("m"), py::arg("params"));

  m.def(
      "audit_grid",
      [](const std::vector<std::variant<std::int64_t, std::string>>& ms,
         const std::vector<double>& epsilons,
         const std::vector<double>& deltas) {
        std::vector<BatchSizeSpec> specs;
        for (const auto& item : ms) specs.push_back(ToBatchSpec(item));
        py::list out;
        for (const AuditCell& cell : AuditGrid(specs, epsilons, deltas)) {
          py::dict d;
          if (cell.status.ok()) {
            d = ReportDict(cell.report);
          } else {
            d["m"] = cell.m_spec.ToString();
            d["epsilon"] = cell.epsilon;
            d["delta"] = cell.delta;
            d["error"] = std::string(cell.status.message());
          }
          out.append(d);
        }
        return out;
      },
      py::arg("ms"), py::arg("epsilons"), py::arg("deltas"));

  py::class_<EliminationEvent>(m, "EliminationEvent")
      .def_readonly("arm", &EliminationEvent::arm)
      .def_readonly("phase", &EliminationEvent::phase);

  py::class_<RegretTrace>(m, "RegretTrace")
      .def_readonly("checkpoints", &RegretTrace::checkpoints)
      .def_readonly("cumulative_regret", &RegretTrace::cumulative_regret)
      .def_readonly("final_regret", &RegretTrace::final_regret)
      .def_readonly("total_pulls", &RegretTrace::total_pulls)
      .def_readonly("partial_batch_pulls", &RegretTrace::partial_batch_pulls)
      .def_readonly("phases_completed", &RegretTrace::phases_completed)
      .def_readonly("mechanism_invocations",
                    &RegretTrace::mechanism_invocations)
      .def_readonly("eliminations", &RegretTrace::eliminations)
      .def_readonly("clean_event_violated",
                    &RegretTrace::clean_event_violated)
      .def_readonly("optimal_arm_eliminated",
                    &RegretTrace::optimal_arm_eliminated);

  m.def(
      "run_episode",
      [](const std::vector<double>& means, std::int64_t horizon,
         const std::string& variant, std::optional<double> epsilon,
         std::optional<double> delta, std::uint64_t master_seed,
         std::uint64_t run_index, std::vector<std::int64_t> checkpoints,
         std::optional<std::int64_t> constant_batch, bool noiseless,
         bool full_trace) {
        const BanditInstance instance = Unwrap(MakeInstance(
            static_cast<int>(means.size()), means, horizon));
        const Variant v = Unwrap(ParseVariant(variant));
        std::optional<PrivacyParams> privacy;
        if (epsilon.has_value() != delta.has_value()) {
          throw py::value_error("give both epsilon and delta, or neither");
        }
        if (epsilon) privacy = Unwrap(PrivacyParams::Create(*epsilon, *delta));
        EngineConfig config = Unwrap(MakeEngineConfig(
            v, privacy, horizon, VariantOptions{constant_batch, noiseless}));
        config.checkpoints =
            checkpoints.empty() ? std::vector<std::int64_t>{horizon}
                                : std::move(checkpoints);
        config.full_trace = full_trace;
        return Unwrap(
            RunEpisode(instance, config, SeedSpec{master_seed, run_index}));
      },
      py::arg("means"), py::arg("horizon"), py::arg("variant"),
      py::arg("epsilon") = py::none(), py::arg("delta") = py::none(),
      py::arg("master_seed") = 0, py::arg("run_index") = 0,
      py::arg("checkpoints") = std::vector<std::int64_t>{},
      py::arg("constant_batch") = py::none(), py::arg("noiseless") = false,
      py::arg("full_trace") = false);

  m.def(
      "run_experiment",
      [](const std::filesystem::path& config_path, int threads,
         bool full_trace, bool emit) {
        const ExperimentConfig config = Unwrap(ParseConfig(config_path));
        const RunOptions options{threads, full_trace};
        ExperimentResult result;
        {
          py::gil_scoped_release release;
          absl::StatusOr<ExperimentResult> r = RunExperiment(config, options);
          if (!r.ok()) {
            py::gil_scoped_acquire acquire;
            Raise(r.status());
          }
          result = *std::move(r);
        }
        if (emit) {
          if (absl::Status s = EmitOutputs(result, config, options); !s.ok()) {
            Raise(s);
          }
        }
        return ResultsCsv(config, result);
      },
      py::arg("config"), py::arg("threads") = 1, py::arg("full_trace") = false,
      py::arg("emit") = true,
      "Runs a config file; returns the results.csv text.");
}
