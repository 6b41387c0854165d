// Copyright 2026 The cldyn Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef CLDYN_TRAINER_HPP_
#define CLDYN_TRAINER_HPP_

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "cldyn/coefficient_tracker.hpp"
#include "cldyn/contrastive_loss.hpp"
#include "cldyn/downstream_probe.hpp"
#include "cldyn/relu_encoder.hpp"
#include "cldyn/synth_data.hpp"

namespace cldyn {

enum class Mode { kSingle, kMulti };

std::string ToString(Mode mode);
// Throws ConfigError for anything but "single" / "multi".
Mode ParseMode(std::string_view text);

struct TrainConfig {
  DataConfig data;
  std::size_t m = 50;
  double sigma0 = 0.01;
  double eta = 0.01;
  double tau = 1.0;
  std::size_t epochs = 200;  // full-batch, one step per epoch
  NegativePolicy negatives;
  std::size_t probe_every = 10;
  std::size_t log_every = 10;
  Mode mode = Mode::kSingle;
  std::uint64_t seed = 0;
  ProbeOptions probe;
  double stage_threshold = 1.0;
  // Least-squares cross-check of the ledger at logged steps. Needs d > n.
  bool cross_check = true;

  void Validate() const;
  // Sets the run seed (data, negatives, test set and weights all derive
  // from it).
  TrainConfig& WithSeed(std::uint64_t s) {
    seed = s;
    data.seed = s;
    return *this;
  }
};

TrainConfig Figure1Config(Mode mode);
TrainConfig TheoryConfig(Mode mode);
// "figure1" or "theory"; nullopt otherwise.
std::optional<TrainConfig> PresetConfig(std::string_view name, Mode mode);

// One row per logged (or probed) step; values describe W(step).
struct TraceRecord {
  std::size_t step = 0;
  double loss = 0.0;
  CoefficientSummary coef;
  std::optional<CoefficientSummary> coef_tilde;
  double ell_pos_mean = 0.0;     // mean l'_i (h-centered term for multi)
  double softmax_residual = 0.0;  // max |l'_i + sum_j l'_ij - 1|
  std::optional<double> probe_accuracy;
  int stage = 1;
};

// Largest deviations seen by the run's built-in consistency checks.
struct ConsistencyStats {
  double max_softmax_residual = 0.0;        // every step
  double max_ledger_mismatch = 0.0;         // logged steps
  double max_reconstruction_residual = 0.0;  // logged steps
  double max_gradient_residual = 0.0;        // logged steps
  std::size_t cross_checks = 0;
};

struct RunResult {
  TrainConfig config;
  Dataset data;
  NegativeSets negatives;
  EncoderWeights w;
  EncoderWeights w0;
  std::optional<EncoderWeights> w_tilde;
  std::optional<EncoderWeights> w0_tilde;
  Eigen::MatrixXd init_inner;  // <w_r(0), xi_i>
  std::optional<Eigen::MatrixXd> init_inner_tilde;
  CoefficientLedger ledger;
  std::vector<TraceRecord> trace;
  ConsistencyStats consistency;
  double initial_loss = 0.0;
  double final_loss = 0.0;
  // mean_i log(1 + M_i), doubled for the two-term multi-modal loss.
  double reference_loss = 0.0;
  std::optional<double> final_probe_accuracy;
  std::optional<std::size_t> stage_boundary;
};

// State visible to observers before the update of step `step`.
struct StepView {
  std::size_t step;
  const EncoderWeights& w;
  const EncoderWeights* w_tilde;
  const CoefficientLedger& ledger;
  const Evaluation& eval;
};

struct TrainHooks {
  std::function<void(const TraceRecord&)> on_trace;
  std::function<void(const StepView&)> on_step;
};

class TrainingDiverged : public std::runtime_error {
 public:
  TrainingDiverged(const std::string& what, std::size_t step, double max_abs_w,
                   std::vector<TraceRecord> partial)
      : std::runtime_error(what),
        step_(step),
        max_abs_w_(max_abs_w),
        partial_(std::move(partial)) {}
  std::size_t step() const { return step_; }
  double max_abs_weight() const { return max_abs_w_; }
  const std::vector<TraceRecord>& partial_trace() const { return partial_; }

 private:
  std::size_t step_;
  double max_abs_w_;
  std::vector<TraceRecord> partial_;
};

// Full-batch gradient descent. Single mode updates W only; multi mode
// updates W and W~ from the same loss evaluation. Aborts with
// TrainingDiverged when the loss is non-finite or exceeds 10x its initial
// value.
RunResult Train(const TrainConfig& cfg, const TrainHooks& hooks = {});

// max_rho drives the single-modal run, max_gamma the multi-modal one.
double DominantCoefficient(const TraceRecord& row, Mode mode);

// First logged step whose dominant coefficient reaches `threshold`.
std::optional<std::size_t> DetectStageBoundary(
    const std::vector<TraceRecord>& trace, Mode mode, double threshold = 1.0);

struct AssumptionItem {
  std::string name;
  std::string description;
  double value = 0.0;
  std::string bound;  // human-readable target, e.g. ">= 1"
  bool ok = true;
};

struct AssumptionReport {
  std::vector<AssumptionItem> items;

  bool AllOk() const;
  const AssumptionItem& Get(std::string_view name) const;
};

// Raw ratios for each regime condition with a pass/warn flag; the hidden
// constants make strict verdicts impossible, so "ok" uses unit constants.
AssumptionReport CheckAssumptions(const TrainConfig& cfg);

}  // namespace cldyn

#endif  // CLDYN_TRAINER_HPP_
