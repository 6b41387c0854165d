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

#include "cldyn/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace cldyn {

std::string ToString(Mode mode) {
  return mode == Mode::kSingle ? "single" : "multi";
}

Mode ParseMode(std::string_view text) {
  if (text == "single") return Mode::kSingle;
  if (text == "multi") return Mode::kMulti;
  throw ConfigError("unknown mode '" + std::string(text) +
                    "' (expected single or multi)");
}

void TrainConfig::Validate() const {
  data.Validate();
  if (m < 1) throw ConfigError("m must be >= 1");
  if (!(sigma0 >= 0.0)) throw ConfigError("sigma0 must be >= 0");
  if (!(eta >= 0.0) || !std::isfinite(eta)) throw ConfigError("eta must be >= 0");
  if (!(tau > 0.0)) throw ConfigError("tau must be > 0");
  if (epochs < 1) throw ConfigError("epochs must be >= 1");
  if (log_every < 1) throw ConfigError("log_every must be >= 1");
  if (probe_every < 1) throw ConfigError("probe_every must be >= 1");
  if (mode == Mode::kMulti && data.d_tilde < 1) {
    throw ConfigError("multi-modal runs need d_tilde >= 1");
  }
}

TrainConfig Figure1Config(Mode mode) {
  TrainConfig cfg;
  cfg.data = Figure1Data();
  cfg.mode = mode;
  return cfg;
}

TrainConfig TheoryConfig(Mode mode) {
  TrainConfig cfg;
  cfg.data = TheoryData();
  cfg.mode = mode;
  return cfg;
}

std::optional<TrainConfig> PresetConfig(std::string_view name, Mode mode) {
  if (name == "figure1") return Figure1Config(mode);
  if (name == "theory") return TheoryConfig(mode);
  return std::nullopt;
}

double DominantCoefficient(const TraceRecord& row, Mode mode) {
  return mode == Mode::kSingle ? row.coef.max_rho : row.coef.max_gamma;
}

std::optional<std::size_t> DetectStageBoundary(
    const std::vector<TraceRecord>& trace, Mode mode, double threshold) {
  for (const auto& row : trace) {
    if (DominantCoefficient(row, mode) >= threshold) return row.step;
  }
  return std::nullopt;
}

namespace {

// Checks the ledger of one encoder against the least-squares projection of
// W_t - W_0 and the gradient rows against the same basis.
struct CrossCheck {
  double ledger_mismatch = 0.0;
  double reconstruction = 0.0;
  double gradient_residual = 0.0;
};

CrossCheck RunCrossCheck(const SpanProjector& projector,
                         const EncoderWeights& w, const EncoderWeights& w0,
                         const Eigen::VectorXd& gamma,
                         const Eigen::MatrixXd& rho, const Eigen::MatrixXd& grad,
                         const Eigen::VectorXd& signal,
                         const Eigen::MatrixXd& noise) {
  CrossCheck out;
  const Eigen::MatrixXd delta = w.w - w0.w;
  const Decomposition proj = projector.Project(delta);
  out.ledger_mismatch = LedgerMismatch(gamma, rho, proj);

  Eigen::MatrixXd scaled_rho = rho;
  for (Eigen::Index i = 0; i < rho.cols(); ++i) {
    scaled_rho.col(i) /= noise.row(i).squaredNorm();
  }
  const Eigen::MatrixXd recon =
      gamma * (signal / signal.squaredNorm()).transpose() + scaled_rho * noise;
  const double norm = delta.norm();
  out.reconstruction = norm > 0.0 ? (delta - recon).norm() / norm : 0.0;

  out.gradient_residual = projector.Project(grad).MaxRelativeResidual();
  return out;
}

double MaxAbs(const EncoderWeights& w, const std::optional<EncoderWeights>& wt) {
  double v = w.w.size() ? w.w.cwiseAbs().maxCoeff() : 0.0;
  if (wt && wt->w.size()) v = std::max(v, wt->w.cwiseAbs().maxCoeff());
  return v;
}

}  // namespace

RunResult Train(const TrainConfig& input, const TrainHooks& hooks) {
  TrainConfig cfg = input;
  cfg.data.seed = cfg.seed;
  cfg.Validate();
  const bool multi = cfg.mode == Mode::kMulti;

  RunResult run;
  run.config = cfg;
  {
    Rng rng = Rng::ForStream(cfg.seed, Stream::kTrainData);
    run.data = GenTrain(cfg.data, rng);
  }
  {
    Rng rng = Rng::ForStream(cfg.seed, Stream::kNegatives);
    run.negatives = BuildNegatives(run.data, cfg.negatives, rng);
  }
  TestSplits splits;
  {
    Rng rng = Rng::ForStream(cfg.seed, Stream::kTestData);
    splits = GenTest(cfg.data, rng);
  }
  {
    Rng rng = Rng::ForStream(cfg.seed, Stream::kWeights);
    run.w = InitWeights(cfg.m, cfg.data.d, cfg.sigma0, rng);
  }
  if (multi) {
    Rng rng = Rng::ForStream(cfg.seed, Stream::kWeightsTilde);
    run.w_tilde = InitWeights(cfg.m, cfg.data.d_tilde, cfg.sigma0, rng);
    run.w0_tilde = run.w_tilde;
  }
  run.w0 = run.w;

  const Dataset& data = run.data;
  const ContrastiveTask task{data, run.negatives, cfg.tau};
  const BasisNorms norms = BasisNorms::Of(data);
  run.init_inner = run.w0.w * data.noise1.transpose();
  if (multi) run.init_inner_tilde = run.w0_tilde->w * data.noise2.transpose();
  run.ledger = CoefficientLedger::Zero(cfg.m, data.size(), multi);

  double reference = 0.0;
  for (const auto& negs : run.negatives) {
    reference += std::log1p(static_cast<double>(negs.size()));
  }
  run.reference_loss =
      (multi ? 2.0 : 1.0) * reference / static_cast<double>(data.size());

  std::optional<SpanProjector> projector, projector_tilde;
  if (cfg.cross_check) {
    projector.emplace(data.mu, data.noise1);
    if (multi) projector_tilde.emplace(data.mu_tilde, data.noise2);
  }

  bool stage_two = false;
  for (std::size_t t = 0; t <= cfg.epochs; ++t) {
    const Evaluation ev =
        multi ? EvaluateMulti(run.w, *run.w_tilde, task) : EvaluateSingle(run.w, task);
    if (t == 0) run.initial_loss = ev.loss;
    if (!std::isfinite(ev.loss) || ev.loss > 10.0 * run.initial_loss) {
      const double max_w = MaxAbs(run.w, run.w_tilde);
      std::ostringstream msg;
      msg << "training diverged at step " << t << ": loss " << ev.loss
          << ", max |w| " << max_w;
      throw TrainingDiverged(msg.str(), t, max_w, run.trace);
    }
    run.final_loss = ev.loss;
    const double softmax_residual = ev.MaxNormalizationError();
    run.consistency.max_softmax_residual =
        std::max(run.consistency.max_softmax_residual, softmax_residual);

    if (hooks.on_step) {
      hooks.on_step(StepView{t, run.w, run.w_tilde ? &*run.w_tilde : nullptr,
                             run.ledger, ev});
    }

    const bool last = t == cfg.epochs;
    const bool log_step = last || t % cfg.log_every == 0;
    const bool probe_step = last || t % cfg.probe_every == 0;
    if (log_step && projector) {
      const CrossCheck c = RunCrossCheck(*projector, run.w, run.w0,
                                         run.ledger.gamma, run.ledger.rho,
                                         ev.grad.grad_w, data.mu, data.noise1);
      auto& s = run.consistency;
      s.max_ledger_mismatch = std::max(s.max_ledger_mismatch, c.ledger_mismatch);
      s.max_reconstruction_residual =
          std::max(s.max_reconstruction_residual, c.reconstruction);
      s.max_gradient_residual = std::max(s.max_gradient_residual, c.gradient_residual);
      if (multi) {
        const CrossCheck ct = RunCrossCheck(
            *projector_tilde, *run.w_tilde, *run.w0_tilde,
            *run.ledger.gamma_tilde, *run.ledger.rho_tilde,
            *ev.grad.grad_w_tilde, data.mu_tilde, data.noise2);
        s.max_ledger_mismatch = std::max(s.max_ledger_mismatch, ct.ledger_mismatch);
        s.max_reconstruction_residual =
            std::max(s.max_reconstruction_residual, ct.reconstruction);
        s.max_gradient_residual =
            std::max(s.max_gradient_residual, ct.gradient_residual);
      }
      ++s.cross_checks;
    }
    if (log_step || probe_step) {
      TraceRecord row;
      row.step = t;
      row.loss = ev.loss;
      const LedgerSummary summary =
          Summarize(run.ledger, run.init_inner,
                    multi ? &*run.init_inner_tilde : nullptr);
      row.coef = summary.primary;
      row.coef_tilde = summary.tilde;
      row.ell_pos_mean = ev.derivatives.MeanPositive();
      row.softmax_residual = softmax_residual;
      if (probe_step) {
        row.probe_accuracy = ProbeAccuracy(run.w, splits, cfg.probe).accuracy;
        run.final_probe_accuracy = row.probe_accuracy;
      }
      if (DominantCoefficient(row, cfg.mode) >= cfg.stage_threshold) {
        stage_two = true;
      }
      row.stage = stage_two ? 2 : 1;
      run.trace.push_back(row);
      if (hooks.on_trace) hooks.on_trace(row);
    }

    if (last) break;
    run.w.w -= cfg.eta * ev.grad.grad_w;
    if (multi) run.w_tilde->w -= cfg.eta * *ev.grad.grad_w_tilde;
    Accumulate(run.ledger, ev.grad, t, cfg.eta, norms);
  }
  run.stage_boundary =
      DetectStageBoundary(run.trace, cfg.mode, cfg.stage_threshold);
  return run;
}

bool AssumptionReport::AllOk() const {
  return std::all_of(items.begin(), items.end(),
                     [](const AssumptionItem& it) { return it.ok; });
}

const AssumptionItem& AssumptionReport::Get(std::string_view name) const {
  for (const auto& it : items) {
    if (it.name == name) return it;
  }
  throw std::out_of_range("no assumption item " + std::string(name));
}

AssumptionReport CheckAssumptions(const TrainConfig& cfg) {
  const DataConfig& data = cfg.data;
  const double d = static_cast<double>(data.d);
  const double n = static_cast<double>(data.n);
  const double m = static_cast<double>(cfg.m);
  const double mu = data.mu.norm();
  const double sxi = data.sigma_xi;
  const double s0 = cfg.sigma0;
  const double snr = mu / (sxi * std::sqrt(d));
  const double inf = std::numeric_limits<double>::infinity();

  AssumptionReport rep;
  auto add = [&](std::string name, std::string desc, double value,
                 std::string bound, bool ok) {
    rep.items.push_back({std::move(name), std::move(desc), value,
                         std::move(bound), ok});
  };
  add("snr", "SNR = |mu| / (sigma_xi sqrt(d))", snr, "informational", true);
  add("n_snr_sq", "n * SNR^2 (should be order one)", n * snr * snr,
      "in [0.1, 10]", n * snr * snr >= 0.1 && n * snr * snr <= 10.0);
  add("d_over_n_sq", "d / n^2", d / (n * n), ">= 1", d >= n * n);
  const double d_req2 = s0 * sxi > 0 ? n / (s0 * sxi) : inf;
  add("d_over_n_by_sigma0_sigma_xi", "d / (n / (sigma0 sigma_xi))", d / d_req2,
      ">= 1", d >= d_req2);
  const double d_req3 = s0 * mu > 0 ? 1.0 / (s0 * s0 * mu * mu) : inf;
  add("d_over_inv_sigma0_sq_mu_sq", "d / (sigma0^-2 |mu|^-2)", d / d_req3,
      ">= 1", d >= d_req3);
  const double eta_cap1 = mu > 0 ? m / (mu * mu) : inf;
  add("eta_over_m_by_mu_sq", "eta / (m |mu|^-2)", cfg.eta / eta_cap1, "<= 1",
      cfg.eta <= eta_cap1);
  const double eta_cap2 = sxi > 0 ? n * m / (sxi * sxi * d) : inf;
  add("eta_over_nm_by_sigma_xi_sq_d", "eta / (n m sigma_xi^-2 d^-1)",
      cfg.eta / eta_cap2, "<= 1", cfg.eta <= eta_cap2);
  const double init_scale = s0 * std::max(sxi * std::sqrt(d), mu);
  add("sigma0_scale", "sigma0 * max(sigma_xi sqrt(d), |mu|)", init_scale,
      "<= 1", init_scale <= 1.0);
  const double eps_mu = mu > 0 ? data.sigma_eps / mu : inf;
  add("sigma_eps_over_mu", "sigma_eps / |mu|", eps_mu, "<= 1", eps_mu <= 1.0);
  const double eps_xi = sxi > 0 ? data.sigma_eps / sxi : inf;
  add("sigma_eps_over_sigma_xi", "sigma_eps / sigma_xi", eps_xi, "< 1",
      eps_xi < 1.0);
  const double c_mu = mu > 0 ? data.mu_tilde.norm() / mu : inf;
  add("c_mu", "C_mu = |mu~| / |mu|", c_mu, ">= 2.66", c_mu >= 2.66);
  return rep;
}

}  // namespace cldyn
