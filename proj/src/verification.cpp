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

#include "cldyn/verification.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

namespace cldyn {

namespace {

// Central differences are unreliable within one step of a ReLU kink.
constexpr double kKinkMargin = 1e-3;

bool NearKink(const GradientInstance& inst) {
  const Eigen::MatrixXd aug = inst.data.noise1 + inst.data.aug_noise;
  const Eigen::MatrixXd first[] = {inst.data.mu.transpose(), inst.data.noise1, aug};
  for (const auto& patches : first) {
    if (PreActivations(inst.w, patches).cwiseAbs().minCoeff() < kKinkMargin) {
      return true;
    }
  }
  const Eigen::MatrixXd second[] = {inst.data.mu_tilde.transpose(),
                                    inst.data.noise2};
  for (const auto& patches : second) {
    if (PreActivations(inst.w_tilde, patches).cwiseAbs().minCoeff() < kKinkMargin) {
      return true;
    }
  }
  return false;
}

// A vanishing gradient makes the relative error meaningless.
bool Saturated(const GradientInstance& inst) {
  const ContrastiveTask task{inst.data, inst.negatives, inst.tau};
  const GradientPair multi = GradMulti(inst.w, inst.w_tilde, task);
  return GradSingle(inst.w, task).grad_w.norm() < 1e-6 ||
         multi.grad_w.norm() < 1e-6 || multi.grad_w_tilde->norm() < 1e-6;
}

}  // namespace

GradientInstance RandomGradientInstance(std::uint64_t seed) {
  Rng rng(SplitMix64(seed));
  for (int attempt = 0; attempt < 1000; ++attempt) {
    DataConfig cfg;
    cfg.d = 4 + rng.Index(13);
    cfg.d_tilde = 4 + rng.Index(13);
    cfg.n = 4 + rng.Index(3);
    const std::size_t m = 2 + rng.Index(3);
    const std::size_t negatives = 1 + rng.Index(3);
    const double mu_scale = 2.0 / std::sqrt(static_cast<double>(cfg.d));
    const double mu_tilde_scale = 2.0 / std::sqrt(static_cast<double>(cfg.d_tilde));
    cfg.mu = Eigen::VectorXd::NullaryExpr(
        static_cast<Eigen::Index>(cfg.d), [&] { return mu_scale * rng.Normal(); });
    cfg.mu_tilde = Eigen::VectorXd::NullaryExpr(
        static_cast<Eigen::Index>(cfg.d_tilde),
        [&] { return mu_tilde_scale * rng.Normal(); });
    cfg.nu = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(cfg.d));
    cfg.sigma_xi = cfg.sigma_xi_tilde = 1.0;
    cfg.sigma_eps = 0.3;

    GradientInstance inst;
    inst.data = GenTrain(cfg, rng);
    std::size_t pos = 0;
    for (int y : inst.data.labels) pos += (y == 1);
    if (std::min(pos, cfg.n - pos) < negatives) continue;
    inst.negatives =
        BuildNegatives(inst.data, NegativePolicy::Fixed(negatives), rng);
    inst.w = InitWeights(m, cfg.d, 0.7, rng);
    inst.w_tilde = InitWeights(m, cfg.d_tilde, 0.7, rng);
    inst.tau = 0.5 + 1.5 * rng.Uniform();
    if (NearKink(inst) || Saturated(inst)) continue;
    return inst;
  }
  throw std::runtime_error("could not draw a gradient-check instance");
}

namespace {

template <typename Loss>
Eigen::MatrixXd CentralDifferences(const EncoderWeights& at, double step,
                                   Loss&& loss) {
  Eigen::MatrixXd grad(at.w.rows(), at.w.cols());
  EncoderWeights probe = at;
  for (Eigen::Index r = 0; r < at.w.rows(); ++r) {
    for (Eigen::Index k = 0; k < at.w.cols(); ++k) {
      const double saved = probe.w(r, k);
      probe.w(r, k) = saved + step;
      const double up = loss(probe);
      probe.w(r, k) = saved - step;
      const double down = loss(probe);
      probe.w(r, k) = saved;
      grad(r, k) = (up - down) / (2.0 * step);
    }
  }
  return grad;
}

}  // namespace

Eigen::MatrixXd FiniteDifferenceSingle(const GradientInstance& inst,
                                       double step) {
  const ContrastiveTask task{inst.data, inst.negatives, inst.tau};
  return CentralDifferences(inst.w, step, [&](const EncoderWeights& live) {
    return SurrogateLossSingle(live, inst.w, task);
  });
}

std::pair<Eigen::MatrixXd, Eigen::MatrixXd> FiniteDifferenceMulti(
    const GradientInstance& inst, double step) {
  const ContrastiveTask task{inst.data, inst.negatives, inst.tau};
  Eigen::MatrixXd gw =
      CentralDifferences(inst.w, step, [&](const EncoderWeights& live) {
        return SurrogateLossMulti(live, inst.w_tilde, inst.w, inst.w_tilde, task);
      });
  Eigen::MatrixXd gwt =
      CentralDifferences(inst.w_tilde, step, [&](const EncoderWeights& live) {
        return SurrogateLossMulti(inst.w, live, inst.w, inst.w_tilde, task);
      });
  return {std::move(gw), std::move(gwt)};
}

double RelativeError(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
  return (a - b).norm() / std::max(b.norm(), 1e-300);
}

CheckResult CheckGradientOracle(std::uint64_t seed, int instances,
                                double tolerance, double fault) {
  double worst = 0.0;
  for (int k = 0; k < instances; ++k) {
    const GradientInstance inst =
        RandomGradientInstance(seed * 1000003ULL + static_cast<std::uint64_t>(k));
    const ContrastiveTask task{inst.data, inst.negatives, inst.tau};

    Eigen::MatrixXd single = GradSingle(inst.w, task).grad_w;
    single(0, 0) += fault;
    worst = std::max(worst, RelativeError(single, FiniteDifferenceSingle(inst)));

    const GradientPair multi = GradMulti(inst.w, inst.w_tilde, task);
    Eigen::MatrixXd gw = multi.grad_w;
    Eigen::MatrixXd gwt = *multi.grad_w_tilde;
    gw(0, 0) += fault;
    gwt(0, 0) += fault;
    const auto [fw, fwt] = FiniteDifferenceMulti(inst);
    worst = std::max({worst, RelativeError(gw, fw), RelativeError(gwt, fwt)});
  }
  CheckResult res;
  res.name = "gradient_finite_difference";
  res.value = worst;
  res.threshold = tolerance;
  res.passed = worst <= tolerance;
  std::ostringstream detail;
  detail << instances << " instances, worst relative error " << worst;
  res.detail = detail.str();
  return res;
}

void CoefficientHistory::Record(const CoefficientLedger& ledger) {
  gamma.push_back(ledger.gamma);
  rho.push_back(ledger.rho);
  if (ledger.multi()) {
    gamma_tilde.push_back(*ledger.gamma_tilde);
    rho_tilde.push_back(*ledger.rho_tilde);
  }
}

TrainHooks RecordingHooks(CoefficientHistory& history) {
  TrainHooks hooks;
  hooks.on_step = [&history](const StepView& view) { history.Record(view.ledger); };
  return hooks;
}

double SignInvarianceFraction(const CoefficientHistory& history,
                              const EncoderWeights& w0,
                              const Eigen::VectorXd& mu) {
  const Eigen::VectorXd init = w0.w * mu;
  std::size_t total = 0, good = 0;
  for (std::size_t t = 1; t < history.steps(); ++t) {
    for (Eigen::Index r = 0; r < init.size(); ++r) {
      if (init(r) == 0.0) continue;
      const double s = init(r) > 0.0 ? 1.0 : -1.0;
      const double now = history.gamma[t](r);
      const double before = history.gamma[t - 1](r);
      ++total;
      if (s * now >= 0.0 && s * (now - before) >= 0.0) ++good;
    }
  }
  return total ? static_cast<double>(good) / static_cast<double>(total) : 1.0;
}

double ZeroRhoFraction(const CoefficientHistory& history,
                       const Eigen::MatrixXd& init_inner, double tol) {
  std::size_t total = 0, good = 0;
  for (Eigen::Index r = 0; r < init_inner.rows(); ++r) {
    for (Eigen::Index i = 0; i < init_inner.cols(); ++i) {
      if (!(init_inner(r, i) < 0.0)) continue;
      ++total;
      bool zero = true;
      for (const auto& rho : history.rho) {
        if (std::abs(rho(r, i)) > tol) {
          zero = false;
          break;
        }
      }
      good += zero;
    }
  }
  return total ? static_cast<double>(good) / static_cast<double>(total) : 1.0;
}

double BothNegativeZeroFraction(const CoefficientHistory& history,
                                const Eigen::MatrixXd& init_inner,
                                const Eigen::MatrixXd& init_inner_tilde,
                                std::size_t last_step, double tol) {
  if (history.rho_tilde.size() != history.rho.size()) {
    throw std::invalid_argument("history has no second-modality coefficients");
  }
  const std::size_t end = std::min(last_step + 1, history.steps());
  std::size_t total = 0, good = 0;
  for (Eigen::Index r = 0; r < init_inner.rows(); ++r) {
    for (Eigen::Index i = 0; i < init_inner.cols(); ++i) {
      if (!(init_inner(r, i) < 0.0 && init_inner_tilde(r, i) < 0.0)) continue;
      ++total;
      bool zero = true;
      for (std::size_t t = 0; t < end && zero; ++t) {
        zero = std::abs(history.rho[t](r, i)) <= tol &&
               std::abs(history.rho_tilde[t](r, i)) <= tol;
      }
      good += zero;
    }
  }
  return total ? static_cast<double>(good) / static_cast<double>(total) : 1.0;
}

std::vector<double> DominantSeries(const CoefficientHistory& history, Mode mode) {
  std::vector<double> out;
  out.reserve(history.steps());
  for (std::size_t t = 0; t < history.steps(); ++t) {
    out.push_back(mode == Mode::kSingle ? history.rho[t].maxCoeff()
                                        : history.gamma[t].maxCoeff());
  }
  return out;
}

std::optional<std::size_t> FirstCrossing(const std::vector<double>& series,
                                         double threshold) {
  for (std::size_t t = 0; t < series.size(); ++t) {
    if (series[t] >= threshold) return t;
  }
  return std::nullopt;
}

bool StrictlyIncreasingUntil(const std::vector<double>& series,
                             std::size_t boundary) {
  const std::size_t end = std::min(boundary + 1, series.size());
  for (std::size_t t = 1; t < end; ++t) {
    if (!(series[t] > series[t - 1])) return false;
  }
  return true;
}

bool VerifyReport::AllPassed() const {
  return std::all_of(checks.begin(), checks.end(),
                     [](const CheckResult& c) { return c.passed; });
}

const CheckResult& VerifyReport::Get(const std::string& name) const {
  for (const auto& c : checks) {
    if (c.name == name) return c;
  }
  throw std::out_of_range("no check named " + name);
}

namespace {

CheckResult AtLeast(std::string name, double value, double threshold,
                    std::string detail) {
  return {std::move(name), value >= threshold, value, threshold,
          std::move(detail)};
}

CheckResult AtMost(std::string name, double value, double threshold,
                   std::string detail) {
  return {std::move(name), value <= threshold, value, threshold,
          std::move(detail)};
}

std::string Fmt(double v) {
  std::ostringstream os;
  os << v;
  return os.str();
}

CheckResult GrowthCheck(const std::string& name, const std::vector<double>& series,
                        double threshold) {
  const auto boundary = FirstCrossing(series, threshold);
  CheckResult res;
  res.name = name;
  res.threshold = threshold;
  if (!boundary) {
    res.passed = false;
    res.value = series.empty() ? 0.0 : series.back();
    res.detail = "dominant coefficient never reached the threshold";
    return res;
  }
  res.passed = StrictlyIncreasingUntil(series, *boundary);
  res.value = static_cast<double>(*boundary);
  res.detail = "stage boundary at step " + std::to_string(*boundary) +
               (res.passed ? ", strictly increasing before it"
                           : ", not strictly increasing before it");
  return res;
}

}  // namespace

VerifyReport RunVerification(const TrainConfig& base, const VerifyOptions& opts) {
  VerifyReport rep;
  const AssumptionReport assumptions = CheckAssumptions(base);
  for (const auto& item : assumptions.items) {
    if (!item.ok) {
      rep.warnings.push_back("assumption " + item.name + " (" + item.description +
                             ") = " + Fmt(item.value) + ", wanted " + item.bound);
    }
  }

  rep.checks.push_back(CheckGradientOracle(opts.seed, opts.gradient_instances,
                                           1e-5, opts.gradient_fault));

  TrainConfig single_cfg = base;
  single_cfg.mode = Mode::kSingle;
  single_cfg.log_every = 1;
  single_cfg.WithSeed(opts.seed);
  CoefficientHistory single_hist;
  rep.single_run = Train(single_cfg, RecordingHooks(single_hist));

  TrainConfig multi_cfg = single_cfg;
  multi_cfg.mode = Mode::kMulti;
  CoefficientHistory multi_hist;
  rep.multi_run = Train(multi_cfg, RecordingHooks(multi_hist));

  const RunResult& s = *rep.single_run;
  const RunResult& m = *rep.multi_run;
  rep.checks.push_back(AtMost(
      "ledger_vs_projection",
      std::max(s.consistency.max_ledger_mismatch, m.consistency.max_ledger_mismatch),
      1e-8, "relative mismatch at every step, both modes"));
  rep.checks.push_back(AtMost(
      "gradient_span_residual",
      std::max(s.consistency.max_gradient_residual,
               m.consistency.max_gradient_residual),
      1e-10, "gradient rows outside span{mu, xi_i}"));
  rep.checks.push_back(AtMost(
      "softmax_normalization",
      std::max(s.consistency.max_softmax_residual, m.consistency.max_softmax_residual),
      1e-12, "|l'_i + sum_j l'_ij - 1| at every step"));
  rep.checks.push_back(AtLeast(
      "single_sign_invariance",
      SignInvarianceFraction(single_hist, s.w0, s.data.mu), opts.sign_fraction,
      "fraction of (r, t) with gamma_r following the sign of <w_r(0), mu>"));
  rep.checks.push_back(AtLeast(
      "single_zero_rho", ZeroRhoFraction(single_hist, s.init_inner),
      opts.zero_rho_fraction,
      "fraction of pairs with <w_r(0), xi_i> < 0 keeping rho_ri = 0"));

  const std::vector<double> single_dom = DominantSeries(single_hist, Mode::kSingle);
  const std::vector<double> multi_dom = DominantSeries(multi_hist, Mode::kMulti);
  const auto multi_boundary = FirstCrossing(multi_dom, base.stage_threshold);
  const std::size_t stage_one_end =
      multi_boundary ? *multi_boundary : multi_hist.steps() - 1;
  rep.checks.push_back(AtLeast(
      "multi_both_negative_zero",
      BothNegativeZeroFraction(multi_hist, m.init_inner, *m.init_inner_tilde,
                               stage_one_end),
      opts.zero_rho_fraction,
      "pairs negative in both modalities keeping rho = rho~ = 0 through step " +
          std::to_string(stage_one_end)));
  rep.checks.push_back(
      GrowthCheck("stage1_growth_single", single_dom, base.stage_threshold));
  rep.checks.push_back(
      GrowthCheck("stage1_growth_multi", multi_dom, base.stage_threshold));

  const CoefficientSummary sf = s.trace.back().coef;
  const CoefficientSummary mf = m.trace.back().coef;
  const double single_ratio =
      sf.max_psi / std::max(sf.max_abs_gamma, 1e-300);
  const double multi_ratio = mf.max_gamma / std::max(mf.max_psi, 1e-300);
  rep.checks.push_back(AtLeast(
      "scale_separation_single", single_ratio, opts.scale_ratio,
      "max psi / max |gamma| at the final step = " + Fmt(sf.max_psi) + " / " +
          Fmt(sf.max_abs_gamma)));
  rep.checks.push_back(AtLeast(
      "scale_separation_multi", multi_ratio, opts.scale_ratio,
      "max gamma / max psi at the final step = " + Fmt(mf.max_gamma) + " / " +
          Fmt(mf.max_psi)));
  return rep;
}

}  // namespace cldyn
