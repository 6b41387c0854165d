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

#include "cldyn/synth_data.hpp"

#include <cmath>
#include <numeric>

namespace cldyn {
namespace {

void RequireLength(const Eigen::VectorXd& v, std::size_t len,
                   const char* name) {
  if (static_cast<std::size_t>(v.size()) != len) {
    throw ConfigError(std::string(name) + " has length " +
                      std::to_string(v.size()) + ", expected " +
                      std::to_string(len));
  }
}

void RequireStd(double s, const char* name) {
  if (!(s >= 0.0) || !std::isfinite(s)) {
    throw ConfigError(std::string(name) + " must be a finite value >= 0");
  }
}

template <typename Row>
void FillNormal(Row&& row, double sigma, Rng& rng) {
  for (Eigen::Index k = 0; k < row.size(); ++k) row(k) = sigma * rng.Normal();
}

}  // namespace

void DataConfig::Validate() const {
  if (d < 1) throw ConfigError("d must be >= 1");
  if (d_tilde < 1) throw ConfigError("d_tilde must be >= 1");
  if (n < 2) throw ConfigError("n must be >= 2");
  RequireLength(mu, d, "mu");
  RequireLength(nu, d, "nu");
  RequireLength(mu_tilde, d_tilde, "mu_tilde");
  RequireStd(sigma_xi, "sigma_xi");
  RequireStd(sigma_xi_tilde, "sigma_xi_tilde");
  RequireStd(sigma_eps, "sigma_eps");
  RequireStd(sigma_zeta, "sigma_zeta");
}

Eigen::VectorXd UnitScaled(std::size_t dim, std::size_t index, double value) {
  Eigen::VectorXd v = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(dim));
  if (index < dim) v(static_cast<Eigen::Index>(index)) = value;
  return v;
}

DataConfig Figure1Data() {
  DataConfig cfg;
  cfg.d = cfg.d_tilde = 2000;
  cfg.n = 100;
  cfg.mu = UnitScaled(cfg.d, 0, 5.0);
  cfg.mu_tilde = UnitScaled(cfg.d_tilde, 1, 15.0);
  cfg.sigma_xi = cfg.sigma_xi_tilde = 1.0;
  cfg.sigma_eps = 0.1;
  cfg.nu = UnitScaled(cfg.d, 0, 2.0);
  cfg.sigma_zeta = 1.0;
  cfg.n_probe = cfg.n_eval = 100;
  return cfg;
}

DataConfig TheoryData() {
  DataConfig cfg = Figure1Data();
  cfg.n = 20;
  cfg.d = cfg.d_tilde = 4000;
  // Keep n * SNR^2 = 1.25 and C_mu = 3 as in figure1.
  const double mu_norm = std::sqrt(1.25 * cfg.d / static_cast<double>(cfg.n));
  cfg.mu = UnitScaled(cfg.d, 0, mu_norm);
  cfg.mu_tilde = UnitScaled(cfg.d_tilde, 1, 3.0 * mu_norm);
  // <nu, mu> = ||mu||^2 / sqrt(d), plus an orthogonal component.
  cfg.nu = UnitScaled(cfg.d, 0, mu_norm / std::sqrt(static_cast<double>(cfg.d)));
  cfg.nu(1) = 2.0;
  return cfg;
}

PairedSample Dataset::Sample(std::size_t i) const {
  const auto r = static_cast<Eigen::Index>(i);
  PairedSample s;
  s.y = labels.at(i);
  s.signal1 = static_cast<double>(s.y) * mu;
  s.noise1 = noise1.row(r).transpose();
  s.signal2 = static_cast<double>(s.y) * mu_tilde;
  s.noise2 = noise2.row(r).transpose();
  s.aug_noise = aug_noise.row(r).transpose();
  return s;
}

Dataset GenTrain(const DataConfig& cfg, Rng& rng) {
  cfg.Validate();
  const auto n = static_cast<Eigen::Index>(cfg.n);
  Dataset data;
  data.mu = cfg.mu;
  data.mu_tilde = cfg.mu_tilde;
  data.labels.resize(cfg.n);
  data.noise1.resize(n, static_cast<Eigen::Index>(cfg.d));
  data.noise2.resize(n, static_cast<Eigen::Index>(cfg.d_tilde));
  data.aug_noise.resize(n, static_cast<Eigen::Index>(cfg.d));
  // Sample-major draw order: label, xi, xi~, eps.
  for (Eigen::Index i = 0; i < n; ++i) {
    data.labels[static_cast<std::size_t>(i)] = rng.Rademacher();
    FillNormal(data.noise1.row(i), cfg.sigma_xi, rng);
    FillNormal(data.noise2.row(i), cfg.sigma_xi_tilde, rng);
    FillNormal(data.aug_noise.row(i), cfg.sigma_eps, rng);
  }
  return data;
}

std::string NegativePolicy::ToString() const {
  return count ? std::to_string(*count) : std::string("all");
}

std::vector<std::size_t> NegativesFor(std::size_t i, const Dataset& data,
                                      std::size_t count, Rng& rng) {
  const int yi = data.labels.at(i);
  std::vector<std::size_t> opposite;
  for (std::size_t j = 0; j < data.size(); ++j) {
    if (data.labels[j] != yi) opposite.push_back(j);
  }
  if (count > opposite.size()) {
    throw ConfigError("anchor " + std::to_string(i) + " has " +
                      std::to_string(opposite.size()) +
                      " opposite-label samples, " + std::to_string(count) +
                      " negatives requested");
  }
  if (count == opposite.size()) return opposite;
  // Partial Fisher-Yates.
  for (std::size_t k = 0; k < count; ++k) {
    const std::size_t pick = k + rng.Index(opposite.size() - k);
    std::swap(opposite[k], opposite[pick]);
  }
  opposite.resize(count);
  return opposite;
}

NegativeSets BuildNegatives(const Dataset& data, const NegativePolicy& policy,
                            Rng& rng) {
  NegativeSets sets(data.size());
  for (std::size_t i = 0; i < data.size(); ++i) {
    std::size_t count = 0;
    if (policy.count) {
      count = *policy.count;
    } else {
      for (int y : data.labels) count += (y != data.labels[i]);
    }
    sets[i] = NegativesFor(i, data, count, rng);
    if (sets[i].empty()) {
      throw ConfigError("anchor " + std::to_string(i) +
                        " has no negatives; both labels must be present");
    }
  }
  return sets;
}

TestSample TestSet::Sample(std::size_t i) const {
  const auto r = static_cast<Eigen::Index>(i);
  return {labels.at(i), signal.row(r).transpose(), noise.row(r).transpose()};
}

TestSplits GenTest(const DataConfig& cfg, Rng& rng) {
  cfg.Validate();
  std::size_t next_id = 0;
  auto draw = [&](std::size_t count) {
    TestSet set;
    const auto rows = static_cast<Eigen::Index>(count);
    const auto d = static_cast<Eigen::Index>(cfg.d);
    set.labels.resize(count);
    set.signal.resize(rows, d);
    set.noise.resize(rows, d);
    for (Eigen::Index i = 0; i < rows; ++i) {
      const int y = rng.Rademacher();
      set.labels[static_cast<std::size_t>(i)] = y;
      set.signal.row(i) = static_cast<double>(y) * cfg.nu.transpose();
      FillNormal(set.noise.row(i), cfg.sigma_zeta, rng);
      set.ids.push_back(next_id++);
    }
    return set;
  };
  TestSplits splits;
  splits.probe = draw(cfg.n_probe);
  splits.eval = draw(cfg.n_eval);
  return splits;
}

DataDiagnostics Diagnose(const DataConfig& cfg, const Dataset& data) {
  DataDiagnostics diag;
  const double expected = cfg.sigma_xi * cfg.sigma_xi * static_cast<double>(cfg.d);
  for (Eigen::Index i = 0; i < data.noise1.rows(); ++i) {
    const double sq = data.noise1.row(i).squaredNorm();
    if (sq < 0.5 * expected || sq > 1.5 * expected) ++diag.noise_norm_violations;
  }
  for (int y : data.labels) diag.positives += (y == 1);
  const double n = static_cast<double>(data.size());
  diag.label_imbalance = std::abs(static_cast<double>(diag.positives) - n / 2.0);
  diag.label_bound = std::sqrt(n * std::log(8.0) / 2.0);
  diag.label_balance_ok = diag.label_imbalance <= diag.label_bound;
  return diag;
}

}  // namespace cldyn
