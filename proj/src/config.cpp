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

#include "cldyn/config.hpp"

#include <fstream>
#include <iomanip>
#include <set>
#include <sstream>

#include <openssl/evp.h>
#include <yaml-cpp/yaml.h>

namespace cldyn {
namespace {

void RejectUnknown(const YAML::Node& node, const std::string& section,
                   const std::set<std::string>& known) {
  for (const auto& kv : node) {
    const std::string key = kv.first.as<std::string>();
    if (!known.count(key)) {
      throw ConfigError("unknown key '" + key + "' in " + section);
    }
  }
}

template <typename T>
T Scalar(const YAML::Node& node, const std::string& key) {
  try {
    return node.as<T>();
  } catch (const YAML::Exception&) {
    throw ConfigError("bad value for '" + key + "'");
  }
}

std::size_t Count(const YAML::Node& node, const std::string& key) {
  const long long v = Scalar<long long>(node, key);
  if (v < 0) throw ConfigError("'" + key + "' must be non-negative");
  return static_cast<std::size_t>(v);
}

Eigen::VectorXd ReadVector(const YAML::Node& node, const std::string& key,
                           std::size_t dim) {
  Eigen::VectorXd v = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(dim));
  if (node.IsSequence()) {
    if (node.size() != dim) {
      throw ConfigError("'" + key + "' has " + std::to_string(node.size()) +
                        " entries, expected " + std::to_string(dim));
    }
    for (std::size_t k = 0; k < dim; ++k) {
      v(static_cast<Eigen::Index>(k)) = Scalar<double>(node[k], key);
    }
    return v;
  }
  if (!node.IsMap()) throw ConfigError("'" + key + "' must be a list or a map");
  for (const auto& kv : node) {
    const long long idx = Scalar<long long>(kv.first, key);
    if (idx < 0 || static_cast<std::size_t>(idx) >= dim) {
      throw ConfigError("'" + key + "' index " + std::to_string(idx) +
                        " out of range");
    }
    v(static_cast<Eigen::Index>(idx)) = Scalar<double>(kv.second, key);
  }
  return v;
}

// Carries a preset vector over to a new dimension.
void Refit(Eigen::VectorXd& v, std::size_t dim, const std::string& key) {
  const auto n = static_cast<Eigen::Index>(dim);
  if (v.size() == n) return;
  if (v.size() > n && v.tail(v.size() - n).cwiseAbs().maxCoeff() > 0.0) {
    throw ConfigError("'" + key + "' has nonzero entries beyond the new dimension");
  }
  v.conservativeResizeLike(Eigen::VectorXd::Zero(n));
}

void ApplyData(const YAML::Node& node, DataConfig& data) {
  RejectUnknown(node, "data",
                {"d", "d_tilde", "n", "mu", "mu_tilde", "sigma_xi",
                 "sigma_xi_tilde", "sigma_eps", "nu", "sigma_zeta", "n_probe",
                 "n_eval"});
  if (node["d"]) data.d = Count(node["d"], "d");
  if (node["d_tilde"]) data.d_tilde = Count(node["d_tilde"], "d_tilde");
  if (node["n"]) data.n = Count(node["n"], "n");
  if (node["sigma_xi"]) data.sigma_xi = Scalar<double>(node["sigma_xi"], "sigma_xi");
  if (node["sigma_xi_tilde"]) {
    data.sigma_xi_tilde = Scalar<double>(node["sigma_xi_tilde"], "sigma_xi_tilde");
  }
  if (node["sigma_eps"]) data.sigma_eps = Scalar<double>(node["sigma_eps"], "sigma_eps");
  if (node["sigma_zeta"]) {
    data.sigma_zeta = Scalar<double>(node["sigma_zeta"], "sigma_zeta");
  }
  if (node["n_probe"]) data.n_probe = Count(node["n_probe"], "n_probe");
  if (node["n_eval"]) data.n_eval = Count(node["n_eval"], "n_eval");

  if (node["mu"]) {
    data.mu = ReadVector(node["mu"], "mu", data.d);
  } else {
    Refit(data.mu, data.d, "mu");
  }
  if (node["mu_tilde"]) {
    data.mu_tilde = ReadVector(node["mu_tilde"], "mu_tilde", data.d_tilde);
  } else {
    Refit(data.mu_tilde, data.d_tilde, "mu_tilde");
  }
  if (node["nu"]) {
    data.nu = ReadVector(node["nu"], "nu", data.d);
  } else {
    Refit(data.nu, data.d, "nu");
  }
}

void ApplyTrain(const YAML::Node& node, TrainConfig& cfg) {
  RejectUnknown(node, "train",
                {"m", "sigma0", "eta", "tau", "epochs", "negatives",
                 "probe_every", "log_every", "stage_threshold", "cross_check",
                 "probe"});
  if (node["m"]) cfg.m = Count(node["m"], "m");
  if (node["sigma0"]) cfg.sigma0 = Scalar<double>(node["sigma0"], "sigma0");
  if (node["eta"]) cfg.eta = Scalar<double>(node["eta"], "eta");
  if (node["tau"]) cfg.tau = Scalar<double>(node["tau"], "tau");
  if (node["epochs"]) cfg.epochs = Count(node["epochs"], "epochs");
  if (node["negatives"]) {
    const std::string text = Scalar<std::string>(node["negatives"], "negatives");
    cfg.negatives = text == "all"
                        ? NegativePolicy::All()
                        : NegativePolicy::Fixed(Count(node["negatives"], "negatives"));
  }
  if (node["probe_every"]) cfg.probe_every = Count(node["probe_every"], "probe_every");
  if (node["log_every"]) cfg.log_every = Count(node["log_every"], "log_every");
  if (node["stage_threshold"]) {
    cfg.stage_threshold = Scalar<double>(node["stage_threshold"], "stage_threshold");
  }
  if (node["cross_check"]) cfg.cross_check = Scalar<bool>(node["cross_check"], "cross_check");
  if (const YAML::Node probe = node["probe"]) {
    RejectUnknown(probe, "train.probe", {"lambda", "grad_tol", "max_iter"});
    if (probe["lambda"]) cfg.probe.lambda = Scalar<double>(probe["lambda"], "lambda");
    if (probe["grad_tol"]) {
      cfg.probe.grad_tol = Scalar<double>(probe["grad_tol"], "grad_tol");
    }
    if (probe["max_iter"]) cfg.probe.max_iter = Count(probe["max_iter"], "max_iter");
  }
}

nlohmann::ordered_json SparseJson(const Eigen::VectorXd& v) {
  nlohmann::ordered_json entries = nlohmann::ordered_json::array();
  for (Eigen::Index k = 0; k < v.size(); ++k) {
    if (v(k) != 0.0) entries.push_back({k, v(k)});
  }
  return {{"dim", v.size()}, {"entries", entries}};
}

}  // namespace

LoadedConfig ParseConfig(std::string_view yaml_text) {
  YAML::Node root;
  try {
    root = YAML::Load(std::string(yaml_text));
  } catch (const YAML::Exception& e) {
    throw ConfigError(std::string("config is not valid YAML: ") + e.what());
  }
  LoadedConfig out;
  if (root.IsNull()) {
    out.config = Figure1Config(Mode::kSingle);
    return out;
  }
  if (!root.IsMap()) throw ConfigError("config must be a mapping");
  RejectUnknown(root, "config", {"preset", "mode", "data", "train"});

  Mode mode = Mode::kSingle;
  if (root["mode"]) {
    try {
      mode = ParseMode(Scalar<std::string>(root["mode"], "mode"));
    } catch (const std::invalid_argument& e) {
      throw ConfigError(e.what());
    }
    out.mode_set = true;
  }
  if (root["preset"]) {
    out.preset = Scalar<std::string>(root["preset"], "preset");
    auto base = PresetConfig(out.preset, mode);
    if (!base) throw ConfigError("unknown preset '" + out.preset + "'");
    out.config = *base;
  } else {
    out.config = Figure1Config(mode);
  }
  if (const YAML::Node data = root["data"]) {
    if (!data.IsMap()) throw ConfigError("'data' must be a mapping");
    ApplyData(data, out.config.data);
  }
  if (const YAML::Node train = root["train"]) {
    if (!train.IsMap()) throw ConfigError("'train' must be a mapping");
    ApplyTrain(train, out.config);
  }
  out.config.Validate();
  return out;
}

LoadedConfig LoadConfig(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config " + path.string());
  std::ostringstream text;
  text << in.rdbuf();
  return ParseConfig(text.str());
}

nlohmann::ordered_json CanonicalJson(const TrainConfig& cfg) {
  const DataConfig& d = cfg.data;
  nlohmann::ordered_json data = {
      {"d", d.d},
      {"d_tilde", d.d_tilde},
      {"n", d.n},
      {"mu", SparseJson(d.mu)},
      {"mu_tilde", SparseJson(d.mu_tilde)},
      {"sigma_xi", d.sigma_xi},
      {"sigma_xi_tilde", d.sigma_xi_tilde},
      {"sigma_eps", d.sigma_eps},
      {"nu", SparseJson(d.nu)},
      {"sigma_zeta", d.sigma_zeta},
      {"n_probe", d.n_probe},
      {"n_eval", d.n_eval},
  };
  nlohmann::ordered_json train = {
      {"mode", ToString(cfg.mode)},
      {"m", cfg.m},
      {"sigma0", cfg.sigma0},
      {"eta", cfg.eta},
      {"tau", cfg.tau},
      {"epochs", cfg.epochs},
      {"negatives", cfg.negatives.ToString()},
      {"probe_every", cfg.probe_every},
      {"log_every", cfg.log_every},
      {"stage_threshold", cfg.stage_threshold},
      {"cross_check", cfg.cross_check},
      {"probe",
       {{"lambda", cfg.probe.lambda},
        {"grad_tol", cfg.probe.grad_tol},
        {"max_iter", cfg.probe.max_iter}}},
  };
  return {{"data", data}, {"train", train}};
}

std::string ConfigHash(const TrainConfig& cfg) {
  const std::string text = CanonicalJson(cfg).dump();
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(text.data(), text.size(), digest, &len, EVP_sha256(), nullptr) != 1) {
    throw std::runtime_error("SHA-256 failed");
  }
  std::ostringstream hex;
  for (unsigned int k = 0; k < len; ++k) {
    hex << std::hex << std::setw(2) << std::setfill('0') << static_cast<int>(digest[k]);
  }
  return hex.str();
}

}  // namespace cldyn
