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

#include "cldyn/expctl.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <chrono>
#include <cmath>
#include <ctime>
#include <fstream>
#include <iomanip>
#include <map>
#include <mutex>
#include <ostream>
#include <sstream>
#include <thread>

#include "cldyn/config.hpp"
#include "cldyn/format.hpp"

namespace cldyn {

namespace fs = std::filesystem;

std::vector<std::uint64_t> ParseSeeds(std::string_view text) {
  auto number = [&](std::string_view part) {
    std::uint64_t v = 0;
    const auto [end, ec] = std::from_chars(part.data(), part.data() + part.size(), v);
    if (ec != std::errc() || end != part.data() + part.size() || part.empty()) {
      throw ConfigError("bad seed '" + std::string(part) + "'");
    }
    return v;
  };
  std::vector<std::uint64_t> seeds;
  while (!text.empty()) {
    const std::size_t comma = text.find(',');
    const std::string_view part = text.substr(0, comma);
    const std::size_t dash = part.find('-');
    if (dash == std::string_view::npos) {
      seeds.push_back(number(part));
    } else {
      const std::uint64_t lo = number(part.substr(0, dash));
      const std::uint64_t hi = number(part.substr(dash + 1));
      if (hi < lo) throw ConfigError("empty seed range '" + std::string(part) + "'");
      for (std::uint64_t s = lo; s <= hi; ++s) seeds.push_back(s);
    }
    if (comma == std::string_view::npos) break;
    text.remove_prefix(comma + 1);
  }
  if (seeds.empty()) throw ConfigError("no seeds given");
  return seeds;
}

ResolvedConfig Resolve(const ConfigSource& src) {
  if (src.preset.empty() == src.config_path.empty()) {
    throw ConfigError("give exactly one of --preset or --config");
  }
  ResolvedConfig out;
  if (!src.preset.empty()) {
    auto cfg = PresetConfig(src.preset, src.mode.value_or(Mode::kSingle));
    if (!cfg) {
      throw ConfigError("unknown preset '" + src.preset +
                        "' (available: figure1, theory)");
    }
    out.config = *cfg;
    out.preset = src.preset;
  } else {
    LoadedConfig loaded = LoadConfig(src.config_path);
    out.config = loaded.config;
    out.preset = loaded.preset;
    if (src.mode) out.config.mode = *src.mode;
  }
  if (src.log_every) out.config.log_every = *src.log_every;
  if (src.probe_every) out.config.probe_every = *src.probe_every;
  out.config.Validate();
  return out;
}

std::string TraceHeader() {
  return "step,loss,max_gamma,min_gamma,mean_abs_gamma,max_abs_gamma,max_rho,"
         "max_psi,max_gamma_tilde,min_gamma_tilde,max_rho_tilde,max_psi_tilde,"
         "ell_pos_mean,softmax_residual,probe_accuracy,stage";
}

std::string TraceRow(const TraceRecord& row) {
  std::string s = std::to_string(row.step);
  auto add = [&s](const std::optional<double>& v) {
    s += ',';
    if (v) s += FormatDouble(*v);
  };
  add(row.loss);
  add(row.coef.max_gamma);
  add(row.coef.min_gamma);
  add(row.coef.mean_abs_gamma);
  add(row.coef.max_abs_gamma);
  add(row.coef.max_rho);
  add(row.coef.max_psi);
  const auto& t = row.coef_tilde;
  add(t ? std::optional<double>(t->max_gamma) : std::nullopt);
  add(t ? std::optional<double>(t->min_gamma) : std::nullopt);
  add(t ? std::optional<double>(t->max_rho) : std::nullopt);
  add(t ? std::optional<double>(t->max_psi) : std::nullopt);
  add(row.ell_pos_mean);
  add(row.softmax_residual);
  add(row.probe_accuracy);
  s += ',' + std::to_string(row.stage);
  return s;
}

namespace {

void AddSummary(nlohmann::ordered_json& j, const std::string& prefix,
                const CoefficientSummary& c) {
  j[prefix + "max_gamma"] = c.max_gamma;
  j[prefix + "min_gamma"] = c.min_gamma;
  j[prefix + "mean_abs_gamma"] = c.mean_abs_gamma;
  j[prefix + "max_abs_gamma"] = c.max_abs_gamma;
  j[prefix + "max_rho"] = c.max_rho;
  j[prefix + "max_psi"] = c.max_psi;
}

std::string UtcNow() {
  const std::time_t now =
      std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  std::ostringstream os;
  os << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
  return os.str();
}

std::string Stem(Mode mode, std::uint64_t seed) {
  return ToString(mode) + "_" + std::to_string(seed);
}

std::string LedgerCsv(const CoefficientLedger& ledger) {
  std::string s = "quantity,neuron,sample,value\n";
  auto vec = [&s](const char* name, const Eigen::VectorXd& v) {
    for (Eigen::Index r = 0; r < v.size(); ++r) {
      s += std::string(name) + ',' + std::to_string(r) + ",," + FormatDouble(v(r)) + '\n';
    }
  };
  auto mat = [&s](const char* name, const Eigen::MatrixXd& m) {
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
      for (Eigen::Index i = 0; i < m.cols(); ++i) {
        s += std::string(name) + ',' + std::to_string(r) + ',' + std::to_string(i) +
             ',' + FormatDouble(m(r, i)) + '\n';
      }
    }
  };
  vec("gamma", ledger.gamma);
  mat("rho", ledger.rho);
  if (ledger.multi()) {
    vec("gamma_tilde", *ledger.gamma_tilde);
    mat("rho_tilde", *ledger.rho_tilde);
  }
  return s;
}

std::string Checkpoint(const EncoderWeights& enc, std::size_t step) {
  std::ostringstream os;
  WriteCheckpoint(os, enc, step);
  return os.str();
}

SeedOutcome RunOneSeed(const ResolvedConfig& resolved, std::uint64_t seed,
                       const RunOptions& opts, const std::string& hash) {
  SeedOutcome outcome;
  outcome.seed = seed;
  TrainConfig cfg = resolved.config;
  cfg.WithSeed(seed);
  const std::string stem = Stem(cfg.mode, seed);
  const fs::path trace_path = opts.out_dir / ("trace_" + stem + ".csv");
  const fs::path partial = fs::path(trace_path.string() + ".partial");

  std::ofstream trace(partial, std::ios::binary | std::ios::trunc);
  if (!trace) {
    outcome.error = "cannot write " + partial.string();
    return outcome;
  }
  trace << TraceHeader() << '\n';
  TrainHooks hooks;
  hooks.on_trace = [&trace](const TraceRecord& row) {
    trace << TraceRow(row) << '\n';
    trace.flush();
  };
  try {
    RunResult run = Train(cfg, hooks);
    trace.close();
    if (!trace) throw std::runtime_error("write failed for " + partial.string());
    fs::rename(partial, trace_path);
    WriteFileAtomic(opts.out_dir / ("summary_" + stem + ".json"),
                    SummaryJson(run, hash).dump(2) + "\n");
    if (opts.dump_weights) {
      const std::size_t step = run.ledger.step;
      WriteFileAtomic(opts.out_dir / ("weights_" + stem + ".txt"),
                      Checkpoint(run.w, step));
      if (run.w_tilde) {
        WriteFileAtomic(opts.out_dir / ("weights_tilde_" + stem + ".txt"),
                        Checkpoint(*run.w_tilde, step));
      }
    }
    if (opts.dump_ledger) {
      WriteFileAtomic(opts.out_dir / ("ledger_" + stem + ".csv"), LedgerCsv(run.ledger));
    }
    outcome.result = std::move(run);
  } catch (const TrainingDiverged& e) {
    trace.close();
    outcome.error = std::string(e.what()) + "; partial trace kept in " +
                    partial.string();
  } catch (const std::exception& e) {
    trace.close();
    outcome.error = e.what();
  }
  return outcome;
}

nlohmann::ordered_json Manifest(const ResolvedConfig& resolved,
                                const std::vector<std::uint64_t>& seeds,
                                const fs::path& out_dir, const std::string& started,
                                const std::vector<Mode>& modes) {
  nlohmann::ordered_json j;
  j["config_hash"] = ConfigHash(resolved.config);
  j["preset"] = resolved.preset;
  nlohmann::ordered_json mode_names = nlohmann::ordered_json::array();
  for (Mode m : modes) mode_names.push_back(ToString(m));
  j["modes"] = mode_names;
  j["seeds"] = seeds;
  j["out_dir"] = out_dir.string();
  j["started_at"] = started;
  j["finished_at"] = UtcNow();
  j["version"] = kVersion;
  j["config"] = CanonicalJson(resolved.config);
  return j;
}

double Mean(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

double SampleStd(const std::vector<double>& v) {
  if (v.size() < 2) return 0.0;
  const double mean = Mean(v);
  double s = 0.0;
  for (double x : v) s += (x - mean) * (x - mean);
  return std::sqrt(s / static_cast<double>(v.size() - 1));
}

std::optional<double> PanelValue(const TraceRecord& row, Panel panel) {
  switch (panel) {
    case Panel::kLoss:
      return row.loss;
    case Panel::kAccuracy:
      return row.probe_accuracy;
    case Panel::kSignal:
      return row.coef.max_gamma;
    case Panel::kNoise:
      return row.coef.max_rho;
  }
  return std::nullopt;
}

}  // namespace

nlohmann::ordered_json SummaryJson(const RunResult& run,
                                   const std::string& config_hash) {
  nlohmann::ordered_json j;
  j["mode"] = ToString(run.config.mode);
  j["seed"] = run.config.seed;
  j["config_hash"] = config_hash;
  j["steps"] = run.config.epochs;
  j["initial_loss"] = run.initial_loss;
  j["final_loss"] = run.final_loss;
  j["reference_loss"] = run.reference_loss;
  j["final_probe_accuracy"] = run.final_probe_accuracy
                                  ? nlohmann::ordered_json(*run.final_probe_accuracy)
                                  : nlohmann::ordered_json(nullptr);
  j["stage_boundary"] = run.stage_boundary
                            ? nlohmann::ordered_json(*run.stage_boundary)
                            : nlohmann::ordered_json(nullptr);
  const TraceRecord& last = run.trace.back();
  AddSummary(j, "final_", last.coef);
  if (last.coef_tilde) AddSummary(j, "final_tilde_", *last.coef_tilde);
  j["max_softmax_residual"] = run.consistency.max_softmax_residual;
  j["max_ledger_mismatch"] = run.consistency.max_ledger_mismatch;
  j["max_gradient_residual"] = run.consistency.max_gradient_residual;
  const AssumptionReport report = CheckAssumptions(run.config);
  j["assumptions_ok"] = report.AllOk();
  for (const auto& item : report.items) {
    j["assumption_" + item.name] = item.value;
    j["assumption_" + item.name + "_ok"] = item.ok;
  }
  return j;
}

void WriteFileAtomic(const fs::path& path, std::string_view content) {
  const fs::path tmp = fs::path(path.string() + ".tmp");
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    out.close();
    if (!out) throw std::runtime_error("cannot write " + tmp.string());
  }
  fs::rename(tmp, path);
}

std::vector<SeedOutcome> RunSeeds(const ResolvedConfig& resolved,
                                  const RunOptions& opts, std::ostream& log) {
  fs::create_directories(opts.out_dir);
  const std::string hash = ConfigHash(resolved.config);
  std::vector<SeedOutcome> outcomes(opts.seeds.size());
  std::mutex log_mutex;
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t k = next++; k < opts.seeds.size(); k = next++) {
      outcomes[k] = RunOneSeed(resolved, opts.seeds[k], opts, hash);
      std::lock_guard<std::mutex> lock(log_mutex);
      const SeedOutcome& o = outcomes[k];
      log << ToString(resolved.config.mode) << " seed " << o.seed << ": ";
      if (o.result) {
        log << "final loss " << o.result->final_loss;
        if (o.result->final_probe_accuracy) {
          log << ", probe accuracy " << *o.result->final_probe_accuracy;
        }
        log << '\n';
      } else {
        log << "failed: " << o.error << '\n';
      }
    }
  };
  const unsigned threads = std::max(
      1u, std::min<unsigned>(opts.threads, static_cast<unsigned>(opts.seeds.size())));
  if (threads == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (unsigned t = 0; t < threads; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  return outcomes;
}

int CmdRun(const ResolvedConfig& resolved, const RunOptions& opts,
           std::ostream& out, std::ostream& err) {
  const std::string started = UtcNow();
  std::vector<SeedOutcome> outcomes;
  try {
    outcomes = RunSeeds(resolved, opts, out);
    WriteFileAtomic(opts.out_dir / "manifest.json",
                    Manifest(resolved, opts.seeds, opts.out_dir, started,
                             {resolved.config.mode})
                            .dump(2) +
                        "\n");
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  }
  int code = 0;
  for (const auto& o : outcomes) {
    if (!o.result) {
      err << "error: seed " << o.seed << ": " << o.error << '\n';
      code = 1;
    }
  }
  return code;
}

std::string PanelFileName(Panel panel) {
  switch (panel) {
    case Panel::kLoss:
      return "panel_loss.csv";
    case Panel::kAccuracy:
      return "panel_accuracy.csv";
    case Panel::kSignal:
      return "panel_signal.csv";
    case Panel::kNoise:
      return "panel_noise.csv";
  }
  return "";
}

std::vector<PanelRow> MergePanel(const std::vector<RunResult>& single,
                                 const std::vector<RunResult>& multi,
                                 Panel panel) {
  using Series = std::map<std::size_t, std::vector<double>>;
  auto collect = [panel](const std::vector<RunResult>& runs) {
    Series s;
    for (const auto& run : runs) {
      for (const auto& row : run.trace) {
        if (auto v = PanelValue(row, panel)) s[row.step].push_back(*v);
      }
    }
    return s;
  };
  const Series a = collect(single);
  const Series b = collect(multi);
  std::vector<PanelRow> rows;
  for (const auto& [step, values] : a) {
    auto it = b.find(step);
    if (values.size() != single.size() || it == b.end() ||
        it->second.size() != multi.size()) {
      continue;
    }
    rows.push_back({step, Mean(values), SampleStd(values), Mean(it->second),
                    SampleStd(it->second)});
  }
  return rows;
}

std::string PanelCsv(const std::vector<PanelRow>& rows) {
  std::string s = "step,single_mean,single_std,multi_mean,multi_std\n";
  for (const auto& r : rows) {
    s += std::to_string(r.step) + ',' + FormatDouble(r.single_mean) + ',' +
         FormatDouble(r.single_std) + ',' + FormatDouble(r.multi_mean) + ',' +
         FormatDouble(r.multi_std) + '\n';
  }
  return s;
}

int CmdFigure1(const Figure1Options& opts, std::ostream& out, std::ostream& err) {
  const std::string started = UtcNow();
  RunOptions run_opts;
  run_opts.seeds = opts.seeds;
  run_opts.out_dir = opts.out_dir;
  run_opts.threads = opts.threads;
  std::vector<RunResult> single, multi;
  ResolvedConfig base;
  int code = 0;
  try {
    for (Mode mode : {Mode::kSingle, Mode::kMulti}) {
      ConfigSource src;
      src.preset = "figure1";
      src.mode = mode;
      src.log_every = opts.log_every;
      src.probe_every = opts.probe_every;
      const ResolvedConfig resolved = Resolve(src);
      if (mode == Mode::kSingle) base = resolved;
      for (auto& o : RunSeeds(resolved, run_opts, out)) {
        if (!o.result) {
          err << "error: " << ToString(mode) << " seed " << o.seed << ": " << o.error
              << '\n';
          code = 1;
          continue;
        }
        (mode == Mode::kSingle ? single : multi).push_back(std::move(*o.result));
      }
    }
    if (code != 0) return code;
    for (Panel p : {Panel::kLoss, Panel::kAccuracy, Panel::kSignal, Panel::kNoise}) {
      WriteFileAtomic(opts.out_dir / PanelFileName(p),
                      PanelCsv(MergePanel(single, multi, p)));
    }
    WriteFileAtomic(opts.out_dir / "manifest.json",
                    Manifest(base, opts.seeds, opts.out_dir, started,
                             {Mode::kSingle, Mode::kMulti})
                            .dump(2) +
                        "\n");
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  }
  out << "wrote panel_loss.csv, panel_accuracy.csv, panel_signal.csv, "
         "panel_noise.csv to "
      << opts.out_dir.string() << '\n';
  return 0;
}

int CmdVerify(const ResolvedConfig& resolved, const VerifyCommandOptions& opts,
              std::ostream& out, std::ostream& err) {
  bool ok = true;
  for (std::uint64_t seed : opts.seeds) {
    VerifyOptions vo;
    vo.seed = seed;
    vo.gradient_fault = opts.gradient_fault;
    VerifyReport report;
    try {
      report = RunVerification(resolved.config, vo);
    } catch (const std::exception& e) {
      err << "error: seed " << seed << ": " << e.what() << '\n';
      ok = false;
      continue;
    }
    for (const auto& w : report.warnings) out << "warning: " << w << '\n';
    out << "seed " << seed << '\n';
    for (const auto& c : report.checks) {
      out << (c.passed ? "PASS " : "FAIL ") << std::left << std::setw(28) << c.name
          << " value=" << c.value << " threshold=" << c.threshold << "  "
          << c.detail << '\n';
    }
    ok = ok && report.AllPassed();
  }
  return ok ? 0 : 1;
}

int CmdCheck(const ResolvedConfig& resolved, std::ostream& out) {
  const AssumptionReport report = CheckAssumptions(resolved.config);
  for (const auto& item : report.items) {
    out << (item.ok ? "ok   " : "FAIL ") << std::left << std::setw(34) << item.name
        << " " << std::setw(14) << item.value << " want " << item.bound << "  "
        << item.description << '\n';
  }
  return report.AllOk() ? 0 : 1;
}

}  // namespace cldyn
