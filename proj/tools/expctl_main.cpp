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

// expctl: runs contrastive-learning dynamics experiments.
//
//   expctl run --preset figure1 --mode multi --seeds 0,1,2 --out runs/
//   expctl figure1 --out fig1/
//   expctl verify --preset theory
//   expctl check --config my.yaml

#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "cldyn/expctl.hpp"

namespace {

struct SourceFlags {
  std::string preset;
  std::string config;
  std::string mode;
  std::size_t log_every = 0;
  std::size_t probe_every = 0;
};

void AddSourceFlags(CLI::App* cmd, SourceFlags& f, bool cadence) {
  cmd->add_option("--preset", f.preset, "Named preset (figure1, theory)");
  cmd->add_option("--config", f.config, "YAML config file");
  cmd->add_option("--mode", f.mode, "single or multi")
      ->check(CLI::IsMember({"single", "multi"}));
  if (cadence) {
    cmd->add_option("--log-every", f.log_every, "Trace row every k steps")
        ->check(CLI::PositiveNumber);
    cmd->add_option("--probe-every", f.probe_every, "Probe refit every k steps")
        ->check(CLI::PositiveNumber);
  }
}

cldyn::ConfigSource ToSource(const SourceFlags& f) {
  cldyn::ConfigSource src;
  src.preset = f.preset;
  src.config_path = f.config;
  if (!f.mode.empty()) src.mode = cldyn::ParseMode(f.mode);
  if (f.log_every) src.log_every = f.log_every;
  if (f.probe_every) src.probe_every = f.probe_every;
  return src;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Contrastive-learning feature dynamics experiments"};
  app.require_subcommand(1);

  SourceFlags run_src;
  std::string run_seeds = "0";
  std::string run_out = ".";
  unsigned run_threads = 1;
  bool dump_weights = false;
  bool dump_ledger = false;
  CLI::App* run = app.add_subcommand("run", "Train and write traces and summaries");
  AddSourceFlags(run, run_src, true);
  run->add_option("--seeds", run_seeds, "Seed list, e.g. 0,1,2 or 0-4");
  run->add_option("--out", run_out, "Output directory");
  run->add_option("--threads", run_threads, "Seeds run in parallel")
      ->check(CLI::PositiveNumber);
  run->add_flag("--dump-weights", dump_weights, "Write final weight checkpoints");
  run->add_flag("--dump-ledger", dump_ledger, "Write the final coefficient ledger");

  std::string fig_seeds = "0,1,2";
  std::string fig_out = ".";
  unsigned fig_threads = 1;
  std::size_t fig_log = 0, fig_probe = 0;
  CLI::App* fig = app.add_subcommand("figure1", "Both modes on figure1, merged panels");
  fig->add_option("--seeds", fig_seeds, "Seed list");
  fig->add_option("--out", fig_out, "Output directory");
  fig->add_option("--threads", fig_threads, "Seeds run in parallel")
      ->check(CLI::PositiveNumber);
  fig->add_option("--log-every", fig_log, "Trace row every k steps")
      ->check(CLI::PositiveNumber);
  fig->add_option("--probe-every", fig_probe, "Probe refit every k steps")
      ->check(CLI::PositiveNumber);

  SourceFlags verify_src;
  std::string verify_seeds = "0";
  double fault = 0.0;
  CLI::App* verify = app.add_subcommand("verify", "Lemma and consistency checks");
  AddSourceFlags(verify, verify_src, false);
  verify->add_option("--seeds", verify_seeds, "Seed list");
  verify->add_option("--inject-grad-fault", fault,
                     "Add this value to one analytic gradient entry (test hook)");

  SourceFlags check_src;
  CLI::App* check = app.add_subcommand("check", "Print assumption diagnostics");
  AddSourceFlags(check, check_src, false);

  CLI11_PARSE(app, argc, argv);

  try {
    if (*run) {
      cldyn::RunOptions opts;
      opts.seeds = cldyn::ParseSeeds(run_seeds);
      opts.out_dir = run_out;
      opts.threads = run_threads;
      opts.dump_weights = dump_weights;
      opts.dump_ledger = dump_ledger;
      return cldyn::CmdRun(cldyn::Resolve(ToSource(run_src)), opts, std::cout,
                           std::cerr);
    }
    if (*fig) {
      cldyn::Figure1Options opts;
      opts.seeds = cldyn::ParseSeeds(fig_seeds);
      opts.out_dir = fig_out;
      opts.threads = fig_threads;
      if (fig_log) opts.log_every = fig_log;
      if (fig_probe) opts.probe_every = fig_probe;
      return cldyn::CmdFigure1(opts, std::cout, std::cerr);
    }
    if (*verify) {
      cldyn::VerifyCommandOptions opts;
      opts.seeds = cldyn::ParseSeeds(verify_seeds);
      opts.gradient_fault = fault;
      return cldyn::CmdVerify(cldyn::Resolve(ToSource(verify_src)), opts, std::cout,
                              std::cerr);
    }
    if (*check) {
      return cldyn::CmdCheck(cldyn::Resolve(ToSource(check_src)), std::cout);
    }
  } catch (const cldyn::ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n\n" << app.help();
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
