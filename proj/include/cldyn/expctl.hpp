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

#ifndef CLDYN_EXPCTL_HPP_
#define CLDYN_EXPCTL_HPP_

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "cldyn/trainer.hpp"
#include "cldyn/verification.hpp"
#include "json.hpp"

namespace cldyn {

inline constexpr std::string_view kVersion = "0.1.0";

// "0,1,2", "0-4" or a mix of both.
std::vector<std::uint64_t> ParseSeeds(std::string_view text);

// Resolves --preset / --config into a configuration. Exactly one of the two
// must be given. A --mode flag overrides the mode in a config file.
struct ConfigSource {
  std::string preset;
  std::string config_path;
  std::optional<Mode> mode;
  std::optional<std::size_t> log_every;
  std::optional<std::size_t> probe_every;
};

struct ResolvedConfig {
  TrainConfig config;
  std::string preset;  // preset name, or the preset a config file is based on
};

ResolvedConfig Resolve(const ConfigSource& src);

std::string TraceHeader();
std::string TraceRow(const TraceRecord& row);

nlohmann::ordered_json SummaryJson(const RunResult& run,
                                   const std::string& config_hash);

// Writes `content` to `path` through a temporary file and a rename.
void WriteFileAtomic(const std::filesystem::path& path, std::string_view content);

struct RunOptions {
  std::vector<std::uint64_t> seeds{0};
  std::filesystem::path out_dir = ".";
  unsigned threads = 1;
  bool dump_weights = false;
  bool dump_ledger = false;
};

struct SeedOutcome {
  std::uint64_t seed = 0;
  std::optional<RunResult> result;
  std::string error;  // set when the run failed
};

// Runs every seed and writes its trace and summary. Failures are recorded in
// the outcome instead of thrown.
std::vector<SeedOutcome> RunSeeds(const ResolvedConfig& resolved,
                                  const RunOptions& opts, std::ostream& log);

int CmdRun(const ResolvedConfig& resolved, const RunOptions& opts,
           std::ostream& out, std::ostream& err);

struct PanelRow {
  std::size_t step = 0;
  double single_mean = 0.0;
  double single_std = 0.0;
  double multi_mean = 0.0;
  double multi_std = 0.0;
};

enum class Panel { kLoss, kAccuracy, kSignal, kNoise };

std::string PanelFileName(Panel panel);

// Mean and sample standard deviation across seeds at every step logged by
// all runs of both modes.
std::vector<PanelRow> MergePanel(const std::vector<RunResult>& single,
                                 const std::vector<RunResult>& multi,
                                 Panel panel);

std::string PanelCsv(const std::vector<PanelRow>& rows);

struct Figure1Options {
  std::vector<std::uint64_t> seeds{0, 1, 2};
  std::filesystem::path out_dir = ".";
  unsigned threads = 1;
  std::optional<std::size_t> log_every;
  std::optional<std::size_t> probe_every;
};

int CmdFigure1(const Figure1Options& opts, std::ostream& out, std::ostream& err);

struct VerifyCommandOptions {
  std::vector<std::uint64_t> seeds{0};
  double gradient_fault = 0.0;
};

int CmdVerify(const ResolvedConfig& resolved, const VerifyCommandOptions& opts,
              std::ostream& out, std::ostream& err);

// Prints the assumption diagnostics; exit code 0 iff all hold.
int CmdCheck(const ResolvedConfig& resolved, std::ostream& out);

}  // namespace cldyn

#endif  // CLDYN_EXPCTL_HPP_
