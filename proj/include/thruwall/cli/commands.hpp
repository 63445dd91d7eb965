/*
 * Copyright 2026 The thruwall Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *    http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include <json.hpp>

#include "thruwall/common/error.hpp"
#include "thruwall/io/log.hpp"
#include "thruwall/io/run_config.hpp"

namespace thruwall::cli {

inline constexpr const char* kOutputEnv = "THRUWALL_OUT";

struct GlobalOptions {
  std::optional<std::filesystem::path> config;
  std::optional<std::uint64_t> seed;
  std::optional<std::filesystem::path> out;
  std::optional<int> threads;
  std::optional<std::string> variant;
};

struct Context {
  io::RunConfig config;
  std::filesystem::path out_root;
  std::string config_hash;
  io::JsonLog* log = nullptr;
};

/// Loads the config (defaults when no file), applies flag overrides and
/// resolves the output root: --out, then config.output_dir, then
/// $THRUWALL_OUT, then "runs".
Context make_context(const GlobalOptions& options, io::JsonLog& log);

// Each command writes its artifacts and returns a JSON summary of what it did.

/// data/ris_off.twd and, when the config enables the surface, data/ris_on.twd,
/// each with a .provenance.json sidecar.
nlohmann::json cmd_gen_data(const Context& ctx);

/// ris/phase_config.json, ris/trace.csv, ris/gain_report.json, ris/link_budget.json.
nlohmann::json cmd_ris_optimize(const Context& ctx);

/// Real-valued container plus a .meta.json sidecar (split and normalization).
nlohmann::json cmd_preprocess(const Context& ctx, const std::filesystem::path& input,
                              const std::filesystem::path& output);

/// runs/<name>/{checkpoint.ckpt, history.csv, training.json, metrics.json,
/// confusion.csv, run.json}.
nlohmann::json cmd_train(const Context& ctx, const std::filesystem::path& features,
                         const std::string& name);

/// split is one of all, train, val, test; the non-"all" splits need the
/// container's .meta.json sidecar.
nlohmann::json cmd_eval(const Context& ctx, const std::filesystem::path& checkpoint,
                        const std::filesystem::path& input, const std::string& split,
                        const std::optional<std::filesystem::path>& output);

/// Comparison table, surface on/off deltas, ablation table and plot series
/// over the given run directories.
nlohmann::json cmd_report(const Context& ctx, const std::vector<std::filesystem::path>& runs,
                          const std::filesystem::path& output);

/// Full command line. Logs go to `err` as JSON lines, the summary to `out`.
/// On failure a one-line error object is printed to `out` and the exit code
/// is nonzero.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

/// Process exit code for a library error kind.
int exit_code_for(ErrorKind kind);

}  // namespace thruwall::cli
