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

#include "thruwall/cli/commands.hpp"

#include <omp.h>

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <ctime>
#include <map>
#include <sstream>

#include <CLI11.hpp>

#include "thruwall/ad/checkpoint.hpp"
#include "thruwall/cli/pipeline.hpp"
#include "thruwall/common/random.hpp"
#include "thruwall/io/container.hpp"
#include "thruwall/io/files.hpp"
#include "thruwall/ris/export.hpp"

namespace thruwall::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string utc_timestamp() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

fs::path sidecar(const fs::path& file, const char* suffix) {
  fs::path p = file;
  p += suffix;
  return p;
}

void log_info(const Context& ctx, std::string_view event, json fields = json::object()) {
  if (ctx.log != nullptr) ctx.log->info(event, std::move(fields));
}

io::Dataset load_dataset(const fs::path& path) {
  return io::decode_dataset(io::read_file(path));
}

json read_optional_json(const fs::path& path) {
  return fs::exists(path) ? io::read_json(path) : json();
}

std::string csv_row(std::initializer_list<std::string> cells) {
  std::string line;
  for (const auto& c : cells) {
    if (!line.empty()) line += ',';
    line += c;
  }
  return line + "\n";
}

std::string num(double v) {
  std::ostringstream os;
  os.precision(10);
  os << v;
  return os.str();
}

/// Segment indices for a named split; "all" needs no metadata.
std::vector<std::size_t> split_indices(const std::string& split, const json& meta,
                                       std::size_t segments) {
  if (split == "all") {
    std::vector<std::size_t> idx(segments);
    for (std::size_t i = 0; i < segments; ++i) idx[i] = i;
    return idx;
  }
  require(split == "train" || split == "val" || split == "test", ErrorKind::invalid_argument,
          "split must be all, train, val or test");
  require(!meta.is_null(), ErrorKind::io, "split '" + split + "' needs the .meta.json sidecar");
  const auto s = model::Split::from_json(meta.at("split"));
  return split == "train" ? s.train : split == "val" ? s.val : s.test;
}

}  // namespace

int exit_code_for(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::configuration:
    case ErrorKind::invalid_argument: return 2;
    case ErrorKind::io: return 3;
    case ErrorKind::checksum:
    case ErrorKind::format: return 4;
    case ErrorKind::divergence: return 5;
    default: return 1;
  }
}

Context make_context(const GlobalOptions& options, io::JsonLog& log) {
  json j = json::object();
  if (options.config) j = io::read_json(*options.config);
  if (options.seed) j["seed"] = *options.seed;
  if (options.variant) {
    if (!j.contains("model")) j["model"] = json::object();
    j["model"]["variant"] = *options.variant;
  }
  Context ctx;
  ctx.config = io::run_config_from_json(j);
  if (options.out) {
    ctx.out_root = *options.out;
  } else if (!ctx.config.output_dir.empty()) {
    ctx.out_root = ctx.config.output_dir;
  } else if (const char* env = std::getenv(kOutputEnv); env != nullptr && *env != '\0') {
    ctx.out_root = env;
  } else {
    ctx.out_root = "runs";
  }
  if (options.threads) {
    require(*options.threads > 0, ErrorKind::invalid_argument, "--threads must be positive");
    omp_set_num_threads(*options.threads);
  }
  ctx.config_hash = io::config_hash(ctx.config);
  ctx.log = &log;
  return ctx;
}

namespace {

// CRC of the container body, i.e. the value stored in its trailer.
std::string hex32(std::uint32_t v) {
  char buf[9];
  std::snprintf(buf, sizeof buf, "%08x", v);
  return buf;
}

}  // namespace

json cmd_gen_data(const Context& ctx) {
  const auto& cfg = ctx.config;
  const fs::path dir = ctx.out_root / "data";
  json summary = {{"command", "gen-data"}, {"files", json::array()}};

  auto emit = [&](const io::Dataset& ds, const std::string& stem, bool surface, json extra) {
    const fs::path file = dir / (stem + ".twd");
    const Bytes bytes = io::encode_dataset(ds);
    io::write_atomic(file, bytes);
    json prov = {{"file", file.filename().string()},
                 {"seed", cfg.seed},
                 {"config_hash", ctx.config_hash},
                 {"surface", surface ? "on" : "off"},
                 {"records", ds.records.size()},
                 {"freq_bins", ds.header.freq_bins},
                 {"time_samples", ds.header.time_samples},
                 {"class_names", ds.header.class_names},
                 {"crc32", hex32(crc32_of(std::span(bytes).first(bytes.size() - 4)))},
                 {"created_utc", utc_timestamp()}};
    prov.update(extra);
    io::write_json(sidecar(file, ".provenance.json"), prov);
    log_info(ctx, "dataset_written", {{"file", file.string()}, {"records", ds.records.size()}});
    summary["files"].push_back(file.string());
  };

  emit(generate_dataset(cfg, nullptr), "ris_off", false, json::object());
  if (cfg.dataset.with_ris) {
    const SurfacePlan plan = plan_surface(cfg);
    const double g = plan.coherent_gain();
    emit(generate_dataset(cfg, &plan), "ris_on", true,
         {{"surface_amplitude_gain", g},
          {"surface_snr_gain_db", 20.0 * std::log10(g)},
          {"phase_config", ris::config_to_json(plan.greedy.config)}});
    summary["surface_snr_gain_db"] = 20.0 * std::log10(g);
  }
  summary["records_per_file"] = cfg.dataset.samples_per_class * cfg.dataset.class_names().size();
  return summary;
}

json cmd_ris_optimize(const Context& ctx) {
  const auto& cfg = ctx.config;
  const fs::path dir = ctx.out_root / "ris";
  const SurfacePlan plan = plan_surface(cfg);
  io::write_json(dir / "phase_config.json", ris::config_to_json(plan.greedy.config));
  io::write_atomic(dir / "trace.csv", ris::trace_to_csv(plan.greedy.trace));

  ris::ChannelModelSpec model;
  model.kind = cfg.surface.channel_model;
  const auto report = ris::array_gain_report(cfg.surface.gain_trials,
                                             {cfg.surface.rows, cfg.surface.cols}, model,
                                             derive_seed(cfg.seed, {kGainStream}));
  io::write_json(dir / "gain_report.json", ris::gain_report_to_json(report));
  const json budget = io::link_budget_report(cfg);
  io::write_json(dir / "link_budget.json", budget);

  const auto& v = plan.greedy.trace.values;
  const double gain_db =
      10.0 * std::log10(std::max(v.back(), ris::kPowerFloor) / std::max(v.front(), ris::kPowerFloor));
  log_info(ctx, "surface_optimized", {{"trace_entries", v.size()}, {"gain_db", gain_db}});
  return {{"command", "ris-optimize"},
          {"trace_entries", v.size()},
          {"scene_gain_db", gain_db},
          {"mean_gain_db", report.mean_db},
          {"trials", report.trials.size()},
          {"received_power_dbm", budget.at("received_power_dbm")},
          {"directory", dir.string()}};
}

json cmd_preprocess(const Context& ctx, const fs::path& input, const fs::path& output) {
  const io::Dataset complex = load_dataset(input);
  const auto& h = complex.header;
  require(h.kind == io::PayloadKind::complex_iq, ErrorKind::dimension,
          "'" + input.string() + "' is already a feature container");
  require(h.freq_bins == ctx.config.scene.freq_bins && h.time_samples == ctx.config.scene.time_samples,
          ErrorKind::dimension, "container header does not match the configured scene");
  require(std::abs(h.sample_rate - ctx.config.scene.sample_rate_hz) < 1e-9, ErrorKind::dimension,
          "container sample rate does not match the configured scene");

  const Features f = preprocess(complex, ctx.config);
  io::write_atomic(output, io::encode_dataset(
                               io::dataset_from_features(f.tensor, f.sample_rate, f.class_names)));
  json meta = f.meta();
  meta["source"] = input.filename().string();
  meta["config_hash"] = ctx.config_hash;
  const json prov = read_optional_json(sidecar(input, ".provenance.json"));
  meta["surface"] = prov.is_object() ? prov.value("surface", "unknown") : "unknown";
  io::write_json(sidecar(output, ".meta.json"), meta);
  log_info(ctx, "features_written", {{"file", output.string()}, {"segments", f.tensor.segments}});
  return {{"command", "preprocess"},
          {"output", output.string()},
          {"segments", f.tensor.segments},
          {"train", f.split.train.size()},
          {"val", f.split.val.size()},
          {"test", f.split.test.size()}};
}

json cmd_train(const Context& ctx, const fs::path& features_path, const std::string& name) {
  const auto& cfg = ctx.config;
  const io::Dataset ds = load_dataset(features_path);
  require(ds.header.kind == io::PayloadKind::real, ErrorKind::dimension,
          "training expects a preprocessed container");
  const json meta = read_optional_json(sidecar(features_path, ".meta.json"));
  require(!meta.is_null(), ErrorKind::io,
          "missing '" + sidecar(features_path, ".meta.json").string() + "'");

  Features f;
  f.tensor = io::features_from_dataset(ds);
  f.split = model::Split::from_json(meta.at("split"));
  f.class_names = ds.header.class_names;
  f.sample_rate = ds.header.sample_rate;
  require(f.tensor.time_steps == cfg.model.input_len && f.tensor.channels == cfg.model.input_channels,
          ErrorKind::dimension, "feature shape does not match the model configuration");
  require(f.class_names.size() == cfg.model.num_classes, ErrorKind::dimension,
          "class count does not match the model configuration");

  const fs::path dir = ctx.out_root / "runs" / name;
  std::optional<model::HiMamba> net;
  const TrainOutcome r = train_and_evaluate(
      f, cfg,
      [&](const model::EpochRecord& e) {
        log_info(ctx, "epoch", {{"epoch", e.epoch},
                                {"train_loss", e.train_loss},
                                {"train_accuracy", e.train_accuracy},
                                {"val_loss", e.val_loss},
                                {"val_accuracy", e.val_accuracy}});
      },
      &net);

  const json ckpt_meta = {{"model", model::to_json(cfg.model)},
                          {"class_names", f.class_names},
                          {"normalization", meta.at("normalization")},
                          {"config_hash", ctx.config_hash},
                          {"seed", cfg.seed},
                          {"best_epoch", r.report.best_epoch}};
  io::write_atomic(dir / "checkpoint.ckpt", ad::encode_checkpoint(net->parameters(), ckpt_meta));
  io::write_atomic(dir / "history.csv", r.report.to_csv());
  io::write_json(dir / "training.json", r.report.to_json());
  io::write_json(dir / "metrics.json", r.test.to_json(f.class_names));
  io::write_atomic(dir / "confusion.csv", model::confusion_to_csv(r.test.confusion, f.class_names));
  const json run = {{"name", name},
                    {"variant", model::to_string(cfg.model.variant)},
                    {"surface", meta.value("surface", "unknown")},
                    {"seed", cfg.seed},
                    {"config_hash", ctx.config_hash},
                    {"features", features_path.filename().string()},
                    {"parameters", net->count_params()},
                    {"macs_per_sample", net->count_macs()},
                    {"best_epoch", r.report.best_epoch},
                    {"metrics",
                     {{"accuracy", r.test.accuracy},
                      {"macro_precision", r.test.macro_precision},
                      {"macro_recall", r.test.macro_recall},
                      {"macro_f1", r.test.macro_f1}}}};
  io::write_json(dir / "run.json", run);
  log_info(ctx, "run_written", {{"directory", dir.string()}});
  json out = run;
  out["command"] = "train";
  out["directory"] = dir.string();
  return out;
}

json cmd_eval(const Context& ctx, const fs::path& checkpoint, const fs::path& input,
              const std::string& split, const std::optional<fs::path>& output) {
  require(fs::exists(checkpoint), ErrorKind::io, "checkpoint '" + checkpoint.string() + "' not found");
  require(fs::exists(input), ErrorKind::io, "dataset '" + input.string() + "' not found");
  const auto ckpt = ad::decode_checkpoint(io::read_file(checkpoint));
  const json& meta = ckpt.manifest.at("metadata");
  model::HiMamba net(model::model_config_from_json(meta.at("model")), 0);
  ad::load_into(ckpt, net.parameters());

  const io::Dataset ds = load_dataset(input);
  require(ds.header.kind == io::PayloadKind::real, ErrorKind::dimension,
          "evaluation expects a preprocessed container");
  const auto tensor = io::features_from_dataset(ds);
  const auto& mc = net.config();
  require(tensor.time_steps == mc.input_len && tensor.channels == mc.input_channels,
          ErrorKind::dimension, "dataset shape does not match the checkpoint");
  const auto names = meta.at("class_names").get<std::vector<std::string>>();
  require(names == ds.header.class_names, ErrorKind::dimension,
          "dataset classes do not match the checkpoint");

  const auto idx = split_indices(split, read_optional_json(sidecar(input, ".meta.json")),
                                 tensor.segments);
  const model::Metrics m = model::evaluate(net, tensor, idx);
  json result = m.to_json(names);
  result["split"] = split;
  result["samples"] = idx.size();
  if (output) io::write_json(*output, result);
  log_info(ctx, "evaluated", {{"accuracy", m.accuracy}, {"samples", idx.size()}});
  return {{"command", "eval"},
          {"split", split},
          {"samples", idx.size()},
          {"accuracy", m.accuracy},
          {"macro_precision", m.macro_precision},
          {"macro_recall", m.macro_recall},
          {"macro_f1", m.macro_f1}};
}

json cmd_report(const Context& ctx, const std::vector<fs::path>& runs, const fs::path& output) {
  require(!runs.empty(), ErrorKind::invalid_argument, "report needs at least one run directory");
  static const char* kMetrics[] = {"accuracy", "macro_precision", "macro_recall", "macro_f1"};

  json table = json::array();
  std::string table_csv = csv_row({"run", "variant", "surface", "seed", "accuracy",
                                   "macro_precision", "macro_recall", "macro_f1"});
  std::string epochs_csv =
      csv_row({"run", "epoch", "train_loss", "train_accuracy", "val_loss", "val_accuracy"});
  std::string per_class_csv = csv_row({"run", "class", "accuracy"});
  json confusion = json::object();

  for (const auto& dir : runs) {
    require(fs::exists(dir / "run.json"), ErrorKind::io,
            "'" + dir.string() + "' is not a run directory");
    const json run = io::read_json(dir / "run.json");
    const json metrics = io::read_json(dir / "metrics.json");
    const json training = io::read_json(dir / "training.json");
    const std::string name = run.at("name");
    json row = {{"run", name},
                {"variant", run.at("variant")},
                {"surface", run.at("surface")},
                {"seed", run.at("seed")}};
    for (const char* k : kMetrics) row[k] = run.at("metrics").at(k);
    table_csv += csv_row({name, row["variant"].get<std::string>(), row["surface"].get<std::string>(),
                          std::to_string(row["seed"].get<std::uint64_t>()),
                          num(row["accuracy"]), num(row["macro_precision"]),
                          num(row["macro_recall"]), num(row["macro_f1"])});
    table.push_back(row);

    for (const auto& e : training.at("epochs"))
      epochs_csv += csv_row({name, std::to_string(e.at("epoch").get<std::size_t>()),
                             num(e.at("train_loss")), num(e.at("train_accuracy")),
                             num(e.at("val_loss")), num(e.at("val_accuracy"))});
    const auto names = metrics.at("class_names").get<std::vector<std::string>>();
    const auto per_class = metrics.at("per_class_accuracy").get<std::vector<double>>();
    for (std::size_t c = 0; c < per_class.size(); ++c)
      per_class_csv += csv_row({name, names[c], num(per_class[c])});
    confusion[name] = {{"class_names", names}, {"matrix", metrics.at("confusion")}};
  }

  // Surface on/off deltas for runs that agree on variant and seed.
  json deltas = json::array();
  std::string deltas_csv = csv_row({"variant", "seed", "metric", "ris_off", "ris_on", "delta"});
  for (const auto& on : table) {
    if (on["surface"] != "on") continue;
    for (const auto& off : table) {
      if (off["surface"] != "off" || off["variant"] != on["variant"] || off["seed"] != on["seed"])
        continue;
      for (const char* k : kMetrics) {
        const double a = off[k], b = on[k];
        deltas.push_back({{"variant", on["variant"]}, {"seed", on["seed"]}, {"metric", k},
                          {"ris_off", a}, {"ris_on", b}, {"delta", b - a}});
        deltas_csv += csv_row({on["variant"].get<std::string>(),
                               std::to_string(on["seed"].get<std::uint64_t>()), k, num(a), num(b),
                               num(b - a)});
      }
    }
  }

  // Ablation: mean metrics per variant, relative to the full model.
  std::map<std::string, std::vector<const json*>> by_variant;
  for (const auto& row : table) by_variant[row["variant"].get<std::string>()].push_back(&row);
  auto mean_of = [](const std::vector<const json*>& rows, const char* k) {
    double s = 0.0;
    for (const json* r : rows) s += (*r)[k].get<double>();
    return s / static_cast<double>(rows.size());
  };
  json ablation = json::array();
  std::string ablation_csv =
      csv_row({"variant", "runs", "mean_accuracy", "mean_macro_f1", "delta_accuracy_vs_full"});
  const bool has_full = by_variant.count("full") != 0;
  const double full_acc = has_full ? mean_of(by_variant["full"], "accuracy") : 0.0;
  for (const auto& [variant, rows] : by_variant) {
    const double acc = mean_of(rows, "accuracy");
    const double f1 = mean_of(rows, "macro_f1");
    json row = {{"variant", variant}, {"runs", rows.size()}, {"mean_accuracy", acc},
                {"mean_macro_f1", f1}};
    row["delta_accuracy_vs_full"] = has_full ? json(acc - full_acc) : json(nullptr);
    ablation.push_back(row);
    ablation_csv += csv_row({variant, std::to_string(rows.size()), num(acc), num(f1),
                             has_full ? num(acc - full_acc) : ""});
  }

  const json report = {{"runs", table}, {"surface_deltas", deltas}, {"ablation", ablation}};
  io::write_json(output / "report.json", report);
  io::write_atomic(output / "report.csv", table_csv);
  io::write_atomic(output / "surface_deltas.csv", deltas_csv);
  io::write_atomic(output / "ablation.csv", ablation_csv);
  io::write_atomic(output / "epochs.csv", epochs_csv);
  io::write_atomic(output / "per_class.csv", per_class_csv);
  io::write_json(output / "confusion.json", confusion);
  log_info(ctx, "report_written", {{"directory", output.string()}, {"runs", table.size()}});
  return {{"command", "report"}, {"directory", output.string()}, {"runs", table}};
}

namespace {

void print_summary(std::ostream& out, const json& s) {
  const std::string cmd = s.value("command", "");
  if (cmd == "gen-data") {
    out << "wrote " << s["files"].size() << " dataset file(s), " << s["records_per_file"].get<std::size_t>()
        << " records each\n";
    for (const auto& f : s["files"]) out << "  " << f.get<std::string>() << "\n";
  } else if (cmd == "ris-optimize") {
    out << "surface trace " << s["trace_entries"].get<std::size_t>() << " entries, scene gain "
        << num(s["scene_gain_db"]) << " dB, mean gain over " << s["trials"].get<std::size_t>()
        << " channels " << num(s["mean_gain_db"]) << " dB\n";
  } else if (cmd == "preprocess") {
    out << "wrote " << s["output"].get<std::string>() << " (" << s["segments"].get<std::size_t>()
        << " segments: " << s["train"].get<std::size_t>() << " train, "
        << s["val"].get<std::size_t>() << " val, " << s["test"].get<std::size_t>() << " test)\n";
  } else if (cmd == "train") {
    const auto& m = s["metrics"];
    out << "run " << s["name"].get<std::string>() << ": test accuracy " << num(m["accuracy"])
        << ", macro F1 " << num(m["macro_f1"]) << " (best epoch "
        << s["best_epoch"].get<std::size_t>() << ")\n";
  } else if (cmd == "eval") {
    out << s["split"].get<std::string>() << " split, " << s["samples"].get<std::size_t>()
        << " samples: accuracy " << num(s["accuracy"]) << ", macro F1 " << num(s["macro_f1"])
        << "\n";
  } else if (cmd == "report") {
    out << "report over " << s["runs"].size() << " run(s) in " << s["directory"].get<std::string>()
        << "\n";
    for (const auto& r : s["runs"])
      out << "  " << r["run"].get<std::string>() << "  acc " << num(r["accuracy"]) << "  P "
          << num(r["macro_precision"]) << "  R " << num(r["macro_recall"]) << "  F1 "
          << num(r["macro_f1"]) << "\n";
  } else {
    out << s.dump() << "\n";
  }
}

void print_error(std::ostream& out, io::JsonLog& log, std::string_view kind, const std::string& msg,
                 int code) {
  const json err = {{"status", "error"}, {"error", {{"kind", kind}, {"message", msg}}},
                    {"exit_code", code}};
  log.emit(io::LogLevel::error, "failed", {{"kind", kind}, {"message", msg}});
  out << err.dump() << "\n";
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  io::JsonLog log(err);
  CLI::App app{"Through-wall activity recognition toolkit"};
  app.require_subcommand(1);
  app.set_help_all_flag("--help-all");

  GlobalOptions g;
  std::string config_path, out_path, variant;
  std::uint64_t seed = 0;
  int threads = 0;
  auto* o_config = app.add_option("--config", config_path, "Run configuration (JSON)");
  auto* o_seed = app.add_option("--seed", seed, "Override the configured seed");
  auto* o_out = app.add_option("--out", out_path, "Output root (default $THRUWALL_OUT or runs)");
  auto* o_threads = app.add_option("--threads", threads, "OpenMP worker threads");
  auto* o_variant = app.add_option("--variant", variant, "Model variant")
                        ->check(CLI::IsMember({"full", "concat-fusion", "freq-only", "time-only"}));
  for (auto* o : {o_config, o_seed, o_out, o_threads, o_variant}) o->configurable(false);

  auto* gen = app.add_subcommand("gen-data", "Synthesize RIS-off and RIS-on CSI containers");
  auto* opt = app.add_subcommand("ris-optimize", "Greedy surface configuration and gain report");

  auto* pre = app.add_subcommand("preprocess", "Amplitude, low-pass, segment and normalize");
  std::string pre_in, pre_out;
  pre->add_option("--input", pre_in, "Complex container")->required();
  pre->add_option("--output", pre_out, "Feature container (default <out>/features/<stem>.twd)");

  auto* trn = app.add_subcommand("train", "Train HiMamba on a feature container");
  std::string trn_in, trn_name;
  trn->add_option("--input", trn_in, "Feature container")->required();
  trn->add_option("--name", trn_name, "Run name (default <variant>-<stem>-s<seed>)");

  auto* evl = app.add_subcommand("eval", "Evaluate a checkpoint on a feature container");
  std::string ev_ckpt, ev_in, ev_split = "all", ev_out;
  evl->add_option("--checkpoint", ev_ckpt, "Checkpoint file")->required();
  evl->add_option("--input", ev_in, "Feature container")->required();
  evl->add_option("--split", ev_split, "all|train|val|test")
      ->check(CLI::IsMember({"all", "train", "val", "test"}));
  evl->add_option("--output", ev_out, "Also write the metrics JSON here");

  auto* rep = app.add_subcommand("report", "Compare runs and emit plot series");
  std::vector<std::string> rep_runs;
  std::string rep_out;
  rep->add_option("--runs", rep_runs, "Run directories")->required();
  rep->add_option("--output", rep_out, "Report directory (default <out>/report)");

  for (auto* sub : {gen, opt, pre, trn, evl, rep}) sub->fallthrough();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    print_error(out, log, "usage", e.what(), 2);
    return 2;
  }

  try {
    if (*o_config) g.config = config_path;
    if (*o_seed) g.seed = seed;
    if (*o_out) g.out = out_path;
    if (*o_threads) g.threads = threads;
    if (*o_variant) g.variant = variant;
    const Context ctx = make_context(g, log);
    log.info("start", {{"command", app.get_subcommands().front()->get_name()},
                       {"seed", ctx.config.seed},
                       {"config_hash", ctx.config_hash},
                       {"out", ctx.out_root.string()}});

    json summary;
    if (*gen) {
      summary = cmd_gen_data(ctx);
    } else if (*opt) {
      summary = cmd_ris_optimize(ctx);
    } else if (*pre) {
      const fs::path in = pre_in;
      const fs::path o =
          pre_out.empty() ? ctx.out_root / "features" / in.filename() : fs::path(pre_out);
      summary = cmd_preprocess(ctx, in, o);
    } else if (*trn) {
      const fs::path in = trn_in;
      const std::string name =
          trn_name.empty() ? model::to_string(ctx.config.model.variant) + "-" +
                                 in.stem().string() + "-s" + std::to_string(ctx.config.seed)
                           : trn_name;
      summary = cmd_train(ctx, in, name);
    } else if (*evl) {
      summary = cmd_eval(ctx, ev_ckpt, ev_in, ev_split,
                         ev_out.empty() ? std::nullopt : std::optional<fs::path>(ev_out));
    } else if (*rep) {
      std::vector<fs::path> dirs(rep_runs.begin(), rep_runs.end());
      summary = cmd_report(ctx, dirs, rep_out.empty() ? ctx.out_root / "report" : fs::path(rep_out));
    }
    print_summary(out, summary);
    log.info("done", {{"command", summary.value("command", "")}});
    return 0;
  } catch (const Error& e) {
    const int code = exit_code_for(e.kind());
    print_error(out, log, to_string(e.kind()), e.what(), code);
    return code;
  } catch (const std::exception& e) {
    print_error(out, log, "internal", e.what(), 1);
    return 1;
  }
}

}  // namespace thruwall::cli
