// driverid: command-line front end for the driver identification pipeline.
//
// Exit codes: 0 success, 1 usage or configuration error, 2 data error
// (unreadable or malformed input), 3 internal error.

#include <algorithm>
#include <cstdio>
#include <deque>
#include <fstream>
#include <functional>
#include <iomanip>
#include <iostream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "driverid/error.hpp"
#include "driverid/eval.hpp"
#include "driverid/feature_matrix.hpp"
#include "driverid/ingest.hpp"
#include "driverid/models.hpp"
#include "driverid/obd_codec.hpp"
#include "driverid/pipeline.hpp"
#include "driverid/preprocess.hpp"
#include "json.hpp"

namespace {

using driverid::Error;
using driverid::ErrorCode;
using nlohmann::json;

enum Exit { kOk = 0, kUsage = 1, kData = 2, kInternal = 3 };

int exit_code(const Error& e) {
  switch (e.code()) {
    case ErrorCode::InvalidConfig:
    case ErrorCode::InvalidWindowSpec:
    case ErrorCode::NoBaselineDesignated:
      return kUsage;
    default:
      return kData;
  }
}

struct Output {
  std::string format = "text";
  bool json() const { return format == "json"; }
};

void add_format(CLI::App* sub, Output& out) {
  sub->add_option("--format", out.format, "Output format")->check(CLI::IsMember({"text", "json"}))->capture_default_str();
}

void emit_json(const json& j) { std::cout << j.dump(2) << '\n'; }

std::string fixed(double v, int digits = 2) {
  std::ostringstream os;
  os << std::fixed << std::setprecision(digits) << v;
  return os.str();
}

std::string hex_byte(std::uint8_t b) {
  char buf[3];
  std::snprintf(buf, sizeof buf, "%02X", b);
  return buf;
}

// Options that map onto RunConfig keys. Values are kept as text and applied
// as "key=value" overrides after any config file or preset, so a flag only
// takes effect when it was given.
struct ConfigFlags {
  std::vector<std::pair<CLI::Option*, std::string>> bound;
  std::deque<std::string> values;  // stable addresses for CLI11
  std::vector<std::string> sets;
  bool no_stratify = false;
  CLI::Option* no_stratify_opt = nullptr;

  void add(CLI::App* sub, const std::string& flag, const std::string& key, const std::string& help) {
    values.emplace_back();
    bound.emplace_back(sub->add_option(flag, values.back(), help), key);
  }

  void apply(driverid::RunConfig& c) const {
    for (std::size_t i = 0; i < bound.size(); ++i) {
      if (bound[i].first->count() > 0) c.set(bound[i].second + "=" + values[i]);
    }
    if (no_stratify_opt && no_stratify_opt->count() > 0) c.stratified = false;
    for (const auto& s : sets) c.set(s);
  }
};

void add_data_flags(CLI::App* sub, ConfigFlags& f) {
  f.add(sub, "-i,--input", "input", "Trip log CSV");
  f.add(sub, "--label-column", "label_column", "Label column name (default Class)");
  f.add(sub, "--exclude", "exclude", "Comma-separated bookkeeping columns to drop");
  f.add(sub, "--keep", "keep_labels", "Comma-separated labels to keep, e.g. A,D");
}

void add_prepare_flags(CLI::App* sub, ConfigFlags& f) {
  f.add(sub, "--features", "features", "fixed15 or rank:<k>");
  f.add(sub, "--window", "window", "Window length in samples (default 60)");
  f.add(sub, "--stride", "stride", "Window stride (default 1)");
  f.add(sub, "--stats", "stats", "Window statistics, e.g. mean,median,std");
}

void add_eval_flags(CLI::App* sub, ConfigFlags& f) {
  f.add(sub, "--models,--kind", "models", "all, or comma-separated: zeror,knn,nb,lr,svm,reptree,adaboost,vote");
  f.add(sub, "--normalize,--fit-normalizer-on", "normalizer_fit", "Normalizer fit: train, all or none");
  f.add(sub, "--folds", "folds", "Cross-validation folds (default 10)");
  f.add(sub, "--split", "split", "Fold assignment: random or blocked");
  f.add(sub, "--seed", "seed", "Seed for folds and stochastic learners (default 1)");
  f.add(sub, "--k", "knn.k", "Neighbour count for knn (default 1)");
  f.no_stratify_opt = sub->add_flag("--no-stratify", f.no_stratify, "Plain instead of stratified folds");
  sub->add_option("--set", f.sets, "Override any config key, e.g. knn.k=3 (repeatable)");
}

void add_output_flags(CLI::App* sub, ConfigFlags& f) {
  f.add(sub, "--report", "report", "Write the JSON run report here");
  f.add(sub, "--model-dir", "model_dir", "Train every model on all windows and save it here");
}

void print_metrics_text(const driverid::MetricsReport& r) {
  std::cout << "model: " << r.name() << "\n";
  std::cout << "accuracy: " << fixed(r.accuracy) << "%\n";
  std::cout << "confusion matrix (rows actual, columns predicted):\n      ";
  for (const auto& c : r.matrix.classes()) std::cout << std::setw(8) << c;
  std::cout << '\n';
  for (std::size_t i = 0; i < r.matrix.size(); ++i) {
    std::cout << std::setw(6) << r.matrix.classes()[i];
    for (std::size_t j = 0; j < r.matrix.size(); ++j) std::cout << std::setw(8) << r.matrix.count(i, j);
    std::cout << '\n';
  }
  std::cout << std::setw(8) << "class" << std::setw(12) << "precision" << std::setw(10) << "recall" << std::setw(10)
            << "f1" << '\n';
  auto cell = [](const driverid::Metric& m) { return m.defined ? fixed(m.value) : std::string("n/a"); };
  for (const auto& m : r.per_class) {
    std::cout << std::setw(8) << m.label << std::setw(12) << cell(m.precision) << std::setw(10) << cell(m.recall)
              << std::setw(10) << cell(m.f1) << '\n';
  }
  std::cout << std::setw(8) << "average" << std::setw(12) << cell(r.averaged.precision) << std::setw(10)
            << cell(r.averaged.recall) << std::setw(10) << cell(r.averaged.f1) << '\n';
}

void print_prepared_text(const driverid::PreparedData& d) {
  std::cout << "records: " << d.records << "\n";
  std::cout << "features kept (" << d.selection.kept.size() << "):";
  for (const auto& k : d.selection.kept) std::cout << ' ' << k;
  std::cout << "\nwindows: " << d.matrix.rows() << " of " << d.windows_considered << " (dropped "
            << d.dropped_mixed_label << " mixed-label, " << d.dropped_discontiguous << " discontiguous)\n";
  std::cout << "window classes:";
  for (const auto& [label, share] : d.window_distribution) std::cout << ' ' << label << '=' << fixed(100 * share) << '%';
  std::cout << '\n';
}

void print_pipeline_text(const driverid::PipelineResult& r) {
  print_prepared_text(r.data);
  std::cout << '\n';
  if (r.comparison) {
    std::cout << r.comparison->to_text();
  } else {
    for (const auto& m : r.reports) std::cout << std::setw(10) << std::left << m.name() << fixed(m.accuracy) << "%\n";
  }
}

std::vector<driverid::MetricsReport> reports_from(const json& j) {
  std::vector<driverid::MetricsReport> out;
  if (j.is_array()) {
    for (const auto& e : j) {
      auto more = reports_from(e);
      out.insert(out.end(), more.begin(), more.end());
    }
  } else if (j.is_object() && j.contains("reports")) {
    for (const auto& e : j.at("reports")) out.push_back(driverid::MetricsReport::from_json(e));
  } else {
    out.push_back(driverid::MetricsReport::from_json(j));
  }
  return out;
}

// -------------------------------------------------------------------------

int cmd_decode(const std::string& service_text, const std::string& pid_text, const std::string& payload_text,
               const std::string& registry_path, bool list, const Output& out) {
  namespace obd = driverid::obd;
  const obd::PidRegistry registry =
      registry_path.empty() ? obd::PidRegistry::builtin() : obd::PidRegistry::load_file(registry_path);
  if (list) {
    json rows = json::array();
    for (const auto& d : registry.pids()) {
      rows.push_back({{"service", hex_byte(d.service)},
                      {"pid", hex_byte(d.pid)},
                      {"data_bytes", d.data_bytes},
                      {"description", d.description},
                      {"min", d.min_value ? json(*d.min_value) : json(nullptr)},
                      {"max", d.max_value ? json(*d.max_value) : json(nullptr)},
                      {"unit", d.unit}});
    }
    if (out.json()) {
      emit_json({{"format_version", registry.format_version()}, {"pids", rows}});
    } else {
      for (const auto& d : registry.pids()) {
        std::cout << hex_byte(d.service) << ' ' << hex_byte(d.pid) << "  " << d.data_bytes << " byte(s)  "
                  << d.description;
        if (!d.unit.empty()) std::cout << " [" << d.unit << ']';
        std::cout << '\n';
      }
    }
    return kOk;
  }
  if (pid_text.empty() || payload_text.empty()) {
    throw Error(ErrorCode::InvalidConfig, "cli", "decode needs --pid and --bytes (or --list)");
  }
  const auto service = obd::parse_hex_byte(service_text);
  const auto pid = obd::parse_hex_byte(pid_text);
  const auto payload = obd::parse_hex_bytes(payload_text);
  const auto reading = obd::decode(registry, service, pid, payload);
  if (!out.json()) {
    std::cout << reading.to_string() << '\n';
    return kOk;
  }
  json value;
  if (auto s = reading.scalar()) {
    value = *s;
  } else if (auto* f = std::get_if<obd::FuelSystemStatus>(&reading.value)) {
    value = {{"bank1", f->bank1},
             {"bank1_text", obd::FuelSystemStatus::describe(f->bank1)},
             {"bank2", f->bank2},
             {"bank2_text", obd::FuelSystemStatus::describe(f->bank2)}};
  } else if (auto* t = std::get_if<obd::SensorTemperatures>(&reading.value)) {
    std::vector<bool> supported(t->supported.begin(), t->supported.end());
    value = {{"support_mask", t->support_mask}, {"celsius", t->celsius}, {"supported", supported}};
  }
  std::string raw;
  for (auto b : reading.raw) raw += hex_byte(b);
  emit_json({{"service", hex_byte(service)},
             {"pid", hex_byte(pid)},
             {"description", reading.descriptor.description},
             {"unit", reading.descriptor.unit},
             {"raw", raw},
             {"value", value},
             {"text", reading.to_string()}});
  return kOk;
}

int cmd_ingest(const ConfigFlags& flags, bool with_stats, const std::string& out_path, const Output& out) {
  driverid::RunConfig c;
  flags.apply(c);
  if (c.input.empty()) throw Error(ErrorCode::InvalidConfig, "cli", "ingest needs --input");
  auto opts = c.load_options();
  auto ds = driverid::load_dataset_file(c.input, opts);
  const auto keep = driverid::split_list(c.keep_labels);
  if (!keep.empty()) ds = driverid::filter_labels(ds, std::set<std::string>(keep.begin(), keep.end()));
  if (!out_path.empty()) {
    std::ofstream f(out_path);
    if (!f) throw Error(ErrorCode::Io, "cli", "cannot write '" + out_path + "'");
    driverid::write_dataset(f, ds, opts);
  }
  const auto dist = driverid::class_distribution(ds);
  json stats = json::array();
  if (with_stats) {
    for (const auto& name : ds.column_names()) {
      const auto s = driverid::column_stats(ds, name);
      stats.push_back({{"column", name}, {"mean", s.mean}, {"std", s.std}});
    }
  }
  if (out.json()) {
    json j = {{"input", c.input},
              {"records", ds.size()},
              {"features", ds.column_names()},
              {"class_distribution", dist}};
    if (with_stats) j["statistics"] = stats;
    emit_json(j);
    return kOk;
  }
  std::cout << "records: " << ds.size() << "\nfeatures: " << ds.dimension() << "\nclasses:";
  for (const auto& [label, share] : dist) std::cout << ' ' << label << '=' << fixed(100 * share) << '%';
  std::cout << '\n';
  if (with_stats) {
    for (const auto& s : stats) {
      std::cout << std::left << std::setw(48) << s["column"].get<std::string>() << std::right << std::setw(14)
                << fixed(s["mean"].get<double>(), 3) << std::setw(14) << fixed(s["std"].get<double>(), 3) << '\n';
    }
  }
  return kOk;
}

int cmd_prepare(const ConfigFlags& flags, const std::string& out_path, const Output& out) {
  driverid::RunConfig c;
  flags.apply(c);
  const auto d = driverid::prepare(c);
  json sidecar = d.summary_json();
  sidecar["config"] = c.to_json();
  if (!out_path.empty()) {
    std::ofstream f(out_path);
    if (!f) throw Error(ErrorCode::Io, "cli", "cannot write '" + out_path + "'");
    driverid::write_feature_matrix(f, d.matrix, c.label_column);
    driverid::write_text_file(out_path + ".json", sidecar.dump(2) + "\n");
  }
  if (out.json()) {
    emit_json(sidecar);
  } else {
    print_prepared_text(d);
  }
  return kOk;
}

int cmd_train(const std::string& data_path, const std::string& kind_text, const ConfigFlags& flags,
              const std::string& out_path, const Output& out) {
  driverid::RunConfig c;
  flags.apply(c);
  const auto kind = driverid::parse_model_kind(kind_text);
  if (!kind) throw Error(ErrorCode::InvalidConfig, "cli", "unknown model '" + kind_text + "'");
  const auto data = driverid::read_feature_matrix_file(data_path, c.label_column);
  auto mc = c.hyperparameters;
  mc.seed = c.seed;
  const auto bundle = driverid::train_bundle(*kind, data, mc, c.normalizer());
  const json j = bundle.to_json();
  if (!out_path.empty()) driverid::write_text_file(out_path, j.dump(2) + "\n");
  if (out.json()) {
    emit_json({{"model", std::string(driverid::to_string(*kind))},
               {"classes", bundle.model->classes()},
               {"dimension", bundle.model->dimension()},
               {"metadata", bundle.model->training_metadata()},
               {"output", out_path}});
  } else {
    std::cout << "trained " << driverid::to_string(*kind) << " on " << data.rows() << " rows, "
              << data.cols() << " columns, " << bundle.model->classes().size() << " classes\n";
    if (!out_path.empty()) std::cout << "saved " << out_path << '\n';
  }
  return kOk;
}

int cmd_evaluate(const std::string& data_path, const std::string& model_file, const ConfigFlags& flags,
                 const std::string& out_path, const std::string& csv_path, const Output& out) {
  driverid::RunConfig c;
  flags.apply(c);
  c.validate();
  const auto data = driverid::read_feature_matrix_file(data_path, c.label_column);
  std::vector<driverid::MetricsReport> reports;
  if (!model_file.empty()) {
    reports.push_back(driverid::score(driverid::ModelBundle::from_json(driverid::read_json_file(model_file)), data));
  } else {
    auto mc = c.hyperparameters;
    mc.seed = c.seed;
    for (auto kind : c.model_kinds()) {
      reports.push_back(driverid::cross_validate(kind, mc, data, c.cv_plan(), c.normalizer()));
    }
  }
  json reports_j = json::array();
  for (const auto& r : reports) reports_j.push_back(r.to_json());
  const json j = {{"format_version", 1}, {"data", data_path}, {"reports", reports_j}};
  if (!out_path.empty()) driverid::write_text_file(out_path, j.dump(2) + "\n");
  if (!csv_path.empty()) {
    std::ostringstream os;
    driverid::write_metrics_csv(os, reports);
    driverid::write_text_file(csv_path, os.str());
  }
  if (out.json()) {
    emit_json(j);
  } else {
    for (std::size_t i = 0; i < reports.size(); ++i) {
      if (i) std::cout << '\n';
      print_metrics_text(reports[i]);
    }
  }
  return kOk;
}

int cmd_compare(const std::vector<std::string>& files, const std::string& baseline, const Output& out) {
  std::vector<driverid::MetricsReport> reports;
  for (const auto& f : files) {
    auto more = reports_from(driverid::read_json_file(f));
    reports.insert(reports.end(), more.begin(), more.end());
  }
  const auto table = driverid::baseline_compare(reports, baseline);
  if (out.json()) {
    emit_json(table.to_json());
  } else {
    std::cout << table.to_text();
  }
  return kOk;
}

int cmd_pipeline(driverid::RunConfig c, const ConfigFlags& flags, const Output& out) {
  flags.apply(c);
  const auto result = driverid::run_pipeline(c);
  if (out.json()) {
    emit_json(result.to_json());
  } else {
    print_pipeline_text(result);
    if (!c.report.empty()) std::cout << "\nreport: " << c.report << '\n';
  }
  return kOk;
}

driverid::RunConfig config_from_file(const std::string& path) {
  const json j = driverid::read_json_file(path);
  // A run report carries the config that produced it.
  if (j.is_object() && j.contains("config") && j.at("config").is_object()) {
    return driverid::RunConfig::from_json(j.at("config"));
  }
  return driverid::RunConfig::from_json(j);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Driver identification from in-vehicle CAN-bus / OBD-II telemetry"};
  app.require_subcommand(1);
  app.set_version_flag("--version", "driverid 0.1.0");

  Output out;
  std::function<int()> action;

  // decode
  std::string service = "01", pid, payload, registry;
  bool list = false;
  auto* decode = app.add_subcommand("decode", "Decode an OBD-II PID payload into a physical value");
  decode->add_option("--service", service, "Service (mode) byte in hex")->capture_default_str();
  decode->add_option("--pid", pid, "PID byte in hex, e.g. 0C");
  decode->add_option("--bytes,--payload", payload, "Data bytes in hex, e.g. \"1A F8\"");
  decode->add_option("--registry", registry, "PID registry CSV replacing the built-in one");
  decode->add_flag("--list", list, "List the registry instead of decoding");
  add_format(decode, out);
  decode->callback([&] { action = [&] { return cmd_decode(service, pid, payload, registry, list, out); }; });

  // ingest
  ConfigFlags ingest_flags;
  bool with_stats = false;
  std::string ingest_out;
  auto* ingest = app.add_subcommand("ingest", "Load a trip log and summarize records, classes and column statistics");
  add_data_flags(ingest, ingest_flags);
  ingest->add_flag("--summary", "Print record count, width and class distribution (the default)");
  ingest->add_flag("--column-stats", with_stats, "Print mean and population std of every feature");
  ingest->add_option("-o,--out", ingest_out, "Write the filtered dataset as CSV");
  add_format(ingest, out);
  ingest->callback([&] { action = [&] { return cmd_ingest(ingest_flags, with_stats, ingest_out, out); }; });

  // prepare
  ConfigFlags prepare_flags;
  std::string prepare_out;
  auto* prep = app.add_subcommand("prepare", "Select features and extract windowed statistics into a feature matrix");
  add_data_flags(prep, prepare_flags);
  add_prepare_flags(prep, prepare_flags);
  prep->add_option("-o,--out", prepare_out, "Feature-matrix CSV; a JSON summary goes to <out>.json");
  add_format(prep, out);
  prep->callback([&] { action = [&] { return cmd_prepare(prepare_flags, prepare_out, out); }; });

  // train
  ConfigFlags train_flags;
  std::string train_data, train_kind, train_out;
  auto* trn = app.add_subcommand("train", "Train one classifier on a feature matrix and save it");
  trn->add_option("-d,--data,--input", train_data, "Feature-matrix CSV from `prepare`")->required();
  trn->add_option("-m,--model,--kind", train_kind, "zeror, knn, nb, lr, svm, reptree, adaboost or vote")->required();
  train_flags.add(trn, "--normalize", "normalizer_fit", "train (fit on this data) or none");
  train_flags.add(trn, "--seed", "seed", "Seed for stochastic learners");
  train_flags.add(trn, "--k", "knn.k", "Neighbour count for knn");
  train_flags.add(trn, "--label-column", "label_column", "Label column name");
  trn->add_option("--set", train_flags.sets, "Hyperparameter override, e.g. knn.k=3 (repeatable)");
  trn->add_option("-o,--out", train_out, "Model file (JSON)");
  add_format(trn, out);
  trn->callback([&] { action = [&] { return cmd_train(train_data, train_kind, train_flags, train_out, out); }; });

  // evaluate
  ConfigFlags eval_flags;
  std::string eval_data, eval_model, eval_out, eval_csv;
  auto* evl = app.add_subcommand("evaluate", "Cross-validate classifiers, or score a saved model, on a feature matrix");
  evl->add_option("-d,--data,--input", eval_data, "Feature-matrix CSV from `prepare`")->required();
  evl->add_option("--model-file", eval_model, "Score this saved model instead of cross-validating");
  eval_flags.add(evl, "--label-column", "label_column", "Label column name");
  add_eval_flags(evl, eval_flags);
  evl->add_option("-o,--out,--report", eval_out, "Write the metrics reports (JSON)");
  evl->add_option("--csv", eval_csv, "Write per-class metrics as CSV for plotting");
  add_format(evl, out);
  evl->callback([&] { action = [&] { return cmd_evaluate(eval_data, eval_model, eval_flags, eval_out, eval_csv, out); }; });

  // compare
  std::vector<std::string> compare_files;
  std::string baseline = "zeror";
  auto* cmp = app.add_subcommand("compare", "Rank metrics reports against a baseline");
  cmp->add_option("reports", compare_files, "Report files from `evaluate`, `run` or `repro`")->required();
  cmp->add_option("--baseline", baseline, "Baseline model name")->capture_default_str();
  add_format(cmp, out);
  cmp->callback([&] { action = [&] { return cmd_compare(compare_files, baseline, out); }; });

  // run
  ConfigFlags run_flags;
  std::string config_path;
  auto* run = app.add_subcommand("run", "Run the full pipeline from a config file (or a previous report)");
  run->add_option("-c,--config", config_path, "Flat JSON config, or a report whose config is re-run")->required();
  add_data_flags(run, run_flags);
  add_prepare_flags(run, run_flags);
  add_eval_flags(run, run_flags);
  add_output_flags(run, run_flags);
  add_format(run, out);
  run->callback([&] { action = [&] { return cmd_pipeline(config_from_file(config_path), run_flags, out); }; });

  // repro
  ConfigFlags repro_flags;
  std::string preset_name;
  auto* repro = app.add_subcommand("repro", "Run a reference experiment preset: table6 (drivers A,D) or table7 (all)");
  repro->add_option("preset", preset_name, "table6 or table7")->required()->check(CLI::IsMember(driverid::preset_names()));
  add_data_flags(repro, repro_flags);
  add_prepare_flags(repro, repro_flags);
  add_eval_flags(repro, repro_flags);
  add_output_flags(repro, repro_flags);
  add_format(repro, out);
  repro->callback([&] { action = [&] { return cmd_pipeline(driverid::preset(preset_name), repro_flags, out); }; });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? kOk : kUsage;
  }

  try {
    return action();
  } catch (const Error& e) {
    std::cerr << "driverid: " << e.what() << '\n';
    return exit_code(e);
  } catch (const std::exception& e) {
    std::cerr << "driverid: internal error: " << e.what() << '\n';
    return kInternal;
  }
}
