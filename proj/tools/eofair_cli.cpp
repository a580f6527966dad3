#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <string>

#include "CLI11.hpp"

#include "eofair/config.hpp"
#include "eofair/error.hpp"
#include "eofair/harness.hpp"
#include "eofair/report.hpp"

namespace fs = std::filesystem;
using namespace eofair;

namespace {

struct Overrides {
  std::string config_path;
  std::map<std::string, std::string> flags;
};

void add_config_flags(CLI::App* cmd, Overrides& o, bool seed_required) {
  cmd->add_option("--config", o.config_path, "key = value config file");
  for (const auto& key : config_keys()) {
    const std::string name(key.name);
    auto* opt = cmd->add_option("--" + name, o.flags[name], std::string(key.help));
    if (name == "seed" && seed_required) opt->required();
  }
}

KeyValueConfig resolve(const Overrides& o) {
  KeyValueConfig cfg = o.config_path.empty() ? KeyValueConfig{} : KeyValueConfig::load(o.config_path);
  for (const auto& [key, value] : o.flags)
    if (!value.empty()) cfg.set(key, value);
  return cfg;
}

void write_text(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  require(out.good(), ErrorCategory::io, "cannot write " + path.string());
  out << text;
  require(out.good(), ErrorCategory::io, "write failed for " + path.string());
}

void write_reports(std::span<const RunResult> runs, const fs::path& dir) {
  fs::create_directories(dir);
  emit_report(runs, dir / "results.csv", ReportFormat::csv);
  emit_report(runs, dir / "results.json", ReportFormat::json);
  emit_report(runs, dir / "results.svg", ReportFormat::svg);
}

std::string pct(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", 100 * v);
  return buf;
}

int run_train(const KeyValueConfig& cfg, const std::string& checkpoint) {
  const TrainConfig config = train_config_from(cfg);
  const Split data = load_data(cfg);
  ModelParams best;
  const RunResult result = train(config, data.train, data.dev, data.test, &best);
  const fs::path dir = cfg.get_or_default("out_dir");
  write_reports(std::span(&result, 1), dir);
  if (!checkpoint.empty()) save_checkpoint(best, checkpoint);
  std::cout << config.label() << ": epochs " << result.epochs_run << ", selected "
            << result.selected_epoch << ", test F1 " << pct(result.test.f1_micro) << ", GAP "
            << pct(result.test.gap) << '\n';
  return 0;
}

int run_sweep(const KeyValueConfig& cfg) {
  const TrainConfig base = train_config_from(cfg);
  const SweepSettings s = sweep_settings_from(cfg);
  const Split data = load_data(cfg);
  const auto runs = sweep(base, s.param, s.values, s.repeats, data.train, data.dev, data.test);
  write_reports(runs, cfg.get_or_default("out_dir"));

  std::string summary = "label,lambda,alpha,runs,test_f1_micro,test_f1_micro_std,test_gap,test_gap_std\n";
  for (const auto& a : aggregate(runs)) {
    char row[256];
    std::snprintf(row, sizeof row, "%s,%g,%g,%zu,%.4f,%.4f,%.4f,%.4f\n", a.label.c_str(), a.lambda,
                  a.alpha, a.runs, 100 * a.test_f1_micro.mean, 100 * a.test_f1_micro.std,
                  100 * a.test_gap.mean, 100 * a.test_gap.std);
    summary += row;
  }
  write_text(fs::path(cfg.get_or_default("out_dir")) / "aggregate.csv", summary);

  const RunResult& chosen = select_run(runs, base.selection_slack);
  std::cout << "selected " << to_string(s.param) << " = "
            << (s.param == SweepParam::lambda ? chosen.config.lambda.value_or(0.0)
                                              : chosen.config.alpha.value_or(0.0))
            << " (seed " << chosen.config.seed << "): test F1 " << pct(chosen.test.f1_micro)
            << ", GAP " << pct(chosen.test.gap) << '\n';
  return 0;
}

int run_sizesweep(const KeyValueConfig& cfg) {
  const TrainConfig base = train_config_from(cfg);
  const auto fractions = size_fractions_from(cfg);
  const Split data = load_data(cfg);
  const auto rows = size_sweep(base, fractions, data.train, data.dev, data.test);
  std::vector<RunResult> runs;
  std::string table = "fraction,train_size,test_f1_micro,test_f1_macro,test_gap\n";
  for (const auto& r : rows) {
    char row[160];
    std::snprintf(row, sizeof row, "%g,%zu,%.4f,%.4f,%.4f\n", r.fraction, r.train_size,
                  100 * r.result.test.f1_micro, 100 * r.result.test.f1_macro,
                  100 * r.result.test.gap);
    table += row;
    runs.push_back(r.result);
  }
  const fs::path dir = cfg.get_or_default("out_dir");
  write_text(dir / "sizes.csv", table);
  emit_report(runs, dir / "results.json", ReportFormat::json);
  std::cout << table;
  return 0;
}

int run_report(const std::string& input, const std::string& format, const std::string& out) {
  const auto runs = load_results_json(input);
  emit_report(runs, out, parse_report_format(format));
  return 0;
}

int run_synth(const KeyValueConfig& cfg, const std::string& out, const std::string& dev_out,
              const std::string& test_out) {
  if (dev_out.empty() && test_out.empty()) {
    save_csv(generate_synthetic(synth_spec_from(cfg)), out);
    return 0;
  }
  require(!dev_out.empty() && !test_out.empty(), ErrorCategory::config,
          "--dev-out and --test-out must be given together");
  const Split data = load_data(cfg);
  save_csv(data.train, out);
  save_csv(data.dev, dev_out);
  save_csv(data.test, test_out);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Equal-opportunity fairness training: train, sweep and report"};
  app.require_subcommand(1);

  Overrides train_o, sweep_o, size_o, synth_o;
  std::string checkpoint, input, format = "csv", report_out, synth_out, dev_out, test_out;

  auto* train_cmd = app.add_subcommand("train", "train one model and write its report");
  add_config_flags(train_cmd, train_o, true);
  train_cmd->add_option("--checkpoint", checkpoint, "write the selected model here");

  auto* sweep_cmd = app.add_subcommand("sweep", "train over sweep_values x repeats");
  add_config_flags(sweep_cmd, sweep_o, true);

  auto* size_cmd = app.add_subcommand("sizesweep", "train on stratified training subsets");
  add_config_flags(size_cmd, size_o, true);

  auto* report_cmd = app.add_subcommand("report", "re-emit a results.json as csv, json or svg");
  report_cmd->add_option("--input", input, "results.json")->required();
  report_cmd->add_option("--format", format, "csv | json | svg");
  report_cmd->add_option("--out", report_out, "output file")->required();

  auto* synth_cmd = app.add_subcommand("synth", "write a synthetic dataset as CSV");
  add_config_flags(synth_cmd, synth_o, true);
  synth_cmd->add_option("--out", synth_out, "training CSV")->required();
  synth_cmd->add_option("--dev-out", dev_out, "dev CSV (with --test-out)");
  synth_cmd->add_option("--test-out", test_out, "test CSV (with --dev-out)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "error[config]: " << e.what() << '\n';
    return static_cast<int>(ErrorCategory::config);
  }

  try {
    if (*train_cmd) return run_train(resolve(train_o), checkpoint);
    if (*sweep_cmd) return run_sweep(resolve(sweep_o));
    if (*size_cmd) return run_sizesweep(resolve(size_o));
    if (*report_cmd) return run_report(input, format, report_out);
    if (*synth_cmd) return run_synth(resolve(synth_o), synth_out, dev_out, test_out);
  } catch (const Error& e) {
    std::cerr << "error[" << to_string(e.category()) << "]: " << e.what() << '\n';
    return static_cast<int>(e.category());
  } catch (const fs::filesystem_error& e) {
    std::cerr << "error[io]: " << e.what() << '\n';
    return static_cast<int>(ErrorCategory::io);
  } catch (const std::exception& e) {
    std::cerr << "error[internal]: " << e.what() << '\n';
    return static_cast<int>(ErrorCategory::internal);
  }
  return 0;
}
