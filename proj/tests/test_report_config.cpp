#include <filesystem>
#include <fstream>
#include <sstream>

#include "doctest.h"
#include "helpers.hpp"

#include "eofair/config.hpp"
#include "eofair/error.hpp"
#include "eofair/report.hpp"

using namespace eofair;
namespace fs = std::filesystem;

namespace {

RunResult fake_run(std::string_view objective, std::optional<double> lambda, std::uint64_t seed,
                   double f1, double gap) {
  RunResult r;
  r.config.objective = parse_objective_kind(objective);
  r.config.lambda = lambda;
  r.config.seed = seed;
  r.train_size = 100;
  r.epochs_run = 3;
  r.selected_epoch = 2;
  r.test.f1_micro = r.test.accuracy = f1;
  r.test.f1_macro = f1 - 0.01;
  r.test.gap = gap;
  r.test.per_class_gap = {gap, std::nullopt};
  r.dev = r.test;
  EpochRecord e;
  e.epoch = 1;
  e.train_objective = 0.1 + 1.0 / 3;
  e.dev = r.dev;
  r.history = {e, e};
  r.history[1].epoch = 2;
  return r;
}

std::size_t line_count(const std::string& s) { return std::count(s.begin(), s.end(), '\n'); }

std::string read_file(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

TEST_CASE("CSV report ordering and header") {
  CHECK(line_count(results_csv({})) == 1);
  const std::vector<RunResult> runs = {fake_run("eo_cla", 1.0, 0, 0.7, 0.1),
                                       fake_run("eo_cla", 0.5, 0, 0.72, 0.123456),
                                       fake_run("ce", std::nullopt, 0, 0.8, 0.3)};
  const auto csv = results_csv(runs);
  CHECK(line_count(csv) == 4);
  std::istringstream in(csv);
  std::string header, r1, r2, r3;
  std::getline(in, header);
  std::getline(in, r1);
  std::getline(in, r2);
  std::getline(in, r3);
  CHECK(header.rfind("label,method,objective,lambda", 0) == 0);
  CHECK(r1.rfind("ce,plain,ce,,", 0) == 0);
  CHECK(r2.rfind("eo_cla,plain,eo_cla,0.5,", 0) == 0);
  CHECK(r3.rfind("eo_cla,plain,eo_cla,1,", 0) == 0);
  CHECK(r2.find(",12.3456,") != std::string::npos);
}

TEST_CASE("JSON round trip and SVG") {
  std::vector<RunResult> runs = {fake_run("eo_glb", 0.3, 4, 0.7, 0.2), fake_run("ce", {}, 4, 0.8, 0.4)};
  runs[0].config.method = Method::plain;
  runs[1].config.method = Method::fairbatch;
  runs[1].config.alpha = 0.1;
  runs[1].config.fairbatch_schedule = FairBatchSchedule::per_batch;
  const fs::path dir = fs::temp_directory_path() / "eofair_test_report";
  fs::create_directories(dir);
  emit_report(runs, dir / "r.json", ReportFormat::json);
  CHECK(load_results_json(dir / "r.json") == runs);
  emit_report(runs, dir / "r.svg", ReportFormat::svg);
  const auto svg = read_file(dir / "r.svg");
  CHECK(svg.rfind("<svg", 0) == 0);
  CHECK(svg.find("fairbatch") != std::string::npos);
  CHECK(svg.find("eo_glb") != std::string::npos);

  CHECK(parse_report_format("svg-scatter") == ReportFormat::svg);
  CHECK_THROWS_AS(parse_report_format("xml"), Error);
  CHECK_THROWS_AS(emit_report(runs, "/nonexistent_dir/x.csv", ReportFormat::csv), Error);

  std::ofstream(dir / "bad.json") << "{\"runs\": [ {";
  try {
    load_results_json(dir / "bad.json");
    FAIL("expected parse error");
  } catch (const Error& e) {
    CHECK(e.category() == ErrorCategory::parse);
  }
}

TEST_CASE("key-value config") {
  auto cfg = KeyValueConfig::parse(
      "# comment\nobjective = eo_cla\nlambda = 0.5  # trailing\n\nseed=7\nhidden = 32\n");
  const auto c = train_config_from(cfg);
  CHECK(c.objective == ObjectiveKind::eo_cla);
  CHECK(*c.lambda == 0.5);
  CHECK(c.seed == 7);
  CHECK(c.hidden == 32);
  CHECK(c.lr == 3e-3);
  CHECK(c.batch_size == 2048);
  CHECK(c.max_epochs == 60);
  CHECK(c.patience == 5);
  CHECK(c.selection_slack == 0.01);

  cfg.set("lambda", "0.25");
  CHECK(*train_config_from(cfg).lambda == 0.25);

  const auto category = [](auto&& fn) {
    try {
      fn();
    } catch (const Error& e) {
      return e.category();
    }
    return ErrorCategory::internal;
  };
  CHECK(category([] { KeyValueConfig::parse("nonsense_key = 1"); }) == ErrorCategory::config);
  CHECK(category([] { KeyValueConfig::parse("lambda 0.5"); }) == ErrorCategory::config);
  CHECK(category([] { train_config_from(KeyValueConfig::parse("lr = fast")); }) ==
        ErrorCategory::config);
  CHECK(category([] { train_config_from(KeyValueConfig::parse("objective = eo_cla")); }) ==
        ErrorCategory::config);
  CHECK(category([] { KeyValueConfig::load("/nonexistent.cfg"); }) == ErrorCategory::io);

  for (const auto& key : config_keys()) CHECK_FALSE(key.help.empty());
}

TEST_CASE("synthetic and sweep settings from config") {
  auto cfg = KeyValueConfig::parse(
      "synth_preset = custom\nsynth_n = 500\nsynth_joint = 0.1,0.4; 0.4,0.1\nsynth_leak = 1.5\n"
      "synth_dim = 3\nseed = 9\nsweep_values = 0.1, 1, 10\nrepeats = 2\n");
  const auto spec = synth_spec_from(cfg);
  CHECK(spec.n == 500);
  CHECK(spec.joint == std::vector<std::array<double, 2>>{{0.1, 0.4}, {0.4, 0.1}});
  CHECK(spec.attribute_leak == 1.5);
  CHECK(spec.dim == 3);
  CHECK(spec.seed == 9);
  const auto sw = sweep_settings_from(cfg);
  CHECK(sw.values == std::vector<double>{0.1, 1, 10});
  CHECK(sw.repeats == 2);
  CHECK(sw.param == SweepParam::lambda);

  auto moji = KeyValueConfig::parse("seed = 3\nsynth_n = 800\neval_n = 200\n");
  const auto data = load_data(moji);
  CHECK(data.train.size() == 800);
  CHECK(data.dev.size() == 200);
  CHECK(data.test.size() == 200);
  CHECK(load_data(moji).train == data.train);

  auto split = KeyValueConfig::parse("seed = 3\nsynth_n = 1000\neval = split\n");
  const auto s = load_data(split);
  CHECK(s.train.size() + s.dev.size() + s.test.size() == 1000);

  const fs::path csv = fs::temp_directory_path() / "eofair_test_cfg.csv";
  save_csv(data.train, csv);
  auto from_csv = KeyValueConfig::parse("seed = 3\n");
  from_csv.set("train_csv", csv.string());
  const auto cs = load_data(from_csv);
  CHECK(cs.train.size() + cs.dev.size() + cs.test.size() == 800);
}
