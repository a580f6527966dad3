#include "eofair/report.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>

#include "eofair/error.hpp"

namespace eofair {

namespace {

std::string fixed(double v, int digits = 4) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

std::string optional_number(const std::optional<double>& v) {
  if (!v) return "";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6g", *v);
  return buf;
}

std::vector<const RunResult*> sorted_runs(std::span<const RunResult> results) {
  std::vector<const RunResult*> runs;
  for (const auto& r : results) runs.push_back(&r);
  std::stable_sort(runs.begin(), runs.end(), [](const RunResult* a, const RunResult* b) {
    const auto key = [](const RunResult* r) {
      return std::make_tuple(r->config.label(), r->config.lambda.value_or(-1.0),
                             r->config.alpha.value_or(-1.0), r->config.seed);
    };
    return key(a) < key(b);
  });
  return runs;
}

const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e",
                          "#9467bd", "#8c564b", "#e377c2", "#17becf"};

}  // namespace

ReportFormat parse_report_format(std::string_view name) {
  if (name == "csv") return ReportFormat::csv;
  if (name == "json") return ReportFormat::json;
  if (name == "svg" || name == "svg-scatter") return ReportFormat::svg;
  fail(ErrorCategory::config, "unknown report format '" + std::string(name) + "'");
}

// ---------------------------------------------------------------------------
// JSON

void to_json(nlohmann::json& j, const TrainConfig& c) {
  j = nlohmann::json{{"objective", to_string(c.objective)},
                     {"method", to_string(c.method)},
                     {"fairbatch_schedule",
                      c.fairbatch_schedule == FairBatchSchedule::per_epoch ? "epoch" : "batch"},
                     {"lr", c.lr},
                     {"batch_size", c.batch_size},
                     {"max_epochs", c.max_epochs},
                     {"patience", c.patience},
                     {"seed", c.seed},
                     {"hidden", c.hidden},
                     {"activation", c.activation == Activation::tanh ? "tanh" : "relu"},
                     {"selection_slack", c.selection_slack}};
  j["lambda"] = c.lambda ? nlohmann::json(*c.lambda) : nlohmann::json(nullptr);
  j["alpha"] = c.alpha ? nlohmann::json(*c.alpha) : nlohmann::json(nullptr);
}

void from_json(const nlohmann::json& j, TrainConfig& c) {
  c.objective = parse_objective_kind(j.at("objective").get<std::string>());
  c.method = parse_method(j.at("method").get<std::string>());
  c.fairbatch_schedule = j.at("fairbatch_schedule").get<std::string>() == "batch"
                             ? FairBatchSchedule::per_batch
                             : FairBatchSchedule::per_epoch;
  j.at("lr").get_to(c.lr);
  j.at("batch_size").get_to(c.batch_size);
  j.at("max_epochs").get_to(c.max_epochs);
  j.at("patience").get_to(c.patience);
  j.at("seed").get_to(c.seed);
  j.at("hidden").get_to(c.hidden);
  c.activation = j.at("activation").get<std::string>() == "relu" ? Activation::relu
                                                                  : Activation::tanh;
  j.at("selection_slack").get_to(c.selection_slack);
  c.lambda = j.at("lambda").is_null() ? std::nullopt
                                      : std::optional<double>(j.at("lambda").get<double>());
  c.alpha = j.at("alpha").is_null() ? std::nullopt
                                    : std::optional<double>(j.at("alpha").get<double>());
}

void to_json(nlohmann::json& j, const EpochRecord& r) {
  j = nlohmann::json{{"epoch", r.epoch}, {"train_objective", r.train_objective}, {"dev", r.dev}};
}

void from_json(const nlohmann::json& j, EpochRecord& r) {
  j.at("epoch").get_to(r.epoch);
  j.at("train_objective").get_to(r.train_objective);
  j.at("dev").get_to(r.dev);
}

void to_json(nlohmann::json& j, const RunResult& r) {
  j = nlohmann::json{{"config", r.config},
                     {"train_size", r.train_size},
                     {"history", r.history},
                     {"dev", r.dev},
                     {"test", r.test},
                     {"epochs_run", r.epochs_run},
                     {"selected_epoch", r.selected_epoch}};
}

void from_json(const nlohmann::json& j, RunResult& r) {
  j.at("config").get_to(r.config);
  j.at("train_size").get_to(r.train_size);
  j.at("history").get_to(r.history);
  j.at("dev").get_to(r.dev);
  j.at("test").get_to(r.test);
  j.at("epochs_run").get_to(r.epochs_run);
  j.at("selected_epoch").get_to(r.selected_epoch);
}

// ---------------------------------------------------------------------------
// emitters

std::string results_csv(std::span<const RunResult> results) {
  std::ostringstream out;
  out << "label,method,objective,lambda,alpha,seed,train_size,epochs_run,selected_epoch,"
         "dev_f1_micro,dev_f1_macro,dev_gap,test_f1_micro,test_f1_macro,test_gap,test_accuracy\n";
  for (const auto* r : sorted_runs(results)) {
    const auto& c = r->config;
    out << c.label() << ',' << to_string(c.method) << ',' << to_string(c.objective) << ','
        << optional_number(c.lambda) << ',' << optional_number(c.alpha) << ',' << c.seed << ','
        << r->train_size << ',' << r->epochs_run << ',' << r->selected_epoch << ','
        << fixed(100 * r->dev.f1_micro) << ',' << fixed(100 * r->dev.f1_macro) << ','
        << fixed(100 * r->dev.gap) << ',' << fixed(100 * r->test.f1_micro) << ','
        << fixed(100 * r->test.f1_macro) << ',' << fixed(100 * r->test.gap) << ','
        << fixed(100 * r->test.accuracy) << '\n';
  }
  return out.str();
}

std::string results_json(std::span<const RunResult> results) {
  nlohmann::json runs = nlohmann::json::array();
  for (const auto* r : sorted_runs(results)) runs.push_back(*r);
  return nlohmann::json{{"runs", runs}}.dump(2) + "\n";
}

std::string results_svg(std::span<const RunResult> results) {
  constexpr double W = 640, H = 480, L = 70, R = 170, T = 30, B = 60;
  std::map<std::string, std::vector<ParetoPoint>> series;
  double xmin = 1e300, xmax = -1e300, ymin = 1e300, ymax = -1e300;
  for (const auto* r : sorted_runs(results)) {
    ParetoPoint p{100 * r->test.f1_micro, 100 * r->test.gap,
                  r->config.label() + " lambda=" + optional_number(r->config.lambda) +
                      " alpha=" + optional_number(r->config.alpha)};
    series[r->config.label()].push_back(p);
    xmin = std::min(xmin, p.gap);
    xmax = std::max(xmax, p.gap);
    ymin = std::min(ymin, p.performance);
    ymax = std::max(ymax, p.performance);
  }
  if (series.empty()) xmin = ymin = 0, xmax = ymax = 1;
  const double xpad = std::max(0.5, 0.05 * (xmax - xmin));
  const double ypad = std::max(0.5, 0.05 * (ymax - ymin));
  xmin -= xpad, xmax += xpad, ymin -= ypad, ymax += ypad;
  const auto sx = [&](double x) { return L + (x - xmin) / (xmax - xmin) * (W - L - R); };
  const auto sy = [&](double y) { return H - B - (y - ymin) / (ymax - ymin) * (H - T - B); };

  std::ostringstream s;
  s << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H
    << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  s << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  s << "<line x1=\"" << L << "\" y1=\"" << H - B << "\" x2=\"" << W - R << "\" y2=\"" << H - B
    << "\" stroke=\"black\"/>\n";
  s << "<line x1=\"" << L << "\" y1=\"" << T << "\" x2=\"" << L << "\" y2=\"" << H - B
    << "\" stroke=\"black\"/>\n";
  for (int t = 0; t <= 4; ++t) {
    const double xv = xmin + (xmax - xmin) * t / 4.0, yv = ymin + (ymax - ymin) * t / 4.0;
    s << "<text x=\"" << fixed(sx(xv), 1) << "\" y=\"" << H - B + 16
      << "\" text-anchor=\"middle\">" << fixed(xv, 1) << "</text>\n";
    s << "<text x=\"" << L - 6 << "\" y=\"" << fixed(sy(yv) + 4, 1)
      << "\" text-anchor=\"end\">" << fixed(yv, 1) << "</text>\n";
  }
  s << "<text x=\"" << (L + W - R) / 2 << "\" y=\"" << H - 15
    << "\" text-anchor=\"middle\">GAP (lower is better)</text>\n";
  s << "<text x=\"18\" y=\"" << (T + H - B) / 2 << "\" text-anchor=\"middle\" transform=\"rotate(-90 18 "
    << (T + H - B) / 2 << ")\">F1 micro (higher is better)</text>\n";

  int k = 0;
  for (const auto& [label, pts] : series) {
    const char* color = kPalette[k % std::size(kPalette)];
    const auto front = pareto_front(pts);
    for (const auto& p : pts) {
      s << "<circle cx=\"" << fixed(sx(p.gap), 2) << "\" cy=\"" << fixed(sy(p.performance), 2)
        << "\" r=\"3\" fill=\"" << color << "\"><title>" << p.key << "</title></circle>\n";
    }
    for (const auto& p : front) {
      s << "<circle cx=\"" << fixed(sx(p.gap), 2) << "\" cy=\"" << fixed(sy(p.performance), 2)
        << "\" r=\"7\" fill=\"none\" stroke=\"" << color << "\" stroke-width=\"2\"/>\n";
    }
    const double ly = T + 18.0 * k;
    s << "<circle cx=\"" << W - R + 20 << "\" cy=\"" << ly << "\" r=\"4\" fill=\"" << color
      << "\"/><text x=\"" << W - R + 30 << "\" y=\"" << ly + 4 << "\">" << label << "</text>\n";
    ++k;
  }
  s << "<text x=\"" << W - R + 14 << "\" y=\"" << T + 18.0 * k + 4
    << "\">ringed: Pareto points</text>\n";
  s << "</svg>\n";
  return s.str();
}

void emit_report(std::span<const RunResult> results, const std::filesystem::path& path,
                 ReportFormat format) {
  std::string text;
  switch (format) {
    case ReportFormat::csv: text = results_csv(results); break;
    case ReportFormat::json: text = results_json(results); break;
    case ReportFormat::svg: text = results_svg(results); break;
  }
  std::ofstream out(path, std::ios::binary);
  require(out.good(), ErrorCategory::io, "cannot write " + path.string());
  out << text;
  require(out.good(), ErrorCategory::io, "write failed for " + path.string());
}

std::vector<RunResult> load_results_json(const std::filesystem::path& path) {
  std::ifstream in(path);
  require(in.good(), ErrorCategory::io, "cannot open " + path.string());
  try {
    const auto j = nlohmann::json::parse(in);
    return j.at("runs").get<std::vector<RunResult>>();
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCategory::parse, path.string() + ": " + e.what());
  }
}

}  // namespace eofair
