#include "eofair/config.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "eofair/error.hpp"

namespace eofair {

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

std::vector<std::string_view> split(std::string_view s, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  for (;;) {
    const auto pos = s.find(sep, start);
    out.push_back(trim(s.substr(start, pos - start)));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

std::string key_error(std::string_view key, std::string_view text, std::string_view expected) {
  return "key '" + std::string(key) + "': expected " + std::string(expected) + ", got '" +
         std::string(text) + "'";
}

}  // namespace

const std::vector<ConfigKey>& config_keys() {
  static const std::vector<ConfigKey> keys = {
      // training
      {"objective", "ce", "ce | eo_cla | eo_glb | eo_cla_max | eo_cla_min | eo_glb_max | eo_glb_min"},
      {"lambda", "", "fairness weight; required for every objective except ce"},
      {"method", "plain", "plain | ds | rw | fairbatch (ds/rw/fairbatch train on ce)"},
      {"alpha", "", "FairBatch step size in (0, 1); required for method fairbatch"},
      {"fairbatch_schedule", "epoch", "epoch | batch: when FairBatch updates its probabilities"},
      {"lr", "0.003", "Adam learning rate"},
      {"batch_size", "2048", "mini-batch size"},
      {"max_epochs", "60", "epoch budget"},
      {"patience", "5", "early-stopping patience on dev micro-F1"},
      {"seed", "", "run seed (required on the command line)"},
      {"hidden", "300", "hidden width of both layers"},
      {"activation", "tanh", "tanh | relu"},
      {"selection_slack", "0.01", "dev micro-F1 slack when selecting the fairest run"},
      // data
      {"train_csv", "", "training CSV (header y,a,f0,...); unset: synthetic data"},
      {"dev_csv", "", "dev CSV; unset with train_csv: stratified split"},
      {"test_csv", "", "test CSV"},
      {"label_column", "y", "label column name"},
      {"attribute_column", "a", "protected attribute column name"},
      {"split", "0.8,0.1,0.1", "train,dev,test fractions for stratified splits"},
      {"synth_preset", "moji", "moji | bios | custom"},
      {"synth_n", "", "synthetic training examples (preset default: moji 20000, bios 40000)"},
      {"synth_classes", "", "class count (custom preset)"},
      {"synth_joint", "", "P(y,a) rows 'p00,p01;p10,p11;...'"},
      {"synth_separation", "", "distance between class means"},
      {"synth_leak", "", "attribute signal on the last feature axis"},
      {"synth_noise", "", "isotropic noise standard deviation"},
      {"synth_dim", "", "feature dimension"},
      {"synth_seed", "", "generator seed (default: seed)"},
      {"eval", "balanced", "balanced: fresh dev/test with uniform joint | split: split one sample"},
      {"eval_n", "4000", "dev and test size when eval = balanced"},
      // sweeps
      {"sweep_param", "lambda", "lambda | alpha"},
      {"sweep_values", "", "comma-separated values for the swept parameter"},
      {"repeats", "3", "seed repeats per sweep value"},
      {"size_fractions", "0.01,0.1,0.5,1", "training-set fractions for sizesweep"},
      // output
      {"out_dir", "out", "output directory"},
  };
  return keys;
}

KeyValueConfig KeyValueConfig::parse(std::string_view text, std::string_view origin) {
  KeyValueConfig cfg;
  std::size_t line_no = 0;
  for (auto line : split(text, '\n')) {
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    require(eq != std::string_view::npos, ErrorCategory::config,
            std::string(origin) + ":" + std::to_string(line_no) + ": expected 'key = value'");
    try {
      cfg.set(trim(line.substr(0, eq)), std::string(trim(line.substr(eq + 1))));
    } catch (const Error& e) {
      fail(ErrorCategory::config, std::string(origin) + ":" + std::to_string(line_no) + ": " + e.what());
    }
  }
  return cfg;
}

KeyValueConfig KeyValueConfig::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  require(in.good(), ErrorCategory::io, "cannot open config " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse(ss.str(), path.string());
}

void KeyValueConfig::set(std::string_view key, std::string value) {
  const auto& keys = config_keys();
  const bool known = std::any_of(keys.begin(), keys.end(), [&](const ConfigKey& k) { return k.name == key; });
  require(known, ErrorCategory::config, "unknown key '" + std::string(key) + "'");
  values_.insert_or_assign(std::string(key), std::move(value));
}

std::optional<std::string> KeyValueConfig::get(std::string_view key) const {
  if (auto it = values_.find(key); it != values_.end() && !it->second.empty()) return it->second;
  return std::nullopt;
}

std::string KeyValueConfig::get_or_default(std::string_view key) const {
  if (auto v = get(key)) return *v;
  for (const auto& k : config_keys())
    if (k.name == key) return std::string(k.default_value);
  fail(ErrorCategory::internal, "no such key " + std::string(key));
}

double parse_double(std::string_view key, std::string_view text) {
  text = trim(text);
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  require(ec == std::errc() && ptr == text.data() + text.size() && std::isfinite(v),
          ErrorCategory::config, key_error(key, text, "a number"));
  return v;
}

long long parse_integer(std::string_view key, std::string_view text) {
  text = trim(text);
  long long v = 0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  require(ec == std::errc() && ptr == text.data() + text.size(), ErrorCategory::config,
          key_error(key, text, "an integer"));
  return v;
}

std::vector<double> parse_double_list(std::string_view key, std::string_view text) {
  std::vector<double> out;
  for (auto item : split(text, ',')) out.push_back(parse_double(key, item));
  return out;
}

TrainConfig train_config_from(const KeyValueConfig& cfg) {
  TrainConfig c;
  c.objective = parse_objective_kind(cfg.get_or_default("objective"));
  if (auto v = cfg.get("lambda")) c.lambda = parse_double("lambda", *v);
  c.method = parse_method(cfg.get_or_default("method"));
  if (auto v = cfg.get("alpha")) c.alpha = parse_double("alpha", *v);
  const auto schedule = cfg.get_or_default("fairbatch_schedule");
  require(schedule == "epoch" || schedule == "batch", ErrorCategory::config,
          key_error("fairbatch_schedule", schedule, "epoch or batch"));
  c.fairbatch_schedule =
      schedule == "batch" ? FairBatchSchedule::per_batch : FairBatchSchedule::per_epoch;
  c.lr = parse_double("lr", cfg.get_or_default("lr"));
  const auto positive = [&](std::string_view key) {
    const auto v = parse_integer(key, cfg.get_or_default(key));
    require(v >= 1, ErrorCategory::config, "key '" + std::string(key) + "' must be at least 1");
    return v;
  };
  c.batch_size = static_cast<std::size_t>(positive("batch_size"));
  c.max_epochs = static_cast<int>(positive("max_epochs"));
  c.patience = static_cast<int>(positive("patience"));
  c.hidden = static_cast<std::size_t>(positive("hidden"));
  if (auto v = cfg.get("seed")) {
    const auto s = parse_integer("seed", *v);
    require(s >= 0, ErrorCategory::config, "seed must be non-negative");
    c.seed = static_cast<std::uint64_t>(s);
  }
  const auto act = cfg.get_or_default("activation");
  require(act == "tanh" || act == "relu", ErrorCategory::config,
          key_error("activation", act, "tanh or relu"));
  c.activation = act == "relu" ? Activation::relu : Activation::tanh;
  c.selection_slack = parse_double("selection_slack", cfg.get_or_default("selection_slack"));
  c.validate();
  return c;
}

SynthSpec synth_spec_from(const KeyValueConfig& cfg) {
  const auto preset = cfg.get_or_default("synth_preset");
  std::uint64_t seed = 0;
  if (auto v = cfg.get("synth_seed")) {
    seed = static_cast<std::uint64_t>(parse_integer("synth_seed", *v));
  } else if (auto s = cfg.get("seed")) {
    seed = static_cast<std::uint64_t>(parse_integer("seed", *s));
  }

  SynthSpec spec;
  if (preset == "moji") {
    spec = moji_like_spec(20000, seed);
  } else if (preset == "bios") {
    spec = bios_like_spec(40000, seed);
  } else if (preset == "custom") {
    spec.seed = seed;
    spec.n = 10000;
  } else {
    fail(ErrorCategory::config, key_error("synth_preset", preset, "moji, bios or custom"));
  }

  if (auto v = cfg.get("synth_n")) spec.n = static_cast<std::size_t>(parse_integer("synth_n", *v));
  if (auto v = cfg.get("synth_classes"))
    spec.num_classes = static_cast<int>(parse_integer("synth_classes", *v));
  if (auto v = cfg.get("synth_joint")) {
    spec.joint.clear();
    for (auto row : split(*v, ';')) {
      const auto p = parse_double_list("synth_joint", row);
      require(p.size() == 2, ErrorCategory::config,
              key_error("synth_joint", row, "two probabilities per class"));
      spec.joint.push_back({p[0], p[1]});
    }
  }
  if (auto v = cfg.get("synth_separation")) spec.class_separation = parse_double("synth_separation", *v);
  if (auto v = cfg.get("synth_leak")) spec.attribute_leak = parse_double("synth_leak", *v);
  if (auto v = cfg.get("synth_noise")) spec.noise_std = parse_double("synth_noise", *v);
  if (auto v = cfg.get("synth_dim")) spec.dim = static_cast<std::size_t>(parse_integer("synth_dim", *v));
  if (preset == "custom" && spec.joint.empty() && spec.num_classes > 0) {
    const double cell = 1.0 / (2.0 * spec.num_classes);
    spec.joint.assign(static_cast<std::size_t>(spec.num_classes), {cell, cell});
  }
  spec.validate();
  return spec;
}

SweepSettings sweep_settings_from(const KeyValueConfig& cfg) {
  SweepSettings s;
  s.param = parse_sweep_param(cfg.get_or_default("sweep_param"));
  const auto values = cfg.get("sweep_values");
  require(values.has_value(), ErrorCategory::config, "sweep needs 'sweep_values'");
  s.values = parse_double_list("sweep_values", *values);
  s.repeats = static_cast<int>(parse_integer("repeats", cfg.get_or_default("repeats")));
  require(s.repeats >= 1, ErrorCategory::config, "repeats must be at least 1");
  return s;
}

std::vector<double> size_fractions_from(const KeyValueConfig& cfg) {
  return parse_double_list("size_fractions", cfg.get_or_default("size_fractions"));
}

Split load_data(const KeyValueConfig& cfg) {
  const std::uint64_t seed =
      cfg.get("seed") ? static_cast<std::uint64_t>(parse_integer("seed", *cfg.get("seed"))) : 0;
  const auto fractions = parse_double_list("split", cfg.get_or_default("split"));
  require(fractions.size() == 3, ErrorCategory::config, "split needs three fractions");
  const std::array<double, 3> parts = {fractions[0], fractions[1], fractions[2]};

  if (auto train_path = cfg.get("train_csv")) {
    CsvSchema schema{cfg.get_or_default("label_column"), cfg.get_or_default("attribute_column"), {}};
    Dataset train = load_csv(*train_path, schema);
    const auto dev_path = cfg.get("dev_csv"), test_path = cfg.get("test_csv");
    if (!dev_path && !test_path) return stratified_split(train, parts, seed);
    require(dev_path && test_path, ErrorCategory::config,
            "dev_csv and test_csv must be given together");
    Dataset dev = load_csv(*dev_path, schema), test = load_csv(*test_path, schema);
    const int classes = std::max({train.num_classes, dev.num_classes, test.num_classes});
    train.num_classes = dev.num_classes = test.num_classes = classes;
    return {std::move(train), std::move(dev), std::move(test)};
  }

  const SynthSpec spec = synth_spec_from(cfg);
  const auto eval = cfg.get_or_default("eval");
  if (eval == "split") return stratified_split(generate_synthetic(spec), parts, spec.seed);
  require(eval == "balanced", ErrorCategory::config, key_error("eval", eval, "balanced or split"));
  const auto eval_n = static_cast<std::size_t>(parse_integer("eval_n", cfg.get_or_default("eval_n")));
  return {generate_synthetic(spec), generate_synthetic(balanced_variant(spec, eval_n, spec.seed + 1)),
          generate_synthetic(balanced_variant(spec, eval_n, spec.seed + 2))};
}

}  // namespace eofair
