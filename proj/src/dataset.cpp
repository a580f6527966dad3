#include "eofair/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <numeric>
#include <random>
#include <sstream>

#include "eofair/error.hpp"

namespace eofair {

namespace {

std::string group_name(int y, int a) {
  return "(y=" + std::to_string(y) + ", a=" + std::to_string(a) + ")";
}

// Example indices per (label, attribute) cell, flattened as 2*y + a.
std::vector<std::vector<std::size_t>> cell_indices(const Dataset& ds) {
  std::vector<std::vector<std::size_t>> cells(2 * static_cast<std::size_t>(ds.num_classes));
  for (std::size_t i = 0; i < ds.size(); ++i)
    cells[2 * static_cast<std::size_t>(ds.labels[i]) + static_cast<std::size_t>(ds.attributes[i])]
        .push_back(i);
  return cells;
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r'))
    s.remove_suffix(1);
  return s;
}

std::vector<std::string_view> split_fields(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  for (;;) {
    const auto comma = line.find(',', start);
    out.push_back(trim(line.substr(start, comma - start)));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

template <typename T>
bool parse_number(std::string_view text, T& out) {
  if (text.empty()) return false;
  if (text.front() == '+') text.remove_prefix(1);
  const auto* end = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(text.data(), end, out);
  return ec == std::errc() && ptr == end;
}

}  // namespace

void Dataset::validate() const {
  require(num_classes >= 1, ErrorCategory::validation, "dataset needs at least one class");
  require(attributes.size() == labels.size() && features.rows() == labels.size(),
          ErrorCategory::validation, "labels, attributes and feature rows differ in length");
  for (std::size_t i = 0; i < labels.size(); ++i) {
    require(labels[i] >= 0 && labels[i] < num_classes, ErrorCategory::validation,
            "label out of range at example " + std::to_string(i));
    require(attributes[i] == 0 || attributes[i] == 1, ErrorCategory::validation,
            "attribute not in {0,1} at example " + std::to_string(i));
  }
}

Dataset Dataset::subset(std::span<const std::size_t> indices) const {
  Dataset out;
  out.num_classes = num_classes;
  out.features = features.gather_rows(indices);
  out.labels.reserve(indices.size());
  out.attributes.reserve(indices.size());
  for (auto i : indices) {
    out.labels.push_back(labels[i]);
    out.attributes.push_back(attributes[i]);
  }
  return out;
}

// ---------------------------------------------------------------------------
// synthetic data

void SynthSpec::validate() const {
  require(n > 0, ErrorCategory::validation, "synthetic spec: n must be positive");
  require(num_classes >= 2, ErrorCategory::validation, "synthetic spec: need at least 2 classes");
  require(joint.size() == static_cast<std::size_t>(num_classes), ErrorCategory::validation,
          "synthetic spec: joint must have one row per class");
  double total = 0.0;
  for (const auto& row : joint) {
    for (double p : row) {
      require(std::isfinite(p) && p >= 0.0, ErrorCategory::validation,
              "synthetic spec: joint entries must be non-negative");
      total += p;
    }
  }
  require(std::abs(total - 1.0) <= 1e-9, ErrorCategory::validation,
          "synthetic spec: joint must sum to 1 (got " + std::to_string(total) + ")");
  require(std::isfinite(noise_std) && noise_std > 0.0, ErrorCategory::validation,
          "synthetic spec: noise_std must be positive");
  require(std::isfinite(class_separation) && std::isfinite(attribute_leak),
          ErrorCategory::validation, "synthetic spec: non-finite separation or leak");
  require(dim >= 2, ErrorCategory::validation, "synthetic spec: dim must be at least 2");
  require(num_classes == 2 || dim >= static_cast<std::size_t>(num_classes) + 1,
          ErrorCategory::validation,
          "synthetic spec: dim must be at least num_classes + 1 for more than two classes");
}

SynthSpec moji_like_spec(std::size_t n, std::uint64_t seed) {
  SynthSpec s;
  s.n = n;
  s.num_classes = 2;
  s.joint = {{{0.10, 0.40}}, {{0.40, 0.10}}};
  s.class_separation = 2.0;
  s.attribute_leak = 3.0;
  s.noise_std = 1.0;
  s.dim = 8;
  s.seed = seed;
  return s;
}

SynthSpec bios_like_spec(std::size_t n, std::uint64_t seed) {
  constexpr int kClasses = 28;
  SynthSpec s;
  s.n = n;
  s.num_classes = kClasses;
  s.class_separation = 3.0;
  s.attribute_leak = 2.0;
  s.noise_std = 1.0;
  s.dim = 32;
  s.seed = seed;

  std::mt19937_64 rng(seed ^ 0x5851f42d4c957f2dULL);
  std::uniform_real_distribution<double> skew(0.1, 0.9);
  std::vector<double> freq(kClasses);
  for (int y = 0; y < kClasses; ++y) freq[y] = 1.0 / (y + 1.0);
  const double z = std::accumulate(freq.begin(), freq.end(), 0.0);
  s.joint.resize(kClasses);
  for (int y = 0; y < kClasses; ++y) {
    const double p = freq[y] / z;
    const double female = skew(rng);
    s.joint[y] = {p * (1.0 - female), p * female};
  }
  return s;
}

SynthSpec balanced_variant(const SynthSpec& spec, std::size_t n, std::uint64_t seed) {
  SynthSpec s = spec;
  s.n = n;
  s.seed = seed;
  const double cell = 1.0 / (2.0 * spec.num_classes);
  s.joint.assign(static_cast<std::size_t>(spec.num_classes), {cell, cell});
  return s;
}

Dataset generate_synthetic(const SynthSpec& spec) {
  spec.validate();
  std::mt19937_64 rng(spec.seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::normal_distribution<double> noise(0.0, spec.noise_std);

  // Cumulative distribution over cells 2*y + a.
  const std::size_t cells = 2 * static_cast<std::size_t>(spec.num_classes);
  std::vector<double> cdf(cells);
  double acc = 0.0;
  for (std::size_t c = 0; c < cells; ++c) {
    acc += spec.joint[c / 2][c % 2];
    cdf[c] = acc;
  }
  std::size_t last_positive = 0;
  for (std::size_t c = 0; c < cells; ++c)
    if (spec.joint[c / 2][c % 2] > 0.0) last_positive = c;

  Dataset ds;
  ds.num_classes = spec.num_classes;
  ds.labels.resize(spec.n);
  ds.attributes.resize(spec.n);
  for (std::size_t i = 0; i < spec.n; ++i) {
    const double u = unit(rng);
    std::size_t c = last_positive;
    for (std::size_t k = 0; k < cells; ++k) {
      if (u < cdf[k] && spec.joint[k / 2][k % 2] > 0.0) {
        c = k;
        break;
      }
    }
    ds.labels[i] = static_cast<int>(c / 2);
    ds.attributes[i] = static_cast<int>(c % 2);
  }

  const std::size_t leak_axis = spec.dim - 1;
  const double spread = spec.class_separation / std::sqrt(2.0);
  ds.features.resize(spec.n, spec.dim);
  for (std::size_t i = 0; i < spec.n; ++i) {
    auto x = ds.features.row(i);
    for (auto& v : x) v = noise(rng);
    const int y = ds.labels[i];
    if (spec.num_classes == 2) {
      x[0] += (y - 0.5) * spec.class_separation;
    } else {
      x[static_cast<std::size_t>(y)] += spread;
    }
    x[leak_axis] += spec.attribute_leak * (ds.attributes[i] - 0.5);
  }
  return ds;
}

// ---------------------------------------------------------------------------
// CSV

Dataset load_csv(const std::filesystem::path& path, const CsvSchema& schema) {
  std::ifstream in(path);
  require(in.good(), ErrorCategory::io, "cannot open " + path.string());

  const std::string where = path.string() + ":";
  std::string line;
  require(static_cast<bool>(std::getline(in, line)), ErrorCategory::parse,
          where + "1: missing header");
  const auto header = split_fields(line);
  std::optional<std::size_t> label_col, attr_col;
  std::vector<std::size_t> feature_cols;
  for (std::size_t c = 0; c < header.size(); ++c) {
    if (header[c] == schema.label_column) {
      label_col = c;
    } else if (header[c] == schema.attribute_column) {
      attr_col = c;
    } else {
      feature_cols.push_back(c);
    }
  }
  require(label_col.has_value(), ErrorCategory::parse,
          where + "1: header has no label column '" + schema.label_column + "'");
  require(attr_col.has_value(), ErrorCategory::parse,
          where + "1: header has no attribute column '" + schema.attribute_column + "'");
  require(!feature_cols.empty(), ErrorCategory::parse, where + "1: header has no feature columns");

  std::vector<double> values;
  Dataset ds;
  std::size_t line_no = 1;
  int max_label = -1;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    const std::string at = where + std::to_string(line_no) + ": ";
    const auto fields = split_fields(line);
    require(fields.size() == header.size(), ErrorCategory::parse,
            at + "expected " + std::to_string(header.size()) + " fields, got " +
                std::to_string(fields.size()));
    int y = 0, a = 0;
    require(parse_number(fields[*label_col], y), ErrorCategory::parse,
            at + "label '" + std::string(fields[*label_col]) + "' is not an integer");
    require(y >= 0, ErrorCategory::parse, at + "label " + std::to_string(y) + " is negative");
    require(!schema.num_classes || y < *schema.num_classes, ErrorCategory::parse,
            at + "label " + std::to_string(y) + " out of range");
    require(parse_number(fields[*attr_col], a), ErrorCategory::parse,
            at + "attribute '" + std::string(fields[*attr_col]) + "' is not an integer");
    require(a == 0 || a == 1, ErrorCategory::parse,
            at + "attribute " + std::to_string(a) + " not in {0,1}");
    for (auto c : feature_cols) {
      double v = 0.0;
      require(parse_number(fields[c], v) && std::isfinite(v), ErrorCategory::parse,
              at + "non-numeric value '" + std::string(fields[c]) + "' in column " +
                  std::string(header[c]));
      values.push_back(v);
    }
    ds.labels.push_back(y);
    ds.attributes.push_back(a);
    max_label = std::max(max_label, y);
  }
  require(!ds.labels.empty(), ErrorCategory::parse, where + " no examples");

  ds.num_classes = schema.num_classes.value_or(max_label + 1);
  ds.features.resize(ds.labels.size(), feature_cols.size());
  std::copy(values.begin(), values.end(), ds.features.values().begin());
  return ds;
}

void save_csv(const Dataset& ds, const std::filesystem::path& path) {
  std::ofstream out(path);
  require(out.good(), ErrorCategory::io, "cannot write " + path.string());
  out << "y,a";
  for (std::size_t j = 0; j < ds.dim(); ++j) out << ",f" << j;
  out << '\n';
  char buf[64];
  for (std::size_t i = 0; i < ds.size(); ++i) {
    out << ds.labels[i] << ',' << ds.attributes[i];
    for (double v : ds.features.row(i)) {
      auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
      out << ',' << std::string_view(buf, static_cast<std::size_t>(end - buf));
    }
    out << '\n';
  }
  require(out.good(), ErrorCategory::io, "write failed for " + path.string());
}

// ---------------------------------------------------------------------------
// group statistics and pre-processing baselines

GroupCounts group_counts(const Dataset& ds) {
  GroupCounts g;
  g.counts.assign(static_cast<std::size_t>(ds.num_classes), {0, 0});
  for (std::size_t i = 0; i < ds.size(); ++i)
    ++g.counts[static_cast<std::size_t>(ds.labels[i])][ds.attributes[i]];
  g.total = ds.size();
  return g;
}

Dataset downsample_balanced(const Dataset& ds, std::uint64_t seed) {
  auto cells = cell_indices(ds);
  std::mt19937_64 rng(seed);
  std::vector<std::size_t> keep;
  for (int y = 0; y < ds.num_classes; ++y) {
    auto& g0 = cells[2 * static_cast<std::size_t>(y)];
    auto& g1 = cells[2 * static_cast<std::size_t>(y) + 1];
    if (g0.empty() && g1.empty()) continue;
    require(!g0.empty() && !g1.empty(), ErrorCategory::validation,
            "cannot balance class " + std::to_string(y) + ": group " +
                group_name(y, g0.empty() ? 0 : 1) + " is empty");
    const std::size_t k = std::min(g0.size(), g1.size());
    for (auto* g : {&g0, &g1}) {
      std::shuffle(g->begin(), g->end(), rng);
      keep.insert(keep.end(), g->begin(), g->begin() + static_cast<std::ptrdiff_t>(k));
    }
  }
  std::sort(keep.begin(), keep.end());
  return ds.subset(keep);
}

std::vector<double> rw_weights(const Dataset& ds) {
  const auto g = group_counts(ds);
  const double norm = 2.0 * ds.num_classes;
  std::vector<double> w(ds.size());
  for (std::size_t i = 0; i < ds.size(); ++i) {
    const double m = static_cast<double>(g.at(ds.labels[i], ds.attributes[i]));
    w[i] = static_cast<double>(g.total) / (norm * m);
  }
  return w;
}

std::vector<std::vector<std::size_t>> stratified_partition(const Dataset& ds,
                                                           std::span<const double> fractions,
                                                           std::uint64_t seed) {
  require(!fractions.empty(), ErrorCategory::validation, "split: no fractions given");
  double sum = 0.0;
  for (double f : fractions) {
    require(std::isfinite(f) && f > 0.0, ErrorCategory::validation,
            "split: fractions must be positive");
    sum += f;
  }
  require(std::abs(sum - 1.0) <= 1e-9, ErrorCategory::validation,
          "split: fractions must sum to 1 (got " + std::to_string(sum) + ")");

  const std::size_t k = fractions.size();
  std::vector<std::vector<std::size_t>> parts(k);
  auto cells = cell_indices(ds);
  std::mt19937_64 rng(seed);
  for (std::size_t c = 0; c < cells.size(); ++c) {
    auto& idx = cells[c];
    const std::size_t m = idx.size();
    if (m == 0) continue;
    require(m >= k, ErrorCategory::validation,
            "split: group " + group_name(static_cast<int>(c / 2), static_cast<int>(c % 2)) +
                " has " + std::to_string(m) + " examples, fewer than " + std::to_string(k) +
                " splits");
    std::shuffle(idx.begin(), idx.end(), rng);

    std::vector<std::size_t> sizes(k);
    std::vector<double> remainder(k);
    std::size_t assigned = 0;
    for (std::size_t j = 0; j < k; ++j) {
      const double exact = static_cast<double>(m) * fractions[j];
      sizes[j] = static_cast<std::size_t>(std::floor(exact));
      remainder[j] = exact - static_cast<double>(sizes[j]);
      assigned += sizes[j];
    }
    std::vector<std::size_t> order(k);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return remainder[a] > remainder[b]; });
    for (std::size_t r = 0; assigned < m; ++r, ++assigned) ++sizes[order[r % k]];

    std::size_t offset = 0;
    for (std::size_t j = 0; j < k; ++j) {
      parts[j].insert(parts[j].end(), idx.begin() + static_cast<std::ptrdiff_t>(offset),
                      idx.begin() + static_cast<std::ptrdiff_t>(offset + sizes[j]));
      offset += sizes[j];
    }
  }
  for (auto& p : parts) std::sort(p.begin(), p.end());
  return parts;
}

Split stratified_split(const Dataset& ds, std::array<double, 3> fractions, std::uint64_t seed) {
  const auto parts = stratified_partition(ds, fractions, seed);
  return {ds.subset(parts[0]), ds.subset(parts[1]), ds.subset(parts[2])};
}

}  // namespace eofair
