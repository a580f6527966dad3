#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

#include "eofair/harness.hpp"

namespace eofair {

enum class ReportFormat { csv, json, svg };

ReportFormat parse_report_format(std::string_view name);

void to_json(nlohmann::json& j, const TrainConfig& c);
void from_json(const nlohmann::json& j, TrainConfig& c);
void to_json(nlohmann::json& j, const EpochRecord& r);
void from_json(const nlohmann::json& j, EpochRecord& r);
void to_json(nlohmann::json& j, const RunResult& r);
void from_json(const nlohmann::json& j, RunResult& r);

/// CSV rows sorted by (label, lambda, alpha, seed); metrics scaled by 100.
std::string results_csv(std::span<const RunResult> results);
/// {"runs": [...]} with metrics in [0, 1].
std::string results_json(std::span<const RunResult> results);
/// Test F1-micro vs GAP scatter, one series per run label, Pareto points ringed.
std::string results_svg(std::span<const RunResult> results);

void emit_report(std::span<const RunResult> results, const std::filesystem::path& path,
                 ReportFormat format);

std::vector<RunResult> load_results_json(const std::filesystem::path& path);

}  // namespace eofair
