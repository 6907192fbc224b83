#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "saber/config.hpp"
#include "saber/pipeline.hpp"

namespace saber {

struct TTestRow {
  std::string strategy_a;
  std::string strategy_b;
  std::size_t n = 0;
  std::optional<PairedTTestResult> result;
  std::string note;  // why the test could not be run
};

/// Pairs the per-(window, symbol) value of `metric` between every two
/// strategies, over cells where both ran and the metric is defined.
std::vector<TTestRow> ttest_matrix(const ExperimentResult& result, const std::string& metric);

struct RunOutcome {
  ExperimentResult result;
  std::filesystem::path output_dir;
  std::size_t records = 0;
};

/// Loads data, runs the configured experiment and writes every artifact.
/// `jobs` overrides the configured worker count.
RunOutcome run_experiment(const ExperimentConfig& config, std::optional<unsigned> jobs, std::ostream& log);

/// Writes artifacts for an existing result into config.output_dir.
void write_artifacts(const ExperimentConfig& config, const ExperimentResult& result,
                     const std::vector<SessionLog::Entry>& sessions);

enum class ReportFormat { Json, Csv, Markdown };

std::optional<ReportFormat> parse_report_format(std::string_view s);

/// Strategy × {SPR, STR, AR, CR, MDD, AV} table from a run directory.
/// Throws MissingArtifacts.
std::string render_report(const std::filesystem::path& dir, ReportFormat format);

struct DataReport {
  std::vector<std::string> errors;
  std::vector<std::string> warnings;
};

/// Schema checks on every input file plus bias warnings.
DataReport validate_data(const ExperimentConfig& config);

}  // namespace saber
