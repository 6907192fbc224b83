#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "saber/adapter.hpp"
#include "saber/engine.hpp"
#include "saber/pipeline.hpp"
#include "saber/selection.hpp"
#include "saber/timing.hpp"

namespace saber {

enum class Mode { Selected, Composite };

std::string_view to_string(Mode m);

struct StrategyEntry {
  std::string name;  // label used in artifacts
  std::string kind;  // built-in strategy name, or "adapter"
  StrategyParams params;
  std::optional<AdapterConfig> adapter;
};

struct ExperimentConfig {
  Mode mode = Mode::Selected;
  std::uint64_t seed = 0;
  std::filesystem::path output_dir = "saber-out";

  std::filesystem::path prices_dir;
  std::optional<std::filesystem::path> membership;
  std::optional<std::filesystem::path> texts;
  std::optional<std::string> benchmark;

  WindowSpec windows;
  ExecutionConfig execution;
  std::vector<std::string> symbols;  // selected mode
  SelectionSpec selection;           // composite mode
  std::vector<StrategyEntry> strategies;

  /// Per-cell metric paired across strategies in the significance tests.
  std::string ttest_metric = "cumulative_return";
  unsigned jobs = 0;
};

/// Metric names accepted by ttest_metric.
const std::vector<std::string>& pairable_metrics();

/// Parses TOML text. Relative paths resolve against `base_dir`. A non-null
/// `seed_override` replaces the configured seed. Throws ConfigError naming
/// the offending field.
ExperimentConfig parse_config(std::string_view text, const std::filesystem::path& base_dir,
                              const char* seed_override = nullptr);

/// Reads the file and applies the SABER_SEED environment override.
ExperimentConfig load_config(const std::filesystem::path& path);

/// Factories for the configured strategies, in config order.
std::vector<NamedStrategy> make_strategies(const ExperimentConfig& config,
                                           std::shared_ptr<SessionLog> log = nullptr);

}  // namespace saber
