#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "saber/analytics.hpp"
#include "saber/engine.hpp"
#include "saber/market_data.hpp"
#include "saber/selection.hpp"
#include "saber/statistics.hpp"
#include "saber/timing.hpp"
#include "saber/window.hpp"

namespace saber {

struct WindowSpec {
  Date eval_start;
  Date eval_end;  // exclusive bound on the trading span
  int window_len_years = 1;
  int step_years = 1;
  int train_lookback_years = 2;

  void validate() const;
};

/// Windows start at eval_start and advance by step_years. A window is kept
/// only if trade_start + window_len_years ≤ eval_end; trade_end is the day
/// before that. Throws EmptyRange.
std::vector<Window> generate_windows(const WindowSpec& spec);

struct NamedStrategy {
  std::string name;
  StrategyFactory factory;
};

struct CellResult {
  BacktestRecord record;
  MetricsReport metrics;
  DrawdownDiagnostics diagnostics;
  std::optional<CapmFit> capm;  // against the benchmark, when one is loaded
};

struct SkipEntry {
  Window window;
  std::string symbol;
  std::string strategy;  // empty when the whole symbol or window was skipped
  std::string reason;

  friend bool operator==(const SkipEntry&, const SkipEntry&) = default;
};

struct WindowResult {
  Window window;
  std::map<std::string, CellResult> per_symbol;
  /// Mean over symbols that ran; absent when none did.
  std::optional<MetricsReport> averaged;
  std::optional<SelectionResult> selection;
  std::optional<RegimeLabel> regime;
};

struct StrategyRun {
  std::string strategy;
  std::vector<WindowResult> windows;
};

struct ExperimentResult {
  std::vector<Window> windows;
  std::vector<StrategyRun> runs;  // same order as the strategy list
  std::vector<SelectionResult> selections;
  std::set<std::string> distinct_symbols;
  std::vector<SkipEntry> skipped;
};

struct RunOptions {
  ExecutionConfig execution;
  std::optional<std::string> benchmark;
  /// Worker threads; 0 means hardware concurrency.
  unsigned jobs = 0;
};

/// Trading days shared by the experiment: the benchmark's bar dates when one
/// is configured, otherwise the union of every loaded symbol's dates.
std::vector<Date> experiment_calendar(const MarketData& data, const std::optional<std::string>& benchmark);

/// Fixed symbol list on every window.
ExperimentResult run_selected(const MarketData& data, const std::vector<std::string>& symbols,
                              const WindowSpec& spec, const std::vector<NamedStrategy>& strategies,
                              const RunOptions& options);

/// Point-in-time constituents → selection → per-symbol timing, per window.
ExperimentResult run_composite(const MarketData& data, const SelectionSpec& selection,
                               const std::vector<NamedStrategy>& strategies, const WindowSpec& spec,
                               const RunOptions& options);

struct Summary {
  MetricsReport overall;
  std::size_t windows = 0;
  std::map<Regime, MetricsReport> per_regime;
  std::map<Regime, std::size_t> regime_windows;
  double mean_max_drawdown_days = 0.0;
  double mean_drawdown_days = 0.0;
  double mean_commission_ratio = 0.0;
};

/// Mean of per-window averaged reports, plus per-regime means when windows
/// carry regime labels. Windows where nothing ran are ignored. Throws EmptyResults.
Summary aggregate(std::span<const WindowResult> results);

}  // namespace saber
