#include "saber/pipeline.hpp"

#include <algorithm>
#include <atomic>
#include <exception>
#include <functional>
#include <thread>

#include "saber/error.hpp"

namespace saber {

void WindowSpec::validate() const {
  auto fail = [](const std::string& why) { throw Error(ErrorKind::InvalidParameter, why); };
  if (window_len_years < 1 || step_years < 1 || train_lookback_years < 1) {
    fail("window year counts must be >= 1");
  }
  if (!(eval_start < eval_end)) throw Error(ErrorKind::EmptyRange, "eval_start must precede eval_end");
}

std::vector<Window> generate_windows(const WindowSpec& spec) {
  spec.validate();
  std::vector<Window> out;
  for (int offset = 0;; offset += spec.step_years) {
    const Date start = spec.eval_start.plus_years(offset);
    const Date stop = start.plus_years(spec.window_len_years);
    if (spec.eval_end < stop) break;
    out.push_back(Window{start.plus_years(-spec.train_lookback_years), start, stop.plus_days(-1)});
  }
  if (out.empty()) {
    throw Error(ErrorKind::EmptyRange, "no full " + std::to_string(spec.window_len_years) +
                                           "-year window fits in " + spec.eval_start.iso() + ".." +
                                           spec.eval_end.iso());
  }
  return out;
}

std::vector<Date> experiment_calendar(const MarketData& data, const std::optional<std::string>& benchmark) {
  if (benchmark && data.has_symbol(*benchmark)) return data.series(*benchmark).dates();
  std::vector<Date> all;
  for (const auto& sym : data.symbols()) {
    auto d = data.series(sym).dates();
    all.insert(all.end(), d.begin(), d.end());
  }
  std::sort(all.begin(), all.end());
  all.erase(std::unique(all.begin(), all.end()), all.end());
  return all;
}

namespace {

void parallel_for(std::size_t n, unsigned jobs, const std::function<void(std::size_t)>& fn) {
  if (jobs == 0) jobs = std::max(1u, std::thread::hardware_concurrency());
  jobs = static_cast<unsigned>(std::min<std::size_t>(jobs, n));
  if (jobs <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::jthread> workers;
  workers.reserve(jobs);
  for (unsigned w = 0; w < jobs; ++w) {
    workers.emplace_back([&] {
      for (std::size_t i = next++; i < n; i = next++) fn(i);
    });
  }
}

std::optional<Date> first_trading_day(const std::vector<Date>& calendar, const Window& w) {
  auto it = std::lower_bound(calendar.begin(), calendar.end(), w.trade_start);
  if (it == calendar.end() || w.trade_end < *it) return std::nullopt;
  return *it;
}

// Market returns aligned to the record's dates; nullopt when the benchmark
// is missing any of them.
std::optional<std::vector<double>> benchmark_returns(const PriceSeries& bench, const BacktestRecord& rec) {
  std::vector<double> out;
  out.reserve(rec.dates.size());
  for (const Date d : rec.dates) {
    auto idx = bench.index_of(d);
    if (!idx || *idx == 0) return std::nullopt;
    out.push_back(bench[*idx].adj_close / bench[*idx - 1].adj_close - 1.0);
  }
  return out;
}

struct Cell {
  std::size_t window;
  std::string symbol;
  std::size_t strategy;
};

struct CellOutcome {
  std::optional<CellResult> result;
  std::string error;
};

CellOutcome run_cell(const MarketData& data, const Window& window, const std::string& symbol,
                     const NamedStrategy& named, const RunOptions& options) {
  CellOutcome out;
  try {
    auto strategy = named.factory();
    CellResult cell;
    cell.record = run_backtest(data, symbol, window, *strategy, options.execution);
    cell.record.strategy = named.name;
    const auto path = cell.record.value_path();
    cell.metrics = compute_metrics(path, options.execution.risk_free_rate);
    cell.diagnostics = drawdown_diagnostics(path, cell.record.total_commission, cell.record.initial_capital);
    if (options.benchmark && data.has_symbol(*options.benchmark)) {
      auto market = benchmark_returns(data.series(*options.benchmark), cell.record);
      if (market && market->size() >= 3) {
        try {
          cell.capm = capm_fit(cell.record.daily_returns, *market, options.execution.risk_free_rate);
        } catch (const Error&) {
          // Degenerate regressor: leave the CAPM fit empty for this cell.
        }
      }
    }
    out.result = std::move(cell);
  } catch (const std::exception& e) {
    out.error = e.what();
  }
  return out;
}

struct Plan {
  std::vector<Window> windows;
  std::vector<std::vector<std::string>> symbols;  // per window, symbols to trade
  std::vector<std::optional<SelectionResult>> selections;
  std::vector<SkipEntry> skipped;
};

ExperimentResult execute(const MarketData& data, Plan plan, const std::vector<NamedStrategy>& strategies,
                         const RunOptions& options) {
  options.execution.validate();
  std::vector<Cell> cells;
  for (std::size_t w = 0; w < plan.windows.size(); ++w) {
    for (const auto& sym : plan.symbols[w]) {
      for (std::size_t s = 0; s < strategies.size(); ++s) cells.push_back(Cell{w, sym, s});
    }
  }
  std::vector<CellOutcome> outcomes(cells.size());
  parallel_for(cells.size(), options.jobs, [&](std::size_t i) {
    const auto& c = cells[i];
    outcomes[i] = run_cell(data, plan.windows[c.window], c.symbol, strategies[c.strategy], options);
  });

  std::optional<PriceSeries> bench;
  if (options.benchmark && data.has_symbol(*options.benchmark)) bench = data.series(*options.benchmark);

  ExperimentResult result;
  result.windows = plan.windows;
  result.skipped = std::move(plan.skipped);
  for (const auto& s : plan.selections) {
    if (s) result.selections.push_back(*s);
  }
  for (const auto& syms : plan.symbols) result.distinct_symbols.insert(syms.begin(), syms.end());

  for (const auto& named : strategies) {
    StrategyRun run;
    run.strategy = named.name;
    for (std::size_t w = 0; w < plan.windows.size(); ++w) {
      WindowResult wr;
      wr.window = plan.windows[w];
      wr.selection = plan.selections[w];
      if (bench) {
        try {
          wr.regime = label_regime(*bench, wr.window.trade_end.year());
        } catch (const Error&) {
        }
      }
      run.windows.push_back(std::move(wr));
    }
    result.runs.push_back(std::move(run));
  }
  for (std::size_t i = 0; i < cells.size(); ++i) {
    const auto& c = cells[i];
    auto& wr = result.runs[c.strategy].windows[c.window];
    if (outcomes[i].result) {
      wr.per_symbol.emplace(c.symbol, std::move(*outcomes[i].result));
    } else {
      result.skipped.push_back(SkipEntry{plan.windows[c.window], c.symbol, strategies[c.strategy].name,
                                         outcomes[i].error});
    }
  }
  for (auto& run : result.runs) {
    for (auto& wr : run.windows) {
      if (wr.per_symbol.empty()) continue;
      std::vector<MetricsReport> reports;
      for (const auto& [_, cell] : wr.per_symbol) reports.push_back(cell.metrics);
      wr.averaged = average_metrics(reports);
    }
  }
  return result;
}

// Drops symbols without data or listed after the window's first trading day.
std::vector<std::string> tradable(const MarketData& data, const std::vector<Date>& calendar, const Window& w,
                                  const std::vector<std::string>& symbols, std::vector<SkipEntry>& skipped) {
  std::vector<std::string> out;
  const auto first_day = first_trading_day(calendar, w);
  for (const auto& sym : symbols) {
    std::string reason;
    if (!data.has_symbol(sym)) {
      reason = "no price data";
    } else if (!first_day) {
      reason = "no trading days in window";
    } else {
      const auto& series = data.series(sym);
      if (series.empty() || *first_day < series[0].date) {
        reason = "listed after window start";
      } else if (series.first_on_or_after(w.trade_start) >= series.count_through(w.trade_end)) {
        reason = "no bars in window";
      }
    }
    if (reason.empty()) {
      out.push_back(sym);
    } else {
      skipped.push_back(SkipEntry{w, sym, "", reason});
    }
  }
  return out;
}

}  // namespace

ExperimentResult run_selected(const MarketData& data, const std::vector<std::string>& symbols,
                              const WindowSpec& spec, const std::vector<NamedStrategy>& strategies,
                              const RunOptions& options) {
  Plan plan;
  plan.windows = generate_windows(spec);
  const auto calendar = experiment_calendar(data, options.benchmark);
  for (const auto& w : plan.windows) {
    plan.symbols.push_back(tradable(data, calendar, w, symbols, plan.skipped));
    plan.selections.emplace_back();
  }
  return execute(data, std::move(plan), strategies, options);
}

ExperimentResult run_composite(const MarketData& data, const SelectionSpec& selection,
                               const std::vector<NamedStrategy>& strategies, const WindowSpec& spec,
                               const RunOptions& options) {
  selection.validate();
  Plan plan;
  plan.windows = generate_windows(spec);
  const auto calendar = experiment_calendar(data, options.benchmark);
  plan.symbols.resize(plan.windows.size());
  plan.selections.resize(plan.windows.size());
  std::vector<std::vector<SkipEntry>> skips(plan.windows.size());

  parallel_for(plan.windows.size(), options.jobs, [&](std::size_t i) {
    const Window& w = plan.windows[i];
    const Date as_of = first_trading_day(calendar, w).value_or(w.trade_start);
    std::vector<std::string> candidates;
    for (auto& sym : data.universe().constituents_at(as_of)) {
      if (data.has_symbol(sym)) {
        candidates.push_back(std::move(sym));
      } else {
        skips[i].push_back(SkipEntry{w, sym, "", "constituent without price data"});
      }
    }
    const Date cutoff = w.trade_start.plus_days(-1);
    ViewFactory views = [&data, cutoff](const std::string& sym) { return data.view_until(sym, cutoff); };
    try {
      if (candidates.empty()) throw Error(ErrorKind::NoEligibleCandidates, "no constituents with data");
      auto result = select_symbols(selection, candidates, views, as_of);
      plan.symbols[i] = tradable(data, calendar, w, result.symbols, skips[i]);
      plan.selections[i] = std::move(result);
    } catch (const Error& e) {
      skips[i].push_back(SkipEntry{w, "", "", e.what()});
    }
  });
  for (auto& s : skips) plan.skipped.insert(plan.skipped.end(), s.begin(), s.end());
  return execute(data, std::move(plan), strategies, options);
}

Summary aggregate(std::span<const WindowResult> results) {
  std::vector<MetricsReport> all;
  std::map<Regime, std::vector<MetricsReport>> by_regime;
  Summary s;
  for (const auto& wr : results) {
    if (!wr.averaged) continue;
    all.push_back(*wr.averaged);
    if (wr.regime) by_regime[wr.regime->label].push_back(*wr.averaged);
    double max_days = 0.0, mean_days = 0.0, ratio = 0.0;
    for (const auto& [_, cell] : wr.per_symbol) {
      max_days += static_cast<double>(cell.diagnostics.max_duration_days);
      mean_days += cell.diagnostics.mean_duration_days;
      ratio += cell.diagnostics.commission_ratio;
    }
    const double n = static_cast<double>(wr.per_symbol.size());
    s.mean_max_drawdown_days += max_days / n;
    s.mean_drawdown_days += mean_days / n;
    s.mean_commission_ratio += ratio / n;
  }
  if (all.empty()) throw Error(ErrorKind::EmptyResults, "no window produced results");
  s.windows = all.size();
  s.overall = average_metrics(all);
  const double w = static_cast<double>(all.size());
  s.mean_max_drawdown_days /= w;
  s.mean_drawdown_days /= w;
  s.mean_commission_ratio /= w;
  for (const auto& [regime, reports] : by_regime) {
    s.per_regime[regime] = average_metrics(reports);
    s.regime_windows[regime] = reports.size();
  }
  return s;
}

}  // namespace saber
