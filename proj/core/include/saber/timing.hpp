#pragma once

#include <array>
#include <cstddef>
#include <functional>
#include <map>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "saber/date.hpp"
#include "saber/market_data.hpp"
#include "saber/portfolio.hpp"

namespace saber {

// ---------------------------------------------------------------- indicators

double simple_mean(std::span<const double> xs);
/// Linearly weighted mean, weights 1..n with the last element heaviest.
double weighted_mean(std::span<const double> xs);
/// Population standard deviation (divide by n).
double population_std(std::span<const double> xs);
/// max(high-low, |high-prev_close|, |low-prev_close|) on raw OHLC.
double true_range(const PriceBar& bar, const PriceBar& prev);
/// Simple mean of the true range over the last `period` bars (needs period+1 bars).
double average_true_range(std::span<const PriceBar> bars, std::size_t period);

// ------------------------------------------------------------ signal functions
//
// Every function reads only through the view, whose cutoff is the last
// completed trading day before the position day. Look-backs longer than the
// available history raise InsufficientHistory. Exact ties on a threshold
// produce Hold.

/// Buy on the first decision of the window (view cutoff before window_start).
Signal buy_and_hold_signal(const PointInTimeView& view, Date window_start);

Signal sma_cross_signal(const PointInTimeView& view, int short_window = 10, int long_window = 20);
Signal wma_cross_signal(const PointInTimeView& view, int short_window = 10, int long_window = 20);

/// Breakout rule on bands middle ± multiplier·ATR, middle = SMA(atr_period).
Signal atr_band_signal(const PointInTimeView& view, int atr_period = 14, double multiplier = 1.5);

/// Mean reversion on mean ± devfactor·σ (population σ).
Signal bollinger_signal(const PointInTimeView& view, int period = 20, double devfactor = 2.0);

struct TrendState {
  bool in_position = false;
  double highest_close = 0.0;
};

/// Enter on a strict `period`-bar closing high; exit on a trailing stop
/// `stop_multiplier`·ATR(atr_period) below the highest close since entry.
/// Updates `state` to reflect the emitted signal.
Signal trend_following_signal(const PointInTimeView& view, TrendState& state, int atr_period = 10,
                              int period = 20, double stop_multiplier = 2.0);

/// Holds from the `before`-th last trading day of a month through the
/// `after`-th trading day of the next month. Counts are in trading days of
/// `calendar`, which must be sorted ascending.
Signal turn_of_month_signal(std::span<const Date> calendar, Date date, int before = 5,
                            int after = 3);

// ---------------------------------------------------------------------- ARIMA

/// ARIMA(5,1,0): AR(5) with intercept on first differences of adjusted close.
struct ArimaModel {
  static constexpr int kP = 5;
  static constexpr int kD = 1;
  static constexpr int kQ = 0;
  static constexpr std::size_t kMinBars = 30;

  std::array<double, kP> ar_coefficients{};  // lag 1 first
  double intercept = 0.0;
  Date fit_start;
  Date fit_end;

  /// One-step-ahead forecast of the next difference given the latest
  /// differences, most recent last.
  double forecast_difference(std::span<const double> recent_differences) const;
};

ArimaModel arima_fit(std::span<const double> prices);
ArimaModel arima_fit(const PointInTimeView& training_view);
ArimaModel arima_fit(std::span<const PriceBar> training_bars);
Signal arima_signal(const ArimaModel& model, const PointInTimeView& view);

// ------------------------------------------------------- strategy interface

/// What a strategy sees when a window opens. `training` has its cutoff on the
/// last trading day before trade_start.
struct WindowStart {
  std::string symbol;
  Date train_start;
  Date trade_start;
  Date trade_end;
  const PointInTimeView& training;
};

struct DecisionContext {
  const PointInTimeView& view;     // cutoff = previous trading day
  Date decision_date;              // day the resulting position is taken
  Date window_start;
  std::span<const Date> calendar;  // the symbol's trading schedule
  Portfolio portfolio;
};

class TimingStrategy {
 public:
  virtual ~TimingStrategy() = default;

  virtual std::string name() const = 0;
  /// Bars needed on or before the first decision's cutoff.
  virtual std::size_t required_history() const { return 0; }
  virtual void begin_window(const WindowStart&) {}
  virtual Signal decide(const DecisionContext& ctx) = 0;
  virtual void end_window() {}
};

/// Creates a fresh strategy per (symbol, window) cell.
using StrategyFactory = std::function<std::unique_ptr<TimingStrategy>()>;

using StrategyParams = std::map<std::string, double>;

/// Built-in names: buy_and_hold, sma_cross, wma_cross, atr_band,
/// bollinger_bands, trend_following, turn_of_the_month, arima. Parameter names
/// follow the published defaults table (short_window, long_window, atr_period,
/// multiplier, period, devfactor, before_end_of_month_days,
/// after_start_of_month_business_days); missing ones take their defaults.
/// Throws InvalidParameter for unknown names, unknown keys or bad values.
StrategyFactory builtin_strategy_factory(const std::string& name, const StrategyParams& params = {});

std::vector<std::string> builtin_strategy_names();

/// Test helper strategy that replays a fixed signal per decision index.
class ScriptedStrategy : public TimingStrategy {
 public:
  explicit ScriptedStrategy(std::vector<Signal> script, std::string name = "scripted")
      : script_(std::move(script)), name_(std::move(name)) {}

  std::string name() const override { return name_; }
  void begin_window(const WindowStart&) override { next_ = 0; }
  Signal decide(const DecisionContext&) override {
    return next_ < script_.size() ? script_[next_++] : Signal::Hold;
  }

 private:
  std::vector<Signal> script_;
  std::string name_;
  std::size_t next_ = 0;
};

}  // namespace saber
