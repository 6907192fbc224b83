#pragma once

#include <optional>
#include <string>
#include <vector>

#include "saber/date.hpp"
#include "saber/market_data.hpp"
#include "saber/portfolio.hpp"
#include "saber/timing.hpp"
#include "saber/window.hpp"

namespace saber {

struct ExecutionConfig {
  double initial_capital = 100000.0;
  double commission_per_share = 0.0049;
  double commission_minimum = 0.99;
  double risk_free_rate = 0.03;
  int trading_days_per_year = 252;
  /// Test-only: size positions in fractional shares.
  bool fractional_shares = false;

  /// Throws InvalidParameter.
  void validate() const;
};

struct Trade {
  Date date;
  Signal side = Signal::Buy;  // Buy or Sell
  double shares = 0.0;
  double price = 0.0;
  double commission = 0.0;

  friend bool operator==(const Trade&, const Trade&) = default;
};

/// max(commission_minimum, commission_per_share · shares); ZeroShares when shares ≤ 0.
double commission(double shares, const ExecutionConfig& config);

struct Execution {
  Portfolio portfolio;
  std::optional<Trade> trade;
};

/// All-in on BUY while flat, all-out on SELL while long; everything else is
/// a no-op. Throws NonPositivePrice.
Execution apply_signal(const Portfolio& portfolio, Signal signal, double price, Date date,
                       const ExecutionConfig& config);

/// Largest share count with shares·price + commission(shares) ≤ cash.
double affordable_shares(double cash, double price, const ExecutionConfig& config);

struct BacktestRecord {
  std::string symbol;
  std::string strategy;
  Window window;
  double initial_capital = 0.0;
  std::vector<Date> dates;             // trading days executed in the window
  std::vector<double> equity;          // V_t, marked at adjusted close
  std::vector<double> daily_returns;   // V_t/V_{t-1} − 1 with V_{-1} = initial_capital
  std::vector<Signal> signals;         // signal decided for each day
  std::vector<int> exposure;           // 1 when long during day t (held from the prior close)
  std::vector<Trade> trades;           // strategy-driven fills
  std::optional<Trade> liquidation;    // forced exit at the window's last bar
  double total_commission = 0.0;

  /// initial_capital followed by the equity curve.
  std::vector<double> value_path() const;

  friend bool operator==(const BacktestRecord&, const BacktestRecord&) = default;
};

/// Runs one strategy on one symbol over `window`. The signal for day d sees
/// data through the previous trading day and fills at day d's adjusted close.
/// Throws NoBarsInWindow or InsufficientHistory.
BacktestRecord run_backtest(const MarketData& data, const std::string& symbol, const Window& window,
                            TimingStrategy& strategy, const ExecutionConfig& config);

}  // namespace saber
