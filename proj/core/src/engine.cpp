#include "saber/engine.hpp"

#include <algorithm>
#include <cmath>

#include "saber/error.hpp"

namespace saber {

void ExecutionConfig::validate() const {
  auto fail = [](const std::string& why) { throw Error(ErrorKind::InvalidParameter, why); };
  if (!(initial_capital > 0)) fail("initial_capital must be positive");
  if (!(commission_per_share >= 0) || !(commission_minimum >= 0)) fail("commissions must be non-negative");
  if (commission_minimum < commission_per_share) fail("commission_minimum must be >= commission_per_share");
  if (!(risk_free_rate >= 0)) fail("risk_free_rate must be non-negative");
  if (trading_days_per_year <= 0) fail("trading_days_per_year must be positive");
}

double commission(double shares, const ExecutionConfig& config) {
  if (!(shares > 0)) throw Error(ErrorKind::ZeroShares, "commission on zero shares");
  return std::max(config.commission_minimum, config.commission_per_share * shares);
}

double affordable_shares(double cash, double price, const ExecutionConfig& config) {
  if (!(price > 0)) throw Error(ErrorKind::NonPositivePrice, "price must be positive");
  if (!(cash > 0)) return 0.0;
  if (config.fractional_shares) {
    const double s = std::min((cash - config.commission_minimum) / price,
                              cash / (price + config.commission_per_share));
    return s > 0 ? s : 0.0;
  }
  auto feasible = [&](double s) { return s * price + commission(s, config) <= cash; };
  double lo = 0.0;  // always feasible
  double hi = std::floor(cash / price) + 1.0;  // never feasible
  while (hi - lo > 1.0) {
    const double mid = std::floor((lo + hi) / 2.0);
    (mid > 0 && feasible(mid) ? lo : hi) = mid;
  }
  return lo;
}

Execution apply_signal(const Portfolio& portfolio, Signal signal, double price, Date date,
                       const ExecutionConfig& config) {
  if (!(price > 0)) throw Error(ErrorKind::NonPositivePrice, date.iso());
  Execution out{portfolio, std::nullopt};
  if (signal == Signal::Buy && portfolio.position == Position::Flat) {
    const double shares = affordable_shares(portfolio.cash, price, config);
    if (shares <= 0) return out;
    const double fee = commission(shares, config);
    const double cost = std::min(portfolio.cash, shares * price + fee);
    out.portfolio.cash = portfolio.cash - cost;
    out.portfolio.shares = shares;
    out.portfolio.position = Position::Long;
    out.trade = Trade{date, Signal::Buy, shares, price, fee};
  } else if (signal == Signal::Sell && portfolio.position == Position::Long) {
    const double fee = commission(portfolio.shares, config);
    out.portfolio.cash = portfolio.cash + portfolio.shares * price - fee;
    out.portfolio.shares = 0.0;
    out.portfolio.position = Position::Flat;
    out.trade = Trade{date, Signal::Sell, portfolio.shares, price, fee};
  }
  return out;
}

std::vector<double> BacktestRecord::value_path() const {
  std::vector<double> out;
  out.reserve(equity.size() + 1);
  out.push_back(initial_capital);
  out.insert(out.end(), equity.begin(), equity.end());
  return out;
}

BacktestRecord run_backtest(const MarketData& data, const std::string& symbol, const Window& window,
                            TimingStrategy& strategy, const ExecutionConfig& config) {
  config.validate();
  const PriceSeries& series = data.series(symbol);
  const std::size_t first = series.first_on_or_after(window.trade_start);
  const std::size_t end = series.count_through(window.trade_end);
  if (first >= end) {
    throw Error(ErrorKind::NoBarsInWindow, symbol + " has no bars in " + window.trade_start.iso() +
                                               ".." + window.trade_end.iso());
  }
  if (first < strategy.required_history()) {
    throw Error(ErrorKind::InsufficientHistory,
                symbol + ": " + strategy.name() + " needs " + std::to_string(strategy.required_history()) +
                    " bars before " + window.trade_start.iso() + ", have " + std::to_string(first));
  }

  auto cutoff_for = [&](std::size_t i) {
    return i > 0 ? series[i - 1].date : window.trade_start.plus_days(-1);
  };
  const auto training = data.view_until(symbol, cutoff_for(first));
  strategy.begin_window(WindowStart{symbol, window.train_start, window.trade_start, window.trade_end, training});

  const std::vector<Date> calendar = series.dates();
  BacktestRecord rec;
  rec.symbol = symbol;
  rec.strategy = strategy.name();
  rec.window = window;
  rec.initial_capital = config.initial_capital;
  const std::size_t days = end - first;
  rec.dates.reserve(days);
  rec.equity.reserve(days);
  rec.daily_returns.reserve(days);

  Portfolio portfolio{config.initial_capital, 0.0, Position::Flat};
  double previous_value = config.initial_capital;
  for (std::size_t i = first; i < end; ++i) {
    const PriceBar& bar = series[i];
    const auto view = data.view_until(symbol, cutoff_for(i));
    rec.exposure.push_back(portfolio.position == Position::Long ? 1 : 0);

    const Signal signal =
        strategy.decide(DecisionContext{view, bar.date, window.trade_start, calendar, portfolio});
    rec.signals.push_back(signal);
    auto exec = apply_signal(portfolio, signal, bar.adj_close, bar.date, config);
    portfolio = exec.portfolio;
    if (exec.trade) {
      rec.total_commission += exec.trade->commission;
      rec.trades.push_back(*exec.trade);
    }
    if (i + 1 == end && portfolio.position == Position::Long) {
      auto exit = apply_signal(portfolio, Signal::Sell, bar.adj_close, bar.date, config);
      portfolio = exit.portfolio;
      rec.total_commission += exit.trade->commission;
      rec.liquidation = exit.trade;
    }

    const double value = portfolio.cash + portfolio.shares * bar.adj_close;
    rec.dates.push_back(bar.date);
    rec.equity.push_back(value);
    rec.daily_returns.push_back(value / previous_value - 1.0);
    previous_value = value;
  }
  strategy.end_window();
  return rec;
}

}  // namespace saber
