#include "saber/timing.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "saber/error.hpp"

namespace saber {

std::string_view to_string(Signal s) {
  switch (s) {
    case Signal::Buy: return "BUY";
    case Signal::Sell: return "SELL";
    case Signal::Hold: return "HOLD";
  }
  return "HOLD";
}

std::string_view to_string(Position p) { return p == Position::Long ? "LONG" : "FLAT"; }

// ---------------------------------------------------------------- indicators

double simple_mean(std::span<const double> xs) {
  if (xs.empty()) return 0.0;
  return std::accumulate(xs.begin(), xs.end(), 0.0) / static_cast<double>(xs.size());
}

double weighted_mean(std::span<const double> xs) {
  double num = 0.0;
  double den = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double w = static_cast<double>(i + 1);
    num += w * xs[i];
    den += w;
  }
  return den > 0 ? num / den : 0.0;
}

double population_std(std::span<const double> xs) {
  if (xs.empty()) return 0.0;
  const double m = simple_mean(xs);
  double ss = 0.0;
  for (double x : xs) ss += (x - m) * (x - m);
  return std::sqrt(ss / static_cast<double>(xs.size()));
}

double true_range(const PriceBar& bar, const PriceBar& prev) {
  return std::max({bar.high - bar.low, std::abs(bar.high - prev.close),
                   std::abs(bar.low - prev.close)});
}

double average_true_range(std::span<const PriceBar> bars, std::size_t period) {
  if (period == 0 || bars.size() < period + 1) {
    throw Error(ErrorKind::InsufficientHistory, "ATR needs period+1 bars");
  }
  double sum = 0.0;
  const std::size_t n = bars.size();
  for (std::size_t i = n - period; i < n; ++i) sum += true_range(bars[i], bars[i - 1]);
  return sum / static_cast<double>(period);
}

namespace {

std::size_t to_count(int v, const char* what) {
  if (v <= 0) throw Error(ErrorKind::InvalidParameter, std::string(what) + " must be positive");
  return static_cast<std::size_t>(v);
}

std::vector<double> closes_of(std::span<const PriceBar> bars) {
  std::vector<double> out;
  out.reserve(bars.size());
  for (const auto& b : bars) out.push_back(b.adj_close);
  return out;
}

// Fires only on the bar where the sign of (fast - slow) flips.
template <typename MeanFn>
Signal cross_signal(const PointInTimeView& view, int short_window, int long_window, MeanFn mean) {
  const auto s = to_count(short_window, "short_window");
  const auto l = to_count(long_window, "long_window");
  const auto need = std::max(s, l) + 1;
  const auto closes = view.adj_closes(need);
  std::span<const double> all(closes);
  std::span<const double> cur = all.subspan(1);
  std::span<const double> prev = all.first(need - 1);

  const double cur_diff = mean(cur.last(s)) - mean(cur.last(l));
  const double prev_diff = mean(prev.last(s)) - mean(prev.last(l));
  if (prev_diff <= 0.0 && cur_diff > 0.0) return Signal::Buy;
  if (prev_diff >= 0.0 && cur_diff < 0.0) return Signal::Sell;
  return Signal::Hold;
}

}  // namespace

// ------------------------------------------------------------ signal functions

Signal buy_and_hold_signal(const PointInTimeView& view, Date window_start) {
  return view.cutoff() < window_start ? Signal::Buy : Signal::Hold;
}

Signal sma_cross_signal(const PointInTimeView& view, int short_window, int long_window) {
  return cross_signal(view, short_window, long_window, simple_mean);
}

Signal wma_cross_signal(const PointInTimeView& view, int short_window, int long_window) {
  return cross_signal(view, short_window, long_window, weighted_mean);
}

Signal atr_band_signal(const PointInTimeView& view, int atr_period, double multiplier) {
  const auto p = to_count(atr_period, "atr_period");
  if (!(multiplier > 0)) throw Error(ErrorKind::InvalidParameter, "multiplier must be positive");
  const auto bars = view.window_bars(p + 1);
  const auto closes = closes_of(bars);
  std::span<const double> cs(closes);

  const double middle = simple_mean(cs.last(p));
  const double atr = average_true_range(bars, p);
  const double upper = middle + multiplier * atr;
  const double lower = middle - multiplier * atr;
  const double cur = cs.back();
  const double prev = cs[cs.size() - 2];

  if (prev <= upper && cur > upper) return Signal::Buy;
  if (prev >= lower && cur < lower) return Signal::Sell;
  return Signal::Hold;
}

Signal bollinger_signal(const PointInTimeView& view, int period, double devfactor) {
  const auto p = to_count(period, "period");
  if (!(devfactor > 0)) throw Error(ErrorKind::InvalidParameter, "devfactor must be positive");
  const auto closes = view.adj_closes(p);
  const double mean = simple_mean(closes);
  const double band = devfactor * population_std(closes);
  const double cur = closes.back();
  if (cur < mean - band) return Signal::Buy;
  if (cur > mean + band) return Signal::Sell;
  return Signal::Hold;
}

Signal trend_following_signal(const PointInTimeView& view, TrendState& state, int atr_period,
                              int period, double stop_multiplier) {
  const auto a = to_count(atr_period, "atr_period");
  const auto p = to_count(period, "period");
  if (!(stop_multiplier > 0)) throw Error(ErrorKind::InvalidParameter, "stop_multiplier must be positive");
  const auto bars = view.window_bars(std::max(a, p) + 1);
  const double cur = bars.back().adj_close;

  if (!state.in_position) {
    auto prior = bars.subspan(bars.size() - 1 - p, p);
    const bool new_high = std::all_of(prior.begin(), prior.end(),
                                      [cur](const PriceBar& b) { return cur > b.adj_close; });
    if (new_high) {
      state.in_position = true;
      state.highest_close = cur;
      return Signal::Buy;
    }
    return Signal::Hold;
  }

  state.highest_close = std::max(state.highest_close, cur);
  const double stop = state.highest_close - stop_multiplier * average_true_range(bars, a);
  if (cur < stop) {
    state = TrendState{};
    return Signal::Sell;
  }
  return Signal::Hold;
}

Signal turn_of_month_signal(std::span<const Date> calendar, Date date, int before, int after) {
  const auto b = to_count(before, "before_end_of_month_days");
  const auto a = to_count(after, "after_start_of_month_business_days");
  auto it = std::lower_bound(calendar.begin(), calendar.end(), date);
  if (it == calendar.end() || *it != date) {
    throw Error(ErrorKind::DateNotInCalendar, date.iso());
  }
  auto same_month = [&](Date d) { return d.year() == date.year() && d.month() == date.month(); };
  auto first = it;
  while (first != calendar.begin() && same_month(*(first - 1))) --first;
  auto last = it;
  while (last + 1 != calendar.end() && same_month(*(last + 1))) ++last;

  const auto from_start = static_cast<std::size_t>(it - first) + 1;
  const auto from_end = static_cast<std::size_t>(last - it) + 1;
  if (from_end == b) return Signal::Buy;
  if (from_start == a + 1) return Signal::Sell;
  return Signal::Hold;
}

// ------------------------------------------------------- built-in strategies

namespace {

class BuyAndHold final : public TimingStrategy {
 public:
  std::string name() const override { return "buy_and_hold"; }
  Signal decide(const DecisionContext& ctx) override {
    return buy_and_hold_signal(ctx.view, ctx.window_start);
  }
};

class CrossStrategy final : public TimingStrategy {
 public:
  CrossStrategy(std::string name, bool weighted, int short_window, int long_window)
      : name_(std::move(name)), weighted_(weighted), short_(short_window), long_(long_window) {}
  std::string name() const override { return name_; }
  std::size_t required_history() const override {
    return static_cast<std::size_t>(std::max(short_, long_)) + 1;
  }
  Signal decide(const DecisionContext& ctx) override {
    return weighted_ ? wma_cross_signal(ctx.view, short_, long_)
                     : sma_cross_signal(ctx.view, short_, long_);
  }

 private:
  std::string name_;
  bool weighted_;
  int short_;
  int long_;
};

class AtrBand final : public TimingStrategy {
 public:
  AtrBand(int period, double multiplier) : period_(period), multiplier_(multiplier) {}
  std::string name() const override { return "atr_band"; }
  std::size_t required_history() const override { return static_cast<std::size_t>(period_) + 1; }
  Signal decide(const DecisionContext& ctx) override {
    return atr_band_signal(ctx.view, period_, multiplier_);
  }

 private:
  int period_;
  double multiplier_;
};

class Bollinger final : public TimingStrategy {
 public:
  Bollinger(int period, double devfactor) : period_(period), devfactor_(devfactor) {}
  std::string name() const override { return "bollinger_bands"; }
  std::size_t required_history() const override { return static_cast<std::size_t>(period_); }
  Signal decide(const DecisionContext& ctx) override {
    return bollinger_signal(ctx.view, period_, devfactor_);
  }

 private:
  int period_;
  double devfactor_;
};

class TrendFollowing final : public TimingStrategy {
 public:
  TrendFollowing(int atr_period, int period, double stop)
      : atr_period_(atr_period), period_(period), stop_(stop) {}
  std::string name() const override { return "trend_following"; }
  std::size_t required_history() const override {
    return static_cast<std::size_t>(std::max(atr_period_, period_)) + 1;
  }
  void begin_window(const WindowStart&) override { state_ = TrendState{}; }
  Signal decide(const DecisionContext& ctx) override {
    return trend_following_signal(ctx.view, state_, atr_period_, period_, stop_);
  }

 private:
  int atr_period_;
  int period_;
  double stop_;
  TrendState state_;
};

class TurnOfMonth final : public TimingStrategy {
 public:
  TurnOfMonth(int before, int after) : before_(before), after_(after) {}
  std::string name() const override { return "turn_of_the_month"; }
  Signal decide(const DecisionContext& ctx) override {
    return turn_of_month_signal(ctx.calendar, ctx.decision_date, before_, after_);
  }

 private:
  int before_;
  int after_;
};

class Arima final : public TimingStrategy {
 public:
  std::string name() const override { return "arima"; }
  std::size_t required_history() const override { return ArimaModel::kMinBars; }
  void begin_window(const WindowStart& ws) override {
    model_ = arima_fit(ws.training.bars_between(ws.train_start, ws.training.cutoff()));
  }
  Signal decide(const DecisionContext& ctx) override { return arima_signal(model_, ctx.view); }

 private:
  ArimaModel model_;
};

int int_param(const StrategyParams& params, const std::string& key, int fallback) {
  auto it = params.find(key);
  if (it == params.end()) return fallback;
  const double v = it->second;
  if (!(v >= 1) || v != std::floor(v) || v > 100000) {
    throw Error(ErrorKind::InvalidParameter, key + " must be a positive integer");
  }
  return static_cast<int>(v);
}

double real_param(const StrategyParams& params, const std::string& key, double fallback) {
  auto it = params.find(key);
  if (it == params.end()) return fallback;
  if (!(it->second > 0) || !std::isfinite(it->second)) {
    throw Error(ErrorKind::InvalidParameter, key + " must be a positive real");
  }
  return it->second;
}

void check_keys(const std::string& name, const StrategyParams& params,
                std::initializer_list<const char*> allowed) {
  for (const auto& [key, _] : params) {
    bool ok = false;
    for (const char* a : allowed) ok = ok || key == a;
    if (!ok) throw Error(ErrorKind::InvalidParameter, name + ": unknown parameter '" + key + "'");
  }
}

}  // namespace

std::vector<std::string> builtin_strategy_names() {
  return {"buy_and_hold", "sma_cross",      "wma_cross",        "atr_band",
          "bollinger_bands", "trend_following", "turn_of_the_month", "arima"};
}

StrategyFactory builtin_strategy_factory(const std::string& name, const StrategyParams& params) {
  if (name == "buy_and_hold") {
    check_keys(name, params, {});
    return [] { return std::make_unique<BuyAndHold>(); };
  }
  if (name == "sma_cross" || name == "wma_cross") {
    check_keys(name, params, {"short_window", "long_window"});
    const int s = int_param(params, "short_window", 10);
    const int l = int_param(params, "long_window", 20);
    const bool weighted = name == "wma_cross";
    return [=] { return std::make_unique<CrossStrategy>(name, weighted, s, l); };
  }
  if (name == "atr_band") {
    check_keys(name, params, {"atr_period", "multiplier"});
    const int p = int_param(params, "atr_period", 14);
    const double m = real_param(params, "multiplier", 1.5);
    return [=] { return std::make_unique<AtrBand>(p, m); };
  }
  if (name == "bollinger_bands") {
    check_keys(name, params, {"period", "devfactor"});
    const int p = int_param(params, "period", 20);
    const double k = real_param(params, "devfactor", 2.0);
    return [=] { return std::make_unique<Bollinger>(p, k); };
  }
  if (name == "trend_following") {
    check_keys(name, params, {"atr_period", "period", "stop_multiplier"});
    const int a = int_param(params, "atr_period", 10);
    const int p = int_param(params, "period", 20);
    const double m = real_param(params, "stop_multiplier", 2.0);
    return [=] { return std::make_unique<TrendFollowing>(a, p, m); };
  }
  if (name == "turn_of_the_month") {
    check_keys(name, params, {"before_end_of_month_days", "after_start_of_month_business_days"});
    const int b = int_param(params, "before_end_of_month_days", 5);
    const int a = int_param(params, "after_start_of_month_business_days", 3);
    return [=] { return std::make_unique<TurnOfMonth>(b, a); };
  }
  if (name == "arima") {
    check_keys(name, params, {});
    return [] { return std::make_unique<Arima>(); };
  }
  throw Error(ErrorKind::InvalidParameter, "unknown strategy '" + name + "'");
}

}  // namespace saber
