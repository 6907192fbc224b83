#include "saber/analytics.hpp"

#include <algorithm>
#include <cmath>

#include "saber/error.hpp"

namespace saber {

namespace {

// Neumaier-compensated sum; keeps the analytics within a few ulps of an
// extended-precision evaluation.
double stable_sum(std::span<const double> xs) {
  double sum = 0.0;
  double comp = 0.0;
  for (double x : xs) {
    const double t = sum + x;
    if (std::abs(sum) >= std::abs(x)) {
      comp += (sum - t) + x;
    } else {
      comp += (x - t) + sum;
    }
    sum = t;
  }
  return sum + comp;
}

std::vector<double> returns_of(std::span<const double> equity) {
  std::vector<double> out;
  if (equity.size() < 2) return out;
  out.reserve(equity.size() - 1);
  for (std::size_t i = 1; i < equity.size(); ++i) out.push_back(equity[i] / equity[i - 1] - 1.0);
  return out;
}

void require_positive(std::span<const double> equity) {
  for (double v : equity) {
    if (!(v > 0)) throw Error(ErrorKind::NonPositiveValue, "equity values must be positive");
  }
}

}  // namespace

double mean(std::span<const double> xs) {
  if (xs.empty()) throw Error(ErrorKind::TooFewObservations, "mean of empty sequence");
  return stable_sum(xs) / static_cast<double>(xs.size());
}

double sample_std(std::span<const double> xs) {
  if (xs.size() < 2) throw Error(ErrorKind::TooFewObservations, "sample std needs 2 observations");
  const double m = mean(xs);
  std::vector<double> sq(xs.size());
  std::transform(xs.begin(), xs.end(), sq.begin(), [m](double x) { return (x - m) * (x - m); });
  return std::sqrt(stable_sum(sq) / static_cast<double>(xs.size() - 1));
}

double pearson_correlation(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw Error(ErrorKind::LengthMismatch, "correlation inputs differ in length");
  if (a.size() < 2) throw Error(ErrorKind::TooFewObservations, "correlation needs 2 observations");
  const double ma = mean(a);
  const double mb = mean(b);
  std::vector<double> sab(a.size()), saa(a.size()), sbb(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double da = a[i] - ma;
    const double db = b[i] - mb;
    sab[i] = da * db;
    saa[i] = da * da;
    sbb[i] = db * db;
  }
  const double vaa = stable_sum(saa);
  const double vbb = stable_sum(sbb);
  if (vaa == 0.0 || vbb == 0.0) throw Error(ErrorKind::DegenerateReturns, "zero variance in correlation");
  return std::clamp(stable_sum(sab) / std::sqrt(vaa * vbb), -1.0, 1.0);
}

double cumulative_return(std::span<const double> positions, std::span<const double> market_returns) {
  if (positions.size() != market_returns.size()) {
    throw Error(ErrorKind::LengthMismatch, "positions and market returns differ in length");
  }
  double growth = 1.0;
  for (std::size_t t = 0; t < positions.size(); ++t) growth *= 1.0 + positions[t] * market_returns[t];
  return growth - 1.0;
}

double compound(std::span<const double> returns) {
  double growth = 1.0;
  for (double r : returns) growth *= 1.0 + r;
  return growth - 1.0;
}

double annualized_return(double cumulative, std::size_t trading_days) {
  if (trading_days == 0) throw Error(ErrorKind::ZeroDays, "annualized return over zero days");
  if (!(cumulative > -1.0)) throw Error(ErrorKind::TotalLoss, "cumulative return at or below -100%");
  return std::pow(1.0 + cumulative, static_cast<double>(kTradingDaysPerYear) /
                                        static_cast<double>(trading_days)) -
         1.0;
}

double annualized_volatility(std::span<const double> returns) {
  return sample_std(returns) * std::sqrt(static_cast<double>(kTradingDaysPerYear));
}

double max_drawdown(std::span<const double> equity) {
  require_positive(equity);
  double peak = 0.0;
  double worst = 0.0;
  for (double v : equity) {
    peak = std::max(peak, v);
    worst = std::max(worst, (peak - v) / peak);
  }
  return -worst;
}

std::optional<double> sharpe(std::span<const double> returns, double rf_annual) {
  const double sd = sample_std(returns);
  if (sd == 0.0) return std::nullopt;
  const double excess = mean(returns) - rf_annual / kTradingDaysPerYear;
  return excess / sd * std::sqrt(static_cast<double>(kTradingDaysPerYear));
}

std::optional<double> sortino(std::span<const double> returns, double rf_annual) {
  if (returns.size() < 2) throw Error(ErrorKind::TooFewObservations, "sortino needs 2 returns");
  std::vector<double> downside;
  for (double r : returns) {
    if (r < 0.0) downside.push_back(r);
  }
  if (downside.size() < 2) return std::nullopt;
  const double sd = sample_std(downside);
  if (sd == 0.0) return std::nullopt;
  const double excess = mean(returns) - rf_annual / kTradingDaysPerYear;
  return excess / sd * std::sqrt(static_cast<double>(kTradingDaysPerYear));
}

std::vector<double> underwater_series(std::span<const double> equity) {
  require_positive(equity);
  std::vector<double> out;
  out.reserve(equity.size());
  double peak = 0.0;
  for (double v : equity) {
    peak = std::max(peak, v);
    out.push_back(v >= peak ? 0.0 : (v - peak) / peak);
  }
  return out;
}

std::string_view to_string(MetricFlag f) {
  return f == MetricFlag::SharpeUndefined ? "SHARPE_UNDEFINED" : "SORTINO_UNDEFINED";
}

MetricsReport compute_metrics(std::span<const double> equity, double rf_annual) {
  if (equity.size() < 2) {
    throw Error(ErrorKind::TooFewObservations, "metrics need a starting value and one trading day");
  }
  require_positive(equity);
  const auto returns = returns_of(equity);
  MetricsReport m;
  m.trading_days = returns.size();
  m.cumulative_return = equity.back() / equity.front() - 1.0;
  m.annualized_return = annualized_return(m.cumulative_return, m.trading_days);
  m.max_drawdown = max_drawdown(equity);
  if (returns.size() >= 2) {
    m.annualized_volatility = annualized_volatility(returns);
    m.sharpe = sharpe(returns, rf_annual);
    m.sortino = sortino(returns, rf_annual);
  }
  if (!m.sharpe) m.flags.insert(MetricFlag::SharpeUndefined);
  if (!m.sortino) m.flags.insert(MetricFlag::SortinoUndefined);
  return m;
}

MetricsReport average_metrics(std::span<const MetricsReport> reports) {
  if (reports.empty()) throw Error(ErrorKind::EmptyResults, "nothing to average");
  const double n = static_cast<double>(reports.size());
  MetricsReport out;
  double sharpe_sum = 0.0, sortino_sum = 0.0, days = 0.0;
  std::size_t sharpe_n = 0, sortino_n = 0;
  for (const auto& r : reports) {
    out.cumulative_return += r.cumulative_return;
    out.annualized_return += r.annualized_return;
    out.annualized_volatility += r.annualized_volatility;
    out.max_drawdown += r.max_drawdown;
    days += static_cast<double>(r.trading_days);
    if (r.sharpe) {
      sharpe_sum += *r.sharpe;
      ++sharpe_n;
    }
    if (r.sortino) {
      sortino_sum += *r.sortino;
      ++sortino_n;
    }
  }
  out.cumulative_return /= n;
  out.annualized_return /= n;
  out.annualized_volatility /= n;
  out.max_drawdown /= n;
  out.trading_days = static_cast<std::size_t>(std::llround(days / n));
  if (sharpe_n) {
    out.sharpe = sharpe_sum / static_cast<double>(sharpe_n);
  } else {
    out.flags.insert(MetricFlag::SharpeUndefined);
  }
  if (sortino_n) {
    out.sortino = sortino_sum / static_cast<double>(sortino_n);
  } else {
    out.flags.insert(MetricFlag::SortinoUndefined);
  }
  return out;
}

DrawdownDiagnostics drawdown_diagnostics(std::span<const double> equity, double total_commission,
                                         double initial_capital) {
  DrawdownDiagnostics d;
  d.underwater = underwater_series(equity);
  std::size_t run = 0;
  std::size_t total = 0;
  auto close_run = [&] {
    if (run == 0) return;
    ++d.episode_count;
    total += run;
    d.max_duration_days = std::max(d.max_duration_days, run);
    run = 0;
  };
  for (double u : d.underwater) {
    if (u < 0.0) {
      ++run;
    } else {
      close_run();
    }
  }
  close_run();
  d.mean_duration_days =
      d.episode_count ? static_cast<double>(total) / static_cast<double>(d.episode_count) : 0.0;
  d.commission_ratio = initial_capital > 0 ? total_commission / initial_capital : 0.0;
  return d;
}

std::string_view to_string(Regime r) {
  switch (r) {
    case Regime::Bull: return "bull";
    case Regime::Bear: return "bear";
    case Regime::Sideways: return "sideways";
  }
  return "sideways";
}

Regime classify_regime(double annual_return) {
  if (annual_return >= 0.20) return Regime::Bull;
  if (annual_return <= -0.20) return Regime::Bear;
  return Regime::Sideways;
}

RegimeLabel label_regime(const PriceSeries& index, int year) {
  const auto first = index.first_on_or_after(Date(year, 1, 1));
  const auto end = index.count_through(Date(year, 12, 31));
  if (first >= end) {
    throw Error(ErrorKind::NoDataForYear, index.symbol() + " has no bars in " + std::to_string(year));
  }
  RegimeLabel label;
  label.year = year;
  const double p0 = index[first].adj_close;
  const double pt = index[end - 1].adj_close;
  label.annual_return = (pt - p0) / p0;
  label.label = classify_regime(label.annual_return);
  return label;
}

}  // namespace saber
