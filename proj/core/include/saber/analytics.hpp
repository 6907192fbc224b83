#pragma once

#include <cstddef>
#include <optional>
#include <set>
#include <span>
#include <string_view>
#include <vector>

#include "saber/market_data.hpp"

namespace saber {

constexpr int kTradingDaysPerYear = 252;

// Sample statistics (divide by n-1) are used throughout this module.
double mean(std::span<const double> xs);
double sample_std(std::span<const double> xs);
/// Pearson correlation; throws LengthMismatch, TooFewObservations, or
/// DegenerateReturns when either side has zero variance.
double pearson_correlation(std::span<const double> a, std::span<const double> b);

/// Π(1 + S_t·R_m,t) − 1 with S_t ∈ {0, 1}.
double cumulative_return(std::span<const double> positions, std::span<const double> market_returns);
/// Cumulative return of a daily return series, Π(1 + R_t) − 1.
double compound(std::span<const double> returns);
/// (1 + C)^(252/T) − 1.
double annualized_return(double cumulative, std::size_t trading_days);
/// Sample std of daily returns × √252.
double annualized_volatility(std::span<const double> returns);
/// Largest peak-to-trough decline, reported as a value ≤ 0.
double max_drawdown(std::span<const double> equity);
/// Excess mean over sample std, annualized; nullopt when std is 0.
std::optional<double> sharpe(std::span<const double> returns, double rf_annual = 0.03);
/// Excess mean over the sample std of strictly negative returns; nullopt
/// when fewer than two negative returns exist or their std is 0.
std::optional<double> sortino(std::span<const double> returns, double rf_annual = 0.03);
/// D_t = (V_t − peak_t)/peak_t.
std::vector<double> underwater_series(std::span<const double> equity);

enum class MetricFlag { SharpeUndefined, SortinoUndefined };

std::string_view to_string(MetricFlag f);

struct MetricsReport {
  double cumulative_return = 0.0;
  double annualized_return = 0.0;
  double annualized_volatility = 0.0;
  double max_drawdown = 0.0;
  std::optional<double> sharpe;
  std::optional<double> sortino;
  std::size_t trading_days = 0;
  std::set<MetricFlag> flags;
};

/// Metrics of a value path. `equity` must include the starting value, so
/// daily returns are equity[t]/equity[t-1] − 1 for t ≥ 1.
MetricsReport compute_metrics(std::span<const double> equity, double rf_annual = 0.03);

/// Arithmetic mean of each metric. Undefined Sharpe/Sortino values are left
/// out of their means; the result is undefined only when none is defined.
MetricsReport average_metrics(std::span<const MetricsReport> reports);

struct DrawdownDiagnostics {
  std::vector<double> underwater;
  std::size_t max_duration_days = 0;
  double mean_duration_days = 0.0;
  std::size_t episode_count = 0;
  double commission_ratio = 0.0;
};

/// Episodes are maximal runs with D_t < 0; an episode open at the end counts
/// with its observed length.
DrawdownDiagnostics drawdown_diagnostics(std::span<const double> equity, double total_commission,
                                         double initial_capital);

enum class Regime { Bull, Bear, Sideways };

std::string_view to_string(Regime r);

struct RegimeLabel {
  int year = 0;
  double annual_return = 0.0;
  Regime label = Regime::Sideways;
};

/// Bull if R ≥ +20%, bear if R ≤ −20%, both inclusive.
Regime classify_regime(double annual_return);
/// R_y from the first and last adjusted closes of `year`.
RegimeLabel label_regime(const PriceSeries& index, int year);

}  // namespace saber
