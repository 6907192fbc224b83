#pragma once

#include <cstddef>
#include <span>

namespace saber {

/// Regularized incomplete beta I_x(a, b) for a, b > 0 and x in [0, 1].
double regularized_incomplete_beta(double a, double b, double x);

/// 2·(1 − F(|t|)) for Student's t with `df` degrees of freedom.
double student_t_two_sided_p(double t, double df);

struct PairedTTestResult {
  double t_statistic = 0.0;
  double p_value = 1.0;
  int df = 0;
  double mean_difference = 0.0;
};

/// Paired test on d = a − b; throws LengthMismatch, TooFewObservations or
/// ZeroVarianceDifferences.
PairedTTestResult paired_t_test(std::span<const double> a, std::span<const double> b);

struct CapmFit {
  double alpha_daily = 0.0;
  double alpha = 0.0;  // alpha_daily × 252
  double beta = 0.0;
  double alpha_std_error = 0.0;  // daily units
  double beta_std_error = 0.0;
  double alpha_p_value = 1.0;
  double beta_p_value = 1.0;
  double residual_variance = 0.0;
  std::size_t n = 0;
};

/// OLS of (R_s − R_f) on (R_m − R_f) with R_f = rf_annual/252.
CapmFit capm_fit(std::span<const double> strategy_returns, std::span<const double> market_returns,
                 double rf_annual = 0.03);

}  // namespace saber
