#include "saber/statistics.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <utility>
#include <vector>

#include "saber/analytics.hpp"
#include "saber/error.hpp"

namespace saber {

namespace {

// Tail of the Stirling series for ln Γ(z), valid for z ≥ 10 to ~1e-15.
double stirling_correction(double z) {
  const double z2 = z * z;
  return (1.0 / 12.0 -
          (1.0 / 360.0 - (1.0 / 1260.0 - (1.0 / 1680.0 - 1.0 / (1188.0 * z2)) / z2) / z2) / z2) /
         z;
}

// ln Γ(a + b) − ln Γ(a) for a ≥ 10 without cancelling two huge lgamma values.
double log_gamma_ratio(double a, double b) {
  return (a - 0.5) * std::log1p(b / a) + b * std::log(a + b) - b + stirling_correction(a + b) -
         stirling_correction(a);
}

double log_beta(double a, double b) {
  if (a < b) std::swap(a, b);
  if (a < 10.0) return std::lgamma(a) + std::lgamma(b) - std::lgamma(a + b);
  return std::lgamma(b) - log_gamma_ratio(a, b);
}

// Modified Lentz evaluation of the incomplete beta continued fraction.
double beta_continued_fraction(double a, double b, double x) {
  constexpr int kMaxIterations = 100000;
  constexpr double kEps = 1e-16;
  constexpr double kTiny = 1e-300;

  const double qab = a + b;
  const double qap = a + 1.0;
  const double qam = a - 1.0;
  double c = 1.0;
  double d = 1.0 - qab * x / qap;
  if (std::abs(d) < kTiny) d = kTiny;
  d = 1.0 / d;
  double h = d;
  for (int m = 1; m <= kMaxIterations; ++m) {
    const double m2 = 2.0 * m;
    double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
    d = 1.0 + aa * d;
    if (std::abs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::abs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    h *= d * c;
    aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
    d = 1.0 + aa * d;
    if (std::abs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::abs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::abs(del - 1.0) < kEps) return h;
  }
  return h;
}

// I_x(a, b) given x, y = 1 − x and their logarithms, each computed by the
// caller in the most accurate form available.
double ibeta(double a, double b, double x, double y, double log_x, double log_y) {
  if (x <= 0.0) return 0.0;
  if (y <= 0.0) return 1.0;
  const double log_front = a * log_x + b * log_y - log_beta(a, b);
  if (x < (a + 1.0) / (a + b + 2.0)) {
    return std::exp(log_front) * beta_continued_fraction(a, b, x) / a;
  }
  return 1.0 - std::exp(log_front) * beta_continued_fraction(b, a, y) / b;
}

}  // namespace

double regularized_incomplete_beta(double a, double b, double x) {
  if (!(a > 0) || !(b > 0) || !(x >= 0.0 && x <= 1.0)) {
    throw Error(ErrorKind::InvalidParameter, "incomplete beta needs a, b > 0 and x in [0, 1]");
  }
  return ibeta(a, b, x, 1.0 - x, std::log(x), std::log1p(-x));
}

double student_t_two_sided_p(double t, double df) {
  if (!(df >= 1.0) || !std::isfinite(df)) {
    throw Error(ErrorKind::InvalidDf, "degrees of freedom must be >= 1");
  }
  if (std::isnan(t)) return std::numeric_limits<double>::quiet_NaN();
  if (std::isinf(t)) return 0.0;
  if (t == 0.0) return 1.0;
  // p = I_x(df/2, 1/2) with x = df/(df + t²).
  const double t2 = t * t;
  const double denom = df + t2;
  const double x = df / denom;
  const double y = t2 / denom;
  const double log_x = -std::log1p(t2 / df);
  const double log_y = 2.0 * std::log(std::abs(t)) - std::log(denom);
  const double p = ibeta(0.5 * df, 0.5, x, y, log_x, log_y);
  return std::min(1.0, std::max(0.0, p));
}

PairedTTestResult paired_t_test(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw Error(ErrorKind::LengthMismatch, "paired samples differ in length");
  if (a.size() < 2) throw Error(ErrorKind::TooFewObservations, "paired t-test needs n >= 2");
  std::vector<double> d(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) d[i] = a[i] - b[i];
  const double sd = sample_std(d);
  if (sd == 0.0) throw Error(ErrorKind::ZeroVarianceDifferences, "differences are constant");
  PairedTTestResult r;
  r.mean_difference = mean(d);
  r.df = static_cast<int>(d.size()) - 1;
  r.t_statistic = r.mean_difference / (sd / std::sqrt(static_cast<double>(d.size())));
  r.p_value = student_t_two_sided_p(r.t_statistic, r.df);
  return r;
}

CapmFit capm_fit(std::span<const double> strategy_returns, std::span<const double> market_returns,
                 double rf_annual) {
  if (strategy_returns.size() != market_returns.size()) {
    throw Error(ErrorKind::LengthMismatch, "strategy and market returns differ in length");
  }
  const std::size_t n = strategy_returns.size();
  if (n < 3) throw Error(ErrorKind::TooFewObservations, "CAPM needs n >= 3");

  const double rf = rf_annual / kTradingDaysPerYear;
  std::vector<double> x(n), y(n);
  for (std::size_t i = 0; i < n; ++i) {
    x[i] = market_returns[i] - rf;
    y[i] = strategy_returns[i] - rf;
  }
  const double mx = mean(x);
  const double my = mean(y);
  std::vector<double> dxx(n), dxy(n);
  for (std::size_t i = 0; i < n; ++i) {
    dxx[i] = (x[i] - mx) * (x[i] - mx);
    dxy[i] = (x[i] - mx) * (y[i] - my);
  }
  const double sxx = mean(dxx) * static_cast<double>(n);
  if (!(sxx > 0.0)) throw Error(ErrorKind::DegenerateRegressor, "market excess returns are constant");
  const double sxy = mean(dxy) * static_cast<double>(n);

  CapmFit fit;
  fit.n = n;
  fit.beta = sxy / sxx;
  fit.alpha_daily = my - fit.beta * mx;
  fit.alpha = fit.alpha_daily * kTradingDaysPerYear;

  std::vector<double> sq(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double e = y[i] - fit.alpha_daily - fit.beta * x[i];
    sq[i] = e * e;
  }
  const double dof = static_cast<double>(n - 2);
  fit.residual_variance = mean(sq) * static_cast<double>(n) / dof;
  fit.beta_std_error = std::sqrt(fit.residual_variance / sxx);
  fit.alpha_std_error =
      std::sqrt(fit.residual_variance * (1.0 / static_cast<double>(n) + mx * mx / sxx));

  auto p_of = [dof](double coef, double se) {
    if (se == 0.0) return coef == 0.0 ? 1.0 : 0.0;
    return student_t_two_sided_p(coef / se, dof);
  };
  fit.alpha_p_value = p_of(fit.alpha_daily, fit.alpha_std_error);
  fit.beta_p_value = p_of(fit.beta, fit.beta_std_error);
  return fit;
}

}  // namespace saber
