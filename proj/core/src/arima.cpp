#include <cmath>

#include <Eigen/Dense>

#include "saber/error.hpp"
#include "saber/timing.hpp"

namespace saber {

double ArimaModel::forecast_difference(std::span<const double> recent_differences) const {
  if (recent_differences.size() < static_cast<std::size_t>(kP)) {
    throw Error(ErrorKind::InsufficientHistory, "ARIMA forecast needs 5 differences");
  }
  double f = intercept;
  const std::size_t n = recent_differences.size();
  for (int lag = 1; lag <= kP; ++lag) {
    f += ar_coefficients[lag - 1] * recent_differences[n - static_cast<std::size_t>(lag)];
  }
  return f;
}

ArimaModel arima_fit(std::span<const double> prices) {
  constexpr int p = ArimaModel::kP;
  if (prices.size() < ArimaModel::kMinBars) {
    throw Error(ErrorKind::InsufficientHistory,
                "ARIMA fit needs " + std::to_string(ArimaModel::kMinBars) + " bars, got " +
                    std::to_string(prices.size()));
  }
  std::vector<double> diff(prices.size() - 1);
  for (std::size_t i = 1; i < prices.size(); ++i) diff[i - 1] = prices[i] - prices[i - 1];

  // Row t regresses diff[t] on (1, diff[t-1], ..., diff[t-p]).
  const auto rows = static_cast<Eigen::Index>(diff.size() - p);
  Eigen::MatrixXd x(rows, p + 1);
  Eigen::VectorXd y(rows);
  for (Eigen::Index r = 0; r < rows; ++r) {
    const auto t = static_cast<std::size_t>(r) + p;
    x(r, 0) = 1.0;
    for (int lag = 1; lag <= p; ++lag) x(r, lag) = diff[t - static_cast<std::size_t>(lag)];
    y(r) = diff[t];
  }

  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(x);
  qr.setThreshold(1e-10);
  if (qr.rank() < p + 1) {
    throw Error(ErrorKind::SingularDesignMatrix,
                "lagged differences are collinear (rank " + std::to_string(qr.rank()) + ")");
  }
  const Eigen::VectorXd beta = qr.solve(y);

  ArimaModel model;
  model.intercept = beta(0);
  for (int i = 0; i < p; ++i) model.ar_coefficients[static_cast<std::size_t>(i)] = beta(i + 1);
  return model;
}

ArimaModel arima_fit(std::span<const PriceBar> training_bars) {
  std::vector<double> closes;
  closes.reserve(training_bars.size());
  for (const auto& b : training_bars) closes.push_back(b.adj_close);
  auto model = arima_fit(closes);
  model.fit_start = training_bars.front().date;
  model.fit_end = training_bars.back().date;
  return model;
}

ArimaModel arima_fit(const PointInTimeView& training_view) {
  return arima_fit(training_view.history());
}

Signal arima_signal(const ArimaModel& model, const PointInTimeView& view) {
  const auto closes = view.adj_closes(ArimaModel::kP + 1);
  std::array<double, ArimaModel::kP> diffs{};
  for (std::size_t i = 1; i < closes.size(); ++i) diffs[i - 1] = closes[i] - closes[i - 1];
  const double f = model.forecast_difference(diffs);
  if (f > 0) return Signal::Buy;
  if (f < 0) return Signal::Sell;
  return Signal::Hold;
}

}  // namespace saber
