#pragma once

#include <span>
#include <string>

#include "saber/analytics.hpp"
#include "saber/engine.hpp"

namespace saber {

/// Shortest decimal text that reads back to the same double.
std::string format_number(double x);

/// Header `date,value,return`; one row per trading day.
std::string equity_csv(const BacktestRecord& rec);
/// Header `date,side,shares,price,commission`; the forced liquidation, if
/// any, is the last row.
std::string trades_csv(const BacktestRecord& rec);
/// Header `date,drawdown`; one row per trading day.
std::string underwater_csv(const BacktestRecord& rec);

std::string record_to_json(const BacktestRecord& rec);
/// Inverse of record_to_json. Throws DataError on malformed input.
BacktestRecord record_from_json(const std::string& text);

std::string metrics_to_json(const MetricsReport& m);

}  // namespace saber
