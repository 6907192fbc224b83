#pragma once

#include <json.hpp>

#include "saber/analytics.hpp"
#include "saber/engine.hpp"
#include "saber/pipeline.hpp"
#include "saber/selection.hpp"
#include "saber/statistics.hpp"

namespace saber::json_io {

using nlohmann::ordered_json;

ordered_json number_or_null(const std::optional<double>& x);
ordered_json to_json(const Window& w);
ordered_json to_json(const Trade& t);
ordered_json to_json(const MetricsReport& m);
ordered_json to_json(const BacktestRecord& r);
ordered_json to_json(const SelectionResult& s);
ordered_json to_json(const CapmFit& c);
ordered_json to_json(const RegimeLabel& r);
ordered_json to_json(const DrawdownDiagnostics& d);

BacktestRecord record_from(const ordered_json& j);

}  // namespace saber::json_io
