#include "saber/serialize.hpp"

#include <array>
#include <charconv>

#include "json_io.hpp"
#include "saber/error.hpp"

namespace saber {

std::string format_number(double x) {
  std::array<char, 64> buf{};
  const auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), x);
  if (ec != std::errc()) return "nan";
  return std::string(buf.data(), ptr);
}

std::string equity_csv(const BacktestRecord& rec) {
  std::string out = "date,value,return\n";
  for (std::size_t i = 0; i < rec.dates.size(); ++i) {
    out += rec.dates[i].iso() + "," + format_number(rec.equity[i]) + "," + format_number(rec.daily_returns[i]) + "\n";
  }
  return out;
}

std::string trades_csv(const BacktestRecord& rec) {
  std::string out = "date,side,shares,price,commission\n";
  auto row = [&out](const Trade& t) {
    out += t.date.iso() + "," + std::string(to_string(t.side)) + "," + format_number(t.shares) + "," +
           format_number(t.price) + "," + format_number(t.commission) + "\n";
  };
  for (const auto& t : rec.trades) row(t);
  if (rec.liquidation) row(*rec.liquidation);
  return out;
}

std::string underwater_csv(const BacktestRecord& rec) {
  const auto uw = underwater_series(rec.value_path());
  std::string out = "date,drawdown\n";
  for (std::size_t i = 0; i < rec.dates.size(); ++i) {
    out += rec.dates[i].iso() + "," + format_number(uw[i + 1]) + "\n";
  }
  return out;
}

std::string record_to_json(const BacktestRecord& rec) { return json_io::to_json(rec).dump(2); }

BacktestRecord record_from_json(const std::string& text) {
  const auto j = json_io::ordered_json::parse(text, nullptr, false);
  if (j.is_discarded()) throw Error(ErrorKind::DataError, "record is not valid JSON");
  return json_io::record_from(j);
}

std::string metrics_to_json(const MetricsReport& m) { return json_io::to_json(m).dump(2); }

namespace json_io {

ordered_json number_or_null(const std::optional<double>& x) { return x ? ordered_json(*x) : ordered_json(nullptr); }

ordered_json to_json(const Window& w) {
  return {{"train_start", w.train_start.iso()}, {"trade_start", w.trade_start.iso()}, {"trade_end", w.trade_end.iso()}};
}

ordered_json to_json(const Trade& t) {
  return {{"date", t.date.iso()},
          {"side", std::string(to_string(t.side))},
          {"shares", t.shares},
          {"price", t.price},
          {"commission", t.commission}};
}

ordered_json to_json(const MetricsReport& m) {
  ordered_json flags = ordered_json::array();
  for (auto f : m.flags) flags.push_back(std::string(to_string(f)));
  return {{"cumulative_return", m.cumulative_return},
          {"annualized_return", m.annualized_return},
          {"annualized_volatility", m.annualized_volatility},
          {"max_drawdown", m.max_drawdown},
          {"sharpe", number_or_null(m.sharpe)},
          {"sortino", number_or_null(m.sortino)},
          {"trading_days", m.trading_days},
          {"flags", std::move(flags)}};
}

ordered_json to_json(const BacktestRecord& r) {
  ordered_json dates = ordered_json::array();
  for (auto d : r.dates) dates.push_back(d.iso());
  ordered_json signals = ordered_json::array();
  for (auto s : r.signals) signals.push_back(to_int(s));
  ordered_json trades = ordered_json::array();
  for (const auto& t : r.trades) trades.push_back(to_json(t));
  return {{"symbol", r.symbol},
          {"strategy", r.strategy},
          {"window", to_json(r.window)},
          {"initial_capital", r.initial_capital},
          {"dates", std::move(dates)},
          {"equity", r.equity},
          {"daily_returns", r.daily_returns},
          {"signals", std::move(signals)},
          {"exposure", r.exposure},
          {"trades", std::move(trades)},
          {"liquidation", r.liquidation ? to_json(*r.liquidation) : ordered_json(nullptr)},
          {"total_commission", r.total_commission}};
}

ordered_json to_json(const SelectionResult& s) {
  ordered_json scores = ordered_json::object();
  for (const auto& [k, v] : s.scores) scores[k] = v;
  ordered_json dropped = ordered_json::object();
  for (const auto& [k, v] : s.dropped) dropped[k] = v;
  return {{"window_start", s.window_start.iso()},
          {"method", std::string(to_string(s.method))},
          {"path", std::string(to_string(s.path))},
          {"symbols", s.symbols},
          {"scores", std::move(scores)},
          {"dropped", std::move(dropped)}};
}

ordered_json to_json(const CapmFit& c) {
  return {{"alpha", c.alpha},
          {"alpha_daily", c.alpha_daily},
          {"beta", c.beta},
          {"alpha_std_error", c.alpha_std_error},
          {"beta_std_error", c.beta_std_error},
          {"alpha_p_value", c.alpha_p_value},
          {"beta_p_value", c.beta_p_value},
          {"residual_variance", c.residual_variance},
          {"n", c.n}};
}

ordered_json to_json(const RegimeLabel& r) {
  return {{"year", r.year}, {"annual_return", r.annual_return}, {"label", std::string(to_string(r.label))}};
}

ordered_json to_json(const DrawdownDiagnostics& d) {
  return {{"max_duration_days", d.max_duration_days},
          {"mean_duration_days", d.mean_duration_days},
          {"episode_count", d.episode_count},
          {"commission_ratio", d.commission_ratio}};
}

namespace {

Date date_from(const ordered_json& j) {
  const auto d = Date::parse(j.get<std::string>());
  if (!d) throw Error(ErrorKind::DataError, "bad date in record: " + j.get<std::string>());
  return *d;
}

Signal side_from(const std::string& s) {
  if (s == "BUY") return Signal::Buy;
  if (s == "SELL") return Signal::Sell;
  throw Error(ErrorKind::DataError, "bad trade side: " + s);
}

Trade trade_from(const ordered_json& j) {
  return Trade{date_from(j.at("date")), side_from(j.at("side").get<std::string>()), j.at("shares").get<double>(),
               j.at("price").get<double>(), j.at("commission").get<double>()};
}

}  // namespace

BacktestRecord record_from(const ordered_json& j) {
  try {
    BacktestRecord r;
    r.symbol = j.at("symbol").get<std::string>();
    r.strategy = j.at("strategy").get<std::string>();
    const auto& w = j.at("window");
    r.window = Window{date_from(w.at("train_start")), date_from(w.at("trade_start")), date_from(w.at("trade_end"))};
    r.initial_capital = j.at("initial_capital").get<double>();
    for (const auto& d : j.at("dates")) r.dates.push_back(date_from(d));
    r.equity = j.at("equity").get<std::vector<double>>();
    r.daily_returns = j.at("daily_returns").get<std::vector<double>>();
    for (const auto& s : j.at("signals")) {
      const int v = s.get<int>();
      if (v < -1 || v > 1) throw Error(ErrorKind::DataError, "signal out of domain in record");
      r.signals.push_back(static_cast<Signal>(v));
    }
    r.exposure = j.at("exposure").get<std::vector<int>>();
    for (const auto& t : j.at("trades")) r.trades.push_back(trade_from(t));
    if (!j.at("liquidation").is_null()) r.liquidation = trade_from(j.at("liquidation"));
    r.total_commission = j.at("total_commission").get<double>();
    return r;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::DataError, std::string("malformed record: ") + e.what());
  }
}

}  // namespace json_io

}  // namespace saber
