#include "saber/config.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <set>
#include <sstream>
#include <toml.hpp>

#include "saber/error.hpp"

namespace saber {

std::string_view to_string(Mode m) { return m == Mode::Composite ? "composite" : "selected"; }

const std::vector<std::string>& pairable_metrics() {
  static const std::vector<std::string> names{"cumulative_return", "annualized_return",
                                              "annualized_volatility", "max_drawdown",
                                              "sharpe", "sortino"};
  return names;
}

namespace {

[[noreturn]] void config_error(const std::string& field, const std::string& why) {
  throw Error(ErrorKind::ConfigError, field + ": " + why);
}

// Walks one table and rejects keys nobody asked for.
class Section {
 public:
  Section(const toml::table* table, std::string prefix) : table_(table), prefix_(std::move(prefix)) {}

  bool present() const { return table_ != nullptr; }
  std::string field(std::string_view key) const {
    return prefix_.empty() ? std::string(key) : prefix_ + "." + std::string(key);
  }

  const toml::node* get(std::string_view key) {
    seen_.insert(std::string(key));
    return table_ ? table_->get(key) : nullptr;
  }

  std::optional<std::string> string(std::string_view key) {
    const auto* n = get(key);
    if (!n) return std::nullopt;
    if (auto v = n->value<std::string>(); v && n->is_string()) return *v;
    config_error(field(key), "expected a string");
  }

  std::optional<double> number(std::string_view key) {
    const auto* n = get(key);
    if (!n) return std::nullopt;
    if (n->is_integer()) return static_cast<double>(*n->value<std::int64_t>());
    if (n->is_floating_point()) return *n->value<double>();
    config_error(field(key), "expected a number");
  }

  std::optional<std::int64_t> integer(std::string_view key) {
    const auto* n = get(key);
    if (!n) return std::nullopt;
    if (n->is_integer()) return *n->value<std::int64_t>();
    config_error(field(key), "expected an integer");
  }

  std::optional<bool> boolean(std::string_view key) {
    const auto* n = get(key);
    if (!n) return std::nullopt;
    if (n->is_boolean()) return *n->value<bool>();
    config_error(field(key), "expected true or false");
  }

  std::optional<Date> date(std::string_view key) {
    const auto* n = get(key);
    if (!n) return std::nullopt;
    if (n->is_date()) {
      const auto d = *n->value<toml::date>();
      return Date(d.year, d.month, d.day);
    }
    if (n->is_string()) {
      if (auto d = Date::parse(*n->value<std::string>())) return d;
    }
    config_error(field(key), "expected a YYYY-MM-DD date");
  }

  std::optional<std::vector<std::string>> strings(std::string_view key) {
    const auto* n = get(key);
    if (!n) return std::nullopt;
    const auto* arr = n->as_array();
    if (!arr) config_error(field(key), "expected an array of strings");
    std::vector<std::string> out;
    for (const auto& item : *arr) {
      if (!item.is_string()) config_error(field(key), "expected an array of strings");
      out.push_back(*item.value<std::string>());
    }
    return out;
  }

  const toml::table* table(std::string_view key) {
    const auto* n = get(key);
    if (!n) return nullptr;
    if (!n->is_table()) config_error(field(key), "expected a table");
    return n->as_table();
  }

  void reject_unknown() const {
    if (!table_) return;
    for (const auto& [k, _] : *table_) {
      if (!seen_.contains(std::string(k.str()))) config_error(field(k.str()), "unknown key");
    }
  }

 private:
  const toml::table* table_;
  std::string prefix_;
  std::set<std::string> seen_;
};

std::filesystem::path resolve(const std::filesystem::path& base, const std::string& p) {
  std::filesystem::path path(p);
  return path.is_absolute() ? path : base / path;
}

int positive_int(Section& s, std::string_view key, int fallback) {
  const auto v = s.integer(key);
  if (!v) return fallback;
  if (*v < 1 || *v > 1'000'000) config_error(s.field(key), "must be a positive integer");
  return static_cast<int>(*v);
}

std::uint64_t parse_seed(std::string_view text, const std::string& field) {
  std::uint64_t v = 0;
  const auto* end = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(text.data(), end, v);
  if (ec != std::errc() || ptr != end) config_error(field, "expected a non-negative integer seed");
  return v;
}

StrategyEntry parse_strategy(const std::string& label, const toml::table& table) {
  Section s(&table, "strategies." + label);
  StrategyEntry e;
  e.name = label;
  const auto kind = s.string("kind");
  if (const auto command = s.strings("command")) {
    if (kind && *kind != "adapter") config_error(s.field("kind"), "a strategy with a command must be an adapter");
    if (command->empty()) config_error(s.field("command"), "must name an executable");
    AdapterConfig ac;
    ac.command = *command;
    if (const auto t = s.number("timeout")) {
      if (!(*t > 0)) config_error(s.field("timeout"), "must be positive seconds");
      ac.timeout = std::chrono::milliseconds(static_cast<long long>(std::llround(*t * 1000.0)));
    }
    ac.bars_window = static_cast<std::size_t>(positive_int(s, "bars_window", 30));
    ac.send_texts = s.boolean("texts").value_or(false);
    e.kind = "adapter";
    e.adapter = ac;
    s.reject_unknown();
    return e;
  }
  e.kind = kind.value_or(label);
  if (e.kind == "adapter") config_error(s.field("command"), "adapter strategies need a command");
  if (e.kind == "arima") {
    if (const auto* order = s.get("order")) {
      const auto* arr = order->as_array();
      const bool ok = arr && arr->size() == 3 && (*arr)[0].value<std::int64_t>() == 5 &&
                      (*arr)[1].value<std::int64_t>() == 1 && (*arr)[2].value<std::int64_t>() == 0;
      if (!ok) config_error(s.field("order"), "only order = [5, 1, 0] is supported");
    }
  }
  for (const auto& [k, v] : table) {
    const std::string key(k.str());
    if (key == "kind" || key == "order") continue;
    const auto x = s.number(key);
    e.params[key] = *x;
  }
  try {
    (void)builtin_strategy_factory(e.kind, e.params);
  } catch (const Error& err) {
    config_error("strategies." + label, err.what());
  }
  s.reject_unknown();
  return e;
}

}  // namespace

ExperimentConfig parse_config(std::string_view text, const std::filesystem::path& base_dir,
                              const char* seed_override) {
  toml::table root;
  try {
    root = toml::parse(text);
  } catch (const toml::parse_error& e) {
    std::ostringstream os;
    os << "line " << e.source().begin.line << ": " << e.description();
    config_error("<toml>", os.str());
  }

  ExperimentConfig c;
  Section top(&root, "");

  const auto mode = top.string("mode");
  if (!mode) config_error("mode", "required (selected or composite)");
  if (*mode == "selected") {
    c.mode = Mode::Selected;
  } else if (*mode == "composite") {
    c.mode = Mode::Composite;
  } else {
    config_error("mode", "must be selected or composite, got '" + *mode + "'");
  }
  if (const auto seed = top.integer("seed")) {
    if (*seed < 0) config_error("seed", "must be non-negative");
    c.seed = static_cast<std::uint64_t>(*seed);
  }
  if (seed_override) c.seed = parse_seed(seed_override, "SABER_SEED");
  if (const auto out = top.string("output_dir")) c.output_dir = resolve(base_dir, *out);
  else c.output_dir = base_dir / c.output_dir;
  if (const auto jobs = top.integer("jobs")) {
    if (*jobs < 0) config_error("jobs", "must be non-negative");
    c.jobs = static_cast<unsigned>(*jobs);
  }

  Section data(top.table("data"), "data");
  if (!data.present()) config_error("data", "section required");
  const auto prices = data.string("prices_dir");
  if (!prices) config_error("data.prices_dir", "required");
  c.prices_dir = resolve(base_dir, *prices);
  if (!std::filesystem::is_directory(c.prices_dir)) {
    config_error("data.prices_dir", "not a directory: " + c.prices_dir.string());
  }
  if (const auto m = data.string("membership")) {
    c.membership = resolve(base_dir, *m);
    if (!std::filesystem::is_regular_file(*c.membership)) {
      config_error("data.membership", "file not found: " + c.membership->string());
    }
  }
  if (const auto t = data.string("texts")) {
    c.texts = resolve(base_dir, *t);
    if (!std::filesystem::is_regular_file(*c.texts)) {
      config_error("data.texts", "file not found: " + c.texts->string());
    }
  }
  c.benchmark = data.string("benchmark");
  data.reject_unknown();

  Section win(top.table("windows"), "windows");
  if (!win.present()) config_error("windows", "section required");
  const auto start = win.date("eval_start");
  const auto end = win.date("eval_end");
  if (!start) config_error("windows.eval_start", "required");
  if (!end) config_error("windows.eval_end", "required");
  c.windows.eval_start = *start;
  c.windows.eval_end = *end;
  c.windows.window_len_years = positive_int(win, "window_len_years", 1);
  c.windows.step_years = positive_int(win, "step_years", 1);
  c.windows.train_lookback_years = positive_int(win, "train_lookback_years", 2);
  win.reject_unknown();
  if (!(c.windows.eval_start < c.windows.eval_end)) {
    config_error("windows.eval_end", "must be after eval_start");
  }

  Section ex(top.table("execution"), "execution");
  if (auto v = ex.number("initial_capital")) c.execution.initial_capital = *v;
  if (auto v = ex.number("commission_per_share")) c.execution.commission_per_share = *v;
  if (auto v = ex.number("commission_minimum")) c.execution.commission_minimum = *v;
  if (auto v = ex.number("risk_free_rate")) c.execution.risk_free_rate = *v;
  if (auto v = ex.boolean("fractional_shares")) c.execution.fractional_shares = *v;
  ex.reject_unknown();
  try {
    c.execution.validate();
  } catch (const Error& e) {
    config_error("execution", e.what());
  }

  Section sel_list(top.table("selected"), "selected");
  if (auto syms = sel_list.strings("symbols")) c.symbols = *syms;
  sel_list.reject_unknown();

  Section sel(top.table("selection"), "selection");
  c.selection.seed = c.seed;
  c.selection.risk_free_rate = c.execution.risk_free_rate;
  if (sel.present()) {
    if (const auto m = sel.string("method")) {
      const auto parsed = parse_selection_method(*m);
      if (!parsed) config_error("selection.method", "unknown method '" + *m + "'");
      c.selection.method = *parsed;
    }
    c.selection.k = positive_int(sel, "k", c.selection.k);
    c.selection.momentum_period = positive_int(sel, "momentum_period", c.selection.momentum_period);
    if (const auto skip = sel.integer("skip_period")) {
      if (*skip < 0) config_error("selection.skip_period", "must be non-negative");
      c.selection.skip_period = static_cast<int>(*skip);
    }
    c.selection.vol_lookback = positive_int(sel, "vol_lookback", c.selection.vol_lookback);
    c.selection.fincon_lookback_years = positive_int(sel, "lookback_years", c.selection.fincon_lookback_years);
    if (auto v = sel.number("corr_threshold")) c.selection.corr_threshold = *v;
    sel.reject_unknown();
    try {
      c.selection.validate();
    } catch (const Error& e) {
      config_error("selection", e.what());
    }
  }

  if (c.mode == Mode::Composite) {
    if (!c.membership) config_error("data.membership", "required in composite mode");
    if (!sel.present()) config_error("selection", "section required in composite mode");
  } else if (c.symbols.empty()) {
    config_error("selected.symbols", "selected mode needs a non-empty symbol list");
  }

  const auto* strategies = top.table("strategies");
  if (!strategies || strategies->empty()) config_error("strategies", "at least one strategy is required");
  for (const auto& [k, v] : *strategies) {
    const std::string label(k.str());
    if (!v.is_table()) config_error("strategies." + label, "expected a table");
    c.strategies.push_back(parse_strategy(label, *v.as_table()));
  }

  Section analysis(top.table("analysis"), "analysis");
  if (const auto m = analysis.string("ttest_metric")) {
    const auto& ok = pairable_metrics();
    if (std::find(ok.begin(), ok.end(), *m) == ok.end()) config_error("analysis.ttest_metric", "unknown metric '" + *m + "'");
    c.ttest_metric = *m;
  }
  analysis.reject_unknown();
  top.reject_unknown();
  return c;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::ConfigError, path.string() + ": cannot open config");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str(), path.parent_path().empty() ? "." : path.parent_path(), std::getenv("SABER_SEED"));
}

std::vector<NamedStrategy> make_strategies(const ExperimentConfig& config, std::shared_ptr<SessionLog> log) {
  std::vector<NamedStrategy> out;
  for (const auto& e : config.strategies) {
    if (e.adapter) {
      out.push_back(NamedStrategy{e.name, adapter_strategy_factory(e.name, *e.adapter, log)});
    } else {
      out.push_back(NamedStrategy{e.name, builtin_strategy_factory(e.kind, e.params)});
    }
  }
  return out;
}

}  // namespace saber
