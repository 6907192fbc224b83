#include "saber/experiment.hpp"

#include <openssl/evp.h>

#include <algorithm>
#include <fstream>
#include <map>
#include <ostream>
#include <sstream>

#include "json_io.hpp"
#include "saber/error.hpp"
#include "saber/serialize.hpp"

namespace saber {

namespace fs = std::filesystem;
using json_io::ordered_json;

namespace {

std::string sha256_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::MissingFile, path.string());
  EVP_MD_CTX* ctx = EVP_MD_CTX_new();
  EVP_DigestInit_ex(ctx, EVP_sha256(), nullptr);
  char buf[1 << 15];
  while (in.read(buf, sizeof buf) || in.gcount() > 0) {
    EVP_DigestUpdate(ctx, buf, static_cast<std::size_t>(in.gcount()));
  }
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  EVP_DigestFinal_ex(ctx, digest, &len);
  EVP_MD_CTX_free(ctx);
  static constexpr char hex[] = "0123456789abcdef";
  std::string out;
  for (unsigned i = 0; i < len; ++i) {
    out += hex[digest[i] >> 4];
    out += hex[digest[i] & 0xF];
  }
  return out;
}

std::vector<fs::path> price_files(const fs::path& dir) {
  std::vector<fs::path> out;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (entry.is_regular_file() && entry.path().extension() == ".csv") out.push_back(entry.path());
  }
  std::sort(out.begin(), out.end());
  return out;
}

void write_file(const fs::path& path, const std::string& content) {
  fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorKind::MissingFile, "cannot write " + path.string());
  out << content;
}

std::string safe_name(std::string s) {
  for (char& c : s) {
    if (c == '/' || c == '\\' || c == ':' || c == '\0') c = '_';
  }
  return s;
}

std::optional<double> metric_value(const MetricsReport& m, const std::string& name) {
  if (name == "cumulative_return") return m.cumulative_return;
  if (name == "annualized_return") return m.annualized_return;
  if (name == "annualized_volatility") return m.annualized_volatility;
  if (name == "max_drawdown") return m.max_drawdown;
  if (name == "sharpe") return m.sharpe;
  if (name == "sortino") return m.sortino;
  throw Error(ErrorKind::InvalidParameter, "unknown metric " + name);
}

ordered_json config_json(const ExperimentConfig& c) {
  ordered_json strategies = ordered_json::array();
  for (const auto& s : c.strategies) {
    ordered_json e{{"name", s.name}, {"kind", s.kind}};
    ordered_json params = ordered_json::object();
    for (const auto& [k, v] : s.params) params[k] = v;
    e["params"] = std::move(params);
    if (s.adapter) {
      e["command"] = s.adapter->command;
      e["timeout_ms"] = s.adapter->timeout.count();
      e["bars_window"] = s.adapter->bars_window;
      e["texts"] = s.adapter->send_texts;
    }
    strategies.push_back(std::move(e));
  }
  ordered_json j{{"mode", std::string(to_string(c.mode))}, {"seed", c.seed}};
  j["windows"] = {{"eval_start", c.windows.eval_start.iso()},
                  {"eval_end", c.windows.eval_end.iso()},
                  {"window_len_years", c.windows.window_len_years},
                  {"step_years", c.windows.step_years},
                  {"train_lookback_years", c.windows.train_lookback_years}};
  j["execution"] = {{"initial_capital", c.execution.initial_capital},
                    {"commission_per_share", c.execution.commission_per_share},
                    {"commission_minimum", c.execution.commission_minimum},
                    {"risk_free_rate", c.execution.risk_free_rate},
                    {"fractional_shares", c.execution.fractional_shares}};
  if (c.mode == Mode::Selected) {
    j["symbols"] = c.symbols;
  } else {
    j["selection"] = {{"method", std::string(to_string(c.selection.method))},
                      {"k", c.selection.k},
                      {"seed", c.selection.seed},
                      {"momentum_period", c.selection.momentum_period},
                      {"skip_period", c.selection.skip_period},
                      {"vol_lookback", c.selection.vol_lookback},
                      {"lookback_years", c.selection.fincon_lookback_years},
                      {"corr_threshold", c.selection.corr_threshold},
                      {"risk_free_rate", c.selection.risk_free_rate}};
  }
  j["benchmark"] = c.benchmark ? ordered_json(*c.benchmark) : ordered_json(nullptr);
  j["strategies"] = std::move(strategies);
  j["ttest_metric"] = c.ttest_metric;
  return j;
}

ordered_json fingerprints(const ExperimentConfig& c) {
  ordered_json prices = ordered_json::object();
  for (const auto& p : price_files(c.prices_dir)) prices[p.filename().string()] = sha256_file(p);
  ordered_json j{{"prices", std::move(prices)}};
  j["membership"] = c.membership ? ordered_json(sha256_file(*c.membership)) : ordered_json(nullptr);
  j["texts"] = c.texts ? ordered_json(sha256_file(*c.texts)) : ordered_json(nullptr);
  return j;
}

ordered_json skip_json(const SkipEntry& s) {
  return {{"window", json_io::to_json(s.window)},
          {"symbol", s.symbol},
          {"strategy", s.strategy},
          {"reason", s.reason}};
}

ordered_json capm_summary(const StrategyRun& run) {
  double alpha = 0, beta = 0;
  std::size_t n = 0, alpha_sig = 0;
  for (const auto& wr : run.windows) {
    for (const auto& [_, cell] : wr.per_symbol) {
      if (!cell.capm) continue;
      alpha += cell.capm->alpha;
      beta += cell.capm->beta;
      alpha_sig += cell.capm->alpha_p_value < 0.05 ? 1 : 0;
      ++n;
    }
  }
  if (n == 0) return nullptr;
  const double d = static_cast<double>(n);
  return {{"cells", n}, {"mean_alpha", alpha / d}, {"mean_beta", beta / d}, {"alpha_significant_5pct", alpha_sig}};
}

ordered_json strategy_summary(const StrategyRun& run) {
  ordered_json j{{"strategy", run.strategy}};
  std::size_t cells = 0;
  for (const auto& wr : run.windows) cells += wr.per_symbol.size();
  j["cells"] = cells;
  try {
    const Summary s = aggregate(run.windows);
    j["windows"] = s.windows;
    j["overall"] = json_io::to_json(s.overall);
    ordered_json regimes = ordered_json::object();
    for (const auto& [regime, report] : s.per_regime) {
      ordered_json r = json_io::to_json(report);
      r["windows"] = s.regime_windows.at(regime);
      regimes[std::string(to_string(regime))] = std::move(r);
    }
    j["per_regime"] = std::move(regimes);
    j["drawdown"] = {{"mean_max_duration_days", s.mean_max_drawdown_days},
                     {"mean_duration_days", s.mean_drawdown_days},
                     {"mean_commission_ratio", s.mean_commission_ratio}};
  } catch (const Error& e) {
    j["windows"] = 0;
    j["error"] = e.what();
  }
  j["capm"] = capm_summary(run);
  return j;
}

std::string cell_dir(const Window& w) { return w.trade_start.iso(); }

}  // namespace

std::vector<TTestRow> ttest_matrix(const ExperimentResult& result, const std::string& metric) {
  std::vector<TTestRow> rows;
  for (std::size_t a = 0; a < result.runs.size(); ++a) {
    for (std::size_t b = a + 1; b < result.runs.size(); ++b) {
      const auto& ra = result.runs[a];
      const auto& rb = result.runs[b];
      std::vector<double> xs, ys;
      for (std::size_t w = 0; w < ra.windows.size() && w < rb.windows.size(); ++w) {
        for (const auto& [sym, cell] : ra.windows[w].per_symbol) {
          auto other = rb.windows[w].per_symbol.find(sym);
          if (other == rb.windows[w].per_symbol.end()) continue;
          const auto x = metric_value(cell.metrics, metric);
          const auto y = metric_value(other->second.metrics, metric);
          if (!x || !y) continue;
          xs.push_back(*x);
          ys.push_back(*y);
        }
      }
      TTestRow row{ra.strategy, rb.strategy, xs.size(), std::nullopt, ""};
      try {
        row.result = paired_t_test(xs, ys);
      } catch (const Error& e) {
        row.note = std::string(to_string(e.kind()));
      }
      rows.push_back(std::move(row));
    }
  }
  return rows;
}

void write_artifacts(const ExperimentConfig& config, const ExperimentResult& result,
                     const std::vector<SessionLog::Entry>& sessions) {
  const fs::path out = config.output_dir;
  fs::create_directories(out);
  for (const char* stale : {"records", "underwater"}) fs::remove_all(out / stale);

  ordered_json manifest{{"tool", "saber"}, {"protocol_version", kProtocolVersion}};
  manifest["config"] = config_json(config);
  manifest["data_fingerprints"] = fingerprints(config);
  write_file(out / "manifest.json", manifest.dump(2) + "\n");

  ordered_json windows = ordered_json::array();
  for (const auto& run : result.runs) {
    for (const auto& wr : run.windows) {
      ordered_json w{{"strategy", run.strategy}, {"window", json_io::to_json(wr.window)}};
      ordered_json symbols = ordered_json::object();
      for (const auto& [sym, cell] : wr.per_symbol) {
        ordered_json c{{"metrics", json_io::to_json(cell.metrics)},
                       {"drawdown", json_io::to_json(cell.diagnostics)},
                       {"capm", cell.capm ? json_io::to_json(*cell.capm) : ordered_json(nullptr)}};
        symbols[sym] = std::move(c);
        const fs::path base = out / "records" / safe_name(run.strategy) / cell_dir(wr.window);
        write_file(base / (safe_name(sym) + ".json"), record_to_json(cell.record) + "\n");
        write_file(base / (safe_name(sym) + ".equity.csv"), equity_csv(cell.record));
        write_file(base / (safe_name(sym) + ".trades.csv"), trades_csv(cell.record));
        write_file(out / "underwater" / safe_name(run.strategy) / cell_dir(wr.window) / (safe_name(sym) + ".csv"),
                   underwater_csv(cell.record));
      }
      w["symbols_ran"] = wr.per_symbol.size();
      w["per_symbol"] = std::move(symbols);
      w["averaged"] = wr.averaged ? json_io::to_json(*wr.averaged) : ordered_json(nullptr);
      w["selection"] = wr.selection ? json_io::to_json(*wr.selection) : ordered_json(nullptr);
      w["regime"] = wr.regime ? json_io::to_json(*wr.regime) : ordered_json(nullptr);
      windows.push_back(std::move(w));
    }
  }
  write_file(out / "windows.json", windows.dump(2) + "\n");

  ordered_json skipped = ordered_json::array();
  for (const auto& s : result.skipped) skipped.push_back(skip_json(s));
  write_file(out / "skipped.json", skipped.dump(2) + "\n");

  ordered_json summary{{"mode", std::string(to_string(config.mode))}, {"seed", config.seed}};
  summary["windows"] = result.windows.size();
  summary["distinct_symbols"] = result.distinct_symbols;
  summary["distinct_symbol_count"] = result.distinct_symbols.size();
  summary["skipped"] = result.skipped.size();
  ordered_json strategies = ordered_json::array();
  for (const auto& run : result.runs) strategies.push_back(strategy_summary(run));
  summary["strategies"] = std::move(strategies);
  write_file(out / "summary.json", summary.dump(2) + "\n");

  const auto tests = ttest_matrix(result, config.ttest_metric);
  ordered_json tj = ordered_json::array();
  std::string tcsv = "metric,strategy_a,strategy_b,n,mean_difference,t_statistic,df,p_value,note\n";
  for (const auto& row : tests) {
    ordered_json r{{"metric", config.ttest_metric}, {"strategy_a", row.strategy_a}, {"strategy_b", row.strategy_b},
                   {"n", row.n}};
    tcsv += config.ttest_metric + "," + row.strategy_a + "," + row.strategy_b + "," + std::to_string(row.n) + ",";
    if (row.result) {
      r["mean_difference"] = row.result->mean_difference;
      r["t_statistic"] = row.result->t_statistic;
      r["df"] = row.result->df;
      r["p_value"] = row.result->p_value;
      tcsv += format_number(row.result->mean_difference) + "," + format_number(row.result->t_statistic) + "," +
              std::to_string(row.result->df) + "," + format_number(row.result->p_value) + ",\n";
    } else {
      r["note"] = row.note;
      tcsv += ",,,," + row.note + "\n";
    }
    tj.push_back(std::move(r));
  }
  write_file(out / "ttest.json", tj.dump(2) + "\n");
  write_file(out / "ttest.csv", tcsv);

  std::string capm = "strategy,window_start,symbol,alpha,beta,alpha_p_value,beta_p_value,n\n";
  std::string regime = "regime,strategy,mean_sharpe,windows\n";
  for (const auto& run : result.runs) {
    for (const auto& wr : run.windows) {
      for (const auto& [sym, cell] : wr.per_symbol) {
        if (!cell.capm) continue;
        capm += run.strategy + "," + wr.window.trade_start.iso() + "," + sym + "," + format_number(cell.capm->alpha) +
                "," + format_number(cell.capm->beta) + "," + format_number(cell.capm->alpha_p_value) + "," +
                format_number(cell.capm->beta_p_value) + "," + std::to_string(cell.capm->n) + "\n";
      }
    }
    try {
      const Summary s = aggregate(run.windows);
      for (const auto& [r, report] : s.per_regime) {
        regime += std::string(to_string(r)) + "," + run.strategy + "," +
                  (report.sharpe ? format_number(*report.sharpe) : std::string()) + "," +
                  std::to_string(s.regime_windows.at(r)) + "\n";
      }
    } catch (const Error&) {
    }
  }
  write_file(out / "capm.csv", capm);
  write_file(out / "regime_sharpe.csv", regime);

  if (!sessions.empty()) {
    ordered_json sj = ordered_json::array();
    for (const auto& e : sessions) {
      ordered_json incidents = ordered_json::array();
      for (const auto& i : e.report.incidents) {
        incidents.push_back({{"date", i.date.iso()}, {"kind", std::string(to_string(i.kind))}, {"detail", i.detail}});
      }
      sj.push_back({{"strategy", e.strategy},
                    {"symbol", e.symbol},
                    {"window_start", e.trade_start.iso()},
                    {"agent", e.report.agent_name},
                    {"exit_status", e.report.exit_status ? ordered_json(*e.report.exit_status) : ordered_json(nullptr)},
                    {"early_exit", e.report.early_exit},
                    {"force_terminated", e.report.force_terminated},
                    {"observes", e.report.observes},
                    {"actions", e.report.actions},
                    {"incidents", std::move(incidents)}});
    }
    write_file(out / "adapter_sessions.json", sj.dump(2) + "\n");
  }
}

RunOutcome run_experiment(const ExperimentConfig& config, std::optional<unsigned> jobs, std::ostream& log) {
  const MarketData data = load_market_data(config.prices_dir, config.membership, config.texts);
  if (config.benchmark && !data.has_symbol(*config.benchmark)) {
    throw Error(ErrorKind::ConfigError, "data.benchmark: no price file for '" + *config.benchmark + "'");
  }
  auto sessions = std::make_shared<SessionLog>();
  const auto strategies = make_strategies(config, sessions);
  RunOptions options{config.execution, config.benchmark, jobs.value_or(config.jobs)};

  RunOutcome outcome;
  if (config.mode == Mode::Selected) {
    outcome.result = run_selected(data, config.symbols, config.windows, strategies, options);
  } else {
    outcome.result = run_composite(data, config.selection, strategies, config.windows, options);
  }
  for (const auto& run : outcome.result.runs) {
    for (const auto& wr : run.windows) outcome.records += wr.per_symbol.size();
  }
  write_artifacts(config, outcome.result, sessions->entries());
  outcome.output_dir = config.output_dir.lexically_normal();
  log << "windows: " << outcome.result.windows.size() << ", records: " << outcome.records
      << ", skipped: " << outcome.result.skipped.size() << "\n";
  for (const auto& s : outcome.result.skipped) {
    log << "  skipped " << s.window.trade_start.iso() << " " << (s.symbol.empty() ? "*" : s.symbol)
        << (s.strategy.empty() ? "" : " [" + s.strategy + "]") << ": " << s.reason << "\n";
  }
  return outcome;
}

std::optional<ReportFormat> parse_report_format(std::string_view s) {
  if (s == "json") return ReportFormat::Json;
  if (s == "csv") return ReportFormat::Csv;
  if (s == "md" || s == "markdown") return ReportFormat::Markdown;
  return std::nullopt;
}

std::string render_report(const fs::path& dir, ReportFormat format) {
  const fs::path path = dir / "summary.json";
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::MissingArtifacts, "no summary.json in " + dir.string());
  const auto summary = ordered_json::parse(in, nullptr, false);
  if (summary.is_discarded() || !summary.contains("strategies")) {
    throw Error(ErrorKind::MissingArtifacts, path.string() + " is not a run summary");
  }

  static const std::vector<std::pair<std::string, std::string>> columns{
      {"SPR", "sharpe"}, {"STR", "sortino"}, {"AR", "annualized_return"},
      {"CR", "cumulative_return"}, {"MDD", "max_drawdown"}, {"AV", "annualized_volatility"}};

  struct Row {
    std::string strategy;
    std::vector<std::optional<double>> values;
  };
  std::vector<Row> rows;
  for (const auto& s : summary.at("strategies")) {
    Row row{s.at("strategy").get<std::string>(), {}};
    for (const auto& [_, key] : columns) {
      if (s.contains("overall") && !s["overall"][key].is_null()) {
        row.values.push_back(s["overall"][key].get<double>());
      } else {
        row.values.push_back(std::nullopt);
      }
    }
    rows.push_back(std::move(row));
  }
  auto cell = [](const std::optional<double>& v, const char* missing) {
    return v ? format_number(*v) : std::string(missing);
  };

  std::string out;
  switch (format) {
    case ReportFormat::Json: {
      ordered_json arr = ordered_json::array();
      for (const auto& r : rows) {
        ordered_json o{{"strategy", r.strategy}};
        for (std::size_t i = 0; i < columns.size(); ++i) o[columns[i].first] = json_io::number_or_null(r.values[i]);
        arr.push_back(std::move(o));
      }
      out = arr.dump(2) + "\n";
      break;
    }
    case ReportFormat::Csv: {
      out = "strategy";
      for (const auto& [name, _] : columns) out += "," + name;
      out += "\n";
      for (const auto& r : rows) {
        out += r.strategy;
        for (const auto& v : r.values) out += "," + cell(v, "");
        out += "\n";
      }
      break;
    }
    case ReportFormat::Markdown: {
      out = "| strategy |";
      std::string rule = "|---|";
      for (const auto& [name, _] : columns) {
        out += " " + name + " |";
        rule += "---:|";
      }
      out += "\n" + rule + "\n";
      for (const auto& r : rows) {
        out += "| " + r.strategy + " |";
        for (const auto& v : r.values) out += " " + cell(v, "n/a") + " |";
        out += "\n";
      }
      break;
    }
  }
  return out;
}

DataReport validate_data(const ExperimentConfig& config) {
  DataReport report;
  std::set<std::string> priced;
  for (const auto& p : price_files(config.prices_dir)) {
    try {
      const auto series = load_price_csv(p);
      priced.insert(series.symbol());
      if (series.empty()) report.warnings.push_back(p.filename().string() + ": no rows");
    } catch (const Error& e) {
      report.errors.push_back(p.filename().string() + ": " + e.what());
    }
  }
  if (priced.empty() && report.errors.empty()) report.errors.push_back("no price files in " + config.prices_dir.string());

  if (config.membership) {
    try {
      const Universe u = load_membership_csv(*config.membership);
      if (!u.has_delisted()) {
        report.warnings.push_back("membership has no delisted=true intervals; the universe may be survivor-only");
      }
      for (const auto& sym : u.symbols()) {
        if (!priced.contains(sym)) report.warnings.push_back("membership symbol " + sym + " has no price file");
      }
    } catch (const Error& e) {
      report.errors.push_back(config.membership->filename().string() + ": " + e.what());
    }
  }
  if (config.texts) {
    try {
      (void)load_texts_jsonl(*config.texts);
    } catch (const Error& e) {
      report.errors.push_back(config.texts->filename().string() + ": " + e.what());
    }
  }
  if (config.benchmark && !priced.contains(*config.benchmark)) {
    report.errors.push_back("benchmark " + *config.benchmark + " has no price file");
  }
  for (const auto& sym : config.symbols) {
    if (!priced.contains(sym)) report.warnings.push_back("selected symbol " + sym + " has no price file");
  }
  if (config.windows.step_years < config.windows.window_len_years) {
    report.warnings.push_back(
        "step_years < window_len_years: consecutive windows share evaluation years, and each later window's "
        "training span covers dates an earlier window already evaluated");
  }
  try {
    (void)generate_windows(config.windows);
  } catch (const Error& e) {
    report.errors.push_back(std::string("windows: ") + e.what());
  }
  return report;
}

}  // namespace saber
