#include "saber/selection.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "saber/analytics.hpp"
#include "saber/error.hpp"

namespace saber {

std::string_view to_string(SelectionMethod m) {
  switch (m) {
    case SelectionMethod::RandomK: return "random_k";
    case SelectionMethod::Momentum: return "momentum";
    case SelectionMethod::VolatilityEffect: return "volatility_effect";
    case SelectionMethod::FinCon: return "fincon";
  }
  return "random_k";
}

std::optional<SelectionMethod> parse_selection_method(std::string_view s) {
  if (s == "random_k") return SelectionMethod::RandomK;
  if (s == "momentum") return SelectionMethod::Momentum;
  if (s == "volatility_effect") return SelectionMethod::VolatilityEffect;
  if (s == "fincon") return SelectionMethod::FinCon;
  return std::nullopt;
}

std::string_view to_string(SelectionPath p) {
  switch (p) {
    case SelectionPath::Ranked: return "ranked";
    case SelectionPath::Primary: return "primary";
    case SelectionPath::Fallback: return "fallback";
  }
  return "ranked";
}

void SelectionSpec::validate() const {
  auto fail = [](const std::string& why) { throw Error(ErrorKind::InvalidParameter, why); };
  if (k < 1) fail("selection k must be >= 1");
  if (momentum_period < 1 || skip_period < 0) fail("momentum periods must be positive");
  if (skip_period >= momentum_period) fail("skip_period must be < momentum_period");
  if (vol_lookback < 2) fail("vol_lookback must be >= 2");
  if (fincon_lookback_years < 1) fail("fincon_lookback_years must be >= 1");
  if (!(corr_threshold > 0.0 && corr_threshold <= 1.0)) fail("corr_threshold must be in (0, 1]");
}

// ------------------------------------------------------------------------ RNG

std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t salt) {
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (salt + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

SeededRng::SeededRng(std::uint64_t seed) : engine_(seed) {}

std::uint64_t SeededRng::next() { return engine_(); }

std::uint64_t SeededRng::below(std::uint64_t bound) {
  if (bound == 0) throw Error(ErrorKind::InvalidParameter, "bound must be positive");
  // Reject the low (2^64 mod bound) outputs so every residue is equally likely.
  const std::uint64_t threshold = (0 - bound) % bound;
  while (true) {
    const std::uint64_t x = engine_();
    if (x >= threshold) return x % bound;
  }
}

// ------------------------------------------------------------------ selectors

SelectionResult select_random_k(std::vector<std::string> candidates, int k, std::uint64_t seed,
                                Date window_start) {
  if (candidates.empty()) throw Error(ErrorKind::EmptyCandidateSet, "no candidates");
  if (k < 1) throw Error(ErrorKind::InvalidParameter, "k must be >= 1");
  std::sort(candidates.begin(), candidates.end());
  candidates.erase(std::unique(candidates.begin(), candidates.end()), candidates.end());

  SeededRng rng(seed);
  const std::size_t take = std::min<std::size_t>(static_cast<std::size_t>(k), candidates.size());
  for (std::size_t i = 0; i < take; ++i) {
    const auto j = i + rng.below(candidates.size() - i);
    std::swap(candidates[i], candidates[j]);
  }
  candidates.resize(take);

  SelectionResult r;
  r.window_start = window_start;
  r.method = SelectionMethod::RandomK;
  r.symbols = std::move(candidates);
  return r;
}

double momentum_score(const PointInTimeView& view, int momentum_period, int skip_period) {
  if (momentum_period < 1 || skip_period < 0 || skip_period >= momentum_period) {
    throw Error(ErrorKind::InvalidParameter, "need 0 <= skip_period < momentum_period");
  }
  const auto bars = view.window_bars(static_cast<std::size_t>(momentum_period) + 1);
  const std::size_t t = bars.size() - 1;
  const double recent = bars[t - static_cast<std::size_t>(skip_period)].adj_close;
  const double base = bars[t - static_cast<std::size_t>(momentum_period)].adj_close;
  return recent / base - 1.0;
}

double weekly_log_volatility(const PointInTimeView& view, int lookback) {
  if (lookback < 2) throw Error(ErrorKind::InvalidParameter, "lookback must be >= 2");
  const auto n = static_cast<std::size_t>(lookback);
  const auto closes = view.adj_closes(n + 5);
  std::vector<double> weekly;
  weekly.reserve(n);
  for (std::size_t t = 5; t < closes.size(); ++t) weekly.push_back(std::log(closes[t] / closes[t - 5]));
  return sample_std(weekly);
}

std::vector<std::string> rank_top_k(const std::map<std::string, double>& scores, int k,
                                    bool descending) {
  std::vector<std::pair<std::string, double>> items(scores.begin(), scores.end());
  std::stable_sort(items.begin(), items.end(), [descending](const auto& a, const auto& b) {
    if (a.second != b.second) return descending ? a.second > b.second : a.second < b.second;
    return a.first < b.first;
  });
  std::vector<std::string> out;
  for (std::size_t i = 0; i < items.size() && i < static_cast<std::size_t>(std::max(k, 0)); ++i) {
    out.push_back(items[i].first);
  }
  return out;
}

namespace {

template <typename ScoreFn>
SelectionResult select_by_score(const std::vector<std::string>& candidates, const ViewFactory& views,
                                int k, bool descending, SelectionMethod method, Date window_start,
                                ScoreFn score) {
  if (k < 1) throw Error(ErrorKind::InvalidParameter, "k must be >= 1");
  SelectionResult r;
  r.window_start = window_start;
  r.method = method;
  for (const auto& sym : candidates) {
    try {
      r.scores[sym] = score(views(sym));
    } catch (const Error& e) {
      r.dropped[sym] = e.what();
    }
  }
  if (r.scores.empty()) {
    throw Error(ErrorKind::NoEligibleCandidates,
                std::to_string(candidates.size()) + " candidates, none with sufficient history");
  }
  r.symbols = rank_top_k(r.scores, k, descending);
  return r;
}

struct DailyReturns {
  std::vector<long> days;  // serial date of the later bar
  std::vector<double> values;
};

// Pearson correlation over the dates both series share.
double aligned_correlation(const DailyReturns& a, const DailyReturns& b) {
  std::vector<double> xa, xb;
  std::size_t i = 0, j = 0;
  while (i < a.days.size() && j < b.days.size()) {
    if (a.days[i] < b.days[j]) {
      ++i;
    } else if (b.days[j] < a.days[i]) {
      ++j;
    } else {
      xa.push_back(a.values[i++]);
      xb.push_back(b.values[j++]);
    }
  }
  if (xa.size() < 3) return 0.0;
  try {
    return pearson_correlation(xa, xb);
  } catch (const Error&) {
    return 0.0;
  }
}

}  // namespace

SelectionResult select_top_momentum(const std::vector<std::string>& candidates,
                                    const ViewFactory& views, int k, int momentum_period,
                                    int skip_period, Date window_start) {
  return select_by_score(candidates, views, k, true, SelectionMethod::Momentum, window_start,
                         [&](const PointInTimeView& v) { return momentum_score(v, momentum_period, skip_period); });
}

SelectionResult select_low_volatility(const std::vector<std::string>& candidates,
                                      const ViewFactory& views, int k, int lookback,
                                      Date window_start) {
  return select_by_score(candidates, views, k, false, SelectionMethod::VolatilityEffect, window_start,
                         [&](const PointInTimeView& v) { return weekly_log_volatility(v, lookback); });
}

double mean_pairwise_correlation(const std::vector<std::vector<double>>& corr,
                                 const std::vector<std::size_t>& members) {
  double sum = 0.0;
  std::size_t pairs = 0;
  for (std::size_t a = 0; a < members.size(); ++a) {
    for (std::size_t b = a + 1; b < members.size(); ++b) {
      sum += corr[members[a]][members[b]];
      ++pairs;
    }
  }
  return pairs ? sum / static_cast<double>(pairs) : 0.0;
}

SelectionResult fincon_select(const std::vector<std::string>& candidates, const ViewFactory& views,
                              int k, Date window_start, int lookback_years, double corr_threshold,
                              double rf_annual) {
  if (k < 1) throw Error(ErrorKind::InvalidParameter, "k must be >= 1");
  if (lookback_years < 1) throw Error(ErrorKind::InvalidParameter, "lookback_years must be >= 1");
  const Date lookback_start = window_start.plus_years(-lookback_years);

  SelectionResult r;
  r.window_start = window_start;
  r.method = SelectionMethod::FinCon;

  std::vector<std::string> names;
  std::vector<DailyReturns> returns;
  std::vector<double> sharpes;
  std::vector<std::string> sorted = candidates;
  std::sort(sorted.begin(), sorted.end());
  sorted.erase(std::unique(sorted.begin(), sorted.end()), sorted.end());
  for (const auto& sym : sorted) {
    try {
      auto view = views(sym);
      auto history = view.history();
      if (history.empty() || lookback_start < history.front().date) {
        throw Error(ErrorKind::InsufficientHistory, "history starts after " + lookback_start.iso());
      }
      auto bars = view.bars_between(lookback_start, view.cutoff());
      DailyReturns dr;
      for (std::size_t i = 1; i < bars.size(); ++i) {
        dr.days.push_back(bars[i].date.serial());
        dr.values.push_back(bars[i].adj_close / bars[i - 1].adj_close - 1.0);
      }
      if (dr.values.size() < 2) throw Error(ErrorKind::InsufficientHistory, "fewer than 2 returns");
      auto s = sharpe(dr.values, rf_annual);
      if (!s) throw Error(ErrorKind::DegenerateReturns, sym + " has zero return volatility");
      names.push_back(sym);
      returns.push_back(std::move(dr));
      sharpes.push_back(*s);
    } catch (const Error& e) {
      r.dropped[sym] = e.what();
    }
  }
  if (names.empty()) throw Error(ErrorKind::NoEligibleCandidates, "no candidate has a full look-back");

  const std::size_t n = names.size();
  std::vector<std::vector<double>> corr(n, std::vector<double>(n, 1.0));
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      corr[i][j] = corr[j][i] = aligned_correlation(returns[i], returns[j]);
    }
  }

  std::map<std::string, double> score_by_name;
  std::map<std::string, std::size_t> index_of;
  for (std::size_t i = 0; i < n; ++i) {
    double rho = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      if (j != i) rho += corr[i][j];
    }
    rho = n > 1 ? rho / static_cast<double>(n - 1) : 0.0;
    score_by_name[names[i]] = sharpes[i] * (1.0 - rho);
    index_of[names[i]] = i;
  }
  r.scores = score_by_name;

  const auto primary = rank_top_k(score_by_name, k, true);
  std::vector<std::size_t> members;
  for (const auto& s : primary) members.push_back(index_of[s]);
  if (mean_pairwise_correlation(corr, members) <= corr_threshold) {
    r.path = SelectionPath::Primary;
    r.symbols = primary;
    return r;
  }

  // Diversification-first fallback.
  r.path = SelectionPath::Fallback;
  std::map<std::string, double> sharpe_by_name;
  for (std::size_t i = 0; i < n; ++i) sharpe_by_name[names[i]] = sharpes[i];
  std::vector<std::size_t> chosen{index_of[rank_top_k(sharpe_by_name, 1, true).front()]};
  std::vector<bool> used(n, false);
  used[chosen.front()] = true;
  const std::size_t target = std::min<std::size_t>(static_cast<std::size_t>(k), n);
  while (chosen.size() < target) {
    std::size_t best = n;
    double best_corr = std::numeric_limits<double>::infinity();
    for (std::size_t c = 0; c < n; ++c) {  // names are sorted, so ties keep the lower ticker
      if (used[c]) continue;
      double avg = 0.0;
      for (auto s : chosen) avg += corr[c][s];
      avg /= static_cast<double>(chosen.size());
      if (avg < best_corr) {
        best_corr = avg;
        best = c;
      }
    }
    used[best] = true;
    chosen.push_back(best);
  }
  for (auto c : chosen) r.symbols.push_back(names[c]);
  return r;
}

SelectionResult select_symbols(const SelectionSpec& spec, const std::vector<std::string>& candidates,
                               const ViewFactory& views, Date window_start) {
  spec.validate();
  switch (spec.method) {
    case SelectionMethod::RandomK:
      return select_random_k(candidates, spec.k,
                             mix_seed(spec.seed, static_cast<std::uint64_t>(window_start.serial())),
                             window_start);
    case SelectionMethod::Momentum:
      return select_top_momentum(candidates, views, spec.k, spec.momentum_period, spec.skip_period,
                                 window_start);
    case SelectionMethod::VolatilityEffect:
      return select_low_volatility(candidates, views, spec.k, spec.vol_lookback, window_start);
    case SelectionMethod::FinCon:
      return fincon_select(candidates, views, spec.k, window_start, spec.fincon_lookback_years,
                           spec.corr_threshold, spec.risk_free_rate);
  }
  throw Error(ErrorKind::InvalidParameter, "unknown selection method");
}

}  // namespace saber
