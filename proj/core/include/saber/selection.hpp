#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <random>
#include <string>
#include <string_view>
#include <vector>

#include "saber/date.hpp"
#include "saber/market_data.hpp"

namespace saber {

enum class SelectionMethod { RandomK, Momentum, VolatilityEffect, FinCon };

std::string_view to_string(SelectionMethod m);
std::optional<SelectionMethod> parse_selection_method(std::string_view s);

struct SelectionSpec {
  SelectionMethod method = SelectionMethod::RandomK;
  int k = 5;
  std::uint64_t seed = 0;
  int momentum_period = 100;
  int skip_period = 21;
  int vol_lookback = 21;
  int fincon_lookback_years = 2;
  double corr_threshold = 0.7;
  double risk_free_rate = 0.03;

  /// Throws InvalidParameter.
  void validate() const;
};

/// Which branch produced a FinCon selection.
enum class SelectionPath { Ranked, Primary, Fallback };

std::string_view to_string(SelectionPath p);

struct SelectionResult {
  Date window_start;
  SelectionMethod method = SelectionMethod::RandomK;
  std::vector<std::string> symbols;
  std::map<std::string, double> scores;
  SelectionPath path = SelectionPath::Ranked;
  /// Candidates left out of the pool, with the reason.
  std::map<std::string, std::string> dropped;
};

/// Returns a view of `symbol` whose cutoff is the last trading day before
/// the selection date. Throws UnknownSymbol when no data exists.
using ViewFactory = std::function<PointInTimeView(const std::string& symbol)>;

// ------------------------------------------------------------ deterministic RNG

/// splitmix64 step; used to derive per-window seeds.
std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t salt);

/// Uniform draw in [0, bound) from std::mt19937_64 output by rejection, so
/// results do not depend on the standard library's distributions.
class SeededRng {
 public:
  explicit SeededRng(std::uint64_t seed);
  std::uint64_t next();
  std::uint64_t below(std::uint64_t bound);

 private:
  std::mt19937_64 engine_;
};

// ---------------------------------------------------------------- selectors

/// min(k, |candidates|) symbols drawn without replacement from the sorted
/// candidate list (partial Fisher-Yates over SeededRng).
SelectionResult select_random_k(std::vector<std::string> candidates, int k, std::uint64_t seed,
                                Date window_start = {});

/// P(t−skip)/P(t−momentum_period) − 1 with t the view's last bar.
double momentum_score(const PointInTimeView& view, int momentum_period = 100, int skip_period = 21);

/// Sample std of the overlapping 5-day log returns ln(P_t/P_{t−5}) for each
/// of the last `lookback` days.
double weekly_log_volatility(const PointInTimeView& view, int lookback = 21);

/// Top-k by score; descending or ascending, ties broken by ticker ascending.
std::vector<std::string> rank_top_k(const std::map<std::string, double>& scores, int k,
                                    bool descending);

SelectionResult select_top_momentum(const std::vector<std::string>& candidates,
                                    const ViewFactory& views, int k, int momentum_period = 100,
                                    int skip_period = 21, Date window_start = {});

SelectionResult select_low_volatility(const std::vector<std::string>& candidates,
                                      const ViewFactory& views, int k, int lookback = 21,
                                      Date window_start = {});

/// Mean of the off-diagonal entries of `corr` restricted to `members`.
double mean_pairwise_correlation(const std::vector<std::vector<double>>& corr,
                                 const std::vector<std::size_t>& members);

SelectionResult fincon_select(const std::vector<std::string>& candidates, const ViewFactory& views,
                              int k, Date window_start, int lookback_years = 2,
                              double corr_threshold = 0.7, double rf_annual = 0.03);

/// Dispatches on spec.method. Random-K uses mix_seed(spec.seed, window_start).
SelectionResult select_symbols(const SelectionSpec& spec, const std::vector<std::string>& candidates,
                               const ViewFactory& views, Date window_start);

}  // namespace saber
