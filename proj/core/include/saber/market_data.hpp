#pragma once

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "saber/date.hpp"

namespace saber {

struct PriceBar {
  Date date;
  double open = 0.0;
  double high = 0.0;
  double low = 0.0;
  double close = 0.0;
  double adj_close = 0.0;
  double volume = 0.0;

  friend bool operator==(const PriceBar&, const PriceBar&) = default;
};

/// Empty string when the bar satisfies the OHLC invariants, else the reason.
std::string check_bar(const PriceBar& bar);

/// Daily bars for one symbol, strictly ascending by date.
class PriceSeries {
 public:
  PriceSeries() = default;
  /// Validates every bar and the ordering; throws MalformedRow / UnsortedOrDuplicateDate.
  PriceSeries(std::string symbol, std::vector<PriceBar> bars);

  const std::string& symbol() const { return symbol_; }
  std::span<const PriceBar> bars() const { return bars_; }
  std::size_t size() const { return bars_.size(); }
  bool empty() const { return bars_.empty(); }
  const PriceBar& operator[](std::size_t i) const { return bars_[i]; }

  /// Number of bars dated on or before `d`.
  std::size_t count_through(Date d) const;
  /// Index of the first bar dated on or after `d` (== size() when none).
  std::size_t first_on_or_after(Date d) const;
  std::optional<std::size_t> index_of(Date d) const;
  std::vector<Date> dates() const;

  friend bool operator==(const PriceSeries&, const PriceSeries&) = default;

 private:
  std::string symbol_;
  std::vector<PriceBar> bars_;
};

PriceSeries parse_price_csv(std::string symbol, std::istream& in);
/// Symbol is taken from the file stem (`<TICKER>.csv`).
PriceSeries load_price_csv(const std::filesystem::path& path);

struct MembershipInterval {
  std::string symbol;
  Date start_date;
  std::optional<Date> end_date;
  bool delisted = false;

  bool contains(Date d) const { return start_date <= d && (!end_date || d <= *end_date); }
};

/// Point-in-time index membership, including delisted names.
class Universe {
 public:
  Universe() = default;
  explicit Universe(std::vector<MembershipInterval> intervals);

  /// Sorted tickers with an interval containing `date`.
  std::vector<std::string> constituents_at(Date date) const;
  std::span<const MembershipInterval> intervals() const { return intervals_; }
  std::vector<std::string> symbols() const;
  bool has_delisted() const;
  bool empty() const { return intervals_.empty(); }

 private:
  std::vector<MembershipInterval> intervals_;  // sorted by (symbol, start_date)
};

Universe parse_membership_csv(std::istream& in);
Universe load_membership_csv(const std::filesystem::path& path);

enum class TextKind { News, Filing10K, Filing10Q };

std::string_view to_string(TextKind kind);
std::optional<TextKind> parse_text_kind(std::string_view s);

struct TextRecord {
  std::string symbol;
  Date date;
  TextKind kind = TextKind::News;
  std::string text;

  friend bool operator==(const TextRecord&, const TextRecord&) = default;
};

std::vector<TextRecord> parse_texts_jsonl(std::istream& in);
std::vector<TextRecord> load_texts_jsonl(const std::filesystem::path& path);

inline const std::set<TextKind> kAllTextKinds{TextKind::News, TextKind::Filing10K,
                                              TextKind::Filing10Q};

using TextList = std::vector<TextRecord>;

/// Read-only lens over one symbol's data. Nothing dated after `cutoff()` is
/// reachable through it; probing a later date raises LookAheadViolation.
class PointInTimeView {
 public:
  PointInTimeView(std::shared_ptr<const PriceSeries> series,
                  std::shared_ptr<const TextList> texts, Date cutoff);

  const std::string& symbol() const { return series_->symbol(); }
  Date cutoff() const { return cutoff_; }

  /// Bars dated on or before the cutoff.
  std::size_t available() const { return visible_; }
  std::span<const PriceBar> history() const { return series_->bars().first(visible_); }
  const PriceBar& last() const;

  /// Last `n` bars at or before the cutoff, in date order.
  std::span<const PriceBar> window_bars(std::size_t n) const;
  /// Adjusted closes of window_bars(n).
  std::vector<double> adj_closes(std::size_t n) const;

  const PriceBar& bar_at(Date date) const;
  std::span<const PriceBar> bars_through(Date date) const;
  std::span<const PriceBar> bars_between(Date from, Date to) const;

  std::vector<TextRecord> texts(const std::set<TextKind>& kinds = kAllTextKinds) const;
  std::vector<TextRecord> texts_through(Date date,
                                        const std::set<TextKind>& kinds = kAllTextKinds) const;

  /// Same source, earlier cutoff.
  PointInTimeView narrowed(Date earlier_cutoff) const;

 private:
  void guard(Date probe) const;

  std::shared_ptr<const PriceSeries> series_;
  std::shared_ptr<const TextList> texts_;
  Date cutoff_;
  std::size_t visible_ = 0;
};

/// Write-once store of prices, membership and optional texts.
class MarketData {
 public:
  MarketData() = default;
  MarketData(std::vector<PriceSeries> series, Universe universe, std::vector<TextRecord> texts = {});

  bool has_symbol(std::string_view symbol) const;
  const PriceSeries& series(std::string_view symbol) const;
  std::vector<std::string> symbols() const;
  const Universe& universe() const { return universe_; }

  PointInTimeView view_until(std::string_view symbol, Date cutoff) const;
  std::vector<TextRecord> texts_until(std::string_view symbol, Date cutoff,
                                      const std::set<TextKind>& kinds = kAllTextKinds) const;

 private:
  std::shared_ptr<const PriceSeries> series_ptr(std::string_view symbol) const;

  std::map<std::string, std::shared_ptr<const PriceSeries>, std::less<>> series_;
  std::map<std::string, std::shared_ptr<const TextList>, std::less<>> texts_;
  Universe universe_;
};

/// Loads every `*.csv` in `prices_dir`, plus optional membership and texts.
MarketData load_market_data(const std::filesystem::path& prices_dir,
                            const std::optional<std::filesystem::path>& membership,
                            const std::optional<std::filesystem::path>& texts);

}  // namespace saber
