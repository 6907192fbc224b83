#include "saber/market_data.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <sstream>
#include <tuple>

#include <json.hpp>

#include "saber/error.hpp"

namespace saber {

namespace {

constexpr std::string_view kPriceHeader = "date,open,high,low,close,adj_close,volume";
constexpr std::string_view kMembershipHeader = "symbol,start_date,end_date,delisted";

void strip_cr(std::string& line) {
  if (!line.empty() && line.back() == '\r') line.pop_back();
}

std::vector<std::string_view> split_csv(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t pos = 0;
  while (true) {
    auto comma = line.find(',', pos);
    if (comma == std::string_view::npos) {
      out.push_back(line.substr(pos));
      break;
    }
    out.push_back(line.substr(pos, comma - pos));
    pos = comma + 1;
  }
  return out;
}

std::optional<double> parse_number(std::string_view s) {
  if (s.empty()) return std::nullopt;
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size() || !std::isfinite(v)) return std::nullopt;
  return v;
}

[[noreturn]] void malformed(std::size_t line, const std::string& why) {
  throw Error(ErrorKind::MalformedRow, "line " + std::to_string(line) + ": " + why);
}

std::ifstream open_or_throw(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::MissingFile, path.string());
  return in;
}

}  // namespace

std::string check_bar(const PriceBar& bar) {
  if (!(bar.open > 0 && bar.high > 0 && bar.low > 0 && bar.close > 0 && bar.adj_close > 0)) {
    return "prices must be strictly positive";
  }
  if (!(bar.volume >= 0)) return "volume must be non-negative";
  if (bar.low > std::min(bar.open, bar.close)) return "low above min(open, close)";
  if (bar.high < std::max(bar.open, bar.close)) return "high below max(open, close)";
  if (bar.low > bar.high) return "low above high";
  return {};
}

// ---------------------------------------------------------------- PriceSeries

PriceSeries::PriceSeries(std::string symbol, std::vector<PriceBar> bars)
    : symbol_(std::move(symbol)), bars_(std::move(bars)) {
  for (std::size_t i = 0; i < bars_.size(); ++i) {
    if (auto why = check_bar(bars_[i]); !why.empty()) {
      throw Error(ErrorKind::MalformedRow, "bar " + std::to_string(i) + " (" + bars_[i].date.iso() +
                                               "): " + why);
    }
    if (i > 0 && !(bars_[i - 1].date < bars_[i].date)) {
      throw Error(ErrorKind::UnsortedOrDuplicateDate, bars_[i].date.iso());
    }
  }
}

std::size_t PriceSeries::count_through(Date d) const {
  auto it = std::upper_bound(bars_.begin(), bars_.end(), d,
                             [](Date lhs, const PriceBar& b) { return lhs < b.date; });
  return static_cast<std::size_t>(it - bars_.begin());
}

std::size_t PriceSeries::first_on_or_after(Date d) const {
  auto it = std::lower_bound(bars_.begin(), bars_.end(), d,
                             [](const PriceBar& b, Date rhs) { return b.date < rhs; });
  return static_cast<std::size_t>(it - bars_.begin());
}

std::optional<std::size_t> PriceSeries::index_of(Date d) const {
  auto i = first_on_or_after(d);
  if (i < bars_.size() && bars_[i].date == d) return i;
  return std::nullopt;
}

std::vector<Date> PriceSeries::dates() const {
  std::vector<Date> out;
  out.reserve(bars_.size());
  for (const auto& b : bars_) out.push_back(b.date);
  return out;
}

PriceSeries parse_price_csv(std::string symbol, std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) malformed(1, "missing header");
  strip_cr(line);
  if (line != kPriceHeader) malformed(1, "header must be '" + std::string(kPriceHeader) + "'");

  std::vector<PriceBar> bars;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    strip_cr(line);
    if (line.empty()) continue;
    auto fields = split_csv(line);
    if (fields.size() != 7) malformed(lineno, "expected 7 fields");
    auto date = Date::parse(fields[0]);
    if (!date) malformed(lineno, "bad date");
    PriceBar bar;
    bar.date = *date;
    double* slots[] = {&bar.open, &bar.high, &bar.low, &bar.close, &bar.adj_close, &bar.volume};
    for (std::size_t k = 0; k < 6; ++k) {
      auto v = parse_number(fields[k + 1]);
      if (!v) malformed(lineno, "bad number in column " + std::to_string(k + 2));
      *slots[k] = *v;
    }
    if (auto why = check_bar(bar); !why.empty()) malformed(lineno, why);
    if (!bars.empty() && !(bars.back().date < bar.date)) {
      throw Error(ErrorKind::UnsortedOrDuplicateDate,
                  bar.date.iso() + " at line " + std::to_string(lineno));
    }
    bars.push_back(bar);
  }
  return PriceSeries(std::move(symbol), std::move(bars));
}

PriceSeries load_price_csv(const std::filesystem::path& path) {
  auto in = open_or_throw(path);
  return parse_price_csv(path.stem().string(), in);
}

// ------------------------------------------------------------------- Universe

Universe::Universe(std::vector<MembershipInterval> intervals) : intervals_(std::move(intervals)) {
  std::sort(intervals_.begin(), intervals_.end(), [](const auto& a, const auto& b) {
    return std::tie(a.symbol, a.start_date) < std::tie(b.symbol, b.start_date);
  });
  for (std::size_t i = 0; i < intervals_.size(); ++i) {
    const auto& cur = intervals_[i];
    if (cur.end_date && *cur.end_date < cur.start_date) {
      throw Error(ErrorKind::DataError, "membership interval for " + cur.symbol + " ends before it starts");
    }
    if (i > 0 && intervals_[i - 1].symbol == cur.symbol) {
      const auto& prev = intervals_[i - 1];
      if (!prev.end_date || cur.start_date <= *prev.end_date) {
        throw Error(ErrorKind::DataError, "overlapping membership intervals for " + cur.symbol);
      }
    }
  }
}

std::vector<std::string> Universe::constituents_at(Date date) const {
  std::vector<std::string> out;
  for (const auto& iv : intervals_) {
    if (iv.contains(date) && (out.empty() || out.back() != iv.symbol)) out.push_back(iv.symbol);
  }
  return out;
}

std::vector<std::string> Universe::symbols() const {
  std::vector<std::string> out;
  for (const auto& iv : intervals_) {
    if (out.empty() || out.back() != iv.symbol) out.push_back(iv.symbol);
  }
  return out;
}

bool Universe::has_delisted() const {
  return std::any_of(intervals_.begin(), intervals_.end(), [](const auto& iv) { return iv.delisted; });
}

Universe parse_membership_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) malformed(1, "missing header");
  strip_cr(line);
  if (line != kMembershipHeader) {
    malformed(1, "header must be '" + std::string(kMembershipHeader) + "'");
  }
  std::vector<MembershipInterval> intervals;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    strip_cr(line);
    if (line.empty()) continue;
    auto f = split_csv(line);
    if (f.size() != 4) malformed(lineno, "expected 4 fields");
    if (f[0].empty()) malformed(lineno, "empty symbol");
    MembershipInterval iv;
    iv.symbol = std::string(f[0]);
    auto start = Date::parse(f[1]);
    if (!start) malformed(lineno, "bad start_date");
    iv.start_date = *start;
    if (!f[2].empty()) {
      auto end = Date::parse(f[2]);
      if (!end) malformed(lineno, "bad end_date");
      iv.end_date = *end;
    }
    if (f[3] == "true") {
      iv.delisted = true;
    } else if (f[3] != "false") {
      malformed(lineno, "delisted must be true or false");
    }
    intervals.push_back(std::move(iv));
  }
  return Universe(std::move(intervals));
}

Universe load_membership_csv(const std::filesystem::path& path) {
  auto in = open_or_throw(path);
  return parse_membership_csv(in);
}

// ---------------------------------------------------------------------- Texts

std::string_view to_string(TextKind kind) {
  switch (kind) {
    case TextKind::News: return "news";
    case TextKind::Filing10K: return "filing_10k";
    case TextKind::Filing10Q: return "filing_10q";
  }
  return "news";
}

std::optional<TextKind> parse_text_kind(std::string_view s) {
  if (s == "news") return TextKind::News;
  if (s == "filing_10k") return TextKind::Filing10K;
  if (s == "filing_10q") return TextKind::Filing10Q;
  return std::nullopt;
}

std::vector<TextRecord> parse_texts_jsonl(std::istream& in) {
  std::vector<TextRecord> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    strip_cr(line);
    if (line.empty()) continue;
    auto j = nlohmann::json::parse(line, nullptr, false);
    if (j.is_discarded() || !j.is_object()) malformed(lineno, "not a JSON object");
    for (const char* key : {"symbol", "date", "kind", "text"}) {
      if (!j.contains(key) || !j[key].is_string()) malformed(lineno, std::string("missing string key '") + key + "'");
    }
    TextRecord rec;
    rec.symbol = j["symbol"].get<std::string>();
    auto date = Date::parse(j["date"].get<std::string>());
    if (!date) malformed(lineno, "bad date");
    rec.date = *date;
    auto kind = parse_text_kind(j["kind"].get<std::string>());
    if (!kind) malformed(lineno, "kind must be news, filing_10k or filing_10q");
    rec.kind = *kind;
    rec.text = j["text"].get<std::string>();
    out.push_back(std::move(rec));
  }
  return out;
}

std::vector<TextRecord> load_texts_jsonl(const std::filesystem::path& path) {
  auto in = open_or_throw(path);
  return parse_texts_jsonl(in);
}

// ------------------------------------------------------------ PointInTimeView

PointInTimeView::PointInTimeView(std::shared_ptr<const PriceSeries> series,
                                 std::shared_ptr<const TextList> texts, Date cutoff)
    : series_(std::move(series)), texts_(std::move(texts)), cutoff_(cutoff) {
  visible_ = series_->count_through(cutoff_);
}

void PointInTimeView::guard(Date probe) const {
  if (cutoff_ < probe) {
    throw Error(ErrorKind::LookAheadViolation,
                symbol() + ": probe " + probe.iso() + " after cutoff " + cutoff_.iso());
  }
}

const PriceBar& PointInTimeView::last() const {
  if (visible_ == 0) {
    throw Error(ErrorKind::InsufficientHistory, symbol() + ": no bars on or before " + cutoff_.iso());
  }
  return (*series_)[visible_ - 1];
}

std::span<const PriceBar> PointInTimeView::window_bars(std::size_t n) const {
  if (n > visible_) {
    throw Error(ErrorKind::InsufficientHistory, symbol() + ": need " + std::to_string(n) +
                                                    " bars, " + std::to_string(visible_) +
                                                    " available at " + cutoff_.iso());
  }
  return series_->bars().subspan(visible_ - n, n);
}

std::vector<double> PointInTimeView::adj_closes(std::size_t n) const {
  auto bars = window_bars(n);
  std::vector<double> out;
  out.reserve(n);
  for (const auto& b : bars) out.push_back(b.adj_close);
  return out;
}

const PriceBar& PointInTimeView::bar_at(Date date) const {
  guard(date);
  auto idx = series_->index_of(date);
  if (!idx) throw Error(ErrorKind::DateNotInCalendar, symbol() + ": no bar on " + date.iso());
  return (*series_)[*idx];
}

std::span<const PriceBar> PointInTimeView::bars_through(Date date) const {
  guard(date);
  return series_->bars().first(series_->count_through(date));
}

std::span<const PriceBar> PointInTimeView::bars_between(Date from, Date to) const {
  guard(to);
  guard(from);
  if (to < from) return {};
  auto lo = series_->first_on_or_after(from);
  auto hi = series_->count_through(to);
  return series_->bars().subspan(lo, hi - lo);
}

std::vector<TextRecord> PointInTimeView::texts(const std::set<TextKind>& kinds) const {
  std::vector<TextRecord> out;
  if (!texts_) return out;
  for (const auto& t : *texts_) {
    if (cutoff_ < t.date) break;
    if (kinds.count(t.kind)) out.push_back(t);
  }
  return out;
}

std::vector<TextRecord> PointInTimeView::texts_through(Date date,
                                                       const std::set<TextKind>& kinds) const {
  guard(date);
  return narrowed(date).texts(kinds);
}

PointInTimeView PointInTimeView::narrowed(Date earlier_cutoff) const {
  guard(earlier_cutoff);
  return PointInTimeView(series_, texts_, earlier_cutoff);
}

// ----------------------------------------------------------------- MarketData

MarketData::MarketData(std::vector<PriceSeries> series, Universe universe,
                       std::vector<TextRecord> texts)
    : universe_(std::move(universe)) {
  for (auto& s : series) {
    auto key = s.symbol();
    if (series_.count(key)) throw Error(ErrorKind::DataError, "duplicate series for " + key);
    series_.emplace(std::move(key), std::make_shared<const PriceSeries>(std::move(s)));
  }
  std::stable_sort(texts.begin(), texts.end(), [](const auto& a, const auto& b) {
    return std::tie(a.symbol, a.date) < std::tie(b.symbol, b.date);
  });
  std::map<std::string, TextList, std::less<>> grouped;
  for (auto& t : texts) grouped[t.symbol].push_back(std::move(t));
  for (auto& [sym, list] : grouped) {
    texts_.emplace(sym, std::make_shared<const TextList>(std::move(list)));
  }
}

bool MarketData::has_symbol(std::string_view symbol) const { return series_.find(symbol) != series_.end(); }

std::shared_ptr<const PriceSeries> MarketData::series_ptr(std::string_view symbol) const {
  auto it = series_.find(symbol);
  if (it == series_.end()) throw Error(ErrorKind::UnknownSymbol, std::string(symbol));
  return it->second;
}

const PriceSeries& MarketData::series(std::string_view symbol) const { return *series_ptr(symbol); }

std::vector<std::string> MarketData::symbols() const {
  std::vector<std::string> out;
  for (const auto& [k, _] : series_) out.push_back(k);
  return out;
}

PointInTimeView MarketData::view_until(std::string_view symbol, Date cutoff) const {
  auto series = series_ptr(symbol);
  std::shared_ptr<const TextList> texts;
  if (auto it = texts_.find(symbol); it != texts_.end()) texts = it->second;
  return PointInTimeView(std::move(series), std::move(texts), cutoff);
}

std::vector<TextRecord> MarketData::texts_until(std::string_view symbol, Date cutoff,
                                                const std::set<TextKind>& kinds) const {
  std::vector<TextRecord> out;
  auto it = texts_.find(symbol);
  if (it == texts_.end()) return out;
  for (const auto& t : *it->second) {
    if (cutoff < t.date) break;
    if (kinds.count(t.kind)) out.push_back(t);
  }
  return out;
}

MarketData load_market_data(const std::filesystem::path& prices_dir,
                            const std::optional<std::filesystem::path>& membership,
                            const std::optional<std::filesystem::path>& texts) {
  if (!std::filesystem::is_directory(prices_dir)) {
    throw Error(ErrorKind::MissingFile, prices_dir.string() + " is not a directory");
  }
  std::vector<std::filesystem::path> files;
  for (const auto& entry : std::filesystem::directory_iterator(prices_dir)) {
    if (entry.is_regular_file() && entry.path().extension() == ".csv") files.push_back(entry.path());
  }
  std::sort(files.begin(), files.end());
  std::vector<PriceSeries> series;
  series.reserve(files.size());
  for (const auto& f : files) {
    try {
      series.push_back(load_price_csv(f));
    } catch (const Error& e) {
      throw Error(e.kind(), f.filename().string() + ": " + e.what());
    }
  }
  Universe universe = membership ? load_membership_csv(*membership) : Universe{};
  std::vector<TextRecord> records = texts ? load_texts_jsonl(*texts) : std::vector<TextRecord>{};
  return MarketData(std::move(series), std::move(universe), std::move(records));
}

}  // namespace saber
