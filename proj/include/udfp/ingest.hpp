#ifndef UDFP_INGEST_HPP
#define UDFP_INGEST_HPP

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <cstddef>
#include <cstdio>
#include <fstream>
#include <istream>
#include <limits>
#include <map>
#include <optional>
#include <ostream>
#include <span>
#include <sstream>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "udfp/error.hpp"
#include "udfp/wealth.hpp"

namespace udfp {

using Date = std::chrono::sys_days;

/// Strict YYYY-MM-DD.
inline std::optional<Date> parse_date(std::string_view s) {
  if (s.size() != 10 || s[4] != '-' || s[7] != '-') return std::nullopt;
  int y = 0;
  unsigned mo = 0, d = 0;
  auto field = [&](std::size_t pos, std::size_t len, auto& out) {
    auto [p, ec] = std::from_chars(s.data() + pos, s.data() + pos + len, out);
    return ec == std::errc() && p == s.data() + pos + len;
  };
  if (!field(0, 4, y) || !field(5, 2, mo) || !field(8, 2, d)) return std::nullopt;
  const std::chrono::year_month_day ymd{std::chrono::year{y}, std::chrono::month{mo}, std::chrono::day{d}};
  if (!ymd.ok()) return std::nullopt;
  return Date(ymd);
}

inline std::string format_date(Date d) {
  const std::chrono::year_month_day ymd(d);
  char buf[16];
  std::snprintf(buf, sizeof buf, "%04d-%02u-%02u", static_cast<int>(ymd.year()), static_cast<unsigned>(ymd.month()),
                static_cast<unsigned>(ymd.day()));
  return buf;
}

/// Monday of the ISO week containing d; equal keys means same ISO week.
inline Date iso_week_start(Date d) {
  const std::chrono::weekday wd(d);
  return d - std::chrono::days(wd.iso_encoding() - 1);
}

/// Shortest decimal text that parses back to the same double.
inline std::string format_double(double v) {
  char buf[64];
  auto [p, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, p);
}

/**
 * Dated price matrix, dates x tickers. A missing entry (before listing, or
 * a gap) is stored as NaN; present entries are finite and > 0.
 */
class PricePanel {
 public:
  PricePanel() = default;

  PricePanel(std::vector<Date> dates, std::vector<std::string> tickers, std::vector<double> prices)
      : dates_(std::move(dates)), tickers_(std::move(tickers)), prices_(std::move(prices)) {
    detail::require(prices_.size() == dates_.size() * tickers_.size(), ErrorCode::invalid_argument,
                    "price matrix size does not match dates x tickers");
    for (std::size_t i = 1; i < dates_.size(); ++i) {
      detail::require(dates_[i - 1] < dates_[i], ErrorCode::invalid_argument, "dates must be strictly increasing");
    }
    std::vector<std::string> sorted = tickers_;
    std::sort(sorted.begin(), sorted.end());
    detail::require(std::adjacent_find(sorted.begin(), sorted.end()) == sorted.end(), ErrorCode::invalid_argument,
                    "tickers must be unique");
    for (double p : prices_) {
      detail::require(std::isnan(p) || (std::isfinite(p) && p > 0.0), ErrorCode::invalid_argument,
                      "present prices must be finite and > 0");
    }
  }

  static double missing() noexcept { return std::numeric_limits<double>::quiet_NaN(); }

  std::size_t rows() const noexcept { return dates_.size(); }
  std::size_t assets() const noexcept { return tickers_.size(); }
  const std::vector<Date>& dates() const noexcept { return dates_; }
  const std::vector<std::string>& tickers() const noexcept { return tickers_; }
  Date date(std::size_t i) const { return dates_[i]; }
  const std::string& ticker(std::size_t j) const { return tickers_[j]; }
  double price(std::size_t i, std::size_t j) const { return prices_[i * assets() + j]; }
  bool has(std::size_t i, std::size_t j) const { return !std::isnan(price(i, j)); }
  std::span<const double> row(std::size_t i) const {
    return std::span<const double>(prices_).subspan(i * assets(), assets());
  }
  std::span<const double> matrix() const noexcept { return prices_; }

  bool complete() const {
    return std::none_of(prices_.begin(), prices_.end(), [](double p) { return std::isnan(p); });
  }

  PricePanel select_tickers(std::span<const std::size_t> keep) const {
    std::vector<std::string> t;
    std::vector<double> p;
    p.reserve(rows() * keep.size());
    for (std::size_t j : keep) t.push_back(tickers_[j]);
    for (std::size_t i = 0; i < rows(); ++i) {
      for (std::size_t j : keep) p.push_back(price(i, j));
    }
    return PricePanel(dates_, std::move(t), std::move(p));
  }

  /// Rows [begin, end).
  PricePanel slice_rows(std::size_t begin, std::size_t end) const {
    end = std::min(end, rows());
    begin = std::min(begin, end);
    std::vector<Date> d(dates_.begin() + static_cast<std::ptrdiff_t>(begin),
                        dates_.begin() + static_cast<std::ptrdiff_t>(end));
    std::vector<double> p(prices_.begin() + static_cast<std::ptrdiff_t>(begin * assets()),
                          prices_.begin() + static_cast<std::ptrdiff_t>(end * assets()));
    return PricePanel(std::move(d), tickers_, std::move(p));
  }

  /// Bitwise equality, treating missing entries as equal.
  friend bool operator==(const PricePanel& a, const PricePanel& b) {
    if (a.dates_ != b.dates_ || a.tickers_ != b.tickers_ || a.prices_.size() != b.prices_.size()) return false;
    for (std::size_t i = 0; i < a.prices_.size(); ++i) {
      const double x = a.prices_[i], y = b.prices_[i];
      if (std::isnan(x) != std::isnan(y)) return false;
      if (!std::isnan(x) && x != y) return false;
    }
    return true;
  }

 private:
  std::vector<Date> dates_;
  std::vector<std::string> tickers_;
  std::vector<double> prices_;
};

/**
 * Parses the long CSV format `date,ticker,price`. Ticker order is order of
 * first appearance; rows may come in any order; (date, ticker) pairs absent
 * from the file become missing entries.
 */
inline PricePanel parse_prices(std::istream& in) {
  std::string line;
  std::size_t lineno = 0;
  auto strip_cr = [](std::string& s) {
    if (!s.empty() && s.back() == '\r') s.pop_back();
  };
  if (!std::getline(in, line)) throw DataError(0, "empty file");
  ++lineno;
  strip_cr(line);
  if (line.size() >= 3 && line.compare(0, 3, "\xEF\xBB\xBF") == 0) line.erase(0, 3);
  if (line != "date,ticker,price") throw DataError(1, "expected header 'date,ticker,price', got '" + line + "'");

  struct Row {
    Date date;
    std::size_t ticker;
    double price;
  };
  std::vector<Row> rows;
  std::vector<std::string> tickers;
  std::unordered_map<std::string, std::size_t> ticker_index;
  std::map<std::pair<Date, std::size_t>, std::size_t> seen;

  while (std::getline(in, line)) {
    ++lineno;
    strip_cr(line);
    if (line.empty()) continue;
    const auto c1 = line.find(',');
    const auto c2 = c1 == std::string::npos ? std::string::npos : line.find(',', c1 + 1);
    if (c2 == std::string::npos || line.find(',', c2 + 1) != std::string::npos) {
      throw DataError(lineno, "expected 3 comma-separated fields");
    }
    const std::string_view text(line);
    const auto date = parse_date(text.substr(0, c1));
    if (!date) throw DataError(lineno, "bad date '" + std::string(text.substr(0, c1)) + "'");
    const std::string ticker(text.substr(c1 + 1, c2 - c1 - 1));
    if (ticker.empty()) throw DataError(lineno, "empty ticker");
    const std::string_view ptext = text.substr(c2 + 1);
    double price = 0.0;
    auto [p, ec] = std::from_chars(ptext.data(), ptext.data() + ptext.size(), price);
    if (ptext.empty() || ec != std::errc() || p != ptext.data() + ptext.size()) {
      throw DataError(lineno, "bad price '" + std::string(ptext) + "'");
    }
    if (!std::isfinite(price) || price <= 0.0) {
      throw DataError(lineno, "price must be finite and > 0, got '" + std::string(ptext) + "'");
    }
    auto [it, inserted] = ticker_index.try_emplace(ticker, tickers.size());
    if (inserted) tickers.push_back(ticker);
    auto [dup, fresh] = seen.try_emplace({*date, it->second}, lineno);
    if (!fresh) {
      throw DataError(lineno, "duplicate row for " + format_date(*date) + "," + ticker + " (first at line " +
                                  std::to_string(dup->second) + ")");
    }
    rows.push_back({*date, it->second, price});
  }
  if (rows.empty()) throw DataError(0, "file has no price rows");

  std::vector<Date> dates;
  dates.reserve(rows.size());
  for (const Row& r : rows) dates.push_back(r.date);
  std::sort(dates.begin(), dates.end());
  dates.erase(std::unique(dates.begin(), dates.end()), dates.end());
  std::vector<double> prices(dates.size() * tickers.size(), PricePanel::missing());
  for (const Row& r : rows) {
    const auto i = static_cast<std::size_t>(std::lower_bound(dates.begin(), dates.end(), r.date) - dates.begin());
    prices[i * tickers.size() + r.ticker] = r.price;
  }
  return PricePanel(std::move(dates), std::move(tickers), std::move(prices));
}

inline PricePanel load_prices(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError(0, "cannot open '" + path + "'");
  return parse_prices(in);
}

/// Writes the long CSV format, ticker-major, so reloading preserves ticker order.
inline void write_prices(const PricePanel& panel, std::ostream& out) {
  out << "date,ticker,price\n";
  for (std::size_t j = 0; j < panel.assets(); ++j) {
    for (std::size_t i = 0; i < panel.rows(); ++i) {
      if (!panel.has(i, j)) continue;
      out << format_date(panel.date(i)) << ',' << panel.ticker(j) << ',' << format_double(panel.price(i, j)) << '\n';
    }
  }
}

inline std::string to_csv(const PricePanel& panel) {
  std::ostringstream os;
  write_prices(panel, os);
  return os.str();
}

namespace detail {

inline double median(std::vector<double>& v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 == 1 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

}  // namespace detail

/**
 * One row per ISO week: each ticker's median present price that week
 * (mean of the middle pair for even counts), stamped with the week's last
 * date in the panel. Tickers without data that week stay missing.
 */
inline PricePanel resample_weekly_median(const PricePanel& panel) {
  std::vector<Date> dates;
  std::vector<double> prices;
  std::vector<double> bucket;
  std::size_t i = 0;
  while (i < panel.rows()) {
    const Date week = iso_week_start(panel.date(i));
    std::size_t end = i;
    while (end < panel.rows() && iso_week_start(panel.date(end)) == week) ++end;
    dates.push_back(panel.date(end - 1));
    for (std::size_t j = 0; j < panel.assets(); ++j) {
      bucket.clear();
      for (std::size_t r = i; r < end; ++r) {
        if (panel.has(r, j)) bucket.push_back(panel.price(r, j));
      }
      prices.push_back(bucket.empty() ? PricePanel::missing() : detail::median(bucket));
    }
    i = end;
  }
  return PricePanel(std::move(dates), panel.tickers(), std::move(prices));
}

struct DroppedTicker {
  std::string ticker;
  std::string reason;  // "history" or "min price"
};

struct FilterResult {
  PricePanel panel;
  std::vector<DroppedTicker> dropped;
};

/// Keeps tickers with >= min_history present rows and minimum price >= min_price, in order.
inline FilterResult filter_universe(const PricePanel& panel, std::size_t min_history = 4000, double min_price = 1.0) {
  FilterResult res;
  std::vector<std::size_t> keep;
  for (std::size_t j = 0; j < panel.assets(); ++j) {
    std::size_t count = 0;
    double lowest = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < panel.rows(); ++i) {
      if (!panel.has(i, j)) continue;
      ++count;
      lowest = std::min(lowest, panel.price(i, j));
    }
    if (count < min_history) {
      res.dropped.push_back({panel.ticker(j), "history"});
    } else if (lowest < min_price) {
      res.dropped.push_back({panel.ticker(j), "min price"});
    } else {
      keep.push_back(j);
    }
  }
  if (keep.size() < 2) {
    std::string why;
    for (const auto& d : res.dropped) why += (why.empty() ? "" : ", ") + d.ticker + ": " + d.reason;
    throw DataError(0, "universe has " + std::to_string(keep.size()) +
                           " tickers after filtering; need at least 2 (dropped " + why + ")");
  }
  res.panel = panel.select_tickers(keep);
  return res;
}

/**
 * Restricts to [start, end] (inclusive). Without a start, the window opens
 * at the first date where every ticker has a price. Any missing entry
 * inside the window is an error naming its date and ticker.
 */
inline PricePanel backtest_window(const PricePanel& panel, std::optional<Date> start = std::nullopt,
                                  std::optional<Date> end = std::nullopt) {
  std::size_t begin = 0;
  if (start) {
    begin = static_cast<std::size_t>(std::lower_bound(panel.dates().begin(), panel.dates().end(), *start) -
                                     panel.dates().begin());
  } else {
    while (begin < panel.rows()) {
      bool full = true;
      for (std::size_t j = 0; j < panel.assets() && full; ++j) full = panel.has(begin, j);
      if (full) break;
      ++begin;
    }
  }
  std::size_t stop = panel.rows();
  if (end) {
    stop = static_cast<std::size_t>(std::upper_bound(panel.dates().begin(), panel.dates().end(), *end) -
                                    panel.dates().begin());
  }
  PricePanel out = panel.slice_rows(begin, stop);
  for (std::size_t i = 0; i < out.rows(); ++i) {
    for (std::size_t j = 0; j < out.assets(); ++j) {
      if (!out.has(i, j)) {
        throw DataError(0, "missing price for " + out.ticker(j) + " on " + format_date(out.date(i)) +
                               " inside the backtest window");
      }
    }
  }
  return out;
}

/// x_t[j] = p_t[j] / p_{t-1}[j] for t = 1..rows-1.
inline std::vector<RelativePrice> to_relative_prices(const PricePanel& panel) {
  std::vector<RelativePrice> out;
  if (panel.rows() < 2) return out;
  out.reserve(panel.rows() - 1);
  for (std::size_t i = 1; i < panel.rows(); ++i) {
    std::vector<double> x(panel.assets());
    for (std::size_t j = 0; j < x.size(); ++j) {
      for (std::size_t r : {i - 1, i}) {
        if (!panel.has(r, j)) {
          throw DataError(0, "missing price for " + panel.ticker(j) + " on " + format_date(panel.date(r)));
        }
      }
      x[j] = panel.price(i, j) / panel.price(i - 1, j);
    }
    out.emplace_back(std::move(x));
  }
  return out;
}

}  // namespace udfp

#endif  // UDFP_INGEST_HPP
