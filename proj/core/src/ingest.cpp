#include "tsc/ingest.hpp"

#include <chrono>
#include <cstdio>
#include <cmath>
#include <set>
#include <unordered_set>

#include "tsc/error.hpp"
#include "tsc/text.hpp"

namespace tsc {

namespace {

constexpr std::string_view kHeader = "ticker,date,adj_close";

std::string_view strip_bom(std::string_view s) {
  constexpr std::string_view bom = "\xEF\xBB\xBF";
  if (s.starts_with(bom)) s.remove_prefix(bom.size());
  return s;
}

bool all_digits(std::string_view s) {
  for (char c : s) {
    if (c < '0' || c > '9') return false;
  }
  return !s.empty();
}

}  // namespace

std::optional<Date> Date::try_parse(std::string_view iso) noexcept {
  iso = text::trim(iso);
  if (iso.size() != 10 || iso[4] != '-' || iso[7] != '-') return std::nullopt;
  const auto y = iso.substr(0, 4), m = iso.substr(5, 2), d = iso.substr(8, 2);
  if (!all_digits(y) || !all_digits(m) || !all_digits(d)) return std::nullopt;
  Date out{static_cast<int>(*text::parse_int(y)), static_cast<int>(*text::parse_int(m)),
           static_cast<int>(*text::parse_int(d))};
  const std::chrono::year_month_day ymd{std::chrono::year{out.year},
                                        std::chrono::month{static_cast<unsigned>(out.month)},
                                        std::chrono::day{static_cast<unsigned>(out.day)}};
  if (!ymd.ok()) return std::nullopt;
  return out;
}

Date Date::parse(std::string_view iso) {
  if (auto d = try_parse(iso)) return *d;
  throw Error(ErrorKind::FormatError, "invalid ISO-8601 date '" + std::string(iso) + "'");
}

std::string Date::to_string() const {
  char buf[16];
  std::snprintf(buf, sizeof buf, "%04d-%02d-%02d", year, month, day);
  return buf;
}

void PriceSeries::validate() const {
  if (ticker.empty()) throw Error(ErrorKind::FormatError, "empty ticker symbol");
  if (dates.size() != closes.size()) {
    throw Error(ErrorKind::FormatError, ticker + ": dates and closes differ in length");
  }
  if (closes.size() < 2) throw Error(ErrorKind::TooShort, ticker + ": fewer than 2 prices");
  for (std::size_t i = 0; i < closes.size(); ++i) {
    if (!(closes[i] > 0.0) || !std::isfinite(closes[i])) {
      throw Error(ErrorKind::NonPositivePrice, ticker + ": non-positive close");
    }
    if (i > 0 && !(dates[i - 1] < dates[i])) {
      throw Error(ErrorKind::FormatError, ticker + ": dates not strictly increasing");
    }
  }
}

void PriceTable::insert(PriceSeries series) {
  series.validate();
  auto key = series.ticker;
  entries_.insert_or_assign(std::move(key), std::move(series));
}

std::vector<std::string> PriceTable::tickers() const {
  std::vector<std::string> out;
  out.reserve(entries_.size());
  for (const auto& [ticker, _] : entries_) out.push_back(ticker);
  return out;
}

std::string FilePriceSource::read_csv() const { return text::read_file(path_); }

std::vector<std::string> parse_ticker_list(std::string_view text) {
  std::vector<std::string> out;
  std::unordered_set<std::string> seen;
  for (auto line : text::lines(strip_bom(text))) {
    for (auto field : text::split(line, ',')) {
      const auto symbol = text::trim(field);
      if (symbol.empty()) continue;
      std::string s(symbol);
      if (seen.insert(s).second) out.push_back(std::move(s));
    }
  }
  if (out.empty()) throw Error(ErrorKind::EmptyList, "no ticker symbols found");
  return out;
}

LoadResult parse_price_table(std::string_view csv, const LoadOptions& options) {
  const auto rows = text::lines(strip_bom(csv));
  if (rows.empty() || text::trim(rows.front()) != kHeader) {
    throw Error(ErrorKind::FormatError,
                "header must be exactly '" + std::string(kHeader) + "'");
  }

  std::optional<std::set<std::string, std::less<>>> wanted;
  if (options.tickers) wanted.emplace(options.tickers->begin(), options.tickers->end());

  LoadResult result;
  std::map<std::string, std::map<Date, double>> grouped;
  std::set<std::string> seen;

  for (std::size_t i = 1; i < rows.size(); ++i) {
    const auto line = rows[i];
    if (text::trim(line).empty()) continue;
    const auto where = "line " + std::to_string(i + 1);
    const auto fields = text::split(line, ',');
    if (fields.size() != 3) {
      throw Error(ErrorKind::FormatError, where + ": expected 3 fields");
    }
    const std::string ticker(text::trim(fields[0]));
    if (ticker.empty()) throw Error(ErrorKind::FormatError, where + ": empty ticker");
    const auto date = Date::try_parse(fields[1]);
    if (!date) throw Error(ErrorKind::FormatError, where + ": bad date");
    const auto close = text::parse_double(fields[2]);
    if (!close) throw Error(ErrorKind::FormatError, where + ": bad adj_close");

    if (wanted && !wanted->contains(ticker)) continue;
    seen.insert(ticker);
    if (options.start_date && *date < *options.start_date) continue;
    if (!std::isfinite(*close) || *close <= 0.0) {
      result.warnings.push_back({ticker, where + ": non-positive adj_close dropped"});
      continue;
    }
    auto& series = grouped[ticker];
    if (series.contains(*date)) {
      result.warnings.push_back(
          {ticker, "duplicate row for " + date->to_string() + "; kept last occurrence"});
    }
    series.insert_or_assign(*date, *close);
  }

  if (wanted) {
    for (const auto& t : *options.tickers) {
      if (!seen.contains(t)) result.warnings.push_back({t, "not present in prices file"});
    }
  }

  for (const auto& ticker : seen) {
    const auto it = grouped.find(ticker);
    const std::size_t n = it == grouped.end() ? 0 : it->second.size();
    if (n < 2) {
      result.warnings.push_back(
          {ticker, "excluded: " + std::to_string(n) + " usable row(s), need at least 2"});
      continue;
    }
    PriceSeries series{ticker, {}, {}};
    series.dates.reserve(n);
    series.closes.reserve(n);
    for (const auto& [date, close] : it->second) {
      series.dates.push_back(date);
      series.closes.push_back(close);
    }
    result.table.insert(std::move(series));
  }

  if (result.table.empty()) throw Error(ErrorKind::NoData, "no ticker has usable price data");
  return result;
}

LoadResult load_price_table(const PriceSource& source, const LoadOptions& options) {
  return parse_price_table(source.read_csv(), options);
}

LoadResult load_price_table(const std::string& path, const LoadOptions& options) {
  return load_price_table(FilePriceSource(path), options);
}

std::string format_price_table(const PriceTable& table) {
  std::string out(kHeader);
  out += '\n';
  for (const auto& [ticker, series] : table) {
    for (std::size_t i = 0; i < series.size(); ++i) {
      out += ticker;
      out += ',';
      out += series.dates[i].to_string();
      out += ',';
      out += text::shortest(series.closes[i]);
      out += '\n';
    }
  }
  return out;
}

}  // namespace tsc
