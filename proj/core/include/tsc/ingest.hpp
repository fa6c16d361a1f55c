#pragma once

#include <compare>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace tsc {

/// Calendar date; ISO-8601 text form YYYY-MM-DD.
struct Date {
  int year = 1970;
  int month = 1;
  int day = 1;

  /// Throws Error{FormatError} on malformed or impossible dates.
  [[nodiscard]] static Date parse(std::string_view iso);
  [[nodiscard]] static std::optional<Date> try_parse(std::string_view iso) noexcept;
  [[nodiscard]] std::string to_string() const;

  friend auto operator<=>(const Date&, const Date&) = default;
};

/// One ticker's adjusted-close history, strictly increasing in date.
struct PriceSeries {
  std::string ticker;
  std::vector<Date> dates;
  std::vector<double> closes;

  [[nodiscard]] std::size_t size() const noexcept { return closes.size(); }

  /// Checks the series invariants (equal lengths, >= 2 points, strictly
  /// increasing dates, positive closes). Throws Error on violation.
  void validate() const;

  friend bool operator==(const PriceSeries&, const PriceSeries&) = default;
};

/// Ticker-keyed collection; iteration is in ascending ticker order.
class PriceTable {
 public:
  using Map = std::map<std::string, PriceSeries>;

  void insert(PriceSeries series);
  [[nodiscard]] bool contains(const std::string& ticker) const { return entries_.contains(ticker); }
  [[nodiscard]] const PriceSeries& at(const std::string& ticker) const { return entries_.at(ticker); }
  [[nodiscard]] std::size_t size() const noexcept { return entries_.size(); }
  [[nodiscard]] bool empty() const noexcept { return entries_.empty(); }
  [[nodiscard]] std::vector<std::string> tickers() const;

  [[nodiscard]] Map::const_iterator begin() const noexcept { return entries_.begin(); }
  [[nodiscard]] Map::const_iterator end() const noexcept { return entries_.end(); }

  friend bool operator==(const PriceTable&, const PriceTable&) = default;

 private:
  Map entries_;
};

/// Non-fatal data issue; `ticker` may be empty for file-level notes.
struct Warning {
  std::string ticker;
  std::string reason;

  friend bool operator==(const Warning&, const Warning&) = default;
};

struct LoadResult {
  PriceTable table;
  std::vector<Warning> warnings;
};

struct LoadOptions {
  std::optional<std::vector<std::string>> tickers;  // keep only these when set
  std::optional<Date> start_date;                   // drop rows dated before this
};

/// Where price CSV text comes from. Files today; a network fetcher can
/// implement the same interface.
class PriceSource {
 public:
  virtual ~PriceSource() = default;
  [[nodiscard]] virtual std::string describe() const = 0;
  [[nodiscard]] virtual std::string read_csv() const = 0;
};

class FilePriceSource final : public PriceSource {
 public:
  explicit FilePriceSource(std::string path) : path_(std::move(path)) {}
  [[nodiscard]] std::string describe() const override { return path_; }
  [[nodiscard]] std::string read_csv() const override;

 private:
  std::string path_;
};

/// Newline- or comma-separated symbols, de-duplicated keeping first
/// occurrence. Throws Error{EmptyList} when no symbol is present.
[[nodiscard]] std::vector<std::string> parse_ticker_list(std::string_view text);

/// Parses `ticker,date,adj_close` CSV text.
///
/// Rows are grouped per ticker and sorted by date. Duplicate (ticker, date)
/// rows keep the last occurrence. Rows with a non-positive or non-finite
/// close are dropped. Tickers left with fewer than two rows are excluded.
/// Each of those events is recorded as a Warning. Malformed header/rows throw
/// Error{FormatError}; an empty result throws Error{NoData}.
[[nodiscard]] LoadResult parse_price_table(std::string_view csv, const LoadOptions& options = {});

[[nodiscard]] LoadResult load_price_table(const PriceSource& source, const LoadOptions& options = {});
[[nodiscard]] LoadResult load_price_table(const std::string& path, const LoadOptions& options = {});

/// Serializes in the same CSV format, values in shortest round-trip form.
[[nodiscard]] std::string format_price_table(const PriceTable& table);

}  // namespace tsc
