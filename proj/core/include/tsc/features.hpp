#pragma once

#include <span>
#include <string>
#include <vector>

#include "tsc/ingest.hpp"

namespace tsc {

inline constexpr double kTradingDaysPerYear = 252.0;

struct ReturnSeries {
  std::string ticker;
  std::vector<double> values;
};

/// Annualized <volatility, return> pair for one ticker.
struct FeatureVector {
  std::string ticker;
  double volatility = 0.0;
  double ret = 0.0;

  friend bool operator==(const FeatureVector&, const FeatureVector&) = default;
};

/// out[i] = ln(prices[i+1] / prices[i]).
/// Throws TooShort for fewer than two prices, NonPositivePrice for p <= 0.
[[nodiscard]] std::vector<double> log_returns(std::span<const double> prices);
[[nodiscard]] ReturnSeries log_returns(const PriceSeries& series);

[[nodiscard]] double mean(std::span<const double> values);

/// Bessel-corrected sample standard deviation. Requires at least two values.
[[nodiscard]] double sample_std(std::span<const double> values);

/// volatility = sample_std * sqrt(trading_days), ret = mean * trading_days.
[[nodiscard]] FeatureVector annualize(const ReturnSeries& returns,
                                      double trading_days = kTradingDaysPerYear);

struct FeatureTable {
  std::vector<FeatureVector> vectors;  // ticker order of the source table
  std::vector<Warning> warnings;       // tickers excluded, with reason
};

[[nodiscard]] FeatureTable build_feature_table(const PriceTable& table,
                                               double trading_days = kTradingDaysPerYear);

}  // namespace tsc
