#include "tsc/features.hpp"

#include <algorithm>
#include <cmath>

#include "tsc/error.hpp"

namespace tsc {

std::vector<double> log_returns(std::span<const double> prices) {
  if (prices.size() < 2) throw Error(ErrorKind::TooShort, "log returns need at least 2 prices");
  for (double p : prices) {
    if (!(p > 0.0) || !std::isfinite(p)) {
      throw Error(ErrorKind::NonPositivePrice, "prices must be positive and finite");
    }
  }
  std::vector<double> out(prices.size() - 1);
  for (std::size_t i = 0; i + 1 < prices.size(); ++i) {
    out[i] = std::log(prices[i + 1] / prices[i]);
  }
  return out;
}

ReturnSeries log_returns(const PriceSeries& series) {
  return {series.ticker, log_returns(series.closes)};
}

double mean(std::span<const double> values) {
  if (values.empty()) throw Error(ErrorKind::TooShort, "mean of an empty sequence");
  double sum = 0.0;
  for (double v : values) sum += v;
  return sum / static_cast<double>(values.size());
}

double sample_std(std::span<const double> values) {
  if (values.size() < 2) throw Error(ErrorKind::TooShort, "sample std needs at least 2 values");
  // Identical values give exactly zero even when their sum rounds.
  if (std::all_of(values.begin(), values.end(), [&](double v) { return v == values.front(); })) {
    return 0.0;
  }
  const double mu = mean(values);
  double ss = 0.0;
  for (double v : values) ss += (v - mu) * (v - mu);
  return std::sqrt(ss / static_cast<double>(values.size() - 1));
}

FeatureVector annualize(const ReturnSeries& returns, double trading_days) {
  if (returns.values.size() < 2) {
    throw Error(ErrorKind::TooShort, returns.ticker + ": annualizing needs at least 2 returns");
  }
  const bool constant = std::all_of(returns.values.begin(), returns.values.end(),
                                    [&](double v) { return v == returns.values.front(); });
  const double mu = constant ? returns.values.front() : mean(returns.values);
  return {returns.ticker, sample_std(returns.values) * std::sqrt(trading_days),
          mu * trading_days};
}

FeatureTable build_feature_table(const PriceTable& table, double trading_days) {
  FeatureTable out;
  out.vectors.reserve(table.size());
  for (const auto& [ticker, series] : table) {
    try {
      out.vectors.push_back(annualize(log_returns(series), trading_days));
    } catch (const Error& e) {
      out.warnings.push_back({ticker, std::string("excluded from features: ") + e.what()});
    }
  }
  return out;
}

}  // namespace tsc
