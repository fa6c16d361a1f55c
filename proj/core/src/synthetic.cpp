#include "tsc/synthetic.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>

#include "tsc/error.hpp"
#include "tsc/rng.hpp"

namespace tsc::synthetic {

namespace {

std::chrono::sys_days to_sys(Date d) {
  return std::chrono::year_month_day{std::chrono::year{d.year},
                                     std::chrono::month{static_cast<unsigned>(d.month)},
                                     std::chrono::day{static_cast<unsigned>(d.day)}};
}

Date from_sys(std::chrono::sys_days s) {
  const std::chrono::year_month_day ymd{s};
  return {static_cast<int>(ymd.year()), static_cast<int>(static_cast<unsigned>(ymd.month())),
          static_cast<int>(static_cast<unsigned>(ymd.day()))};
}

}  // namespace

BlobSample blob_features(const std::vector<Blob>& blobs, std::size_t count, double sigma,
                         std::uint64_t seed) {
  if (blobs.empty()) throw Error(ErrorKind::Precondition, "at least one blob required");
  Rng rng(seed);
  BlobSample out;
  out.features.reserve(count);
  out.truth.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    const std::size_t b = i % blobs.size();
    char name[32];
    std::snprintf(name, sizeof name, "S%03zu", i);
    const double vol = blobs[b].volatility + sigma * rng.normal();
    const double ret = blobs[b].ret + sigma * rng.normal();
    out.features.push_back({name, vol, ret});
    out.truth.push_back(static_cast<int>(b));
  }
  return out;
}

std::vector<Blob> square_blobs(Blob origin, double separation) {
  return {{origin.volatility, origin.ret},
          {origin.volatility + separation, origin.ret},
          {origin.volatility, origin.ret + separation},
          {origin.volatility + separation, origin.ret + separation}};
}

Date next_weekday(Date d) {
  auto s = to_sys(d) + std::chrono::days{1};
  while (std::chrono::weekday{s} == std::chrono::Saturday ||
         std::chrono::weekday{s} == std::chrono::Sunday) {
    s += std::chrono::days{1};
  }
  return from_sys(s);
}

PriceSeries price_series_for(const FeatureVector& target, std::size_t days, Date first_day,
                             std::uint64_t seed, double trading_days) {
  if (days < 3) throw Error(ErrorKind::TooShort, "need at least 3 days for two returns");
  if (target.volatility < 0.0) throw Error(ErrorKind::Precondition, "volatility must be >= 0");
  Rng rng(seed);
  const std::size_t m = days - 1;
  std::vector<double> z(m);
  for (auto& v : z) v = rng.normal();
  double mu = 0.0;
  for (double v : z) mu += v;
  mu /= static_cast<double>(m);
  double ss = 0.0;
  for (double v : z) ss += (v - mu) * (v - mu);
  const double sd = std::sqrt(ss / static_cast<double>(m - 1));

  const double daily_mean = target.ret / trading_days;
  const double daily_sd = target.volatility / std::sqrt(trading_days);

  PriceSeries s{target.ticker, {}, {}};
  s.dates.reserve(days);
  s.closes.reserve(days);
  Date d = first_day;
  double log_price = std::log(100.0);
  s.dates.push_back(d);
  s.closes.push_back(100.0);
  for (std::size_t i = 0; i < m; ++i) {
    log_price += daily_mean + daily_sd * (z[i] - mu) / sd;
    d = next_weekday(d);
    s.dates.push_back(d);
    s.closes.push_back(std::exp(log_price));
  }
  return s;
}

PriceTable price_table_for(const std::vector<FeatureVector>& targets, std::size_t days,
                           Date first_day, std::uint64_t seed) {
  PriceTable table;
  for (std::size_t i = 0; i < targets.size(); ++i) {
    table.insert(price_series_for(targets[i], days, first_day, Rng::derive(seed, i).next_u64()));
  }
  return table;
}

}  // namespace tsc::synthetic
