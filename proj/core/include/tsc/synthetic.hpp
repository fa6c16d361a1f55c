#pragma once

// Seeded synthetic data with known ground truth, used by the tests,
// benchmarks and the demo fixture tool.

#include <cstdint>
#include <string>
#include <vector>

#include "tsc/features.hpp"
#include "tsc/ingest.hpp"
#include "tsc/matrix.hpp"

namespace tsc::synthetic {

struct Blob {
  double volatility = 0.0;
  double ret = 0.0;
};

struct BlobSample {
  std::vector<FeatureVector> features;
  std::vector<int> truth;  // generating blob per feature vector
};

/// `count` points split round-robin across blobs, each centre perturbed by
/// isotropic Gaussian noise with standard deviation `sigma`.
[[nodiscard]] BlobSample blob_features(const std::vector<Blob>& blobs, std::size_t count,
                                       double sigma, std::uint64_t seed);

/// Four centres on a square with side `separation` (in units of feature
/// space), lower-left corner at `origin`.
[[nodiscard]] std::vector<Blob> square_blobs(Blob origin, double separation);

/// A price series of `days` closes whose annualized features equal `target`
/// up to rounding: standardized Gaussian log returns rescaled to the target
/// daily mean and standard deviation.
[[nodiscard]] PriceSeries price_series_for(const FeatureVector& target, std::size_t days,
                                           Date first_day, std::uint64_t seed,
                                           double trading_days = kTradingDaysPerYear);

/// One price series per feature vector, weekdays from `first_day`.
[[nodiscard]] PriceTable price_table_for(const std::vector<FeatureVector>& targets,
                                         std::size_t days, Date first_day, std::uint64_t seed);

/// Next calendar date that is Monday to Friday.
[[nodiscard]] Date next_weekday(Date d);

}  // namespace tsc::synthetic
