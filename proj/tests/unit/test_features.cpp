#include <algorithm>
#include <cmath>

#include "doctest.h"
#include "tsc/error.hpp"
#include "tsc/features.hpp"
#include "tsc/rng.hpp"
#include "tsc/synthetic.hpp"

using namespace tsc;
using doctest::Approx;

namespace {

// Direct-summation references, written independently of features.cpp.
double oracle_mean(const std::vector<double>& x) {
  long double s = 0;
  for (double v : x) s += v;
  return static_cast<double>(s / x.size());
}

double oracle_std(const std::vector<double>& x) {
  const long double m = oracle_mean(x);
  long double s = 0;
  for (double v : x) s += (v - m) * (v - m);
  return static_cast<double>(std::sqrt(s / (x.size() - 1)));
}

std::vector<double> random_walk(Rng& rng, std::size_t n) {
  std::vector<double> p{100.0};
  for (std::size_t i = 1; i < n; ++i) p.push_back(p.back() * std::exp(0.02 * rng.normal()));
  return p;
}

}  // namespace

TEST_CASE("log_returns") {
  CHECK(log_returns(std::vector<double>{10, 10, 10}) == std::vector<double>{0.0, 0.0});
  const auto r = log_returns(std::vector<double>{100, 110});
  REQUIRE(r.size() == 1);
  CHECK(r[0] == Approx(0.09531017980432493).epsilon(1e-15));

  Rng rng(7);
  const auto prices = random_walk(rng, 70);
  const auto got = log_returns(prices);
  REQUIRE(got.size() == 69);
  for (std::size_t i = 0; i < got.size(); ++i) {
    // The difference of logs loses a few ulps of ln(p) ~ 4.6 to cancellation.
    const double expected = std::log(prices[i + 1]) - std::log(prices[i]);
    CHECK(std::abs(got[i] - expected) <= 8 * 4.6 * 2.220446049250313e-16);
  }
}

TEST_CASE("log_returns errors") {
  CHECK_THROWS_AS((void)log_returns(std::vector<double>{1.0}), Error);
  try {
    (void)log_returns(std::vector<double>{1.0, 0.0});
    FAIL("no throw");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::NonPositivePrice);
  }
}

TEST_CASE("sample_std") {
  CHECK(sample_std(std::vector<double>{5, 5, 5, 5}) == 0.0);
  CHECK(sample_std(std::vector<double>{1, 2, 3}) == 1.0);
  // Frozen from the direct-summation oracle: 0.015275252316519466.
  const std::vector<double> x{0.01, -0.01, 0.02};
  CHECK(sample_std(x) == Approx(oracle_std(x)).epsilon(1e-14));
  CHECK(sample_std(x) == Approx(0.015275252316519466).epsilon(1e-14));
  CHECK_THROWS_AS((void)sample_std(std::vector<double>{1.0}), Error);
}

TEST_CASE("annualize") {
  const auto zero = annualize({"Z", {0.0, 0.0, 0.0}});
  CHECK(zero.volatility == 0.0);
  CHECK(zero.ret == 0.0);

  const auto flat = annualize({"C", {0.003, 0.003, 0.003, 0.003}});
  CHECK(flat.volatility == 0.0);
  CHECK(flat.ret == 252.0 * 0.003);

  const auto f = annualize({"T", {0.01, -0.01, 0.02}});
  CHECK(f.ticker == "T");
  CHECK(f.volatility == Approx(0.24248711305964282).epsilon(1e-13));
  CHECK(f.ret == Approx(1.68).epsilon(1e-13));

  const auto custom = annualize({"T", {0.01, -0.01, 0.02}}, 365.0);
  CHECK(custom.ret == Approx(oracle_mean({0.01, -0.01, 0.02}) * 365.0));

  CHECK_THROWS_AS((void)annualize({"S", {0.1}}), Error);
}

TEST_CASE("build_feature_table") {
  PriceTable one;
  one.insert({"FLAT", {Date{2019, 1, 2}, Date{2019, 1, 3}, Date{2019, 1, 4}}, {5.0, 5.0, 5.0}});
  const auto t = build_feature_table(one);
  REQUIRE(t.vectors.size() == 1);
  CHECK(t.vectors[0] == FeatureVector{"FLAT", 0.0, 0.0});

  CHECK(build_feature_table(PriceTable{}).vectors.empty());

  // Two prices give one return, which cannot be annualized.
  PriceTable shorty;
  shorty.insert({"TWO", {Date{2019, 1, 2}, Date{2019, 1, 3}}, {5.0, 6.0}});
  const auto s = build_feature_table(shorty);
  CHECK(s.vectors.empty());
  REQUIRE(s.warnings.size() == 1);
  CHECK(s.warnings[0].ticker == "TWO");
}

TEST_CASE("70-ticker table matches the per-ticker oracle") {
  Rng rng(11);
  PriceTable table;
  std::map<std::string, std::vector<double>> raw;
  for (int t = 0; t < 70; ++t) {
    PriceSeries s{"T" + std::to_string(100 + t), {}, random_walk(rng, 70)};
    Date d{2019, 1, 2};
    for (std::size_t i = 0; i < s.closes.size(); ++i, d = synthetic::next_weekday(d)) s.dates.push_back(d);
    raw[s.ticker] = s.closes;
    table.insert(std::move(s));
  }
  const auto features = build_feature_table(table);
  REQUIRE(features.vectors.size() == 70);
  CHECK(std::is_sorted(features.vectors.begin(), features.vectors.end(),
                       [](const auto& a, const auto& b) { return a.ticker < b.ticker; }));
  for (const auto& f : features.vectors) {
    const auto& p = raw.at(f.ticker);
    std::vector<double> r;
    for (std::size_t i = 1; i < p.size(); ++i) r.push_back(std::log(p[i] / p[i - 1]));
    CHECK(f.volatility == Approx(oracle_std(r) * std::sqrt(252.0)).epsilon(1e-12));
    CHECK(f.ret == Approx(oracle_mean(r) * 252.0).epsilon(1e-10));
  }
}

TEST_CASE("property: features are invariant to price scale") {
  Rng rng(5);
  for (int trial = 0; trial < 50; ++trial) {
    const auto prices = random_walk(rng, 3 + rng.below(60));
    const double scale = std::exp(rng.uniform(-6.0, 6.0));
    std::vector<double> scaled;
    for (double p : prices) scaled.push_back(p * scale);
    const auto a = annualize({"A", log_returns(prices)});
    const auto b = annualize({"A", log_returns(scaled)});
    CHECK(a.volatility == Approx(b.volatility).epsilon(1e-9));
    CHECK(std::abs(a.ret - b.ret) < 1e-9);
    CHECK(log_returns(prices).size() == prices.size() - 1);
  }
}

TEST_CASE("property: sample_std is zero exactly when values are equal") {
  Rng rng(8);
  for (int trial = 0; trial < 100; ++trial) {
    const double c = rng.uniform(-1.0, 1.0);
    std::vector<double> x(2 + rng.below(20), c);
    CHECK(sample_std(x) == 0.0);
    x[rng.below(x.size())] += 1e-6;
    CHECK(sample_std(x) > 1e-12);
  }
}

TEST_CASE("permuting prices changes the features") {
  const std::vector<double> p{100, 101, 99, 105, 104};
  const std::vector<double> q{100, 105, 99, 101, 104};
  const auto a = annualize({"A", log_returns(p)});
  const auto b = annualize({"A", log_returns(q)});
  CHECK(a.volatility != b.volatility);
}

TEST_CASE("synthetic price series hits its target features") {
  const FeatureVector target{"SYN", 0.31, 0.62};
  const auto s = synthetic::price_series_for(target, 70, Date{2019, 1, 2}, 3);
  const auto f = annualize(log_returns(s));
  CHECK(f.volatility == Approx(0.31).epsilon(1e-9));
  CHECK(f.ret == Approx(0.62).epsilon(1e-9));
}
