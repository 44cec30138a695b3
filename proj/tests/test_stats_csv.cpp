#include <doctest.h>

#include <cmath>
#include <limits>

#include "affdrift/csv.hpp"
#include "affdrift/error.hpp"
#include "affdrift/stats.hpp"
#include "test_support.hpp"

using namespace affdrift;
using testing_support::Gen;

TEST_CASE("mean and sample SD agree with two-pass reference") {
  Gen g(11);
  for (int trial = 0; trial < 50; ++trial) {
    const auto x = g.values(static_cast<std::size_t>(g.integer(2, 200)), -50.0, 50.0);
    CHECK(stats::mean(x) == doctest::Approx(testing_support::ref_mean(x)).epsilon(1e-12));
    CHECK(stats::sample_sd(x) == doctest::Approx(testing_support::ref_sd(x)).epsilon(1e-12));
  }
  const std::vector<double> one{3.0};
  CHECK(stats::sample_sd(one) == 0.0);
}

TEST_CASE("pearson: self, affine and symmetry properties") {
  Gen g(12);
  for (int trial = 0; trial < 30; ++trial) {
    const auto a = g.values(40, -3.0, 3.0);
    const auto b = g.values(40, -3.0, 3.0);
    const double scale = g.uniform(0.1, 10.0);
    const double shift = g.uniform(-100.0, 100.0);
    std::vector<double> affine, flipped;
    for (double v : a) {
      affine.push_back(scale * v + shift);
      flipped.push_back(-scale * v + shift);
    }
    CHECK(*stats::pearson(a, a) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(*stats::pearson(a, affine) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(*stats::pearson(a, flipped) == doctest::Approx(-1.0).epsilon(1e-12));
    CHECK(*stats::pearson(a, b) == doctest::Approx(*stats::pearson(b, a)).epsilon(1e-14));
    CHECK(*stats::pearson(a, b) == doctest::Approx(testing_support::ref_pearson(a, b)).epsilon(1e-12));
  }
  const std::vector<double> flat(10, 2.0), ramp{0, 1, 2, 3, 4, 5, 6, 7, 8, 9};
  CHECK_FALSE(stats::pearson(flat, ramp).has_value());
  const std::vector<double> shorter{1, 2, 3};
  CHECK_FALSE(stats::pearson(shorter, ramp).has_value());
}

TEST_CASE("percentile uses linear interpolation between order statistics") {
  const std::vector<double> x{4, 1, 3, 2};
  CHECK(stats::percentile(x, 0) == 1.0);
  CHECK(stats::percentile(x, 100) == 4.0);
  CHECK(stats::percentile(x, 50) == 2.5);
  CHECK(stats::percentile(x, 2.5) == doctest::Approx(1.075));
  CHECK(stats::median({0.2, 0.8}) == doctest::Approx(0.5));
  CHECK(stats::median({0.9, 0.9, 0.1}) == doctest::Approx(0.9));
}

TEST_CASE("logistic and softplus stay finite at extremes") {
  CHECK(stats::logistic(0.0) == 0.5);
  CHECK(stats::logistic(800.0) == 1.0);
  CHECK(stats::logistic(-800.0) == doctest::Approx(0.0));
  CHECK(stats::softplus(800.0) == doctest::Approx(800.0));
  CHECK(stats::softplus(-800.0) >= 0.0);
  CHECK(stats::softplus(0.0) == doctest::Approx(std::log(2.0)));
  Gen g(13);
  for (int i = 0; i < 100; ++i) {
    const double z = g.uniform(-30.0, 30.0);
    CHECK(stats::logistic(z) + stats::logistic(-z) == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(stats::softplus(z) == doctest::Approx(std::log1p(std::exp(z))).epsilon(1e-12));
  }
}

TEST_CASE("csv helpers") {
  CHECK(csv::trim("  a b \t") == "a b");
  const auto f = csv::split("1,,x");
  REQUIRE(f.size() == 3);
  CHECK(f[1].empty());
  const auto ls = csv::lines("a\r\nb\n\n");
  REQUIRE(ls.size() == 2);
  CHECK(ls[0] == "a");
  CHECK(csv::parse_double(" 2.5 ", 1) == 2.5);
  CHECK_THROWS_AS(csv::parse_double("2.5x", 7), Error);
  try {
    csv::parse_double("abc", 7);
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::kParse);
    CHECK(std::string(e.what()).find('7') != std::string::npos);
  }
}

TEST_CASE("format_double round-trips exactly") {
  Gen g(14);
  for (int i = 0; i < 500; ++i) {
    const double v = g.normal(0.0, 1.0) * std::pow(10.0, g.integer(-12, 12));
    CHECK(csv::parse_double(csv::format_double(v), 1) == v);
  }
  CHECK(csv::parse_double(csv::format_double(std::numeric_limits<double>::min()), 1) ==
        std::numeric_limits<double>::min());
}
