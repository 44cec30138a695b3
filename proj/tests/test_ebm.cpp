#include <doctest.h>

#include <cmath>

#include "affdrift/ebm.hpp"
#include "affdrift/error.hpp"
#include "test_support.hpp"

using namespace affdrift;

namespace {

double sigmoid(double z) { return 1.0 / (1.0 + std::exp(-z)); }

// Two features; labels depend on x0 through `shape` plus a period term.
Design make_design(testing_support::Gen& g, std::size_t n_per_period, double period_effect) {
  Design d;
  d.feature_names = {"a", "b"};
  d.columns.resize(2);
  for (int p = 0; p < 2; ++p) {
    for (std::size_t i = 0; i < n_per_period; ++i) {
      const double x0 = g.normal(0.0, 1.0), x1 = g.normal(0.0, 1.0);
      const double logit = 2.0 * x0 + period_effect * p;
      d.columns[0].push_back(x0);
      d.columns[1].push_back(x1);
      d.labels.push_back(g.coin(sigmoid(logit)) ? 1 : 0);
      d.period.push_back(p);
    }
  }
  return d;
}

double manual_logit(const EbmModel& m, std::span<const double> x, int period) {
  double z = m.intercept;
  for (std::size_t f = 0; f < x.size(); ++f) z += m.f_com[f](x[f]);
  if (period == 1) {
    z += m.period_offset;
    for (std::size_t f = 0; f < x.size(); ++f) z += m.f_int[f](x[f]);
  }
  return z;
}

}  // namespace

TEST_CASE("quantile binning") {
  std::vector<double> ramp;
  for (int i = 1; i <= 100; ++i) ramp.push_back(i);
  const auto b = bin_feature(ramp, 4);
  REQUIRE(b.cuts.size() == 3);
  CHECK(b.cuts[0] == 25.5);
  CHECK(b.cuts[1] == 50.5);
  CHECK(b.cuts[2] == 75.5);
  CHECK(b.bin_of(25.0) == 0);
  CHECK(b.bin_of(26.0) == 1);
  CHECK(b.bin_of(-1e9) == 0);
  CHECK(b.bin_of(1e9) == 3);

  CHECK(bin_feature(std::vector<double>(50, 3.0), 32).bins() == 1);
  std::vector<double> two(50, 0.0);
  for (int i = 0; i < 10; ++i) two[i] = 1.0;
  const auto b2 = bin_feature(two, 32);
  REQUIRE(b2.bins() == 2);
  CHECK(b2.cuts[0] == 0.5);
  CHECK_THROWS_AS(bin_feature(std::vector<double>{}, 4), Error);
}

TEST_CASE("binning properties on random data") {
  testing_support::Gen g(51);
  for (int trial = 0; trial < 200; ++trial) {
    const auto n = static_cast<std::size_t>(g.integer(1, 300));
    std::vector<double> x(n);
    const bool discrete = g.coin();
    for (auto& v : x) v = discrete ? g.integer(0, 6) : g.normal(0.0, 1.0);
    const auto max_bins = static_cast<std::size_t>(g.integer(2, 40));
    const auto b = bin_feature(x, max_bins);
    CHECK(b.bins() <= max_bins);
    std::vector<double> s = x;
    std::sort(s.begin(), s.end());
    s.erase(std::unique(s.begin(), s.end()), s.end());
    CHECK(b.bins() <= s.size());
    for (std::size_t c = 0; c < b.cuts.size(); ++c) {
      if (c > 0) CHECK(b.cuts[c] > b.cuts[c - 1]);
      // Each cut is the midpoint of two neighbouring distinct values.
      const auto hi = std::upper_bound(s.begin(), s.end(), b.cuts[c]);
      REQUIRE(hi != s.begin());
      REQUIRE(hi != s.end());
      CHECK(b.cuts[c] == *(hi - 1) + (*hi - *(hi - 1)) / 2.0);
    }
    // Every bin holds at least one observed value.
    std::vector<int> count(b.bins(), 0);
    for (double v : x) ++count[b.bin_of(v)];
    for (int c : count) CHECK(c > 0);
  }
}

TEST_CASE("prediction decomposes into intercept, shapes and period terms") {
  EbmModel m;
  m.intercept = 2.0;
  CHECK(m.predict_proba(std::vector<double>{}, 0) == doctest::Approx(0.8808).epsilon(1e-4));

  ShapeFunction com{"a", BinSpec{{0.0}}, {-1.0, 1.0}};
  ShapeFunction inter{"a", BinSpec{{0.0}}, {0.5, -0.5}};
  m.features = {"a"};
  m.f_com = {com};
  m.f_int = {inter};
  m.period_offset = 0.25;
  const std::vector<double> x{3.0};
  CHECK(m.predict_logit(x, 0) == 3.0);
  CHECK(m.predict_logit(x, 1) == 2.0 + 1.0 + 0.25 - 0.5);

  testing_support::Gen g(52);
  auto d = make_design(g, 300, 1.0);
  const auto fit = fit_ebm(d, EbmConfig{.rounds = 100, .seed = 3});
  for (std::size_t r = 0; r < d.rows(); ++r) {
    const auto row = d.row(r);
    CHECK(fit.predict_logit(row, d.period[r]) ==
          doctest::Approx(manual_logit(fit, row, d.period[r])).epsilon(1e-12));
  }
}

TEST_CASE("training loss never increases") {
  testing_support::Gen g(53);
  for (int bags : {0, 8}) {
    const auto d = make_design(g, 200, 0.5);
    FitTrace trace;
    fit_ebm(d, EbmConfig{.rounds = 200, .inner_bags = bags, .seed = 9}, &trace);
    REQUIRE(trace.loss.size() == 201);
    for (std::size_t k = 1; k < trace.loss.size(); ++k) {
      CHECK(trace.loss[k] <= trace.loss[k - 1] + 1e-12);
    }
    CHECK(trace.loss.back() < trace.loss.front() - 0.05);
  }
}

TEST_CASE("step function is learned") {
  testing_support::Gen g(54);
  Design d;
  d.feature_names = {"x"};
  d.columns.resize(1);
  for (int i = 0; i < 400; ++i) {
    const double x = g.uniform(0.0, 1.0);
    d.columns[0].push_back(x);
    d.labels.push_back(x > 0.5 ? 1 : 0);
    d.period.push_back(i % 2);
  }
  const auto m = fit_ebm(d, EbmConfig{.seed = 1});
  for (int p = 0; p < 2; ++p) {
    CHECK(m.predict_proba(std::vector<double>{0.9}, p) > 0.9);
    CHECK(m.predict_proba(std::vector<double>{0.1}, p) < 0.1);
  }
  const auto e = evaluate(m, d);
  CHECK(e.accuracy > 0.97);
  CHECK(*e.auc > 0.99);
}

TEST_CASE("constant feature gives the base rate") {
  Design d;
  d.feature_names = {"c"};
  d.columns = {std::vector<double>(200, 1.0)};
  for (int i = 0; i < 200; ++i) {
    d.labels.push_back(i % 4 == 0 ? 1 : 0);
    d.period.push_back(i < 100 ? 0 : 1);
  }
  const auto m = fit_ebm(d, EbmConfig{.seed = 2});
  CHECK(m.predict_proba(std::vector<double>{1.0}, 0) == doctest::Approx(0.25).epsilon(0.02));
  CHECK(m.predict_proba(std::vector<double>{1.0}, 1) == doctest::Approx(0.25).epsilon(0.02));
}

TEST_CASE("interaction shapes track the period effect") {
  testing_support::Gen g(55);
  auto mean_abs_int = [](const EbmModel& m, const Design& d) {
    double s = 0.0, n = 0.0;
    for (std::size_t r = 0; r < d.rows(); ++r) {
      if (d.period[r] != 1) continue;
      n += 1.0;
      s += std::abs(m.f_int[0](d.columns[0][r]));
    }
    return s / n;
  };
  const auto null_d = make_design(g, 1000, 0.0);
  const auto null_m = fit_ebm(null_d, EbmConfig{.seed = 4});
  CHECK(std::abs(null_m.period_offset) < 0.3);

  const auto shifted_d = make_design(g, 1000, 1.5);
  const auto shifted_m = fit_ebm(shifted_d, EbmConfig{.seed = 4});
  CHECK(shifted_m.period_offset == doctest::Approx(1.5).epsilon(0.25));

  // Second period flips the slope of the first feature.
  Design flipped = null_d;
  for (std::size_t r = 0; r < flipped.rows(); ++r) {
    const double sign = flipped.period[r] == 1 ? -1.0 : 1.0;
    flipped.labels[r] = g.coin(sigmoid(sign * 2.0 * flipped.columns[0][r])) ? 1 : 0;
  }
  const auto flipped_m = fit_ebm(flipped, EbmConfig{.seed = 4});
  CHECK(mean_abs_int(flipped_m, flipped) > 2.0 * mean_abs_int(null_m, null_d));
}

TEST_CASE("interactions off leaves period-2 rows on the common shapes") {
  testing_support::Gen g(56);
  const auto d = make_design(g, 200, 2.0);
  const auto m = fit_ebm(d, EbmConfig{.rounds = 50, .interactions = false, .seed = 4});
  for (std::size_t r = 0; r < d.rows(); r += 17) {
    const auto row = d.row(r);
    CHECK(m.predict_logit(row, 1) == m.predict_logit(row, 0));
  }
}

TEST_CASE("fits are deterministic and survive a JSON round-trip") {
  testing_support::Gen g(57);
  const auto d = make_design(g, 250, 1.0);
  const EbmConfig cfg{.rounds = 120, .seed = 77};
  const auto a = fit_ebm(d, cfg);
  const auto b = fit_ebm(d, cfg);
  CHECK(to_json(a).dump() == to_json(b).dump());
  const auto back = ebm_model_from_json(nlohmann::json::parse(to_json(a).dump()));
  for (std::size_t r = 0; r < d.rows(); ++r) {
    const auto row = d.row(r);
    CHECK(back.predict_logit(row, d.period[r]) == a.predict_logit(row, d.period[r]));
  }
  const auto c = fit_ebm(d, EbmConfig{.rounds = 120, .seed = 78});
  CHECK(to_json(a).dump() != to_json(c).dump());
}

TEST_CASE("fit preconditions") {
  Design one_class;
  one_class.feature_names = {"x"};
  one_class.columns = {{1, 2, 3, 4}};
  one_class.labels = {1, 1, 1, 1};
  one_class.period = {0, 0, 1, 1};
  try {
    fit_ebm(one_class, {});
    FAIL("expected validation error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::kValidation);
  }
  Design lone;
  lone.feature_names = {"x"};
  lone.columns = {{1, 2, 3, 4}};
  lone.labels = {0, 1, 0, 1};
  lone.period = {0, 0, 0, 1};
  try {
    fit_ebm(lone, {});
    FAIL("expected precondition error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::kPrecondition);
  }
  Design ragged = lone;
  ragged.columns[0].pop_back();
  CHECK_THROWS_AS(ragged.validate(), Error);
}

TEST_CASE("AUC examples") {
  CHECK(*roc_auc(std::vector<double>{0.9, 0.4, 0.6}, std::vector<int>{1, 0, 1}) == 1.0);
  CHECK(*roc_auc(std::vector<double>{0.1, 0.9}, std::vector<int>{1, 0}) == 0.0);
  CHECK(*roc_auc(std::vector<double>(6, 0.5), std::vector<int>{1, 0, 1, 0, 0, 1}) == 0.5);
  CHECK_FALSE(roc_auc(std::vector<double>{0.2, 0.3}, std::vector<int>{1, 1}).has_value());

  // Pairwise-count oracle on random scores with ties.
  testing_support::Gen g(58);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<double> s;
    std::vector<int> y;
    for (int i = 0; i < 60; ++i) {
      s.push_back(g.integer(0, 10) / 10.0);
      y.push_back(g.coin() ? 1 : 0);
    }
    double wins = 0.0, pairs = 0.0;
    for (std::size_t i = 0; i < s.size(); ++i) {
      for (std::size_t j = 0; j < s.size(); ++j) {
        if (y[i] == 1 && y[j] == 0) {
          pairs += 1.0;
          wins += s[i] > s[j] ? 1.0 : (s[i] == s[j] ? 0.5 : 0.0);
        }
      }
    }
    const auto auc = roc_auc(s, y);
    if (pairs == 0.0) {
      CHECK_FALSE(auc.has_value());
    } else {
      CHECK(*auc == doctest::Approx(wins / pairs).epsilon(1e-12));
    }
  }
}
