#include <doctest.h>

#include <cmath>
#include <complex>
#include <numbers>

#include "affdrift/features.hpp"
#include "affdrift/synth.hpp"
#include "test_support.hpp"

using namespace affdrift;
using std::numbers::pi;
using testing_support::ref_mean;
using testing_support::ref_sd;

namespace {

struct OracleTime {
  double sd, cv, rmssd, pnn50, hr;
};

OracleTime oracle_time(const std::vector<double>& ibi) {
  OracleTime o{};
  const double m = ref_mean(ibi);
  o.sd = ref_sd(ibi);
  o.cv = o.sd / m;
  double ss = 0.0;
  int over = 0;
  for (std::size_t k = 1; k < ibi.size(); ++k) {
    ss += (ibi[k] - ibi[k - 1]) * (ibi[k] - ibi[k - 1]);
    over += std::abs(ibi[k] - ibi[k - 1]) > 50.0;
  }
  o.rmssd = std::sqrt(ss / static_cast<double>(ibi.size() - 1));
  o.pnn50 = 100.0 * over / static_cast<double>(ibi.size() - 1);
  o.hr = 60.0 / (m / 1000.0);
  return o;
}

// SD1/SD2 straight from the pair lists: rotate each (x_k, x_{k+1}) point by
// 45 degrees and take the sample SD along each axis.
std::pair<double, double> oracle_poincare(const std::vector<double>& ibi) {
  std::vector<double> across, along;
  const double c = std::cos(pi / 4.0), s = std::sin(pi / 4.0);
  for (std::size_t k = 0; k + 1 < ibi.size(); ++k) {
    const double x = ibi[k], y = ibi[k + 1];
    along.push_back(c * x + s * y);
    across.push_back(-s * x + c * y);
  }
  return {4.0 * ref_sd(along), 4.0 * ref_sd(across)};  // L, T
}

// Natural spline second derivatives from the full dense system.
std::vector<double> dense_spline_moments(const std::vector<double>& x, const std::vector<double>& y) {
  const std::size_t n = x.size();
  std::vector<std::vector<double>> a(n, std::vector<double>(n + 1, 0.0));
  a[0][0] = 1.0;
  a[n - 1][n - 1] = 1.0;
  for (std::size_t i = 1; i + 1 < n; ++i) {
    const double h0 = x[i] - x[i - 1], h1 = x[i + 1] - x[i];
    a[i][i - 1] = h0;
    a[i][i] = 2.0 * (h0 + h1);
    a[i][i + 1] = h1;
    a[i][n] = 6.0 * ((y[i + 1] - y[i]) / h1 - (y[i] - y[i - 1]) / h0);
  }
  for (std::size_t c = 0; c < n; ++c) {
    std::size_t piv = c;
    for (std::size_t r = c + 1; r < n; ++r) {
      if (std::abs(a[r][c]) > std::abs(a[piv][c])) piv = r;
    }
    std::swap(a[c], a[piv]);
    for (std::size_t r = 0; r < n; ++r) {
      if (r == c) continue;
      const double f = a[r][c] / a[c][c];
      for (std::size_t k = c; k <= n; ++k) a[r][k] -= f * a[c][k];
    }
  }
  std::vector<double> m(n);
  for (std::size_t i = 0; i < n; ++i) m[i] = a[i][n] / a[i][i];
  return m;
}

double spline_at(const std::vector<double>& x, const std::vector<double>& y,
                 const std::vector<double>& m, double t) {
  std::size_t i = 0;
  while (i + 2 < x.size() && t >= x[i + 1]) ++i;
  const double h = x[i + 1] - x[i];
  const double A = (x[i + 1] - t) / h, B = (t - x[i]) / h;
  return A * y[i] + B * y[i + 1] + ((A * A * A - A) * m[i] + (B * B * B - B) * m[i + 1]) * h * h / 6.0;
}

struct OracleFreq {
  double lf, hf;
};

OracleFreq oracle_freq(const std::vector<double>& t, const std::vector<double>& ibi) {
  const auto m = dense_spline_moments(t, ibi);
  const double fs = 4.0;
  const auto n = static_cast<std::size_t>(std::floor((t.back() - t.front()) * fs)) + 1;
  std::vector<double> x(n);
  for (std::size_t j = 0; j < n; ++j) x[j] = spline_at(t, ibi, m, t.front() + j / fs);
  const double mean = ref_mean(x);
  double wss = 0.0;
  for (std::size_t j = 0; j < n; ++j) {
    const double w = std::pow(std::sin(pi * j / static_cast<double>(n - 1)), 2.0);
    x[j] = (x[j] - mean) * w;
    wss += w * w;
  }
  OracleFreq o{0.0, 0.0};
  const double df = fs / n;
  for (std::size_t k = 1; k <= n / 2; ++k) {
    std::complex<double> X = 0.0;
    for (std::size_t j = 0; j < n; ++j) X += x[j] * std::polar(1.0, -2.0 * pi * k * j / n);
    const double f = k * df;
    const double p = (2 * k == n ? 1.0 : 2.0) * std::norm(X) / (fs * wss);
    if (f >= 0.04 && f < 0.15) o.lf += p * df;
    if (f >= 0.15 && f <= 0.4) o.hf += p * df;
  }
  return o;
}

std::pair<std::vector<double>, std::vector<double>> modulated(double freq_hz, double amp,
                                                              double seconds) {
  std::vector<double> times, ibi;
  double t = 0.0;
  while (true) {
    const double v = 800.0 + amp * std::sin(2.0 * pi * freq_hz * t);
    if (t + v / 1000.0 > seconds) break;
    t += v / 1000.0;
    times.push_back(t);
    ibi.push_back(v);
  }
  return {times, ibi};
}

}  // namespace

TEST_CASE("time-domain HRV on the worked example") {
  const std::vector<double> ibi{800, 810, 790};
  const auto f = hrv_time_features(ibi);
  CHECK(*f.sd == doctest::Approx(10.0).epsilon(1e-12));
  CHECK(*f.cv == doctest::Approx(0.0125).epsilon(1e-12));
  CHECK(*f.rmssd == doctest::Approx(std::sqrt(250.0)).epsilon(1e-12));
  CHECK(*f.pnn50 == 0.0);
  CHECK(*f.hr == doctest::Approx(75.0).epsilon(1e-12));

  const std::vector<double> flat(10, 1000.0);
  const auto c = hrv_time_features(flat);
  CHECK(*c.sd == 0.0);
  CHECK(*c.cv == 0.0);
  CHECK(*c.rmssd == 0.0);
  CHECK(*c.pnn50 == 0.0);
  CHECK(*c.hr == doctest::Approx(60.0));

  CHECK(*hrv_time_features(std::vector<double>{800, 860}).pnn50 == 100.0);
  CHECK(*hrv_time_features(std::vector<double>{800, 850}).pnn50 == 0.0);
  CHECK_FALSE(hrv_time_features(std::vector<double>{}).hr.has_value());
  CHECK_FALSE(hrv_time_features(std::vector<double>{800}).sd.has_value());
}

TEST_CASE("time-domain and Poincare features match the direct oracle on random series") {
  testing_support::Gen g(41);
  for (int trial = 0; trial < 100; ++trial) {
    const auto ibi = g.intervals(static_cast<std::size_t>(g.integer(10, 100)));
    const auto f = hrv_time_features(ibi);
    const auto o = oracle_time(ibi);
    CHECK(testing_support::rel_close(*f.sd, o.sd, 1e-9));
    CHECK(testing_support::rel_close(*f.cv, o.cv, 1e-9));
    CHECK(testing_support::rel_close(*f.rmssd, o.rmssd, 1e-9));
    CHECK(testing_support::rel_close(*f.pnn50, o.pnn50, 1e-9));
    CHECK(testing_support::rel_close(*f.hr, o.hr, 1e-9));
    const auto p = poincare_axes(ibi);
    const auto [L, T] = oracle_poincare(ibi);
    CHECK(testing_support::rel_close(*p.long_axis, L, 1e-9));
    CHECK(testing_support::rel_close(*p.short_axis, T, 1e-9));
  }
}

TEST_CASE("Poincare axes") {
  const auto flat = poincare_axes(std::vector<double>(10, 900.0));
  CHECK(*flat.long_axis < 1e-9);
  CHECK(*flat.short_axis < 1e-9);

  const std::vector<double> ibi{800, 810, 790, 810};
  const auto p = poincare_axes(ibi);
  const auto [L, T] = oracle_poincare(ibi);
  CHECK(*p.long_axis == doctest::Approx(L).epsilon(1e-12));
  CHECK(*p.short_axis == doctest::Approx(T).epsilon(1e-12));

  std::vector<double> alt;
  for (int k = 0; k < 40; ++k) alt.push_back(k % 2 ? 900.0 : 800.0);
  const auto a = poincare_axes(alt);
  const auto [La, Ta] = oracle_poincare(alt);
  CHECK(*a.short_axis > 10.0 * *a.long_axis);
  CHECK(*a.short_axis == doctest::Approx(Ta).epsilon(1e-12));
  CHECK(*a.long_axis == doctest::Approx(La).epsilon(1e-9).scale(1e-9));
  CHECK_FALSE(poincare_axes(std::vector<double>{800, 810}).long_axis.has_value());
}

TEST_CASE("spectral bands separate LF and HF modulation") {
  const auto [t_hf, ibi_hf] = modulated(0.25, 50.0, 50.0);
  const auto hf = hrv_freq_features(t_hf, ibi_hf);
  CHECK(*hf.hf > 10.0 * *hf.lf);
  CHECK(*hf.lf_hf < 0.1);

  const auto [t_lf, ibi_lf] = modulated(0.10, 50.0, 50.0);
  const auto lf = hrv_freq_features(t_lf, ibi_lf);
  CHECK(*lf.lf > 10.0 * *lf.hf);
  CHECK(*lf.lf_hf > 10.0);

  const auto [t_c, ibi_c] = modulated(0.1, 0.0, 50.0);
  const auto flat = hrv_freq_features(t_c, ibi_c);
  CHECK(*flat.lf < 1e-6 * *lf.lf);
  CHECK(*flat.hf < 1e-6 * *hf.hf);
  CHECK_FALSE(flat.lf_hf.has_value());
}

TEST_CASE("spectral features match a dense-spline, full-DFT oracle") {
  testing_support::Gen g(42);
  for (int trial = 0; trial < 10; ++trial) {
    auto ibi = g.intervals(static_cast<std::size_t>(g.integer(30, 60)));
    std::vector<double> t;
    double acc = g.uniform(0.0, 2.0);
    for (double v : ibi) t.push_back(acc += v / 1000.0);
    const auto f = hrv_freq_features(t, ibi);
    const auto o = oracle_freq(t, ibi);
    CHECK(testing_support::rel_close(*f.lf, o.lf, 1e-7));
    CHECK(testing_support::rel_close(*f.hf, o.hf, 1e-7));
  }
  CHECK_FALSE(hrv_freq_features(std::vector<double>{1, 2, 3}, std::vector<double>{800, 800, 800}).lf);
}

TEST_CASE("EDA, temperature and acceleration summaries") {
  const auto e = eda_features(std::vector<double>{1.0, 2.0, 3.0});
  CHECK(*e.ave == 2.0);
  CHECK(*e.max == 3.0);
  CHECK(*e.min == 1.0);
  CHECK(*e.diff == 2.0);
  const auto c = eda_features(std::vector<double>(8, 0.5));
  CHECK(*c.diff == 0.0);
  std::vector<double> ramp(200);
  for (int i = 0; i < 200; ++i) ramp[i] = i / 199.0;
  const auto r = eda_features(ramp);
  CHECK(*r.diff == doctest::Approx(1.0));
  CHECK(std::abs(*r.ave - 0.5) <= 1.0 / 199.0);

  CHECK(*temp_feature(std::vector<double>(5, 33.0)) == 33.0);
  CHECK(*temp_feature(std::vector<double>{32.0, 34.0}) == 33.0);
  std::vector<double> tr(200);
  for (int i = 0; i < 200; ++i) tr[i] = 32.0 + 2.0 * i / 199.0;
  CHECK(std::abs(*temp_feature(tr) - 33.0) <= 0.01);

  const auto a1 = acc_features(std::vector<Vec3>(4, Vec3{1, 0, 0}));
  CHECK(*a1.ave == 1.0);
  CHECK(*a1.max == 1.0);
  const auto a2 = acc_features(std::vector<Vec3>{{0, 0, 0}, {0, 0.6, 0.8}});
  CHECK(*a2.ave == doctest::Approx(0.5));
  CHECK(*a2.max == doctest::Approx(1.0));
}

TEST_CASE("window averaging") {
  const std::vector<std::optional<double>> hr{70.0, 70.0, 70.0, 80.0, 80.0};
  CHECK(*average_windows(hr) == doctest::Approx(74.0));
  const std::vector<std::optional<double>> gap{70.0, std::nullopt};
  CHECK_FALSE(average_windows(gap).has_value());
}

TEST_CASE("constant rhythm: averaged HR equals single-window HR") {
  LabeledSegment seg;
  seg.bvp_rate = 64.0;
  std::vector<double> ibi(70, 750.0);
  const auto rendering = synth::render_bvp(ibi, 64.0, 0.3, 0.25, 50.0);
  seg.bvp = rendering.samples;
  seg.eda = std::vector<double>(200, 1.0);
  seg.temp = std::vector<double>(200, 33.0);
  seg.acc = std::vector<Vec3>(190 * 32, Vec3{0, 0, 1});
  const auto fv = extract_feature_vector(seg);
  CHECK(*fv[Feature::kHR] == doctest::Approx(80.0).epsilon(0.01));
  CHECK(*fv[Feature::kSD] < 10.0);
}

TEST_CASE("segment features match a straight-line oracle on a rendered session") {
  synth::SessionSpec spec;
  spec.duration_s = 1200.0;
  spec.annotations_per_session = 4;
  spec.seed = 5;
  const auto rendered = synth::render_session(spec, "S01", Period::kP1, 0);
  const auto ex = extract_labeled_segments(rendered.session, default_arousal_mapping());
  REQUIRE(ex.segments.size() == 4);
  const FeatureConfig cfg;
  for (std::size_t s = 0; s < ex.segments.size(); ++s) {
    const auto& seg = ex.segments[s];
    const auto bvp = analyze_bvp(seg, cfg);
    REQUIRE(bvp.quality.accepted);
    const auto fv = extract_feature_vector(seg, bvp, cfg);

    // Oracle: 30 s windows every 5 s, intervals with both beats inside.
    std::vector<double> sums(10, 0.0);
    int windows = 0;
    for (double w0 = 0.0; w0 + 30.0 <= 50.0 + 1e-9; w0 += 5.0, ++windows) {
      std::vector<double> ibi, ends;
      for (std::size_t k = 1; k < bvp.beat_times.size(); ++k) {
        const double a = bvp.beat_times[k - 1], b = bvp.beat_times[k];
        const double ms = (b - a) * 1000.0;
        if (a >= w0 && b < w0 + 30.0 && ms >= 300.0 && ms <= 2000.0) {
          ibi.push_back(ms);
          ends.push_back(b);
        }
      }
      const auto o = oracle_time(ibi);
      const auto [L, T] = oracle_poincare(ibi);
      const auto fo = oracle_freq(ends, ibi);
      const double vals[] = {o.sd, o.cv, o.rmssd, o.pnn50, o.hr, L, T, fo.lf, fo.hf, fo.lf / fo.hf};
      for (int k = 0; k < 10; ++k) sums[k] += vals[k];
    }
    CHECK(windows == 5);
    const Feature order[] = {Feature::kSD, Feature::kCV, Feature::kRMSSD, Feature::kPNN50,
                             Feature::kHR, Feature::kL, Feature::kT, Feature::kLF,
                             Feature::kHF, Feature::kLF_HF};
    for (int k = 0; k < 10; ++k) {
      CHECK(testing_support::rel_close(*fv[order[k]], sums[k] / windows, 1e-7));
    }

    double emin = 1e300, emax = -1e300;
    for (double v : seg.eda) {
      emin = std::min(emin, v);
      emax = std::max(emax, v);
    }
    CHECK(*fv[Feature::kEDA_ave] == doctest::Approx(ref_mean(seg.eda)).epsilon(1e-12));
    CHECK(*fv[Feature::kEDA_min] == emin);
    CHECK(*fv[Feature::kEDA_max] == emax);
    CHECK(*fv[Feature::kEDA_diff] == doctest::Approx(emax - emin).epsilon(1e-12));
    CHECK(*fv[Feature::kTemp_ave] == doctest::Approx(ref_mean(seg.temp)).epsilon(1e-12));
    std::vector<double> mags;
    for (const auto& v : seg.acc) mags.push_back(std::hypot(v.x, v.y, v.z));
    CHECK(*fv[Feature::kAcc_ave] == doctest::Approx(ref_mean(mags)).epsilon(1e-12));
    CHECK(*fv[Feature::kAcc_max] == doctest::Approx(*std::max_element(mags.begin(), mags.end())).epsilon(1e-12));

    // Generator bookkeeping.
    const auto& truth = rendered.truth[s];
    CHECK(std::abs(*fv[Feature::kEDA_min] - truth.eda_min) <= 1e-9);
    CHECK(std::abs(*fv[Feature::kAcc_max] - truth.acc_max) <= 1e-9);
    CHECK(std::abs(*fv[Feature::kHR] - truth.hr_bpm) <= 0.01 * truth.hr_bpm);
  }
}
