#include "affdrift/features.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "affdrift/csv.hpp"
#include "affdrift/error.hpp"
#include "affdrift/stats.hpp"

namespace affdrift {

Feature parse_feature(std::string_view name) {
  for (std::size_t i = 0; i < kFeatureCount; ++i) {
    if (kFeatureNames[i] == name) return static_cast<Feature>(i);
  }
  throw Error(ErrorKind::kValidation, "unknown feature '" + std::string(name) + "'");
}

std::vector<Feature> parse_features(const std::vector<std::string>& names) {
  std::vector<Feature> out;
  for (const auto& n : names) out.push_back(parse_feature(n));
  return out;
}

std::vector<std::string> feature_names(std::span<const Feature> features) {
  std::vector<std::string> out;
  for (Feature f : features) out.emplace_back(feature_name(f));
  return out;
}

bool FeatureVector::has_all(std::span<const Feature> features) const {
  return std::all_of(features.begin(), features.end(),
                     [&](Feature f) { return (*this)[f].has_value(); });
}

std::string format_feature_table(const FeatureTable& table, std::string_view comment) {
  std::string out;
  if (!comment.empty()) out += "# " + std::string(comment) + "\n";
  out += "participant,period,timestamp,label";
  for (auto name : kFeatureNames) {
    out += ',';
    out += name;
  }
  out += '\n';
  for (const auto& row : table) {
    out += row.participant_id + "," + std::string(to_string(row.period)) + "," +
           csv::format_double(row.timestamp) + "," +
           std::to_string(static_cast<int>(row.label));
    for (const auto& v : row.values) {
      out += ',';
      if (v) out += csv::format_double(*v);
    }
    out += '\n';
  }
  return out;
}

FeatureTable parse_feature_table(std::string_view text) {
  const auto rows = csv::lines(text);
  std::size_t i = 0;
  while (i < rows.size() && (rows[i].empty() || rows[i].front() == '#')) ++i;
  if (i == rows.size()) throw Error(ErrorKind::kParse, "feature table has no header");
  const auto header = csv::split(rows[i]);
  if (header.size() != 4 + kFeatureCount || header[0] != "participant") {
    throw Error(ErrorKind::kParse, "row " + std::to_string(i + 1) + ": unexpected header");
  }
  std::vector<int> column_feature(kFeatureCount);
  for (std::size_t c = 0; c < kFeatureCount; ++c) {
    column_feature[c] = static_cast<int>(parse_feature(header[4 + c]));
  }
  FeatureTable out;
  for (++i; i < rows.size(); ++i) {
    if (rows[i].empty() || rows[i].front() == '#') continue;
    const auto f = csv::split(rows[i]);
    if (f.size() != header.size()) {
      throw Error(ErrorKind::kParse, "row " + std::to_string(i + 1) + ": expected " +
                                         std::to_string(header.size()) + " columns");
    }
    FeatureVector v;
    v.participant_id = std::string(f[0]);
    v.period = parse_period(f[1]);
    v.timestamp = csv::parse_double(f[2], i + 1);
    const double label = csv::parse_double(f[3], i + 1);
    if (label != 0.0 && label != 1.0) {
      throw Error(ErrorKind::kParse, "row " + std::to_string(i + 1) + ": label must be 0 or 1");
    }
    v.label = label == 1.0 ? Arousal::kHigh : Arousal::kLow;
    for (std::size_t c = 0; c < kFeatureCount; ++c) {
      if (!f[4 + c].empty()) v.values[column_feature[c]] = csv::parse_double(f[4 + c], i + 1);
    }
    out.push_back(std::move(v));
  }
  return out;
}

HrvTimeFeatures hrv_time_features(std::span<const double> ibi) {
  HrvTimeFeatures out;
  const std::size_t n = ibi.size();
  if (n == 0) return out;
  const double m = stats::mean(ibi);
  out.hr = 60000.0 / m;
  if (n < 2) return out;
  out.sd = stats::sample_sd(ibi);
  out.cv = *out.sd / m;
  double ss = 0.0;
  std::size_t over50 = 0;
  for (std::size_t k = 0; k + 1 < n; ++k) {
    const double d = ibi[k + 1] - ibi[k];
    ss += d * d;
    if (std::abs(d) > 50.0) ++over50;
  }
  out.rmssd = std::sqrt(ss / static_cast<double>(n - 1));
  out.pnn50 = 100.0 * static_cast<double>(over50) / static_cast<double>(n - 1);
  return out;
}

PoincareAxes poincare_axes(std::span<const double> ibi, double axis_scale) {
  PoincareAxes out;
  if (ibi.size() < 3) return out;
  std::vector<double> minor, major;
  for (std::size_t k = 0; k + 1 < ibi.size(); ++k) {
    minor.push_back((ibi[k] - ibi[k + 1]) / std::numbers::sqrt2);
    major.push_back((ibi[k] + ibi[k + 1]) / std::numbers::sqrt2);
  }
  out.short_axis = axis_scale * stats::sample_sd(minor);
  out.long_axis = axis_scale * stats::sample_sd(major);
  return out;
}

namespace {

// Natural cubic spline through (x, y), x strictly increasing.
class NaturalSpline {
 public:
  NaturalSpline(std::span<const double> x, std::span<const double> y)
      : x_(x.begin(), x.end()), y_(y.begin(), y.end()), m_(x.size(), 0.0) {
    const std::size_t n = x_.size();
    if (n < 3) return;
    // Tridiagonal system for interior second derivatives.
    std::vector<double> diag(n, 0.0), upper(n, 0.0), rhs(n, 0.0);
    for (std::size_t i = 1; i + 1 < n; ++i) {
      const double h0 = x_[i] - x_[i - 1];
      const double h1 = x_[i + 1] - x_[i];
      diag[i] = 2.0 * (h0 + h1);
      upper[i] = h1;
      rhs[i] = 6.0 * ((y_[i + 1] - y_[i]) / h1 - (y_[i] - y_[i - 1]) / h0);
    }
    for (std::size_t i = 2; i + 1 < n; ++i) {
      const double lower = x_[i] - x_[i - 1];
      const double w = lower / diag[i - 1];
      diag[i] -= w * upper[i - 1];
      rhs[i] -= w * rhs[i - 1];
    }
    for (std::size_t i = n - 1; i-- > 1;) {
      const double next = (i + 2 < n) ? m_[i + 1] : 0.0;
      m_[i] = (rhs[i] - upper[i] * next) / diag[i];
    }
  }

  double operator()(double t) const {
    const std::size_t n = x_.size();
    auto it = std::upper_bound(x_.begin(), x_.end(), t);
    std::size_t i = it == x_.begin() ? 0 : static_cast<std::size_t>(it - x_.begin()) - 1;
    i = std::min(i, n - 2);
    const double h = x_[i + 1] - x_[i];
    const double a = (x_[i + 1] - t) / h;
    const double b = (t - x_[i]) / h;
    return a * y_[i] + b * y_[i + 1] +
           ((a * a * a - a) * m_[i] + (b * b * b - b) * m_[i + 1]) * h * h / 6.0;
  }

 private:
  std::vector<double> x_, y_, m_;
};

}  // namespace

HrvFreqFeatures hrv_freq_features(std::span<const double> end_times,
                                  std::span<const double> ibi, const SpectralConfig& cfg) {
  HrvFreqFeatures out;
  if (ibi.size() < cfg.min_intervals || end_times.size() != ibi.size()) return out;
  const double t0 = end_times.front();
  const double span = end_times.back() - t0;
  if (span < cfg.min_span_s) return out;

  const NaturalSpline spline(end_times, ibi);
  const auto n = static_cast<std::size_t>(std::floor(span * cfg.resample_hz)) + 1;
  std::vector<double> x(n);
  for (std::size_t j = 0; j < n; ++j) x[j] = spline(t0 + static_cast<double>(j) / cfg.resample_hz);
  const double m = stats::mean(x);
  double wss = 0.0;
  for (std::size_t j = 0; j < n; ++j) {
    const double w = 0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * static_cast<double>(j) /
                                          static_cast<double>(n - 1));
    x[j] = (x[j] - m) * w;
    wss += w * w;
  }

  const double df = cfg.resample_hz / static_cast<double>(n);
  double lf = 0.0, hf = 0.0;
  for (std::size_t k = 1; 2 * k <= n; ++k) {
    const double f = static_cast<double>(k) * df;
    const bool in_lf = f >= cfg.lf_low && f < cfg.lf_high;
    const bool in_hf = f >= cfg.hf_low && f <= cfg.hf_high;
    if (!in_lf && !in_hf) continue;
    double re = 0.0, im = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      const double ang = -2.0 * std::numbers::pi * static_cast<double>(k * j % n) /
                         static_cast<double>(n);
      re += x[j] * std::cos(ang);
      im += x[j] * std::sin(ang);
    }
    double p = (re * re + im * im) / (cfg.resample_hz * wss);
    if (2 * k != n) p *= 2.0;
    if (in_lf) lf += p * df;
    if (in_hf) hf += p * df;
  }
  out.lf = lf;
  out.hf = hf;
  if (hf > cfg.hf_floor) out.lf_hf = lf / hf;
  return out;
}

EdaFeatures eda_features(std::span<const double> eda) {
  EdaFeatures out;
  if (eda.empty()) return out;
  const auto [lo, hi] = std::minmax_element(eda.begin(), eda.end());
  out.ave = stats::mean(eda);
  out.max = *hi;
  out.min = *lo;
  out.diff = *hi - *lo;
  return out;
}

std::optional<double> temp_feature(std::span<const double> temp) {
  if (temp.empty()) return std::nullopt;
  return stats::mean(temp);
}

AccFeatures acc_features(std::span<const Vec3> acc) {
  AccFeatures out;
  if (acc.empty()) return out;
  std::vector<double> mag;
  mag.reserve(acc.size());
  for (const Vec3& v : acc) mag.push_back(std::sqrt(v.x * v.x + v.y * v.y + v.z * v.z));
  out.ave = stats::mean(mag);
  out.max = *std::max_element(mag.begin(), mag.end());
  return out;
}

std::optional<double> average_windows(std::span<const std::optional<double>> per_window) {
  if (per_window.empty()) return std::nullopt;
  double s = 0.0;
  for (const auto& v : per_window) {
    if (!v) return std::nullopt;
    s += *v;
  }
  return s / static_cast<double>(per_window.size());
}

BvpAnalysis analyze_bvp(const LabeledSegment& segment, const FeatureConfig& config) {
  BvpAnalysis out;
  const auto coeffs =
      design_butterworth_lowpass(config.filter_order, config.filter_cutoff_hz, segment.bvp_rate);
  const auto filtered = filter_zero_phase(coeffs, segment.bvp);
  out.beat_times = detect_beats(filtered, segment.bvp_rate, config.detector);
  out.ibi = beats_to_ibi(out.beat_times, config.ibi);
  out.quality = assess_quality(out.ibi, static_cast<double>(segment.bvp.size()) / segment.bvp_rate,
                               config.quality);
  return out;
}

FeatureVector extract_feature_vector(const LabeledSegment& segment, const FeatureConfig& config) {
  return extract_feature_vector(segment, analyze_bvp(segment, config), config);
}

FeatureVector extract_feature_vector(const LabeledSegment& segment, const BvpAnalysis& bvp,
                                     const FeatureConfig& config) {
  if (!bvp.quality.accepted) {
    throw Error(ErrorKind::kValidation, "segment at t=" + csv::format_double(segment.annotation_time) +
                                            " rejected: " +
                                            std::string(to_string(bvp.quality.reason)));
  }
  FeatureVector fv;
  fv.participant_id = segment.participant_id;
  fv.period = segment.period;
  fv.timestamp = segment.annotation_time;
  fv.label = segment.label;

  const auto windows =
      window_slices(segment.bvp.size(), segment.bvp_rate, config.window_s, config.stride_s);
  constexpr Feature kBvpFeatures[] = {Feature::kSD, Feature::kCV, Feature::kRMSSD,
                                      Feature::kPNN50, Feature::kHR, Feature::kL,
                                      Feature::kT, Feature::kLF, Feature::kHF,
                                      Feature::kLF_HF};
  std::vector<std::vector<std::optional<double>>> per_window(std::size(kBvpFeatures));
  for (const auto& w : windows) {
    const double t0 = static_cast<double>(w.begin) / segment.bvp_rate;
    const double t1 = static_cast<double>(w.begin + w.length) / segment.bvp_rate;
    const auto ibi = ibi_in_window(bvp.beat_times, t0, t1, config.ibi);
    const auto td = hrv_time_features(ibi.intervals_ms);
    const auto pc = poincare_axes(ibi.intervals_ms, config.poincare_scale);
    const auto fd = hrv_freq_features(ibi.end_times, ibi.intervals_ms, config.spectral);
    const std::optional<double> values[] = {td.sd, td.cv, td.rmssd, td.pnn50, td.hr,
                                            pc.long_axis, pc.short_axis, fd.lf, fd.hf, fd.lf_hf};
    for (std::size_t k = 0; k < std::size(kBvpFeatures); ++k) per_window[k].push_back(values[k]);
  }
  for (std::size_t k = 0; k < std::size(kBvpFeatures); ++k) {
    fv[kBvpFeatures[k]] = average_windows(per_window[k]);
  }

  const auto eda = eda_features(segment.eda);
  fv[Feature::kEDA_ave] = eda.ave;
  fv[Feature::kEDA_max] = eda.max;
  fv[Feature::kEDA_min] = eda.min;
  fv[Feature::kEDA_diff] = eda.diff;
  fv[Feature::kTemp_ave] = temp_feature(segment.temp);
  const auto acc = acc_features(segment.acc);
  fv[Feature::kAcc_ave] = acc.ave;
  fv[Feature::kAcc_max] = acc.max;
  return fv;
}

}  // namespace affdrift
