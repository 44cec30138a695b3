#include "affdrift/preprocess.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>

#include "affdrift/csv.hpp"
#include "affdrift/error.hpp"
#include "affdrift/stats.hpp"

namespace affdrift {

namespace {

using cplx = std::complex<double>;

// Coefficients of prod(z - r_k), highest power first.
std::vector<cplx> poly_from_roots(const std::vector<cplx>& roots) {
  std::vector<cplx> p{1.0};
  for (const cplx& r : roots) {
    std::vector<cplx> next(p.size() + 1, 0.0);
    for (std::size_t i = 0; i < p.size(); ++i) {
      next[i] += p[i];
      next[i + 1] -= r * p[i];
    }
    p = std::move(next);
  }
  return p;
}

// Steady-state DF2T state for a unit step input.
std::vector<double> step_initial_state(const FilterCoefficients& c) {
  const std::size_t m = c.a.size() - 1;
  double sb = 0.0, sa = 0.0;
  for (double v : c.b) sb += v;
  for (double v : c.a) sa += v;
  const double gain = sb / sa;
  std::vector<double> z(m, 0.0);
  double acc = 0.0;
  for (std::size_t i = m; i-- > 0;) {
    acc += c.b[i + 1] - c.a[i + 1] * gain;
    z[i] = acc;
  }
  return z;
}

}  // namespace

FilterCoefficients design_butterworth_lowpass(int order, double cutoff_hz, double rate_hz) {
  if (order < 1) throw Error(ErrorKind::kPrecondition, "filter order must be >= 1");
  if (!(rate_hz > 0.0)) throw Error(ErrorKind::kPrecondition, "sample rate must be positive");
  if (!(cutoff_hz > 0.0) || cutoff_hz >= rate_hz / 2.0) {
    throw Error(ErrorKind::kPrecondition, "cutoff must lie in (0, Nyquist)");
  }
  const double fs2 = 2.0 * rate_hz;
  const double warped = fs2 * std::tan(std::numbers::pi * cutoff_hz / rate_hz);

  std::vector<cplx> poles, zeros;
  for (int k = 0; k < order; ++k) {
    const double theta = std::numbers::pi * (2.0 * k + order + 1) / (2.0 * order);
    const cplx s = warped * std::polar(1.0, theta);
    poles.push_back((fs2 + s) / (fs2 - s));
    zeros.push_back(-1.0);
  }
  const auto a = poly_from_roots(poles);
  const auto b = poly_from_roots(zeros);

  FilterCoefficients out;
  out.order = order;
  out.cutoff_hz = cutoff_hz;
  out.rate_hz = rate_hz;
  double sa = 0.0, sb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    out.a.push_back(a[i].real());
    out.b.push_back(b[i].real());
    sa += a[i].real();
    sb += b[i].real();
  }
  const double k = sa / sb;
  for (double& v : out.b) v *= k;
  return out;
}

cplx frequency_response(const FilterCoefficients& coeffs, double freq_hz) {
  const double w = 2.0 * std::numbers::pi * freq_hz / coeffs.rate_hz;
  cplx num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < coeffs.b.size(); ++i) num += coeffs.b[i] * std::polar(1.0, -w * i);
  for (std::size_t i = 0; i < coeffs.a.size(); ++i) den += coeffs.a[i] * std::polar(1.0, -w * i);
  return num / den;
}

std::vector<double> lfilter(const FilterCoefficients& c, std::span<const double> x,
                            std::span<const double> initial_state) {
  const std::size_t m = c.a.size() - 1;
  std::vector<double> z(m, 0.0);
  if (!initial_state.empty()) std::copy(initial_state.begin(), initial_state.end(), z.begin());
  std::vector<double> y(x.size());
  for (std::size_t n = 0; n < x.size(); ++n) {
    const double out = c.b[0] * x[n] + (m > 0 ? z[0] : 0.0);
    for (std::size_t i = 0; i + 1 < m; ++i) z[i] = c.b[i + 1] * x[n] - c.a[i + 1] * out + z[i + 1];
    if (m > 0) z[m - 1] = c.b[m] * x[n] - c.a[m] * out;
    y[n] = out;
  }
  return y;
}

std::vector<double> filter_zero_phase(const FilterCoefficients& coeffs,
                                      std::span<const double> signal) {
  const std::size_t pad = 3 * (std::max(coeffs.a.size(), coeffs.b.size()));
  const std::size_t n = signal.size();
  if (n <= pad) {
    throw Error(ErrorKind::kPrecondition, "signal too short for zero-phase filtering (need > " +
                                              std::to_string(pad) + " samples)");
  }
  std::vector<double> ext;
  ext.reserve(n + 2 * pad);
  for (std::size_t i = pad; i >= 1; --i) ext.push_back(2.0 * signal[0] - signal[i]);
  ext.insert(ext.end(), signal.begin(), signal.end());
  for (std::size_t i = 1; i <= pad; ++i) ext.push_back(2.0 * signal[n - 1] - signal[n - 1 - i]);

  const auto zi = step_initial_state(coeffs);
  auto scaled = [&](double x0) {
    std::vector<double> z(zi);
    for (double& v : z) v *= x0;
    return z;
  };
  auto fwd = lfilter(coeffs, ext, scaled(ext.front()));
  std::reverse(fwd.begin(), fwd.end());
  auto bwd = lfilter(coeffs, fwd, scaled(fwd.front()));
  std::reverse(bwd.begin(), bwd.end());
  return std::vector<double>(bwd.begin() + static_cast<std::ptrdiff_t>(pad),
                             bwd.begin() + static_cast<std::ptrdiff_t>(pad + n));
}

std::vector<double> detect_beats(std::span<const double> bvp, double rate,
                                 const BeatDetectorConfig& config) {
  const std::size_t n = bvp.size();
  std::vector<double> beats;
  if (n < 3) return beats;

  std::vector<double> s1(n + 1, 0.0), s2(n + 1, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    s1[i + 1] = s1[i] + bvp[i];
    s2[i + 1] = s2[i] + bvp[i] * bvp[i];
  }
  const auto half = static_cast<std::size_t>(std::lround(config.threshold_window_s * rate / 2.0));
  auto threshold = [&](std::size_t i) {
    const std::size_t lo = i > half ? i - half : 0;
    const std::size_t hi = std::min(n, i + half + 1);
    const double cnt = static_cast<double>(hi - lo);
    const double m = (s1[hi] - s1[lo]) / cnt;
    const double var = std::max(0.0, (s2[hi] - s2[lo]) / cnt - m * m);
    return m + config.threshold_sd_factor * std::sqrt(var);
  };

  const auto refractory = static_cast<std::size_t>(std::floor(config.refractory_s * rate));
  std::vector<std::size_t> peaks;
  for (std::size_t i = 1; i + 1 < n; ++i) {
    if (!(bvp[i] > bvp[i - 1] && bvp[i] >= bvp[i + 1])) continue;
    if (!(bvp[i] > threshold(i))) continue;
    if (!peaks.empty() && i - peaks.back() < refractory) {
      if (bvp[i] > bvp[peaks.back()]) peaks.back() = i;
      continue;
    }
    peaks.push_back(i);
  }
  beats.reserve(peaks.size());
  for (std::size_t p : peaks) beats.push_back(static_cast<double>(p) / rate);
  return beats;
}

double IbiSeries::drop_fraction() const {
  const std::size_t total = intervals_ms.size() + dropped;
  return total == 0 ? 0.0 : static_cast<double>(dropped) / static_cast<double>(total);
}

IbiSeries beats_to_ibi(std::span<const double> beat_times, const IbiConfig& config) {
  IbiSeries out;
  out.beat_times.assign(beat_times.begin(), beat_times.end());
  if (beat_times.size() < 2) {
    out.insufficient_beats = true;
    return out;
  }
  for (std::size_t k = 0; k + 1 < beat_times.size(); ++k) {
    if (!(beat_times[k + 1] > beat_times[k])) {
      throw Error(ErrorKind::kPrecondition, "beat times must be strictly increasing");
    }
    const double ms = (beat_times[k + 1] - beat_times[k]) * 1000.0;
    if (ms < config.min_ms || ms > config.max_ms) {
      ++out.dropped;
      continue;
    }
    out.intervals_ms.push_back(ms);
    out.end_times.push_back(beat_times[k + 1]);
  }
  return out;
}

IbiSeries ibi_in_window(std::span<const double> beat_times, double t0, double t1,
                        const IbiConfig& config) {
  const auto lo = std::lower_bound(beat_times.begin(), beat_times.end(), t0);
  const auto hi = std::lower_bound(beat_times.begin(), beat_times.end(), t1);
  return beats_to_ibi(std::span<const double>(lo, hi), config);
}

std::string_view to_string(QualityReason reason) {
  switch (reason) {
    case QualityReason::kOk: return "OK";
    case QualityReason::kTooFewBeats: return "TooFewBeats";
    case QualityReason::kIbiOutOfRangeExcess: return "IbiOutOfRangeExcess";
  }
  return "?";
}

SegmentQuality assess_quality(const IbiSeries& ibi, double duration_s,
                              const QualityConfig& config) {
  const double min_beats = config.min_beats_per_50s * duration_s / 50.0;
  if (static_cast<double>(ibi.beat_times.size()) < min_beats || ibi.insufficient_beats) {
    return {false, QualityReason::kTooFewBeats};
  }
  if (ibi.drop_fraction() > config.max_drop_fraction) {
    return {false, QualityReason::kIbiOutOfRangeExcess};
  }
  return {true, QualityReason::kOk};
}

std::vector<WindowSpan> window_slices(std::size_t n_samples, double rate, double window_s,
                                      double stride_s) {
  const auto win = static_cast<std::size_t>(std::lround(window_s * rate));
  const auto stride = static_cast<std::size_t>(std::lround(stride_s * rate));
  if (win == 0 || stride == 0) throw Error(ErrorKind::kPrecondition, "empty window or stride");
  if (n_samples < win) {
    throw Error(ErrorKind::kPrecondition, "segment shorter than one window (" +
                                              std::to_string(n_samples) + " < " +
                                              std::to_string(win) + " samples)");
  }
  std::vector<WindowSpan> out;
  for (std::size_t start = 0; start + win <= n_samples; start += stride) out.push_back({start, win});
  return out;
}

OutlierResult remove_outliers_3sigma(const FeatureTable& table, double sigma,
                                     std::span<const Feature> required) {
  OutlierResult out;
  out.table = table;

  std::map<std::string, std::vector<std::size_t>> groups;
  for (std::size_t i = 0; i < table.size(); ++i) groups[table[i].participant_id].push_back(i);

  for (const auto& [participant, rows] : groups) {
    for (std::size_t f = 0; f < kFeatureCount; ++f) {
      std::vector<std::size_t> idx;
      std::vector<double> vals;
      for (std::size_t r : rows) {
        if (table[r].values[f]) {
          idx.push_back(r);
          vals.push_back(*table[r].values[f]);
        }
      }
      if (vals.size() < 2) continue;
      const double m = stats::mean(vals);
      const double sd = stats::sample_sd(vals);
      if (!(sd > 0.0)) continue;
      for (std::size_t k = 0; k < idx.size(); ++k) {
        if (std::abs(vals[k] - m) > sigma * sd) {
          out.table[idx[k]].values[f].reset();
          out.removed.push_back({participant, static_cast<Feature>(f), table[idx[k]].timestamp,
                                 vals[k], (vals[k] - m) / sd});
        }
      }
    }
  }

  if (!required.empty()) {
    const auto before = out.table.size();
    std::erase_if(out.table, [&](const FeatureVector& v) { return !v.has_all(required); });
    out.rows_dropped = before - out.table.size();
  }
  return out;
}

std::string format_removal_log(const std::vector<OutlierRemoval>& removed,
                               std::string_view comment) {
  std::string out;
  if (!comment.empty()) out += "# " + std::string(comment) + "\n";
  out += "participant,feature,timestamp,value,zscore\n";
  for (const auto& r : removed) {
    out += r.participant_id + "," + std::string(feature_name(r.feature)) + "," +
           csv::format_double(r.timestamp) + "," + csv::format_double(r.value) + "," +
           csv::format_double(r.zscore) + "\n";
  }
  return out;
}

}  // namespace affdrift
