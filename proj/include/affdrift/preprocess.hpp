#pragma once

// BVP conditioning (low-pass design, zero-phase filtering), beat and
// inter-beat-interval extraction, segment quality gating, windowing and
// per-participant 3-sigma outlier removal on the feature table.

#include <complex>
#include <span>
#include <string>
#include <vector>

#include "affdrift/feature_vector.hpp"

namespace affdrift {

// Transfer function b(z)/a(z) with a[0] == 1.
struct FilterCoefficients {
  std::vector<double> b;
  std::vector<double> a;
  int order = 0;
  double cutoff_hz = 0.0;
  double rate_hz = 0.0;
};

// Digital Butterworth low-pass via the bilinear transform with cutoff
// pre-warping, normalized to unit DC gain.
FilterCoefficients design_butterworth_lowpass(int order, double cutoff_hz, double rate_hz);

// H(e^{jw}) at `freq_hz`.
std::complex<double> frequency_response(const FilterCoefficients& coeffs, double freq_hz);

// Causal direct-form II transposed filtering with optional initial state.
std::vector<double> lfilter(const FilterCoefficients& coeffs, std::span<const double> x,
                            std::span<const double> initial_state = {});

// Forward-backward filtering with odd-reflection padding of 3*(order+1)
// samples and steady-state initial conditions on both passes.
std::vector<double> filter_zero_phase(const FilterCoefficients& coeffs,
                                      std::span<const double> signal);

struct BeatDetectorConfig {
  double threshold_window_s = 5.0;
  double threshold_sd_factor = 0.5;
  double refractory_s = 0.33;
};

// Beat times in seconds from the first sample: local maxima above a centered
// rolling mean + k*SD threshold, at most one beat per refractory period (the
// larger peak wins).
std::vector<double> detect_beats(std::span<const double> bvp, double rate,
                                 const BeatDetectorConfig& config = {});

struct IbiConfig {
  double min_ms = 300.0;
  double max_ms = 2000.0;
};

// Validated inter-beat intervals. Interval k spans the beats ending at
// `end_times[k]`; out-of-range intervals are removed and counted in
// `dropped`, so intervals_ms.size() + dropped == beat_times.size() - 1.
struct IbiSeries {
  std::vector<double> beat_times;
  std::vector<double> intervals_ms;
  std::vector<double> end_times;
  std::size_t dropped = 0;
  bool insufficient_beats = false;

  double drop_fraction() const;
};

IbiSeries beats_to_ibi(std::span<const double> beat_times, const IbiConfig& config = {});

// Restricts a series to intervals whose both beats lie in [t0, t1).
IbiSeries ibi_in_window(std::span<const double> beat_times, double t0, double t1,
                        const IbiConfig& config = {});

enum class QualityReason { kOk, kTooFewBeats, kIbiOutOfRangeExcess };

std::string_view to_string(QualityReason reason);

struct SegmentQuality {
  bool accepted = true;
  QualityReason reason = QualityReason::kOk;
};

struct QualityConfig {
  double min_beats_per_50s = 20.0;
  double max_drop_fraction = 0.20;
};

SegmentQuality assess_quality(const IbiSeries& ibi, double duration_s,
                              const QualityConfig& config = {});

struct WindowSpan {
  std::size_t begin = 0;
  std::size_t length = 0;
};

// Windows starting at 0, stride, 2*stride, ... that fit entirely inside
// `n_samples`. Throws Error(kPrecondition) when the segment is shorter than
// one window.
std::vector<WindowSpan> window_slices(std::size_t n_samples, double rate, double window_s = 30.0,
                                      double stride_s = 5.0);

struct OutlierRemoval {
  std::string participant_id;
  Feature feature = Feature::kSD;
  double timestamp = 0.0;
  double value = 0.0;
  double zscore = 0.0;
};

struct OutlierResult {
  FeatureTable table;
  std::vector<OutlierRemoval> removed;
  std::size_t rows_dropped = 0;
};

// Single pass: per participant and feature, mean and sample SD over both
// periods; values with |x - mean| > sigma * SD are nulled (SD == 0 keeps
// everything). Rows left missing any of `required` are dropped afterwards.
OutlierResult remove_outliers_3sigma(const FeatureTable& table, double sigma = 3.0,
                                     std::span<const Feature> required = {});

// Removal log CSV: `participant,feature,timestamp,value,zscore`.
std::string format_removal_log(const std::vector<OutlierRemoval>& removed,
                               std::string_view comment = {});

}  // namespace affdrift
