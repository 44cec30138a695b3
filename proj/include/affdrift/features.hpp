#pragma once

// Per-segment feature extraction: HRV time-domain, Poincaré and spectral
// features from BVP-derived intervals (averaged over overlapping windows),
// plus EDA, skin temperature and acceleration summaries.

#include <optional>
#include <span>
#include <vector>

#include "affdrift/feature_vector.hpp"
#include "affdrift/preprocess.hpp"
#include "affdrift/signal_model.hpp"

namespace affdrift {

struct HrvTimeFeatures {
  std::optional<double> sd;
  std::optional<double> cv;
  std::optional<double> rmssd;
  std::optional<double> pnn50;
  std::optional<double> hr;
};

HrvTimeFeatures hrv_time_features(std::span<const double> intervals_ms);

struct PoincareAxes {
  std::optional<double> long_axis;   // L = scale * SD2
  std::optional<double> short_axis;  // T = scale * SD1
};

PoincareAxes poincare_axes(std::span<const double> intervals_ms, double axis_scale = 4.0);

struct SpectralConfig {
  double resample_hz = 4.0;
  double lf_low = 0.04;
  double lf_high = 0.15;
  double hf_low = 0.15;
  double hf_high = 0.40;
  std::size_t min_intervals = 4;
  double min_span_s = 10.0;
  // HF at or below this (ms^2) counts as zero for the ratio.
  double hf_floor = 1e-12;
};

struct HrvFreqFeatures {
  std::optional<double> lf;
  std::optional<double> hf;
  std::optional<double> lf_hf;
};

// Cubic-spline tachogram at `resample_hz`, mean removed, Hann-windowed
// one-sided periodogram, band powers by the rectangle rule.
HrvFreqFeatures hrv_freq_features(std::span<const double> end_times_s,
                                  std::span<const double> intervals_ms,
                                  const SpectralConfig& config = {});

struct EdaFeatures {
  std::optional<double> ave;
  std::optional<double> max;
  std::optional<double> min;
  std::optional<double> diff;
};

EdaFeatures eda_features(std::span<const double> eda);
std::optional<double> temp_feature(std::span<const double> temp);

struct AccFeatures {
  std::optional<double> ave;
  std::optional<double> max;
};

AccFeatures acc_features(std::span<const Vec3> acc);

// Arithmetic mean over windows; missing if any window is missing.
std::optional<double> average_windows(std::span<const std::optional<double>> per_window);

struct FeatureConfig {
  int filter_order = 4;
  double filter_cutoff_hz = 3.0;
  double window_s = 30.0;
  double stride_s = 5.0;
  double poincare_scale = 4.0;
  BeatDetectorConfig detector;
  IbiConfig ibi;
  QualityConfig quality;
  SpectralConfig spectral;
};

// Filters BVP, detects beats over the whole segment and computes its quality.
struct BvpAnalysis {
  std::vector<double> beat_times;
  IbiSeries ibi;
  SegmentQuality quality;
};

BvpAnalysis analyze_bvp(const LabeledSegment& segment, const FeatureConfig& config = {});

// Full 17-feature vector for a segment. Throws Error(kValidation) when the
// segment fails the quality gate.
FeatureVector extract_feature_vector(const LabeledSegment& segment,
                                     const FeatureConfig& config = {});

// Same, reusing a precomputed BVP analysis.
FeatureVector extract_feature_vector(const LabeledSegment& segment, const BvpAnalysis& bvp,
                                     const FeatureConfig& config);

}  // namespace affdrift
