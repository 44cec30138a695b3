#pragma once

// Ground-truth generators: feature tables drawn from known additive logit
// models (with optional second-period drift), and rendered raw sessions
// whose per-annotation feature values are known by construction.

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "affdrift/feature_vector.hpp"
#include "affdrift/signal_model.hpp"

namespace affdrift::synth {

enum class MarginalKind { kNormal, kUniform };

struct Marginal {
  MarginalKind kind = MarginalKind::kNormal;
  double a = 0.0;  // normal: mean; uniform: low
  double b = 1.0;  // normal: sd;   uniform: high
};

enum class ShapeKind { kZero, kLinear, kLogisticRamp, kGaussianBump };

// linear:         amplitude * (x - center) / width
// logistic_ramp:  amplitude * (sigmoid((x - center) / width) - 1/2)
// gaussian_bump:  amplitude * exp(-(x - center)^2 / (2 width^2))
struct TrueShape {
  ShapeKind kind = ShapeKind::kZero;
  double amplitude = 0.0;
  double center = 0.0;
  double width = 1.0;

  double operator()(double x) const;
};

enum class DriftKind { kNone, kXShift, kYScale };

struct DriftSpec {
  DriftKind kind = DriftKind::kNone;
  double amount = 0.0;  // x-shift: displacement; y-scale: factor
};

struct FeatureTruth {
  Feature feature = Feature::kHR;
  Marginal marginal;
  TrueShape shape;
  DriftSpec drift;

  double f_com(double x) const { return shape(x); }
  // Second-period correction, so the second-period curve is f_com + f_int.
  double f_int(double x) const;
};

struct TruthSpec {
  std::vector<FeatureTruth> features;
  double intercept = 0.0;
  std::size_t n_period1 = 300;
  std::size_t n_period2 = 300;
  std::vector<std::string> participants{"S01"};
  std::uint64_t seed = 0;

  // Throws Error(kValidation) on a non-finite variance or no informative
  // feature.
  void validate() const;
};

struct SampledFeatures {
  FeatureTable table;
  std::vector<double> true_logit;  // parallel to table
};

// Rows for one participant and period. Features not named in the spec are
// left missing.
SampledFeatures sample_features(const TruthSpec& spec, Period period,
                                const std::string& participant_id);

// Both periods for every participant, period 1 first.
SampledFeatures sample_dataset(const TruthSpec& spec);

nlohmann::json to_json(const TruthSpec& spec);
TruthSpec truth_from_json(const nlohmann::json& j);

// Named presets: "null", "x_shift", "y_scale", "calibrated_drift",
// "sfs_benchmark".
TruthSpec truth_preset(std::string_view name);
std::vector<std::string> truth_preset_names();

struct BvpRendering {
  std::vector<double> samples;
  std::vector<double> beat_times;  // seconds from the first sample
};

// Raised-cosine pulses (unit height, `pulse_width_s` wide) centred on
// cumulative beat times starting at `first_beat_s`. The rendering ends
// `first_beat_s` after the last beat unless `duration_s` is given.
BvpRendering render_bvp(std::span<const double> intervals_ms, double rate = 64.0,
                        double first_beat_s = 0.5, double pulse_width_s = 0.25,
                        std::optional<double> duration_s = std::nullopt);

// Intervals mean_ms + amplitude_ms * sin(2 pi f t_k) at successive beat times
// t_k, covering `duration_s` seconds.
std::vector<double> modulated_intervals(double mean_ms, double amplitude_ms, double freq_hz,
                                        double duration_s);

struct SessionSpec {
  std::vector<std::string> participants{"S01"};
  int sessions_per_period = 1;
  double duration_s = 3600.0;
  int annotations_per_session = 10;
  double first_annotation_s = 300.0;
  double start_epoch = 1700000000.0;
  // Weight of EDA level on the arousal logit in the second period (the first
  // period uses eda_weight).
  double eda_weight = 1.0;
  double period2_eda_weight = 1.0;
  std::uint64_t seed = 0;
};

nlohmann::json to_json(const SessionSpec& spec);
SessionSpec session_spec_from_json(const nlohmann::json& j);

struct AnnotationTruth {
  double timestamp = 0.0;
  double hr_bpm = 0.0;     // 60000 / mean of true intervals inside the 50 s window
  double eda_min = 0.0;
  double temp_ave = 0.0;
  double acc_max = 0.0;
  std::vector<double> intervals_ms;  // true intervals inside the window
};

struct RenderedSession {
  RecordingSession session;
  std::vector<AnnotationTruth> truth;
};

RenderedSession render_session(const SessionSpec& spec, const std::string& participant_id,
                               Period period, int session_index);

}  // namespace affdrift::synth
