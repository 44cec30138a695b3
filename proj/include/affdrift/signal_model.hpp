#pragma once

// Domain types for wearable recordings and their arousal annotations, the
// E4-style channel CSV format, and pairing of annotations with the signal
// slices that precede them.

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace affdrift {

enum class ChannelKind { kBvp, kEda, kTemp, kAcc };

std::string_view to_string(ChannelKind kind);
// Nominal sample rate of the reference device for each channel.
double nominal_rate(ChannelKind kind);

struct Vec3 {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;
  bool operator==(const Vec3&) const = default;
};

// Raw ACC integer units per g on the reference device.
inline constexpr double kAccUnitsPerG = 64.0;

// One uniformly sampled sensor stream. Scalar channels use `samples`; ACC
// uses `vectors` (in g). Exactly one of the two is populated.
struct SampledChannel {
  ChannelKind kind = ChannelKind::kBvp;
  double start_time = 0.0;  // epoch seconds
  double rate = 0.0;        // Hz
  std::vector<double> samples;
  std::vector<Vec3> vectors;
  bool nonstandard_rate = false;

  std::size_t size() const { return kind == ChannelKind::kAcc ? vectors.size() : samples.size(); }
  double end_time() const { return start_time + static_cast<double>(size()) / rate; }

  bool operator==(const SampledChannel&) const = default;
};

// Checks the SampledChannel invariants and sets `nonstandard_rate`.
// Throws Error(kValidation).
void validate_channel(SampledChannel& channel);

// Parses the two-header-row channel format: start epoch(s), rate(s), then one
// sample per row (three comma-separated columns for ACC). ACC raw units are
// divided by `acc_units_per_g`.
SampledChannel parse_channel_csv(std::string_view text, ChannelKind kind,
                                 double acc_units_per_g = kAccUnitsPerG);
std::string format_channel_csv(const SampledChannel& channel,
                               double acc_units_per_g = kAccUnitsPerG);

enum class EmotionCategory { kHappy, kNervous, kSad, kRelaxed };

std::string_view to_string(EmotionCategory category);
EmotionCategory parse_category(std::string_view text);

struct EmotionAnnotation {
  double timestamp = 0.0;
  EmotionCategory category = EmotionCategory::kRelaxed;
  std::string sublabel;
  bool operator==(const EmotionAnnotation&) const = default;
};

enum class Arousal : int { kLow = 0, kHigh = 1 };

using ArousalMapping = std::map<EmotionCategory, Arousal>;

// Quadrant mapping of the core affect model: Happy/Nervous activated,
// Sad/Relaxed deactivated.
ArousalMapping default_arousal_mapping();

Arousal map_arousal(EmotionCategory category, const ArousalMapping& mapping);

enum class Period { kP1, kP2 };

std::string_view to_string(Period period);
Period parse_period(std::string_view text);
inline int period_flag(Period p) { return p == Period::kP2 ? 1 : 0; }

// annotations.csv: header `timestamp,category,sublabel`.
std::vector<EmotionAnnotation> parse_annotations_csv(std::string_view text);
std::string format_annotations_csv(const std::vector<EmotionAnnotation>& annotations);

struct RecordingSession {
  std::string participant_id;
  Period period = Period::kP1;
  SampledChannel bvp;
  SampledChannel eda;
  SampledChannel temp;
  SampledChannel acc;
  std::vector<EmotionAnnotation> annotations;
};

// Reads BVP.csv, EDA.csv, TEMP.csv, ACC.csv, annotations.csv and
// session.json from `dir`. Annotations are sorted by time.
RecordingSession load_session(const std::filesystem::path& dir,
                              double acc_units_per_g = kAccUnitsPerG);
void write_session(const RecordingSession& session, const std::filesystem::path& dir,
                   double acc_units_per_g = kAccUnitsPerG);

struct SegmentWindows {
  double label_window_s = 50.0;  // BVP/EDA/TEMP slice ends at the annotation
  double acc_begin_s = 240.0;    // ACC slice covers [t - 240, t - 50)
  double acc_end_s = 50.0;
};

struct LabeledSegment {
  std::string participant_id;
  Period period = Period::kP1;
  double annotation_time = 0.0;
  EmotionCategory category = EmotionCategory::kRelaxed;
  Arousal label = Arousal::kLow;
  double bvp_rate = 0.0;
  double eda_rate = 0.0;
  double temp_rate = 0.0;
  double acc_rate = 0.0;
  std::vector<double> bvp;
  std::vector<double> eda;
  std::vector<double> temp;
  std::vector<Vec3> acc;
};

struct SegmentSkip {
  double annotation_time = 0.0;
  std::string reason;
};

struct SegmentExtraction {
  std::vector<LabeledSegment> segments;
  std::vector<SegmentSkip> skipped;
};

// Half-open sample range [begin, end) of `channel` covering [t0, t1) by
// floor rounding; nullopt if it falls outside the recording.
struct SampleRange {
  std::size_t begin = 0;
  std::size_t end = 0;
};
std::optional<SampleRange> sample_range(const SampledChannel& channel, double t0, double t1);

// One segment per annotation whose slices fit inside the recording; the rest
// are reported in `skipped` with a reason.
SegmentExtraction extract_labeled_segments(const RecordingSession& session,
                                           const ArousalMapping& mapping,
                                           const SegmentWindows& windows = {});

}  // namespace affdrift
