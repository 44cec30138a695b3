#pragma once

#include <array>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "affdrift/signal_model.hpp"

namespace affdrift {

// The 17 per-segment features, in canonical table order. The order is also
// the tie-break order for feature selection.
enum class Feature : int {
  kSD,
  kCV,
  kRMSSD,
  kPNN50,
  kHR,
  kL,
  kT,
  kLF,
  kHF,
  kLF_HF,
  kEDA_ave,
  kEDA_max,
  kEDA_min,
  kEDA_diff,
  kTemp_ave,
  kAcc_ave,
  kAcc_max,
};

inline constexpr std::size_t kFeatureCount = 17;

inline constexpr std::array<std::string_view, kFeatureCount> kFeatureNames = {
    "SD",      "CV",      "RMSSD",   "pNN50",    "HR",       "L",
    "T",       "LF",      "HF",      "LF_HF",    "EDA_ave",  "EDA_max",
    "EDA_min", "EDA_diff", "Temp_ave", "Acc_ave", "Acc_max"};

inline std::string_view feature_name(Feature f) { return kFeatureNames[static_cast<int>(f)]; }
Feature parse_feature(std::string_view name);
std::vector<Feature> parse_features(const std::vector<std::string>& names);
std::vector<std::string> feature_names(std::span<const Feature> features);

using FeatureValues = std::array<std::optional<double>, kFeatureCount>;

// One labeled row of the feature table. Missing features are nullopt.
struct FeatureVector {
  std::string participant_id;
  Period period = Period::kP1;
  double timestamp = 0.0;
  Arousal label = Arousal::kLow;
  FeatureValues values{};

  std::optional<double>& operator[](Feature f) { return values[static_cast<int>(f)]; }
  const std::optional<double>& operator[](Feature f) const { return values[static_cast<int>(f)]; }
  bool has_all(std::span<const Feature> features) const;
};

using FeatureTable = std::vector<FeatureVector>;

// Feature table CSV: `participant,period,timestamp,label,<17 features>`,
// missing values as empty fields. Lines starting with '#' are comments.
std::string format_feature_table(const FeatureTable& table, std::string_view comment = {});
FeatureTable parse_feature_table(std::string_view text);

}  // namespace affdrift
