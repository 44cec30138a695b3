#pragma once

// Temporal-shift measures between the period-common shape f_com and the
// second-period total f_com + f_int, their aggregation over participants,
// and the four cross-period train/test cases.

#include <array>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "affdrift/ensemble.hpp"

namespace affdrift {

// Pearson r over grid points; nullopt when either curve is constant or the
// grids have fewer than 3 points or differ in length.
std::optional<double> shape_correlation(std::span<const double> curve_a,
                                        std::span<const double> curve_b);

// Fraction of grid points where the closed intervals [lo_a, hi_a] and
// [lo_b, hi_b] are disjoint.
double ci_nonoverlap(const Band& a, const Band& b);

struct StabilitySummary {
  std::size_t n = 0;
  double median = 0.0;
  double mean = 0.0;
  double q1 = 0.0;
  double q3 = 0.0;
};

StabilitySummary aggregate_stability(std::span<const double> r_values);

enum class CrossCase { kA, kB, kC, kD };
inline constexpr std::array<CrossCase, 4> kAllCases = {CrossCase::kA, CrossCase::kB,
                                                       CrossCase::kC, CrossCase::kD};
std::string_view to_string(CrossCase c);

struct CaseResult {
  CrossCase which = CrossCase::kA;
  std::size_t repeats = 0;  // repeats that produced a test evaluation
  double accuracy = 0.0;
  double accuracy_se = 0.0;
  std::optional<double> auc;
  double auc_se = 0.0;
  std::vector<double> accuracy_per_repeat;
  std::vector<std::optional<double>> auc_per_repeat;
};

struct CaseConfig {
  int n_repeats = 100;
  std::size_t n_per_period = 90;
  EbmConfig ebm;
};

// (a) train P1 / test P1, (b) train P1 / test P2, (c) train P2 / test P2,
// (d) train P1+P2 / test P2. Test rows never overlap the training draw.
// Throws Error(kPrecondition) when a period has no more than n_per_period
// rows or lacks a class.
std::array<CaseResult, 4> cross_period_cases(const Design& participant, const CaseConfig& config);

// Averages over participants of the per-case metric and of its SE; `repeats`
// counts contributing participants.
std::array<CaseResult, 4> summarize_cases(std::span<const std::array<CaseResult, 4>> per_participant);

nlohmann::json to_json(const CaseResult& result, bool per_repeat);

struct FeatureDrift {
  std::string feature;
  std::optional<double> r;                        // between ensemble-mean curves
  std::vector<std::optional<double>> r_repeats;   // per repeat
  double ci_nonoverlap_fraction = 0.0;
};

struct ParticipantDrift {
  std::string participant_id;
  std::vector<FeatureDrift> features;
  std::optional<std::array<CaseResult, 4>> cases;
  std::string skipped_reason;  // non-empty when the participant was skipped
  EnsembleFit ensemble;
};

struct DriftConfig {
  EnsembleConfig ensemble;
  CaseConfig cases;
  bool run_cases = true;
};

struct DriftReport {
  std::vector<std::string> features;
  std::vector<ParticipantDrift> participants;
  std::map<std::string, StabilitySummary> stability;  // by feature
  // Averages over participants: mean metric and mean SE.
  std::array<CaseResult, 4> case_summary{};
};

ParticipantDrift analyze_participant(const std::string& participant_id, const Design& data,
                                     const DriftConfig& config);

DriftReport build_drift_report(const FeatureTable& table, std::span<const Feature> features,
                               const DriftConfig& config);

nlohmann::json to_json(const DriftReport& report);

// Plot-ready tables.
std::string format_shapes_csv(const DriftReport& report, std::string_view comment = {});
std::string format_stability_csv(const DriftReport& report, std::string_view comment = {});

}  // namespace affdrift
