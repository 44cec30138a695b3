#pragma once

// Explainable boosting machine with period interaction:
//
//   logit P(y = 1) = intercept + sum_i f_com_i(x_i)
//                    + period * (period_offset + sum_i f_int_i(x_i))
//
// Each shape is piecewise constant on quantile bins of its feature and is
// learned by cyclic gradient boosting of the logistic loss.

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

namespace affdrift {

// Column-major training/evaluation data for the model features.
struct Design {
  std::vector<std::string> feature_names;
  std::vector<std::vector<double>> columns;  // columns[f][row]
  std::vector<int> labels;                   // 0/1
  std::vector<int> period;                   // 0 = first period, 1 = second

  std::size_t rows() const { return labels.size(); }
  std::size_t features() const { return columns.size(); }
  std::vector<double> row(std::size_t r) const;
  Design subset(std::span<const std::size_t> rows) const;
  // Throws Error(kValidation) on ragged columns or non-binary labels/periods.
  void validate() const;
};

struct BinSpec {
  std::vector<double> cuts;  // strictly increasing

  std::size_t bins() const { return cuts.size() + 1; }
  // Number of cuts <= x; values beyond the extremes clamp to the edge bins.
  std::size_t bin_of(double x) const;
};

// Equal-frequency cuts at midpoints between distinct neighbouring values.
BinSpec bin_feature(std::span<const double> values, std::size_t max_bins = 32);

struct ShapeFunction {
  std::string feature;
  BinSpec bins;
  std::vector<double> values;  // one per bin

  double operator()(double x) const { return values[bins.bin_of(x)]; }
};

struct EbmConfig {
  int rounds = 500;
  double learning_rate = 0.1;
  std::size_t max_bins = 32;
  // 0 disables bagging (each update uses the full training set once).
  int inner_bags = 8;
  bool interactions = true;
  std::uint64_t seed = 0;
};

nlohmann::json to_json(const EbmConfig& config);
EbmConfig ebm_config_from_json(const nlohmann::json& j, EbmConfig defaults = {});

struct EbmModel {
  double intercept = 0.0;
  double period_offset = 0.0;
  std::vector<std::string> features;
  std::vector<ShapeFunction> f_com;
  std::vector<ShapeFunction> f_int;  // empty shapes (all zero) when interactions are off
  EbmConfig config;

  double predict_logit(std::span<const double> x, int period) const;
  double predict_proba(std::span<const double> x, int period) const;
};

struct FitTrace {
  // Mean training logistic loss before boosting (index 0) and after each round.
  std::vector<double> loss;
};

// Throws Error(kValidation) for a single-class training set, and
// Error(kPrecondition) when interactions are requested with fewer than two
// rows in either period.
EbmModel fit_ebm(const Design& train, const EbmConfig& config, FitTrace* trace = nullptr);

struct Evaluation {
  double accuracy = 0.0;
  std::optional<double> auc;
  std::size_t n = 0;
};

// Rank-statistic AUC with ties counted as one half; nullopt unless both
// classes are present.
std::optional<double> roc_auc(std::span<const double> scores, std::span<const int> labels);

// Accuracy at probability threshold 0.5 and AUC. Throws on an empty set.
Evaluation evaluate(const EbmModel& model, const Design& test);

nlohmann::json to_json(const EbmModel& model);
EbmModel ebm_model_from_json(const nlohmann::json& j);

}  // namespace affdrift
