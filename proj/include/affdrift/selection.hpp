#pragma once

#include <cstdint>
#include <vector>

#include <json.hpp>

#include "affdrift/ebm.hpp"
#include "affdrift/feature_vector.hpp"

namespace affdrift {

struct SelectionConfig {
  std::size_t k = 5;
  std::size_t folds = 5;
  std::uint64_t seed = 0;
  // Wrapper model: interaction-free EBM with a shorter schedule.
  EbmConfig wrapper{.rounds = 100, .learning_rate = 0.1, .max_bins = 32, .inner_bags = 0,
                    .interactions = false, .seed = 0};
};

struct SelectionStep {
  Feature added = Feature::kSD;
  double score = 0.0;  // mean cross-validated accuracy
};

struct SelectionResult {
  std::vector<Feature> selected;
  std::vector<SelectionStep> trajectory;
  SelectionConfig config;
};

// Stratified fold id per row (labels 0/1), shuffled within each class.
std::vector<std::size_t> stratified_folds(std::span<const int> labels, std::size_t folds,
                                          std::uint64_t seed);

// Mean stratified k-fold accuracy of the wrapper model on `features`, over
// the rows of `table` that have all of them. Folds are assigned to the
// complete rows via `fold_of` (indexed by table row).
double cross_validated_accuracy(const FeatureTable& table, std::span<const Feature> features,
                                std::span<const std::size_t> fold_of,
                                const SelectionConfig& config);

// Greedy forward selection over the 17 features. Ties go to the feature
// earliest in canonical order. Throws Error(kValidation) for single-class
// data.
SelectionResult sequential_forward_select(const FeatureTable& table, const SelectionConfig& config);

nlohmann::json to_json(const SelectionResult& result);
SelectionResult selection_from_json(const nlohmann::json& j);

}  // namespace affdrift
