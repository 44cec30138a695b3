#include "affdrift/selection.hpp"

#include <algorithm>

#include "affdrift/ensemble.hpp"
#include "affdrift/error.hpp"
#include "affdrift/rng.hpp"

namespace affdrift {

std::vector<std::size_t> stratified_folds(std::span<const int> labels, std::size_t folds,
                                          std::uint64_t seed) {
  if (folds < 2) throw Error(ErrorKind::kValidation, "selection needs at least 2 folds");
  std::vector<std::size_t> fold_of(labels.size(), 0);
  Rng rng(derive_seed(seed, {0xf01dULL}));
  for (int cls = 0; cls < 2; ++cls) {
    std::vector<std::size_t> rows;
    for (std::size_t i = 0; i < labels.size(); ++i) {
      if (labels[i] == cls) rows.push_back(i);
    }
    std::shuffle(rows.begin(), rows.end(), rng);
    for (std::size_t k = 0; k < rows.size(); ++k) fold_of[rows[k]] = k % folds;
  }
  return fold_of;
}

double cross_validated_accuracy(const FeatureTable& table, std::span<const Feature> features,
                                std::span<const std::size_t> fold_of,
                                const SelectionConfig& config) {
  std::vector<std::size_t> source;
  const Design data = make_design(table, features, &source);
  // Period flags are irrelevant to the interaction-free wrapper.
  double total = 0.0;
  std::size_t used = 0;
  for (std::size_t fold = 0; fold < config.folds; ++fold) {
    std::vector<std::size_t> train, test;
    for (std::size_t r = 0; r < data.rows(); ++r) {
      (fold_of[source[r]] == fold ? test : train).push_back(r);
    }
    if (test.empty() || train.empty()) continue;
    Design tr = data.subset(train);
    const int pos = static_cast<int>(std::count(tr.labels.begin(), tr.labels.end(), 1));
    if (pos == 0 || pos == static_cast<int>(tr.rows())) continue;
    EbmConfig wrapper = config.wrapper;
    wrapper.interactions = false;
    wrapper.seed = derive_seed(config.seed, {fold, 0x5e1ULL});
    const EbmModel model = fit_ebm(tr, wrapper);
    total += evaluate(model, data.subset(test)).accuracy;
    ++used;
  }
  return used == 0 ? 0.0 : total / static_cast<double>(used);
}

SelectionResult sequential_forward_select(const FeatureTable& table,
                                          const SelectionConfig& config) {
  if (config.k > kFeatureCount) throw Error(ErrorKind::kValidation, "k exceeds feature count");
  std::vector<int> labels;
  for (const auto& row : table) labels.push_back(static_cast<int>(row.label));
  const auto positives = std::count(labels.begin(), labels.end(), 1);
  if (positives == 0 || positives == static_cast<long>(labels.size())) {
    throw Error(ErrorKind::kValidation, "feature selection needs both arousal classes");
  }
  const auto fold_of = stratified_folds(labels, config.folds, config.seed);

  SelectionResult result;
  result.config = config;
  std::vector<char> taken(kFeatureCount, 0);
  while (result.selected.size() < config.k) {
    std::optional<Feature> best;
    double best_score = -1.0;
    for (std::size_t f = 0; f < kFeatureCount; ++f) {
      if (taken[f]) continue;
      auto candidate = result.selected;
      candidate.push_back(static_cast<Feature>(f));
      const double score = cross_validated_accuracy(table, candidate, fold_of, config);
      if (score > best_score) {
        best_score = score;
        best = static_cast<Feature>(f);
      }
    }
    taken[static_cast<int>(*best)] = 1;
    result.selected.push_back(*best);
    result.trajectory.push_back({*best, best_score});
  }
  return result;
}

nlohmann::json to_json(const SelectionResult& r) {
  nlohmann::ordered_json j;
  j["selected"] = feature_names(r.selected);
  auto steps = nlohmann::ordered_json::array();
  for (const auto& s : r.trajectory) {
    steps.push_back({{"feature", std::string(feature_name(s.added))}, {"score", s.score}});
  }
  j["trajectory"] = std::move(steps);
  j["config"] = {{"k", r.config.k},
                 {"folds", r.config.folds},
                 {"seed", r.config.seed},
                 {"wrapper", to_json(r.config.wrapper)}};
  return j;
}

SelectionResult selection_from_json(const nlohmann::json& j) {
  try {
    SelectionResult r;
    r.selected = parse_features(j.at("selected").get<std::vector<std::string>>());
    for (const auto& s : j.at("trajectory")) {
      r.trajectory.push_back(
          {parse_feature(s.at("feature").get<std::string>()), s.at("score").get<double>()});
    }
    const auto& c = j.at("config");
    r.config.k = c.at("k").get<std::size_t>();
    r.config.folds = c.at("folds").get<std::size_t>();
    r.config.seed = c.at("seed").get<std::uint64_t>();
    if (c.contains("wrapper")) r.config.wrapper = ebm_config_from_json(c.at("wrapper"));
    return r;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::kParse, std::string("selection json: ") + e.what());
  }
}

}  // namespace affdrift
