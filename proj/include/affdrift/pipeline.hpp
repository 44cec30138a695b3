#pragma once

// Stage drivers behind the command-line tool. Every artifact a stage writes
// carries the hash of the canonical config, and stages that read earlier
// artifacts refuse ones produced under a different config.

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "affdrift/drift.hpp"
#include "affdrift/features.hpp"
#include "affdrift/selection.hpp"

namespace affdrift {

struct PipelineConfig {
  std::string sessions_dir = "sessions";
  std::string out_dir = "out";

  int filter_order = 4;
  double filter_cutoff_hz = 3.0;
  double min_beats_per_50s = 20.0;
  double max_ibi_drop_fraction = 0.2;
  double outlier_sigma = 3.0;

  double window_s = 30.0;
  double stride_s = 5.0;

  std::size_t select_k = 5;
  std::size_t select_folds = 5;
  int select_rounds = 100;
  // When non-empty, drift/fit/eval use these instead of selection.json.
  std::vector<std::string> features;

  int rounds = 500;
  double learning_rate = 0.1;
  std::size_t max_bins = 32;
  int inner_bags = 8;
  int n_repeats = 100;
  std::size_t n_per_period = 90;
  std::size_t grid_points = 64;

  std::uint64_t seed = 0;

  // Throws Error(kValidation) when a value is out of its documented range.
  void validate() const;

  FeatureConfig feature_config() const;
  SelectionConfig selection_config() const;
  EbmConfig ebm_config() const;
  EnsembleConfig ensemble_config() const;
  CaseConfig case_config() const;
};

// Full config including paths.
nlohmann::json to_json(const PipelineConfig& config);

// Unknown keys are rejected; missing keys keep their defaults.
PipelineConfig pipeline_config_from_json(const nlohmann::json& j);

// FNV-1a (hex) over the canonical JSON of the analysis parameters. Paths are
// excluded so moving the output directory does not change the hash.
std::string config_hash(const PipelineConfig& config);

// Applies AFFDRIFT_SESSIONS, AFFDRIFT_OUT and AFFDRIFT_SEED through `getenv`.
void apply_env_overrides(PipelineConfig& config,
                         const std::function<const char*(const char*)>& getenv);

// Non-fatal messages a stage wants surfaced to the user.
using WarningSink = std::function<void(const std::string&)>;

// Writes inventory.json. Returns the number of sessions found.
std::size_t cmd_ingest(const PipelineConfig& config, const WarningSink& warn = {});

// Writes features.csv, outliers.csv and rejected_segments.csv. Returns rows kept.
std::size_t cmd_features(const PipelineConfig& config, const WarningSink& warn = {});

void cmd_select(const PipelineConfig& config, const WarningSink& warn = {});

// Writes fit_<participant>.json: the repeated-subsample ensemble plus one
// model fitted on all of the participant's rows.
void cmd_fit(const PipelineConfig& config, const std::string& participant_id,
             const WarningSink& warn = {});

// Writes cases.json with the four cross-period cases per participant.
void cmd_eval(const PipelineConfig& config, const WarningSink& warn = {});

// Writes drift_report.json, shapes.csv and stability.csv.
void cmd_drift(const PipelineConfig& config, const WarningSink& warn = {});

// Spec JSON: {"kind": "features", "preset": name | "truth": {...}} writes
// features.csv and truth.json; {"kind": "sessions", "sessions": {...}} writes a
// session tree under sessions_dir plus truth.json.
void cmd_synth(const PipelineConfig& config, const nlohmann::json& spec,
               const WarningSink& warn = {});

// Writes report.md from drift_report.json, cases.json and (if present)
// selection.json.
void cmd_report(const PipelineConfig& config, const WarningSink& warn = {});

}  // namespace affdrift
