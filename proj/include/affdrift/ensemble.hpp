#pragma once

// Repeated per-period subsampling fits of the interaction EBM, summarized as
// mean shape curves and pointwise percentile bands on a fixed grid.

#include <optional>
#include <span>
#include <vector>

#include "affdrift/ebm.hpp"
#include "affdrift/feature_vector.hpp"

namespace affdrift {

// Rows of `table` having every feature in `features`; also returns the index
// of each kept row in the source table.
Design make_design(const FeatureTable& table, std::span<const Feature> features,
                   std::vector<std::size_t>* source_rows = nullptr);

struct Band {
  std::vector<double> mean;
  std::vector<double> lo;
  std::vector<double> hi;
};

struct FeatureCurves {
  std::string feature;
  std::vector<double> grid;
  Band com;    // f_com
  Band total;  // f_com + f_int
  // Per-repeat curves, [repeat][grid point].
  std::vector<std::vector<double>> com_repeats;
  std::vector<std::vector<double>> total_repeats;
};

struct RepeatMetrics {
  std::size_t train_rows = 0;
  std::size_t test_rows = 0;
  std::optional<Evaluation> test;  // absent when the test set is empty
};

struct EnsembleConfig {
  int n_repeats = 100;
  std::size_t n_per_period = 90;
  std::size_t grid_points = 64;
  double band_lo_pct = 2.5;
  double band_hi_pct = 97.5;
  EbmConfig ebm;
};

struct EnsembleFit {
  int n_repeats = 0;
  bool degraded = false;  // a period had too few rows to hold out a test set
  std::vector<FeatureCurves> curves;
  std::vector<RepeatMetrics> repeats;
};

// 64 equally spaced points over [min, max] of a column (a single point when
// the column is constant).
std::vector<double> shape_grid(std::span<const double> column, std::size_t points);

std::vector<double> evaluate_on_grid(const ShapeFunction& shape, std::span<const double> grid);

// Each repeat draws n_per_period rows without replacement from each period
// for training, holds out the rest for testing, and records f_com and
// f_com + f_int on a grid spanning the full dataset's range of each feature.
// Repeat r uses seeds derived from (config.ebm.seed, r).
EnsembleFit fit_ensemble(const Design& data, const EnsembleConfig& config);

nlohmann::json to_json(const EnsembleFit& fit, bool include_repeats = false);

}  // namespace affdrift
