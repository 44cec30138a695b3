#include "affdrift/ensemble.hpp"

#include <algorithm>

#include "affdrift/error.hpp"
#include "affdrift/rng.hpp"
#include "affdrift/stats.hpp"

namespace affdrift {

Design make_design(const FeatureTable& table, std::span<const Feature> features,
                   std::vector<std::size_t>* source_rows) {
  Design d;
  d.feature_names = feature_names(features);
  d.columns.resize(features.size());
  if (source_rows) source_rows->clear();
  for (std::size_t r = 0; r < table.size(); ++r) {
    const auto& row = table[r];
    if (!row.has_all(features)) continue;
    for (std::size_t f = 0; f < features.size(); ++f) d.columns[f].push_back(*row[features[f]]);
    d.labels.push_back(static_cast<int>(row.label));
    d.period.push_back(period_flag(row.period));
    if (source_rows) source_rows->push_back(r);
  }
  return d;
}

std::vector<double> shape_grid(std::span<const double> column, std::size_t points) {
  if (column.empty()) throw Error(ErrorKind::kPrecondition, "shape_grid: empty column");
  const auto [lo, hi] = std::minmax_element(column.begin(), column.end());
  if (*lo == *hi || points < 2) return {*lo};
  std::vector<double> grid(points);
  for (std::size_t g = 0; g < points; ++g) {
    grid[g] = *lo + (*hi - *lo) * static_cast<double>(g) / static_cast<double>(points - 1);
  }
  grid.back() = *hi;
  return grid;
}

std::vector<double> evaluate_on_grid(const ShapeFunction& shape, std::span<const double> grid) {
  std::vector<double> out;
  out.reserve(grid.size());
  for (double x : grid) out.push_back(shape(x));
  return out;
}

namespace {

Band summarize(const std::vector<std::vector<double>>& repeats, double lo_pct, double hi_pct) {
  Band band;
  if (repeats.empty()) return band;
  const std::size_t points = repeats.front().size();
  std::vector<double> column(repeats.size());
  for (std::size_t g = 0; g < points; ++g) {
    for (std::size_t r = 0; r < repeats.size(); ++r) column[r] = repeats[r][g];
    band.mean.push_back(stats::mean(column));
    band.lo.push_back(stats::percentile(column, lo_pct));
    band.hi.push_back(stats::percentile(column, hi_pct));
    // Guard the ordering against rounding in the mean of identical values.
    band.lo.back() = std::min(band.lo.back(), band.mean.back());
    band.hi.back() = std::max(band.hi.back(), band.mean.back());
  }
  return band;
}

}  // namespace

EnsembleFit fit_ensemble(const Design& data, const EnsembleConfig& config) {
  data.validate();
  if (config.n_repeats < 1) throw Error(ErrorKind::kValidation, "n_repeats must be >= 1");
  std::vector<std::size_t> by_period[2];
  for (std::size_t i = 0; i < data.rows(); ++i) by_period[data.period[i]].push_back(i);

  EnsembleFit fit;
  fit.n_repeats = config.n_repeats;
  fit.degraded = by_period[0].size() <= config.n_per_period ||
                 by_period[1].size() <= config.n_per_period;

  const std::size_t nf = data.features();
  std::vector<std::vector<double>> grids;
  for (std::size_t f = 0; f < nf; ++f) {
    grids.push_back(shape_grid(data.columns[f], config.grid_points));
    FeatureCurves c;
    c.feature = data.feature_names[f];
    c.grid = grids.back();
    fit.curves.push_back(std::move(c));
  }

  for (int r = 0; r < config.n_repeats; ++r) {
    Rng rng(derive_seed(config.ebm.seed, {static_cast<std::uint64_t>(r), 1}));
    std::vector<std::size_t> train, test;
    for (const auto& rows : by_period) {
      const auto picks = sample_without_replacement(rows.size(), config.n_per_period, rng);
      std::vector<char> chosen(rows.size(), 0);
      for (std::size_t p : picks) chosen[p] = 1;
      for (std::size_t k = 0; k < rows.size(); ++k) (chosen[k] ? train : test).push_back(rows[k]);
    }
    std::sort(train.begin(), train.end());
    std::sort(test.begin(), test.end());

    EbmConfig ebm = config.ebm;
    ebm.seed = derive_seed(config.ebm.seed, {static_cast<std::uint64_t>(r), 2});
    const EbmModel model = fit_ebm(data.subset(train), ebm);

    RepeatMetrics metrics;
    metrics.train_rows = train.size();
    metrics.test_rows = test.size();
    if (!test.empty()) metrics.test = evaluate(model, data.subset(test));
    fit.repeats.push_back(metrics);

    for (std::size_t f = 0; f < nf; ++f) {
      auto com = evaluate_on_grid(model.f_com[f], grids[f]);
      auto total = evaluate_on_grid(model.f_int[f], grids[f]);
      for (std::size_t g = 0; g < total.size(); ++g) total[g] += com[g];
      fit.curves[f].com_repeats.push_back(std::move(com));
      fit.curves[f].total_repeats.push_back(std::move(total));
    }
  }

  for (auto& c : fit.curves) {
    c.com = summarize(c.com_repeats, config.band_lo_pct, config.band_hi_pct);
    c.total = summarize(c.total_repeats, config.band_lo_pct, config.band_hi_pct);
  }
  return fit;
}

nlohmann::json to_json(const EnsembleFit& fit, bool include_repeats) {
  nlohmann::ordered_json j;
  j["n_repeats"] = fit.n_repeats;
  j["degraded"] = fit.degraded;
  auto curves = nlohmann::ordered_json::array();
  for (const auto& c : fit.curves) {
    nlohmann::ordered_json cj;
    cj["feature"] = c.feature;
    cj["grid"] = c.grid;
    cj["com"] = {{"mean", c.com.mean}, {"lo", c.com.lo}, {"hi", c.com.hi}};
    cj["total"] = {{"mean", c.total.mean}, {"lo", c.total.lo}, {"hi", c.total.hi}};
    if (include_repeats) {
      cj["com_repeats"] = c.com_repeats;
      cj["total_repeats"] = c.total_repeats;
    }
    curves.push_back(std::move(cj));
  }
  j["curves"] = std::move(curves);
  auto reps = nlohmann::ordered_json::array();
  for (const auto& m : fit.repeats) {
    nlohmann::ordered_json mj{{"train_rows", m.train_rows}, {"test_rows", m.test_rows}};
    if (m.test) {
      mj["accuracy"] = m.test->accuracy;
      mj["auc"] = m.test->auc ? nlohmann::ordered_json(*m.test->auc) : nlohmann::ordered_json();
    }
    reps.push_back(std::move(mj));
  }
  j["repeats"] = std::move(reps);
  return j;
}

}  // namespace affdrift
