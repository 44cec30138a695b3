#include "affdrift/ebm.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "affdrift/error.hpp"
#include "affdrift/rng.hpp"
#include "affdrift/stats.hpp"

namespace affdrift {

std::vector<double> Design::row(std::size_t r) const {
  std::vector<double> out(columns.size());
  for (std::size_t f = 0; f < columns.size(); ++f) out[f] = columns[f][r];
  return out;
}

Design Design::subset(std::span<const std::size_t> rows) const {
  Design out;
  out.feature_names = feature_names;
  out.columns.resize(columns.size());
  for (std::size_t f = 0; f < columns.size(); ++f) {
    out.columns[f].reserve(rows.size());
    for (std::size_t r : rows) out.columns[f].push_back(columns[f][r]);
  }
  for (std::size_t r : rows) {
    out.labels.push_back(labels[r]);
    out.period.push_back(period[r]);
  }
  return out;
}

void Design::validate() const {
  if (feature_names.size() != columns.size() || period.size() != labels.size()) {
    throw Error(ErrorKind::kValidation, "design: inconsistent dimensions");
  }
  for (const auto& c : columns) {
    if (c.size() != labels.size()) throw Error(ErrorKind::kValidation, "design: ragged column");
    for (double v : c) {
      if (!std::isfinite(v)) throw Error(ErrorKind::kValidation, "design: non-finite value");
    }
  }
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if ((labels[i] != 0 && labels[i] != 1) || (period[i] != 0 && period[i] != 1)) {
      throw Error(ErrorKind::kValidation, "design: labels and periods must be 0/1");
    }
  }
}

std::size_t BinSpec::bin_of(double x) const {
  return static_cast<std::size_t>(std::upper_bound(cuts.begin(), cuts.end(), x) - cuts.begin());
}

BinSpec bin_feature(std::span<const double> values, std::size_t max_bins) {
  if (values.empty()) throw Error(ErrorKind::kPrecondition, "bin_feature: no values");
  std::vector<double> sorted(values.begin(), values.end());
  std::sort(sorted.begin(), sorted.end());
  const std::size_t n = sorted.size();
  BinSpec spec;
  if (max_bins < 2) return spec;
  for (std::size_t k = 1; k < max_bins; ++k) {
    // Boundary between positions q-1 and q; slide up to the next change in
    // value so tied runs are never split.
    std::size_t q = (k * n + max_bins / 2) / max_bins;
    if (q == 0) q = 1;
    while (q < n && sorted[q - 1] == sorted[q]) ++q;
    if (q >= n) break;
    const double cut = sorted[q - 1] + (sorted[q] - sorted[q - 1]) / 2.0;
    if (spec.cuts.empty() || cut > spec.cuts.back()) spec.cuts.push_back(cut);
  }
  return spec;
}

nlohmann::json to_json(const EbmConfig& c) {
  return nlohmann::ordered_json{{"rounds", c.rounds},
                                {"learning_rate", c.learning_rate},
                                {"max_bins", c.max_bins},
                                {"inner_bags", c.inner_bags},
                                {"interactions", c.interactions},
                                {"seed", c.seed}};
}

EbmConfig ebm_config_from_json(const nlohmann::json& j, EbmConfig c) {
  c.rounds = j.value("rounds", c.rounds);
  c.learning_rate = j.value("learning_rate", c.learning_rate);
  c.max_bins = j.value("max_bins", c.max_bins);
  c.inner_bags = j.value("inner_bags", c.inner_bags);
  c.interactions = j.value("interactions", c.interactions);
  c.seed = j.value("seed", c.seed);
  if (c.rounds < 0 || !(c.learning_rate > 0.0) || c.max_bins < 1 || c.inner_bags < 0) {
    throw Error(ErrorKind::kValidation, "ebm config out of range");
  }
  return c;
}

double EbmModel::predict_logit(std::span<const double> x, int period) const {
  if (x.size() != f_com.size()) {
    throw Error(ErrorKind::kValidation, "predict: expected " + std::to_string(f_com.size()) +
                                            " feature values, got " + std::to_string(x.size()));
  }
  double s = intercept;
  for (std::size_t i = 0; i < f_com.size(); ++i) {
    if (!std::isfinite(x[i])) throw Error(ErrorKind::kValidation, "predict: missing feature value");
    s += f_com[i](x[i]);
  }
  if (period == 1) {
    s += period_offset;
    for (std::size_t i = 0; i < f_int.size(); ++i) s += f_int[i](x[i]);
  }
  return s;
}

double EbmModel::predict_proba(std::span<const double> x, int period) const {
  return stats::logistic(predict_logit(x, period));
}

namespace {

// One additive term during fitting: which feature it reads, which rows it
// applies to, and its bin values.
struct Term {
  std::size_t feature = 0;
  bool period2_only = false;
  std::vector<std::size_t> rows;  // active rows
  std::vector<double> values;
};

double mean_loss(std::span<const double> scores, std::span<const int> labels) {
  double s = 0.0;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    s += stats::softplus(scores[i]) - labels[i] * scores[i];
  }
  return scores.empty() ? 0.0 : s / static_cast<double>(scores.size());
}

}  // namespace

EbmModel fit_ebm(const Design& train, const EbmConfig& config, FitTrace* trace) {
  train.validate();
  const std::size_t n = train.rows();
  const std::size_t nf = train.features();
  const double positives = std::accumulate(train.labels.begin(), train.labels.end(), 0.0);
  if (n == 0 || positives == 0.0 || positives == static_cast<double>(n)) {
    throw Error(ErrorKind::kValidation, "fit_ebm: training data must contain both classes");
  }
  std::vector<std::size_t> p2_rows;
  for (std::size_t i = 0; i < n; ++i) {
    if (train.period[i] == 1) p2_rows.push_back(i);
  }
  const bool interactions = config.interactions;
  if (interactions && (p2_rows.size() < 2 || n - p2_rows.size() < 2)) {
    throw Error(ErrorKind::kPrecondition,
                "fit_ebm: interactions need at least two rows in each period");
  }

  EbmModel model;
  model.features = train.feature_names;
  model.config = config;
  const double base = positives / static_cast<double>(n);
  model.intercept = std::log(base / (1.0 - base));

  std::vector<BinSpec> specs;
  std::vector<std::vector<std::size_t>> bin_index(nf);
  for (std::size_t f = 0; f < nf; ++f) {
    specs.push_back(bin_feature(train.columns[f], config.max_bins));
    bin_index[f].resize(n);
    for (std::size_t i = 0; i < n; ++i) bin_index[f][i] = specs[f].bin_of(train.columns[f][i]);
  }

  std::vector<std::size_t> all_rows(n);
  std::iota(all_rows.begin(), all_rows.end(), 0);
  std::vector<Term> terms;
  for (std::size_t f = 0; f < nf; ++f) {
    terms.push_back({f, false, all_rows, std::vector<double>(specs[f].bins(), 0.0)});
  }
  if (interactions) {
    for (std::size_t f = 0; f < nf; ++f) {
      terms.push_back({f, true, p2_rows, std::vector<double>(specs[f].bins(), 0.0)});
    }
  }

  // Bootstrap multiplicities per inner bag, drawn once per fit.
  Rng rng(derive_seed(config.seed, {0xb0075ULL}));
  const int bags = config.inner_bags;
  std::vector<std::vector<double>> bag_weight;
  for (int b = 0; b < bags; ++b) {
    std::vector<double> w(n, 0.0);
    std::uniform_int_distribution<std::size_t> pick(0, n - 1);
    for (std::size_t k = 0; k < n; ++k) w[pick(rng)] += 1.0;
    bag_weight.push_back(std::move(w));
  }

  std::vector<double> score(n, model.intercept);
  std::vector<double> residual(n, 0.0);
  if (trace) {
    trace->loss.clear();
    trace->loss.push_back(mean_loss(score, train.labels));
  }

  std::vector<double> bag_sum, bag_cnt, update, grad_sum, bin_rows;
  for (int round = 0; round < config.rounds; ++round) {
    for (Term& term : terms) {
      const auto& bins = bin_index[term.feature];
      const std::size_t nb = term.values.size();
      for (std::size_t i : term.rows) residual[i] = train.labels[i] - stats::logistic(score[i]);

      update.assign(nb, 0.0);
      grad_sum.assign(nb, 0.0);
      bin_rows.assign(nb, 0.0);
      for (std::size_t i : term.rows) {
        grad_sum[bins[i]] += residual[i];
        bin_rows[bins[i]] += 1.0;
      }
      if (bags == 0) {
        for (std::size_t b = 0; b < nb; ++b) {
          if (bin_rows[b] > 0.0) update[b] = grad_sum[b] / bin_rows[b];
        }
      } else {
        for (int g = 0; g < bags; ++g) {
          const auto& w = bag_weight[static_cast<std::size_t>(g)];
          bag_sum.assign(nb, 0.0);
          bag_cnt.assign(nb, 0.0);
          for (std::size_t i : term.rows) {
            bag_sum[bins[i]] += w[i] * residual[i];
            bag_cnt[bins[i]] += w[i];
          }
          for (std::size_t b = 0; b < nb; ++b) {
            if (bag_cnt[b] > 0.0) update[b] += bag_sum[b] / bag_cnt[b];
          }
        }
        for (double& u : update) u /= bags;
      }
      for (double& u : update) u *= config.learning_rate;

      // Per-bin descent safeguard on the full training loss. The logistic
      // loss has curvature <= 1/4, so u*G + u^2*m/8 <= 0 certifies descent;
      // otherwise the exact change decides and non-descending bins stay put.
      std::vector<std::size_t> uncertain;
      for (std::size_t b = 0; b < nb; ++b) {
        const double u = update[b];
        if (u == 0.0) continue;
        if (-u * grad_sum[b] + u * u * bin_rows[b] / 8.0 > 0.0) uncertain.push_back(b);
      }
      if (!uncertain.empty()) {
        std::vector<double> delta(nb, 0.0);
        std::vector<char> check(nb, 0);
        for (std::size_t b : uncertain) check[b] = 1;
        for (std::size_t i : term.rows) {
          const std::size_t b = bins[i];
          if (!check[b]) continue;
          const double s0 = score[i];
          const double s1 = s0 + update[b];
          delta[b] += (stats::softplus(s1) - train.labels[i] * s1) -
                      (stats::softplus(s0) - train.labels[i] * s0);
        }
        for (std::size_t b : uncertain) {
          if (delta[b] > 0.0) update[b] = 0.0;
        }
      }

      for (std::size_t b = 0; b < nb; ++b) term.values[b] += update[b];
      for (std::size_t i : term.rows) score[i] += update[bins[i]];
    }
    if (trace) trace->loss.push_back(mean_loss(score, train.labels));
  }

  // Center each shape over the rows it applies to; the removed mass moves to
  // the intercept of the same rows so predictions are unchanged.
  for (Term& term : terms) {
    const auto& bins = bin_index[term.feature];
    double m = 0.0;
    for (std::size_t i : term.rows) m += term.values[bins[i]];
    m /= static_cast<double>(term.rows.size());
    for (double& v : term.values) v -= m;
    (term.period2_only ? model.period_offset : model.intercept) += m;
  }

  for (std::size_t f = 0; f < nf; ++f) {
    model.f_com.push_back({train.feature_names[f], specs[f], terms[f].values});
    model.f_int.push_back({train.feature_names[f], specs[f],
                           interactions ? terms[nf + f].values
                                        : std::vector<double>(specs[f].bins(), 0.0)});
  }
  return model;
}

std::optional<double> roc_auc(std::span<const double> scores, std::span<const int> labels) {
  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](auto a, auto b) { return scores[a] < scores[b]; });
  double pos = 0.0, rank_sum = 0.0;
  std::size_t i = 0;
  while (i < order.size()) {
    std::size_t j = i;
    while (j < order.size() && scores[order[j]] == scores[order[i]]) ++j;
    const double avg_rank = (static_cast<double>(i) + static_cast<double>(j) + 1.0) / 2.0;
    for (std::size_t k = i; k < j; ++k) {
      if (labels[order[k]] == 1) {
        pos += 1.0;
        rank_sum += avg_rank;
      }
    }
    i = j;
  }
  const double neg = static_cast<double>(scores.size()) - pos;
  if (pos == 0.0 || neg == 0.0) return std::nullopt;
  return (rank_sum - pos * (pos + 1.0) / 2.0) / (pos * neg);
}

Evaluation evaluate(const EbmModel& model, const Design& test) {
  if (test.rows() == 0) throw Error(ErrorKind::kEmptyDataset, "evaluate: empty test set");
  std::vector<double> proba(test.rows());
  std::size_t correct = 0;
  for (std::size_t r = 0; r < test.rows(); ++r) {
    proba[r] = model.predict_proba(test.row(r), test.period[r]);
    const int pred = proba[r] >= 0.5 ? 1 : 0;
    if (pred == test.labels[r]) ++correct;
  }
  Evaluation e;
  e.n = test.rows();
  e.accuracy = static_cast<double>(correct) / static_cast<double>(e.n);
  e.auc = roc_auc(proba, test.labels);
  return e;
}

nlohmann::json to_json(const EbmModel& m) {
  nlohmann::ordered_json j;
  j["format"] = "affdrift-ebm";
  j["version"] = 1;
  j["intercept"] = m.intercept;
  j["period_offset"] = m.period_offset;
  j["features"] = m.features;
  auto terms = nlohmann::ordered_json::array();
  for (std::size_t i = 0; i < m.f_com.size(); ++i) {
    terms.push_back({{"feature", m.f_com[i].feature},
                     {"cuts", m.f_com[i].bins.cuts},
                     {"com", m.f_com[i].values},
                     {"int", m.f_int[i].values}});
  }
  j["terms"] = std::move(terms);
  j["config"] = to_json(m.config);
  j["seed"] = m.config.seed;
  return j;
}

EbmModel ebm_model_from_json(const nlohmann::json& j) {
  try {
    if (j.at("format") != "affdrift-ebm" || j.at("version") != 1) {
      throw Error(ErrorKind::kParse, "model json: unsupported format or version");
    }
    EbmModel m;
    m.intercept = j.at("intercept").get<double>();
    m.period_offset = j.at("period_offset").get<double>();
    m.features = j.at("features").get<std::vector<std::string>>();
    m.config = ebm_config_from_json(j.at("config"));
    for (const auto& t : j.at("terms")) {
      BinSpec spec{t.at("cuts").get<std::vector<double>>()};
      const auto name = t.at("feature").get<std::string>();
      auto com = t.at("com").get<std::vector<double>>();
      auto inter = t.at("int").get<std::vector<double>>();
      if (com.size() != spec.bins() || inter.size() != spec.bins()) {
        throw Error(ErrorKind::kParse, "model json: bin count mismatch for " + name);
      }
      m.f_com.push_back({name, spec, std::move(com)});
      m.f_int.push_back({name, spec, std::move(inter)});
    }
    return m;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::kParse, std::string("model json: ") + e.what());
  }
}

}  // namespace affdrift
