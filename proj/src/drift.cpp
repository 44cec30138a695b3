#include "affdrift/drift.hpp"

#include <algorithm>
#include <cmath>

#include "affdrift/csv.hpp"
#include "affdrift/error.hpp"
#include "affdrift/rng.hpp"
#include "affdrift/stats.hpp"

namespace affdrift {

std::optional<double> shape_correlation(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size() || a.size() < 3) return std::nullopt;
  return stats::pearson(a, b);
}

double ci_nonoverlap(const Band& a, const Band& b) {
  const std::size_t n = std::min(a.lo.size(), b.lo.size());
  if (n == 0) return 0.0;
  std::size_t disjoint = 0;
  for (std::size_t g = 0; g < n; ++g) {
    if (a.hi[g] < b.lo[g] || b.hi[g] < a.lo[g]) ++disjoint;
  }
  return static_cast<double>(disjoint) / static_cast<double>(n);
}

StabilitySummary aggregate_stability(std::span<const double> r) {
  StabilitySummary s;
  s.n = r.size();
  if (r.empty()) return s;
  std::vector<double> v(r.begin(), r.end());
  s.mean = stats::mean(v);
  s.median = stats::median(v);
  s.q1 = stats::percentile(v, 25.0);
  s.q3 = stats::percentile(v, 75.0);
  return s;
}

std::string_view to_string(CrossCase c) {
  switch (c) {
    case CrossCase::kA: return "a";
    case CrossCase::kB: return "b";
    case CrossCase::kC: return "c";
    case CrossCase::kD: return "d";
  }
  return "?";
}

namespace {

bool both_classes(const Design& d) {
  const auto pos = std::count(d.labels.begin(), d.labels.end(), 1);
  return pos > 0 && pos < static_cast<long>(d.rows());
}

std::vector<std::size_t> complement(const std::vector<std::size_t>& rows,
                                    const std::vector<std::size_t>& picked_positions) {
  std::vector<char> chosen(rows.size(), 0);
  for (std::size_t p : picked_positions) chosen[p] = 1;
  std::vector<std::size_t> out;
  for (std::size_t k = 0; k < rows.size(); ++k) {
    if (!chosen[k]) out.push_back(rows[k]);
  }
  return out;
}

std::vector<std::size_t> pick(const std::vector<std::size_t>& rows,
                              const std::vector<std::size_t>& positions) {
  std::vector<std::size_t> out;
  for (std::size_t p : positions) out.push_back(rows[p]);
  return out;
}

void check_disjoint(std::vector<std::size_t> train, std::vector<std::size_t> test) {
  std::sort(train.begin(), train.end());
  std::sort(test.begin(), test.end());
  std::vector<std::size_t> both;
  std::set_intersection(train.begin(), train.end(), test.begin(), test.end(),
                        std::back_inserter(both));
  if (!both.empty()) throw std::logic_error("cross_period_cases: train/test overlap");
}

void finalize(CaseResult& c) {
  c.repeats = c.accuracy_per_repeat.size();
  if (c.repeats == 0) return;
  const double sqrt_n = std::sqrt(static_cast<double>(c.repeats));
  c.accuracy = stats::mean(c.accuracy_per_repeat);
  c.accuracy_se = stats::sample_sd(c.accuracy_per_repeat) / sqrt_n;
  std::vector<double> aucs;
  for (const auto& a : c.auc_per_repeat) {
    if (a) aucs.push_back(*a);
  }
  if (!aucs.empty()) {
    c.auc = stats::mean(aucs);
    c.auc_se = stats::sample_sd(aucs) / std::sqrt(static_cast<double>(aucs.size()));
  }
}


}  // namespace

std::array<CaseResult, 4> cross_period_cases(const Design& data, const CaseConfig& config) {
  data.validate();
  std::vector<std::size_t> rows[2];
  for (std::size_t i = 0; i < data.rows(); ++i) rows[data.period[i]].push_back(i);
  for (int p = 0; p < 2; ++p) {
    if (rows[p].size() <= config.n_per_period) {
      throw Error(ErrorKind::kPrecondition, "period " + std::to_string(p + 1) + " has only " +
                                                std::to_string(rows[p].size()) + " rows (need > " +
                                                std::to_string(config.n_per_period) + ")");
    }
    if (!both_classes(data.subset(rows[p]))) {
      throw Error(ErrorKind::kPrecondition,
                  "period " + std::to_string(p + 1) + " lacks one arousal class");
    }
  }

  std::array<CaseResult, 4> out;
  for (std::size_t c = 0; c < 4; ++c) out[c].which = kAllCases[c];

  auto record = [&](CaseResult& res, const EbmModel& model, const std::vector<std::size_t>& train,
                    const std::vector<std::size_t>& test) {
    check_disjoint(train, test);
    const Evaluation e = evaluate(model, data.subset(test));
    res.accuracy_per_repeat.push_back(e.accuracy);
    res.auc_per_repeat.push_back(e.auc);
  };

  for (int r = 0; r < config.n_repeats; ++r) {
    const auto rep = static_cast<std::uint64_t>(r);
    // One draw per period per repeat, shared by the cases that use it.
    std::vector<std::size_t> pos[2];
    for (int p = 0; p < 2; ++p) {
      Rng rng(derive_seed(config.ebm.seed, {rep, static_cast<std::uint64_t>(p), 0xca5eULL}));
      pos[p] = sample_without_replacement(rows[p].size(), config.n_per_period, rng);
    }
    const auto train1 = pick(rows[0], pos[0]);
    const auto train2 = pick(rows[1], pos[1]);
    const auto rest1 = complement(rows[0], pos[0]);
    const auto rest2 = complement(rows[1], pos[1]);

    EbmConfig single = config.ebm;
    single.interactions = false;

    const Design d1 = data.subset(train1);
    if (both_classes(d1)) {
      single.seed = derive_seed(config.ebm.seed, {rep, 0xaULL});
      const EbmModel m1 = fit_ebm(d1, single);
      record(out[0], m1, train1, rest1);
      record(out[1], m1, train1, rows[1]);
    }
    const Design d2 = data.subset(train2);
    if (both_classes(d2)) {
      single.seed = derive_seed(config.ebm.seed, {rep, 0xcULL});
      const EbmModel m2 = fit_ebm(d2, single);
      record(out[2], m2, train2, rest2);
    }
    std::vector<std::size_t> train12 = train1;
    train12.insert(train12.end(), train2.begin(), train2.end());
    const Design d12 = data.subset(train12);
    if (both_classes(d12)) {
      EbmConfig joint = config.ebm;
      joint.interactions = true;
      joint.seed = derive_seed(config.ebm.seed, {rep, 0xdULL});
      const EbmModel m12 = fit_ebm(d12, joint);
      record(out[3], m12, train12, rest2);
    }
  }
  for (auto& c : out) finalize(c);
  return out;
}

ParticipantDrift analyze_participant(const std::string& participant_id, const Design& data,
                                     const DriftConfig& config) {
  ParticipantDrift pd;
  pd.participant_id = participant_id;
  pd.ensemble = fit_ensemble(data, config.ensemble);
  for (const auto& c : pd.ensemble.curves) {
    FeatureDrift fd;
    fd.feature = c.feature;
    fd.r = shape_correlation(c.com.mean, c.total.mean);
    for (std::size_t k = 0; k < c.com_repeats.size(); ++k) {
      fd.r_repeats.push_back(shape_correlation(c.com_repeats[k], c.total_repeats[k]));
    }
    fd.ci_nonoverlap_fraction = ci_nonoverlap(c.com, c.total);
    pd.features.push_back(std::move(fd));
  }
  if (config.run_cases) pd.cases = cross_period_cases(data, config.cases);
  return pd;
}

std::array<CaseResult, 4> summarize_cases(std::span<const std::array<CaseResult, 4>> per_participant) {
  std::array<CaseResult, 4> summary{};
  for (std::size_t c = 0; c < 4; ++c) {
    CaseResult& s = summary[c];
    s.which = kAllCases[c];
    std::vector<double> acc, acc_se, auc, auc_se;
    for (const auto& cases : per_participant) {
      const CaseResult& cr = cases[c];
      if (cr.repeats == 0) continue;
      acc.push_back(cr.accuracy);
      acc_se.push_back(cr.accuracy_se);
      if (cr.auc) {
        auc.push_back(*cr.auc);
        auc_se.push_back(cr.auc_se);
      }
    }
    s.repeats = acc.size();  // participants contributing
    if (!acc.empty()) {
      s.accuracy = stats::mean(acc);
      s.accuracy_se = stats::mean(acc_se);
    }
    if (!auc.empty()) {
      s.auc = stats::mean(auc);
      s.auc_se = stats::mean(auc_se);
    }
  }
  return summary;
}

DriftReport build_drift_report(const FeatureTable& table, std::span<const Feature> features,
                               const DriftConfig& config) {
  DriftReport report;
  report.features = feature_names(features);

  std::vector<std::string> ids;
  for (const auto& row : table) {
    if (std::find(ids.begin(), ids.end(), row.participant_id) == ids.end()) {
      ids.push_back(row.participant_id);
    }
  }
  std::sort(ids.begin(), ids.end());

  std::map<std::string, std::vector<double>> r_by_feature;
  for (const auto& id : ids) {
    FeatureTable mine;
    for (const auto& row : table) {
      if (row.participant_id == id) mine.push_back(row);
    }
    const Design data = make_design(mine, features);
    DriftConfig cfg = config;
    cfg.ensemble.ebm.seed = derive_seed(config.ensemble.ebm.seed, {fnv1a64(id), 1});
    cfg.cases.ebm.seed = derive_seed(config.cases.ebm.seed, {fnv1a64(id), 2});
    ParticipantDrift pd;
    try {
      pd = analyze_participant(id, data, cfg);
    } catch (const Error& e) {
      pd = ParticipantDrift{};
      pd.participant_id = id;
      pd.skipped_reason = e.what();
      report.participants.push_back(std::move(pd));
      continue;
    }
    for (const auto& fd : pd.features) {
      if (fd.r) r_by_feature[fd.feature].push_back(*fd.r);
    }
    report.participants.push_back(std::move(pd));
  }

  for (const auto& name : report.features) {
    const auto it = r_by_feature.find(name);
    if (it != r_by_feature.end()) report.stability[name] = aggregate_stability(it->second);
  }

  std::vector<std::array<CaseResult, 4>> per_participant;
  for (const auto& pd : report.participants) {
    if (pd.cases) per_participant.push_back(*pd.cases);
  }
  report.case_summary = summarize_cases(per_participant);
  return report;
}

namespace {

nlohmann::ordered_json opt(const std::optional<double>& v) {
  return v ? nlohmann::ordered_json(*v) : nlohmann::ordered_json();
}

}  // namespace

nlohmann::json to_json(const CaseResult& c, bool per_repeat) {
  nlohmann::ordered_json j{{"case", std::string(to_string(c.which))},
                           {"repeats", c.repeats},
                           {"accuracy", c.accuracy},
                           {"accuracy_se", c.accuracy_se},
                           {"auc", opt(c.auc)},
                           {"auc_se", c.auc_se}};
  if (per_repeat) {
    j["accuracy_per_repeat"] = c.accuracy_per_repeat;
    auto aucs = nlohmann::ordered_json::array();
    for (const auto& a : c.auc_per_repeat) aucs.push_back(opt(a));
    j["auc_per_repeat"] = std::move(aucs);
  }
  return j;
}

nlohmann::json to_json(const DriftReport& report) {
  nlohmann::ordered_json j;
  j["features"] = report.features;
  auto parts = nlohmann::ordered_json::array();
  for (const auto& pd : report.participants) {
    nlohmann::ordered_json pj;
    pj["participant"] = pd.participant_id;
    if (!pd.skipped_reason.empty()) {
      pj["skipped"] = pd.skipped_reason;
      parts.push_back(std::move(pj));
      continue;
    }
    pj["degraded"] = pd.ensemble.degraded;
    auto feats = nlohmann::ordered_json::array();
    for (const auto& fd : pd.features) {
      auto reps = nlohmann::ordered_json::array();
      for (const auto& r : fd.r_repeats) reps.push_back(opt(r));
      feats.push_back({{"feature", fd.feature},
                       {"r", opt(fd.r)},
                       {"ci_nonoverlap_fraction", fd.ci_nonoverlap_fraction},
                       {"r_per_repeat", std::move(reps)}});
    }
    pj["features"] = std::move(feats);
    if (pd.cases) {
      auto cases = nlohmann::ordered_json::array();
      for (const auto& c : *pd.cases) cases.push_back(nlohmann::ordered_json(to_json(c, true)));
      pj["cases"] = std::move(cases);
    }
    parts.push_back(std::move(pj));
  }
  j["participants"] = std::move(parts);
  auto stab = nlohmann::ordered_json::array();
  for (const auto& name : report.features) {
    const auto it = report.stability.find(name);
    if (it == report.stability.end()) continue;
    const auto& s = it->second;
    stab.push_back({{"feature", name},
                    {"n", s.n},
                    {"median", s.median},
                    {"mean", s.mean},
                    {"q1", s.q1},
                    {"q3", s.q3}});
  }
  j["stability"] = std::move(stab);
  auto summary = nlohmann::ordered_json::array();
  for (const auto& c : report.case_summary) {
    nlohmann::ordered_json cj = to_json(c, false);
    cj["participants"] = cj["repeats"];
    cj.erase("repeats");
    summary.push_back(std::move(cj));
  }
  j["case_summary"] = std::move(summary);
  return j;
}

std::string format_shapes_csv(const DriftReport& report, std::string_view comment) {
  std::string out;
  if (!comment.empty()) out += "# " + std::string(comment) + "\n";
  out += "participant,feature,grid_x,mean_com,lo_com,hi_com,mean_total,lo_total,hi_total\n";
  for (const auto& pd : report.participants) {
    for (const auto& c : pd.ensemble.curves) {
      for (std::size_t g = 0; g < c.grid.size(); ++g) {
        out += pd.participant_id + "," + c.feature + "," + csv::format_double(c.grid[g]);
        for (double v : {c.com.mean[g], c.com.lo[g], c.com.hi[g], c.total.mean[g], c.total.lo[g],
                         c.total.hi[g]}) {
          out += ',';
          out += csv::format_double(v);
        }
        out += '\n';
      }
    }
  }
  return out;
}

std::string format_stability_csv(const DriftReport& report, std::string_view comment) {
  std::string out;
  if (!comment.empty()) out += "# " + std::string(comment) + "\n";
  out += "feature,participant,r\n";
  for (const auto& name : report.features) {
    for (const auto& pd : report.participants) {
      for (const auto& fd : pd.features) {
        if (fd.feature != name) continue;
        out += name + "," + pd.participant_id + ",";
        if (fd.r) out += csv::format_double(*fd.r);
        out += '\n';
      }
    }
  }
  return out;
}

}  // namespace affdrift
