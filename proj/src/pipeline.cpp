#include "affdrift/pipeline.hpp"

#include <algorithm>
#include <cinttypes>
#include <cstdio>
#include <filesystem>
#include <set>
#include <sstream>

#include "affdrift/csv.hpp"
#include "affdrift/error.hpp"
#include "affdrift/preprocess.hpp"
#include "affdrift/rng.hpp"
#include "affdrift/signal_model.hpp"
#include "affdrift/synth.hpp"

namespace fs = std::filesystem;

namespace affdrift {

namespace {

void require(bool ok, const std::string& what) {
  if (!ok) throw Error(ErrorKind::kValidation, "config: " + what);
}

}  // namespace

void PipelineConfig::validate() const {
  require(filter_order >= 1 && filter_order <= 10, "filter_order must be in [1, 10]");
  require(filter_cutoff_hz > 0.0 && filter_cutoff_hz < 32.0, "filter_cutoff_hz must be in (0, 32)");
  require(min_beats_per_50s > 0.0 && min_beats_per_50s <= 200.0,
          "min_beats_per_50s must be in (0, 200]");
  require(max_ibi_drop_fraction >= 0.0 && max_ibi_drop_fraction <= 1.0,
          "max_ibi_drop_fraction must be in [0, 1]");
  require(outlier_sigma > 0.0 && outlier_sigma <= 10.0, "outlier_sigma must be in (0, 10]");
  require(window_s > 0.0 && window_s <= 50.0, "window_s must be in (0, 50]");
  require(stride_s > 0.0 && stride_s <= window_s, "stride_s must be in (0, window_s]");
  require(select_k >= 1 && select_k <= kFeatureCount, "selection k must be in [1, 17]");
  require(select_folds >= 2 && select_folds <= 20, "selection folds must be in [2, 20]");
  require(select_rounds >= 1 && select_rounds <= 100000, "selection rounds must be in [1, 100000]");
  require(rounds >= 1 && rounds <= 100000, "ebm rounds must be in [1, 100000]");
  require(learning_rate > 0.0 && learning_rate <= 1.0, "learning_rate must be in (0, 1]");
  require(max_bins >= 2 && max_bins <= 1024, "max_bins must be in [2, 1024]");
  require(inner_bags >= 0 && inner_bags <= 100, "inner_bags must be in [0, 100]");
  require(n_repeats >= 1 && n_repeats <= 10000, "n_repeats must be in [1, 10000]");
  require(n_per_period >= 2, "n_per_period must be at least 2");
  require(grid_points >= 3 && grid_points <= 4096, "grid_points must be in [3, 4096]");
  std::set<std::string> seen;
  for (const auto& f : features) {
    try {
      parse_feature(f);
    } catch (const Error&) {
      require(false, "unknown feature '" + f + "'");
    }
    require(seen.insert(f).second, "duplicate feature '" + f + "'");
  }
}

FeatureConfig PipelineConfig::feature_config() const {
  FeatureConfig c;
  c.filter_order = filter_order;
  c.filter_cutoff_hz = filter_cutoff_hz;
  c.window_s = window_s;
  c.stride_s = stride_s;
  c.quality.min_beats_per_50s = min_beats_per_50s;
  c.quality.max_drop_fraction = max_ibi_drop_fraction;
  return c;
}

SelectionConfig PipelineConfig::selection_config() const {
  SelectionConfig c;
  c.k = select_k;
  c.folds = select_folds;
  c.seed = derive_seed(seed, {1});
  c.wrapper.rounds = select_rounds;
  c.wrapper.learning_rate = learning_rate;
  c.wrapper.max_bins = max_bins;
  return c;
}

EbmConfig PipelineConfig::ebm_config() const {
  EbmConfig c;
  c.rounds = rounds;
  c.learning_rate = learning_rate;
  c.max_bins = max_bins;
  c.inner_bags = inner_bags;
  c.interactions = true;
  c.seed = derive_seed(seed, {2});
  return c;
}

EnsembleConfig PipelineConfig::ensemble_config() const {
  EnsembleConfig c;
  c.n_repeats = n_repeats;
  c.n_per_period = n_per_period;
  c.grid_points = grid_points;
  c.ebm = ebm_config();
  return c;
}

CaseConfig PipelineConfig::case_config() const {
  CaseConfig c;
  c.n_repeats = n_repeats;
  c.n_per_period = n_per_period;
  c.ebm = ebm_config();
  return c;
}

namespace {

nlohmann::ordered_json analysis_json(const PipelineConfig& c) {
  nlohmann::ordered_json j;
  j["preprocess"] = {{"filter_order", c.filter_order},
                     {"filter_cutoff_hz", c.filter_cutoff_hz},
                     {"min_beats_per_50s", c.min_beats_per_50s},
                     {"max_ibi_drop_fraction", c.max_ibi_drop_fraction},
                     {"outlier_sigma", c.outlier_sigma}};
  j["features"] = {{"window_s", c.window_s}, {"stride_s", c.stride_s}};
  j["selection"] = {{"k", c.select_k},
                    {"folds", c.select_folds},
                    {"rounds", c.select_rounds},
                    {"fixed_features", c.features}};
  j["ebm"] = {{"rounds", c.rounds},
              {"learning_rate", c.learning_rate},
              {"max_bins", c.max_bins},
              {"inner_bags", c.inner_bags},
              {"n_repeats", c.n_repeats},
              {"n_per_period", c.n_per_period},
              {"grid_points", c.grid_points}};
  j["seed"] = c.seed;
  return j;
}

void check_keys(const nlohmann::json& obj, std::initializer_list<const char*> allowed,
                const std::string& where) {
  if (!obj.is_object()) throw Error(ErrorKind::kValidation, "config: " + where + " must be an object");
  for (const auto& item : obj.items()) {
    bool known = false;
    for (const char* k : allowed) known = known || item.key() == k;
    if (!known) {
      throw Error(ErrorKind::kValidation, "config: unknown key '" + where + "." + item.key() + "'");
    }
  }
}

template <typename T>
void read_key(const nlohmann::json& obj, const char* key, T& into) {
  if (obj.contains(key)) into = obj.at(key).get<T>();
}

}  // namespace

nlohmann::json to_json(const PipelineConfig& c) {
  nlohmann::ordered_json j;
  j["paths"] = {{"sessions_dir", c.sessions_dir}, {"out_dir", c.out_dir}};
  const auto analysis = analysis_json(c);
  for (const auto& item : analysis.items()) j[item.key()] = item.value();
  return j;
}

PipelineConfig pipeline_config_from_json(const nlohmann::json& j) {
  PipelineConfig c;
  try {
    check_keys(j, {"paths", "preprocess", "features", "selection", "ebm", "seed"}, "config");
    if (j.contains("paths")) {
      const auto& p = j.at("paths");
      check_keys(p, {"sessions_dir", "out_dir"}, "paths");
      read_key(p, "sessions_dir", c.sessions_dir);
      read_key(p, "out_dir", c.out_dir);
    }
    if (j.contains("preprocess")) {
      const auto& p = j.at("preprocess");
      check_keys(p, {"filter_order", "filter_cutoff_hz", "min_beats_per_50s",
                     "max_ibi_drop_fraction", "outlier_sigma"},
                 "preprocess");
      read_key(p, "filter_order", c.filter_order);
      read_key(p, "filter_cutoff_hz", c.filter_cutoff_hz);
      read_key(p, "min_beats_per_50s", c.min_beats_per_50s);
      read_key(p, "max_ibi_drop_fraction", c.max_ibi_drop_fraction);
      read_key(p, "outlier_sigma", c.outlier_sigma);
    }
    if (j.contains("features")) {
      const auto& p = j.at("features");
      check_keys(p, {"window_s", "stride_s"}, "features");
      read_key(p, "window_s", c.window_s);
      read_key(p, "stride_s", c.stride_s);
    }
    if (j.contains("selection")) {
      const auto& p = j.at("selection");
      check_keys(p, {"k", "folds", "rounds", "fixed_features"}, "selection");
      read_key(p, "k", c.select_k);
      read_key(p, "folds", c.select_folds);
      read_key(p, "rounds", c.select_rounds);
      read_key(p, "fixed_features", c.features);
    }
    if (j.contains("ebm")) {
      const auto& p = j.at("ebm");
      check_keys(p, {"rounds", "learning_rate", "max_bins", "inner_bags", "n_repeats",
                     "n_per_period", "grid_points"},
                 "ebm");
      read_key(p, "rounds", c.rounds);
      read_key(p, "learning_rate", c.learning_rate);
      read_key(p, "max_bins", c.max_bins);
      read_key(p, "inner_bags", c.inner_bags);
      read_key(p, "n_repeats", c.n_repeats);
      read_key(p, "n_per_period", c.n_per_period);
      read_key(p, "grid_points", c.grid_points);
    }
    read_key(j, "seed", c.seed);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::kValidation, std::string("config: ") + e.what());
  }
  c.validate();
  return c;
}

std::string config_hash(const PipelineConfig& config) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016" PRIx64, fnv1a64(analysis_json(config).dump()));
  return buf;
}

void apply_env_overrides(PipelineConfig& config,
                         const std::function<const char*(const char*)>& getenv) {
  if (const char* v = getenv("AFFDRIFT_SESSIONS"); v && *v) config.sessions_dir = v;
  if (const char* v = getenv("AFFDRIFT_OUT"); v && *v) config.out_dir = v;
  if (const char* v = getenv("AFFDRIFT_SEED"); v && *v) {
    try {
      std::size_t used = 0;
      config.seed = std::stoull(v, &used);
      if (v[used] != '\0') throw std::invalid_argument("trailing characters");
    } catch (const std::exception&) {
      throw Error(ErrorKind::kValidation, std::string("AFFDRIFT_SEED is not a u64: ") + v);
    }
  }
}

namespace {

constexpr const char* kHashKey = "config_hash";

void note(const WarningSink& warn, const std::string& msg) {
  if (warn) warn(msg);
}

fs::path out_file(const PipelineConfig& config, const std::string& name) {
  fs::create_directories(config.out_dir);
  return fs::path(config.out_dir) / name;
}

std::string hash_comment(const PipelineConfig& config) {
  return std::string(kHashKey) + ": " + config_hash(config);
}

void write_json(const fs::path& path, const PipelineConfig& config, const nlohmann::json& body) {
  nlohmann::ordered_json j;
  j[kHashKey] = config_hash(config);
  const nlohmann::ordered_json fields(body);
  for (const auto& item : fields.items()) j[item.key()] = item.value();
  csv::write_file(path.string(), j.dump(2) + "\n");
}

void check_hash(const std::string& found, const PipelineConfig& config, const fs::path& path) {
  if (found != config_hash(config)) {
    throw Error(ErrorKind::kValidation, path.string() + " was produced with config hash '" +
                                            found + "', current config hash is '" +
                                            config_hash(config) + "'");
  }
}

nlohmann::json read_json_artifact(const PipelineConfig& config, const std::string& name) {
  const fs::path path = fs::path(config.out_dir) / name;
  if (!fs::exists(path)) throw Error(ErrorKind::kMissingInput, "missing input " + path.string());
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(csv::read_file(path.string()));
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::kParse, path.string() + ": " + e.what());
  }
  check_hash(j.value(kHashKey, std::string()), config, path);
  return j;
}

FeatureTable read_features(const PipelineConfig& config) {
  const fs::path path = fs::path(config.out_dir) / "features.csv";
  if (!fs::exists(path)) throw Error(ErrorKind::kMissingInput, "missing input " + path.string());
  const std::string text = csv::read_file(path.string());
  std::string found;
  for (auto line : csv::lines(text)) {
    line = csv::trim(line);
    if (line.empty() || line.front() != '#') break;
    line = csv::trim(line.substr(1));
    const std::string prefix = std::string(kHashKey) + ":";
    if (line.substr(0, prefix.size()) == prefix) found = std::string(csv::trim(line.substr(prefix.size())));
  }
  check_hash(found, config, path);
  return parse_feature_table(text);
}

std::vector<fs::path> find_sessions(const PipelineConfig& config) {
  const fs::path root(config.sessions_dir);
  if (!fs::is_directory(root)) {
    throw Error(ErrorKind::kMissingInput, "sessions directory not found: " + root.string());
  }
  std::vector<fs::path> dirs;
  for (const auto& entry : fs::recursive_directory_iterator(root)) {
    if (entry.is_regular_file() && entry.path().filename() == "session.json") {
      dirs.push_back(entry.path().parent_path());
    }
  }
  std::sort(dirs.begin(), dirs.end());
  if (dirs.empty()) throw Error(ErrorKind::kEmptyDataset, "no sessions under " + root.string());
  return dirs;
}

std::string relative_name(const PipelineConfig& config, const fs::path& dir) {
  return fs::relative(dir, config.sessions_dir).generic_string();
}

std::vector<Feature> analysis_features(const PipelineConfig& config) {
  if (!config.features.empty()) return parse_features(config.features);
  const auto j = read_json_artifact(config, "selection.json");
  return selection_from_json(j).selected;
}

std::vector<std::string> participant_ids(const FeatureTable& table) {
  std::set<std::string> ids;
  for (const auto& row : table) ids.insert(row.participant_id);
  return {ids.begin(), ids.end()};
}

FeatureTable rows_of(const FeatureTable& table, const std::string& id) {
  FeatureTable mine;
  for (const auto& row : table) {
    if (row.participant_id == id) mine.push_back(row);
  }
  return mine;
}

std::string fmt(double v, int digits = 3) {
  std::ostringstream os;
  os.setf(std::ios::fixed);
  os.precision(digits);
  os << v;
  return os.str();
}

}  // namespace

std::size_t cmd_ingest(const PipelineConfig& config, const WarningSink& warn) {
  config.validate();
  const auto dirs = find_sessions(config);
  auto sessions = nlohmann::ordered_json::array();
  for (const auto& dir : dirs) {
    const RecordingSession s = load_session(dir);
    const auto extraction = extract_labeled_segments(s, default_arousal_mapping());
    nlohmann::ordered_json sj;
    sj["path"] = relative_name(config, dir);
    sj["participant"] = s.participant_id;
    sj["period"] = std::string(to_string(s.period));
    sj["channels"] = nlohmann::ordered_json::array();
    for (const SampledChannel* ch : {&s.bvp, &s.eda, &s.temp, &s.acc}) {
      const std::size_t n = ch->kind == ChannelKind::kAcc ? ch->vectors.size() : ch->samples.size();
      sj["channels"].push_back({{"kind", std::string(to_string(ch->kind))},
                                {"rate_hz", ch->rate},
                                {"samples", n},
                                {"nonstandard_rate", ch->nonstandard_rate}});
      if (ch->nonstandard_rate) {
        note(warn, sj["path"].get<std::string>() + ": " + std::string(to_string(ch->kind)) +
                       " has a nonstandard rate");
      }
    }
    sj["annotations"] = s.annotations.size();
    sj["segments"] = extraction.segments.size();
    auto skipped = nlohmann::ordered_json::array();
    for (const auto& sk : extraction.skipped) {
      skipped.push_back({{"timestamp", sk.annotation_time}, {"reason", sk.reason}});
    }
    sj["skipped"] = std::move(skipped);
    sessions.push_back(std::move(sj));
  }
  write_json(out_file(config, "inventory.json"), config, {{"sessions", sessions}});
  return dirs.size();
}

std::size_t cmd_features(const PipelineConfig& config, const WarningSink& warn) {
  config.validate();
  const auto dirs = find_sessions(config);
  const FeatureConfig fc = config.feature_config();
  FeatureTable table;
  std::string rejected = "# " + hash_comment(config) + "\nsession,participant,timestamp,reason\n";
  for (const auto& dir : dirs) {
    const RecordingSession s = load_session(dir);
    const auto extraction = extract_labeled_segments(s, default_arousal_mapping());
    const std::string name = relative_name(config, dir);
    for (const auto& sk : extraction.skipped) {
      rejected += name + "," + s.participant_id + "," + csv::format_double(sk.annotation_time) +
                  "," + sk.reason + "\n";
    }
    for (const auto& seg : extraction.segments) {
      std::string reason;
      try {
        const BvpAnalysis bvp = analyze_bvp(seg, fc);
        if (bvp.quality.accepted) {
          table.push_back(extract_feature_vector(seg, bvp, fc));
        } else {
          reason = std::string(to_string(bvp.quality.reason));
        }
      } catch (const Error& e) {
        if (e.kind() != ErrorKind::kPrecondition && e.kind() != ErrorKind::kValidation) throw;
        reason = e.what();
      }
      if (!reason.empty()) {
        rejected += name + "," + s.participant_id + "," +
                    csv::format_double(seg.annotation_time) + "," + reason + "\n";
      }
    }
  }
  std::stable_sort(table.begin(), table.end(), [](const FeatureVector& a, const FeatureVector& b) {
    if (a.participant_id != b.participant_id) return a.participant_id < b.participant_id;
    if (a.period != b.period) return period_flag(a.period) < period_flag(b.period);
    return a.timestamp < b.timestamp;
  });
  const OutlierResult cleaned = remove_outliers_3sigma(table, config.outlier_sigma);
  if (cleaned.table.empty()) note(warn, "no valid annotations; feature table is empty");
  csv::write_file(out_file(config, "features.csv").string(),
                  format_feature_table(cleaned.table, hash_comment(config)));
  csv::write_file(out_file(config, "outliers.csv").string(),
                  format_removal_log(cleaned.removed, hash_comment(config)));
  csv::write_file(out_file(config, "rejected_segments.csv").string(), rejected);
  return cleaned.table.size();
}

void cmd_select(const PipelineConfig& config, const WarningSink& /*warn*/) {
  config.validate();
  const FeatureTable table = read_features(config);
  if (table.empty()) throw Error(ErrorKind::kEmptyDataset, "feature table is empty");
  const SelectionResult result = sequential_forward_select(table, config.selection_config());
  write_json(out_file(config, "selection.json"), config, to_json(result));
}

void cmd_fit(const PipelineConfig& config, const std::string& participant_id,
             const WarningSink& warn) {
  config.validate();
  const FeatureTable table = read_features(config);
  const auto features = analysis_features(config);
  const FeatureTable mine = rows_of(table, participant_id);
  const Design data = make_design(mine, features);
  if (data.rows() == 0) {
    throw Error(ErrorKind::kEmptyDataset, "no complete rows for participant '" + participant_id + "'");
  }
  EnsembleConfig ec = config.ensemble_config();
  ec.ebm.seed = derive_seed(ec.ebm.seed, {fnv1a64(participant_id), 1});
  const EnsembleFit fit = fit_ensemble(data, ec);
  if (fit.degraded) note(warn, participant_id + ": too few rows per period, test sets are empty");
  EbmConfig full = config.ebm_config();
  full.seed = derive_seed(full.seed, {fnv1a64(participant_id), 3});
  const EbmModel model = fit_ebm(data, full);
  write_json(out_file(config, "fit_" + participant_id + ".json"), config,
             {{"participant", participant_id},
              {"ensemble", to_json(fit, false)},
              {"model", to_json(model)}});
}

void cmd_eval(const PipelineConfig& config, const WarningSink& warn) {
  config.validate();
  const FeatureTable table = read_features(config);
  if (table.empty()) throw Error(ErrorKind::kEmptyDataset, "feature table is empty");
  const auto features = analysis_features(config);
  std::vector<std::array<CaseResult, 4>> all;
  auto parts = nlohmann::ordered_json::array();
  for (const auto& id : participant_ids(table)) {
    const Design data = make_design(rows_of(table, id), features);
    CaseConfig cc = config.case_config();
    cc.ebm.seed = derive_seed(cc.ebm.seed, {fnv1a64(id), 2});
    nlohmann::ordered_json pj{{"participant", id}};
    try {
      const auto cases = cross_period_cases(data, cc);
      all.push_back(cases);
      auto cj = nlohmann::ordered_json::array();
      for (const auto& c : cases) cj.push_back(nlohmann::ordered_json(to_json(c, true)));
      pj["cases"] = std::move(cj);
    } catch (const Error& e) {
      note(warn, id + ": skipped (" + e.what() + ")");
      pj["skipped"] = e.what();
    }
    parts.push_back(std::move(pj));
  }
  auto summary = nlohmann::ordered_json::array();
  for (const auto& c : summarize_cases(all)) {
    nlohmann::ordered_json cj = to_json(c, false);
    cj["participants"] = cj["repeats"];
    cj.erase("repeats");
    summary.push_back(std::move(cj));
  }
  write_json(out_file(config, "cases.json"), config,
             {{"features", feature_names(features)},
              {"participants", std::move(parts)},
              {"case_summary", std::move(summary)}});
}

void cmd_drift(const PipelineConfig& config, const WarningSink& warn) {
  config.validate();
  const FeatureTable table = read_features(config);
  if (table.empty()) throw Error(ErrorKind::kEmptyDataset, "feature table is empty");
  const auto features = analysis_features(config);
  DriftConfig dc;
  dc.ensemble = config.ensemble_config();
  dc.cases = config.case_config();
  dc.run_cases = false;
  const DriftReport report = build_drift_report(table, features, dc);
  for (const auto& pd : report.participants) {
    if (!pd.skipped_reason.empty()) note(warn, pd.participant_id + ": skipped (" + pd.skipped_reason + ")");
  }
  nlohmann::json body = to_json(report);
  body.erase("case_summary");
  write_json(out_file(config, "drift_report.json"), config, body);
  csv::write_file(out_file(config, "shapes.csv").string(),
                  format_shapes_csv(report, hash_comment(config)));
  csv::write_file(out_file(config, "stability.csv").string(),
                  format_stability_csv(report, hash_comment(config)));
}

void cmd_synth(const PipelineConfig& config, const nlohmann::json& spec, const WarningSink& warn) {
  config.validate();
  try {
    const std::string kind = spec.value("kind", std::string("features"));
    if (kind == "features") {
      synth::TruthSpec truth = spec.contains("truth")
                                   ? synth::truth_from_json(spec.at("truth"))
                                   : synth::truth_preset(spec.value("preset", std::string("null")));
      truth.seed = spec.value("seed", config.seed);
      const auto sampled = synth::sample_dataset(truth);
      csv::write_file(out_file(config, "features.csv").string(),
                      format_feature_table(sampled.table, hash_comment(config)));
      write_json(out_file(config, "truth.json"), config, {{"kind", kind}, {"truth", synth::to_json(truth)}});
      return;
    }
    if (kind == "sessions") {
      synth::SessionSpec ss = synth::session_spec_from_json(spec.value("sessions", nlohmann::json::object()));
      ss.seed = spec.value("seed", config.seed);
      const fs::path root(config.sessions_dir);
      if (fs::exists(root) && !fs::is_empty(root)) {
        note(warn, "sessions directory " + root.string() + " is not empty; files are overwritten");
      }
      auto truths = nlohmann::ordered_json::array();
      for (const auto& id : ss.participants) {
        for (Period period : {Period::kP1, Period::kP2}) {
          for (int k = 0; k < ss.sessions_per_period; ++k) {
            const auto rendered = synth::render_session(ss, id, period, k);
            const std::string name = id + "/" + std::string(to_string(period)) + "_" + std::to_string(k);
            write_session(rendered.session, root / name);
            for (const auto& t : rendered.truth) {
              truths.push_back({{"session", name},
                                {"timestamp", t.timestamp},
                                {"hr_bpm", t.hr_bpm},
                                {"eda_min", t.eda_min},
                                {"temp_ave", t.temp_ave},
                                {"acc_max", t.acc_max}});
            }
          }
        }
      }
      write_json(root / "manifest.json", config, {{"kind", kind}, {"sessions", synth::to_json(ss)}});
      write_json(out_file(config, "truth.json"), config,
                 {{"kind", kind}, {"sessions", synth::to_json(ss)}, {"annotations", std::move(truths)}});
      return;
    }
    throw Error(ErrorKind::kValidation, "synth spec: unknown kind '" + kind + "'");
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::kValidation, std::string("synth spec: ") + e.what());
  }
}

void cmd_report(const PipelineConfig& config, const WarningSink& /*warn*/) {
  config.validate();
  const auto drift = read_json_artifact(config, "drift_report.json");
  const auto cases = read_json_artifact(config, "cases.json");
  std::optional<nlohmann::json> selection;
  if (fs::exists(fs::path(config.out_dir) / "selection.json")) {
    selection = read_json_artifact(config, "selection.json");
  }

  std::ostringstream md;
  md << "# Arousal drift report\n\n";
  md << "Config hash: `" << config_hash(config) << "`\n\n";

  md << "## Features\n\n";
  if (selection) {
    md << "| step | feature | CV accuracy |\n|---:|---|---:|\n";
    int step = 1;
    for (const auto& s : selection->at("trajectory")) {
      md << "| " << step++ << " | " << s.at("feature").get<std::string>() << " | "
         << fmt(s.at("score").get<double>()) << " |\n";
    }
  } else {
    md << "Fixed by config: ";
    const auto names = drift.at("features").get<std::vector<std::string>>();
    for (std::size_t i = 0; i < names.size(); ++i) md << (i ? ", " : "") << names[i];
    md << "\n";
  }

  md << "\n## Cross-period cases\n\n";
  md << "| case | train | test | accuracy | SE | AUC | SE | participants |\n";
  md << "|---|---|---|---:|---:|---:|---:|---:|\n";
  const char* train[] = {"P1", "P1", "P2", "P1+P2"};
  const char* test[] = {"P1", "P2", "P2", "P2"};
  std::size_t i = 0;
  for (const auto& c : cases.at("case_summary")) {
    const auto& auc = c.at("auc");
    md << "| (" << c.at("case").get<std::string>() << ") | " << train[i] << " | " << test[i]
       << " | " << fmt(c.at("accuracy").get<double>()) << " | "
       << fmt(c.at("accuracy_se").get<double>()) << " | "
       << (auc.is_null() ? std::string("n/a") : fmt(auc.get<double>())) << " | "
       << fmt(c.at("auc_se").get<double>()) << " | " << c.at("participants").get<std::size_t>()
       << " |\n";
    ++i;
  }

  md << "\n## Shape stability (lowest median r first)\n\n";
  struct Row {
    std::string feature;
    std::size_t n;
    double median, q1, q3, mean;
  };
  std::vector<Row> rows;
  for (const auto& s : drift.at("stability")) {
    rows.push_back({s.at("feature").get<std::string>(), s.at("n").get<std::size_t>(),
                    s.at("median").get<double>(), s.at("q1").get<double>(),
                    s.at("q3").get<double>(), s.at("mean").get<double>()});
  }
  std::stable_sort(rows.begin(), rows.end(),
                   [](const Row& a, const Row& b) { return a.median < b.median; });
  md << "| rank | feature | participants | median r | Q1 | Q3 | mean r |\n";
  md << "|---:|---|---:|---:|---:|---:|---:|\n";
  int rank = 1;
  for (const auto& r : rows) {
    md << "| " << rank++ << " | " << r.feature << " | " << r.n << " | " << fmt(r.median) << " | "
       << fmt(r.q1) << " | " << fmt(r.q3) << " | " << fmt(r.mean) << " |\n";
  }

  std::vector<std::string> skipped;
  for (const auto& p : drift.at("participants")) {
    if (p.contains("skipped")) {
      skipped.push_back(p.at("participant").get<std::string>() + ": " + p.at("skipped").get<std::string>());
    }
  }
  if (!skipped.empty()) {
    md << "\n## Skipped participants\n\n";
    for (const auto& s : skipped) md << "- " << s << "\n";
  }
  md << "\n<!-- " << hash_comment(config) << " -->\n";
  csv::write_file(out_file(config, "report.md").string(), md.str());
}

}  // namespace affdrift
