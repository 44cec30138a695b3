#include "affdrift/synth.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "affdrift/error.hpp"
#include "affdrift/rng.hpp"
#include "affdrift/stats.hpp"

namespace affdrift::synth {

double TrueShape::operator()(double x) const {
  switch (kind) {
    case ShapeKind::kZero: return 0.0;
    case ShapeKind::kLinear: return amplitude * (x - center) / width;
    case ShapeKind::kLogisticRamp: return amplitude * (stats::logistic((x - center) / width) - 0.5);
    case ShapeKind::kGaussianBump: {
      const double d = (x - center) / width;
      return amplitude * std::exp(-0.5 * d * d);
    }
  }
  return 0.0;
}

double FeatureTruth::f_int(double x) const {
  switch (drift.kind) {
    case DriftKind::kNone: return 0.0;
    case DriftKind::kXShift: return shape(x - drift.amount) - shape(x);
    case DriftKind::kYScale: return (drift.amount - 1.0) * shape(x);
  }
  return 0.0;
}

void TruthSpec::validate() const {
  bool informative = false;
  for (const auto& f : features) {
    if (!std::isfinite(f.marginal.a) || !std::isfinite(f.marginal.b)) {
      throw Error(ErrorKind::kValidation, "truth spec: non-finite marginal parameters");
    }
    if (f.marginal.kind == MarginalKind::kNormal && !(f.marginal.b > 0.0)) {
      throw Error(ErrorKind::kValidation, "truth spec: normal sd must be positive");
    }
    if (f.marginal.kind == MarginalKind::kUniform && !(f.marginal.b > f.marginal.a)) {
      throw Error(ErrorKind::kValidation, "truth spec: uniform needs low < high");
    }
    if (f.shape.kind != ShapeKind::kZero && f.shape.amplitude != 0.0) informative = true;
  }
  if (!informative) throw Error(ErrorKind::kValidation, "truth spec: no informative feature");
  if (participants.empty()) throw Error(ErrorKind::kValidation, "truth spec: no participants");
}

SampledFeatures sample_features(const TruthSpec& spec, Period period,
                                const std::string& participant_id) {
  spec.validate();
  const int p = period_flag(period);
  Rng rng(derive_seed(spec.seed, {fnv1a64(participant_id), static_cast<std::uint64_t>(p)}));
  const std::size_t n = p == 0 ? spec.n_period1 : spec.n_period2;
  const double t0 = 1700000000.0 + (p == 0 ? 0.0 : 1.5e7);

  SampledFeatures out;
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (std::size_t i = 0; i < n; ++i) {
    FeatureVector row;
    row.participant_id = participant_id;
    row.period = period;
    row.timestamp = t0 + 600.0 * static_cast<double>(i);
    double logit = spec.intercept;
    for (const auto& f : spec.features) {
      const double x = f.marginal.kind == MarginalKind::kNormal
                           ? f.marginal.a + f.marginal.b * normal(rng)
                           : f.marginal.a + (f.marginal.b - f.marginal.a) * unit(rng);
      row[f.feature] = x;
      logit += f.f_com(x) + p * f.f_int(x);
    }
    row.label = unit(rng) < stats::logistic(logit) ? Arousal::kHigh : Arousal::kLow;
    out.table.push_back(std::move(row));
    out.true_logit.push_back(logit);
  }
  return out;
}

SampledFeatures sample_dataset(const TruthSpec& spec) {
  SampledFeatures all;
  for (const auto& id : spec.participants) {
    for (Period period : {Period::kP1, Period::kP2}) {
      auto part = sample_features(spec, period, id);
      all.table.insert(all.table.end(), part.table.begin(), part.table.end());
      all.true_logit.insert(all.true_logit.end(), part.true_logit.begin(), part.true_logit.end());
    }
  }
  return all;
}

namespace {

std::string_view to_string(MarginalKind k) { return k == MarginalKind::kNormal ? "normal" : "uniform"; }

MarginalKind parse_marginal(const std::string& s) {
  if (s == "normal") return MarginalKind::kNormal;
  if (s == "uniform") return MarginalKind::kUniform;
  throw Error(ErrorKind::kValidation, "unknown marginal '" + s + "'");
}

std::string_view to_string(ShapeKind k) {
  switch (k) {
    case ShapeKind::kZero: return "zero";
    case ShapeKind::kLinear: return "linear";
    case ShapeKind::kLogisticRamp: return "logistic_ramp";
    case ShapeKind::kGaussianBump: return "gaussian_bump";
  }
  return "?";
}

ShapeKind parse_shape(const std::string& s) {
  for (auto k : {ShapeKind::kZero, ShapeKind::kLinear, ShapeKind::kLogisticRamp,
                 ShapeKind::kGaussianBump}) {
    if (s == to_string(k)) return k;
  }
  throw Error(ErrorKind::kValidation, "unknown shape '" + s + "'");
}

std::string_view to_string(DriftKind k) {
  switch (k) {
    case DriftKind::kNone: return "none";
    case DriftKind::kXShift: return "x_shift";
    case DriftKind::kYScale: return "y_scale";
  }
  return "?";
}

DriftKind parse_drift(const std::string& s) {
  for (auto k : {DriftKind::kNone, DriftKind::kXShift, DriftKind::kYScale}) {
    if (s == to_string(k)) return k;
  }
  throw Error(ErrorKind::kValidation, "unknown drift kind '" + s + "'");
}

}  // namespace

nlohmann::json to_json(const TruthSpec& spec) {
  nlohmann::ordered_json j;
  j["intercept"] = spec.intercept;
  j["n_period1"] = spec.n_period1;
  j["n_period2"] = spec.n_period2;
  j["participants"] = spec.participants;
  j["seed"] = spec.seed;
  auto feats = nlohmann::ordered_json::array();
  for (const auto& f : spec.features) {
    feats.push_back(
        {{"feature", std::string(feature_name(f.feature))},
         {"marginal", {{"kind", std::string(to_string(f.marginal.kind))}, {"a", f.marginal.a}, {"b", f.marginal.b}}},
         {"shape",
          {{"kind", std::string(to_string(f.shape.kind))},
           {"amplitude", f.shape.amplitude},
           {"center", f.shape.center},
           {"width", f.shape.width}}},
         {"drift", {{"kind", std::string(to_string(f.drift.kind))}, {"amount", f.drift.amount}}}});
  }
  j["features"] = std::move(feats);
  return j;
}

TruthSpec truth_from_json(const nlohmann::json& j) {
  try {
    TruthSpec spec;
    spec.intercept = j.value("intercept", 0.0);
    spec.n_period1 = j.value("n_period1", spec.n_period1);
    spec.n_period2 = j.value("n_period2", spec.n_period2);
    if (j.contains("participants")) spec.participants = j.at("participants").get<std::vector<std::string>>();
    spec.seed = j.value("seed", std::uint64_t{0});
    for (const auto& fj : j.at("features")) {
      FeatureTruth f;
      f.feature = parse_feature(fj.at("feature").get<std::string>());
      if (fj.contains("marginal")) {
        const auto& m = fj.at("marginal");
        f.marginal = {parse_marginal(m.value("kind", std::string("normal"))), m.value("a", 0.0),
                      m.value("b", 1.0)};
      }
      if (fj.contains("shape")) {
        const auto& s = fj.at("shape");
        f.shape = {parse_shape(s.value("kind", std::string("zero"))), s.value("amplitude", 0.0),
                   s.value("center", 0.0), s.value("width", 1.0)};
        if (!(f.shape.width > 0.0)) throw Error(ErrorKind::kValidation, "shape width must be positive");
      }
      if (fj.contains("drift")) {
        const auto& d = fj.at("drift");
        f.drift = {parse_drift(d.value("kind", std::string("none"))), d.value("amount", 0.0)};
      }
      spec.features.push_back(f);
    }
    spec.validate();
    return spec;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::kParse, std::string("truth spec: ") + e.what());
  }
}

namespace {

// Five smooth, clearly informative features shared by the drift presets.
TruthSpec base_five() {
  TruthSpec s;
  s.n_period1 = 2000;
  s.n_period2 = 2000;
  s.participants = {"S01", "S02", "S03"};
  s.seed = 20240415;
  s.features = {
      {Feature::kHR, {MarginalKind::kNormal, 75.0, 10.0}, {ShapeKind::kLogisticRamp, 4.0, 75.0, 5.0}, {}},
      {Feature::kTemp_ave, {MarginalKind::kNormal, 33.0, 0.8}, {ShapeKind::kLinear, 1.5, 33.0, 0.8}, {}},
      {Feature::kAcc_ave, {MarginalKind::kUniform, 0.0, 0.5}, {ShapeKind::kGaussianBump, 4.0, 0.25, 0.1}, {}},
      {Feature::kEDA_min, {MarginalKind::kUniform, 0.0, 4.0}, {ShapeKind::kGaussianBump, 3.0, 1.5, 0.4}, {}},
      {Feature::kEDA_max, {MarginalKind::kNormal, 4.0, 1.0}, {ShapeKind::kLinear, 1.2, 4.0, 1.0}, {}},
  };
  // Offsets the bumps' average lift so both labels stay common.
  s.intercept = -2.75;
  return s;
}

}  // namespace

TruthSpec truth_preset(std::string_view name) {
  if (name == "null") return base_five();
  if (name == "x_shift") {
    TruthSpec s = base_five();
    s.features[3].drift = {DriftKind::kXShift, 1.0};
    return s;
  }
  if (name == "y_scale") {
    TruthSpec s = base_five();
    s.features[3].drift = {DriftKind::kYScale, 2.0};
    return s;
  }
  if (name == "calibrated_drift") {
    TruthSpec s = base_five();
    s.n_period1 = 400;
    s.n_period2 = 400;
    // The second-period bump moves into the marginal's tail, so it touches
    // fewer rows and the second period is also intrinsically harder.
    s.features[3].marginal = {MarginalKind::kNormal, 1.5, 0.6};
    s.features[3].drift = {DriftKind::kXShift, 1.0};
    return s;
  }
  if (name == "sfs_benchmark") {
    TruthSpec s;
    s.intercept = 0.0;
    s.n_period1 = 1000;
    s.n_period2 = 1000;
    s.participants = {"S01"};
    s.seed = 17;
    const Feature informative[] = {Feature::kHR, Feature::kTemp_ave, Feature::kAcc_ave,
                                   Feature::kEDA_min, Feature::kEDA_max};
    for (std::size_t i = 0; i < kFeatureCount; ++i) {
      const auto f = static_cast<Feature>(i);
      FeatureTruth t{f, {MarginalKind::kNormal, 0.0, 1.0}, {}, {}};
      if (std::find(std::begin(informative), std::end(informative), f) != std::end(informative)) {
        t.shape = {ShapeKind::kLogisticRamp, 4.0, 0.0, 0.5};
      }
      s.features.push_back(t);
    }
    return s;
  }
  throw Error(ErrorKind::kValidation, "unknown truth preset '" + std::string(name) + "'");
}

std::vector<std::string> truth_preset_names() {
  return {"null", "x_shift", "y_scale", "calibrated_drift", "sfs_benchmark"};
}

BvpRendering render_bvp(std::span<const double> intervals_ms, double rate, double first_beat_s,
                        double pulse_width_s, std::optional<double> duration_s) {
  BvpRendering out;
  double t = first_beat_s;
  out.beat_times.push_back(t);
  for (double ms : intervals_ms) {
    t += ms / 1000.0;
    out.beat_times.push_back(t);
  }
  const double total = duration_s.value_or(t + first_beat_s);
  const auto n = static_cast<std::size_t>(std::floor(total * rate));
  out.samples.assign(n, 0.0);
  const double half = pulse_width_s / 2.0;
  for (double beat : out.beat_times) {
    const auto lo = static_cast<std::ptrdiff_t>(std::ceil((beat - half) * rate));
    const auto hi = static_cast<std::ptrdiff_t>(std::floor((beat + half) * rate));
    for (std::ptrdiff_t i = std::max<std::ptrdiff_t>(lo, 0);
         i <= hi && i < static_cast<std::ptrdiff_t>(n); ++i) {
      const double d = static_cast<double>(i) / rate - beat;
      if (std::abs(d) < half) {
        out.samples[static_cast<std::size_t>(i)] +=
            0.5 * (1.0 + std::cos(2.0 * std::numbers::pi * d / pulse_width_s));
      }
    }
  }
  return out;
}

std::vector<double> modulated_intervals(double mean_ms, double amplitude_ms, double freq_hz,
                                        double duration_s) {
  std::vector<double> out;
  double t = 0.0;
  while (true) {
    const double ibi = mean_ms + amplitude_ms * std::sin(2.0 * std::numbers::pi * freq_hz * t);
    if (t + ibi / 1000.0 > duration_s) break;
    t += ibi / 1000.0;
    out.push_back(ibi);
  }
  return out;
}

nlohmann::json to_json(const SessionSpec& s) {
  return nlohmann::ordered_json{{"participants", s.participants},
                                {"sessions_per_period", s.sessions_per_period},
                                {"duration_s", s.duration_s},
                                {"annotations_per_session", s.annotations_per_session},
                                {"first_annotation_s", s.first_annotation_s},
                                {"start_epoch", s.start_epoch},
                                {"eda_weight", s.eda_weight},
                                {"period2_eda_weight", s.period2_eda_weight},
                                {"seed", s.seed}};
}

SessionSpec session_spec_from_json(const nlohmann::json& j) {
  try {
    SessionSpec s;
    if (j.contains("participants")) s.participants = j.at("participants").get<std::vector<std::string>>();
    s.sessions_per_period = j.value("sessions_per_period", s.sessions_per_period);
    s.duration_s = j.value("duration_s", s.duration_s);
    s.annotations_per_session = j.value("annotations_per_session", s.annotations_per_session);
    s.first_annotation_s = j.value("first_annotation_s", s.first_annotation_s);
    s.start_epoch = j.value("start_epoch", s.start_epoch);
    s.eda_weight = j.value("eda_weight", s.eda_weight);
    s.period2_eda_weight = j.value("period2_eda_weight", s.period2_eda_weight);
    s.seed = j.value("seed", s.seed);
    if (s.sessions_per_period < 1 || s.annotations_per_session < 1 || s.participants.empty() ||
        s.first_annotation_s < 240.0 || s.duration_s <= s.first_annotation_s) {
      throw Error(ErrorKind::kValidation, "session spec out of range");
    }
    return s;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::kParse, std::string("session spec: ") + e.what());
  }
}

namespace {

struct AnnotationPlan {
  double rel_time = 0.0;  // seconds from session start
  double mean_ibi_ms = 800.0;
  double mod_amp_ms = 30.0;
  double mod_freq_hz = 0.25;
  double eda_level = 2.0;
  double temp_level = 33.0;
  double walk_amp_g = 0.5;
  EmotionCategory category = EmotionCategory::kRelaxed;
};

}  // namespace

RenderedSession render_session(const SessionSpec& spec, const std::string& participant_id,
                               Period period, int session_index) {
  const int pflag = period_flag(period);
  Rng rng(derive_seed(spec.seed, {fnv1a64(participant_id), static_cast<std::uint64_t>(pflag),
                                  static_cast<std::uint64_t>(session_index)}));
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::normal_distribution<double> normal(0.0, 1.0);

  const double start = spec.start_epoch + pflag * 1.5e7 + session_index * 86400.0;
  const int n_ann = spec.annotations_per_session;
  const double last = spec.duration_s - 10.0;
  std::vector<AnnotationPlan> plan(static_cast<std::size_t>(n_ann));
  for (int k = 0; k < n_ann; ++k) {
    AnnotationPlan& a = plan[static_cast<std::size_t>(k)];
    a.rel_time = n_ann == 1 ? spec.first_annotation_s
                            : spec.first_annotation_s +
                                  (last - spec.first_annotation_s) * k / (n_ann - 1);
    a.rel_time = std::round(a.rel_time);
    const double hr = 72.0 + 8.0 * normal(rng);
    a.mean_ibi_ms = 60000.0 / std::clamp(hr, 50.0, 110.0);
    a.mod_amp_ms = 15.0 + 20.0 * unit(rng);
    a.mod_freq_hz = unit(rng) < 0.5 ? 0.1 : 0.25;
    a.eda_level = 0.5 + 4.0 * unit(rng);
    a.temp_level = 33.0 + 0.6 * normal(rng);
    a.walk_amp_g = 0.2 + 0.6 * unit(rng);
    const double weight = pflag == 0 ? spec.eda_weight : spec.period2_eda_weight;
    const double logit = (hr - 72.0) / 6.0 + weight * (a.eda_level - 2.5) - 0.5;
    const bool high = unit(rng) < stats::logistic(logit);
    const bool first = unit(rng) < 0.5;
    a.category = high ? (first ? EmotionCategory::kHappy : EmotionCategory::kNervous)
                      : (first ? EmotionCategory::kRelaxed : EmotionCategory::kSad);
  }
  // Plans are looked up by window membership; the window includes a short
  // lead so the first beats of each 50 s slice already follow the plan.
  auto plan_at = [&](double rel) -> const AnnotationPlan* {
    for (const auto& a : plan) {
      if (rel >= a.rel_time - 55.0 && rel < a.rel_time) return &a;
    }
    return nullptr;
  };

  RenderedSession out;
  RecordingSession& s = out.session;
  s.participant_id = participant_id;
  s.period = period;

  // BVP: beat train with a baseline rhythm between annotation windows.
  std::vector<double> intervals;
  {
    double t = 0.5;
    while (true) {
      const AnnotationPlan* a = plan_at(t);
      double ibi = 0.0;
      if (a) {
        ibi = a->mean_ibi_ms +
              a->mod_amp_ms * std::sin(2.0 * std::numbers::pi * a->mod_freq_hz * t);
      } else {
        ibi = 820.0 + 20.0 * std::sin(2.0 * std::numbers::pi * 0.2 * t);
      }
      if (t + ibi / 1000.0 > spec.duration_s - 0.5) break;
      intervals.push_back(ibi);
      t += ibi / 1000.0;
    }
  }
  const auto bvp = render_bvp(intervals, 64.0, 0.5, 0.25, spec.duration_s);
  s.bvp = {ChannelKind::kBvp, start, 64.0, bvp.samples, {}, false};

  // EDA and TEMP at 4 Hz: smooth baseline, annotation-specific levels.
  const auto n4 = static_cast<std::size_t>(spec.duration_s * 4.0);
  s.eda = {ChannelKind::kEda, start, 4.0, std::vector<double>(n4), {}, false};
  s.temp = {ChannelKind::kTemp, start, 4.0, std::vector<double>(n4), {}, false};
  for (std::size_t i = 0; i < n4; ++i) {
    const double rel = static_cast<double>(i) / 4.0;
    const AnnotationPlan* a = plan_at(rel);
    const double level = a ? a->eda_level : 1.5;
    s.eda.samples[i] = level + 0.15 * std::sin(2.0 * std::numbers::pi * rel / 37.0) +
                       0.05 * std::sin(2.0 * std::numbers::pi * rel / 7.3);
    const double temp = a ? a->temp_level : 33.0;
    s.temp.samples[i] = temp + 0.05 * std::sin(2.0 * std::numbers::pi * rel / 53.0);
  }

  // ACC at 32 Hz in raw device units: at rest (0, 0, 1 g), with a walking
  // bout between 200 s and 120 s before each annotation.
  const auto n32 = static_cast<std::size_t>(spec.duration_s * 32.0);
  s.acc = {ChannelKind::kAcc, start, 32.0, {}, std::vector<Vec3>(n32), false};
  for (std::size_t i = 0; i < n32; ++i) {
    const double rel = static_cast<double>(i) / 32.0;
    double ax = 0.0, az = 1.0;
    for (const auto& a : plan) {
      if (rel >= a.rel_time - 200.0 && rel < a.rel_time - 120.0) {
        ax = a.walk_amp_g * std::sin(2.0 * std::numbers::pi * 1.8 * rel);
        az = 1.0 + 0.3 * a.walk_amp_g * std::cos(2.0 * std::numbers::pi * 1.8 * rel);
      }
    }
    s.acc.vectors[i] = {std::round(ax * kAccUnitsPerG) / kAccUnitsPerG, 0.0,
                        std::round(az * kAccUnitsPerG) / kAccUnitsPerG};
  }

  for (const auto& a : plan) {
    s.annotations.push_back({start + a.rel_time, a.category, ""});

    AnnotationTruth truth;
    truth.timestamp = start + a.rel_time;
    const double w0 = a.rel_time - 50.0;
    for (std::size_t k = 0; k + 1 < bvp.beat_times.size(); ++k) {
      if (bvp.beat_times[k] >= w0 && bvp.beat_times[k + 1] < a.rel_time) {
        truth.intervals_ms.push_back((bvp.beat_times[k + 1] - bvp.beat_times[k]) * 1000.0);
      }
    }
    truth.hr_bpm = 60000.0 / stats::mean(truth.intervals_ms);
    const auto e0 = static_cast<std::size_t>(std::floor(w0 * 4.0));
    const auto e1 = static_cast<std::size_t>(std::floor(a.rel_time * 4.0));
    truth.eda_min = *std::min_element(s.eda.samples.begin() + static_cast<std::ptrdiff_t>(e0),
                                      s.eda.samples.begin() + static_cast<std::ptrdiff_t>(e1));
    truth.temp_ave = stats::mean(std::span<const double>(s.temp.samples).subspan(e0, e1 - e0));
    const auto a0 = static_cast<std::size_t>(std::floor((a.rel_time - 240.0) * 32.0));
    const auto a1 = static_cast<std::size_t>(std::floor((a.rel_time - 50.0) * 32.0));
    for (std::size_t i = a0; i < a1; ++i) {
      const Vec3& v = s.acc.vectors[i];
      truth.acc_max = std::max(truth.acc_max, std::sqrt(v.x * v.x + v.y * v.y + v.z * v.z));
    }
    out.truth.push_back(std::move(truth));
  }
  return out;
}

}  // namespace affdrift::synth
