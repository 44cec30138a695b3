#include "affdrift/signal_model.hpp"

#include <algorithm>
#include <cmath>
#include <json.hpp>

#include "affdrift/csv.hpp"
#include "affdrift/error.hpp"

namespace affdrift {

namespace {

constexpr const char* kChannelFiles[] = {"BVP.csv", "EDA.csv", "TEMP.csv", "ACC.csv"};

std::string row_error(std::size_t row, const std::string& msg) {
  return "row " + std::to_string(row) + ": " + msg;
}

}  // namespace

std::string_view to_string(ChannelKind kind) {
  switch (kind) {
    case ChannelKind::kBvp: return "BVP";
    case ChannelKind::kEda: return "EDA";
    case ChannelKind::kTemp: return "TEMP";
    case ChannelKind::kAcc: return "ACC";
  }
  return "?";
}

double nominal_rate(ChannelKind kind) {
  switch (kind) {
    case ChannelKind::kBvp: return 64.0;
    case ChannelKind::kEda: return 4.0;
    case ChannelKind::kTemp: return 4.0;
    case ChannelKind::kAcc: return 32.0;
  }
  return 0.0;
}

void validate_channel(SampledChannel& channel) {
  if (!(channel.rate > 0.0) || !std::isfinite(channel.rate)) {
    throw Error(ErrorKind::kValidation, std::string(to_string(channel.kind)) +
                                            ": sample rate must be positive");
  }
  const bool acc = channel.kind == ChannelKind::kAcc;
  if (acc ? !channel.samples.empty() : !channel.vectors.empty()) {
    throw Error(ErrorKind::kValidation,
                std::string(to_string(channel.kind)) + ": wrong sample arity");
  }
  if (channel.size() < 1) {
    throw Error(ErrorKind::kValidation, std::string(to_string(channel.kind)) + ": no samples");
  }
  channel.nonstandard_rate = channel.rate != nominal_rate(channel.kind);
}

SampledChannel parse_channel_csv(std::string_view text, ChannelKind kind,
                                 double acc_units_per_g) {
  const auto rows = csv::lines(text);
  const std::size_t arity = kind == ChannelKind::kAcc ? 3 : 1;
  if (rows.size() < 3) {
    throw Error(ErrorKind::kParse,
                row_error(rows.size() + 1, "expected start row, rate row and at least one sample"));
  }
  auto fields_of = [&](std::size_t i) {
    auto f = csv::split(rows[i]);
    if (f.size() != arity) {
      throw Error(ErrorKind::kParse, row_error(i + 1, "expected " + std::to_string(arity) +
                                                          " column(s), got " +
                                                          std::to_string(f.size())));
    }
    return f;
  };

  SampledChannel ch;
  ch.kind = kind;
  {
    const auto start = fields_of(0);
    ch.start_time = csv::parse_double(start[0], 1);
    for (std::size_t c = 1; c < arity; ++c) {
      if (csv::parse_double(start[c], 1) != ch.start_time)
        throw Error(ErrorKind::kParse, row_error(1, "inconsistent start times"));
    }
    const auto rate = fields_of(1);
    ch.rate = csv::parse_double(rate[0], 2);
    for (std::size_t c = 1; c < arity; ++c) {
      if (csv::parse_double(rate[c], 2) != ch.rate)
        throw Error(ErrorKind::kParse, row_error(2, "inconsistent sample rates"));
    }
  }

  const std::size_t n = rows.size() - 2;
  if (kind == ChannelKind::kAcc) {
    ch.vectors.reserve(n);
  } else {
    ch.samples.reserve(n);
  }
  for (std::size_t i = 2; i < rows.size(); ++i) {
    const auto f = fields_of(i);
    if (kind == ChannelKind::kAcc) {
      ch.vectors.push_back({csv::parse_double(f[0], i + 1) / acc_units_per_g,
                            csv::parse_double(f[1], i + 1) / acc_units_per_g,
                            csv::parse_double(f[2], i + 1) / acc_units_per_g});
    } else {
      ch.samples.push_back(csv::parse_double(f[0], i + 1));
    }
  }
  validate_channel(ch);
  return ch;
}

std::string format_channel_csv(const SampledChannel& channel, double acc_units_per_g) {
  std::string out;
  const std::string start = csv::format_double(channel.start_time);
  const std::string rate = csv::format_double(channel.rate);
  if (channel.kind == ChannelKind::kAcc) {
    out += start + "," + start + "," + start + "\n";
    out += rate + "," + rate + "," + rate + "\n";
    for (const Vec3& v : channel.vectors) {
      out += csv::format_double(v.x * acc_units_per_g);
      out += ',';
      out += csv::format_double(v.y * acc_units_per_g);
      out += ',';
      out += csv::format_double(v.z * acc_units_per_g);
      out += '\n';
    }
  } else {
    out += start + "\n" + rate + "\n";
    for (double v : channel.samples) {
      out += csv::format_double(v);
      out += '\n';
    }
  }
  return out;
}

std::string_view to_string(EmotionCategory category) {
  switch (category) {
    case EmotionCategory::kHappy: return "Happy";
    case EmotionCategory::kNervous: return "Nervous";
    case EmotionCategory::kSad: return "Sad";
    case EmotionCategory::kRelaxed: return "Relaxed";
  }
  return "?";
}

EmotionCategory parse_category(std::string_view text) {
  text = csv::trim(text);
  for (auto c : {EmotionCategory::kHappy, EmotionCategory::kNervous, EmotionCategory::kSad,
                 EmotionCategory::kRelaxed}) {
    if (text == to_string(c)) return c;
  }
  throw Error(ErrorKind::kParse, "unknown emotion category '" + std::string(text) + "'");
}

ArousalMapping default_arousal_mapping() {
  return {{EmotionCategory::kHappy, Arousal::kHigh},
          {EmotionCategory::kNervous, Arousal::kHigh},
          {EmotionCategory::kSad, Arousal::kLow},
          {EmotionCategory::kRelaxed, Arousal::kLow}};
}

Arousal map_arousal(EmotionCategory category, const ArousalMapping& mapping) {
  const auto it = mapping.find(category);
  if (it == mapping.end()) {
    throw Error(ErrorKind::kValidation,
                "no arousal mapping for category " + std::string(to_string(category)));
  }
  return it->second;
}

std::string_view to_string(Period period) { return period == Period::kP1 ? "P1" : "P2"; }

Period parse_period(std::string_view text) {
  text = csv::trim(text);
  if (text == "P1" || text == "1") return Period::kP1;
  if (text == "P2" || text == "2") return Period::kP2;
  throw Error(ErrorKind::kParse, "unknown period '" + std::string(text) + "'");
}

std::vector<EmotionAnnotation> parse_annotations_csv(std::string_view text) {
  const auto rows = csv::lines(text);
  if (rows.empty() || csv::trim(rows[0]).substr(0, 9) != "timestamp") {
    throw Error(ErrorKind::kParse, row_error(1, "expected header timestamp,category,sublabel"));
  }
  std::vector<EmotionAnnotation> out;
  for (std::size_t i = 1; i < rows.size(); ++i) {
    if (csv::trim(rows[i]).empty()) continue;
    const auto f = csv::split(rows[i]);
    if (f.size() < 2 || f.size() > 3) {
      throw Error(ErrorKind::kParse, row_error(i + 1, "expected 2 or 3 columns"));
    }
    EmotionAnnotation a;
    a.timestamp = csv::parse_double(f[0], i + 1);
    try {
      a.category = parse_category(f[1]);
    } catch (const Error& e) {
      throw Error(ErrorKind::kParse, row_error(i + 1, e.what()));
    }
    if (f.size() == 3) a.sublabel = std::string(f[2]);
    out.push_back(std::move(a));
  }
  return out;
}

std::string format_annotations_csv(const std::vector<EmotionAnnotation>& annotations) {
  std::string out = "timestamp,category,sublabel\n";
  for (const auto& a : annotations) {
    out += csv::format_double(a.timestamp) + "," + std::string(to_string(a.category)) + "," +
           a.sublabel + "\n";
  }
  return out;
}

RecordingSession load_session(const std::filesystem::path& dir, double acc_units_per_g) {
  RecordingSession s;
  const auto manifest_path = dir / "session.json";
  if (!std::filesystem::exists(manifest_path)) {
    throw Error(ErrorKind::kMissingInput, "missing " + manifest_path.string());
  }
  try {
    const auto manifest = nlohmann::json::parse(csv::read_file(manifest_path.string()));
    s.participant_id = manifest.at("participant_id").get<std::string>();
    s.period = parse_period(manifest.at("period").get<std::string>());
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::kParse, manifest_path.string() + ": " + e.what());
  }

  SampledChannel* targets[] = {&s.bvp, &s.eda, &s.temp, &s.acc};
  const ChannelKind kinds[] = {ChannelKind::kBvp, ChannelKind::kEda, ChannelKind::kTemp,
                               ChannelKind::kAcc};
  for (int i = 0; i < 4; ++i) {
    const auto path = dir / kChannelFiles[i];
    try {
      *targets[i] = parse_channel_csv(csv::read_file(path.string()), kinds[i], acc_units_per_g);
    } catch (const Error& e) {
      throw Error(e.kind(), path.string() + ": " + e.what());
    }
  }
  const auto ann_path = dir / "annotations.csv";
  try {
    s.annotations = parse_annotations_csv(csv::read_file(ann_path.string()));
  } catch (const Error& e) {
    throw Error(e.kind(), ann_path.string() + ": " + e.what());
  }
  std::stable_sort(s.annotations.begin(), s.annotations.end(),
                   [](const auto& a, const auto& b) { return a.timestamp < b.timestamp; });
  return s;
}

void write_session(const RecordingSession& session, const std::filesystem::path& dir,
                   double acc_units_per_g) {
  std::filesystem::create_directories(dir);
  const SampledChannel* sources[] = {&session.bvp, &session.eda, &session.temp, &session.acc};
  for (int i = 0; i < 4; ++i) {
    csv::write_file((dir / kChannelFiles[i]).string(),
                    format_channel_csv(*sources[i], acc_units_per_g));
  }
  csv::write_file((dir / "annotations.csv").string(), format_annotations_csv(session.annotations));
  nlohmann::ordered_json manifest;
  manifest["participant_id"] = session.participant_id;
  manifest["period"] = std::string(to_string(session.period));
  csv::write_file((dir / "session.json").string(), manifest.dump(2) + "\n");
}

std::optional<SampleRange> sample_range(const SampledChannel& channel, double t0, double t1) {
  const double rel0 = t0 - channel.start_time;
  const double rel1 = t1 - channel.start_time;
  if (rel0 < 0.0 || rel1 < rel0) return std::nullopt;
  const auto begin = static_cast<std::size_t>(std::floor(rel0 * channel.rate));
  const auto end = static_cast<std::size_t>(std::floor(rel1 * channel.rate));
  if (end > channel.size()) return std::nullopt;
  return SampleRange{begin, end};
}

SegmentExtraction extract_labeled_segments(const RecordingSession& session,
                                           const ArousalMapping& mapping,
                                           const SegmentWindows& windows) {
  SegmentExtraction out;
  for (const auto& ann : session.annotations) {
    const double t = ann.timestamp;
    const double w0 = t - windows.label_window_s;
    const auto bvp = sample_range(session.bvp, w0, t);
    const auto eda = sample_range(session.eda, w0, t);
    const auto temp = sample_range(session.temp, w0, t);
    const auto acc = sample_range(session.acc, t - windows.acc_begin_s, t - windows.acc_end_s);
    std::string reason;
    if (!acc) {
      reason = "ACC window outside recording";
    } else if (!bvp) {
      reason = "BVP window outside recording";
    } else if (!eda) {
      reason = "EDA window outside recording";
    } else if (!temp) {
      reason = "TEMP window outside recording";
    }
    if (!reason.empty()) {
      out.skipped.push_back({t, std::move(reason)});
      continue;
    }
    LabeledSegment seg;
    seg.participant_id = session.participant_id;
    seg.period = session.period;
    seg.annotation_time = t;
    seg.category = ann.category;
    seg.label = map_arousal(ann.category, mapping);
    seg.bvp_rate = session.bvp.rate;
    seg.eda_rate = session.eda.rate;
    seg.temp_rate = session.temp.rate;
    seg.acc_rate = session.acc.rate;
    auto copy = [](const auto& src, const SampleRange& r) {
      return std::vector(src.begin() + static_cast<std::ptrdiff_t>(r.begin),
                         src.begin() + static_cast<std::ptrdiff_t>(r.end));
    };
    seg.bvp = copy(session.bvp.samples, *bvp);
    seg.eda = copy(session.eda.samples, *eda);
    seg.temp = copy(session.temp.samples, *temp);
    seg.acc = copy(session.acc.vectors, *acc);
    out.segments.push_back(std::move(seg));
  }
  return out;
}

}  // namespace affdrift
