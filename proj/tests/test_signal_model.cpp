#include <doctest.h>

#include <cmath>
#include <filesystem>

#include "affdrift/error.hpp"
#include "affdrift/signal_model.hpp"
#include "test_support.hpp"

using namespace affdrift;

namespace {

SampledChannel make_channel(ChannelKind kind, double start, double seconds) {
  SampledChannel ch;
  ch.kind = kind;
  ch.start_time = start;
  ch.rate = nominal_rate(kind);
  const auto n = static_cast<std::size_t>(seconds * ch.rate);
  if (kind == ChannelKind::kAcc) {
    for (std::size_t i = 0; i < n; ++i) ch.vectors.push_back({0.0, 0.0, 1.0});
  } else {
    for (std::size_t i = 0; i < n; ++i) ch.samples.push_back(static_cast<double>(i));
  }
  return ch;
}

RecordingSession make_session(double start, double seconds, std::vector<double> offsets) {
  RecordingSession s;
  s.participant_id = "P";
  s.bvp = make_channel(ChannelKind::kBvp, start, seconds);
  s.eda = make_channel(ChannelKind::kEda, start, seconds);
  s.temp = make_channel(ChannelKind::kTemp, start, seconds);
  s.acc = make_channel(ChannelKind::kAcc, start, seconds);
  for (double o : offsets) s.annotations.push_back({start + o, EmotionCategory::kNervous, ""});
  return s;
}

}  // namespace

TEST_CASE("scalar channel parse") {
  const auto ch = parse_channel_csv("1700000000\n4.0\n0.1\n0.2\n", ChannelKind::kEda);
  CHECK(ch.start_time == 1700000000.0);
  CHECK(ch.rate == 4.0);
  CHECK(ch.samples == std::vector<double>{0.1, 0.2});
  CHECK_FALSE(ch.nonstandard_rate);
}

TEST_CASE("ACC raw units are scaled to g") {
  const auto ch = parse_channel_csv("5,5,5\n32,32,32\n64,0,0\n", ChannelKind::kAcc);
  REQUIRE(ch.vectors.size() == 1);
  CHECK(ch.vectors[0] == Vec3{1.0, 0.0, 0.0});
  CHECK_THROWS_AS(parse_channel_csv("5,5,6\n32,32,32\n64,0,0\n", ChannelKind::kAcc), Error);
  CHECK_THROWS_AS(parse_channel_csv("5,5,5\n32,32,32\n64,0\n", ChannelKind::kAcc), Error);
}

TEST_CASE("channel validation") {
  try {
    parse_channel_csv("1700000000\n0\n0.1\n", ChannelKind::kEda);
    FAIL("expected a validation error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::kValidation);
  }
  CHECK_THROWS_AS(parse_channel_csv("1700000000\n4\n", ChannelKind::kEda), Error);
  const auto odd = parse_channel_csv("0\n8\n1\n", ChannelKind::kEda);
  CHECK(odd.nonstandard_rate);
  try {
    parse_channel_csv("0\n4\n1\nnope\n", ChannelKind::kEda);
    FAIL("expected a parse error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::kParse);
    CHECK(std::string(e.what()).find("row 4") != std::string::npos);
  }
}

TEST_CASE("channel CSV round-trips") {
  testing_support::Gen g(21);
  SampledChannel acc;
  acc.kind = ChannelKind::kAcc;
  acc.start_time = 1700000123.5;
  acc.rate = 32.0;
  for (int i = 0; i < 50; ++i) {
    acc.vectors.push_back({g.integer(-128, 127) / 64.0, g.integer(-128, 127) / 64.0,
                           g.integer(-128, 127) / 64.0});
  }
  auto back = parse_channel_csv(format_channel_csv(acc), ChannelKind::kAcc);
  CHECK(back == acc);

  SampledChannel bvp;
  bvp.kind = ChannelKind::kBvp;
  bvp.start_time = 1700000000.25;
  bvp.rate = 64.0;
  bvp.samples = g.values(200, -100.0, 100.0);
  CHECK(parse_channel_csv(format_channel_csv(bvp), ChannelKind::kBvp) == bvp);
}

TEST_CASE("arousal mapping") {
  const auto m = default_arousal_mapping();
  CHECK(map_arousal(EmotionCategory::kNervous, m) == Arousal::kHigh);
  CHECK(map_arousal(EmotionCategory::kRelaxed, m) == Arousal::kLow);
  CHECK(map_arousal(EmotionCategory::kHappy, m) == Arousal::kHigh);
  CHECK(map_arousal(EmotionCategory::kSad, m) == Arousal::kLow);
  auto custom = m;
  custom[EmotionCategory::kHappy] = Arousal::kLow;
  CHECK(map_arousal(EmotionCategory::kHappy, custom) == Arousal::kLow);
  custom.erase(EmotionCategory::kSad);
  CHECK_THROWS_AS(map_arousal(EmotionCategory::kSad, custom), Error);
}

TEST_CASE("annotations parse and format") {
  const auto a = parse_annotations_csv("timestamp,category,sublabel\n10,Happy,x\n5,Sad\n");
  REQUIRE(a.size() == 2);
  CHECK(a[0].category == EmotionCategory::kHappy);
  CHECK(a[1].sublabel.empty());
  CHECK(parse_annotations_csv(format_annotations_csv(a)) == a);
  CHECK_THROWS_AS(parse_annotations_csv("timestamp,category\n1,Angry\n"), Error);
  CHECK(parse_period("2") == Period::kP2);
  CHECK_THROWS_AS(parse_period("P3"), Error);
}

TEST_CASE("segment extraction boundaries") {
  const double start = 1700000000.0;
  SUBCASE("annotation at 300 s gives a 50 s slice") {
    const auto s = make_session(start, 600.0, {300.0});
    const auto ex = extract_labeled_segments(s, default_arousal_mapping());
    REQUIRE(ex.segments.size() == 1);
    const auto& seg = ex.segments[0];
    CHECK(seg.bvp.size() == 3200);
    CHECK(seg.bvp.front() == 250.0 * 64.0);  // sample index of t - 50
    CHECK(seg.bvp.back() == 300.0 * 64.0 - 1.0);
    CHECK(seg.eda.size() == 200);
    CHECK(seg.acc.size() == 190 * 32);
    CHECK(seg.label == Arousal::kHigh);
  }
  SUBCASE("annotation at 100 s has no ACC lead") {
    const auto s = make_session(start, 600.0, {100.0});
    const auto ex = extract_labeled_segments(s, default_arousal_mapping());
    CHECK(ex.segments.empty());
    REQUIRE(ex.skipped.size() == 1);
    CHECK(ex.skipped[0].reason.find("ACC") != std::string::npos);
  }
  SUBCASE("count matches an index oracle") {
    const std::vector<double> offsets{100.0, 240.0, 300.0, 450.0, 600.0};
    const auto s = make_session(start, 600.0, offsets);
    const auto ex = extract_labeled_segments(s, default_arousal_mapping());
    std::size_t expected = 0;
    for (double o : offsets) {
      const bool acc_ok = o - 240.0 >= 0.0 && (o - 50.0) * 32.0 <= 600.0 * 32.0;
      const bool bvp_ok = o - 50.0 >= 0.0 && o * 64.0 <= 600.0 * 64.0;
      expected += (acc_ok && bvp_ok) ? 1 : 0;
    }
    CHECK(ex.segments.size() == expected);
    CHECK(ex.segments.size() == 4);
    CHECK(ex.segments.size() + ex.skipped.size() == offsets.size());
  }
  SUBCASE("annotation past the end is skipped") {
    const auto s = make_session(start, 600.0, {601.0});
    const auto ex = extract_labeled_segments(s, default_arousal_mapping());
    CHECK(ex.segments.empty());
  }
}

TEST_CASE("session directory round-trip") {
  const auto dir = std::filesystem::temp_directory_path() / "affdrift_session_rt";
  std::filesystem::remove_all(dir);
  auto s = make_session(1700000000.0, 30.0, {20.0, 10.0});
  s.period = Period::kP2;
  write_session(s, dir);
  const auto back = load_session(dir);
  CHECK(back.participant_id == "P");
  CHECK(back.period == Period::kP2);
  CHECK(back.bvp == s.bvp);
  CHECK(back.acc == s.acc);
  REQUIRE(back.annotations.size() == 2);
  CHECK(back.annotations[0].timestamp < back.annotations[1].timestamp);
  std::filesystem::remove(dir / "EDA.csv");
  try {
    load_session(dir);
    FAIL("expected missing input");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::kMissingInput);
  }
  std::filesystem::remove_all(dir);
}
