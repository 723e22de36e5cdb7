#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>

#include "gait/segmentation.hpp"
#include "gait/synthgait.hpp"
#include "gait/types.hpp"

using namespace gait;

namespace {

constexpr double kPi = 3.14159265358979323846;

SensorSession cosine_session(int samples, int period,
                             Gait gait = Gait::Trot) {
  SensorSession s;
  s.session_id = "cos";
  s.horse_id = "h";
  s.samples = samples;
  s.channels.assign(static_cast<size_t>(kNumChannels) * samples, 0.0);
  s.gait_tags.assign(samples, gait);
  s.label = SessionLabel::Sound;
  const int vertical = ChannelManifest::default_manifest().vertical_accel_index;
  for (int t = 0; t < samples; ++t) {
    const double v = std::cos(2.0 * kPi * t / period);
    for (int c = 0; c < kNumChannels; ++c)
      s.channel_at(c, t) = c == vertical ? v : 0.5 * v + 0.01 * c;
  }
  return s;
}

// how many ground-truth stride starts have a detected start within +/- tol
double boundary_recovery(const std::vector<GtStride>& gt,
                         const std::vector<std::pair<int, int>>& detected,
                         int tol = 5) {
  if (gt.empty()) return 0.0;
  long hit = 0;
  for (const auto& g : gt) {
    bool found = false;
    for (const auto& d : detected)
      if (std::abs(d.first - g.start) <= tol) {
        found = true;
        break;
      }
    hit += found ? 1 : 0;
  }
  return static_cast<double>(hit) / gt.size();
}

}  // namespace

TEST_CASE("pure cosine, period 80, 800 samples: 9 peaks, 8 strides of 80") {
  auto s = cosine_session(800, 80);
  auto bounds = detect_stride_boundaries(s, SegmentationConfig{},
                                         ChannelManifest::default_manifest());
  REQUIRE(bounds.size() == 8);  // peaks at 80,160,...,720 (t=0 is an edge)
  for (size_t i = 0; i < bounds.size(); ++i) {
    CHECK(bounds[i].first == static_cast<int>(80 * (i + 1)));
    CHECK(bounds[i].second - bounds[i].first == 80);
  }
}

TEST_CASE("constant signal yields no boundaries") {
  SensorSession s = cosine_session(500, 80);
  for (auto& v : s.channels) v = 3.25;
  auto bounds = detect_stride_boundaries(s, SegmentationConfig{},
                                         ChannelManifest::default_manifest());
  CHECK(bounds.empty());
}

TEST_CASE("peak thinning keeps the taller peak inside min distance") {
  std::vector<double> v(200, 0.0);
  v[50] = 1.0;
  v[60] = 2.0;  // 10 apart: only the taller survives at distance 30
  v[120] = 1.5;
  auto peaks = detect_peaks(v, 30, 0.1);
  REQUIRE(peaks.size() == 2);
  CHECK(peaks[0] == 60);
  CHECK(peaks[1] == 120);
}

TEST_CASE("extraction pads, masks and inherits the session label") {
  auto s = cosine_session(400, 80);
  s.label = SessionLabel::Lame;
  SegmentationConfig cfg;
  auto bounds = detect_stride_boundaries(s, cfg,
                                         ChannelManifest::default_manifest());
  auto res = extract_strides(s, bounds, cfg);
  REQUIRE_FALSE(res.strides.empty());
  for (const auto& stride : res.strides) {
    stride.validate();
    CHECK(stride.valid_len == 80);
    CHECK(stride.max_len == 100);
    CHECK(stride.gait == Gait::Trot);
    REQUIRE(stride.lame.has_value());
    CHECK(*stride.lame);
    // mask: 80 ones then 20 zeros, data zero beyond valid_len
    CHECK(stride.valid_at(79));
    CHECK_FALSE(stride.valid_at(80));
    for (int c = 0; c < kNumChannels; ++c)
      for (int i = 80; i < 100; ++i) CHECK(stride.at(c, i) == 0.0);
  }
}

TEST_CASE("mixed-gait intervals are dropped") {
  auto s = cosine_session(400, 80);
  // second half canter: the interval crossing sample 200 mixes tags
  for (int t = 200; t < 400; ++t) s.gait_tags[t] = Gait::Canter;
  SegmentationConfig cfg;
  auto bounds = detect_stride_boundaries(s, cfg,
                                         ChannelManifest::default_manifest());
  auto res = extract_strides(s, bounds, cfg);
  CHECK(res.dropped_multi_gait >= 1);
  for (const auto& stride : res.strides) {
    bool uniform = true;
    for (int i = 0; i < stride.valid_len; ++i)
      uniform = uniform && (s.gait_tags[stride.start_index + i] == stride.gait);
    CHECK(uniform);
  }
}

TEST_CASE("over-length intervals are dropped and counted") {
  auto s = cosine_session(600, 120);  // period > max_stride_len
  SegmentationConfig cfg;
  auto bounds = detect_stride_boundaries(s, cfg,
                                         ChannelManifest::default_manifest());
  REQUIRE_FALSE(bounds.empty());
  auto res = extract_strides(s, bounds, cfg);
  CHECK(res.strides.empty());
  CHECK(res.dropped_over_length == static_cast<int>(bounds.size()));
}

TEST_CASE("unknown-label sessions produce prediction-only strides") {
  auto s = cosine_session(400, 80);
  s.label = SessionLabel::Unknown;
  auto strides = segment_session(s, SegmentationConfig{},
                                 ChannelManifest::default_manifest());
  REQUIRE_FALSE(strides.strides.empty());
  for (const auto& stride : strides.strides) CHECK_FALSE(stride.lame.has_value());
}

TEST_CASE("trot-count filter: 39 excluded, 40 kept, 161-of-184 analog") {
  auto make = [](const std::string& id, int trot_count) {
    SessionStrides s;
    s.session_id = id;
    s.label = SessionLabel::Sound;
    Stride st;
    st.session_id = id;
    st.gait = Gait::Trot;
    st.max_len = 4;
    st.valid_len = 2;
    st.data.assign(kNumChannels * 4, 0.0);
    for (int i = 0; i < trot_count; ++i) s.strides.push_back(st);
    return s;
  };

  SegmentationConfig cfg;  // threshold 40
  {
    auto r = filter_sessions_by_trot_count({make("a", 39), make("b", 40)}, cfg);
    REQUIRE(r.kept.size() == 1);
    CHECK(r.kept[0].session_id == "b");
    REQUIRE(r.excluded.size() == 1);
    CHECK(r.excluded[0].session_id == "a");
  }
  {
    std::vector<SessionStrides> corpus;
    for (int i = 0; i < 184; ++i)
      corpus.push_back(make("s" + std::to_string(i), i < 23 ? 10 : 60));
    auto r = filter_sessions_by_trot_count(std::move(corpus), cfg);
    CHECK(r.kept.size() == 161);
    CHECK(r.excluded.size() == 23);
  }
}

TEST_CASE("stride length stats") {
  auto stride_of_len = [](int len) {
    Stride s;
    s.session_id = "x";
    s.gait = Gait::Trot;
    s.max_len = 100;
    s.valid_len = len;
    s.data.assign(kNumChannels * 100, 0.0);
    return s;
  };
  auto stats = stride_length_stats(
      {stride_of_len(80), stride_of_len(80), stride_of_len(100)});
  CHECK(stats.mean == doctest::Approx(260.0 / 3).epsilon(1e-9));
  CHECK(stats.median == 80.0);
  CHECK(stats.total == 3);
  CHECK(stats.histogram[Gait::Trot][80] == 2);

  auto single = stride_length_stats({stride_of_len(100)});
  CHECK(single.p95 == 100.0);

  CHECK_THROWS_AS(stride_length_stats({}), Error);
}

TEST_CASE("segmentation is deterministic and strides are sorted, non-overlapping") {
  SynthConfig cfg;
  cfg.seed = 11;
  cfg.duration_s = 30.0;
  cfg.noise_std = 0.05;
  auto [session, gt] = generate_session(cfg);
  auto manifest = ChannelManifest::default_manifest();

  auto a = segment_session(session, SegmentationConfig{}, manifest);
  auto b = segment_session(session, SegmentationConfig{}, manifest);
  REQUIRE(a.strides.size() == b.strides.size());
  for (size_t i = 0; i < a.strides.size(); ++i) {
    CHECK(a.strides[i].start_index == b.strides[i].start_index);
    CHECK(a.strides[i].data == b.strides[i].data);
  }
  for (size_t i = 1; i < a.strides.size(); ++i)
    CHECK(a.strides[i - 1].start_index + a.strides[i - 1].valid_len <=
          a.strides[i].start_index);
  for (const auto& s : a.strides) s.validate();
}

TEST_CASE("translation equivariance: constant prefix shifts boundaries") {
  SynthConfig cfg;
  cfg.seed = 5;
  cfg.duration_s = 20.0;
  cfg.noise_std = 0.0;
  auto [session, gt] = generate_session(cfg);
  auto manifest = ChannelManifest::default_manifest();
  auto base = detect_stride_boundaries(session, SegmentationConfig{}, manifest);
  REQUIRE_FALSE(base.empty());

  for (int k : {5, 17}) {
    SensorSession shifted;
    shifted.session_id = session.session_id;
    shifted.horse_id = session.horse_id;
    shifted.samples = session.samples + k;
    shifted.label = session.label;
    shifted.channels.assign(
        static_cast<size_t>(kNumChannels) * shifted.samples, 0.0);
    shifted.gait_tags.assign(shifted.samples, Gait::Trot);
    for (int c = 0; c < kNumChannels; ++c) {
      // prefix holds the channel's first value; signal follows unchanged
      for (int t = 0; t < k; ++t)
        shifted.channel_at(c, t) = session.channel_at(c, 0);
      for (int t = 0; t < session.samples; ++t)
        shifted.channel_at(c, t + k) = session.channel_at(c, t);
    }
    auto moved =
        detect_stride_boundaries(shifted, SegmentationConfig{}, manifest);
    REQUIRE(moved.size() == base.size());
    for (size_t i = 0; i < base.size(); ++i) {
      CHECK(moved[i].first == base[i].first + k);
      CHECK(moved[i].second == base[i].second + k);
    }
  }
}

TEST_CASE("noiseless synthetic boundaries recovered within +/-5 samples") {
  for (uint64_t seed : {1ULL, 2ULL, 3ULL}) {
    SynthConfig cfg;
    cfg.seed = seed;
    cfg.duration_s = 40.0;
    cfg.noise_std = 0.0;
    auto [session, gt] = generate_session(cfg);
    auto bounds = detect_stride_boundaries(session, SegmentationConfig{},
                                           ChannelManifest::default_manifest());
    CHECK(boundary_recovery(gt.boundaries, bounds) >= 0.95);
  }
}

TEST_CASE("generator corpus histogram mode near the configured period") {
  SynthConfig cfg;
  cfg.seed = 21;
  cfg.duration_s = 60.0;
  cfg.noise_std = 0.05;
  auto [session, gt] = generate_session(cfg);
  auto strides = segment_session(session, SegmentationConfig{},
                                 ChannelManifest::default_manifest());
  auto stats = stride_length_stats(strides.strides);
  int mode_len = 0;
  long mode_count = -1;
  for (const auto& [len, count] : stats.histogram[Gait::Trot])
    if (count > mode_count) {
      mode_count = count;
      mode_len = len;
    }
  CHECK(mode_len >= 75);
  CHECK(mode_len <= 85);
}
