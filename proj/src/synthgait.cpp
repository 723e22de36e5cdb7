#include "gait/synthgait.hpp"

#include <array>
#include <cmath>
#include <cstdio>
#include <fstream>

#include "gait/rng.hpp"
#include "gait/session_io.hpp"

namespace gait {

namespace {

constexpr double kPi = 3.14159265358979323846;

struct ChannelWave {
  double a1 = 1.0, psi1 = 0.0;  // fundamental
  double a3 = 0.1, psi3 = 0.0;  // 3rd harmonic
};

// Even period >= 8 so half-strides are whole sample counts and the
// oscillatory sums over each half cancel exactly.
int jittered_period(int base, double jitter, Rng& rng) {
  const double u = rng.uniform(-1.0, 1.0);
  const int p = 2 * static_cast<int>(std::lround(base * (1.0 + jitter * u) / 2.0));
  return std::max(p, 8);
}

}  // namespace

void SynthConfig::validate() const {
  if (asymmetry < 0.0 || asymmetry > 1.0)
    throw Error("asymmetry must be in [0,1]");
  if (noise_std < 0.0) throw Error("noise_std must be >= 0");
  if (period_jitter < 0.0 || period_jitter > 0.4)
    throw Error("period_jitter must be in [0,0.4]");
  if (duration_s <= 0.0 && gait_plan.empty())
    throw Error("duration_s must be > 0");
  for (const auto& [gait, seconds] : gait_plan)
    if (seconds <= 0.0) throw Error("gait_plan durations must be > 0");
  for (const auto& [gait, period] : stride_period_samples)
    if (period < 8 || period % 2 != 0)
      throw Error("stride periods must be even and >= 8 samples");
}

std::pair<SensorSession, SynthGroundTruth> generate_session(
    const SynthConfig& cfg) {
  cfg.validate();
  Rng rng(cfg.seed);

  std::vector<std::pair<Gait, double>> plan = cfg.gait_plan;
  if (plan.empty()) plan.emplace_back(Gait::Trot, cfg.duration_s);

  // Waveform parameters are redrawn PER STRIDE so no session acquires a
  // fixed spectral fingerprint a classifier could memorize; the label must
  // be read from the within-stride asymmetry. Both halves of a stride share
  // its draw, which keeps the half-stride energy identities exact. The
  // boundary-detection channel keeps zero phase so every stride start is a
  // local maximum.
  const int vertical = ChannelManifest::default_manifest().vertical_accel_index;
  auto draw_waves = [&rng, vertical](std::array<ChannelWave, kNumChannels>& w) {
    for (int c = 0; c < kNumChannels; ++c) {
      if (c == vertical) {
        w[c].a1 = rng.uniform(0.9, 1.0);
        w[c].a3 = rng.uniform(0.05, 0.10);
        w[c].psi1 = w[c].psi3 = 0.0;
      } else {
        w[c].a1 = rng.uniform(0.4, 1.0);
        w[c].a3 = rng.uniform(0.05, 0.30);
        w[c].psi1 = rng.uniform(0.0, 2.0 * kPi);
        w[c].psi3 = rng.uniform(0.0, 2.0 * kPi);
      }
    }
  };
  std::array<ChannelWave, kNumChannels> waves;

  int total = 0;
  for (const auto& [gait, seconds] : plan)
    total += static_cast<int>(std::lround(seconds * kSampleRateHz));
  if (total < 1) throw Error("gait plan yields an empty session");

  SensorSession session;
  session.session_id = cfg.session_id;
  session.horse_id = cfg.horse_id;
  session.samples = total;
  session.channels.assign(static_cast<size_t>(kNumChannels) * total, 0.0);
  session.gait_tags.assign(total, Gait::Other);
  session.label = cfg.asymmetry > 0.0 ? SessionLabel::Lame : SessionLabel::Sound;

  SynthGroundTruth gt;
  gt.label = session.label;
  gt.asymmetry = cfg.asymmetry;

  const double delta = cfg.asymmetry;
  const double phase_shift = delta * kPi / 8.0;

  int cursor = 0;
  for (const auto& [gait, seconds] : plan) {
    const int block_len = static_cast<int>(std::lround(seconds * kSampleRateHz));
    const int block_end = std::min(cursor + block_len, total);
    for (int t = cursor; t < block_end; ++t) session.gait_tags[t] = gait;

    if (gait == Gait::Other) {
      cursor = block_end;  // standing/transition: noise only
      continue;
    }

    const int base_period = cfg.stride_period_samples.at(gait);
    int t0 = cursor;
    while (t0 < block_end) {
      const int period = jittered_period(base_period, cfg.period_jitter, rng);
      draw_waves(waves);
      const int end = t0 + period;
      const bool complete = end <= block_end;
      const int fill_end = std::min(end, block_end);
      const int half = period / 2;
      for (int t = t0; t < fill_end; ++t) {
        const bool second_half = (t - t0) >= half;
        const double scale = second_half ? 1.0 - delta : 1.0;
        const double phi = 2.0 * kPi * (t - t0) / period +
                           (second_half ? phase_shift : 0.0);
        for (int c = 0; c < kNumChannels; ++c) {
          const ChannelWave& w = waves[c];
          session.channel_at(c, t) =
              scale * (w.a1 * std::cos(phi + w.psi1) +
                       w.a3 * std::cos(3.0 * phi + w.psi3));
        }
      }
      if (complete) gt.boundaries.push_back({t0, end, gait});
      t0 = end;
    }
    cursor = block_end;
  }

  if (cfg.noise_std > 0.0)
    for (int c = 0; c < kNumChannels; ++c)
      for (int t = 0; t < total; ++t)
        session.channel_at(c, t) += cfg.noise_std * rng.normal();

  session.validate();
  return {std::move(session), std::move(gt)};
}

double half_stride_energy_ratio(const SensorSession& session,
                                const SynthGroundTruth& gt) {
  double first = 0.0, second = 0.0;
  for (const auto& b : gt.boundaries) {
    const int mid = b.start + (b.end - b.start) / 2;
    for (int c = 0; c < kNumChannels; ++c) {
      for (int t = b.start; t < mid; ++t) {
        const double v = session.channel_at(c, t);
        first += v * v;
      }
      for (int t = mid; t < b.end; ++t) {
        const double v = session.channel_at(c, t);
        second += v * v;
      }
    }
  }
  if (first <= 0.0) throw Error("energy ratio undefined on silent session");
  return second / first;
}

std::vector<CorpusEntry> generate_corpus(const CorpusConfig& cfg,
                                         const std::filesystem::path& out_dir) {
  if (cfg.n_sound < 1 || cfg.n_lame < 1)
    throw Error("corpus needs at least one session per label");
  if (cfg.delta_min <= 0.0 || cfg.delta_max < cfg.delta_min ||
      cfg.delta_max > 1.0)
    throw Error("corpus delta range must satisfy 0 < min <= max <= 1");

  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  if (ec) throw Error("cannot create " + out_dir.string() + ": " + ec.message());

  Rng master(cfg.seed);
  Rng delta_rng = master.derive(0xD);

  std::vector<CorpusEntry> entries;
  const int n = cfg.n_sound + cfg.n_lame;
  for (int i = 0; i < n; ++i) {
    SynthConfig sc = cfg.base;
    char id[16];
    std::snprintf(id, sizeof(id), "s%04d", i + 1);
    sc.session_id = id;
    sc.horse_id = std::string("h") + (id + 1);
    sc.seed = cfg.seed ^ (0x9e3779b97f4a7c15ULL * (i + 1));
    sc.asymmetry = i < cfg.n_sound
                       ? 0.0
                       : delta_rng.uniform(cfg.delta_min, cfg.delta_max);

    auto [session, gt] = generate_session(sc);
    CorpusEntry entry;
    entry.session_id = sc.session_id;
    entry.path = out_dir / (sc.session_id + ".gaitsession");
    entry.label = session.label;
    entry.asymmetry = sc.asymmetry;
    entry.ground_truth = std::move(gt);
    save_session_file(session, entry.path);
    entries.push_back(std::move(entry));
  }

  save_manifest(ChannelManifest::default_manifest(), out_dir / "manifest.txt");

  std::ofstream gt_out(out_dir / "ground_truth.csv", std::ios::binary);
  gt_out << "session_id,start,end,gait\n";
  for (const auto& e : entries)
    for (const auto& b : e.ground_truth.boundaries)
      gt_out << e.session_id << ',' << b.start << ',' << b.end << ','
             << to_string(b.gait) << '\n';

  std::ofstream params(out_dir / "synth_params.csv", std::ios::binary);
  params << "session_id,label,asymmetry\n";
  for (const auto& e : entries)
    params << e.session_id << ',' << to_string(e.label) << ','
           << format_double(e.asymmetry) << '\n';

  return entries;
}

}  // namespace gait
