#pragma once

#include <filesystem>
#include <map>
#include <utility>
#include <vector>

#include "gait/types.hpp"

namespace gait {

// Synthetic session generator. Each channel carries the stride-frequency
// fundamental plus its 3rd harmonic with per-session random amplitude and
// phase; odd harmonics keep half-stride energy independent of phase, so the
// asymmetry statistic below is exact. Lameness scales every second
// half-stride by (1 - asymmetry) and advances its phase by asymmetry*pi/8.
struct SynthConfig {
  uint64_t seed = 1;
  double duration_s = 60.0;                        // used when gait_plan empty
  std::vector<std::pair<Gait, double>> gait_plan;  // (gait, seconds)
  std::map<Gait, int> stride_period_samples = {
      {Gait::Walk, 96}, {Gait::Trot, 80}, {Gait::Canter, 66}};
  double period_jitter = 0.05;  // fraction; periods rounded to even samples
  double asymmetry = 0.0;       // delta in [0,1]; 0 = sound
  double noise_std = 0.05;

  std::string session_id = "synth";
  std::string horse_id = "synth-horse";

  void validate() const;
};

struct GtStride {
  int start = 0;
  int end = 0;
  Gait gait = Gait::Trot;
};

struct SynthGroundTruth {
  std::vector<GtStride> boundaries;
  SessionLabel label = SessionLabel::Sound;
  double asymmetry = 0.0;
};

std::pair<SensorSession, SynthGroundTruth> generate_session(
    const SynthConfig& cfg);

// Sum of squared amplitude over second half-strides divided by the same sum
// over first half-strides, across all channels and ground-truth strides.
// Noiseless sessions give exactly (1 - asymmetry)^2.
double half_stride_energy_ratio(const SensorSession& session,
                                const SynthGroundTruth& gt);

struct CorpusConfig {
  int n_sound = 30;
  int n_lame = 30;
  uint64_t seed = 7;
  double delta_min = 0.2;
  double delta_max = 0.4;
  SynthConfig base;  // per-session seed/id/asymmetry fields are overwritten
};

struct CorpusEntry {
  std::string session_id;
  std::filesystem::path path;
  SessionLabel label = SessionLabel::Sound;
  double asymmetry = 0.0;
  SynthGroundTruth ground_truth;
};

// Writes <id>.gaitsession files plus manifest.txt, ground_truth.csv and
// synth_params.csv into out_dir. Byte-identical for a fixed config.
std::vector<CorpusEntry> generate_corpus(const CorpusConfig& cfg,
                                         const std::filesystem::path& out_dir);

}  // namespace gait
