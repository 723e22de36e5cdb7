#pragma once

#include <filesystem>
#include <string>

#include "gait/dataset.hpp"
#include "gait/eval.hpp"
#include "gait/segmentation.hpp"
#include "gait/session_io.hpp"
#include "gait/synthgait.hpp"
#include "gait/train.hpp"

namespace gait {

uint64_t fnv1a_hash(const std::string& text);

// Segment every session in the directory and apply the trot-count filter.
TrotFilterResult segment_directory(const std::filesystem::path& sessions_dir,
                                   const std::filesystem::path& manifest_path,
                                   const SegmentationConfig& seg);

void write_stride_index(const std::vector<SessionStrides>& sessions,
                        const std::filesystem::path& path);
void write_stride_stats(const std::vector<SessionStrides>& sessions,
                        const std::filesystem::path& path);

// Calibrates both thresholds on the validation split and rewrites the
// checkpoint. Returns the validation PR selection for reporting.
struct CalibrationResult {
  ThresholdSelection stride;
  ThresholdSelection session;
};
CalibrationResult calibrate_model(nn::TrainedModel& model,
                                  const std::vector<SessionStrides>& sessions,
                                  const SplitAssignment& split);

// Test-split evaluation with the model's calibrated thresholds.
EvalReport evaluate_model(nn::TrainedModel& model,
                          const std::vector<SessionStrides>& sessions,
                          const SplitAssignment& split);

struct PredictResult {
  int exit_code = 0;  // 0 sound, 2 lame, 3 insufficient strides
  std::string message;
  SessionScore score;
  int gait_stride_count = 0;
};

PredictResult predict_session(const std::filesystem::path& session_path,
                              const std::filesystem::path& checkpoint_path,
                              const std::filesystem::path& manifest_path,
                              SegmentationConfig seg);

struct PipelineConfig {
  std::filesystem::path out_dir;
  uint64_t seed = 42;
  int n_sound = 30;
  int n_lame = 30;
  SynthConfig synth;  // per-session fields overwritten by the corpus stage
  double delta_min = 0.2;
  double delta_max = 0.4;
  SegmentationConfig seg;
  SplitFractions fractions;
  TrainConfig train;
};

struct PipelineResult {
  EvalReport report;
  std::filesystem::path checkpoint_path;
  std::filesystem::path reports_dir;
  int sessions_kept = 0;
  int sessions_excluded = 0;
};

// synth -> segment -> split -> train -> calibrate -> evaluate, one seed,
// every artifact written under out_dir. Reruns with the same config are
// byte-identical except for wall-clock columns in the train log.
PipelineResult run_pipeline(const PipelineConfig& cfg);

}  // namespace gait
