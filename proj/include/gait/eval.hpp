#pragma once

#include <array>
#include <filesystem>
#include <map>
#include <vector>

#include "gait/nn/model.hpp"
#include "gait/train.hpp"
#include "gait/types.hpp"

namespace gait {

struct PrPoint {
  double threshold = 0.0;
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
};

struct ThresholdSelection {
  double threshold = 0.5;
  double f1 = 0.0;
  std::vector<PrPoint> curve;  // one point per candidate, descending threshold
};

// Candidates are the unique scores; the decision rule is score >= t =>
// positive; the F1-maximizing threshold is returned, ties broken toward the
// largest threshold. Lame is the positive class.
ThresholdSelection select_stride_threshold(const std::vector<double>& probs,
                                           const std::vector<uint8_t>& labels);

// Same scan over session anomaly scores.
ThresholdSelection calibrate_session_threshold(
    const std::vector<double>& scores, const std::vector<uint8_t>& labels);

struct StridePredictions {
  std::vector<double> prob;
  std::vector<uint8_t> pred;  // prob >= stride_threshold
};

// Infer-mode classification of raw strides (normalization applied from the
// model's stats). Strides whose gait differs from the training gait trigger
// one warning on stderr unless suppressed.
StridePredictions classify_strides(nn::TrainedModel& model,
                                   const std::vector<Stride>& strides,
                                   bool warn_gait_mismatch = true);

struct SessionScore {
  std::string session_id;
  int n_strides = 0;
  int n_lame_pred = 0;
  double anomaly_score = 0.0;  // n_lame_pred / n_strides
  bool lame_decision = false;  // anomaly_score >= session_threshold
};

SessionScore score_session(const std::string& session_id,
                           const std::vector<uint8_t>& stride_preds,
                           double session_threshold);

struct ConfusionMatrix {
  long tp = 0, fp = 0, tn = 0, fn = 0;  // Lame = positive

  long total() const { return tp + fp + tn + fn; }
  double accuracy() const;
  double precision() const;
  double recall() const;
  double f1() const;
};

struct GaitAccuracy {
  Gait gait = Gait::Trot;
  long n_strides = 0;
  double accuracy = 0.0;
};

struct EvalReport {
  ConfusionMatrix stride_cm;
  ConfusionMatrix session_cm;
  std::vector<GaitAccuracy> per_gait;
  std::vector<SessionScore> session_scores;           // sorted by session_id
  std::map<std::string, SessionLabel> session_labels;
  std::array<long, 10> temporal_histogram{};  // lame-predicted stride starts,
                                              // deciles of session duration
  std::vector<PrPoint> pr_curve;              // test-set sweep
  double stride_threshold = 0.5;
  double session_threshold = 0.5;
  uint64_t seed = 0;
};

// Test-set report: both confusion matrices, per-gait accuracy, session
// scores and the temporal distribution of lame-predicted strides.
EvalReport build_report(const std::vector<Stride>& test_strides,
                        const StridePredictions& preds,
                        const std::map<std::string, SessionLabel>& labels,
                        double stride_threshold, double session_threshold);

void write_report_files(const EvalReport& report,
                        const std::filesystem::path& dir);

std::string report_summary_text(const EvalReport& report);

}  // namespace gait
