#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <filesystem>
#include <fstream>

#include "gait/eval.hpp"
#include "test_util.hpp"

using namespace gait;

TEST_CASE("stride threshold: textbook example selects 0.6 with F1=1") {
  auto sel = select_stride_threshold({0.2, 0.4, 0.6, 0.8}, {0, 0, 1, 1});
  CHECK(sel.threshold == 0.6);
  CHECK(sel.f1 == 1.0);
  CHECK(sel.curve.size() == 4);
}

TEST_CASE("threshold selection rejects single-label inputs") {
  CHECK_THROWS_AS(select_stride_threshold({0.2, 0.8}, {1, 1}), Error);
  CHECK_THROWS_AS(calibrate_session_threshold({0.2, 0.8}, {0, 0}), Error);
}

TEST_CASE("session threshold: example scan picks 0.7") {
  auto sel = calibrate_session_threshold({0.1, 0.2, 0.7, 0.9}, {0, 0, 1, 1});
  CHECK(sel.threshold == 0.7);
  CHECK(sel.f1 == 1.0);
}

TEST_CASE("threshold selection equals the brute-force oracle on random sets") {
  Rng rng(123);
  for (int trial = 0; trial < 30; ++trial) {
    const int n = 200 + static_cast<int>(rng.below(200));
    std::vector<double> scores(n);
    std::vector<uint8_t> labels(n);
    bool has0 = false, has1 = false;
    for (int i = 0; i < n; ++i) {
      scores[i] = rng.uniform();
      // correlate labels with scores so the scan is non-trivial
      labels[i] = rng.uniform() < scores[i] ? 1 : 0;
      has0 |= labels[i] == 0;
      has1 |= labels[i] == 1;
    }
    if (!has0 || !has1) continue;
    // duplicated scores exercise the tie handling
    for (int i = 0; i + 1 < n; i += 7) scores[i + 1] = scores[i];

    auto oracle = testutil::brute_force_f1_threshold(scores, labels);
    auto sel = select_stride_threshold(scores, labels);
    CHECK(sel.threshold == oracle.threshold);
    CHECK(sel.f1 == oracle.f1);
  }
}

TEST_CASE("selected threshold F1 >= default 0.5 threshold F1") {
  Rng rng(321);
  for (int trial = 0; trial < 20; ++trial) {
    const int n = 150;
    std::vector<double> scores(n);
    std::vector<uint8_t> labels(n);
    for (int i = 0; i < n; ++i) {
      scores[i] = rng.uniform();
      labels[i] = rng.uniform() < 0.4 ? 1 : 0;
    }
    labels[0] = 0;
    labels[1] = 1;
    auto sel = select_stride_threshold(scores, labels);

    long tp = 0, fp = 0, fn = 0;
    for (int i = 0; i < n; ++i) {
      const bool pred = scores[i] >= 0.5;
      if (pred && labels[i]) ++tp;
      else if (pred && !labels[i]) ++fp;
      else if (!pred && labels[i]) ++fn;
    }
    const double p = (tp + fp) > 0 ? double(tp) / (tp + fp) : 0.0;
    const double r = (tp + fn) > 0 ? double(tp) / (tp + fn) : 0.0;
    const double f1_default = (p + r) > 0 ? 2 * p * r / (p + r) : 0.0;
    CHECK(sel.f1 >= f1_default);
  }
}

TEST_CASE("session scoring: ratio, decisions, boundary rule") {
  std::vector<uint8_t> preds(40, 0);
  for (int i = 0; i < 30; ++i) preds[i] = 1;
  auto s = score_session("s1", preds, 0.5);
  CHECK(s.n_strides == 40);
  CHECK(s.n_lame_pred == 30);
  CHECK(s.anomaly_score == doctest::Approx(0.75));
  CHECK(s.lame_decision);

  auto s2 = score_session("s2", std::vector<uint8_t>(40, 0), 0.5);
  CHECK(s2.anomaly_score == 0.0);
  CHECK_FALSE(s2.lame_decision);

  // score exactly at the threshold decides Lame (>= rule)
  std::vector<uint8_t> half(4, 0);
  half[0] = half[1] = 1;
  auto s3 = score_session("s3", half, 0.5);
  CHECK(s3.anomaly_score == 0.5);
  CHECK(s3.lame_decision);

  CHECK_THROWS_AS(score_session("s4", {}, 0.5), Error);
}

TEST_CASE("session scoring is permutation invariant") {
  Rng rng(11);
  std::vector<uint8_t> preds(100);
  for (auto& p : preds) p = rng.below(2);
  auto base = score_session("s", preds, 0.37);
  for (int trial = 0; trial < 5; ++trial) {
    rng.shuffle(preds);
    auto again = score_session("s", preds, 0.37);
    CHECK(again.anomaly_score == base.anomaly_score);
    CHECK(again.lame_decision == base.lame_decision);
  }
}

namespace {

Stride labeled_stride(const std::string& sid, Gait gait, bool lame, int start,
                      int session_len) {
  Stride s;
  s.session_id = sid;
  s.gait = gait;
  s.max_len = 4;
  s.valid_len = 2;
  s.data.assign(kNumChannels * 4, 0.0);
  s.lame = lame;
  s.start_index = start;
  s.session_samples = session_len;
  return s;
}

}  // namespace

TEST_CASE("report: all-correct predictions zero the off-diagonals") {
  std::vector<Stride> strides;
  StridePredictions preds;
  std::map<std::string, SessionLabel> labels = {
      {"a", SessionLabel::Sound}, {"b", SessionLabel::Lame}};
  for (int i = 0; i < 10; ++i) {
    strides.push_back(labeled_stride("a", Gait::Trot, false, i * 10, 100));
    preds.prob.push_back(0.1);
    preds.pred.push_back(0);
    strides.push_back(labeled_stride("b", Gait::Trot, true, i * 10, 100));
    preds.prob.push_back(0.9);
    preds.pred.push_back(1);
  }
  auto report = build_report(strides, preds, labels, 0.5, 0.5);
  CHECK(report.stride_cm.fp == 0);
  CHECK(report.stride_cm.fn == 0);
  CHECK(report.stride_cm.tp == 10);
  CHECK(report.stride_cm.tn == 10);
  CHECK(report.stride_cm.accuracy() == 1.0);
  CHECK(report.session_cm.tp == 1);
  CHECK(report.session_cm.tn == 1);
  CHECK(report.session_cm.fp == 0);
  CHECK(report.session_cm.fn == 0);
  CHECK(report.stride_cm.total() == 20);
  REQUIRE(report.per_gait.size() == 1);
  CHECK(report.per_gait[0].accuracy == 1.0);
}

TEST_CASE("report: uniformly spread lame predictions fill deciles evenly") {
  std::vector<Stride> strides;
  StridePredictions preds;
  std::map<std::string, SessionLabel> labels = {{"a", SessionLabel::Lame}};
  const int T = 1000;
  for (int i = 0; i < 100; ++i) {
    strides.push_back(labeled_stride("a", Gait::Trot, true, i * 10, T));
    preds.prob.push_back(0.9);
    preds.pred.push_back(1);
  }
  auto report = build_report(strides, preds, labels, 0.5, 0.5);
  for (int d = 0; d < 10; ++d) {
    CHECK(report.temporal_histogram[d] >= 7);
    CHECK(report.temporal_histogram[d] <= 13);
  }
  long total = 0;
  for (long v : report.temporal_histogram) total += v;
  CHECK(total == 100);
}

TEST_CASE("report files are written and contain the reference block") {
  namespace fs = std::filesystem;
  const fs::path dir = fs::temp_directory_path() / "gait_report_test";
  fs::remove_all(dir);

  std::vector<Stride> strides;
  StridePredictions preds;
  std::map<std::string, SessionLabel> labels = {
      {"a", SessionLabel::Sound}, {"b", SessionLabel::Lame}};
  for (int i = 0; i < 5; ++i) {
    strides.push_back(labeled_stride("a", Gait::Trot, false, i * 10, 100));
    preds.prob.push_back(0.2 + 0.01 * i);
    preds.pred.push_back(0);
    strides.push_back(labeled_stride("b", Gait::Walk, true, i * 10, 100));
    preds.prob.push_back(0.8 - 0.01 * i);
    preds.pred.push_back(1);
  }
  auto report = build_report(strides, preds, labels, 0.5, 0.5);
  write_report_files(report, dir);

  for (const char* name : {"stride_confusion.csv", "session_scores.csv",
                           "pr_curve.csv", "temporal_histogram.csv",
                           "summary.txt"})
    CHECK(fs::exists(dir / name));

  std::ifstream summary(dir / "summary.txt");
  std::stringstream body;
  body << summary.rdbuf();
  CHECK(body.str().find("75.5%") != std::string::npos);
  CHECK(body.str().find("53%") != std::string::npos);
  CHECK(body.str().find("74%") != std::string::npos);
  CHECK(body.str().find("90%") != std::string::npos);
  CHECK(body.str().find("6470 of 8237") != std::string::npos);
  fs::remove_all(dir);
}

TEST_CASE("confusion matrix metrics") {
  ConfusionMatrix cm{6470, 500, 17246, 1767};
  CHECK(cm.total() == 6470 + 500 + 17246 + 1767);
  CHECK(cm.recall() == doctest::Approx(6470.0 / 8237.0));
  CHECK(cm.precision() == doctest::Approx(6470.0 / 6970.0));
  const double p = cm.precision(), r = cm.recall();
  CHECK(cm.f1() == doctest::Approx(2 * p * r / (p + r)));
}
