#include "gait/pipeline.hpp"

#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

#include "gait/nn/checkpoint.hpp"

namespace gait {

uint64_t fnv1a_hash(const std::string& text) {
  uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

TrotFilterResult segment_directory(const std::filesystem::path& sessions_dir,
                                   const std::filesystem::path& manifest_path,
                                   const SegmentationConfig& seg) {
  const ChannelManifest manifest = load_manifest(manifest_path);
  auto sessions = load_sessions_dir(sessions_dir, manifest);
  std::vector<SessionStrides> segmented;
  segmented.reserve(sessions.size());
  for (const auto& session : sessions)
    segmented.push_back(segment_session(session, seg, manifest));
  return filter_sessions_by_trot_count(std::move(segmented), seg);
}

void write_stride_index(const std::vector<SessionStrides>& sessions,
                        const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path.string());
  out << "session_id,stride_idx,start,end,gait,valid_len\n";
  for (const auto& sess : sessions) {
    int idx = 0;
    for (const auto& s : sess.strides)
      out << sess.session_id << ',' << idx++ << ',' << s.start_index << ','
          << (s.start_index + s.valid_len) << ',' << to_string(s.gait) << ','
          << s.valid_len << "\n";
  }
}

void write_stride_stats(const std::vector<SessionStrides>& sessions,
                        const std::filesystem::path& path) {
  std::vector<Stride> all;
  for (const auto& sess : sessions)
    all.insert(all.end(), sess.strides.begin(), sess.strides.end());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path.string());
  if (all.empty()) {
    out << "gait,valid_len,count\n";
    return;
  }
  const auto stats = stride_length_stats(all);
  char line[128];
  std::snprintf(line, sizeof(line), "#total=%ld mean=%.4f median=%.1f p95=%.1f\n",
                stats.total, stats.mean, stats.median, stats.p95);
  out << line << "gait,valid_len,count\n";
  for (const auto& [gait, hist] : stats.histogram)
    for (const auto& [len, count] : hist)
      out << to_string(gait) << ',' << len << ',' << count << "\n";
}

namespace {

// Validation/test strides of the model's gait, with their session labels.
struct SplitStrides {
  std::vector<Stride> strides;
  std::map<std::string, SessionLabel> session_labels;
};

SplitStrides collect_split(const std::vector<SessionStrides>& sessions,
                           const SplitAssignment& split, Split which,
                           Gait gait) {
  std::vector<const SessionStrides*> ordered;
  for (const auto& s : sessions)
    if (split.at(s.session_id) == which) ordered.push_back(&s);
  std::sort(ordered.begin(), ordered.end(),
            [](const SessionStrides* a, const SessionStrides* b) {
              return a->session_id < b->session_id;
            });
  SplitStrides out;
  for (const SessionStrides* sess : ordered) {
    out.session_labels[sess->session_id] = sess->label;
    for (const auto& s : sess->strides)
      if (s.gait == gait) out.strides.push_back(s);
  }
  return out;
}

}  // namespace

CalibrationResult calibrate_model(nn::TrainedModel& model,
                                  const std::vector<SessionStrides>& sessions,
                                  const SplitAssignment& split) {
  auto val = collect_split(sessions, split, Split::Validation,
                           model.train_gait);
  if (val.strides.empty())
    throw Error("no validation strides available for calibration");

  auto preds = classify_strides(model, val.strides, /*warn=*/false);
  std::vector<uint8_t> labels(val.strides.size());
  for (size_t i = 0; i < val.strides.size(); ++i) {
    if (!val.strides[i].lame)
      throw Error("validation stride without label in calibration");
    labels[i] = *val.strides[i].lame ? 1 : 0;
  }

  CalibrationResult result;
  result.stride = select_stride_threshold(preds.prob, labels);
  model.stride_threshold = result.stride.threshold;

  // Session scores at the freshly selected stride threshold.
  std::map<std::string, std::vector<uint8_t>> by_session;
  for (size_t i = 0; i < val.strides.size(); ++i)
    by_session[val.strides[i].session_id].push_back(
        preds.prob[i] >= model.stride_threshold ? 1 : 0);
  std::vector<double> scores;
  std::vector<uint8_t> session_labels;
  for (const auto& [id, p] : by_session) {
    scores.push_back(score_session(id, p, 0.5).anomaly_score);
    session_labels.push_back(
        val.session_labels.at(id) == SessionLabel::Lame ? 1 : 0);
  }
  result.session = calibrate_session_threshold(scores, session_labels);
  model.session_threshold = result.session.threshold;
  return result;
}

EvalReport evaluate_model(nn::TrainedModel& model,
                          const std::vector<SessionStrides>& sessions,
                          const SplitAssignment& split) {
  auto test = collect_split(sessions, split, Split::Test, model.train_gait);
  if (test.strides.empty()) throw Error("no test strides to evaluate");
  auto preds = classify_strides(model, test.strides, /*warn=*/false);
  return build_report(test.strides, preds, test.session_labels,
                      model.stride_threshold, model.session_threshold);
}

PredictResult predict_session(const std::filesystem::path& session_path,
                              const std::filesystem::path& checkpoint_path,
                              const std::filesystem::path& manifest_path,
                              SegmentationConfig seg) {
  auto model = nn::load_checkpoint(checkpoint_path);
  const ChannelManifest manifest = load_manifest(manifest_path);
  const SensorSession session = load_session_file(session_path, manifest);

  seg.max_stride_len = model.input_len;  // segmentation must match training
  auto segmented = segment_session(session, seg, manifest);

  std::vector<Stride> gait_strides;
  for (const auto& s : segmented.strides)
    if (s.gait == model.train_gait) gait_strides.push_back(s);

  PredictResult out;
  out.gait_stride_count = static_cast<int>(gait_strides.size());
  if (out.gait_stride_count < seg.min_trot_strides_per_session) {
    out.exit_code = 3;
    std::ostringstream msg;
    msg << "session " << session.session_id << ": insufficient "
        << to_string(model.train_gait) << " strides (" << out.gait_stride_count
        << " found, " << seg.min_trot_strides_per_session
        << " required for a reliable verdict)";
    out.message = msg.str();
    return out;
  }

  auto preds = classify_strides(model, gait_strides, /*warn=*/false);
  out.score = score_session(session.session_id, preds.pred,
                            model.session_threshold);
  out.exit_code = out.score.lame_decision ? 2 : 0;
  char buf[256];
  std::snprintf(buf, sizeof(buf),
                "session %s: %s (anomaly_score=%.6f, %d of %d %s strides "
                "lame-classified, session_threshold=%.6f)",
                session.session_id.c_str(),
                out.score.lame_decision ? "LAME" : "SOUND",
                out.score.anomaly_score, out.score.n_lame_pred,
                out.score.n_strides, to_string(model.train_gait),
                model.session_threshold);
  out.message = buf;
  return out;
}

namespace {

std::string pipeline_config_text(const PipelineConfig& cfg) {
  std::ostringstream out;
  out << "seed=" << cfg.seed << "\nn_sound=" << cfg.n_sound
      << "\nn_lame=" << cfg.n_lame << "\ndelta_min=" << cfg.delta_min
      << "\ndelta_max=" << cfg.delta_max
      << "\nsynth.noise_std=" << cfg.synth.noise_std
      << "\nsynth.period_jitter=" << cfg.synth.period_jitter
      << "\nsynth.duration_s=" << cfg.synth.duration_s
      << "\nsynth.gait_plan=";
  for (const auto& [gait, sec] : cfg.synth.gait_plan)
    out << to_string(gait) << ':' << sec << ';';
  out << "\nseg.max_stride_len=" << cfg.seg.max_stride_len
      << "\nseg.min_peak_distance=" << cfg.seg.min_peak_distance
      << "\nseg.prominence_factor=" << cfg.seg.prominence_factor
      << "\nseg.min_trot_strides=" << cfg.seg.min_trot_strides_per_session
      << "\nfractions=" << cfg.fractions.train << '/' << cfg.fractions.validation
      << '/' << cfg.fractions.test << "\ntrain.gait=" << to_string(cfg.train.gait)
      << "\ntrain.epochs=" << cfg.train.epochs
      << "\ntrain.batch_size=" << cfg.train.batch_size
      << "\ntrain.initial_lr=" << cfg.train.initial_lr
      << "\narch.conv1=" << cfg.train.arch.conv1_filters
      << "\narch.conv2=" << cfg.train.arch.conv2_filters
      << "\narch.kernel=" << cfg.train.arch.kernel_size
      << "\narch.dense=" << cfg.train.arch.dense_units
      << "\narch.dropout=" << cfg.train.arch.dropout_rate << "\n";
  return out.str();
}

}  // namespace

PipelineResult run_pipeline(const PipelineConfig& cfg) {
  namespace fs = std::filesystem;
  const fs::path out = cfg.out_dir;
  fs::create_directories(out);

  const std::string stage_sep(8, '-');
  auto stage = [&](const char* name) {
    std::cout << stage_sep << " pipeline stage: " << name << "\n";
  };

  // synth
  stage("synth");
  CorpusConfig corpus;
  corpus.n_sound = cfg.n_sound;
  corpus.n_lame = cfg.n_lame;
  corpus.seed = cfg.seed;
  corpus.delta_min = cfg.delta_min;
  corpus.delta_max = cfg.delta_max;
  corpus.base = cfg.synth;
  const fs::path data_dir = out / "data";
  auto entries = generate_corpus(corpus, data_dir);

  // segment
  stage("segment");
  auto filtered = segment_directory(data_dir, data_dir / "manifest.txt",
                                    cfg.seg);
  write_stride_index(filtered.kept, out / "strides.csv");
  write_stride_stats(filtered.kept, out / "stride_stats.csv");
  if (filtered.kept.empty())
    throw Error("pipeline stage segment: every session was excluded");

  // split
  stage("split");
  std::vector<std::pair<std::string, SessionLabel>> ids;
  for (const auto& s : filtered.kept) ids.emplace_back(s.session_id, s.label);
  auto split = split_labeled_ids(ids, cfg.fractions, cfg.seed);
  save_split(split, out / "split.csv");

  // train
  stage("train");
  TrainConfig train_cfg = cfg.train;
  train_cfg.seed = cfg.seed;
  auto bundle = build_datasets(filtered.kept, split, train_cfg.gait);
  auto [model, log] = train_model(bundle, train_cfg);
  save_train_log(log, out / "train_log.csv");

  // calibrate
  stage("calibrate");
  auto calibration = calibrate_model(model, filtered.kept, split);
  const fs::path checkpoint_path = out / "checkpoint.gait";
  nn::save_checkpoint(model, checkpoint_path);
  {
    std::ofstream pr(out / "pr_curve_validation.csv", std::ios::binary);
    pr << "threshold,precision,recall,f1\n";
    char line[128];
    for (const auto& p : calibration.stride.curve) {
      std::snprintf(line, sizeof(line), "%.9f,%.6f,%.6f,%.6f\n", p.threshold,
                    p.precision, p.recall, p.f1);
      pr << line;
    }
  }

  // evaluate (reload the checkpoint so reported numbers come from the
  // single-precision artifact a user would ship)
  stage("evaluate");
  auto shipped = nn::load_checkpoint(checkpoint_path);
  auto report = evaluate_model(shipped, filtered.kept, split);
  report.seed = cfg.seed;
  const fs::path reports_dir = out / "reports";
  write_report_files(report, reports_dir);

  // reproducibility manifest
  const std::string config_text = pipeline_config_text(cfg);
  std::ofstream manifest(out / "run_manifest.txt", std::ios::binary);
  manifest << "#gaitcnn run manifest\nconfig_hash="
           << fnv1a_hash(config_text) << "\n"
           << config_text;
  manifest << "sessions_kept=" << filtered.kept.size()
           << "\nsessions_excluded=" << filtered.excluded.size()
           << "\ntrain_strides=" << bundle.train.size()
           << "\nvalidation_strides=" << bundle.validation.size()
           << "\ntest_strides=" << bundle.test.size()
           << "\nstride_threshold=" << format_double(model.stride_threshold)
           << "\nsession_threshold=" << format_double(model.session_threshold)
           << "\n";

  PipelineResult result;
  result.report = std::move(report);
  result.checkpoint_path = checkpoint_path;
  result.reports_dir = reports_dir;
  result.sessions_kept = static_cast<int>(filtered.kept.size());
  result.sessions_excluded = static_cast<int>(filtered.excluded.size());
  return result;
}

}  // namespace gait
