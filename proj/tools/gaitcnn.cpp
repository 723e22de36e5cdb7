// Command-line front end for the lameness-detection pipeline:
// synth, ingest, segment, split, train, calibrate, evaluate, predict,
// pipeline. Exit codes: 0 ok/sound, 1 error, 2 lame, 3 insufficient strides.

#include <cstdio>
#include <fstream>
#include <iostream>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "CLI11.hpp"
#include "gait/nn/checkpoint.hpp"
#include "gait/pipeline.hpp"

namespace {

using namespace gait;

Gait parse_gait_flag(const std::string& s) {
  auto g = gait_from_string(s);
  if (!g) throw Error("unknown gait '" + s + "'");
  return *g;
}

std::vector<std::pair<Gait, double>> parse_plan(const std::string& text) {
  std::vector<std::pair<Gait, double>> plan;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    const auto colon = item.find(':');
    if (colon == std::string::npos)
      throw Error("gait plan items must look like trot:55, got '" + item + "'");
    plan.emplace_back(parse_gait_flag(item.substr(0, colon)),
                      std::stod(item.substr(colon + 1)));
  }
  return plan;
}

struct SegFlags {
  SegmentationConfig cfg;

  void attach(CLI::App* app) {
    app->add_option("--max-stride-len", cfg.max_stride_len,
                    "maximum stride length in samples");
    app->add_option("--min-peak-distance", cfg.min_peak_distance,
                    "minimum samples between stride boundaries");
    app->add_option("--prominence-factor", cfg.prominence_factor,
                    "peak prominence threshold as a fraction of channel std");
    app->add_option("--min-trot", cfg.min_trot_strides_per_session,
                    "minimum trot strides for a session to be usable");
  }
};

struct SynthFlags {
  int n_sound = 30;
  int n_lame = 30;
  double delta_min = 0.2, delta_max = 0.4;
  std::string plan_text;
  SynthConfig cfg;

  void attach(CLI::App* app) {
    app->add_option("--sound", n_sound, "number of sound sessions");
    app->add_option("--lame", n_lame, "number of lame sessions");
    app->add_option("--delta-min", delta_min, "lameness asymmetry lower bound");
    app->add_option("--delta-max", delta_max, "lameness asymmetry upper bound");
    app->add_option("--duration", cfg.duration_s,
                    "trot seconds per session when no --plan is given");
    app->add_option("--plan", plan_text,
                    "gait plan, e.g. trot:55,walk:10,canter:10");
    app->add_option("--noise", cfg.noise_std, "gaussian noise std");
    app->add_option("--jitter", cfg.period_jitter, "stride period jitter");
    app->add_option("--trot-period", cfg.stride_period_samples[Gait::Trot],
                    "trot stride period in samples (even)");
    app->add_option("--walk-period", cfg.stride_period_samples[Gait::Walk],
                    "walk stride period in samples (even)");
    app->add_option("--canter-period", cfg.stride_period_samples[Gait::Canter],
                    "canter stride period in samples (even)");
  }

  CorpusConfig corpus(uint64_t seed) const {
    CorpusConfig c;
    c.n_sound = n_sound;
    c.n_lame = n_lame;
    c.seed = seed;
    c.delta_min = delta_min;
    c.delta_max = delta_max;
    c.base = cfg;
    if (!plan_text.empty()) c.base.gait_plan = parse_plan(plan_text);
    return c;
  }
};

struct TrainFlags {
  TrainConfig cfg;
  std::string gait_text = "trot";

  void attach(CLI::App* app) {
    app->add_option("--gait", gait_text, "gait to train on");
    app->add_option("--epochs", cfg.epochs, "maximum training epochs");
    app->add_option("--batch", cfg.batch_size, "batch size");
    app->add_option("--lr", cfg.initial_lr, "initial learning rate");
    app->add_option("--conv1", cfg.arch.conv1_filters, "conv1 filter count");
    app->add_option("--conv2", cfg.arch.conv2_filters, "conv2 filter count");
    app->add_option("--kernel", cfg.arch.kernel_size, "conv kernel size");
    app->add_option("--dense", cfg.arch.dense_units, "dense layer width");
    app->add_option("--dropout", cfg.arch.dropout_rate, "dropout rate");
  }

  TrainConfig resolve(uint64_t seed) const {
    TrainConfig c = cfg;
    c.gait = parse_gait_flag(gait_text);
    c.seed = seed;
    return c;
  }
};

int run(int argc, char** argv) {
  CLI::App app{"single-IMU equine lameness detection pipeline"};
  app.require_subcommand(1);
  app.fallthrough();
  // key=value config file, keys namespaced by subcommand
  // (e.g. pipeline.epochs=60); explicit flags always win
  app.set_config("--config", "",
                 "key=value config file (keys like <subcommand>.<flag>); "
                 "flags win");

  uint64_t seed = 42;
  int threads = 0;
  app.add_option("--seed", seed, "master seed")->capture_default_str();
  app.add_option("--threads", threads, "OpenMP thread count (0 = default)");

  std::string out_path, data_dir, manifest_path, split_path, checkpoint_path;
  std::string session_path, log_path, pr_path, fractions_text = "0.6,0.2,0.2";

  SegFlags seg;
  SynthFlags synth;
  TrainFlags train;

  auto* cmd_synth = app.add_subcommand("synth", "generate a labeled corpus");
  cmd_synth->add_option("--out", out_path, "output directory")->required();
  synth.attach(cmd_synth);

  auto* cmd_ingest = app.add_subcommand("ingest", "validate session files");
  cmd_ingest->add_option("--data", data_dir, "session directory")->required();
  cmd_ingest->add_option("--manifest", manifest_path, "channel manifest");

  auto* cmd_segment =
      app.add_subcommand("segment", "detect strides and write the index");
  cmd_segment->add_option("--data", data_dir, "session directory")->required();
  cmd_segment->add_option("--manifest", manifest_path, "channel manifest");
  cmd_segment->add_option("--out", out_path, "output directory")->required();
  seg.attach(cmd_segment);

  auto* cmd_split =
      app.add_subcommand("split", "session-level stratified split");
  cmd_split->add_option("--data", data_dir, "session directory")->required();
  cmd_split->add_option("--manifest", manifest_path, "channel manifest");
  cmd_split->add_option("--out", out_path, "split file path")->required();
  cmd_split->add_option("--fractions", fractions_text,
                        "train,validation,test fractions");
  seg.attach(cmd_split);

  auto* cmd_train = app.add_subcommand("train", "train the stride classifier");
  cmd_train->add_option("--data", data_dir, "session directory")->required();
  cmd_train->add_option("--manifest", manifest_path, "channel manifest");
  cmd_train->add_option("--split", split_path, "split file")->required();
  cmd_train->add_option("--out", checkpoint_path, "checkpoint path")->required();
  cmd_train->add_option("--log", log_path, "train log csv path");
  seg.attach(cmd_train);
  train.attach(cmd_train);

  auto* cmd_calibrate =
      app.add_subcommand("calibrate", "select decision thresholds");
  cmd_calibrate->add_option("--data", data_dir, "session directory")->required();
  cmd_calibrate->add_option("--manifest", manifest_path, "channel manifest");
  cmd_calibrate->add_option("--split", split_path, "split file")->required();
  cmd_calibrate->add_option("--checkpoint", checkpoint_path, "checkpoint")
      ->required();
  cmd_calibrate->add_option("--pr-out", pr_path, "validation pr curve csv");
  seg.attach(cmd_calibrate);

  auto* cmd_evaluate = app.add_subcommand("evaluate", "test-split report");
  cmd_evaluate->add_option("--data", data_dir, "session directory")->required();
  cmd_evaluate->add_option("--manifest", manifest_path, "channel manifest");
  cmd_evaluate->add_option("--split", split_path, "split file")->required();
  cmd_evaluate->add_option("--checkpoint", checkpoint_path, "checkpoint")
      ->required();
  cmd_evaluate->add_option("--out", out_path, "report directory")->required();
  seg.attach(cmd_evaluate);

  auto* cmd_predict =
      app.add_subcommand("predict", "single-session verdict (exit 0/2/3)");
  cmd_predict->add_option("--session", session_path, "session file")->required();
  cmd_predict->add_option("--checkpoint", checkpoint_path, "checkpoint")
      ->required();
  cmd_predict->add_option("--manifest", manifest_path, "channel manifest")
      ->required();
  seg.attach(cmd_predict);

  auto* cmd_pipeline =
      app.add_subcommand("pipeline", "synth through evaluate from one seed");
  cmd_pipeline->add_option("--out", out_path, "output directory")->required();
  synth.attach(cmd_pipeline);
  seg.attach(cmd_pipeline);
  train.attach(cmd_pipeline);

  CLI11_PARSE(app, argc, argv);

#ifdef _OPENMP
  if (threads > 0) omp_set_num_threads(threads);
#endif

  auto default_manifest = [&]() {
    return manifest_path.empty()
               ? (std::filesystem::path(data_dir) / "manifest.txt").string()
               : manifest_path;
  };

  if (cmd_synth->parsed()) {
    auto entries = generate_corpus(synth.corpus(seed), out_path);
    std::cout << "wrote " << entries.size() << " sessions to " << out_path
              << "\n";
    return 0;
  }

  if (cmd_ingest->parsed()) {
    const auto manifest = load_manifest(default_manifest());
    long total_samples = 0;
    auto files = list_session_files(data_dir);
    for (const auto& path : files) {
      auto s = load_session_file(path, manifest);
      total_samples += s.samples;
      std::printf("%-12s horse=%-10s label=%-8s samples=%-7d duration=%.1fs\n",
                  s.session_id.c_str(), s.horse_id.c_str(),
                  to_string(s.label), s.samples,
                  s.samples / static_cast<double>(s.sample_rate_hz));
    }
    std::printf("%zu sessions, %ld samples total\n", files.size(),
                total_samples);
    return 0;
  }

  if (cmd_segment->parsed()) {
    std::filesystem::create_directories(out_path);
    auto filtered = segment_directory(data_dir, default_manifest(), seg.cfg);
    write_stride_index(filtered.kept,
                       std::filesystem::path(out_path) / "strides.csv");
    write_stride_stats(filtered.kept,
                       std::filesystem::path(out_path) / "stride_stats.csv");
    std::cout << "kept " << filtered.kept.size() << " sessions, excluded "
              << filtered.excluded.size() << " (below "
              << seg.cfg.min_trot_strides_per_session << " trot strides)\n";
    for (const auto& e : filtered.excluded)
      std::cout << "  excluded " << e.session_id << " ("
                << e.count_of(Gait::Trot) << " trot strides)\n";
    return 0;
  }

  if (cmd_split->parsed()) {
    SplitFractions fractions;
    if (std::sscanf(fractions_text.c_str(), "%lf,%lf,%lf", &fractions.train,
                    &fractions.validation, &fractions.test) != 3)
      throw Error("--fractions must look like 0.6,0.2,0.2");
    auto filtered = segment_directory(data_dir, default_manifest(), seg.cfg);
    std::vector<std::pair<std::string, SessionLabel>> ids;
    for (const auto& s : filtered.kept) ids.emplace_back(s.session_id, s.label);
    auto split = split_labeled_ids(ids, fractions, seed);
    save_split(split, out_path);
    std::cout << "split " << ids.size() << " sessions (excluded "
              << filtered.excluded.size() << ") -> " << out_path << "\n";
    return 0;
  }

  if (cmd_train->parsed()) {
    auto filtered = segment_directory(data_dir, default_manifest(), seg.cfg);
    auto split = load_split(split_path);
    TrainConfig cfg = train.resolve(seed);
    auto bundle = build_datasets(filtered.kept, split, cfg.gait);
    auto [model, log] = train_model(bundle, cfg);
    nn::save_checkpoint(model, checkpoint_path);
    if (!log_path.empty()) save_train_log(log, log_path);
    std::cout << "checkpoint written to " << checkpoint_path << " ("
              << log.epochs.size() << " epochs, best val loss "
              << [&] {
                   double best = log.epochs.front().val_loss;
                   for (const auto& e : log.epochs)
                     best = std::min(best, e.val_loss);
                   return best;
                 }()
              << ")\n";
    return 0;
  }

  if (cmd_calibrate->parsed()) {
    auto filtered = segment_directory(data_dir, default_manifest(), seg.cfg);
    auto split = load_split(split_path);
    auto model = nn::load_checkpoint(checkpoint_path);
    auto calibration = calibrate_model(model, filtered.kept, split);
    nn::save_checkpoint(model, checkpoint_path);
    if (!pr_path.empty()) {
      std::ofstream pr(pr_path, std::ios::binary);
      pr << "threshold,precision,recall,f1\n";
      char line[128];
      for (const auto& p : calibration.stride.curve) {
        std::snprintf(line, sizeof(line), "%.9f,%.6f,%.6f,%.6f\n", p.threshold,
                      p.precision, p.recall, p.f1);
        pr << line;
      }
    }
    std::printf("stride_threshold=%.9f (f1=%.4f) session_threshold=%.9f "
                "(f1=%.4f)\n",
                calibration.stride.threshold, calibration.stride.f1,
                calibration.session.threshold, calibration.session.f1);
    return 0;
  }

  if (cmd_evaluate->parsed()) {
    auto filtered = segment_directory(data_dir, default_manifest(), seg.cfg);
    auto split = load_split(split_path);
    auto model = nn::load_checkpoint(checkpoint_path);
    auto report = evaluate_model(model, filtered.kept, split);
    report.seed = split.seed;
    write_report_files(report, out_path);
    std::cout << report_summary_text(report);
    return 0;
  }

  if (cmd_predict->parsed()) {
    auto result = predict_session(session_path, checkpoint_path,
                                  manifest_path, seg.cfg);
    std::cout << result.message << "\n";
    return result.exit_code;
  }

  if (cmd_pipeline->parsed()) {
    PipelineConfig cfg;
    cfg.out_dir = out_path;
    cfg.seed = seed;
    cfg.n_sound = synth.n_sound;
    cfg.n_lame = synth.n_lame;
    cfg.delta_min = synth.delta_min;
    cfg.delta_max = synth.delta_max;
    cfg.synth = synth.cfg;
    if (!synth.plan_text.empty())
      cfg.synth.gait_plan = parse_plan(synth.plan_text);
    cfg.seg = seg.cfg;
    cfg.train = train.resolve(seed);
    auto result = run_pipeline(cfg);
    std::cout << report_summary_text(result.report);
    std::cout << "artifacts under " << out_path << "\n";
    return 0;
  }

  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run(argc, argv);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
