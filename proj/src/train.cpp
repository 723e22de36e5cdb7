#include "gait/train.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <numeric>

#include "gait/dataset.hpp"
#include "gait/nn/loss.hpp"
#include "gait/nn/optim.hpp"

namespace gait {

using nn::RunMode;

void TrainConfig::validate() const {
  if (epochs < 1) throw Error("epochs must be >= 1");
  if (batch_size < 2) throw Error("batch_size must be >= 2 (batchnorm)");
  if (initial_lr <= 0.0) throw Error("initial_lr must be > 0");
  arch.validate();
}

long StrideSet::count_lame() const {
  long n = 0;
  for (const auto& s : strides) n += (s.lame && *s.lame) ? 1 : 0;
  return n;
}

long StrideSet::count_sound() const {
  long n = 0;
  for (const auto& s : strides) n += (s.lame && !*s.lame) ? 1 : 0;
  return n;
}

DatasetBundle build_datasets(const std::vector<SessionStrides>& sessions,
                             const SplitAssignment& split, Gait gait) {
  DatasetBundle out;

  // Sessions sorted by id and strides by start make the result independent
  // of caller ordering.
  std::vector<const SessionStrides*> ordered;
  for (const auto& s : sessions) ordered.push_back(&s);
  std::sort(ordered.begin(), ordered.end(),
            [](const SessionStrides* a, const SessionStrides* b) {
              return a->session_id < b->session_id;
            });

  int max_len = 0;
  for (const SessionStrides* sess : ordered) {
    if (sess->label == SessionLabel::Unknown)
      throw Error("session " + sess->session_id +
                  " is unlabeled; cannot enter a training dataset");
    const Split assignment = split.at(sess->session_id);
    StrideSet* target = assignment == Split::Train        ? &out.train
                        : assignment == Split::Validation ? &out.validation
                                                          : &out.test;
    for (const auto& stride : sess->strides) {
      if (stride.gait != gait) continue;
      max_len = std::max(max_len, stride.max_len);
      target->strides.push_back(stride);
    }
  }
  out.max_stride_len = max_len > 0 ? max_len : 100;

  auto check_both_labels = [](const StrideSet& set, const char* name) {
    if (set.count_sound() == 0 || set.count_lame() == 0)
      throw Error(std::string("split '") + name +
                  "' is missing a label among its strides");
  };
  check_both_labels(out.train, "train");
  check_both_labels(out.validation, "validation");
  check_both_labels(out.test, "test");

  out.weights = compute_class_weights(out.train.strides);
  out.norm = nn::compute_norm_stats(out.train.strides);
  return out;
}

void normalize_set(const StrideSet& set, const nn::NormStats& norm,
                   int input_len, nn::Tensor3& x, std::vector<int>& valid_len,
                   std::vector<uint8_t>& labels) {
  const int n = static_cast<int>(set.size());
  x.resize(n, kNumChannels, input_len);
  valid_len.assign(n, 0);
  labels.assign(n, 0);
  for (int i = 0; i < n; ++i) {
    const Stride& s = set.strides[i];
    nn::normalize_stride_into(s, norm, x, i);
    valid_len[i] = s.valid_len;
    labels[i] = (s.lame && *s.lame) ? 1 : 0;
  }
}

namespace {

struct Snapshot {
  std::vector<std::vector<double>> tensors;
};

Snapshot take_snapshot(nn::GaitCnn& net) {
  Snapshot snap;
  for (auto& view : net.state_tensors()) snap.tensors.push_back(*view.data);
  return snap;
}

void restore_snapshot(nn::GaitCnn& net, const Snapshot& snap) {
  auto views = net.state_tensors();
  for (size_t i = 0; i < views.size(); ++i) *views[i].data = snap.tensors[i];
}

// Forward a whole set in fixed-size slices; returns per-stride
// probabilities. Infer mode, so batching does not change results.
std::vector<double> infer_probs(nn::GaitCnn& net, const nn::Tensor3& x,
                                const std::vector<int>& valid_len,
                                int batch_size) {
  std::vector<double> probs;
  probs.reserve(x.batch);
  nn::Tensor3 slice;
  for (int start = 0; start < x.batch; start += batch_size) {
    const int n = std::min(batch_size, x.batch - start);
    slice.resize(n, x.channels, x.length);
    std::copy_n(x.row(start, 0), static_cast<size_t>(n) * x.channels * x.length,
                slice.data.begin());
    std::vector<int> vl(valid_len.begin() + start, valid_len.begin() + start + n);
    auto p = net.forward(slice, vl, RunMode::Infer, nullptr);
    probs.insert(probs.end(), p.begin(), p.end());
  }
  return probs;
}

}  // namespace

std::pair<nn::TrainedModel, TrainLog> train_model(const DatasetBundle& data,
                                                  const TrainConfig& cfg) {
  cfg.validate();
  if (data.train.size() < 2) throw Error("training set too small");

  const int input_len = data.max_stride_len;

  nn::Tensor3 train_x, val_x;
  std::vector<int> train_valid, val_valid;
  std::vector<uint8_t> train_labels, val_labels;
  normalize_set(data.train, data.norm, input_len, train_x, train_valid,
                train_labels);
  normalize_set(data.validation, data.norm, input_len, val_x, val_valid,
                val_labels);

  nn::GaitCnn net(cfg.arch);
  Rng master(cfg.seed);
  net.init_params(master.derive(0).next_u64());
  Rng dropout_rng = master.derive(1);
  Rng shuffle_rng = master.derive(2);

  nn::Adam adam;
  adam.lr = cfg.initial_lr;
  nn::PlateauScheduler scheduler;
  scheduler.factor = cfg.scheduler_factor;
  scheduler.patience = cfg.scheduler_patience;
  scheduler.min_lr = cfg.scheduler_min_lr;

  const int n_train = train_x.batch;
  std::vector<int> order(n_train);
  std::iota(order.begin(), order.end(), 0);

  nn::Tensor3 batch_x;
  std::vector<int> batch_valid;
  std::vector<uint8_t> batch_labels;

  TrainLog log;
  double best_val = std::numeric_limits<double>::infinity();
  Snapshot best_snapshot = take_snapshot(net);

  for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
    const auto t0 = std::chrono::steady_clock::now();
    shuffle_rng.shuffle(order);

    double loss_sum = 0.0;
    long loss_batches = 0;
    for (int start = 0; start < n_train; start += cfg.batch_size) {
      int n = std::min(cfg.batch_size, n_train - start);
      if (n < 2) break;  // batchnorm cannot train on a single stride
      batch_x.resize(n, kNumChannels, input_len);
      batch_valid.assign(n, 0);
      batch_labels.assign(n, 0);
      for (int i = 0; i < n; ++i) {
        const int src = order[start + i];
        std::copy_n(train_x.row(src, 0),
                    static_cast<size_t>(kNumChannels) * input_len,
                    batch_x.row(i, 0));
        batch_valid[i] = train_valid[src];
        batch_labels[i] = train_labels[src];
      }

      auto probs = net.forward(batch_x, batch_valid, RunMode::Train,
                               &dropout_rng);
      auto bce = nn::weighted_bce(probs, batch_labels, data.weights);
      if (!std::isfinite(bce.loss))
        throw Error("training aborted: non-finite loss at epoch " +
                    std::to_string(epoch));
      net.backward(bce.dlogits);
      adam.step(net.learnable(), net.gradients());
      loss_sum += bce.loss;
      ++loss_batches;
    }

    // Unweighted validation loss drives the scheduler and model selection.
    auto val_probs = infer_probs(net, val_x, val_valid, cfg.batch_size);
    auto val_bce = nn::weighted_bce(val_probs, val_labels, ClassWeights::unit());
    long correct = 0;
    for (size_t i = 0; i < val_probs.size(); ++i)
      correct += ((val_probs[i] >= 0.5) == (val_labels[i] != 0)) ? 1 : 0;

    if (val_bce.loss < best_val) {
      best_val = val_bce.loss;
      best_snapshot = take_snapshot(net);
    }
    adam.lr = scheduler.step(val_bce.loss, adam.lr);

    EpochStats row;
    row.epoch = epoch;
    row.train_loss = loss_batches ? loss_sum / loss_batches : 0.0;
    row.val_loss = val_bce.loss;
    row.val_accuracy = static_cast<double>(correct) / val_probs.size();
    row.lr = adam.lr;
    row.wall_clock_s =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
            .count();
    log.epochs.push_back(row);
  }

  restore_snapshot(net, best_snapshot);

  nn::TrainedModel model;
  model.net = std::move(net);
  model.norm = data.norm;
  model.stride_threshold = 0.5;
  model.session_threshold = 0.5;
  model.train_gait = cfg.gait;
  model.input_len = input_len;
  return {std::move(model), std::move(log)};
}

void save_train_log(const TrainLog& log, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write train log " + path.string());
  out << "epoch,train_loss,val_loss,val_accuracy,lr,wall_clock_s\n";
  char line[256];
  for (const auto& e : log.epochs) {
    std::snprintf(line, sizeof(line), "%d,%.9f,%.9f,%.6f,%.9g,%.3f\n", e.epoch,
                  e.train_loss, e.val_loss, e.val_accuracy, e.lr,
                  e.wall_clock_s);
    out << line;
  }
}

}  // namespace gait
