#pragma once

#include <filesystem>
#include <vector>

#include "gait/nn/model.hpp"
#include "gait/segmentation.hpp"
#include "gait/types.hpp"

namespace gait {

struct TrainConfig {
  Gait gait = Gait::Trot;
  int epochs = 100;
  int batch_size = 64;
  double initial_lr = 1e-3;
  uint64_t seed = 42;
  nn::ModelConfig arch;
  double scheduler_factor = 0.5;
  int scheduler_patience = 3;
  double scheduler_min_lr = 1e-6;

  void validate() const;
};

// Model-ready stride collection; raw (un-normalized) channel data.
struct StrideSet {
  std::vector<Stride> strides;

  size_t size() const { return strides.size(); }
  long count_lame() const;
  long count_sound() const;
};

struct DatasetBundle {
  StrideSet train, validation, test;
  ClassWeights weights;      // from training strides only
  nn::NormStats norm;        // from training strides only (valid positions)
  int max_stride_len = 100;
};

// Filters to the requested gait, groups by split, computes class weights
// and normalization statistics on the training portion. Strides of one
// session never cross splits; every split must contain both labels.
DatasetBundle build_datasets(const std::vector<SessionStrides>& sessions,
                             const SplitAssignment& split, Gait gait);

struct EpochStats {
  int epoch = 0;
  double train_loss = 0.0;
  double val_loss = 0.0;
  double val_accuracy = 0.0;
  double lr = 0.0;
  double wall_clock_s = 0.0;
};

struct TrainLog {
  std::vector<EpochStats> epochs;
};

void save_train_log(const TrainLog& log, const std::filesystem::path& path);

// Seeded epoch shuffles, class-weighted BCE, Adam, plateau scheduler on the
// (unweighted) validation loss, and best-validation-loss checkpointing.
// The returned model carries the dataset normalization stats and default
// 0.5 thresholds; calibration sets the real ones.
std::pair<nn::TrainedModel, TrainLog> train_model(const DatasetBundle& data,
                                                  const TrainConfig& cfg);

// Normalize a whole stride set into one tensor (batch = set size).
void normalize_set(const StrideSet& set, const nn::NormStats& norm,
                   int input_len, nn::Tensor3& x, std::vector<int>& valid_len,
                   std::vector<uint8_t>& labels);

}  // namespace gait
