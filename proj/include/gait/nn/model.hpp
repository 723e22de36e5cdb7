#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "gait/nn/layers.hpp"
#include "gait/nn/tensor.hpp"
#include "gait/rng.hpp"
#include "gait/types.hpp"

namespace gait::nn {

struct ModelConfig {
  int in_channels = kNumChannels;
  int conv1_filters = 32;
  int conv2_filters = 64;
  int kernel_size = 5;
  int pool_width = 2;
  double dropout_rate = 0.3;
  int dense_units = 64;

  void validate() const;
};

struct TensorView {
  std::string name;
  std::vector<double>* data = nullptr;
  std::vector<uint32_t> dims;
};

// Stride classifier:
//   masked input -> conv -> bn -> relu -> maxpool -> dropout   (x2)
//   -> masked global average pool -> dense+relu -> dense -> sigmoid
// Works for any input length; valid_len carries the per-stride mask.
class GaitCnn {
 public:
  GaitCnn() : GaitCnn(ModelConfig{}) {}
  explicit GaitCnn(const ModelConfig& cfg);

  // He-uniform fan-in init for conv/dense weights, zero biases,
  // gamma=1/beta=0, running stats reset. Deterministic per seed.
  void init_params(uint64_t seed);

  // x must already be normalized with padded positions at zero. Returns
  // per-element probabilities; logits are cached for backward.
  std::vector<double> forward(const Tensor3& x, const std::vector<int>& valid_len,
                              RunMode mode, Rng* dropout_rng);

  // dlogits: dLoss/dlogit per batch element. Fills parameter gradients.
  void backward(const std::vector<double>& dlogits);

  std::vector<TensorView> learnable();
  std::vector<TensorView> gradients();
  // learnable + batchnorm running statistics; everything a checkpoint holds
  std::vector<TensorView> state_tensors();

  const ModelConfig& config() const { return cfg_; }

  // valid length after both pooling stages (a pooled position is valid iff
  // any source position is valid)
  int pooled_valid_len(int len) const;

 private:
  ModelConfig cfg_;
  Conv1d conv1_, conv2_;
  BatchNorm1d bn1_, bn2_;
  Relu relu1_, relu2_;
  MaxPool1d pool1_, pool2_;
  Dropout drop1_, drop2_;
  ZeroTail mask_in_, mask_mid_;
  MaskedGap gap_;
  Dense dense1_, dense_out_;
  ReluVec relu3_;

  // forward caches
  Tensor3 t_in_, t_a_, t_b_;
  Matrix m_a_, m_b_, m_c_;
  std::vector<int> batch_valid_;

  friend struct ModelStateAccess;
};

struct NormStats {
  std::vector<double> mean;   // per input channel
  std::vector<double> stdev;  // per input channel, > 0
};

// Everything needed to run inference: architecture, tensors, input
// normalization, calibrated thresholds, and the gait the model was
// trained on.
struct TrainedModel {
  GaitCnn net;
  NormStats norm;
  double stride_threshold = 0.5;
  double session_threshold = 0.5;
  Gait train_gait = Gait::Trot;
  int input_len = 100;  // max stride length the model was trained with
};

// z-score per channel with training-set statistics; padded positions are
// forced to zero. Writes into batch slot `slot` of x.
void normalize_stride_into(const Stride& stride, const NormStats& norm,
                           Tensor3& x, int slot);

NormStats compute_norm_stats(const std::vector<Stride>& train_strides);

}  // namespace gait::nn
