#include "gait/nn/model.hpp"

#include <algorithm>
#include <cmath>

namespace gait::nn {

void ModelConfig::validate() const {
  if (in_channels < 1 || conv1_filters < 1 || conv2_filters < 1 ||
      dense_units < 1)
    throw Error("model config: sizes must be positive");
  if (kernel_size < 1 || kernel_size % 2 == 0)
    throw Error("model config: kernel size must be odd");
  if (pool_width < 1) throw Error("model config: pool width must be >= 1");
  if (dropout_rate < 0.0 || dropout_rate >= 1.0)
    throw Error("model config: dropout rate must be in [0,1)");
}

GaitCnn::GaitCnn(const ModelConfig& cfg) : cfg_(cfg) {
  cfg_.validate();
  conv1_ = Conv1d(cfg.in_channels, cfg.conv1_filters, cfg.kernel_size);
  bn1_ = BatchNorm1d(cfg.conv1_filters);
  conv2_ = Conv1d(cfg.conv1_filters, cfg.conv2_filters, cfg.kernel_size);
  bn2_ = BatchNorm1d(cfg.conv2_filters);
  pool1_.width = cfg.pool_width;
  pool2_.width = cfg.pool_width;
  drop1_.rate = cfg.dropout_rate;
  drop2_.rate = cfg.dropout_rate;
  dense1_ = Dense(cfg.conv2_filters, cfg.dense_units);
  dense_out_ = Dense(cfg.dense_units, 1);
}

void GaitCnn::init_params(uint64_t seed) {
  Rng rng(seed);
  auto he_uniform = [&](std::vector<double>& w, int fan_in) {
    const double bound = std::sqrt(6.0 / fan_in);
    for (auto& v : w) v = rng.uniform(-bound, bound);
  };
  he_uniform(conv1_.w, cfg_.in_channels * cfg_.kernel_size);
  he_uniform(conv2_.w, cfg_.conv1_filters * cfg_.kernel_size);
  he_uniform(dense1_.w, cfg_.conv2_filters);
  he_uniform(dense_out_.w, cfg_.dense_units);
  std::fill(conv1_.b.begin(), conv1_.b.end(), 0.0);
  std::fill(conv2_.b.begin(), conv2_.b.end(), 0.0);
  std::fill(dense1_.b.begin(), dense1_.b.end(), 0.0);
  std::fill(dense_out_.b.begin(), dense_out_.b.end(), 0.0);
  for (auto* bn : {&bn1_, &bn2_}) {
    std::fill(bn->gamma.begin(), bn->gamma.end(), 1.0);
    std::fill(bn->beta.begin(), bn->beta.end(), 0.0);
    std::fill(bn->running_mean.begin(), bn->running_mean.end(), 0.0);
    std::fill(bn->running_var.begin(), bn->running_var.end(), 1.0);
  }
}

int GaitCnn::pooled_valid_len(int len) const {
  const int once = MaxPool1d::out_len(len, cfg_.pool_width);
  return MaxPool1d::out_len(once, cfg_.pool_width);
}

std::vector<double> GaitCnn::forward(const Tensor3& x,
                                     const std::vector<int>& valid_len,
                                     RunMode mode, Rng* dropout_rng) {
  if (x.channels != cfg_.in_channels) throw Error("model: channel mismatch");
  if (static_cast<int>(valid_len.size()) != x.batch)
    throw Error("model: valid_len size mismatch");
  const bool cache = (mode == RunMode::Train);

  // Masking: zero the padded tail at the input, and again at the pooled
  // resolution before the second conv so edge spill from the first block
  // cannot leak back into valid positions. The masked GAP then keeps
  // padding out of the decision entirely.
  t_in_ = x;
  mask_in_.forward(t_in_, valid_len);
  conv1_.forward(t_in_, t_a_, cache);
  bn1_.forward(t_a_, t_b_, mode, cache);
  relu1_.forward(t_b_, t_a_, cache);
  pool1_.forward(t_a_, t_b_, /*cache=*/true);
  drop1_.forward(t_b_, t_a_, mode, dropout_rng, cache);

  std::vector<int> mid_valid(x.batch);
  for (int b = 0; b < x.batch; ++b)
    mid_valid[b] = MaxPool1d::out_len(
        std::min(valid_len[b], x.length), cfg_.pool_width);
  mask_mid_.forward(t_a_, mid_valid);

  conv2_.forward(t_a_, t_b_, cache);
  bn2_.forward(t_b_, t_a_, mode, cache);
  relu2_.forward(t_a_, t_b_, cache);
  pool2_.forward(t_b_, t_a_, /*cache=*/true);
  drop2_.forward(t_a_, t_b_, mode, dropout_rng, cache);

  batch_valid_.assign(x.batch, 0);
  for (int b = 0; b < x.batch; ++b)
    batch_valid_[b] = pooled_valid_len(std::min(valid_len[b], x.length));

  gap_.forward(t_b_, batch_valid_, m_a_, /*cache=*/true);
  dense1_.forward(m_a_, m_b_, cache);
  relu3_.forward(m_b_, m_c_, cache);
  dense_out_.forward(m_c_, m_a_, cache);

  std::vector<double> probs(x.batch);
  for (int b = 0; b < x.batch; ++b) probs[b] = sigmoid(m_a_.at(b, 0));
  return probs;
}

void GaitCnn::backward(const std::vector<double>& dlogits) {
  Matrix dm(static_cast<int>(dlogits.size()), 1);
  for (size_t b = 0; b < dlogits.size(); ++b) dm.at(static_cast<int>(b), 0) = dlogits[b];

  Matrix dm2, dm3;
  dense_out_.backward(dm, dm2);
  relu3_.backward(dm2, dm3);
  dense1_.backward(dm3, dm2);

  Tensor3 dt1, dt2;
  gap_.backward(dm2, dt1);
  drop2_.backward(dt1, dt2);
  pool2_.backward(dt2, dt1);
  relu2_.backward(dt1, dt2);
  bn2_.backward(dt2, dt1);
  conv2_.backward(dt1, dt2);
  mask_mid_.backward(dt2);
  drop1_.backward(dt2, dt1);
  pool1_.backward(dt1, dt2);
  relu1_.backward(dt2, dt1);
  bn1_.backward(dt1, dt2);
  conv1_.backward(dt2, dt1, /*need_dx=*/false);  // input gradient unused
}

std::vector<TensorView> GaitCnn::learnable() {
  auto u32 = [](int v) { return static_cast<uint32_t>(v); };
  return {
      {"conv1.w", &conv1_.w,
       {u32(cfg_.conv1_filters), u32(cfg_.in_channels), u32(cfg_.kernel_size)}},
      {"conv1.b", &conv1_.b, {u32(cfg_.conv1_filters)}},
      {"bn1.gamma", &bn1_.gamma, {u32(cfg_.conv1_filters)}},
      {"bn1.beta", &bn1_.beta, {u32(cfg_.conv1_filters)}},
      {"conv2.w", &conv2_.w,
       {u32(cfg_.conv2_filters), u32(cfg_.conv1_filters), u32(cfg_.kernel_size)}},
      {"conv2.b", &conv2_.b, {u32(cfg_.conv2_filters)}},
      {"bn2.gamma", &bn2_.gamma, {u32(cfg_.conv2_filters)}},
      {"bn2.beta", &bn2_.beta, {u32(cfg_.conv2_filters)}},
      {"dense1.w", &dense1_.w, {u32(cfg_.dense_units), u32(cfg_.conv2_filters)}},
      {"dense1.b", &dense1_.b, {u32(cfg_.dense_units)}},
      {"dense_out.w", &dense_out_.w, {1u, u32(cfg_.dense_units)}},
      {"dense_out.b", &dense_out_.b, {1u}},
  };
}

std::vector<TensorView> GaitCnn::gradients() {
  auto views = learnable();
  std::vector<std::vector<double>*> grads = {
      &conv1_.dw, &conv1_.db, &bn1_.dgamma, &bn1_.dbeta,
      &conv2_.dw, &conv2_.db, &bn2_.dgamma, &bn2_.dbeta,
      &dense1_.dw, &dense1_.db, &dense_out_.dw, &dense_out_.db,
  };
  for (size_t i = 0; i < views.size(); ++i) views[i].data = grads[i];
  return views;
}

std::vector<TensorView> GaitCnn::state_tensors() {
  auto u32 = [](int v) { return static_cast<uint32_t>(v); };
  auto views = learnable();
  views.push_back({"bn1.running_mean", &bn1_.running_mean, {u32(cfg_.conv1_filters)}});
  views.push_back({"bn1.running_var", &bn1_.running_var, {u32(cfg_.conv1_filters)}});
  views.push_back({"bn2.running_mean", &bn2_.running_mean, {u32(cfg_.conv2_filters)}});
  views.push_back({"bn2.running_var", &bn2_.running_var, {u32(cfg_.conv2_filters)}});
  return views;
}

void normalize_stride_into(const Stride& stride, const NormStats& norm,
                           Tensor3& x, int slot) {
  if (x.channels != kNumChannels || x.length < stride.max_len)
    throw Error("normalize: tensor shape mismatch");
  for (int c = 0; c < kNumChannels; ++c) {
    double* out = x.row(slot, c);
    for (int i = 0; i < stride.valid_len; ++i)
      out[i] = (stride.at(c, i) - norm.mean[c]) / norm.stdev[c];
    for (int i = stride.valid_len; i < x.length; ++i) out[i] = 0.0;
  }
}

NormStats compute_norm_stats(const std::vector<Stride>& train_strides) {
  if (train_strides.empty())
    throw Error("normalization stats need at least one stride");
  NormStats stats;
  stats.mean.assign(kNumChannels, 0.0);
  stats.stdev.assign(kNumChannels, 0.0);
  long count = 0;
  for (const auto& s : train_strides) count += s.valid_len;
  for (int c = 0; c < kNumChannels; ++c) {
    double m = 0.0;
    for (const auto& s : train_strides)
      for (int i = 0; i < s.valid_len; ++i) m += s.at(c, i);
    m /= count;
    double v = 0.0;
    for (const auto& s : train_strides)
      for (int i = 0; i < s.valid_len; ++i)
        v += (s.at(c, i) - m) * (s.at(c, i) - m);
    v /= count;
    if (v <= 1e-24)
      throw Error("channel " + std::to_string(c) +
                  " has zero variance on the training set");
    stats.mean[c] = m;
    stats.stdev[c] = std::sqrt(v);
  }
  return stats;
}

}  // namespace gait::nn
