#pragma once

#include <cstdint>
#include <vector>

#include "gait/nn/tensor.hpp"
#include "gait/rng.hpp"
#include "gait/types.hpp"

namespace gait::nn {

enum class RunMode { Train, Infer };

struct Conv1d {
  int in_channels = 0;
  int filters = 0;
  int ksize = 5;
  std::vector<double> w;   // [filters][in_channels][ksize]
  std::vector<double> b;   // [filters]
  std::vector<double> dw, db;

  Conv1d() = default;
  Conv1d(int in_ch, int out_ch, int k);

  void forward(const Tensor3& x, Tensor3& y, bool cache);
  void backward(const Tensor3& dy, Tensor3& dx, bool need_dx = true);

 private:
  Tensor3 x_cache_;
};

struct BatchNorm1d {
  int channels = 0;
  double eps = 1e-5;
  double momentum = 0.1;
  std::vector<double> gamma, beta;
  std::vector<double> running_mean, running_var;
  std::vector<double> dgamma, dbeta;

  BatchNorm1d() = default;
  explicit BatchNorm1d(int ch);

  // Train: batch statistics over (batch, length), running stats updated
  // with exponential momentum. Infer: running statistics. Train requires
  // batch*length > 1.
  void forward(const Tensor3& x, Tensor3& y, RunMode mode, bool cache);
  void backward(const Tensor3& dy, Tensor3& dx);

 private:
  Tensor3 xhat_;
  std::vector<double> inv_std_;
};

struct Relu {
  void forward(const Tensor3& x, Tensor3& y, bool cache);
  void backward(const Tensor3& dy, Tensor3& dx);

 private:
  Tensor3 y_cache_;
};

// Non-overlapping window max; an odd tail element passes through.
struct MaxPool1d {
  int width = 2;

  void forward(const Tensor3& x, Tensor3& y, bool cache);
  void backward(const Tensor3& dy, Tensor3& dx);

  static int out_len(int in_len, int width) {
    return (in_len + width - 1) / width;
  }

 private:
  std::vector<int> argmax_;  // absolute input index per output element
  int in_len_ = 0;
  int in_batch_ = 0, in_channels_ = 0;
};

// Inverted dropout: kept units scaled by 1/(1-rate) at train time,
// identity at inference.
struct Dropout {
  double rate = 0.3;

  void forward(const Tensor3& x, Tensor3& y, RunMode mode, Rng* rng,
               bool cache);
  void backward(const Tensor3& dy, Tensor3& dx);

 private:
  std::vector<uint8_t> keep_;
  double fwd_scale_ = 1.0;
  int b_ = 0, c_ = 0, l_ = 0;
};

// Re-asserts the mask between stages: zeroes positions at or beyond each
// element's valid length so padding garbage from conv edge effects cannot
// leak back into valid positions downstream. Backward zeroes the same
// positions of the gradient.
struct ZeroTail {
  void forward(Tensor3& x, const std::vector<int>& valid_len);
  void backward(Tensor3& dx) const;

 private:
  std::vector<int> valid_cache_;
};

// Per-feature mean over valid positions only; valid_len holds the number
// of leading valid positions per batch element at this resolution.
struct MaskedGap {
  void forward(const Tensor3& x, const std::vector<int>& valid_len, Matrix& y,
               bool cache);
  void backward(const Matrix& dy, Tensor3& dx);

 private:
  std::vector<int> valid_cache_;
  int b_ = 0, c_ = 0, l_ = 0;
};

struct Dense {
  int in_features = 0;
  int out_features = 0;
  std::vector<double> w;  // [out][in]
  std::vector<double> b;  // [out]
  std::vector<double> dw, db;

  Dense() = default;
  Dense(int in_f, int out_f);

  void forward(const Matrix& x, Matrix& y, bool cache);
  void backward(const Matrix& dy, Matrix& dx);

 private:
  Matrix x_cache_;
};

struct ReluVec {
  void forward(const Matrix& x, Matrix& y, bool cache);
  void backward(const Matrix& dy, Matrix& dx);

 private:
  Matrix y_cache_;
};

double sigmoid(double z);

}  // namespace gait::nn
