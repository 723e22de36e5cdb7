#include "gait/nn/layers.hpp"

#include <algorithm>
#include <cmath>

#include "gait/nn/kernels.hpp"

namespace gait::nn {

// ---------------------------------------------------------------------------
// Conv1d
// ---------------------------------------------------------------------------

Conv1d::Conv1d(int in_ch, int out_ch, int k)
    : in_channels(in_ch), filters(out_ch), ksize(k),
      w(static_cast<size_t>(out_ch) * in_ch * k, 0.0), b(out_ch, 0.0),
      dw(w.size(), 0.0), db(b.size(), 0.0) {
  if (k < 1 || k % 2 == 0) throw Error("conv kernel size must be odd");
}

void Conv1d::forward(const Tensor3& x, Tensor3& y, bool cache) {
  if (x.channels != in_channels) throw Error("conv1d: channel mismatch");
  conv1d_forward(x, w, b, filters, ksize, y);
  if (cache) x_cache_ = x;
}

void Conv1d::backward(const Tensor3& dy, Tensor3& dx, bool need_dx) {
  conv1d_backward_filters(x_cache_, dy, ksize, dw, db);
  if (need_dx) conv1d_backward_data(dy, w, in_channels, ksize, dx);
}

// ---------------------------------------------------------------------------
// BatchNorm1d
// ---------------------------------------------------------------------------

BatchNorm1d::BatchNorm1d(int ch)
    : channels(ch), gamma(ch, 1.0), beta(ch, 0.0), running_mean(ch, 0.0),
      running_var(ch, 1.0), dgamma(ch, 0.0), dbeta(ch, 0.0) {}

void BatchNorm1d::forward(const Tensor3& x, Tensor3& y, RunMode mode,
                          bool cache) {
  if (x.channels != channels) throw Error("batchnorm: channel mismatch");
  inv_std_.assign(channels, 0.0);
  if (mode == RunMode::Train) {
    if (static_cast<long>(x.batch) * x.length < 2)
      throw Error("batchnorm train mode needs batch*length > 1");
    std::vector<double> mean(channels), var(channels);
    bn_batch_stats(x, mean, var);
    for (int c = 0; c < channels; ++c) {
      inv_std_[c] = 1.0 / std::sqrt(var[c] + eps);
      running_mean[c] = (1.0 - momentum) * running_mean[c] + momentum * mean[c];
      running_var[c] = (1.0 - momentum) * running_var[c] + momentum * var[c];
    }
    bn_apply(x, mean, inv_std_, gamma, beta, cache ? &xhat_ : nullptr, y);
  } else {
    for (int c = 0; c < channels; ++c)
      inv_std_[c] = 1.0 / std::sqrt(running_var[c] + eps);
    bn_apply(x, running_mean, inv_std_, gamma, beta, cache ? &xhat_ : nullptr,
             y);
  }
}

void BatchNorm1d::backward(const Tensor3& dy, Tensor3& dx) {
  bn_backward(dy, xhat_, gamma, inv_std_, dx, dgamma, dbeta);
}

// ---------------------------------------------------------------------------
// Relu
// ---------------------------------------------------------------------------

void Relu::forward(const Tensor3& x, Tensor3& y, bool cache) {
  y.resize(x.batch, x.channels, x.length);
  const size_t n = x.size();
#pragma omp parallel for schedule(static)
  for (long i = 0; i < static_cast<long>(n); ++i)
    y.data[i] = x.data[i] > 0.0 ? x.data[i] : 0.0;
  if (cache) y_cache_ = y;
}

void Relu::backward(const Tensor3& dy, Tensor3& dx) {
  dx.resize(dy.batch, dy.channels, dy.length);
  const size_t n = dy.size();
#pragma omp parallel for schedule(static)
  for (long i = 0; i < static_cast<long>(n); ++i)
    dx.data[i] = y_cache_.data[i] > 0.0 ? dy.data[i] : 0.0;
}

// ---------------------------------------------------------------------------
// MaxPool1d
// ---------------------------------------------------------------------------

void MaxPool1d::forward(const Tensor3& x, Tensor3& y, bool cache) {
  const int B = x.batch, C = x.channels, L = x.length;
  const int out = out_len(L, width);
  y.resize(B, C, out);
  if (cache) {
    argmax_.assign(static_cast<size_t>(B) * C * out, 0);
    in_len_ = L;
    in_batch_ = B;
    in_channels_ = C;
  }
#pragma omp parallel for collapse(2) schedule(static)
  for (int b = 0; b < B; ++b) {
    for (int c = 0; c < C; ++c) {
      const double* in = x.row(b, c);
      double* o = y.row(b, c);
      int* am = cache ? &argmax_[(static_cast<size_t>(b) * C + c) * out]
                      : nullptr;
      for (int j = 0; j < out; ++j) {
        const int lo = j * width;
        const int hi = std::min(lo + width, L);
        int best = lo;
        for (int i = lo + 1; i < hi; ++i)
          if (in[i] > in[best]) best = i;  // ties keep the first position
        o[j] = in[best];
        if (am) am[j] = best;
      }
    }
  }
}

void MaxPool1d::backward(const Tensor3& dy, Tensor3& dx) {
  const int B = dy.batch, C = dy.channels, out = dy.length;
  dx.resize(in_batch_, in_channels_, in_len_);
#pragma omp parallel for collapse(2) schedule(static)
  for (int b = 0; b < B; ++b) {
    for (int c = 0; c < C; ++c) {
      const double* g = dy.row(b, c);
      double* o = dx.row(b, c);
      const int* am = &argmax_[(static_cast<size_t>(b) * C + c) * out];
      for (int j = 0; j < out; ++j) o[am[j]] += g[j];
    }
  }
}

// ---------------------------------------------------------------------------
// Dropout
// ---------------------------------------------------------------------------

void Dropout::forward(const Tensor3& x, Tensor3& y, RunMode mode, Rng* rng,
                      bool cache) {
  if (rate < 0.0 || rate >= 1.0) throw Error("dropout rate must be in [0,1)");
  y.resize(x.batch, x.channels, x.length);
  const size_t n = x.size();
  b_ = x.batch; c_ = x.channels; l_ = x.length;
  if (mode == RunMode::Infer || rate == 0.0) {
    y.data = x.data;
    fwd_scale_ = 1.0;
    if (cache) keep_.assign(n, 1);
    return;
  }
  if (!rng) throw Error("dropout train mode needs an rng");
  fwd_scale_ = 1.0 / (1.0 - rate);
  keep_.assign(n, 1);
  // Mask draws are sequential for reproducibility; the apply loop is not.
  for (size_t i = 0; i < n; ++i) keep_[i] = rng->uniform() >= rate ? 1 : 0;
#pragma omp parallel for schedule(static)
  for (long i = 0; i < static_cast<long>(n); ++i)
    y.data[i] = keep_[i] ? x.data[i] * fwd_scale_ : 0.0;
  if (!cache) keep_.clear();
}

void Dropout::backward(const Tensor3& dy, Tensor3& dx) {
  dx.resize(b_, c_, l_);
  const size_t n = dy.size();
#pragma omp parallel for schedule(static)
  for (long i = 0; i < static_cast<long>(n); ++i)
    dx.data[i] = keep_[i] ? dy.data[i] * fwd_scale_ : 0.0;
}

// ---------------------------------------------------------------------------
// ZeroTail
// ---------------------------------------------------------------------------

void ZeroTail::forward(Tensor3& x, const std::vector<int>& valid_len) {
  if (static_cast<int>(valid_len.size()) != x.batch)
    throw Error("zero tail: valid_len size mismatch");
  valid_cache_ = valid_len;
#pragma omp parallel for collapse(2) schedule(static)
  for (int b = 0; b < x.batch; ++b)
    for (int c = 0; c < x.channels; ++c) {
      double* row = x.row(b, c);
      for (int i = std::min(valid_cache_[b], x.length); i < x.length; ++i)
        row[i] = 0.0;
    }
}

void ZeroTail::backward(Tensor3& dx) const {
#pragma omp parallel for collapse(2) schedule(static)
  for (int b = 0; b < dx.batch; ++b)
    for (int c = 0; c < dx.channels; ++c) {
      double* row = dx.row(b, c);
      for (int i = std::min(valid_cache_[b], dx.length); i < dx.length; ++i)
        row[i] = 0.0;
    }
}

// ---------------------------------------------------------------------------
// MaskedGap
// ---------------------------------------------------------------------------

void MaskedGap::forward(const Tensor3& x, const std::vector<int>& valid_len,
                        Matrix& y, bool cache) {
  const int B = x.batch, C = x.channels, L = x.length;
  if (static_cast<int>(valid_len.size()) != B)
    throw Error("masked gap: valid_len size mismatch");
  for (int b = 0; b < B; ++b)  // must not throw inside the parallel region
    if (valid_len[b] < 1 || valid_len[b] > L)
      throw Error("masked gap: valid count out of range");
  y.resize(B, C);
#pragma omp parallel for collapse(2) schedule(static)
  for (int b = 0; b < B; ++b) {
    for (int c = 0; c < C; ++c) {
      const int n = valid_len[b];
      const double* in = x.row(b, c);
      double acc = 0.0;
      for (int i = 0; i < n; ++i) acc += in[i];
      y.row(b)[c] = acc / n;
    }
  }
  if (cache) {
    valid_cache_ = valid_len;
    b_ = B; c_ = C; l_ = L;
  }
}

void MaskedGap::backward(const Matrix& dy, Tensor3& dx) {
  dx.resize(b_, c_, l_);
#pragma omp parallel for collapse(2) schedule(static)
  for (int b = 0; b < b_; ++b) {
    for (int c = 0; c < c_; ++c) {
      const int n = valid_cache_[b];
      const double g = dy.row(b)[c] / n;
      double* out = dx.row(b, c);
      for (int i = 0; i < n; ++i) out[i] = g;
    }
  }
}

// ---------------------------------------------------------------------------
// Dense / ReluVec
// ---------------------------------------------------------------------------

Dense::Dense(int in_f, int out_f)
    : in_features(in_f), out_features(out_f),
      w(static_cast<size_t>(out_f) * in_f, 0.0), b(out_f, 0.0),
      dw(w.size(), 0.0), db(b.size(), 0.0) {}

void Dense::forward(const Matrix& x, Matrix& y, bool cache) {
  if (x.cols != in_features) throw Error("dense: feature mismatch");
  dense_forward(x, w, b, out_features, y);
  if (cache) x_cache_ = x;
}

void Dense::backward(const Matrix& dy, Matrix& dx) {
  dense_backward(x_cache_, dy, w, dx, dw, db);
}

void ReluVec::forward(const Matrix& x, Matrix& y, bool cache) {
  y.resize(x.rows, x.cols);
  const size_t n = x.data.size();
  for (size_t i = 0; i < n; ++i)
    y.data[i] = x.data[i] > 0.0 ? x.data[i] : 0.0;
  if (cache) y_cache_ = y;
}

void ReluVec::backward(const Matrix& dy, Matrix& dx) {
  dx.resize(dy.rows, dy.cols);
  const size_t n = dy.data.size();
  for (size_t i = 0; i < n; ++i)
    dx.data[i] = y_cache_.data[i] > 0.0 ? dy.data[i] : 0.0;
}

double sigmoid(double z) {
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

}  // namespace gait::nn
