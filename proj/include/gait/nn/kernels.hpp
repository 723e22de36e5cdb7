#pragma once

#include <span>

#include "gait/nn/tensor.hpp"

namespace gait::nn {

// Hot kernels come in two flavors: *_ref is the plain serial reference,
// the unsuffixed entry point is the OpenMP version used in production.
// Both accumulate every output element in the same fixed order, so results
// are bit-identical regardless of thread count; the tests assert exactly
// that. Compiled without OpenMP the pragmas are inert and the two flavors
// coincide.

// Cross-correlation with zero 'same' padding:
//   y[b,f,i] = bias[f] + sum_{c,k} x[b,c,i+k-K/2] * w[(f*C+c)*K+k]
void conv1d_forward_ref(const Tensor3& x, std::span<const double> w,
                        std::span<const double> bias, int filters, int ksize,
                        Tensor3& y);
void conv1d_forward(const Tensor3& x, std::span<const double> w,
                    std::span<const double> bias, int filters, int ksize,
                    Tensor3& y);

void conv1d_backward_data_ref(const Tensor3& dy, std::span<const double> w,
                              int in_channels, int ksize, Tensor3& dx);
void conv1d_backward_data(const Tensor3& dy, std::span<const double> w,
                          int in_channels, int ksize, Tensor3& dx);

void conv1d_backward_filters_ref(const Tensor3& x, const Tensor3& dy,
                                 int ksize, std::span<double> dw,
                                 std::span<double> db);
void conv1d_backward_filters(const Tensor3& x, const Tensor3& dy, int ksize,
                             std::span<double> dw, std::span<double> db);

// Per-channel biased mean/variance over (batch, length).
void bn_batch_stats_ref(const Tensor3& x, std::span<double> mean,
                        std::span<double> var);
void bn_batch_stats(const Tensor3& x, std::span<double> mean,
                    std::span<double> var);

// y = gamma * (x - mean) * inv_std + beta; xhat cached when non-null.
void bn_apply_ref(const Tensor3& x, std::span<const double> mean,
                  std::span<const double> inv_std,
                  std::span<const double> gamma, std::span<const double> beta,
                  Tensor3* xhat, Tensor3& y);
void bn_apply(const Tensor3& x, std::span<const double> mean,
              std::span<const double> inv_std, std::span<const double> gamma,
              std::span<const double> beta, Tensor3* xhat, Tensor3& y);

// Train-mode backward through the batch statistics.
void bn_backward_ref(const Tensor3& dy, const Tensor3& xhat,
                     std::span<const double> gamma,
                     std::span<const double> inv_std, Tensor3& dx,
                     std::span<double> dgamma, std::span<double> dbeta);
void bn_backward(const Tensor3& dy, const Tensor3& xhat,
                 std::span<const double> gamma, std::span<const double> inv_std,
                 Tensor3& dx, std::span<double> dgamma, std::span<double> dbeta);

// y[b,o] = bias[o] + sum_i x[b,i] * w[o*I+i]
void dense_forward_ref(const Matrix& x, std::span<const double> w,
                       std::span<const double> bias, int out_features,
                       Matrix& y);
void dense_forward(const Matrix& x, std::span<const double> w,
                   std::span<const double> bias, int out_features, Matrix& y);

void dense_backward_ref(const Matrix& x, const Matrix& dy,
                        std::span<const double> w, Matrix& dx,
                        std::span<double> dw, std::span<double> db);
void dense_backward(const Matrix& x, const Matrix& dy,
                    std::span<const double> w, Matrix& dx, std::span<double> dw,
                    std::span<double> db);

}  // namespace gait::nn
