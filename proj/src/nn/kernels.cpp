#include "gait/nn/kernels.hpp"

#include <algorithm>
#include <cassert>

namespace gait::nn {

// ---------------------------------------------------------------------------
// conv1d
// ---------------------------------------------------------------------------

void conv1d_forward_ref(const Tensor3& x, std::span<const double> w,
                        std::span<const double> bias, int filters, int ksize,
                        Tensor3& y) {
  const int B = x.batch, C = x.channels, L = x.length;
  const int off = ksize / 2;
  y.resize(B, filters, L);
  for (int b = 0; b < B; ++b) {
    for (int f = 0; f < filters; ++f) {
      double* out = y.row(b, f);
      for (int i = 0; i < L; ++i) {
        double acc = bias[f];
        for (int c = 0; c < C; ++c) {
          const double* in = x.row(b, c);
          const double* wf = &w[(static_cast<size_t>(f) * C + c) * ksize];
          for (int k = 0; k < ksize; ++k) {
            const int j = i + k - off;
            if (j >= 0 && j < L) acc += in[j] * wf[k];
          }
        }
        out[i] = acc;
      }
    }
  }
}

void conv1d_forward(const Tensor3& x, std::span<const double> w,
                    std::span<const double> bias, int filters, int ksize,
                    Tensor3& y) {
  const int B = x.batch, C = x.channels, L = x.length;
  const int off = ksize / 2;
  y.resize(B, filters, L);
#pragma omp parallel for collapse(2) schedule(static)
  for (int b = 0; b < B; ++b) {
    for (int f = 0; f < filters; ++f) {
      double* out = y.row(b, f);
      for (int i = 0; i < L; ++i) out[i] = bias[f];
      // (c,k) ascending per output element: same accumulation order as the
      // reference, so results are bit-identical.
      for (int c = 0; c < C; ++c) {
        const double* in = x.row(b, c);
        const double* wf = &w[(static_cast<size_t>(f) * C + c) * ksize];
        for (int k = 0; k < ksize; ++k) {
          const double wv = wf[k];
          const int lo = std::max(0, off - k);
          const int hi = std::min(L, L + off - k);
          for (int i = lo; i < hi; ++i) out[i] += in[i + k - off] * wv;
        }
      }
    }
  }
}

void conv1d_backward_data_ref(const Tensor3& dy, std::span<const double> w,
                              int in_channels, int ksize, Tensor3& dx) {
  const int B = dy.batch, F = dy.channels, L = dy.length;
  const int off = ksize / 2;
  dx.resize(B, in_channels, L);
  for (int b = 0; b < B; ++b) {
    for (int c = 0; c < in_channels; ++c) {
      double* out = dx.row(b, c);
      for (int j = 0; j < L; ++j) {
        double acc = 0.0;
        for (int f = 0; f < F; ++f) {
          const double* g = dy.row(b, f);
          const double* wf =
              &w[(static_cast<size_t>(f) * in_channels + c) * ksize];
          for (int k = 0; k < ksize; ++k) {
            const int i = j - k + off;
            if (i >= 0 && i < L) acc += g[i] * wf[k];
          }
        }
        out[j] = acc;
      }
    }
  }
}

void conv1d_backward_data(const Tensor3& dy, std::span<const double> w,
                          int in_channels, int ksize, Tensor3& dx) {
  const int B = dy.batch, F = dy.channels, L = dy.length;
  const int off = ksize / 2;
  dx.resize(B, in_channels, L);
#pragma omp parallel for collapse(2) schedule(static)
  for (int b = 0; b < B; ++b) {
    for (int c = 0; c < in_channels; ++c) {
      double* out = dx.row(b, c);
      for (int f = 0; f < F; ++f) {
        const double* g = dy.row(b, f);
        const double* wf =
            &w[(static_cast<size_t>(f) * in_channels + c) * ksize];
        for (int k = 0; k < ksize; ++k) {
          const double wv = wf[k];
          const int lo = std::max(0, k - off);
          const int hi = std::min(L, L + k - off);
          for (int j = lo; j < hi; ++j) out[j] += g[j - k + off] * wv;
        }
      }
    }
  }
}

void conv1d_backward_filters_ref(const Tensor3& x, const Tensor3& dy,
                                 int ksize, std::span<double> dw,
                                 std::span<double> db) {
  const int B = x.batch, C = x.channels, L = x.length;
  const int F = dy.channels;
  const int off = ksize / 2;
  std::fill(dw.begin(), dw.end(), 0.0);
  std::fill(db.begin(), db.end(), 0.0);
  for (int f = 0; f < F; ++f) {
    for (int c = 0; c < C; ++c) {
      for (int k = 0; k < ksize; ++k) {
        double acc = 0.0;
        for (int b = 0; b < B; ++b) {
          const double* g = dy.row(b, f);
          const double* in = x.row(b, c);
          for (int i = 0; i < L; ++i) {
            const int j = i + k - off;
            if (j >= 0 && j < L) acc += g[i] * in[j];
          }
        }
        dw[(static_cast<size_t>(f) * C + c) * ksize + k] = acc;
      }
    }
    double acc = 0.0;
    for (int b = 0; b < B; ++b) {
      const double* g = dy.row(b, f);
      for (int i = 0; i < L; ++i) acc += g[i];
    }
    db[f] = acc;
  }
}

void conv1d_backward_filters(const Tensor3& x, const Tensor3& dy, int ksize,
                             std::span<double> dw, std::span<double> db) {
  const int B = x.batch, C = x.channels, L = x.length;
  const int F = dy.channels;
  const int off = ksize / 2;
#pragma omp parallel for schedule(static)
  for (int f = 0; f < F; ++f) {
    for (int c = 0; c < C; ++c) {
      for (int k = 0; k < ksize; ++k) {
        const int lo = std::max(0, off - k);
        const int hi = std::min(L, L + off - k);
        double acc = 0.0;
        for (int b = 0; b < B; ++b) {
          const double* g = dy.row(b, f);
          const double* in = x.row(b, c);
          for (int i = lo; i < hi; ++i) acc += g[i] * in[i + k - off];
        }
        dw[(static_cast<size_t>(f) * C + c) * ksize + k] = acc;
      }
    }
    double acc = 0.0;
    for (int b = 0; b < B; ++b) {
      const double* g = dy.row(b, f);
      for (int i = 0; i < L; ++i) acc += g[i];
    }
    db[f] = acc;
  }
}

// ---------------------------------------------------------------------------
// batchnorm
// ---------------------------------------------------------------------------

void bn_batch_stats_ref(const Tensor3& x, std::span<double> mean,
                        std::span<double> var) {
  const int B = x.batch, C = x.channels, L = x.length;
  const double n = static_cast<double>(B) * L;
  for (int c = 0; c < C; ++c) {
    double m = 0.0;
    for (int b = 0; b < B; ++b) {
      const double* in = x.row(b, c);
      for (int i = 0; i < L; ++i) m += in[i];
    }
    m /= n;
    double v = 0.0;
    for (int b = 0; b < B; ++b) {
      const double* in = x.row(b, c);
      for (int i = 0; i < L; ++i) v += (in[i] - m) * (in[i] - m);
    }
    mean[c] = m;
    var[c] = v / n;
  }
}

void bn_batch_stats(const Tensor3& x, std::span<double> mean,
                    std::span<double> var) {
  const int B = x.batch, C = x.channels, L = x.length;
  const double n = static_cast<double>(B) * L;
#pragma omp parallel for schedule(static)
  for (int c = 0; c < C; ++c) {
    double m = 0.0;
    for (int b = 0; b < B; ++b) {
      const double* in = x.row(b, c);
      for (int i = 0; i < L; ++i) m += in[i];
    }
    m /= n;
    double v = 0.0;
    for (int b = 0; b < B; ++b) {
      const double* in = x.row(b, c);
      for (int i = 0; i < L; ++i) v += (in[i] - m) * (in[i] - m);
    }
    mean[c] = m;
    var[c] = v / n;
  }
}

void bn_apply_ref(const Tensor3& x, std::span<const double> mean,
                  std::span<const double> inv_std,
                  std::span<const double> gamma, std::span<const double> beta,
                  Tensor3* xhat, Tensor3& y) {
  const int B = x.batch, C = x.channels, L = x.length;
  y.resize(B, C, L);
  if (xhat) xhat->resize(B, C, L);
  for (int b = 0; b < B; ++b) {
    for (int c = 0; c < C; ++c) {
      const double* in = x.row(b, c);
      double* out = y.row(b, c);
      double* xh = xhat ? xhat->row(b, c) : nullptr;
      for (int i = 0; i < L; ++i) {
        const double h = (in[i] - mean[c]) * inv_std[c];
        if (xh) xh[i] = h;
        out[i] = gamma[c] * h + beta[c];
      }
    }
  }
}

void bn_apply(const Tensor3& x, std::span<const double> mean,
              std::span<const double> inv_std, std::span<const double> gamma,
              std::span<const double> beta, Tensor3* xhat, Tensor3& y) {
  const int B = x.batch, C = x.channels, L = x.length;
  y.resize(B, C, L);
  if (xhat) xhat->resize(B, C, L);
#pragma omp parallel for collapse(2) schedule(static)
  for (int b = 0; b < B; ++b) {
    for (int c = 0; c < C; ++c) {
      const double* in = x.row(b, c);
      double* out = y.row(b, c);
      double* xh = xhat ? xhat->row(b, c) : nullptr;
      for (int i = 0; i < L; ++i) {
        const double h = (in[i] - mean[c]) * inv_std[c];
        if (xh) xh[i] = h;
        out[i] = gamma[c] * h + beta[c];
      }
    }
  }
}

void bn_backward_ref(const Tensor3& dy, const Tensor3& xhat,
                     std::span<const double> gamma,
                     std::span<const double> inv_std, Tensor3& dx,
                     std::span<double> dgamma, std::span<double> dbeta) {
  const int B = dy.batch, C = dy.channels, L = dy.length;
  const double n = static_cast<double>(B) * L;
  dx.resize(B, C, L);
  for (int c = 0; c < C; ++c) {
    double s1 = 0.0, s2 = 0.0;
    for (int b = 0; b < B; ++b) {
      const double* g = dy.row(b, c);
      const double* xh = xhat.row(b, c);
      for (int i = 0; i < L; ++i) {
        s1 += g[i];
        s2 += g[i] * xh[i];
      }
    }
    dbeta[c] = s1;
    dgamma[c] = s2;
    const double m1 = s1 / n, m2 = s2 / n;
    const double scale = gamma[c] * inv_std[c];
    for (int b = 0; b < B; ++b) {
      const double* g = dy.row(b, c);
      const double* xh = xhat.row(b, c);
      double* out = dx.row(b, c);
      for (int i = 0; i < L; ++i) out[i] = scale * (g[i] - m1 - xh[i] * m2);
    }
  }
}

void bn_backward(const Tensor3& dy, const Tensor3& xhat,
                 std::span<const double> gamma, std::span<const double> inv_std,
                 Tensor3& dx, std::span<double> dgamma,
                 std::span<double> dbeta) {
  const int B = dy.batch, C = dy.channels, L = dy.length;
  const double n = static_cast<double>(B) * L;
  dx.resize(B, C, L);
#pragma omp parallel for schedule(static)
  for (int c = 0; c < C; ++c) {
    double s1 = 0.0, s2 = 0.0;
    for (int b = 0; b < B; ++b) {
      const double* g = dy.row(b, c);
      const double* xh = xhat.row(b, c);
      for (int i = 0; i < L; ++i) {
        s1 += g[i];
        s2 += g[i] * xh[i];
      }
    }
    dbeta[c] = s1;
    dgamma[c] = s2;
    const double m1 = s1 / n, m2 = s2 / n;
    const double scale = gamma[c] * inv_std[c];
    for (int b = 0; b < B; ++b) {
      const double* g = dy.row(b, c);
      const double* xh = xhat.row(b, c);
      double* out = dx.row(b, c);
      for (int i = 0; i < L; ++i) out[i] = scale * (g[i] - m1 - xh[i] * m2);
    }
  }
}

// ---------------------------------------------------------------------------
// dense
// ---------------------------------------------------------------------------

void dense_forward_ref(const Matrix& x, std::span<const double> w,
                       std::span<const double> bias, int out_features,
                       Matrix& y) {
  const int B = x.rows, I = x.cols;
  y.resize(B, out_features);
  for (int b = 0; b < B; ++b) {
    const double* in = x.row(b);
    double* out = y.row(b);
    for (int o = 0; o < out_features; ++o) {
      const double* wo = &w[static_cast<size_t>(o) * I];
      double acc = bias[o];
      for (int i = 0; i < I; ++i) acc += in[i] * wo[i];
      out[o] = acc;
    }
  }
}

void dense_forward(const Matrix& x, std::span<const double> w,
                   std::span<const double> bias, int out_features, Matrix& y) {
  const int B = x.rows, I = x.cols;
  y.resize(B, out_features);
#pragma omp parallel for collapse(2) schedule(static)
  for (int b = 0; b < B; ++b) {
    for (int o = 0; o < out_features; ++o) {
      const double* in = x.row(b);
      const double* wo = &w[static_cast<size_t>(o) * I];
      double acc = bias[o];
      for (int i = 0; i < I; ++i) acc += in[i] * wo[i];
      y.row(b)[o] = acc;
    }
  }
}

void dense_backward_ref(const Matrix& x, const Matrix& dy,
                        std::span<const double> w, Matrix& dx,
                        std::span<double> dw, std::span<double> db) {
  const int B = x.rows, I = x.cols, O = dy.cols;
  dx.resize(B, I);
  for (int b = 0; b < B; ++b) {
    const double* g = dy.row(b);
    double* out = dx.row(b);
    for (int i = 0; i < I; ++i) {
      double acc = 0.0;
      for (int o = 0; o < O; ++o) acc += g[o] * w[static_cast<size_t>(o) * I + i];
      out[i] = acc;
    }
  }
  for (int o = 0; o < O; ++o) {
    for (int i = 0; i < I; ++i) {
      double acc = 0.0;
      for (int b = 0; b < B; ++b) acc += dy.row(b)[o] * x.row(b)[i];
      dw[static_cast<size_t>(o) * I + i] = acc;
    }
    double acc = 0.0;
    for (int b = 0; b < B; ++b) acc += dy.row(b)[o];
    db[o] = acc;
  }
}

void dense_backward(const Matrix& x, const Matrix& dy,
                    std::span<const double> w, Matrix& dx, std::span<double> dw,
                    std::span<double> db) {
  const int B = x.rows, I = x.cols, O = dy.cols;
  dx.resize(B, I);
#pragma omp parallel for collapse(2) schedule(static)
  for (int b = 0; b < B; ++b) {
    for (int i = 0; i < I; ++i) {
      const double* g = dy.row(b);
      double acc = 0.0;
      for (int o = 0; o < O; ++o) acc += g[o] * w[static_cast<size_t>(o) * I + i];
      dx.row(b)[i] = acc;
    }
  }
#pragma omp parallel for schedule(static)
  for (int o = 0; o < O; ++o) {
    for (int i = 0; i < I; ++i) {
      double acc = 0.0;
      for (int b = 0; b < B; ++b) acc += dy.row(b)[o] * x.row(b)[i];
      dw[static_cast<size_t>(o) * I + i] = acc;
    }
    double acc = 0.0;
    for (int b = 0; b < B; ++b) acc += dy.row(b)[o];
    db[o] = acc;
  }
}

}  // namespace gait::nn
