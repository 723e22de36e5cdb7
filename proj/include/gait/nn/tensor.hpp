#pragma once

#include <cstddef>
#include <vector>

namespace gait::nn {

// [batch][channels][length], contiguous row-major, double precision.
struct Tensor3 {
  int batch = 0;
  int channels = 0;
  int length = 0;
  std::vector<double> data;

  Tensor3() = default;
  Tensor3(int b, int c, int l)
      : batch(b), channels(c), length(l),
        data(static_cast<size_t>(b) * c * l, 0.0) {}

  void resize(int b, int c, int l) {
    batch = b;
    channels = c;
    length = l;
    data.assign(static_cast<size_t>(b) * c * l, 0.0);
  }

  double* row(int b, int c) {
    return data.data() + (static_cast<size_t>(b) * channels + c) * length;
  }
  const double* row(int b, int c) const {
    return data.data() + (static_cast<size_t>(b) * channels + c) * length;
  }
  double& at(int b, int c, int i) { return row(b, c)[i]; }
  double at(int b, int c, int i) const { return row(b, c)[i]; }

  size_t size() const { return data.size(); }
  void zero() { std::fill(data.begin(), data.end(), 0.0); }
};

// [rows][cols] contiguous, used for the dense head.
struct Matrix {
  int rows = 0;
  int cols = 0;
  std::vector<double> data;

  Matrix() = default;
  Matrix(int r, int c) : rows(r), cols(c), data(static_cast<size_t>(r) * c, 0.0) {}

  void resize(int r, int c) {
    rows = r;
    cols = c;
    data.assign(static_cast<size_t>(r) * c, 0.0);
  }

  double* row(int r) { return data.data() + static_cast<size_t>(r) * cols; }
  const double* row(int r) const {
    return data.data() + static_cast<size_t>(r) * cols;
  }
  double& at(int r, int c) { return row(r)[c]; }
  double at(int r, int c) const { return row(r)[c]; }
  void zero() { std::fill(data.begin(), data.end(), 0.0); }
};

}  // namespace gait::nn
