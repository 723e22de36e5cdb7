#include "gait/nn/optim.hpp"

#include <cmath>
#include <limits>

namespace gait::nn {

void Adam::step(std::vector<TensorView> params, std::vector<TensorView> grads) {
  if (params.size() != grads.size())
    throw Error("adam: parameter/gradient count mismatch");
  if (m_.empty()) {
    m_.resize(params.size());
    v_.resize(params.size());
    for (size_t i = 0; i < params.size(); ++i) {
      m_[i].assign(params[i].data->size(), 0.0);
      v_[i].assign(params[i].data->size(), 0.0);
    }
  }
  ++t_;
  beta1_pow_ *= beta1;
  beta2_pow_ *= beta2;
  const double corr1 = 1.0 - beta1_pow_;
  const double corr2 = 1.0 - beta2_pow_;

  for (size_t i = 0; i < params.size(); ++i) {
    auto& theta = *params[i].data;
    const auto& g = *grads[i].data;
    if (theta.size() != g.size() || theta.size() != m_[i].size())
      throw Error("adam: shape mismatch for " + params[i].name);
    auto& m = m_[i];
    auto& v = v_[i];
#pragma omp parallel for schedule(static)
    for (long j = 0; j < static_cast<long>(theta.size()); ++j) {
      m[j] = beta1 * m[j] + (1.0 - beta1) * g[j];
      v[j] = beta2 * v[j] + (1.0 - beta2) * g[j] * g[j];
      const double m_hat = m[j] / corr1;
      const double v_hat = v[j] / corr2;
      theta[j] -= lr * m_hat / (std::sqrt(v_hat) + eps);
    }
  }
}

double PlateauScheduler::step(double val_loss, double current_lr) {
  if (!std::isfinite(val_loss))
    throw Error("scheduler: non-finite validation loss");
  if (val_loss < best) {
    best = val_loss;
    epochs_since_improvement = 0;
    return current_lr;
  }
  ++epochs_since_improvement;
  if (epochs_since_improvement >= patience) {
    epochs_since_improvement = 0;
    return std::max(current_lr * factor, min_lr);
  }
  return current_lr;
}

}  // namespace gait::nn
