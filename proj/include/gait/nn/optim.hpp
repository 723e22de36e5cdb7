#pragma once

#include <vector>

#include "gait/nn/model.hpp"

namespace gait::nn {

// Adam with bias correction. First-moment/second-moment buffers are laid
// out to match the tensor list passed on the first step; steps are strictly
// sequential and deterministic.
class Adam {
 public:
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;

  void step(std::vector<TensorView> params, std::vector<TensorView> grads);

  long steps_taken() const { return t_; }

 private:
  std::vector<std::vector<double>> m_, v_;
  double beta1_pow_ = 1.0;
  double beta2_pow_ = 1.0;
  long t_ = 0;
};

// Reduce-on-plateau: halve the learning rate after `patience` consecutive
// epochs without strict validation-loss improvement, never below min_lr.
// The counter resets on improvement and on reduction.
struct PlateauScheduler {
  double factor = 0.5;
  int patience = 3;
  double min_lr = 1e-6;

  double best = std::numeric_limits<double>::infinity();
  int epochs_since_improvement = 0;

  double step(double val_loss, double current_lr);
};

}  // namespace gait::nn
