#pragma once

#include <cstdint>
#include <vector>

#include "gait/types.hpp"

namespace gait::nn {

struct BceResult {
  double loss = 0.0;
  std::vector<double> dlogits;  // w(y_i) * (p_i - y_i) / n
};

// Class-weighted binary cross-entropy over a batch. Probabilities are
// clamped to [1e-7, 1-1e-7] before the logs; with unit weights this is the
// plain mean BCE. labels: 0 = sound, 1 = lame.
BceResult weighted_bce(const std::vector<double>& probs,
                       const std::vector<uint8_t>& labels,
                       const ClassWeights& weights);

inline constexpr double kProbClamp = 1e-7;

}  // namespace gait::nn
