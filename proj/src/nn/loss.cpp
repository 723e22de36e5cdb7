#include "gait/nn/loss.hpp"

#include <algorithm>
#include <cmath>

namespace gait::nn {

BceResult weighted_bce(const std::vector<double>& probs,
                       const std::vector<uint8_t>& labels,
                       const ClassWeights& weights) {
  if (probs.size() != labels.size() || probs.empty())
    throw Error("weighted_bce: size mismatch or empty batch");
  const double n = static_cast<double>(probs.size());

  BceResult out;
  out.dlogits.resize(probs.size());
  double acc = 0.0;
  for (size_t i = 0; i < probs.size(); ++i) {
    const double p = std::clamp(probs[i], kProbClamp, 1.0 - kProbClamp);
    const double y = labels[i] ? 1.0 : 0.0;
    const double w = weights.of(labels[i] != 0);
    acc += w * (y * std::log(p) + (1.0 - y) * std::log(1.0 - p));
    out.dlogits[i] = w * (p - y) / n;
  }
  out.loss = -acc / n;
  if (!std::isfinite(out.loss))
    throw Error("weighted_bce: non-finite loss");
  return out;
}

}  // namespace gait::nn
