#pragma once

#include <array>
#include <vector>

#include "gait/types.hpp"

namespace gait {

struct SplitFractions {
  double train = 0.6;
  double validation = 0.2;
  double test = 0.2;
};

// Label-stratified, seeded session-level split. Validation/Test sizes are
// floor(fraction * stratum size); the remainder goes to Train. Sessions
// labeled Unknown are rejected. Deterministic for a fixed seed regardless
// of input order.
SplitAssignment split_sessions(const std::vector<SensorSession>& sessions,
                               const SplitFractions& fractions, uint64_t seed);

// Variant over (session_id, label) pairs so callers that already segmented
// do not need whole sessions in memory.
SplitAssignment split_labeled_ids(
    const std::vector<std::pair<std::string, SessionLabel>>& ids,
    const SplitFractions& fractions, uint64_t seed);

// w_c = n_total / (2 * n_c) over training strides; both labels required.
ClassWeights compute_class_weights(const std::vector<Stride>& train_strides);
ClassWeights compute_class_weights_from_counts(long n_sound, long n_lame);

}  // namespace gait
