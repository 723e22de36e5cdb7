#pragma once

#include <filesystem>

#include "gait/nn/model.hpp"

namespace gait::nn {

// Binary checkpoint, little-endian:
//   magic "GAIT1", u32 version,
//   u32 tensor count, records of (u16 name len, name, u8 rank, u32 dims,
//   f32 payload), then u32 scalar count, records of (u16 name len, name,
//   f64 value) carrying thresholds, normalization stats and the few config
//   values tensor shapes cannot express.
// Readers reject unknown magic or version.
void save_checkpoint(const TrainedModel& model,
                     const std::filesystem::path& path);
TrainedModel load_checkpoint(const std::filesystem::path& path);

inline constexpr uint32_t kCheckpointVersion = 1;

}  // namespace gait::nn
