#pragma once

#include <map>
#include <span>
#include <utility>
#include <vector>

#include "gait/types.hpp"

namespace gait {

struct SegmentationConfig {
  int max_stride_len = 100;
  int min_peak_distance = 30;
  double prominence_factor = 0.5;  // multiplied by the channel's std dev
  int min_trot_strides_per_session = 40;

  void validate() const;
};

// Local maxima of `signal` with prominence >= min_prominence, thinned so
// that surviving peaks are pairwise >= min_distance apart (taller peaks
// win). Returned sorted by index.
std::vector<int> detect_peaks(std::span<const double> signal,
                              int min_distance, double min_prominence);

// Stride boundaries: consecutive peak pairs on the configured
// vertical-acceleration channel. Prominence threshold is
// prominence_factor * sigma(channel).
std::vector<std::pair<int, int>> detect_stride_boundaries(
    const SensorSession& session, const SegmentationConfig& cfg,
    const ChannelManifest& manifest);

struct ExtractResult {
  std::vector<Stride> strides;
  int dropped_multi_gait = 0;
  int dropped_over_length = 0;
};

// Single-gait intervals become zero-padded, masked strides; mixed-gait and
// over-length intervals are dropped and counted.
ExtractResult extract_strides(const SensorSession& session,
                              const std::vector<std::pair<int, int>>& bounds,
                              const SegmentationConfig& cfg);

struct SessionStrides {
  std::string session_id;
  SessionLabel label = SessionLabel::Unknown;
  int session_samples = 0;
  std::vector<Stride> strides;
  int dropped_multi_gait = 0;
  int dropped_over_length = 0;

  int count_of(Gait g) const;
};

SessionStrides segment_session(const SensorSession& session,
                               const SegmentationConfig& cfg,
                               const ChannelManifest& manifest);

struct TrotFilterResult {
  std::vector<SessionStrides> kept;
  std::vector<SessionStrides> excluded;
};

TrotFilterResult filter_sessions_by_trot_count(
    std::vector<SessionStrides> sessions, const SegmentationConfig& cfg);

struct StrideLengthStats {
  std::map<Gait, std::map<int, long>> histogram;  // gait -> valid_len -> count
  long total = 0;
  double mean = 0.0;
  double median = 0.0;   // nearest-rank p50 over valid_len
  double p95 = 0.0;      // nearest-rank
};

StrideLengthStats stride_length_stats(const std::vector<Stride>& strides);

}  // namespace gait
