#include "gait/segmentation.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace gait {

void SegmentationConfig::validate() const {
  if (min_peak_distance < 1)
    throw Error("min_peak_distance must be >= 1");
  if (max_stride_len < min_peak_distance)
    throw Error("max_stride_len must be >= min_peak_distance");
  if (prominence_factor <= 0.0)
    throw Error("prominence_factor must be > 0");
  if (min_trot_strides_per_session < 0)
    throw Error("min_trot_strides_per_session must be >= 0");
}

namespace {

// Height above the higher of the two bases; a base is the lowest point
// between the peak and the nearest strictly-higher sample on that side
// (or the signal end).
double peak_prominence(std::span<const double> v, int p) {
  const double h = v[p];
  double left_min = h;
  for (int i = p - 1; i >= 0; --i) {
    if (v[i] > h) break;
    left_min = std::min(left_min, v[i]);
  }
  double right_min = h;
  for (int i = p + 1; i < static_cast<int>(v.size()); ++i) {
    if (v[i] > h) break;
    right_min = std::min(right_min, v[i]);
  }
  return h - std::max(left_min, right_min);
}

}  // namespace

std::vector<int> detect_peaks(std::span<const double> signal, int min_distance,
                              double min_prominence) {
  const int n = static_cast<int>(signal.size());
  std::vector<int> candidates;
  // Left-strict, right-nonstrict: the left edge of a plateau counts once.
  for (int i = 1; i + 1 < n; ++i)
    if (signal[i] > signal[i - 1] && signal[i] >= signal[i + 1])
      candidates.push_back(i);

  std::vector<int> prominent;
  for (int p : candidates)
    if (peak_prominence(signal, p) >= min_prominence) prominent.push_back(p);

  // Enforce pairwise distance, taller peaks first (ties: lower index).
  std::vector<int> order(prominent.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](int a, int b) {
    if (signal[prominent[a]] != signal[prominent[b]])
      return signal[prominent[a]] > signal[prominent[b]];
    return prominent[a] < prominent[b];
  });
  std::vector<bool> removed(prominent.size(), false);
  for (int oi : order) {
    if (removed[oi]) continue;
    for (size_t j = 0; j < prominent.size(); ++j) {
      if (j == static_cast<size_t>(oi) || removed[j]) continue;
      if (std::abs(prominent[j] - prominent[oi]) < min_distance)
        removed[j] = true;
    }
  }
  std::vector<int> kept;
  for (size_t j = 0; j < prominent.size(); ++j)
    if (!removed[j]) kept.push_back(prominent[j]);
  std::sort(kept.begin(), kept.end());
  return kept;
}

std::vector<std::pair<int, int>> detect_stride_boundaries(
    const SensorSession& session, const SegmentationConfig& cfg,
    const ChannelManifest& manifest) {
  cfg.validate();
  manifest.validate();
  session.validate();

  const double* row = session.channel_row(manifest.vertical_accel_index);
  std::span<const double> v(row, static_cast<size_t>(session.samples));

  double mean = 0.0;
  for (double x : v) mean += x;
  mean /= session.samples;
  double var = 0.0;
  for (double x : v) var += (x - mean) * (x - mean);
  var /= session.samples;
  const double sigma = std::sqrt(var);

  auto peaks =
      detect_peaks(v, cfg.min_peak_distance, cfg.prominence_factor * sigma);

  std::vector<std::pair<int, int>> bounds;
  for (size_t i = 0; i + 1 < peaks.size(); ++i)
    if (peaks[i + 1] - peaks[i] >= 2) bounds.emplace_back(peaks[i], peaks[i + 1]);
  return bounds;
}

ExtractResult extract_strides(const SensorSession& session,
                              const std::vector<std::pair<int, int>>& bounds,
                              const SegmentationConfig& cfg) {
  ExtractResult out;
  for (const auto& [start, end] : bounds) {
    const int len = end - start;
    if (len > cfg.max_stride_len) {
      ++out.dropped_over_length;
      continue;
    }
    const Gait gait = session.gait_tags[start];
    bool uniform = true;
    for (int t = start; t < end; ++t)
      if (session.gait_tags[t] != gait) {
        uniform = false;
        break;
      }
    if (!uniform) {
      ++out.dropped_multi_gait;
      continue;
    }

    Stride s;
    s.session_id = session.session_id;
    s.gait = gait;
    s.max_len = cfg.max_stride_len;
    s.valid_len = len;
    s.start_index = start;
    s.session_samples = session.samples;
    s.data.assign(static_cast<size_t>(kNumChannels) * cfg.max_stride_len, 0.0);
    for (int c = 0; c < kNumChannels; ++c)
      for (int i = 0; i < len; ++i)
        s.at(c, i) = session.channel_at(c, start + i);
    if (session.label != SessionLabel::Unknown)
      s.lame = (session.label == SessionLabel::Lame);
    out.strides.push_back(std::move(s));
  }
  return out;
}

int SessionStrides::count_of(Gait g) const {
  int n = 0;
  for (const auto& s : strides)
    if (s.gait == g) ++n;
  return n;
}

SessionStrides segment_session(const SensorSession& session,
                               const SegmentationConfig& cfg,
                               const ChannelManifest& manifest) {
  auto bounds = detect_stride_boundaries(session, cfg, manifest);
  auto extracted = extract_strides(session, bounds, cfg);
  SessionStrides out;
  out.session_id = session.session_id;
  out.label = session.label;
  out.session_samples = session.samples;
  out.strides = std::move(extracted.strides);
  out.dropped_multi_gait = extracted.dropped_multi_gait;
  out.dropped_over_length = extracted.dropped_over_length;
  return out;
}

TrotFilterResult filter_sessions_by_trot_count(
    std::vector<SessionStrides> sessions, const SegmentationConfig& cfg) {
  TrotFilterResult out;
  for (auto& s : sessions) {
    if (s.count_of(Gait::Trot) >= cfg.min_trot_strides_per_session)
      out.kept.push_back(std::move(s));
    else
      out.excluded.push_back(std::move(s));
  }
  return out;
}

StrideLengthStats stride_length_stats(const std::vector<Stride>& strides) {
  if (strides.empty()) throw Error("stride_length_stats: empty stride list");
  StrideLengthStats stats;
  std::vector<int> lens;
  lens.reserve(strides.size());
  for (const auto& s : strides) {
    stats.histogram[s.gait][s.valid_len]++;
    lens.push_back(s.valid_len);
  }
  stats.total = static_cast<long>(lens.size());
  stats.mean = std::accumulate(lens.begin(), lens.end(), 0.0) / lens.size();
  std::sort(lens.begin(), lens.end());
  auto nearest_rank = [&](double q) {
    const auto rank = static_cast<size_t>(
        std::ceil(q * static_cast<double>(lens.size())));
    return static_cast<double>(lens[std::max<size_t>(rank, 1) - 1]);
  };
  stats.median = nearest_rank(0.50);
  stats.p95 = nearest_rank(0.95);
  return stats;
}

}  // namespace gait
