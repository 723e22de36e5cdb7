#include "gait/types.hpp"

#include <cmath>
#include <set>

namespace gait {

const char* to_string(Gait g) {
  switch (g) {
    case Gait::Walk: return "walk";
    case Gait::Trot: return "trot";
    case Gait::Canter: return "canter";
    case Gait::Other: return "other";
  }
  return "other";
}

const char* to_string(SessionLabel l) {
  switch (l) {
    case SessionLabel::Sound: return "sound";
    case SessionLabel::Lame: return "lame";
    case SessionLabel::Unknown: return "unknown";
  }
  return "unknown";
}

const char* to_string(Split s) {
  switch (s) {
    case Split::Train: return "train";
    case Split::Validation: return "validation";
    case Split::Test: return "test";
  }
  return "train";
}

std::optional<Gait> gait_from_string(const std::string& s) {
  if (s == "walk") return Gait::Walk;
  if (s == "trot") return Gait::Trot;
  if (s == "canter") return Gait::Canter;
  if (s == "other") return Gait::Other;
  return std::nullopt;
}

std::optional<SessionLabel> label_from_string(const std::string& s) {
  if (s == "sound") return SessionLabel::Sound;
  if (s == "lame") return SessionLabel::Lame;
  if (s == "unknown") return SessionLabel::Unknown;
  return std::nullopt;
}

std::optional<Split> split_from_string(const std::string& s) {
  if (s == "train") return Split::Train;
  if (s == "validation") return Split::Validation;
  if (s == "test") return Split::Test;
  return std::nullopt;
}

void ChannelManifest::validate() const {
  if (names.size() != static_cast<size_t>(kNumChannels))
    throw Error("channel manifest must name exactly 7 channels, got " +
                std::to_string(names.size()));
  std::set<std::string> unique(names.begin(), names.end());
  if (unique.size() != names.size())
    throw Error("channel manifest names must be unique");
  for (const auto& n : names)
    if (n.empty() || n.find(',') != std::string::npos)
      throw Error("channel manifest name empty or contains ','");
  if (vertical_accel_index < 0 || vertical_accel_index >= kNumChannels)
    throw Error("vertical_accel_index out of range [0,6]: " +
                std::to_string(vertical_accel_index));
}

ChannelManifest ChannelManifest::default_manifest() {
  ChannelManifest m;
  m.names = {"speed",  "accel_x", "accel_y", "accel_z",
             "gyro_x", "gyro_y",  "gyro_z"};
  m.vertical_accel_index = 3;  // accel_z
  return m;
}

void SensorSession::validate() const {
  if (session_id.empty() || session_id.find(',') != std::string::npos)
    throw Error("session_id empty or contains ','");
  if (sample_rate_hz != kSampleRateHz)
    throw Error("session " + session_id + ": sample rate must be 100 Hz, got " +
                std::to_string(sample_rate_hz));
  if (samples < 1)
    throw Error("session " + session_id + ": must contain at least 1 sample");
  if (channels.size() != static_cast<size_t>(kNumChannels) * samples)
    throw Error("session " + session_id + ": channel count mismatch");
  if (gait_tags.size() != static_cast<size_t>(samples))
    throw Error("session " + session_id + ": gait tag length mismatch");
  for (double v : channels)
    if (!std::isfinite(v))
      throw Error("session " + session_id + ": non-finite channel value");
}

void Stride::validate() const {
  if (valid_len < 1 || valid_len > max_len)
    throw Error("stride valid_len out of [1," + std::to_string(max_len) + "]");
  if (data.size() != static_cast<size_t>(kNumChannels) * max_len)
    throw Error("stride data size mismatch");
  for (int c = 0; c < kNumChannels; ++c)
    for (int i = valid_len; i < max_len; ++i)
      if (at(c, i) != 0.0) throw Error("stride padding must be zero");
  if (start_index < 0) throw Error("stride start_index negative");
}

Split SplitAssignment::at(const std::string& session_id) const {
  auto it = by_session.find(session_id);
  if (it == by_session.end())
    throw Error("session " + session_id + " missing from split assignment");
  return it->second;
}

}  // namespace gait
