#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace gait {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline constexpr int kNumChannels = 7;
inline constexpr int kSampleRateHz = 100;

enum class Gait : uint8_t { Walk, Trot, Canter, Other };
enum class SessionLabel : uint8_t { Sound, Lame, Unknown };
enum class Split : uint8_t { Train, Validation, Test };

const char* to_string(Gait g);
const char* to_string(SessionLabel l);
const char* to_string(Split s);
std::optional<Gait> gait_from_string(const std::string& s);
std::optional<SessionLabel> label_from_string(const std::string& s);
std::optional<Split> split_from_string(const std::string& s);

// Names the 7 recorded variables and designates the channel used for
// stride boundary detection.
struct ChannelManifest {
  std::vector<std::string> names;
  int vertical_accel_index = 3;

  void validate() const;
  static ChannelManifest default_manifest();
};

// One continuous recording of one horse. Channels are stored row-major,
// [7][T]. Immutable after construction by convention; validate() enforces
// the type invariants.
struct SensorSession {
  std::string session_id;
  std::string horse_id;
  int sample_rate_hz = kSampleRateHz;
  int samples = 0;  // T
  std::vector<double> channels;   // [kNumChannels][samples]
  std::vector<Gait> gait_tags;    // length T
  SessionLabel label = SessionLabel::Unknown;

  double channel_at(int c, int t) const {
    return channels[static_cast<size_t>(c) * samples + t];
  }
  double& channel_at(int c, int t) {
    return channels[static_cast<size_t>(c) * samples + t];
  }
  const double* channel_row(int c) const {
    return channels.data() + static_cast<size_t>(c) * samples;
  }

  void validate() const;
};

// One segmented gait cycle, zero-padded to max_len samples with a
// contiguous-prefix validity mask (represented by valid_len).
struct Stride {
  std::string session_id;
  Gait gait = Gait::Trot;
  int max_len = 100;
  int valid_len = 0;
  std::vector<double> data;    // [kNumChannels][max_len], zero beyond valid_len
  std::optional<bool> lame;    // empty: prediction-only (session label Unknown)
  int start_index = 0;
  int session_samples = 0;     // T of the source session

  double at(int c, int i) const {
    return data[static_cast<size_t>(c) * max_len + i];
  }
  double& at(int c, int i) {
    return data[static_cast<size_t>(c) * max_len + i];
  }
  bool valid_at(int i) const { return i < valid_len; }

  void validate() const;
};

struct SplitAssignment {
  uint64_t seed = 0;
  std::map<std::string, Split> by_session;

  Split at(const std::string& session_id) const;
  bool contains(const std::string& session_id) const {
    return by_session.count(session_id) != 0;
  }
};

// Balanced loss multipliers, w_c = n_total / (2 * n_c) on training strides.
struct ClassWeights {
  double w_sound = 1.0;
  double w_lame = 1.0;

  double of(bool lame) const { return lame ? w_lame : w_sound; }
  static ClassWeights unit() { return {1.0, 1.0}; }
};

}  // namespace gait
