#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "gait/types.hpp"

namespace gait {

// Session file, text/UTF-8:
//   line 1: #gaitsession v1
//   line 2: <session_id>,<horse_id>,<label>,<sample_rate_hz>
//   line 3: t_ms,c0,c1,c2,c3,c4,c5,c6,gait
//   rows:   t_ms strictly increasing by 10, 7 decimal reals, gait token
// Parse errors carry the source name and 1-based line number.
SensorSession parse_session(std::istream& in, const ChannelManifest& manifest,
                            const std::string& source_name);
void serialize_session(const SensorSession& session, std::ostream& out);

SensorSession load_session_file(const std::filesystem::path& path,
                                const ChannelManifest& manifest);
void save_session_file(const SensorSession& session,
                       const std::filesystem::path& path);

// Manifest file: one line of 7 comma-separated names, then
// vertical_accel_index=<k>.
ChannelManifest load_manifest(const std::filesystem::path& path);
void save_manifest(const ChannelManifest& manifest,
                   const std::filesystem::path& path);

// Split file: "#seed=<n>" comment, "session_id,split" header, one row per
// session with split in {train,validation,test}.
SplitAssignment load_split(const std::filesystem::path& path);
void save_split(const SplitAssignment& split,
                const std::filesystem::path& path);

// *.gaitsession files under dir, sorted by filename.
std::vector<std::filesystem::path> list_session_files(
    const std::filesystem::path& dir);

std::vector<SensorSession> load_sessions_dir(const std::filesystem::path& dir,
                                             const ChannelManifest& manifest);

// Shortest round-trip decimal formatting (std::to_chars).
std::string format_double(double v);

}  // namespace gait
