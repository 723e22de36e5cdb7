#include "gait/session_io.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

namespace gait {

namespace {

constexpr const char* kHeader = "#gaitsession v1";

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> fields;
  std::string field;
  for (char ch : line) {
    if (ch == ',') {
      fields.push_back(field);
      field.clear();
    } else {
      field.push_back(ch);
    }
  }
  fields.push_back(field);
  return fields;
}

[[noreturn]] void fail(const std::string& source, int line,
                       const std::string& what) {
  throw Error(source + ":" + std::to_string(line) + ": " + what);
}

double parse_real(const std::string& s, const std::string& source, int line) {
  double v = 0.0;
  const char* begin = s.data();
  const char* end = s.data() + s.size();
  auto res = std::from_chars(begin, end, v);
  if (res.ec != std::errc{} || res.ptr != end)
    fail(source, line, "malformed number '" + s + "'");
  return v;
}

long parse_int(const std::string& s, const std::string& source, int line) {
  long v = 0;
  auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc{} || res.ptr != s.data() + s.size())
    fail(source, line, "malformed integer '" + s + "'");
  return v;
}

}  // namespace

std::string format_double(double v) {
  char buf[40];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

SensorSession parse_session(std::istream& in, const ChannelManifest& manifest,
                            const std::string& source_name) {
  manifest.validate();

  std::string line;
  int lineno = 0;

  if (!std::getline(in, line)) fail(source_name, 1, "empty file");
  ++lineno;
  if (line == kHeader) {
    // ok
  } else {
    fail(source_name, lineno, "malformed header, expected '" +
                                  std::string(kHeader) + "'");
  }

  if (!std::getline(in, line)) fail(source_name, 2, "missing metadata line");
  ++lineno;
  auto meta = split_csv(line);
  if (meta.size() != 4)
    fail(source_name, lineno, "metadata line must have 4 fields");

  SensorSession session;
  session.session_id = meta[0];
  session.horse_id = meta[1];
  auto label = label_from_string(meta[2]);
  if (!label) fail(source_name, lineno, "unknown label token '" + meta[2] + "'");
  session.label = *label;
  long rate = parse_int(meta[3], source_name, lineno);
  if (rate != kSampleRateHz)
    fail(source_name, lineno,
         "wrong sample rate " + std::to_string(rate) + ", expected 100");
  session.sample_rate_hz = static_cast<int>(rate);

  if (!std::getline(in, line)) fail(source_name, 3, "missing column header");
  ++lineno;
  if (line != "t_ms,c0,c1,c2,c3,c4,c5,c6,gait")
    fail(source_name, lineno, "malformed column header");

  std::vector<std::array<double, kNumChannels>> rows;
  std::vector<Gait> tags;
  long prev_t = -10;
  bool first_row = true;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    auto fields = split_csv(line);
    if (fields.size() != 2 + kNumChannels)
      fail(source_name, lineno,
           "channel count mismatch: expected " + std::to_string(kNumChannels) +
               " channel columns, got " +
               std::to_string(static_cast<long>(fields.size()) - 2));
    long t = parse_int(fields[0], source_name, lineno);
    if (!first_row && t != prev_t + 10)
      fail(source_name, lineno, "t_ms must increase by 10");
    first_row = false;
    prev_t = t;

    std::array<double, kNumChannels> row{};
    for (int c = 0; c < kNumChannels; ++c) {
      double v = parse_real(fields[1 + c], source_name, lineno);
      if (!std::isfinite(v))
        fail(source_name, lineno, "non-finite channel value '" +
                                      fields[1 + c] + "'");
      row[c] = v;
    }
    auto gait = gait_from_string(fields[1 + kNumChannels]);
    if (!gait)
      fail(source_name, lineno,
           "unknown gait token '" + fields[1 + kNumChannels] + "'");
    rows.push_back(row);
    tags.push_back(*gait);
  }

  if (rows.empty()) fail(source_name, lineno + 1, "session has no samples");

  session.samples = static_cast<int>(rows.size());
  session.channels.assign(static_cast<size_t>(kNumChannels) * session.samples,
                          0.0);
  for (int t = 0; t < session.samples; ++t)
    for (int c = 0; c < kNumChannels; ++c)
      session.channel_at(c, t) = rows[t][c];
  session.gait_tags = std::move(tags);

  session.validate();
  return session;
}

void serialize_session(const SensorSession& session, std::ostream& out) {
  session.validate();
  out << kHeader << '\n';
  out << session.session_id << ',' << session.horse_id << ','
      << to_string(session.label) << ',' << session.sample_rate_hz << '\n';
  out << "t_ms,c0,c1,c2,c3,c4,c5,c6,gait\n";
  for (int t = 0; t < session.samples; ++t) {
    out << (t * 10);
    for (int c = 0; c < kNumChannels; ++c)
      out << ',' << format_double(session.channel_at(c, t));
    out << ',' << to_string(session.gait_tags[t]) << '\n';
  }
}

SensorSession load_session_file(const std::filesystem::path& path,
                                const ChannelManifest& manifest) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open session file " + path.string());
  return parse_session(in, manifest, path.filename().string());
}

void save_session_file(const SensorSession& session,
                       const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write session file " + path.string());
  serialize_session(session, out);
  if (!out) throw Error("write failed for " + path.string());
}

ChannelManifest load_manifest(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open manifest " + path.string());
  ChannelManifest m;
  std::string line;
  if (!std::getline(in, line))
    throw Error(path.string() + ":1: missing channel name line");
  m.names = split_csv(line);
  if (!std::getline(in, line))
    throw Error(path.string() + ":2: missing vertical_accel_index line");
  const std::string prefix = "vertical_accel_index=";
  if (line.rfind(prefix, 0) != 0)
    throw Error(path.string() + ":2: expected '" + prefix + "<k>'");
  m.vertical_accel_index =
      static_cast<int>(parse_int(line.substr(prefix.size()), path.string(), 2));
  m.validate();
  return m;
}

void save_manifest(const ChannelManifest& manifest,
                   const std::filesystem::path& path) {
  manifest.validate();
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write manifest " + path.string());
  for (size_t i = 0; i < manifest.names.size(); ++i)
    out << (i ? "," : "") << manifest.names[i];
  out << '\n' << "vertical_accel_index=" << manifest.vertical_accel_index
      << '\n';
}

SplitAssignment load_split(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open split file " + path.string());
  SplitAssignment split;
  std::string line;
  int lineno = 0;
  bool saw_seed = false;
  bool saw_header = false;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    if (line.rfind("#seed=", 0) == 0) {
      split.seed = static_cast<uint64_t>(
          parse_int(line.substr(6), path.string(), lineno));
      saw_seed = true;
      continue;
    }
    if (line == "session_id,split") {
      saw_header = true;
      continue;
    }
    auto fields = split_csv(line);
    if (fields.size() != 2)
      fail(path.string(), lineno, "expected 'session_id,split'");
    auto s = split_from_string(fields[1]);
    if (!s) fail(path.string(), lineno, "unknown split token '" + fields[1] + "'");
    if (!split.by_session.emplace(fields[0], *s).second)
      fail(path.string(), lineno, "duplicate session " + fields[0]);
  }
  if (!saw_seed || !saw_header)
    throw Error(path.string() + ": missing #seed or header line");
  return split;
}

void save_split(const SplitAssignment& split,
                const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write split file " + path.string());
  out << "#seed=" << split.seed << '\n' << "session_id,split\n";
  for (const auto& [id, s] : split.by_session)
    out << id << ',' << to_string(s) << '\n';
}

std::vector<std::filesystem::path> list_session_files(
    const std::filesystem::path& dir) {
  if (!std::filesystem::is_directory(dir))
    throw Error("not a directory: " + dir.string());
  std::vector<std::filesystem::path> files;
  for (const auto& entry : std::filesystem::directory_iterator(dir))
    if (entry.is_regular_file() && entry.path().extension() == ".gaitsession")
      files.push_back(entry.path());
  std::sort(files.begin(), files.end());
  return files;
}

std::vector<SensorSession> load_sessions_dir(const std::filesystem::path& dir,
                                             const ChannelManifest& manifest) {
  std::vector<SensorSession> sessions;
  for (const auto& path : list_session_files(dir))
    sessions.push_back(load_session_file(path, manifest));
  if (sessions.empty())
    throw Error("no .gaitsession files under " + dir.string());
  return sessions;
}

}  // namespace gait
