#include "gait/nn/checkpoint.hpp"

#include <algorithm>
#include <cstring>
#include <fstream>
#include <map>
#include <sstream>

namespace gait::nn {

namespace {

constexpr char kMagic[5] = {'G', 'A', 'I', 'T', '1'};

template <class T>
void write_pod(std::ostream& out, T v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <class T>
T read_pod(std::istream& in, const std::string& what) {
  T v{};
  in.read(reinterpret_cast<char*>(&v), sizeof(T));
  if (!in) throw Error("checkpoint truncated while reading " + what);
  return v;
}

void write_name(std::ostream& out, const std::string& name) {
  write_pod<uint16_t>(out, static_cast<uint16_t>(name.size()));
  out.write(name.data(), static_cast<std::streamsize>(name.size()));
}

std::string read_name(std::istream& in) {
  const auto len = read_pod<uint16_t>(in, "name length");
  std::string name(len, '\0');
  in.read(name.data(), len);
  if (!in) throw Error("checkpoint truncated while reading name");
  return name;
}

struct ScalarWriter {
  uint32_t count = 0;
  std::ostringstream buf;

  void add(const std::string& name, double v) {
    write_name(buf, name);
    write_pod<double>(buf, v);
    ++count;
  }
};

double clamp_threshold(double t) {
  return std::clamp(t, 1e-7, 1.0 - 1e-7);
}

}  // namespace

void save_checkpoint(const TrainedModel& model,
                     const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write checkpoint " + path.string());

  out.write(kMagic, sizeof(kMagic));
  write_pod<uint32_t>(out, kCheckpointVersion);

  auto tensors = const_cast<GaitCnn&>(model.net).state_tensors();
  write_pod<uint32_t>(out, static_cast<uint32_t>(tensors.size()));
  for (const auto& t : tensors) {
    write_name(out, t.name);
    write_pod<uint8_t>(out, static_cast<uint8_t>(t.dims.size()));
    size_t expect = 1;
    for (uint32_t d : t.dims) {
      write_pod<uint32_t>(out, d);
      expect *= d;
    }
    if (expect != t.data->size())
      throw Error("checkpoint: dims disagree with data for " + t.name);
    for (double v : *t.data) write_pod<float>(out, static_cast<float>(v));
  }

  ScalarWriter scal;
  const auto& cfg = model.net.config();
  if (model.norm.mean.size() != static_cast<size_t>(cfg.in_channels) ||
      model.norm.stdev.size() != static_cast<size_t>(cfg.in_channels))
    throw Error("checkpoint: normalization stats missing or mis-sized");
  for (int c = 0; c < cfg.in_channels; ++c)
    scal.add("norm_mean_" + std::to_string(c), model.norm.mean[c]);
  for (int c = 0; c < cfg.in_channels; ++c)
    scal.add("norm_std_" + std::to_string(c), model.norm.stdev[c]);
  scal.add("stride_threshold", clamp_threshold(model.stride_threshold));
  scal.add("session_threshold", clamp_threshold(model.session_threshold));
  scal.add("train_gait", static_cast<double>(static_cast<int>(model.train_gait)));
  scal.add("pool_width", static_cast<double>(cfg.pool_width));
  scal.add("dropout_rate", cfg.dropout_rate);
  scal.add("input_len", static_cast<double>(model.input_len));

  write_pod<uint32_t>(out, scal.count);
  const std::string blob = scal.buf.str();
  out.write(blob.data(), static_cast<std::streamsize>(blob.size()));
  if (!out) throw Error("write failed for checkpoint " + path.string());
}

TrainedModel load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open checkpoint " + path.string());

  char magic[5];
  in.read(magic, sizeof(magic));
  if (!in || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0)
    throw Error("bad checkpoint header in " + path.string());
  const auto version = read_pod<uint32_t>(in, "version");
  if (version != kCheckpointVersion)
    throw Error("unsupported checkpoint version " + std::to_string(version));

  struct Record {
    std::vector<uint32_t> dims;
    std::vector<double> data;
  };
  std::map<std::string, Record> tensors;
  const auto n_tensors = read_pod<uint32_t>(in, "tensor count");
  for (uint32_t i = 0; i < n_tensors; ++i) {
    const std::string name = read_name(in);
    const auto rank = read_pod<uint8_t>(in, "rank");
    Record rec;
    size_t total = 1;
    for (int d = 0; d < rank; ++d) {
      rec.dims.push_back(read_pod<uint32_t>(in, "dim"));
      total *= rec.dims.back();
    }
    if (total == 0 || total > (1u << 28))
      throw Error("checkpoint tensor " + name + " has implausible size");
    rec.data.resize(total);
    for (size_t j = 0; j < total; ++j)
      rec.data[j] = static_cast<double>(read_pod<float>(in, name));
    tensors.emplace(name, std::move(rec));
  }

  std::map<std::string, double> scalars;
  const auto n_scalars = read_pod<uint32_t>(in, "scalar count");
  for (uint32_t i = 0; i < n_scalars; ++i) {
    const std::string name = read_name(in);
    scalars[name] = read_pod<double>(in, name);
  }

  auto tensor = [&](const std::string& name) -> Record& {
    auto it = tensors.find(name);
    if (it == tensors.end())
      throw Error("checkpoint missing tensor " + name);
    return it->second;
  };
  auto scalar = [&](const std::string& name) {
    auto it = scalars.find(name);
    if (it == scalars.end())
      throw Error("checkpoint missing scalar " + name);
    return it->second;
  };

  const auto& c1 = tensor("conv1.w");
  const auto& c2 = tensor("conv2.w");
  const auto& d1 = tensor("dense1.w");
  if (c1.dims.size() != 3 || c2.dims.size() != 3 || d1.dims.size() != 2)
    throw Error("checkpoint tensor ranks unexpected");

  ModelConfig cfg;
  cfg.conv1_filters = static_cast<int>(c1.dims[0]);
  cfg.in_channels = static_cast<int>(c1.dims[1]);
  cfg.kernel_size = static_cast<int>(c1.dims[2]);
  cfg.conv2_filters = static_cast<int>(c2.dims[0]);
  cfg.dense_units = static_cast<int>(d1.dims[0]);
  cfg.pool_width = static_cast<int>(scalar("pool_width"));
  cfg.dropout_rate = scalar("dropout_rate");

  TrainedModel model;
  model.net = GaitCnn(cfg);
  for (auto& view : model.net.state_tensors()) {
    auto& rec = tensor(view.name);
    if (rec.dims != view.dims)
      throw Error("checkpoint tensor " + view.name + " has wrong shape");
    *view.data = rec.data;
  }

  model.norm.mean.resize(cfg.in_channels);
  model.norm.stdev.resize(cfg.in_channels);
  for (int c = 0; c < cfg.in_channels; ++c) {
    model.norm.mean[c] = scalar("norm_mean_" + std::to_string(c));
    model.norm.stdev[c] = scalar("norm_std_" + std::to_string(c));
    if (!(model.norm.stdev[c] > 0.0))
      throw Error("checkpoint normalization std must be > 0");
  }
  model.stride_threshold = scalar("stride_threshold");
  model.session_threshold = scalar("session_threshold");
  for (double t : {model.stride_threshold, model.session_threshold})
    if (!(t > 0.0 && t < 1.0))
      throw Error("checkpoint thresholds must lie in (0,1)");
  const int gait_idx = static_cast<int>(scalar("train_gait"));
  if (gait_idx < 0 || gait_idx > 3)
    throw Error("checkpoint train_gait out of range");
  model.train_gait = static_cast<Gait>(gait_idx);
  model.input_len = static_cast<int>(scalar("input_len"));
  if (model.input_len < 1) throw Error("checkpoint input_len invalid");

  for (const auto& name : {"bn1.running_var", "bn2.running_var"})
    for (double v : tensor(name).data)
      if (!(v > 0.0))
        throw Error("checkpoint running variance must be > 0");

  return model;
}

}  // namespace gait::nn
