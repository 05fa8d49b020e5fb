#include "cyclegan/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "cyclegan/config_io.hpp"
#include "cyclegan/errors.hpp"
#include "fnv.hpp"

namespace cyclegan {

namespace {

using json = nlohmann::json;
using Kind = CheckpointError::Kind;

constexpr char kMagic[8] = {'C', 'Y', 'G', 'A', 'N', 'C', 'K', 'P'};

static_assert(std::endian::native == std::endian::little, "checkpoint I/O assumes a little-endian host");

template <class T>
void put(std::string& out, T value) {
  char bytes[sizeof(T)];
  std::memcpy(bytes, &value, sizeof(T));
  out.append(bytes, sizeof(T));
}

class Reader {
 public:
  explicit Reader(std::string_view data) : data_(data) {}

  template <class T>
  T get() {
    auto bytes = take(sizeof(T));
    T value;
    std::memcpy(&value, bytes.data(), sizeof(T));
    return value;
  }

  std::string_view take(std::size_t n) {
    if (n > data_.size() - pos_) throw CheckpointError(Kind::Corrupt, "checkpoint is truncated");
    auto view = data_.substr(pos_, n);
    pos_ += n;
    return view;
  }

  std::size_t position() const { return pos_; }

 private:
  std::string_view data_;
  std::size_t pos_ = 0;
};

std::string dtype_name(torch::Dtype dtype) {
  if (dtype == torch::kFloat32) return "float32";
  if (dtype == torch::kFloat64) return "float64";
  throw CheckpointError(Kind::Io, "unsupported tensor dtype for checkpointing");
}

torch::Dtype dtype_from_name(const std::string& name) {
  if (name == "float32") return torch::kFloat32;
  if (name == "float64") return torch::kFloat64;
  throw CheckpointError(Kind::Corrupt, "unknown tensor dtype '" + name + "'");
}

class BlobWriter {
 public:
  void tensor(const std::string& name, const torch::Tensor& t) {
    auto c = t.detach().contiguous().cpu();
    const auto bytes = static_cast<std::size_t>(c.numel()) * c.element_size();
    json entry{{"name", name},
               {"kind", "tensor"},
               {"offset", blobs_.size()},
               {"size", bytes},
               {"dtype", dtype_name(c.scalar_type())},
               {"shape", c.sizes().vec()}};
    blobs_.append(static_cast<const char*>(c.data_ptr()), bytes);
    table_.push_back(std::move(entry));
  }

  void bytes(const std::string& name, const std::string& data) {
    table_.push_back({{"name", name}, {"kind", "bytes"}, {"offset", blobs_.size()}, {"size", data.size()}});
    blobs_ += data;
  }

  const json& table() const { return table_; }
  const std::string& data() const { return blobs_; }

 private:
  json table_ = json::array();
  std::string blobs_;
};

class BlobReader {
 public:
  BlobReader(const json& table, std::string_view data) : data_(data) {
    for (const auto& entry : table) entries_[entry.at("name").get<std::string>()] = entry;
  }

  const json& entry(const std::string& name) const {
    auto it = entries_.find(name);
    if (it == entries_.end()) throw CheckpointError(Kind::Corrupt, "missing blob '" + name + "'");
    return it->second;
  }

  std::string_view slice(const json& e) const {
    const auto offset = e.at("offset").get<std::size_t>();
    const auto size = e.at("size").get<std::size_t>();
    if (offset > data_.size() || size > data_.size() - offset)
      throw CheckpointError(Kind::Corrupt, "blob '" + e.at("name").get<std::string>() + "' out of bounds");
    return data_.substr(offset, size);
  }

  torch::Tensor tensor(const std::string& name) const {
    const auto& e = entry(name);
    if (e.at("kind") != "tensor") throw CheckpointError(Kind::Corrupt, "blob '" + name + "' is not a tensor");
    auto shape = e.at("shape").get<std::vector<int64_t>>();
    auto out = torch::empty(shape, torch::TensorOptions().dtype(dtype_from_name(e.at("dtype"))));
    auto bytes = slice(e);
    if (bytes.size() != static_cast<std::size_t>(out.numel()) * out.element_size())
      throw CheckpointError(Kind::Corrupt, "blob '" + name + "' size does not match its shape");
    std::memcpy(out.data_ptr(), bytes.data(), bytes.size());
    return out;
  }

  std::string bytes(const std::string& name) const { return std::string(slice(entry(name))); }

  std::vector<std::string> names_with_prefix(const std::string& prefix) const {
    std::vector<std::string> out;
    for (const auto& [name, e] : entries_) {
      if (name.rfind(prefix, 0) == 0) out.push_back(name);
    }
    return out;
  }

 private:
  std::string_view data_;
  std::map<std::string, json> entries_;
};

void write_buffer(BlobWriter& blobs, json& manifest, const std::string& key, const ReplayBufferSnapshot& snap) {
  manifest[key] = {{"capacity", snap.capacity}, {"size", snap.pool.size()}, {"rng_state", snap.rng_state}};
  for (std::size_t i = 0; i < snap.pool.size(); ++i) blobs.tensor(key + "/" + std::to_string(i), snap.pool[i]);
}

ReplayBufferSnapshot read_buffer(const BlobReader& blobs, const json& manifest, const std::string& key) {
  const auto& m = manifest.at(key);
  ReplayBufferSnapshot snap;
  snap.capacity = m.at("capacity").get<int>();
  snap.rng_state = m.at("rng_state").get<std::string>();
  const auto size = m.at("size").get<std::size_t>();
  for (std::size_t i = 0; i < size; ++i) snap.pool.push_back(blobs.tensor(key + "/" + std::to_string(i)));
  return snap;
}

}  // namespace

void save_checkpoint(const CheckpointState& state, const std::filesystem::path& path) {
  BlobWriter blobs;
  for (const auto& [name, tensor] : state.parameters) blobs.tensor("param/" + name, tensor);
  for (const auto& [role, data] : state.optimizer_states) blobs.bytes("optim/" + role, data);

  json manifest;
  manifest["format_version"] = kCheckpointFormatVersion;
  manifest["config_fingerprint"] = state.config_fingerprint;
  manifest["epoch"] = state.epoch;
  manifest["iteration"] = state.iteration;
  manifest["rng_state"] = state.rng_state;
  manifest["config"] = emit_config(state.config);
  write_buffer(blobs, manifest, "buffer_x", state.buffer_x);
  write_buffer(blobs, manifest, "buffer_y", state.buffer_y);
  manifest["blobs"] = blobs.table();

  const std::string manifest_text = manifest.dump();
  std::string out;
  out.append(kMagic, sizeof(kMagic));
  put<uint32_t>(out, kCheckpointFormatVersion);
  put<uint64_t>(out, manifest_text.size());
  out += manifest_text;
  out += blobs.data();
  put<uint64_t>(out, detail::fnv1a64(out));

  std::filesystem::create_directories(path.has_parent_path() ? path.parent_path() : ".");
  // Write-then-rename so an interrupted save never clobbers the previous checkpoint.
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream file(tmp, std::ios::binary | std::ios::trunc);
    if (!file) throw CheckpointError(Kind::Io, "cannot open " + tmp.string() + " for writing");
    file.write(out.data(), static_cast<std::streamsize>(out.size()));
    if (!file) throw CheckpointError(Kind::Io, "failed writing " + tmp.string());
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) throw CheckpointError(Kind::Io, "cannot move checkpoint into place: " + ec.message());
}

CheckpointState load_checkpoint(const std::filesystem::path& path) {
  std::ifstream file(path, std::ios::binary);
  if (!file) throw CheckpointError(Kind::Io, "cannot open checkpoint " + path.string());
  std::string data((std::istreambuf_iterator<char>(file)), std::istreambuf_iterator<char>());

  if (data.size() < sizeof(kMagic) + 4 + 8 + 8 || std::memcmp(data.data(), kMagic, sizeof(kMagic)) != 0)
    throw CheckpointError(Kind::Corrupt, path.string() + " is not a checkpoint file");
  uint64_t stored_sum;
  std::memcpy(&stored_sum, data.data() + data.size() - 8, 8);
  const std::string_view body(data.data(), data.size() - 8);
  if (detail::fnv1a64(body) != stored_sum)
    throw CheckpointError(Kind::Corrupt, path.string() + " failed its checksum (corrupt or truncated)");

  Reader reader(body);
  reader.take(sizeof(kMagic));
  const auto version = reader.get<uint32_t>();
  if (version != kCheckpointFormatVersion)
    throw CheckpointError(Kind::Corrupt, "unsupported checkpoint format version " + std::to_string(version));
  const auto manifest_len = reader.get<uint64_t>();
  const auto manifest_text = reader.take(manifest_len);
  const auto blob_data = body.substr(reader.position());

  CheckpointState state;
  try {
    const json manifest = json::parse(manifest_text);
    state.config_fingerprint = manifest.at("config_fingerprint").get<uint64_t>();
    state.epoch = manifest.at("epoch").get<int64_t>();
    state.iteration = manifest.at("iteration").get<int64_t>();
    state.rng_state = manifest.at("rng_state").get<std::string>();
    state.config = parse_run_settings(manifest.at("config").get<std::string>()).train;

    BlobReader blobs(manifest.at("blobs"), blob_data);
    for (const auto& name : blobs.names_with_prefix("param/")) state.parameters[name.substr(6)] = blobs.tensor(name);
    for (const auto& name : blobs.names_with_prefix("optim/"))
      state.optimizer_states[name.substr(6)] = blobs.bytes(name);
    state.buffer_x = read_buffer(blobs, manifest, "buffer_x");
    state.buffer_y = read_buffer(blobs, manifest, "buffer_y");
  } catch (const json::exception& e) {
    throw CheckpointError(Kind::Corrupt, "malformed checkpoint manifest: " + std::string(e.what()));
  } catch (const ParseError& e) {
    throw CheckpointError(Kind::Corrupt, "checkpoint holds an invalid config: " + std::string(e.what()));
  }
  if (fingerprint(state.config) != state.config_fingerprint)
    throw CheckpointError(Kind::Corrupt, "checkpoint config does not match its recorded fingerprint");
  return state;
}

CheckpointState load_checkpoint(const std::filesystem::path& path, const TrainConfig& expected) {
  auto state = load_checkpoint(path);
  if (state.config_fingerprint != fingerprint(expected)) {
    std::ostringstream msg;
    msg << "checkpoint " << path.string() << " was written for a different training config (fingerprint "
        << std::hex << state.config_fingerprint << ", expected " << fingerprint(expected) << ")";
    throw CheckpointError(Kind::ConfigMismatch, msg.str());
  }
  return state;
}

}  // namespace cyclegan
