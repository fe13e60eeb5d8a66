// SPDX-License-Identifier: Apache-2.0
#include "hrseq/checkpoint.hpp"

#include <algorithm>
#include <bit>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>

namespace hrseq {

namespace {

constexpr const char* kMagic = "hrseq-checkpoint 1";

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

template <typename T>
void write_le(std::ostream& out, T value) {
  static_assert(std::is_trivially_copyable_v<T>);
  unsigned char bytes[sizeof(T)];
  std::memcpy(bytes, &value, sizeof(T));
  if constexpr (std::endian::native == std::endian::big) std::reverse(bytes, bytes + sizeof(T));
  out.write(reinterpret_cast<const char*>(bytes), sizeof(T));
}

template <typename T>
T read_le(std::istream& in) {
  unsigned char bytes[sizeof(T)];
  if (!in.read(reinterpret_cast<char*>(bytes), sizeof(T))) {
    throw CheckpointError("checkpoint: truncated tensor section");
  }
  if constexpr (std::endian::native == std::endian::big) std::reverse(bytes, bytes + sizeof(T));
  T value;
  std::memcpy(&value, bytes, sizeof(T));
  return value;
}

void write_tensor(std::ostream& out, const std::string& name,
                  const std::vector<std::size_t>& dims, std::span<const double> values) {
  write_le<std::uint32_t>(out, static_cast<std::uint32_t>(name.size()));
  out.write(name.data(), static_cast<std::streamsize>(name.size()));
  write_le<std::uint32_t>(out, static_cast<std::uint32_t>(dims.size()));
  for (std::size_t d : dims) write_le<std::uint64_t>(out, d);
  for (double v : values) write_le<double>(out, v);
}

struct RawTensor {
  std::vector<std::size_t> dims;
  std::vector<double> values;
};

class Header {
 public:
  explicit Header(std::map<std::string, std::string> entries) : entries_(std::move(entries)) {}

  const std::string& text(const std::string& key) const {
    const auto it = entries_.find(key);
    if (it == entries_.end()) throw CheckpointError("checkpoint: header is missing '" + key + "'");
    return it->second;
  }
  std::size_t size(const std::string& key) const {
    try {
      return static_cast<std::size_t>(std::stoull(text(key)));
    } catch (const std::logic_error&) {
      throw CheckpointError("checkpoint: '" + key + "' is not an unsigned integer");
    }
  }
  double real(const std::string& key) const {
    try {
      return std::stod(text(key));
    } catch (const std::logic_error&) {
      throw CheckpointError("checkpoint: '" + key + "' is not a number");
    }
  }

 private:
  std::map<std::string, std::string> entries_;
};

}  // namespace

void save_checkpoint(std::ostream& out, const Checkpoint& ck) {
  const TrainConfig& tc = ck.train_config;
  const ModelConfig& mc = ck.params.config;
  out << kMagic << '\n';
  auto kv = [&out](const std::string& key, const std::string& value) {
    out << key << " = " << value << '\n';
  };
  kv("variant", std::string(to_string(mc.variant)));
  kv("vocab_size", std::to_string(mc.vocab_size));
  kv("embed_dim", std::to_string(mc.embed_dim));
  kv("word_hidden", std::to_string(mc.word_hidden));
  kv("word_layers", std::to_string(mc.word_layers));
  kv("sent_hidden", std::to_string(mc.sent_hidden));
  kv("dec_hidden", std::to_string(mc.dec_hidden));
  kv("attn_dim", std::to_string(mc.attn_dim));
  kv("num_window", std::to_string(tc.num_window));
  kv("batch_size", std::to_string(tc.batch_size));
  kv("init_range", format_double(tc.init_range));
  kv("lr", format_double(tc.adam.lr));
  kv("beta1", format_double(tc.adam.beta1));
  kv("beta2", format_double(tc.adam.beta2));
  kv("adam_epsilon", format_double(tc.adam.epsilon));
  kv("clip_norm", format_double(tc.clip_norm));
  kv("patience", std::to_string(tc.patience));
  kv("max_epochs", std::to_string(tc.max_epochs));
  kv("rng_seed", std::to_string(tc.seed));
  kv("threads", std::to_string(tc.threads));
  kv("epoch", std::to_string(ck.epoch));
  kv("adam_t", std::to_string(ck.adam.t));
  kv("history_size", std::to_string(ck.history.size()));
  for (std::size_t i = 0; i < ck.history.size(); ++i) {
    kv("history." + std::to_string(i + 1),
       format_double(ck.history[i].train_loss) + " " + format_double(ck.history[i].valid_loss));
  }
  out << '\n';

  const auto tensors = ck.params.tensors();
  const bool with_adam = ck.adam.m.dim() == ck.params.parameter_count();
  write_le<std::uint64_t>(out, tensors.size() * (with_adam ? 3 : 1));
  for (const auto& t : tensors) write_tensor(out, t.name, t.dims, t.values);
  if (with_adam) {
    std::size_t offset = 0;
    for (const auto& t : tensors) {
      const std::size_t n = t.values.size();
      write_tensor(out, "adam.m." + t.name, t.dims, ck.adam.m.values().subspan(offset, n));
      write_tensor(out, "adam.v." + t.name, t.dims, ck.adam.v.values().subspan(offset, n));
      offset += n;
    }
  }
  if (!out) throw CheckpointError("checkpoint: write failed");
}

void save_checkpoint_file(const std::string& path, const Checkpoint& checkpoint) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw CheckpointError("cannot write checkpoint '" + path + "'");
  save_checkpoint(out, checkpoint);
}

Checkpoint load_checkpoint(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || line != kMagic) {
    throw CheckpointError("checkpoint: bad magic line (expected '" + std::string(kMagic) + "')");
  }
  std::map<std::string, std::string> entries;
  while (std::getline(in, line) && !line.empty()) {
    const auto eq = line.find(" = ");
    if (eq == std::string::npos) throw CheckpointError("checkpoint: malformed header line '" + line + "'");
    entries[line.substr(0, eq)] = line.substr(eq + 3);
  }
  const Header header(std::move(entries));

  Checkpoint ck;
  ModelConfig mc;
  const auto variant = parse_variant(header.text("variant"));
  if (!variant) throw CheckpointError("checkpoint: unknown variant '" + header.text("variant") + "'");
  mc.variant = *variant;
  mc.vocab_size = header.size("vocab_size");
  mc.embed_dim = header.size("embed_dim");
  mc.word_hidden = header.size("word_hidden");
  mc.word_layers = header.size("word_layers");
  mc.sent_hidden = header.size("sent_hidden");
  mc.dec_hidden = header.size("dec_hidden");
  mc.attn_dim = header.size("attn_dim");

  TrainConfig& tc = ck.train_config;
  tc.embed_dim = mc.embed_dim;
  tc.word_hidden = mc.word_hidden;
  tc.word_layers = mc.word_layers;
  tc.sent_hidden = mc.sent_hidden;
  tc.dec_hidden = mc.dec_hidden;
  tc.attn_dim = mc.attn_dim;
  tc.num_window = header.size("num_window");
  tc.batch_size = header.size("batch_size");
  tc.init_range = header.real("init_range");
  tc.adam.lr = header.real("lr");
  tc.adam.beta1 = header.real("beta1");
  tc.adam.beta2 = header.real("beta2");
  tc.adam.epsilon = header.real("adam_epsilon");
  tc.clip_norm = header.real("clip_norm");
  tc.patience = header.size("patience");
  tc.max_epochs = header.size("max_epochs");
  tc.seed = static_cast<std::uint64_t>(std::stoull(header.text("rng_seed")));
  tc.threads = header.size("threads");
  ck.epoch = header.size("epoch");
  ck.adam.t = header.size("adam_t");
  const std::size_t history_size = header.size("history_size");
  for (std::size_t i = 1; i <= history_size; ++i) {
    const std::string& pair = header.text("history." + std::to_string(i));
    const auto space = pair.find(' ');
    if (space == std::string::npos) throw CheckpointError("checkpoint: malformed history entry");
    ck.history.push_back({std::stod(pair.substr(0, space)), std::stod(pair.substr(space + 1))});
  }

  try {
    ck.params = ModelParams(mc);
  } catch (const InvalidInput& e) {
    throw CheckpointError(std::string("checkpoint: invalid model configuration: ") + e.what());
  }

  std::map<std::string, RawTensor> raw;
  const auto count = read_le<std::uint64_t>(in);
  for (std::uint64_t k = 0; k < count; ++k) {
    const auto name_len = read_le<std::uint32_t>(in);
    std::string name(name_len, '\0');
    if (!in.read(name.data(), name_len)) throw CheckpointError("checkpoint: truncated tensor name");
    RawTensor t;
    const auto rank = read_le<std::uint32_t>(in);
    std::size_t n = 1;
    for (std::uint32_t r = 0; r < rank; ++r) {
      t.dims.push_back(static_cast<std::size_t>(read_le<std::uint64_t>(in)));
      n *= t.dims.back();
    }
    if (n > (std::size_t{1} << 34)) throw CheckpointError("checkpoint: tensor '" + name + "' too large");
    t.values.resize(n);
    for (double& v : t.values) v = read_le<double>(in);
    raw.emplace(std::move(name), std::move(t));
  }
  if (in.peek() != std::char_traits<char>::eof()) {
    throw CheckpointError("checkpoint: unexpected bytes after the tensor section");
  }

  auto fill = [&raw](const std::string& name, const std::vector<std::size_t>& dims,
                     std::span<double> dst) {
    const auto it = raw.find(name);
    if (it == raw.end()) throw CheckpointError("checkpoint: missing tensor '" + name + "'");
    if (it->second.dims != dims) throw CheckpointError("checkpoint: tensor '" + name + "' has wrong shape");
    std::copy(it->second.values.begin(), it->second.values.end(), dst.begin());
  };
  const std::size_t total = ck.params.parameter_count();
  const bool with_adam = raw.size() > ck.params.tensors().size();
  ck.adam.m = Vector(with_adam ? total : 0);
  ck.adam.v = Vector(with_adam ? total : 0);
  std::size_t offset = 0;
  for (auto& t : ck.params.tensors()) {
    fill(t.name, t.dims, t.values);
    if (with_adam) {
      fill("adam.m." + t.name, t.dims, ck.adam.m.values().subspan(offset, t.values.size()));
      fill("adam.v." + t.name, t.dims, ck.adam.v.values().subspan(offset, t.values.size()));
    }
    offset += t.values.size();
  }
  return ck;
}

Checkpoint load_checkpoint_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw CheckpointError("cannot open checkpoint '" + path + "'");
  return load_checkpoint(in);
}

}  // namespace hrseq
