// Copyright 2026 The byola-speaker Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//   http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "byola/checkpoint.h"

#include <zlib.h>

#include <cstring>
#include <fstream>
#include <iterator>
#include <map>

#include "byola/errors.h"

namespace byola {
namespace {

constexpr char kMagic[4] = {'B', 'Y', 'L', 'C'};
constexpr uint8_t kF32 = 0;
constexpr uint8_t kF64 = 1;

class Writer {
 public:
  template <typename T>
  void Put(T v) {
    uint8_t b[sizeof(T)];
    std::memcpy(b, &v, sizeof(T));
    bytes_.insert(bytes_.end(), b, b + sizeof(T));
  }

  template <typename T>
  void Array(const std::string& name, const std::vector<int>& shape,
             std::span<const T> values) {
    static_assert(std::is_same_v<T, float> || std::is_same_v<T, double>);
    Put<uint16_t>(static_cast<uint16_t>(name.size()));
    bytes_.insert(bytes_.end(), name.begin(), name.end());
    Put<uint8_t>(std::is_same_v<T, float> ? kF32 : kF64);
    Put<uint8_t>(static_cast<uint8_t>(shape.size()));
    for (int d : shape) Put<uint32_t>(static_cast<uint32_t>(d));
    for (T v : values) Put<T>(v);
  }

  void Vector(const std::string& name, const std::vector<double>& values) {
    Array<double>(name, {static_cast<int>(values.size())},
                  std::span<const double>(values));
  }

  std::vector<uint8_t>& bytes() { return bytes_; }

 private:
  std::vector<uint8_t> bytes_;
};

struct RawArray {
  uint8_t dtype = kF64;
  std::vector<int> shape;
  std::vector<double> f64;
  std::vector<float> f32;
};

class Reader {
 public:
  Reader(const uint8_t* data, size_t size) : data_(data), size_(size) {}

  template <typename T>
  T Get() {
    Need(sizeof(T));
    T v;
    std::memcpy(&v, data_ + pos_, sizeof(T));
    pos_ += sizeof(T);
    return v;
  }

  bool done() const { return pos_ == size_; }

  std::pair<std::string, RawArray> Next() {
    const uint16_t len = Get<uint16_t>();
    Need(len);
    std::string name(reinterpret_cast<const char*>(data_ + pos_), len);
    pos_ += len;
    RawArray a;
    a.dtype = Get<uint8_t>();
    if (a.dtype != kF32 && a.dtype != kF64) {
      throw CheckpointError(CheckpointErrorKind::kMalformed,
                            "checkpoint: unknown dtype for array " + name);
    }
    const uint8_t rank = Get<uint8_t>();
    uint64_t count = 1;
    for (int i = 0; i < rank; ++i) {
      uint32_t d = Get<uint32_t>();
      a.shape.push_back(static_cast<int>(d));
      count *= d;
      if (count > size_) {
        throw CheckpointError(CheckpointErrorKind::kTruncated,
                              "checkpoint: array " + name + " exceeds file size");
      }
    }
    if (a.dtype == kF32) {
      Need(count * 4);
      a.f32.resize(count);
      std::memcpy(a.f32.data(), data_ + pos_, count * 4);
      pos_ += count * 4;
    } else {
      Need(count * 8);
      a.f64.resize(count);
      std::memcpy(a.f64.data(), data_ + pos_, count * 8);
      pos_ += count * 8;
    }
    return {std::move(name), std::move(a)};
  }

 private:
  void Need(size_t n) const {
    if (size_ - pos_ < n) {
      throw CheckpointError(CheckpointErrorKind::kTruncated,
                            "checkpoint: unexpected end of data");
    }
  }

  const uint8_t* data_;
  size_t size_;
  size_t pos_ = 0;
};

uint32_t Crc32(const uint8_t* data, size_t size) {
  uLong crc = crc32(0L, Z_NULL, 0);
  return static_cast<uint32_t>(crc32(crc, data, static_cast<uInt>(size)));
}

void PutSpec(Writer* w, const std::string& prefix, const NetworkSpec& spec) {
  std::vector<double> input(spec.input_shape.begin(), spec.input_shape.end());
  w->Vector(prefix + ".input", input);
  std::vector<double> layers;
  for (const auto& l : spec.layers) {
    layers.push_back(static_cast<double>(l.kind));
    layers.push_back(l.units);
  }
  w->Array<double>(prefix + ".layers",
                   {static_cast<int>(spec.layers.size()), 2}, layers);
}

void PutParams(Writer* w, const std::string& prefix,
               const ParameterSet<float>& params) {
  for (const auto& a : params.arrays()) {
    w->Array<float>(prefix + "." + a.name, a.shape,
                    std::span<const float>(a.values));
  }
}

[[noreturn]] void Malformed(const std::string& what) {
  throw CheckpointError(CheckpointErrorKind::kMalformed, "checkpoint: " + what);
}

class ArrayTable {
 public:
  explicit ArrayTable(std::map<std::string, RawArray> arrays)
      : arrays_(std::move(arrays)) {}

  const RawArray& Get(const std::string& name) const {
    auto it = arrays_.find(name);
    if (it == arrays_.end()) Malformed("missing array " + name);
    return it->second;
  }

  const std::vector<double>& F64(const std::string& name, size_t expected) const {
    const RawArray& a = Get(name);
    if (a.dtype != kF64) Malformed("array " + name + " must be f64");
    if (expected != 0 && a.f64.size() != expected) {
      Malformed("array " + name + " has the wrong size");
    }
    return a.f64;
  }

  NetworkSpec Spec(const std::string& prefix) const {
    NetworkSpec spec;
    for (double d : F64(prefix + ".input", 0)) spec.input_shape.push_back(static_cast<int>(d));
    const RawArray& layers = Get(prefix + ".layers");
    if (layers.dtype != kF64 || layers.shape.size() != 2 || layers.shape[1] != 2) {
      Malformed("array " + prefix + ".layers must be f64 L x 2");
    }
    for (int i = 0; i < layers.shape[0]; ++i) {
      double kind = layers.f64[2 * i];
      if (kind < 0 || kind > static_cast<double>(LayerKind::kLinear) ||
          kind != static_cast<int>(kind)) {
        Malformed("unknown layer kind in " + prefix);
      }
      spec.layers.push_back({static_cast<LayerKind>(static_cast<int>(kind)),
                             static_cast<int>(layers.f64[2 * i + 1])});
    }
    try {
      spec.LayerShapes();
    } catch (const ShapeError& e) {
      Malformed(prefix + " does not describe a valid network: " + e.what());
    }
    return spec;
  }

  // Fills the arrays of `like` (names and shapes) from "<prefix>.<name>".
  ParameterSet<float> Params(const std::string& prefix,
                             const ParameterSet<float>& like) const {
    ParameterSet<float> out;
    for (const auto& ref : like.arrays()) {
      const RawArray& a = Get(prefix + "." + ref.name);
      if (a.dtype != kF32 || a.shape != ref.shape) {
        Malformed("array " + prefix + "." + ref.name + " has the wrong shape");
      }
      out.Add({ref.name, ref.shape, AlignedVector<float>(a.f32.begin(), a.f32.end())});
    }
    return out;
  }

 private:
  std::map<std::string, RawArray> arrays_;
};

}  // namespace

std::vector<uint8_t> SerializeCheckpoint(const Checkpoint& ck) {
  Writer w;
  for (char c : kMagic) w.Put<char>(c);
  w.Put<uint32_t>(kCheckpointVersion);

  const MelConfig& m = ck.mel;
  w.Vector("meta.mel", {static_cast<double>(m.sample_rate),
                        static_cast<double>(m.n_mels), m.window_ms, m.hop_ms,
                        static_cast<double>(m.fft_size), m.fmin, m.fmax,
                        m.log_floor});
  w.Vector("meta.stats", {ck.stats.mean, ck.stats.std});
  w.Vector("meta.run", {static_cast<double>(ck.state.step),
                        static_cast<double>(ck.seed >> 32),
                        static_cast<double>(ck.seed & 0xffffffffu),
                        static_cast<double>(ck.segment_frames)});
  PutSpec(&w, "spec.encoder", ck.state.encoder);
  PutSpec(&w, "spec.projector", ck.state.projector);
  PutSpec(&w, "spec.predictor", ck.state.predictor);
  const AdamConfig& ac = ck.state.adam.config;
  w.Vector("adam.config", {ac.lr, ac.beta1, ac.beta2, ac.eps});
  w.Vector("adam.step", {static_cast<double>(ck.state.adam.step)});
  PutParams(&w, "online", ck.state.online);
  PutParams(&w, "target", ck.state.target);
  PutParams(&w, "adam.m", ck.state.adam.m);
  PutParams(&w, "adam.v", ck.state.adam.v);

  std::vector<uint8_t>& bytes = w.bytes();
  uint32_t crc = Crc32(bytes.data(), bytes.size());
  w.Put<uint32_t>(crc);
  return std::move(bytes);
}

Checkpoint DeserializeCheckpoint(const std::vector<uint8_t>& bytes) {
  if (bytes.size() < 12) {
    throw CheckpointError(CheckpointErrorKind::kTruncated,
                          "checkpoint: file too short");
  }
  if (std::memcmp(bytes.data(), kMagic, 4) != 0) {
    throw CheckpointError(CheckpointErrorKind::kBadMagic,
                          "checkpoint: bad magic, not a checkpoint file");
  }
  uint32_t version;
  std::memcpy(&version, bytes.data() + 4, 4);
  if (version != kCheckpointVersion) {
    throw CheckpointError(CheckpointErrorKind::kVersion,
                          "checkpoint: unsupported version " +
                              std::to_string(version) + " (expected " +
                              std::to_string(kCheckpointVersion) + ")");
  }
  const size_t body = bytes.size() - 4;
  uint32_t stored;
  std::memcpy(&stored, bytes.data() + body, 4);
  if (Crc32(bytes.data(), body) != stored) {
    throw CheckpointError(CheckpointErrorKind::kChecksum,
                          "checkpoint: checksum mismatch (file corrupt or truncated)");
  }

  Reader r(bytes.data() + 8, body - 8);
  std::map<std::string, RawArray> arrays;
  while (!r.done()) {
    auto [name, array] = r.Next();
    if (!arrays.emplace(name, std::move(array)).second) {
      Malformed("duplicate array " + name);
    }
  }
  ArrayTable t(std::move(arrays));

  Checkpoint ck;
  const auto& mel = t.F64("meta.mel", 8);
  ck.mel.sample_rate = static_cast<int>(mel[0]);
  ck.mel.n_mels = static_cast<int>(mel[1]);
  ck.mel.window_ms = mel[2];
  ck.mel.hop_ms = mel[3];
  ck.mel.fft_size = static_cast<int>(mel[4]);
  ck.mel.fmin = mel[5];
  ck.mel.fmax = mel[6];
  ck.mel.log_floor = mel[7];
  try {
    ck.mel.Validate();
  } catch (const Error& e) {
    Malformed(std::string("invalid mel settings: ") + e.what());
  }
  const auto& stats = t.F64("meta.stats", 2);
  ck.stats = {stats[0], stats[1]};
  const auto& run = t.F64("meta.run", 4);
  ck.state.step = static_cast<int64_t>(run[0]);
  ck.seed = (static_cast<uint64_t>(run[1]) << 32) | static_cast<uint64_t>(run[2]);
  ck.segment_frames = static_cast<int>(run[3]);

  ck.state.encoder = t.Spec("spec.encoder");
  ck.state.projector = t.Spec("spec.projector");
  ck.state.predictor = t.Spec("spec.predictor");
  NetworkSpec online_spec, target_spec;
  try {
    online_spec = ck.state.OnlineSpec();
    target_spec = ck.state.TargetSpec();
    online_spec.LayerShapes();
  } catch (const ShapeError& e) {
    Malformed(std::string("sub-networks do not chain: ") + e.what());
  }
  // Shapes come from a throwaway init of the stored architecture.
  Rng rng(0);
  ParameterSet<float> online_like = InitParameters<float>(online_spec, &rng);
  ParameterSet<float> target_like = InitParameters<float>(target_spec, &rng);
  ck.state.online = t.Params("online", online_like);
  ck.state.target = t.Params("target", target_like);
  const auto& ac = t.F64("adam.config", 4);
  ck.state.adam.config = {ac[0], ac[1], ac[2], ac[3]};
  ck.state.adam.step = static_cast<int64_t>(t.F64("adam.step", 1)[0]);
  ck.state.adam.m = t.Params("adam.m", online_like);
  ck.state.adam.v = t.Params("adam.v", online_like);
  return ck;
}

void SaveCheckpoint(const Checkpoint& checkpoint, const std::string& path) {
  std::vector<uint8_t> bytes = SerializeCheckpoint(checkpoint);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  out.write(reinterpret_cast<const char*>(bytes.data()),
            static_cast<std::streamsize>(bytes.size()));
  out.close();
  if (!out) {
    throw CheckpointError(CheckpointErrorKind::kIo,
                          "checkpoint: cannot write " + path);
  }
}

Checkpoint LoadCheckpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw CheckpointError(CheckpointErrorKind::kIo,
                          "checkpoint: cannot open " + path);
  }
  std::vector<uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                             std::istreambuf_iterator<char>());
  return DeserializeCheckpoint(bytes);
}

}  // namespace byola
