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

#include "byola/audio_io.h"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <iterator>
#include <map>
#include <memory>
#include <mutex>
#include <numbers>
#include <numeric>

#include "byola/errors.h"

namespace byola {

void Waveform::Validate() const {
  if (sample_rate <= 0) {
    throw DataError("waveform: sample rate must be positive, got " +
                    std::to_string(sample_rate));
  }
  for (float s : samples) {
    if (!std::isfinite(s)) throw DataError("waveform: non-finite sample");
  }
}

namespace {

uint16_t ReadU16(const uint8_t* p) {
  return static_cast<uint16_t>(p[0] | (p[1] << 8));
}

uint32_t ReadU32(const uint8_t* p) {
  return static_cast<uint32_t>(p[0]) | (static_cast<uint32_t>(p[1]) << 8) |
         (static_cast<uint32_t>(p[2]) << 16) |
         (static_cast<uint32_t>(p[3]) << 24);
}

void PutU16(std::vector<uint8_t>* out, uint16_t v) {
  out->push_back(static_cast<uint8_t>(v & 0xff));
  out->push_back(static_cast<uint8_t>(v >> 8));
}

void PutU32(std::vector<uint8_t>* out, uint32_t v) {
  for (int i = 0; i < 4; ++i) out->push_back(static_cast<uint8_t>(v >> (8 * i)));
}

void PutTag(std::vector<uint8_t>* out, const char* tag) {
  out->insert(out->end(), tag, tag + 4);
}

constexpr uint16_t kFormatPcm = 1;
constexpr uint16_t kFormatExtensible = 0xFFFE;

}  // namespace

Waveform LoadWav(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw WavError(WavErrorKind::kMissingFile, "cannot open wav file " + path);
  }
  std::vector<uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                             std::istreambuf_iterator<char>());
  auto malformed = [&path](const std::string& why) {
    return WavError(WavErrorKind::kMalformedHeader,
                    "malformed RIFF header in " + path + ": " + why);
  };
  if (bytes.size() < 12) throw malformed("file shorter than RIFF header");
  if (std::memcmp(bytes.data(), "RIFF", 4) != 0) {
    throw malformed("magic is not RIFF");
  }
  if (std::memcmp(bytes.data() + 8, "WAVE", 4) != 0) {
    throw malformed("form type is not WAVE");
  }

  bool have_fmt = false;
  uint16_t format = 0, channels = 0, bits = 0;
  uint32_t rate = 0;
  const uint8_t* data = nullptr;
  size_t data_size = 0;

  size_t pos = 12;
  while (pos + 8 <= bytes.size()) {
    const uint8_t* chunk = bytes.data() + pos;
    uint32_t chunk_size = ReadU32(chunk + 4);
    size_t body = pos + 8;
    size_t available = bytes.size() - body;
    if (std::memcmp(chunk, "fmt ", 4) == 0) {
      if (chunk_size < 16 || available < 16) throw malformed("short fmt chunk");
      const uint8_t* f = bytes.data() + body;
      format = ReadU16(f);
      channels = ReadU16(f + 2);
      rate = ReadU32(f + 4);
      bits = ReadU16(f + 14);
      if (format == kFormatExtensible && chunk_size >= 26 && available >= 26) {
        format = ReadU16(f + 24);  // first two bytes of the subformat GUID
      }
      have_fmt = true;
    } else if (std::memcmp(chunk, "data", 4) == 0) {
      if (!have_fmt) throw malformed("data chunk before fmt chunk");
      data = bytes.data() + body;
      // Tolerate writers that leave the size field unset or too large.
      data_size = std::min<size_t>(chunk_size, available);
      break;
    }
    pos = body + chunk_size + (chunk_size & 1);
  }
  if (!have_fmt) throw malformed("missing fmt chunk");
  if (data == nullptr) throw malformed("missing data chunk");
  if (channels == 0) throw malformed("zero channels");
  if (rate == 0) throw malformed("zero sample rate");
  if (format != kFormatPcm || bits != 16) {
    throw WavError(WavErrorKind::kUnsupportedEncoding,
                   "unsupported encoding in " + path + ": format " +
                       std::to_string(format) + ", " + std::to_string(bits) +
                       " bits (only 16-bit PCM is supported)");
  }

  Waveform wave;
  wave.sample_rate = static_cast<int>(rate);
  size_t frame_bytes = 2u * channels;
  size_t num_frames = data_size / frame_bytes;
  wave.samples.resize(num_frames);
  for (size_t i = 0; i < num_frames; ++i) {
    const uint8_t* frame = data + i * frame_bytes;
    double acc = 0.0;
    for (int c = 0; c < channels; ++c) {
      acc += static_cast<int16_t>(ReadU16(frame + 2 * c)) / 32768.0;
    }
    wave.samples[i] = static_cast<float>(acc / channels);
  }
  return wave;
}

void SaveWav(const std::string& path, const Waveform& wave) {
  if (wave.sample_rate <= 0) throw DataError("SaveWav: invalid sample rate");
  uint32_t data_bytes = static_cast<uint32_t>(wave.samples.size() * 2);
  std::vector<uint8_t> out;
  out.reserve(44 + data_bytes);
  PutTag(&out, "RIFF");
  PutU32(&out, 36 + data_bytes);
  PutTag(&out, "WAVE");
  PutTag(&out, "fmt ");
  PutU32(&out, 16);
  PutU16(&out, kFormatPcm);
  PutU16(&out, 1);
  PutU32(&out, static_cast<uint32_t>(wave.sample_rate));
  PutU32(&out, static_cast<uint32_t>(wave.sample_rate) * 2);
  PutU16(&out, 2);
  PutU16(&out, 16);
  PutTag(&out, "data");
  PutU32(&out, data_bytes);
  constexpr double kMax = 1.0 - 1.0 / 32768.0;
  for (float s : wave.samples) {
    double clamped = std::clamp(static_cast<double>(s), -1.0, kMax);
    long code = std::lround(clamped * 32768.0);
    code = std::clamp(code, -32768L, 32767L);
    PutU16(&out, static_cast<uint16_t>(static_cast<int16_t>(code)));
  }
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) {
    throw WavError(WavErrorKind::kUnwritable, "cannot write wav file " + path);
  }
  os.write(reinterpret_cast<const char*>(out.data()),
           static_cast<std::streamsize>(out.size()));
  if (!os) {
    throw WavError(WavErrorKind::kUnwritable, "write failed for " + path);
  }
}

namespace {

// Windowed-sinc kernel: Kaiser window, cutoff at 0.95 of the Nyquist
// frequency of the lower rate, 32 taps measured at the lower rate.
constexpr int kHalfTaps = 16;
constexpr double kCutoff = 0.95;
constexpr double kKaiserBeta = 8.0;
constexpr int kInterpolatedPhases = 512;
constexpr int64_t kMaxExactPhases = 4096;

double KernelAt(double u) {
  if (std::abs(u) >= kHalfTaps) return 0.0;
  double x = kCutoff * u;
  double sinc = x == 0.0 ? 1.0
                         : std::sin(std::numbers::pi * x) / (std::numbers::pi * x);
  double r = u / kHalfTaps;
  double window = std::cyl_bessel_i(0.0, kKaiserBeta * std::sqrt(1.0 - r * r)) /
                  std::cyl_bessel_i(0.0, kKaiserBeta);
  return sinc * window;
}

// Row p holds the taps for an output instant that lies p/num_phases of an
// input sample after `base`; tap k multiplies input[base - half + 1 + k].
class PolyphaseTable {
 public:
  PolyphaseTable(double ratio, int num_phases)
      : num_phases_(num_phases),
        half_(static_cast<int>(std::ceil(kHalfTaps / std::min(1.0, ratio)))),
        taps_(2 * half_),
        coeffs_(static_cast<size_t>(num_phases + 1) * taps_) {
    double scale = std::min(1.0, ratio);
    for (int p = 0; p <= num_phases; ++p) {
      double frac = static_cast<double>(p) / num_phases;
      float* row = &coeffs_[static_cast<size_t>(p) * taps_];
      double sum = 0.0;
      std::vector<double> tmp(taps_);
      for (int k = 0; k < taps_; ++k) {
        double d = frac + (half_ - 1) - k;
        tmp[k] = KernelAt(d * scale);
        sum += tmp[k];
      }
      for (int k = 0; k < taps_; ++k) row[k] = static_cast<float>(tmp[k] / sum);
    }
  }

  int half() const { return half_; }
  int taps() const { return taps_; }
  int num_phases() const { return num_phases_; }
  const float* Row(int p) const {
    return &coeffs_[static_cast<size_t>(p) * taps_];
  }

 private:
  int num_phases_;
  int half_;
  int taps_;
  std::vector<float> coeffs_;
};

std::shared_ptr<const PolyphaseTable> GetTable(double ratio, int num_phases) {
  static std::mutex mu;
  static std::map<std::pair<double, int>, std::shared_ptr<const PolyphaseTable>>
      cache;
  std::lock_guard<std::mutex> lock(mu);
  auto key = std::make_pair(ratio, num_phases);
  auto it = cache.find(key);
  if (it != cache.end()) return it->second;
  auto table = std::make_shared<const PolyphaseTable>(ratio, num_phases);
  cache.emplace(key, table);
  return table;
}

double Dot(std::span<const float> input, int64_t first, const float* taps,
           int num_taps) {
  int64_t n = static_cast<int64_t>(input.size());
  int k0 = static_cast<int>(std::max<int64_t>(0, -first));
  int k1 = static_cast<int>(std::min<int64_t>(num_taps, n - first));
  float acc = 0.0f;
  for (int k = k0; k < k1; ++k) acc += taps[k] * input[first + k];
  return acc;
}

}  // namespace

std::vector<float> ResampleByRatio(std::span<const float> input, double ratio,
                                   size_t out_len) {
  if (!(ratio > 0.0)) throw DataError("resample: ratio must be positive");
  std::vector<float> out(out_len, 0.0f);
  if (input.empty()) return out;
  auto table = GetTable(ratio, kInterpolatedPhases);
  const int taps = table->taps();
  std::vector<float> row(taps);
  for (size_t n = 0; n < out_len; ++n) {
    double t = static_cast<double>(n) / ratio;
    double base = std::floor(t);
    double pos = (t - base) * kInterpolatedPhases;
    int p = std::min(static_cast<int>(pos), kInterpolatedPhases - 1);
    float a = static_cast<float>(pos - p);
    const float* r0 = table->Row(p);
    const float* r1 = table->Row(p + 1);
    for (int k = 0; k < taps; ++k) row[k] = r0[k] + a * (r1[k] - r0[k]);
    int64_t first = static_cast<int64_t>(base) - table->half() + 1;
    out[n] = static_cast<float>(Dot(input, first, row.data(), taps));
  }
  return out;
}

Waveform Resample(const Waveform& wave, int target_rate) {
  if (target_rate <= 0 || wave.sample_rate <= 0) {
    throw DataError("resample: rates must be positive");
  }
  if (target_rate == wave.sample_rate) return wave;
  Waveform out;
  out.sample_rate = target_rate;
  size_t out_len = static_cast<size_t>(std::llround(
      static_cast<double>(wave.samples.size()) * target_rate / wave.sample_rate));
  int64_t g = std::gcd<int64_t>(target_rate, wave.sample_rate);
  int64_t up = target_rate / g;
  int64_t down = wave.sample_rate / g;
  double ratio = static_cast<double>(target_rate) / wave.sample_rate;
  if (up > kMaxExactPhases) {
    out.samples = ResampleByRatio(wave.samples, ratio, out_len);
    return out;
  }
  // Output n sits at input time n * down / up: integer part and exact phase.
  auto table = GetTable(ratio, static_cast<int>(up));
  std::span<const float> input(wave.samples);
  out.samples.resize(out_len);
  for (size_t n = 0; n < out_len; ++n) {
    int64_t num = static_cast<int64_t>(n) * down;
    int64_t base = num / up;
    int phase = static_cast<int>(num % up);
    int64_t first = base - table->half() + 1;
    out.samples[n] = static_cast<float>(
        Dot(input, first, table->Row(phase), table->taps()));
  }
  return out;
}

}  // namespace byola
