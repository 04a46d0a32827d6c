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

#ifndef BYOLA_TESTS_TEST_UTIL_H_
#define BYOLA_TESTS_TEST_UTIL_H_

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <limits>
#include <numbers>
#include <random>
#include <string>
#include <vector>

#include "byola/audio_io.h"

namespace byola::testing {

// A fresh directory removed on destruction.
class TempDir {
 public:
  TempDir() {
    static int counter = 0;
    std::random_device rd;
    path_ = std::filesystem::temp_directory_path() /
            ("byola_test_" + std::to_string(rd()) + "_" + std::to_string(counter++));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  std::string File(const std::string& name) const { return (path_ / name).string(); }
  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
};

inline Waveform Tone(double freq, double seconds, int rate = 16000,
                     double amp = 0.5) {
  Waveform w;
  w.sample_rate = rate;
  w.samples.resize(static_cast<size_t>(std::llround(seconds * rate)));
  for (size_t i = 0; i < w.samples.size(); ++i) {
    w.samples[i] = static_cast<float>(
        amp * std::sin(2.0 * std::numbers::pi * freq * static_cast<double>(i) / rate));
  }
  return w;
}

inline Waveform WhiteNoise(double seconds, uint64_t seed, int rate = 16000,
                           double std = 0.1) {
  std::mt19937_64 gen(seed);
  std::normal_distribution<double> dist(0.0, std);
  Waveform w;
  w.sample_rate = rate;
  w.samples.resize(static_cast<size_t>(std::llround(seconds * rate)));
  for (auto& s : w.samples) s = static_cast<float>(dist(gen));
  return w;
}

// Magnitude of the Hann-windowed discrete-time Fourier transform at `freq`.
inline double DtftMagnitude(const std::vector<float>& x, int rate, double freq) {
  const size_t n = x.size();
  const double w = 2.0 * std::numbers::pi * freq / rate;
  std::complex<double> acc = 0.0;
  const std::complex<double> step = std::polar(1.0, -w);
  std::complex<double> rot = 1.0;
  for (size_t i = 0; i < n; ++i) {
    const double hann = 0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * i / (n - 1));
    acc += hann * static_cast<double>(x[i]) * rot;
    rot *= step;
    if ((i & 1023) == 1023) rot /= std::abs(rot);
  }
  return std::abs(acc);
}

// Frequency of the strongest spectral peak in [lo, hi]: a 0.5 Hz grid scan
// refined down to 0.005 Hz around the best point.
inline double PeakFrequency(const std::vector<float>& x, int rate, double lo,
                            double hi) {
  double best_f = lo, best = -1.0;
  for (double f = lo; f <= hi; f += 0.5) {
    double m = DtftMagnitude(x, rate, f);
    if (m > best) {
      best = m;
      best_f = f;
    }
  }
  for (double step : {0.05, 0.005}) {
    const double center = best_f;
    for (double f = center - 10 * step; f <= center + 10 * step; f += step) {
      double m = DtftMagnitude(x, rate, f);
      if (m > best) {
        best = m;
        best_f = f;
      }
    }
  }
  return best_f;
}

inline double Correlation(const std::vector<float>& a, const std::vector<float>& b) {
  const size_t n = std::min(a.size(), b.size());
  double ab = 0, aa = 0, bb = 0;
  for (size_t i = 0; i < n; ++i) {
    ab += static_cast<double>(a[i]) * b[i];
    aa += static_cast<double>(a[i]) * a[i];
    bb += static_cast<double>(b[i]) * b[i];
  }
  return ab / std::sqrt(aa * bb);
}

inline std::vector<uint8_t> ReadBytes(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

inline void WriteBytes(const std::string& path, const std::vector<uint8_t>& bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  out.write(reinterpret_cast<const char*>(bytes.data()),
            static_cast<std::streamsize>(bytes.size()));
}

// Minimal independent RIFF/WAVE writer for crafting test inputs.
inline std::vector<uint8_t> MakeWavBytes(const std::vector<int16_t>& interleaved,
                                         int channels, int rate,
                                         int bits = 16, int format = 1) {
  std::vector<uint8_t> b;
  auto u32 = [&](uint32_t v) {
    for (int i = 0; i < 4; ++i) b.push_back(static_cast<uint8_t>(v >> (8 * i)));
  };
  auto u16 = [&](uint16_t v) {
    b.push_back(static_cast<uint8_t>(v));
    b.push_back(static_cast<uint8_t>(v >> 8));
  };
  auto tag = [&](const char* t) { b.insert(b.end(), t, t + 4); };
  const uint32_t data_bytes = static_cast<uint32_t>(interleaved.size() * 2);
  tag("RIFF");
  u32(36 + data_bytes);
  tag("WAVE");
  tag("fmt ");
  u32(16);
  u16(static_cast<uint16_t>(format));
  u16(static_cast<uint16_t>(channels));
  u32(static_cast<uint32_t>(rate));
  u32(static_cast<uint32_t>(rate * channels * bits / 8));
  u16(static_cast<uint16_t>(channels * bits / 8));
  u16(static_cast<uint16_t>(bits));
  tag("data");
  u32(data_bytes);
  for (int16_t s : interleaved) u16(static_cast<uint16_t>(s));
  return b;
}

// Bitwise reflected CRC-32, independent of the zlib one under test.
inline uint32_t ReferenceCrc32(const uint8_t* data, size_t size) {
  uint32_t crc = 0xffffffffu;
  for (size_t i = 0; i < size; ++i) {
    crc ^= data[i];
    for (int b = 0; b < 8; ++b) crc = (crc >> 1) ^ (0xedb88320u & (0u - (crc & 1u)));
  }
  return ~crc;
}

// Minimum accumulated Euclidean cost over every monotone path with steps
// (1,0), (0,1), (1,1), found by walking each path explicitly.
inline double BruteForceDtwCost(const std::vector<std::vector<double>>& a,
                                const std::vector<std::vector<double>>& b) {
  const int n = static_cast<int>(a.size()), m = static_cast<int>(b.size());
  std::vector<double> local(static_cast<size_t>(n * m));
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < m; ++j) {
      double s = 0.0;
      for (size_t k = 0; k < a[i].size(); ++k) s += (a[i][k] - b[j][k]) * (a[i][k] - b[j][k]);
      local[i * m + j] = std::sqrt(s);
    }
  }
  double best = std::numeric_limits<double>::infinity();
  auto walk = [&](auto&& self, int i, int j, double acc) -> void {
    acc += local[i * m + j];
    if (i == n - 1 && j == m - 1) {
      best = std::min(best, acc);
      return;
    }
    if (i + 1 < n) self(self, i + 1, j, acc);
    if (j + 1 < m) self(self, i, j + 1, acc);
    if (i + 1 < n && j + 1 < m) self(self, i + 1, j + 1, acc);
  };
  walk(walk, 0, 0, 0.0);
  return best;
}

}  // namespace byola::testing

#endif  // BYOLA_TESTS_TEST_UTIL_H_
