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

#ifndef BYOLA_DSP_FEATURES_H_
#define BYOLA_DSP_FEATURES_H_

#include <complex>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "byola/audio_io.h"

namespace byola {

// Row-major T x F feature matrix (frames by bins).
using FeatureMatrix =
    Eigen::Array<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

struct MelConfig {
  int sample_rate = 16000;
  int n_mels = 64;
  double window_ms = 64.0;
  double hop_ms = 10.0;
  int fft_size = 0;  // 0 selects the next power of two >= window length
  double fmin = 0.0;
  double fmax = 8000.0;
  double log_floor = 1e-10;

  int WindowSamples() const;
  int HopSamples() const;
  int FftSize() const;
  void Validate() const;

  bool operator==(const MelConfig&) const = default;
};

struct LogMelSpectrogram {
  FeatureMatrix data;  // natural-log mel energies, frames x n_mels
  MelConfig config;

  int NumFrames() const { return static_cast<int>(data.rows()); }
  int NumBins() const { return static_cast<int>(data.cols()); }
};

// HTK mel scale: 2595 * log10(1 + f / 700).
double HzToMel(double hz);
double MelToHz(double mel);

// Frame count for a signal of `num_samples`: ceil(num_samples / hop).
int NumFrames(size_t num_samples, const MelConfig& config);

// Reusable extractor holding the window, filterbank and FFT plan.
class LogMelExtractor {
 public:
  explicit LogMelExtractor(const MelConfig& config);

  // Throws DataError("too short") when the waveform is shorter than one hop.
  LogMelSpectrogram Compute(const Waveform& wave) const;

  // Frames [first, first + count) of Compute(wave), computed directly.
  // Frame indices past NumFrames() are allowed and read reflected samples.
  LogMelSpectrogram ComputeFrames(const Waveform& wave, int first,
                                  int count) const;

  const MelConfig& config() const { return config_; }
  // Center frequency (Hz) of each triangular filter.
  const std::vector<double>& filter_centers() const { return centers_; }

 private:
  struct Filter {
    int first_bin = 0;
    std::vector<double> weights;
  };

  MelConfig config_;
  int window_ = 0;
  int hop_ = 0;
  int fft_size_ = 0;
  std::vector<double> window_fn_;
  std::vector<Filter> filters_;
  std::vector<double> centers_;
};

LogMelSpectrogram LogMel(const Waveform& wave, const MelConfig& config);

// Global (scalar) normalization statistics.
struct NormStats {
  double mean = 0.0;
  double std = 1.0;

  static constexpr double kStdFloor = 1e-5;
};

// Streaming Welford accumulator; shards can be merged.
class NormAccumulator {
 public:
  void Add(double value);
  void Add(const FeatureMatrix& cells);
  void Add(const LogMelSpectrogram& spec) { Add(spec.data); }
  void Merge(const NormAccumulator& other);

  uint64_t count() const { return count_; }
  // Throws DataError if nothing was accumulated.
  NormStats Finalize() const;

 private:
  uint64_t count_ = 0;
  double mean_ = 0.0;
  double m2_ = 0.0;
};

NormStats ComputeNormStats(std::span<const LogMelSpectrogram> corpus);

LogMelSpectrogram ApplyNorm(const LogMelSpectrogram& x, const NormStats& stats);

// 20-byte file: "NST1" followed by mean and std as little-endian float64.
void WriteNormStats(const std::string& path, const NormStats& stats);
NormStats ReadNormStats(const std::string& path);

}  // namespace byola

#endif  // BYOLA_DSP_FEATURES_H_
