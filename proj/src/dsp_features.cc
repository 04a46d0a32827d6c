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

#include "byola/dsp_features.h"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <numbers>

#include <unsupported/Eigen/FFT>

#include "byola/errors.h"

namespace byola {

int MelConfig::WindowSamples() const {
  return static_cast<int>(std::lround(window_ms * sample_rate / 1000.0));
}

int MelConfig::HopSamples() const {
  return static_cast<int>(std::lround(hop_ms * sample_rate / 1000.0));
}

int MelConfig::FftSize() const {
  if (fft_size > 0) return fft_size;
  return static_cast<int>(
      std::bit_ceil(static_cast<unsigned>(std::max(1, WindowSamples()))));
}

void MelConfig::Validate() const {
  if (sample_rate <= 0) throw DataError("mel config: sample_rate must be > 0");
  if (n_mels < 1) throw DataError("mel config: n_mels must be >= 1");
  if (!(hop_ms > 0.0) || hop_ms > window_ms) {
    throw DataError("mel config: need 0 < hop_ms <= window_ms");
  }
  if (HopSamples() < 1) throw DataError("mel config: hop shorter than a sample");
  if (FftSize() < WindowSamples()) {
    throw DataError("mel config: fft_size smaller than the window");
  }
  if (!(fmin >= 0.0 && fmin < fmax && fmax <= sample_rate / 2.0)) {
    throw DataError("mel config: need 0 <= fmin < fmax <= sample_rate / 2");
  }
  if (!(log_floor > 0.0)) throw DataError("mel config: log_floor must be > 0");
}

double HzToMel(double hz) { return 2595.0 * std::log10(1.0 + hz / 700.0); }

double MelToHz(double mel) {
  return 700.0 * (std::pow(10.0, mel / 2595.0) - 1.0);
}

int NumFrames(size_t num_samples, const MelConfig& config) {
  size_t hop = static_cast<size_t>(config.HopSamples());
  return static_cast<int>((num_samples + hop - 1) / hop);
}

namespace {

// Reflection about the first and last samples (no edge repeat), folded as
// many times as needed for signals shorter than the pad.
int64_t ReflectIndex(int64_t i, int64_t n) {
  if (n == 1) return 0;
  int64_t period = 2 * (n - 1);
  i %= period;
  if (i < 0) i += period;
  return i < n ? i : period - i;
}

}  // namespace

LogMelExtractor::LogMelExtractor(const MelConfig& config) : config_(config) {
  config_.Validate();
  window_ = config_.WindowSamples();
  hop_ = config_.HopSamples();
  fft_size_ = config_.FftSize();

  window_fn_.resize(window_);
  for (int n = 0; n < window_; ++n) {
    window_fn_[n] =
        0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * n / window_);
  }

  const int num_bins = fft_size_ / 2 + 1;
  const double mel_lo = HzToMel(config_.fmin);
  const double mel_hi = HzToMel(config_.fmax);
  std::vector<double> edges(config_.n_mels + 2);
  for (int i = 0; i < config_.n_mels + 2; ++i) {
    edges[i] = MelToHz(mel_lo + (mel_hi - mel_lo) * i / (config_.n_mels + 1));
  }
  filters_.resize(config_.n_mels);
  centers_.resize(config_.n_mels);
  for (int m = 0; m < config_.n_mels; ++m) {
    const double lo = edges[m], mid = edges[m + 1], hi = edges[m + 2];
    centers_[m] = mid;
    Filter& filter = filters_[m];
    int first = -1;
    for (int k = 0; k < num_bins; ++k) {
      double hz = static_cast<double>(k) * config_.sample_rate / fft_size_;
      double w = std::max(0.0, std::min((hz - lo) / (mid - lo),
                                        (hi - hz) / (hi - mid)));
      if (w > 0.0) {
        if (first < 0) first = k;
        filter.weights.resize(k - first + 1, 0.0);
        filter.weights[k - first] = w;
      }
    }
    filter.first_bin = std::max(first, 0);
  }
}

LogMelSpectrogram LogMelExtractor::Compute(const Waveform& wave) const {
  return ComputeFrames(wave, 0, NumFrames(wave.size(), config_));
}

LogMelSpectrogram LogMelExtractor::ComputeFrames(const Waveform& wave,
                                                 int first, int count) const {
  if (wave.sample_rate != config_.sample_rate) {
    throw DataError("log_mel: waveform rate " +
                    std::to_string(wave.sample_rate) + " != config rate " +
                    std::to_string(config_.sample_rate));
  }
  if (wave.size() < static_cast<size_t>(hop_)) {
    throw DataError("log_mel: waveform too short (" +
                    std::to_string(wave.size()) + " samples < one hop of " +
                    std::to_string(hop_) + ")");
  }
  if (first < 0 || count < 0) throw DataError("log_mel: negative frame range");

  LogMelSpectrogram out;
  out.config = config_;
  out.data.resize(count, config_.n_mels);

  const int64_t n = static_cast<int64_t>(wave.size());
  const double log_floor = std::log(config_.log_floor);
  Eigen::FFT<double> fft;
  fft.SetFlag(Eigen::FFT<double>::HalfSpectrum);
  std::vector<double> frame(fft_size_, 0.0);
  std::vector<std::complex<double>> spectrum;
  std::vector<double> power(fft_size_ / 2 + 1);

  for (int t = 0; t < count; ++t) {
    const int64_t start = static_cast<int64_t>(first + t) * hop_ - window_ / 2;
    for (int i = 0; i < window_; ++i) {
      int64_t idx = start + i;
      if (idx < 0 || idx >= n) idx = ReflectIndex(idx, n);
      frame[i] = window_fn_[i] * wave.samples[idx];
    }
    fft.fwd(spectrum, frame);
    for (size_t k = 0; k < power.size(); ++k) power[k] = std::norm(spectrum[k]);
    for (int m = 0; m < config_.n_mels; ++m) {
      const Filter& filter = filters_[m];
      double energy = 0.0;
      for (size_t j = 0; j < filter.weights.size(); ++j) {
        energy += filter.weights[j] * power[filter.first_bin + j];
      }
      out.data(t, m) = energy > config_.log_floor ? std::log(energy) : log_floor;
    }
  }
  return out;
}

LogMelSpectrogram LogMel(const Waveform& wave, const MelConfig& config) {
  return LogMelExtractor(config).Compute(wave);
}

void NormAccumulator::Add(double value) {
  ++count_;
  double delta = value - mean_;
  mean_ += delta / static_cast<double>(count_);
  m2_ += delta * (value - mean_);
}

void NormAccumulator::Add(const FeatureMatrix& cells) {
  for (Eigen::Index i = 0; i < cells.size(); ++i) Add(cells.data()[i]);
}

void NormAccumulator::Merge(const NormAccumulator& other) {
  if (other.count_ == 0) return;
  if (count_ == 0) {
    *this = other;
    return;
  }
  double na = static_cast<double>(count_);
  double nb = static_cast<double>(other.count_);
  double delta = other.mean_ - mean_;
  double total = na + nb;
  mean_ += delta * nb / total;
  m2_ += other.m2_ + delta * delta * na * nb / total;
  count_ += other.count_;
}

NormStats NormAccumulator::Finalize() const {
  if (count_ == 0) throw DataError("norm stats: empty corpus");
  NormStats stats;
  stats.mean = mean_;
  stats.std = std::max(std::sqrt(m2_ / static_cast<double>(count_)),
                       NormStats::kStdFloor);
  return stats;
}

NormStats ComputeNormStats(std::span<const LogMelSpectrogram> corpus) {
  NormAccumulator acc;
  for (const auto& spec : corpus) acc.Add(spec);
  return acc.Finalize();
}

LogMelSpectrogram ApplyNorm(const LogMelSpectrogram& x,
                            const NormStats& stats) {
  LogMelSpectrogram out;
  out.config = x.config;
  out.data = (x.data - stats.mean) / stats.std;
  return out;
}

namespace {

void PutF64(std::vector<char>* out, double v) {
  uint64_t bits = std::bit_cast<uint64_t>(v);
  for (int i = 0; i < 8; ++i) out->push_back(static_cast<char>(bits >> (8 * i)));
}

double GetF64(const unsigned char* p) {
  uint64_t bits = 0;
  for (int i = 0; i < 8; ++i) bits |= static_cast<uint64_t>(p[i]) << (8 * i);
  return std::bit_cast<double>(bits);
}

}  // namespace

void WriteNormStats(const std::string& path, const NormStats& stats) {
  std::vector<char> out = {'N', 'S', 'T', '1'};
  PutF64(&out, stats.mean);
  PutF64(&out, stats.std);
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw DataError("cannot write norm stats to " + path);
  os.write(out.data(), static_cast<std::streamsize>(out.size()));
  if (!os) throw DataError("write failed for " + path);
}

NormStats ReadNormStats(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open norm stats " + path);
  unsigned char buf[21];
  in.read(reinterpret_cast<char*>(buf), sizeof(buf));
  if (in.gcount() != 20) {
    throw DataError("norm stats " + path + ": expected 20 bytes");
  }
  if (std::memcmp(buf, "NST1", 4) != 0) {
    throw DataError("norm stats " + path + ": bad magic");
  }
  NormStats stats{GetF64(buf + 4), GetF64(buf + 12)};
  if (!std::isfinite(stats.mean) || !(stats.std >= NormStats::kStdFloor)) {
    throw DataError("norm stats " + path + ": invalid values");
  }
  return stats;
}

}  // namespace byola
