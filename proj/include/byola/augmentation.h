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

#ifndef BYOLA_AUGMENTATION_H_
#define BYOLA_AUGMENTATION_H_

#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <deque>
#include <span>
#include <vector>

#include "byola/audio_io.h"
#include "byola/dsp_features.h"
#include "byola/random.h"

namespace byola {

struct AugmentationPolicy {
  bool enable_mixup = true;
  double mixup_alpha = 0.4;
  int mixup_bank_size = 256;

  bool enable_rrc = true;
  std::array<double, 2> rrc_freq_range = {0.6, 1.5};
  std::array<double, 2> rrc_time_range = {0.6, 1.5};

  // N(0, 0.04) read as a variance: std 0.2.
  bool enable_gaussian = true;
  double gaussian_std = 0.2;
  double gaussian_alpha = 0.4;
  double p_gaussian = 0.5;

  bool enable_prosodic = true;
  std::vector<double> pitch_semitones = {-1.0, 1.0};
  std::vector<double> stretch_factors = {0.95, 1.05};
  double p_prosodic = 0.5;

  bool enable_noise = true;
  std::vector<double> snr_db_choices = {5.0, 10.0, 25.0};
  double p_noise = 0.5;

  void Validate() const;
};

// Bounded FIFO of past linear-scale segments shared by every view of a
// training run. Not internally synchronized: concurrent view builders must
// serialize their Sample/Push calls, and determinism holds only for a fixed
// access order.
class MixupBank {
 public:
  explicit MixupBank(size_t capacity);

  void Push(FeatureMatrix linear);
  // Uniformly chosen entry; the bank must be non-empty.
  const FeatureMatrix& Sample(Rng* rng) const;

  size_t size() const { return entries_.size(); }
  size_t capacity() const { return capacity_; }
  bool empty() const { return entries_.empty(); }
  const FeatureMatrix& at(size_t i) const { return entries_[i]; }
  void Clear() { entries_.clear(); }

 private:
  size_t capacity_;
  std::deque<FeatureMatrix> entries_;
};

// log((1 - ratio) * exp(x) + ratio * other_linear).
LogMelSpectrogram MixWithLinear(const LogMelSpectrogram& x,
                                const FeatureMatrix& other_linear,
                                double ratio);

// Mixup with a random past input. When the bank is empty the output is x
// unchanged. exp(x) is pushed into the bank afterwards in both cases.
// `ratio_out`, when given, receives the mixing ratio used (0 if none).
LogMelSpectrogram Mixup(const LogMelSpectrogram& x, double alpha,
                        MixupBank* bank, Rng* rng,
                        double* ratio_out = nullptr);

// Crop geometry on a T x F spectrogram. t_offset may be negative when the
// crop is wider than the input.
struct CropSpec {
  int freq_size = 0;  // F_C
  int time_size = 0;  // T_C
  int freq_offset = 0;
  int time_offset = 0;
};

CropSpec SampleCrop(int num_bins, int num_frames,
                    const AugmentationPolicy& policy, Rng* rng);

// Extracts the crop (cells outside [0, T) read as 0) and resizes it back to
// the input shape with bilinear interpolation.
LogMelSpectrogram ApplyCrop(const LogMelSpectrogram& x, const CropSpec& crop);

LogMelSpectrogram RandomResizeCrop(const LogMelSpectrogram& x,
                                   const AugmentationPolicy& policy, Rng* rng);

// log((1 - ratio) * exp(x) + ratio * exp(noise)), cellwise.
LogMelSpectrogram GaussianMixWith(const LogMelSpectrogram& x,
                                  const FeatureMatrix& noise, double ratio);

// Draws noise ~ N(0, gaussian_std^2) per cell and ratio ~ U(0, gaussian_alpha).
LogMelSpectrogram GaussianMix(const LogMelSpectrogram& x,
                              const AugmentationPolicy& policy, Rng* rng,
                              double* ratio_out = nullptr);

// WSOLA time-scale modification. `factor` is output duration over input
// duration (0.5 to 2.0); the output has exactly round(factor * len) samples.
Waveform TimeStretch(const Waveform& wave, double factor);

// Shifts every partial by 2^(semitones / 12) while keeping the length:
// sinc resampling followed by a WSOLA stretch back to the input duration.
Waveform PitchShift(const Waveform& wave, double semitones);

// Gain applied to the noise so that P_signal / (g^2 P_noise) hits snr_db.
double SnrGain(double signal_power, double noise_power, double snr_db);

double MeanPower(std::span<const float> samples);

// Adds a random contiguous slice of `noise` (tiled when shorter than the
// signal) at the requested SNR. Throws DataError("degenerate power") when
// the signal or the chosen slice has zero power.
Waveform MixNoiseAtSnr(const Waveform& wave, const Waveform& noise,
                       double snr_db, Rng* rng);

// Batch standardization with a single mean/std over every cell of every
// member (std floored at 1e-5).
std::vector<LogMelSpectrogram> PostNormalize(
    std::span<const LogMelSpectrogram> batch);

struct ViewPair {
  LogMelSpectrogram u;
  LogMelSpectrogram u_prime;
};

// The random choices made for one view's waveform stage.
struct WaveformPlan {
  bool prosodic = false;
  double semitones = 0.0;
  double stretch = 1.0;
  bool noise = false;
  size_t noise_index = 0;
  double snr_db = 0.0;
};

// Start sample of a view's segment for an un-stretched start `start`.
inline int64_t AlignedSegmentStart(int64_t start, double stretch) {
  return static_cast<int64_t>(std::llround(stretch * static_cast<double>(start)));
}

// Builds (u, u') from one utterance:
//   per view: prosodic -> external noise -> log-mel -> dataset norm ->
//   aligned 1 s segment -> mixup -> RRC -> Gaussian mix.
// Post-normalization happens later at the batch level.
class ViewPairGenerator {
 public:
  ViewPairGenerator(const MelConfig& mel, const NormStats& stats,
                    const AugmentationPolicy& policy, int segment_frames,
                    std::vector<Waveform> noises = {});

  ViewPair Make(const Waveform& wave, MixupBank* bank, Rng* rng) const;

  WaveformPlan DrawPlan(Rng* rng) const;
  Waveform ApplyWaveformPlan(const Waveform& wave, const WaveformPlan& plan,
                             Rng* rng) const;

  const AugmentationPolicy& policy() const { return policy_; }

 private:
  LogMelSpectrogram SpectralStage(LogMelSpectrogram segment, MixupBank* bank,
                                  Rng* rng) const;

  LogMelExtractor extractor_;
  NormStats stats_;
  AugmentationPolicy policy_;
  int segment_frames_;
  std::vector<Waveform> noises_;
};

ViewPair MakeViewPair(const Waveform& wave, const NormStats& stats,
                      const AugmentationPolicy& policy, MixupBank* bank,
                      Rng* rng, const MelConfig& mel = {},
                      std::span<const Waveform> noises = {},
                      int segment_frames = 100);

}  // namespace byola

#endif  // BYOLA_AUGMENTATION_H_
