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

#include "byola/augmentation.h"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include <Eigen/Core>

#include "byola/errors.h"

namespace byola {

void AugmentationPolicy::Validate() const {
  auto check_prob = [](double p, const char* name) {
    if (!(p >= 0.0 && p <= 1.0)) {
      throw DataError(std::string("augmentation policy: ") + name +
                      " must be in [0, 1]");
    }
  };
  check_prob(p_gaussian, "p_gaussian");
  check_prob(p_prosodic, "p_prosodic");
  check_prob(p_noise, "p_noise");
  if (!(mixup_alpha >= 0.0)) throw DataError("augmentation policy: mixup_alpha < 0");
  if (mixup_bank_size < 1) throw DataError("augmentation policy: mixup_bank_size < 1");
  if (!(rrc_freq_range[0] > 0.0 && rrc_freq_range[0] <= rrc_freq_range[1])) {
    throw DataError("augmentation policy: need 0 < h1 <= h2");
  }
  if (!(rrc_time_range[0] > 0.0 && rrc_time_range[0] <= rrc_time_range[1])) {
    throw DataError("augmentation policy: need 0 < w1 <= w2");
  }
  if (!(gaussian_std >= 0.0) || !(gaussian_alpha >= 0.0 && gaussian_alpha <= 1.0)) {
    throw DataError("augmentation policy: bad gaussian_std/gaussian_alpha");
  }
  if (enable_prosodic) {
    if (pitch_semitones.empty() || stretch_factors.empty()) {
      throw DataError("augmentation policy: empty prosodic choice set");
    }
    for (double s : pitch_semitones) {
      if (!(std::abs(s) <= 12.0)) throw DataError("augmentation policy: |semitones| > 12");
    }
    for (double f : stretch_factors) {
      if (!(f >= 0.5 && f <= 2.0)) {
        throw DataError("augmentation policy: stretch factor outside [0.5, 2]");
      }
    }
  }
  if (enable_noise && snr_db_choices.empty()) {
    throw DataError("augmentation policy: empty SNR choice set");
  }
}

MixupBank::MixupBank(size_t capacity) : capacity_(capacity) {
  if (capacity_ == 0) throw DataError("mixup bank: capacity must be >= 1");
}

void MixupBank::Push(FeatureMatrix linear) {
  if (entries_.size() == capacity_) entries_.pop_front();
  entries_.push_back(std::move(linear));
}

const FeatureMatrix& MixupBank::Sample(Rng* rng) const {
  if (entries_.empty()) throw DataError("mixup bank: sample from empty bank");
  auto i = rng->UniformInt(0, static_cast<int64_t>(entries_.size()) - 1);
  return entries_[static_cast<size_t>(i)];
}

LogMelSpectrogram MixWithLinear(const LogMelSpectrogram& x,
                                const FeatureMatrix& other_linear,
                                double ratio) {
  if (other_linear.rows() != x.data.rows() ||
      other_linear.cols() != x.data.cols()) {
    throw DataError("mixup: shape mismatch with bank entry");
  }
  LogMelSpectrogram out;
  out.config = x.config;
  out.data = ((1.0 - ratio) * x.data.exp() + ratio * other_linear).log();
  return out;
}

LogMelSpectrogram Mixup(const LogMelSpectrogram& x, double alpha,
                        MixupBank* bank, Rng* rng, double* ratio_out) {
  LogMelSpectrogram out;
  double ratio = 0.0;
  if (bank->empty()) {
    out = x;
  } else {
    const FeatureMatrix& past = bank->Sample(rng);
    ratio = rng->Uniform(0.0, alpha);
    out = MixWithLinear(x, past, ratio);
  }
  bank->Push(x.data.exp());
  if (ratio_out != nullptr) *ratio_out = ratio;
  return out;
}

CropSpec SampleCrop(int num_bins, int num_frames,
                    const AugmentationPolicy& policy, Rng* rng) {
  CropSpec crop;
  double h = rng->Uniform(policy.rrc_freq_range[0], policy.rrc_freq_range[1]);
  double w = rng->Uniform(policy.rrc_time_range[0], policy.rrc_time_range[1]);
  crop.freq_size = std::max(
      1, static_cast<int>(std::floor(std::min(h, 1.0) * num_bins)));
  crop.time_size =
      std::max(1, static_cast<int>(std::floor(w * num_frames)));
  crop.freq_offset =
      static_cast<int>(rng->UniformInt(0, num_bins - crop.freq_size));
  if (crop.time_size <= num_frames) {
    crop.time_offset =
        static_cast<int>(rng->UniformInt(0, num_frames - crop.time_size));
  } else {
    // Input centered on a wider zero canvas.
    crop.time_offset = -((crop.time_size - num_frames) / 2);
  }
  return crop;
}

namespace {

struct LerpIndex {
  int lo;
  int hi;
  double frac;
};

// Half-pixel bilinear source coordinates; identity when sizes match.
std::vector<LerpIndex> ResizeIndices(int src, int dst) {
  std::vector<LerpIndex> out(dst);
  double scale = static_cast<double>(src) / dst;
  for (int i = 0; i < dst; ++i) {
    double pos = std::clamp((i + 0.5) * scale - 0.5, 0.0,
                            static_cast<double>(src - 1));
    int lo = static_cast<int>(std::floor(pos));
    int hi = std::min(lo + 1, src - 1);
    out[i] = {lo, hi, pos - lo};
  }
  return out;
}

}  // namespace

LogMelSpectrogram ApplyCrop(const LogMelSpectrogram& x, const CropSpec& crop) {
  const int frames = x.NumFrames();
  const int bins = x.NumBins();
  if (crop.freq_size < 1 || crop.time_size < 1 || crop.freq_size > bins ||
      crop.freq_offset < 0 || crop.freq_offset + crop.freq_size > bins) {
    throw DataError("rrc: invalid crop geometry");
  }
  FeatureMatrix canvas = FeatureMatrix::Zero(crop.time_size, crop.freq_size);
  for (int t = 0; t < crop.time_size; ++t) {
    int src_t = crop.time_offset + t;
    if (src_t < 0 || src_t >= frames) continue;
    canvas.row(t) = x.data.row(src_t).segment(crop.freq_offset, crop.freq_size);
  }
  auto rows = ResizeIndices(crop.time_size, frames);
  auto cols = ResizeIndices(crop.freq_size, bins);
  LogMelSpectrogram out;
  out.config = x.config;
  out.data.resize(frames, bins);
  for (int t = 0; t < frames; ++t) {
    const LerpIndex& r = rows[t];
    for (int f = 0; f < bins; ++f) {
      const LerpIndex& c = cols[f];
      double top = canvas(r.lo, c.lo) * (1.0 - c.frac) + canvas(r.lo, c.hi) * c.frac;
      double bottom =
          canvas(r.hi, c.lo) * (1.0 - c.frac) + canvas(r.hi, c.hi) * c.frac;
      out.data(t, f) = r.frac == 0.0 ? top : top * (1.0 - r.frac) + bottom * r.frac;
    }
  }
  return out;
}

LogMelSpectrogram RandomResizeCrop(const LogMelSpectrogram& x,
                                   const AugmentationPolicy& policy, Rng* rng) {
  return ApplyCrop(x, SampleCrop(x.NumBins(), x.NumFrames(), policy, rng));
}

LogMelSpectrogram GaussianMixWith(const LogMelSpectrogram& x,
                                  const FeatureMatrix& noise, double ratio) {
  return MixWithLinear(x, noise.exp(), ratio);
}

LogMelSpectrogram GaussianMix(const LogMelSpectrogram& x,
                              const AugmentationPolicy& policy, Rng* rng,
                              double* ratio_out) {
  double ratio = rng->Uniform(0.0, policy.gaussian_alpha);
  FeatureMatrix noise(x.data.rows(), x.data.cols());
  for (Eigen::Index i = 0; i < noise.size(); ++i) {
    noise.data()[i] = rng->Normal(0.0, policy.gaussian_std);
  }
  if (ratio_out != nullptr) *ratio_out = ratio;
  return GaussianMixWith(x, noise, ratio);
}

Waveform TimeStretch(const Waveform& wave, double factor) {
  if (!(factor >= 0.5 && factor <= 2.0)) {
    throw DataError("time_stretch: factor must be in [0.5, 2]");
  }
  constexpr int kWindow = 512;
  constexpr int kHop = 256;
  constexpr int kRadius = 128;
  constexpr int kPad = 4096;

  Waveform out;
  out.sample_rate = wave.sample_rate;
  const int64_t n = static_cast<int64_t>(wave.size());
  const int64_t out_len = std::llround(factor * static_cast<double>(n));
  if (n == 0 || out_len == 0) return out;

  // Zero-padded copy so every candidate window is addressable. Aligned
  // storage keeps the vectorized dot's summation order fixed run to run.
  std::vector<float, Eigen::aligned_allocator<float>> x(static_cast<size_t>(n + 2 * kPad), 0.0f);
  std::copy(wave.samples.begin(), wave.samples.end(), x.begin() + kPad);
  std::vector<double> energy_prefix(x.size() + 1, 0.0);
  for (size_t i = 0; i < x.size(); ++i) {
    energy_prefix[i + 1] = energy_prefix[i] + static_cast<double>(x[i]) * x[i];
  }
  auto energy = [&](int64_t start) {
    return energy_prefix[start + kWindow] - energy_prefix[start];
  };
  auto clamp_start = [&](int64_t s) {
    return std::clamp<int64_t>(s, 0, static_cast<int64_t>(x.size()) - kWindow);
  };

  std::vector<float> window(kWindow);
  for (int i = 0; i < kWindow; ++i) {
    window[i] = static_cast<float>(
        0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * i / kWindow));
  }

  const double analysis_hop = kHop / factor;
  const int64_t num_frames = out_len / kHop + 2;
  std::vector<double> acc(static_cast<size_t>((num_frames + 1) * kHop + kWindow), 0.0);
  std::vector<double> norm(acc.size(), 0.0);

  int64_t prev = 0;
  for (int64_t k = 0; k < num_frames; ++k) {
    int64_t nominal = clamp_start(
        kPad + std::llround(k * analysis_hop) - kWindow / 2);
    int64_t start = nominal;
    if (k > 0) {
      const int64_t natural = clamp_start(prev + kHop);
      const float* ref = &x[natural];
      const double ref_energy = energy(natural);
      double best = -2.0;
      for (int step = 0; step <= 2 * kRadius; ++step) {
        // 0, -1, +1, -2, +2, ... so ties resolve toward the nominal position.
        int delta = (step % 2 == 0) ? step / 2 : -(step + 1) / 2;
        int64_t cand = nominal + delta;
        if (cand < 0 || cand + kWindow > static_cast<int64_t>(x.size())) continue;
        const float* c = &x[cand];
        const double dot = Eigen::Map<const Eigen::VectorXf>(c, kWindow).dot(
            Eigen::Map<const Eigen::VectorXf>(ref, kWindow));
        double denom = std::sqrt(energy(cand) * ref_energy);
        double score = denom > 0.0 ? dot / denom : 0.0;
        if (score > best) {
          best = score;
          start = cand;
        }
      }
    }
    const size_t base = static_cast<size_t>(k * kHop);
    for (int i = 0; i < kWindow; ++i) {
      acc[base + i] += window[i] * x[start + i];
      norm[base + i] += window[i];
    }
    prev = start;
  }

  out.samples.resize(static_cast<size_t>(out_len));
  for (int64_t i = 0; i < out_len; ++i) {
    size_t j = static_cast<size_t>(i + kWindow / 2);
    out.samples[i] = norm[j] > 1e-8 ? static_cast<float>(acc[j] / norm[j]) : 0.0f;
  }
  return out;
}

Waveform PitchShift(const Waveform& wave, double semitones) {
  if (!(std::abs(semitones) <= 12.0)) {
    throw DataError("pitch_shift: |semitones| must be <= 12");
  }
  if (semitones == 0.0 || wave.samples.empty()) return wave;
  const double ratio = std::pow(2.0, semitones / 12.0);
  const size_t n = wave.size();
  const size_t squeezed_len = std::max<size_t>(
      1, static_cast<size_t>(std::llround(static_cast<double>(n) / ratio)));
  Waveform squeezed;
  squeezed.sample_rate = wave.sample_rate;
  squeezed.samples = ResampleByRatio(wave.samples, 1.0 / ratio, squeezed_len);
  Waveform out = TimeStretch(
      squeezed, static_cast<double>(n) / static_cast<double>(squeezed_len));
  out.samples.resize(n, 0.0f);
  return out;
}

double MeanPower(std::span<const float> samples) {
  if (samples.empty()) return 0.0;
  double acc = 0.0;
  for (float s : samples) acc += static_cast<double>(s) * s;
  return acc / static_cast<double>(samples.size());
}

double SnrGain(double signal_power, double noise_power, double snr_db) {
  return std::sqrt(signal_power / (noise_power * std::pow(10.0, snr_db / 10.0)));
}

Waveform MixNoiseAtSnr(const Waveform& wave, const Waveform& noise,
                       double snr_db, Rng* rng) {
  if (wave.sample_rate != noise.sample_rate) {
    throw DataError("mix_noise: sample rate mismatch");
  }
  if (noise.samples.empty()) throw DataError("mix_noise: degenerate power (empty noise)");
  const size_t len = wave.size();
  const size_t noise_len = noise.size();
  size_t offset = 0;
  if (noise_len >= len) {
    offset = static_cast<size_t>(rng->UniformInt(0, static_cast<int64_t>(noise_len - len)));
  } else {
    offset = static_cast<size_t>(rng->UniformInt(0, static_cast<int64_t>(noise_len) - 1));
  }
  std::vector<float> slice(len);
  for (size_t i = 0; i < len; ++i) slice[i] = noise.samples[(offset + i) % noise_len];

  const double signal_power = MeanPower(wave.samples);
  const double noise_power = MeanPower(slice);
  if (!(signal_power > 0.0) || !(noise_power > 0.0)) {
    throw DataError("mix_noise: degenerate power");
  }
  const double gain = SnrGain(signal_power, noise_power, snr_db);
  Waveform out = wave;
  for (size_t i = 0; i < len; ++i) {
    out.samples[i] = static_cast<float>(wave.samples[i] + gain * slice[i]);
  }
  return out;
}

std::vector<LogMelSpectrogram> PostNormalize(
    std::span<const LogMelSpectrogram> batch) {
  if (batch.empty()) throw DataError("post_normalize: empty batch");
  double sum = 0.0;
  double count = 0.0;
  for (const auto& x : batch) {
    sum += x.data.sum();
    count += static_cast<double>(x.data.size());
  }
  const double mean = sum / count;
  double sq = 0.0;
  for (const auto& x : batch) sq += (x.data - mean).square().sum();
  const double std = std::max(std::sqrt(sq / count), NormStats::kStdFloor);
  std::vector<LogMelSpectrogram> out;
  out.reserve(batch.size());
  for (const auto& x : batch) {
    LogMelSpectrogram y;
    y.config = x.config;
    y.data = (x.data - mean) / std;
    out.push_back(std::move(y));
  }
  return out;
}

ViewPairGenerator::ViewPairGenerator(const MelConfig& mel,
                                     const NormStats& stats,
                                     const AugmentationPolicy& policy,
                                     int segment_frames,
                                     std::vector<Waveform> noises)
    : extractor_(mel),
      stats_(stats),
      policy_(policy),
      segment_frames_(segment_frames),
      noises_(std::move(noises)) {
  policy_.Validate();
  if (segment_frames_ < 1) throw DataError("view pair: segment_frames < 1");
  for (const auto& n : noises_) {
    if (n.sample_rate != mel.sample_rate) {
      throw DataError("view pair: noise sample rate differs from mel config");
    }
  }
}

WaveformPlan ViewPairGenerator::DrawPlan(Rng* rng) const {
  WaveformPlan plan;
  plan.prosodic = policy_.enable_prosodic && rng->Bernoulli(policy_.p_prosodic);
  if (plan.prosodic) {
    plan.semitones = rng->Choice(policy_.pitch_semitones);
    plan.stretch = rng->Choice(policy_.stretch_factors);
  }
  plan.noise = policy_.enable_noise && rng->Bernoulli(policy_.p_noise);
  if (plan.noise) {
    if (noises_.empty()) {
      throw DataError("view pair: external noise drawn but no noise corpus loaded");
    }
    plan.noise_index = static_cast<size_t>(
        rng->UniformInt(0, static_cast<int64_t>(noises_.size()) - 1));
    plan.snr_db = rng->Choice(policy_.snr_db_choices);
  }
  return plan;
}

Waveform ViewPairGenerator::ApplyWaveformPlan(const Waveform& wave,
                                              const WaveformPlan& plan,
                                              Rng* rng) const {
  Waveform out = wave;
  if (plan.prosodic) {
    out = PitchShift(out, plan.semitones);
    out = TimeStretch(out, plan.stretch);
  }
  if (plan.noise) out = MixNoiseAtSnr(out, noises_[plan.noise_index], plan.snr_db, rng);
  return out;
}

LogMelSpectrogram ViewPairGenerator::SpectralStage(LogMelSpectrogram x,
                                                   MixupBank* bank,
                                                   Rng* rng) const {
  if (policy_.enable_mixup) {
    if (bank == nullptr) throw DataError("view pair: mixup enabled without a bank");
    x = Mixup(x, policy_.mixup_alpha, bank, rng);
  }
  if (policy_.enable_rrc) x = RandomResizeCrop(x, policy_, rng);
  if (policy_.enable_gaussian && rng->Bernoulli(policy_.p_gaussian)) {
    x = GaussianMix(x, policy_, rng);
  }
  return x;
}

ViewPair ViewPairGenerator::Make(const Waveform& wave, MixupBank* bank,
                                 Rng* rng) const {
  const MelConfig& mel = extractor_.config();
  if (wave.sample_rate != mel.sample_rate) {
    throw DataError("view pair: waveform rate differs from mel config");
  }
  const WaveformPlan plans[2] = {DrawPlan(rng), DrawPlan(rng)};
  const Waveform views[2] = {ApplyWaveformPlan(wave, plans[0], rng),
                             ApplyWaveformPlan(wave, plans[1], rng)};

  const int hop = mel.HopSamples();
  auto frame_of = [&](int64_t start, int v) {
    return std::llround(
        static_cast<double>(AlignedSegmentStart(start, plans[v].stretch)) / hop);
  };
  auto valid = [&](int64_t start) {
    for (int v = 0; v < 2; ++v) {
      if (frame_of(start, v) + segment_frames_ > NumFrames(views[v].size(), mel)) {
        return false;
      }
    }
    return true;
  };
  double bound = 1e300;
  for (int v = 0; v < 2; ++v) {
    double room = static_cast<double>(NumFrames(views[v].size(), mel) - segment_frames_);
    bound = std::min(bound, room * hop / plans[v].stretch);
  }
  int64_t max_start = static_cast<int64_t>(std::floor(bound));
  while (max_start >= 0 && !valid(max_start)) --max_start;
  if (max_start < 0) {
    throw DataError("view pair: utterance shorter than one segment (" +
                    std::to_string(wave.DurationSeconds()) + " s)");
  }
  const int64_t start = rng->UniformInt(0, max_start);

  LogMelSpectrogram segments[2];
  for (int v = 0; v < 2; ++v) {
    auto raw = extractor_.ComputeFrames(views[v], static_cast<int>(frame_of(start, v)),
                                        segment_frames_);
    segments[v] = ApplyNorm(raw, stats_);
  }
  ViewPair pair;
  pair.u = SpectralStage(std::move(segments[0]), bank, rng);
  pair.u_prime = SpectralStage(std::move(segments[1]), bank, rng);
  return pair;
}

ViewPair MakeViewPair(const Waveform& wave, const NormStats& stats,
                      const AugmentationPolicy& policy, MixupBank* bank,
                      Rng* rng, const MelConfig& mel,
                      std::span<const Waveform> noises, int segment_frames) {
  ViewPairGenerator gen(mel, stats, policy, segment_frames,
                        std::vector<Waveform>(noises.begin(), noises.end()));
  return gen.Make(wave, bank, rng);
}

}  // namespace byola
