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

#include "byola/synthetic_corpus.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <numbers>

#include "byola/errors.h"

namespace byola {
namespace {

constexpr double kPeak = 0.5;
constexpr double kFormantGain = 0.6;

// Constant-peak-gain band-pass biquad (unit gain at the center).
class Resonator {
 public:
  Resonator(double center, double bandwidth, int sample_rate) {
    const double w0 = 2.0 * std::numbers::pi * center / sample_rate;
    const double alpha = std::sin(w0) * bandwidth / (2.0 * center);
    const double a0 = 1.0 + alpha;
    b0_ = alpha / a0;
    a1_ = -2.0 * std::cos(w0) / a0;
    a2_ = (1.0 - alpha) / a0;
  }

  double Process(double x) {
    double y = b0_ * (x - x2_) - a1_ * y1_ - a2_ * y2_;
    x2_ = x1_;
    x1_ = x;
    y2_ = y1_;
    y1_ = y;
    return y;
  }

 private:
  double b0_, a1_, a2_;
  double x1_ = 0, x2_ = 0, y1_ = 0, y2_ = 0;
};

void PeakNormalize(std::vector<float>* samples, double peak) {
  float max_abs = 0.0f;
  for (float s : *samples) max_abs = std::max(max_abs, std::abs(s));
  if (max_abs == 0.0f) return;
  const double gain = peak / max_abs;
  for (float& s : *samples) s = static_cast<float>(s * gain);
}

// Harmonic stack at a time-varying f0 (Hz per sample).
std::vector<double> HarmonicSource(const std::vector<double>& f0, int sample_rate) {
  std::vector<double> out(f0.size(), 0.0);
  const double nyq = 0.45 * sample_rate;
  double phase = 0.0;
  for (size_t n = 0; n < f0.size(); ++n) {
    const int harmonics = std::max(1, static_cast<int>(nyq / f0[n]));
    double s = 0.0;
    for (int k = 1; k <= harmonics; ++k) s += std::sin(k * phase) / k;
    out[n] = s;
    phase += 2.0 * std::numbers::pi * f0[n] / sample_rate;
    if (phase > 2.0 * std::numbers::pi) phase -= 2.0 * std::numbers::pi;
  }
  return out;
}

}  // namespace

void SyntheticSpeakerSpec::Validate(int sample_rate) const {
  const double nyquist = 0.5 * sample_rate;
  if (!(f0_min > 0.0) || f0_max < f0_min || f0_max * (1.0 + jitter) >= nyquist) {
    throw DataError("speaker " + id + ": invalid f0 range");
  }
  for (double f : formants) {
    if (!(f > 0.0) || f >= nyquist) throw DataError("speaker " + id + ": formant outside (0, nyquist)");
  }
  if (jitter < 0.0 || jitter >= 0.5) throw DataError("speaker " + id + ": jitter must be in [0, 0.5)");
}

Waveform SynthUtterance(const SyntheticSpeakerSpec& spec, double duration_s,
                        Rng* rng, int sample_rate) {
  spec.Validate(sample_rate);
  if (duration_s < 1.2) throw DataError("synthetic utterances must last at least 1.2 s");
  const size_t n = static_cast<size_t>(std::llround(duration_s * sample_rate));
  const double base_f0 = rng->Uniform(spec.f0_min, spec.f0_max);

  // Slow pitch wobble from two random low-rate sinusoids.
  const double r1 = rng->Uniform(3.0, 6.0), r2 = rng->Uniform(0.5, 2.0);
  const double p1 = rng->Uniform(0.0, 2.0 * std::numbers::pi);
  const double p2 = rng->Uniform(0.0, 2.0 * std::numbers::pi);
  std::vector<double> f0(n);
  for (size_t i = 0; i < n; ++i) {
    const double t = static_cast<double>(i) / sample_rate;
    const double wobble = 0.6 * std::sin(2 * std::numbers::pi * r1 * t + p1) +
                          0.4 * std::sin(2 * std::numbers::pi * r2 * t + p2);
    f0[i] = base_f0 * (1.0 + spec.jitter * wobble);
  }
  const std::vector<double> source = HarmonicSource(f0, sample_rate);

  std::vector<Resonator> resonators;
  for (double fc : spec.formants) {
    const double center = fc * rng->Uniform(0.97, 1.03);
    resonators.emplace_back(center, 60.0 + 0.06 * center, sample_rate);
  }

  // Syllable-like amplitude envelope with short fades at both ends.
  const double syllable_rate = rng->Uniform(3.0, 5.0);
  const double env_phase = rng->Uniform(0.0, 2.0 * std::numbers::pi);
  const double fade = 0.02 * sample_rate;
  std::vector<float> out(n);
  for (size_t i = 0; i < n; ++i) {
    double y = source[i];
    double shaped = 0.0;
    for (auto& r : resonators) shaped += r.Process(source[i]);
    y += kFormantGain * shaped;
    const double t = static_cast<double>(i) / sample_rate;
    double env = 0.65 + 0.35 * std::sin(2 * std::numbers::pi * syllable_rate * t + env_phase);
    env *= std::min({1.0, i / fade, (n - 1 - i) / fade});
    out[i] = static_cast<float>(env * y + 1e-3 * rng->Normal(0.0, 1.0));
  }
  PeakNormalize(&out, kPeak);
  Waveform w;
  w.samples = std::move(out);
  w.sample_rate = sample_rate;
  return w;
}

std::vector<SyntheticSpeakerSpec> MakeSpeakerSpecs(int n, uint64_t seed) {
  if (n < 1) throw DataError("need at least one synthetic speaker");
  Rng rng(seed);
  std::vector<SyntheticSpeakerSpec> specs;
  const double lo = 90.0, hi = 280.0;
  for (int i = 0; i < n; ++i) {
    SyntheticSpeakerSpec s;
    char id[32];
    std::snprintf(id, sizeof(id), "spk%03d", i);
    s.id = id;
    // Band i of n log-spaced bands, using the central 70% of each.
    const double a = lo * std::pow(hi / lo, static_cast<double>(i) / n);
    const double b = lo * std::pow(hi / lo, static_cast<double>(i + 1) / n);
    const double margin = 0.15 * (b - a);
    s.f0_min = a + margin;
    s.f0_max = b - margin;
    s.formants = {rng.Uniform(400.0, 900.0), rng.Uniform(1000.0, 2200.0),
                  rng.Uniform(2300.0, 3400.0)};
    s.jitter = 0.01;
    s.seed = DeriveSeed(seed, static_cast<uint64_t>(i) + 1);
    specs.push_back(std::move(s));
  }
  return specs;
}

SpeakerManifest BuildCorpus(const std::vector<SyntheticSpeakerSpec>& specs,
                            int utterances_per_speaker,
                            const std::string& out_dir,
                            const CorpusOptions& options) {
  if (utterances_per_speaker < 1) throw DataError("utterances per speaker must be >= 1");
  if (specs.empty()) throw DataError("no speaker specs given");
  if (options.max_duration_s < options.min_duration_s) {
    throw DataError("corpus duration range is empty");
  }
  namespace fs = std::filesystem;
  std::error_code ec;
  fs::create_directories(out_dir, ec);
  if (ec) throw DataError("cannot create " + out_dir + ": " + ec.message());

  SpeakerManifest manifest, relative;
  for (const auto& spec : specs) {
    fs::create_directories(fs::path(out_dir) / spec.id, ec);
    if (ec) throw DataError("cannot create directory for " + spec.id);
    for (int u = 0; u < utterances_per_speaker; ++u) {
      Rng rng(DeriveSeed(spec.seed, static_cast<uint64_t>(u)));
      const double duration = rng.Uniform(options.min_duration_s, options.max_duration_s);
      Waveform w = SynthUtterance(spec, duration, &rng, options.sample_rate);
      char name[64];
      std::snprintf(name, sizeof(name), "%s_%03d.wav", spec.id.c_str(), u);
      const std::string rel = (fs::path(spec.id) / name).string();
      const std::string full = (fs::path(out_dir) / rel).string();
      SaveWav(full, w);
      manifest.Add(spec.id, full);
      relative.Add(spec.id, rel);
    }
  }
  WriteManifest((fs::path(out_dir) / "manifest.tsv").string(), relative);
  return manifest;
}

Waveform SynthNoise(NoiseKind kind, double duration_s, Rng* rng, int sample_rate) {
  if (!(duration_s > 0.0)) throw DataError("noise duration must be positive");
  const size_t n = static_cast<size_t>(std::llround(duration_s * sample_rate));
  std::vector<float> out(n, 0.0f);
  switch (kind) {
    case NoiseKind::kColored: {
      // One-pole filtered white noise; the pole sets the tilt.
      const double pole = rng->Uniform(-0.5, 0.95);
      double y = 0.0;
      for (auto& s : out) {
        y = pole * y + rng->Normal(0.0, 1.0);
        s = static_cast<float>(y);
      }
      break;
    }
    case NoiseKind::kHum: {
      const double mains = rng->Bernoulli(0.5) ? 50.0 : 60.0;
      std::vector<double> amp(8), phase(8);
      for (int k = 0; k < 8; ++k) {
        amp[k] = rng->Uniform(0.2, 1.0) / (k + 1);
        phase[k] = rng->Uniform(0.0, 2.0 * std::numbers::pi);
      }
      for (size_t i = 0; i < n; ++i) {
        const double t = static_cast<double>(i) / sample_rate;
        double s = 0.0;
        for (int k = 0; k < 8; ++k) {
          s += amp[k] * std::sin(2 * std::numbers::pi * mains * (k + 1) * t + phase[k]);
        }
        out[i] = static_cast<float>(s + 0.05 * rng->Normal(0.0, 1.0));
      }
      break;
    }
    case NoiseKind::kBabble: {
      // Several overlapping random talkers.
      const double talker_duration = std::max(1.2, duration_s);
      auto talkers = MakeSpeakerSpecs(6, rng->NextU64());
      for (int t = 0; t < 4; ++t) {
        const auto& spec = talkers[rng->UniformInt(0, 5)];
        Waveform w = SynthUtterance(spec, talker_duration, rng, sample_rate);
        for (size_t i = 0; i < n; ++i) out[i] += w.samples[i];
      }
      break;
    }
  }
  PeakNormalize(&out, kPeak);
  Waveform w;
  w.samples = std::move(out);
  w.sample_rate = sample_rate;
  return w;
}

std::vector<std::string> BuildNoiseCorpus(int count, uint64_t seed,
                                          const std::string& out_dir,
                                          double duration_s, int sample_rate) {
  if (count < 1) throw DataError("noise corpus needs at least one file");
  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  if (ec) throw DataError("cannot create " + out_dir + ": " + ec.message());
  static constexpr NoiseKind kKinds[] = {NoiseKind::kColored, NoiseKind::kHum,
                                         NoiseKind::kBabble};
  std::vector<std::string> paths;
  for (int i = 0; i < count; ++i) {
    Rng rng(DeriveSeed(seed, static_cast<uint64_t>(i)));
    Waveform w = SynthNoise(kKinds[i % 3], duration_s, &rng, sample_rate);
    char name[32];
    std::snprintf(name, sizeof(name), "noise_%03d.wav", i);
    paths.push_back((std::filesystem::path(out_dir) / name).string());
    SaveWav(paths.back(), w);
  }
  return paths;
}

}  // namespace byola
