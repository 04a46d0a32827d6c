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

#ifndef BYOLA_SYNTHETIC_CORPUS_H_
#define BYOLA_SYNTHETIC_CORPUS_H_

#include <cstdint>
#include <string>
#include <vector>

#include "byola/audio_io.h"
#include "byola/evaluation.h"
#include "byola/random.h"

namespace byola {

// A toy speaker: a harmonic source whose f0 is drawn from [f0_min, f0_max]
// per utterance, shaped by resonances at the formant centers.
struct SyntheticSpeakerSpec {
  std::string id;
  double f0_min = 100.0;
  double f0_max = 130.0;
  std::vector<double> formants = {600.0, 1400.0, 2600.0};
  double jitter = 0.01;  // relative f0 wobble
  uint64_t seed = 0;

  void Validate(int sample_rate) const;
};

// Duration must be at least 1.2 s. Peak amplitude is 0.5.
Waveform SynthUtterance(const SyntheticSpeakerSpec& spec, double duration_s,
                        Rng* rng, int sample_rate = 16000);

// `n` speakers with log-spaced, non-overlapping f0 bands and distinct
// formant sets.
std::vector<SyntheticSpeakerSpec> MakeSpeakerSpecs(int n, uint64_t seed);

struct CorpusOptions {
  double min_duration_s = 1.5;
  double max_duration_s = 2.5;
  int sample_rate = 16000;
};

// Writes <out_dir>/<speaker>/<speaker>_NNN.wav and <out_dir>/manifest.tsv
// (paths relative to out_dir). Utterance u of a speaker is seeded from the
// speaker seed and u alone.
SpeakerManifest BuildCorpus(const std::vector<SyntheticSpeakerSpec>& specs,
                            int utterances_per_speaker,
                            const std::string& out_dir,
                            const CorpusOptions& options = {});

enum class NoiseKind { kColored, kHum, kBabble };

Waveform SynthNoise(NoiseKind kind, double duration_s, Rng* rng,
                    int sample_rate = 16000);

// Cycles through the noise kinds; returns the written paths.
std::vector<std::string> BuildNoiseCorpus(int count, uint64_t seed,
                                          const std::string& out_dir,
                                          double duration_s = 3.0,
                                          int sample_rate = 16000);

}  // namespace byola

#endif  // BYOLA_SYNTHETIC_CORPUS_H_
