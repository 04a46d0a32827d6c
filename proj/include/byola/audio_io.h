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

#ifndef BYOLA_AUDIO_IO_H_
#define BYOLA_AUDIO_IO_H_

#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace byola {

// Mono audio with nominal amplitude range [-1, 1].
struct Waveform {
  std::vector<float> samples;
  int sample_rate = 16000;

  size_t size() const { return samples.size(); }
  double DurationSeconds() const {
    return static_cast<double>(samples.size()) / sample_rate;
  }
  // Throws DataError on a non-positive rate or non-finite samples.
  void Validate() const;
};

// Reads a RIFF/WAVE file with 16-bit PCM samples. Multi-channel audio is
// averaged down to mono. Throws WavError with a kind naming the problem.
Waveform LoadWav(const std::string& path);

// Writes 16-bit mono PCM. Samples are clamped to [-1, 1) before rounding.
void SaveWav(const std::string& path, const Waveform& wave);

// Band-limited resampling to `target_rate`. Output length is
// round(len * target_rate / sample_rate).
Waveform Resample(const Waveform& wave, int target_rate);

// Resamples a raw sample sequence by an arbitrary ratio (output rate over
// input rate), producing exactly `out_len` samples. Rational ratios with a
// small numerator use exact polyphase tables; others interpolate between
// 512 precomputed phases.
std::vector<float> ResampleByRatio(std::span<const float> input, double ratio,
                                   size_t out_len);

}  // namespace byola

#endif  // BYOLA_AUDIO_IO_H_
