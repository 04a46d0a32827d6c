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

#ifndef BYOLA_EMBEDDING_H_
#define BYOLA_EMBEDDING_H_

#include <functional>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "byola/audio_io.h"
#include "byola/checkpoint.h"
#include "byola/dsp_features.h"

namespace byola {

struct EmbeddingVector {
  std::string id;
  std::vector<float> values;
};

// Non-overlapping windows of `segment_frames`. A trailing remainder of at
// least half a segment is zero-padded and kept; a shorter one is dropped
// unless it is the only segment.
std::vector<LogMelSpectrogram> SegmentUtterance(const LogMelSpectrogram& x,
                                                int segment_frames);

// Maps one normalized segment to its representation.
using SegmentEncoder =
    std::function<std::vector<float>(const LogMelSpectrogram& segment)>;

// The online encoder of a checkpoint as a SegmentEncoder.
SegmentEncoder CheckpointEncoder(const Checkpoint& checkpoint);

// log-mel -> training-stats normalization -> segments -> encoder -> mean.
std::vector<float> EmbedSpectrogram(const LogMelSpectrogram& log_mel,
                                    const NormStats& stats, int segment_frames,
                                    const SegmentEncoder& encoder);

class Embedder {
 public:
  // `stats` are the training-corpus statistics, whatever corpus the
  // utterances come from.
  Embedder(const Checkpoint& checkpoint, const NormStats& stats);

  std::vector<float> Embed(const Waveform& wave) const;
  EmbeddingVector EmbedFile(const std::string& path) const;

  int dim() const { return dim_; }

 private:
  MelConfig mel_;
  NormStats stats_;
  int segment_frames_;
  int dim_;
  SegmentEncoder encoder_;
};

enum class EmbeddingFormat { kBinary, kText };

EmbeddingFormat ParseEmbeddingFormat(const std::string& name);

// Binary: raw little-endian f32 values, utterances back to back. Text: one
// line per utterance, id TAB space-separated values.
void WriteEmbeddings(std::ostream& out, std::span<const EmbeddingVector> embs,
                     EmbeddingFormat format);
void WriteEmbeddings(const std::string& path,
                     std::span<const EmbeddingVector> embs,
                     EmbeddingFormat format);
std::vector<EmbeddingVector> ReadTextEmbeddings(std::istream& in);

// Utterance identifier used in outputs: the file stem.
std::string UtteranceId(const std::string& path);

}  // namespace byola

#endif  // BYOLA_EMBEDDING_H_
