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

#ifndef BYOLA_EVALUATION_H_
#define BYOLA_EVALUATION_H_

#include <map>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "byola/dsp_features.h"
#include "byola/embedding.h"

namespace byola {

// 1 - cos(u1, u2), in [0, 2]. Throws DataError on a zero vector.
double CosineDistance(std::span<const float> u1, std::span<const float> u2);
double CosineDistance(std::span<const double> u1, std::span<const double> u2);

// speaker id -> utterance paths, in file order.
class SpeakerManifest {
 public:
  // Throws DataError on a duplicate path within one speaker.
  void Add(const std::string& speaker, const std::string& path);

  const std::map<std::string, std::vector<std::string>>& speakers() const {
    return speakers_;
  }
  std::vector<std::string> SpeakerIds() const;
  std::vector<std::string> AllPaths() const;
  size_t NumUtterances() const;
  bool empty() const { return speakers_.empty(); }

 private:
  std::map<std::string, std::vector<std::string>> speakers_;
};

// "speaker<TAB>path" per line; relative paths resolve against the
// manifest's directory. Blank lines and lines starting with '#' are skipped.
SpeakerManifest ReadManifest(const std::string& path);
// Paths are written exactly as stored.
void WriteManifest(const std::string& path, const SpeakerManifest& manifest);

struct SpeakerCentroid {
  std::string speaker;
  std::vector<double> vector;
};

SpeakerCentroid ComputeCentroid(const std::string& speaker,
                                std::span<const std::vector<float>> embeddings);

// Median with the even-count rule (mean of the two middle values).
double Median(std::vector<double> values);

struct S2tResult {
  double median = 0.0;
  std::map<std::string, double> per_speaker;
};

// Per speaker: distance between the probe and reference centroids; median
// over speakers. The two maps must share the same speaker set.
S2tResult S2tSameFromEmbeddings(
    const std::map<std::string, std::vector<std::vector<float>>>& probe,
    const std::map<std::string, std::vector<std::vector<float>>>& reference);

S2tResult S2tSame(const SpeakerManifest& probe,
                  const SpeakerManifest& reference, const Embedder& embedder);

// T x K mel cepstra: orthonormal DCT-II of every log-mel frame, keeping
// coefficients 1..K.
using CepstraSequence = FeatureMatrix;

CepstraSequence Cepstra(const LogMelSpectrogram& x, int num_coeffs = 13);
// Full orthonormal DCT-II of one vector.
std::vector<double> DctII(std::span<const double> x);

struct DtwResult {
  std::vector<std::pair<int, int>> path;
  double total_cost = 0.0;
};

// Minimal-cost monotone alignment with steps (1,0), (0,1), (1,1) and
// Euclidean local cost; ties prefer the diagonal.
DtwResult DtwAlign(const CepstraSequence& a, const CepstraSequence& b);

// (10 / ln 10) * mean over the DTW path of sqrt(2 * sum of squared
// coefficient differences), in dB.
double Mcd(const CepstraSequence& a, const CepstraSequence& b);

// Loads, resamples and extracts cepstra from two files, then scores them.
double McdFiles(const std::string& a, const std::string& b,
                const MelConfig& mel, int num_coeffs = 13);

}  // namespace byola

#endif  // BYOLA_EVALUATION_H_
