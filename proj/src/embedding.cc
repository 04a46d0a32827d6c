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

#include "byola/embedding.h"

#include <cmath>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "byola/byol_trainer.h"
#include "byola/errors.h"

namespace byola {

std::vector<LogMelSpectrogram> SegmentUtterance(const LogMelSpectrogram& x,
                                                int segment_frames) {
  if (segment_frames < 1) throw DataError("segment_frames must be >= 1");
  const int total = x.NumFrames();
  const int bins = x.NumBins();
  std::vector<LogMelSpectrogram> segments;
  for (int start = 0; start < total; start += segment_frames) {
    const int len = std::min(segment_frames, total - start);
    const bool keep = len == segment_frames || 2 * len >= segment_frames ||
                      start == 0;
    if (!keep) break;
    LogMelSpectrogram seg;
    seg.config = x.config;
    seg.data = FeatureMatrix::Zero(segment_frames, bins);
    seg.data.topRows(len) = x.data.middleRows(start, len);
    segments.push_back(std::move(seg));
  }
  return segments;
}

SegmentEncoder CheckpointEncoder(const Checkpoint& checkpoint) {
  const NetworkSpec spec = checkpoint.state.encoder;
  ParameterSet<float> params;
  for (const auto& a : checkpoint.state.online.arrays()) {
    size_t layer = std::stoul(a.name.substr(0, a.name.find('.')));
    if (layer < spec.layers.size()) params.Add(a);
  }
  return [spec, params = std::move(params)](const LogMelSpectrogram& segment) {
    LogMelSpectrogram one[] = {segment};
    auto y = NetworkInfer(spec, params, ToNetworkInput(one)).data;
    return std::vector<float>(y.begin(), y.end());
  };
}

std::vector<float> EmbedSpectrogram(const LogMelSpectrogram& log_mel,
                                    const NormStats& stats, int segment_frames,
                                    const SegmentEncoder& encoder) {
  if (log_mel.NumFrames() < 1) {
    throw DataError("embed: utterance produced zero segments");
  }
  auto segments = SegmentUtterance(ApplyNorm(log_mel, stats), segment_frames);
  std::vector<double> sum;
  for (const auto& seg : segments) {
    std::vector<float> y = encoder(seg);
    if (sum.empty()) sum.assign(y.size(), 0.0);
    if (y.size() != sum.size()) throw ShapeError("embed: encoder output size changed");
    for (size_t i = 0; i < y.size(); ++i) sum[i] += y[i];
  }
  std::vector<float> out(sum.size());
  for (size_t i = 0; i < sum.size(); ++i) {
    out[i] = static_cast<float>(sum[i] / static_cast<double>(segments.size()));
    if (!std::isfinite(out[i])) throw NumericError("embed: non-finite embedding");
  }
  return out;
}

Embedder::Embedder(const Checkpoint& checkpoint, const NormStats& stats)
    : mel_(checkpoint.mel),
      stats_(stats),
      segment_frames_(checkpoint.segment_frames),
      dim_(static_cast<int>(checkpoint.state.encoder.OutputSize())),
      encoder_(CheckpointEncoder(checkpoint)) {}

std::vector<float> Embedder::Embed(const Waveform& wave) const {
  Waveform w = wave.sample_rate == mel_.sample_rate
                   ? wave
                   : Resample(wave, mel_.sample_rate);
  return EmbedSpectrogram(LogMel(w, mel_), stats_, segment_frames_, encoder_);
}

EmbeddingVector Embedder::EmbedFile(const std::string& path) const {
  return {UtteranceId(path), Embed(LoadWav(path))};
}

EmbeddingFormat ParseEmbeddingFormat(const std::string& name) {
  if (name == "bin") return EmbeddingFormat::kBinary;
  if (name == "txt") return EmbeddingFormat::kText;
  throw DataError("unknown embedding format '" + name + "' (expected bin or txt)");
}

void WriteEmbeddings(std::ostream& out, std::span<const EmbeddingVector> embs,
                     EmbeddingFormat format) {
  for (const auto& e : embs) {
    if (format == EmbeddingFormat::kBinary) {
      for (float v : e.values) {
        uint8_t b[4];
        std::memcpy(b, &v, 4);
        out.write(reinterpret_cast<const char*>(b), 4);
      }
    } else {
      out << e.id << '\t';
      char buf[32];
      for (size_t i = 0; i < e.values.size(); ++i) {
        std::snprintf(buf, sizeof(buf), "%.9g", e.values[i]);
        if (i) out << ' ';
        out << buf;
      }
      out << '\n';
    }
  }
}

void WriteEmbeddings(const std::string& path,
                     std::span<const EmbeddingVector> embs,
                     EmbeddingFormat format) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("cannot open " + path + " for writing");
  WriteEmbeddings(out, embs, format);
  out.close();
  if (!out) throw DataError("failed writing " + path);
}

std::vector<EmbeddingVector> ReadTextEmbeddings(std::istream& in) {
  std::vector<EmbeddingVector> out;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    auto tab = line.find('\t');
    if (tab == std::string::npos) throw DataError("embedding line without a tab");
    EmbeddingVector e;
    e.id = line.substr(0, tab);
    std::istringstream values(line.substr(tab + 1));
    float v;
    while (values >> v) e.values.push_back(v);
    out.push_back(std::move(e));
  }
  return out;
}

std::string UtteranceId(const std::string& path) {
  return std::filesystem::path(path).stem().string();
}

}  // namespace byola
