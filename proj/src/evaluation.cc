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

#include "byola/evaluation.h"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <numbers>
#include <set>

#include "byola/errors.h"

namespace byola {
namespace {

template <typename T>
double CosineDistanceImpl(std::span<const T> u1, std::span<const T> u2) {
  if (u1.size() != u2.size()) throw DataError("cosine_distance: dimension mismatch");
  double dot = 0.0, n1 = 0.0, n2 = 0.0;
  for (size_t i = 0; i < u1.size(); ++i) {
    dot += static_cast<double>(u1[i]) * u2[i];
    n1 += static_cast<double>(u1[i]) * u1[i];
    n2 += static_cast<double>(u2[i]) * u2[i];
  }
  if (!(n1 > 0.0) || !(n2 > 0.0)) throw DataError("cosine_distance: zero vector");
  double cos = dot / (std::sqrt(n1) * std::sqrt(n2));
  return 1.0 - std::clamp(cos, -1.0, 1.0);
}

}  // namespace

double CosineDistance(std::span<const float> u1, std::span<const float> u2) {
  return CosineDistanceImpl(u1, u2);
}

double CosineDistance(std::span<const double> u1, std::span<const double> u2) {
  return CosineDistanceImpl(u1, u2);
}

void SpeakerManifest::Add(const std::string& speaker, const std::string& path) {
  if (speaker.empty()) throw DataError("manifest: empty speaker id");
  auto& paths = speakers_[speaker];
  if (std::find(paths.begin(), paths.end(), path) != paths.end()) {
    throw DataError("manifest: duplicate path " + path + " for speaker " + speaker);
  }
  paths.push_back(path);
}

std::vector<std::string> SpeakerManifest::SpeakerIds() const {
  std::vector<std::string> ids;
  for (const auto& [id, paths] : speakers_) ids.push_back(id);
  return ids;
}

std::vector<std::string> SpeakerManifest::AllPaths() const {
  std::vector<std::string> out;
  for (const auto& [id, paths] : speakers_) out.insert(out.end(), paths.begin(), paths.end());
  return out;
}

size_t SpeakerManifest::NumUtterances() const {
  size_t n = 0;
  for (const auto& [id, paths] : speakers_) n += paths.size();
  return n;
}

SpeakerManifest ReadManifest(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("manifest: cannot open " + path);
  const auto base = std::filesystem::path(path).parent_path();
  SpeakerManifest manifest;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    auto tab = line.find('\t');
    if (tab == std::string::npos || tab == 0 || tab + 1 == line.size()) {
      throw DataError("manifest " + path + ":" + std::to_string(line_no) +
                      ": expected speaker<TAB>path");
    }
    std::filesystem::path utt(line.substr(tab + 1));
    if (utt.is_relative()) utt = base / utt;
    manifest.Add(line.substr(0, tab), utt.lexically_normal().string());
  }
  if (manifest.empty()) throw DataError("manifest: " + path + " lists no utterances");
  return manifest;
}

void WriteManifest(const std::string& path, const SpeakerManifest& manifest) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw DataError("manifest: cannot write " + path);
  for (const auto& [speaker, paths] : manifest.speakers()) {
    for (const auto& p : paths) out << speaker << '\t' << p << '\n';
  }
  out.close();
  if (!out) throw DataError("manifest: failed writing " + path);
}

SpeakerCentroid ComputeCentroid(const std::string& speaker,
                                std::span<const std::vector<float>> embeddings) {
  if (embeddings.empty()) {
    throw DataError("centroid: speaker " + speaker + " has no embeddings");
  }
  SpeakerCentroid c{speaker, std::vector<double>(embeddings[0].size(), 0.0)};
  for (const auto& e : embeddings) {
    if (e.size() != c.vector.size()) throw DataError("centroid: dimension mismatch");
    for (size_t i = 0; i < e.size(); ++i) c.vector[i] += e[i];
  }
  for (double& v : c.vector) v /= static_cast<double>(embeddings.size());
  return c;
}

double Median(std::vector<double> values) {
  if (values.empty()) throw DataError("median of an empty set");
  std::sort(values.begin(), values.end());
  const size_t n = values.size();
  return n % 2 ? values[n / 2] : 0.5 * (values[n / 2 - 1] + values[n / 2]);
}

S2tResult S2tSameFromEmbeddings(
    const std::map<std::string, std::vector<std::vector<float>>>& probe,
    const std::map<std::string, std::vector<std::vector<float>>>& reference) {
  if (probe.empty()) throw DataError("s2t: no speakers");
  std::set<std::string> a, b;
  for (const auto& [k, v] : probe) a.insert(k);
  for (const auto& [k, v] : reference) b.insert(k);
  if (a != b) throw DataError("s2t: probe and reference speaker sets differ");
  S2tResult result;
  std::vector<double> distances;
  for (const auto& [speaker, embs] : probe) {
    auto cp = ComputeCentroid(speaker, embs);
    auto cr = ComputeCentroid(speaker, reference.at(speaker));
    double d = CosineDistance(std::span<const double>(cp.vector),
                              std::span<const double>(cr.vector));
    result.per_speaker[speaker] = d;
    distances.push_back(d);
  }
  result.median = Median(std::move(distances));
  return result;
}

S2tResult S2tSame(const SpeakerManifest& probe,
                  const SpeakerManifest& reference, const Embedder& embedder) {
  if (probe.SpeakerIds() != reference.SpeakerIds()) {
    throw DataError("s2t: probe and reference speaker sets differ");
  }
  auto embed_all = [&](const SpeakerManifest& m) {
    std::map<std::string, std::vector<std::vector<float>>> out;
    for (const auto& [speaker, paths] : m.speakers()) {
      if (paths.empty()) throw DataError("s2t: speaker " + speaker + " has no utterances");
      for (const auto& p : paths) out[speaker].push_back(embedder.EmbedFile(p).values);
    }
    return out;
  };
  return S2tSameFromEmbeddings(embed_all(probe), embed_all(reference));
}

std::vector<double> DctII(std::span<const double> x) {
  const size_t n = x.size();
  std::vector<double> out(n, 0.0);
  if (n == 0) return out;
  const double pi = std::numbers::pi;
  for (size_t k = 0; k < n; ++k) {
    double s = 0.0;
    for (size_t i = 0; i < n; ++i) {
      s += x[i] * std::cos(pi * (static_cast<double>(i) + 0.5) * k / n);
    }
    out[k] = s * std::sqrt((k == 0 ? 1.0 : 2.0) / n);
  }
  return out;
}

CepstraSequence Cepstra(const LogMelSpectrogram& x, int num_coeffs) {
  const int bins = x.NumBins();
  if (num_coeffs < 1 || num_coeffs >= bins) {
    throw DataError("cepstra: coefficient count must be in [1, n_mels)");
  }
  const double pi = std::numbers::pi;
  // Rows 1..K of the orthonormal DCT-II matrix.
  Eigen::MatrixXd basis(bins, num_coeffs);
  for (int k = 1; k <= num_coeffs; ++k) {
    for (int i = 0; i < bins; ++i) {
      basis(i, k - 1) = std::sqrt(2.0 / bins) * std::cos(pi * (i + 0.5) * k / bins);
    }
  }
  CepstraSequence out = (x.data.matrix() * basis).array();
  return out;
}

DtwResult DtwAlign(const CepstraSequence& a, const CepstraSequence& b) {
  const int n = static_cast<int>(a.rows()), m = static_cast<int>(b.rows());
  if (n == 0 || m == 0) throw DataError("dtw: empty sequence");
  if (a.cols() != b.cols()) throw DataError("dtw: coefficient counts differ");
  const double inf = std::numeric_limits<double>::infinity();
  Eigen::MatrixXd acc = Eigen::MatrixXd::Constant(n, m, inf);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < m; ++j) {
      double local = (a.row(i) - b.row(j)).matrix().norm();
      double best;
      if (i == 0 && j == 0) {
        best = 0.0;
      } else {
        best = inf;
        if (i > 0 && j > 0) best = acc(i - 1, j - 1);
        if (i > 0) best = std::min(best, acc(i - 1, j));
        if (j > 0) best = std::min(best, acc(i, j - 1));
      }
      acc(i, j) = best + local;
    }
  }
  DtwResult r;
  r.total_cost = acc(n - 1, m - 1);
  int i = n - 1, j = m - 1;
  r.path.emplace_back(i, j);
  while (i > 0 || j > 0) {
    if (i > 0 && j > 0) {
      double diag = acc(i - 1, j - 1), up = acc(i - 1, j), left = acc(i, j - 1);
      if (diag <= up && diag <= left) {
        --i;
        --j;
      } else if (up <= left) {
        --i;
      } else {
        --j;
      }
    } else if (i > 0) {
      --i;
    } else {
      --j;
    }
    r.path.emplace_back(i, j);
  }
  std::reverse(r.path.begin(), r.path.end());
  return r;
}

double Mcd(const CepstraSequence& a, const CepstraSequence& b) {
  const DtwResult align = DtwAlign(a, b);
  double sum = 0.0;
  for (const auto& [i, j] : align.path) {
    sum += std::sqrt(2.0 * (a.row(i) - b.row(j)).square().sum());
  }
  return 10.0 / std::numbers::ln10 * sum / static_cast<double>(align.path.size());
}

double McdFiles(const std::string& a, const std::string& b,
                const MelConfig& mel, int num_coeffs) {
  auto cep = [&](const std::string& path) {
    Waveform w = LoadWav(path);
    if (w.sample_rate != mel.sample_rate) w = Resample(w, mel.sample_rate);
    return Cepstra(LogMel(w, mel), num_coeffs);
  };
  return Mcd(cep(a), cep(b));
}

}  // namespace byola
