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

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>

#include "byola/audio_io.h"
#include "byola/dsp_features.h"
#include "byola/errors.h"
#include "test_util.h"

namespace byola {
namespace {

TEST(SynthUtteranceTest, FixedPitchPeaksAtF0) {
  SyntheticSpeakerSpec spec;
  spec.f0_min = spec.f0_max = 220.0;
  spec.jitter = 0.0;
  Rng rng(3);
  Waveform w = SynthUtterance(spec, 1.2, &rng);
  EXPECT_NEAR(testing::PeakFrequency(w.samples, 16000, 60.0, 1200.0), 220.0, 1.0);
}

TEST(SynthUtteranceTest, LengthPeakAndDeterminism) {
  SyntheticSpeakerSpec spec;
  Rng a(11), b(11);
  Waveform wa = SynthUtterance(spec, 2.0, &a);
  Waveform wb = SynthUtterance(spec, 2.0, &b);
  EXPECT_EQ(wa.size(), 32000u);
  EXPECT_EQ(wa.samples, wb.samples);
  float peak = 0.0f;
  for (float v : wa.samples) peak = std::max(peak, std::abs(v));
  EXPECT_NEAR(peak, 0.5f, 1e-6f);
  Rng c(12);
  EXPECT_NE(SynthUtterance(spec, 2.0, &c).samples, wa.samples);
}

TEST(SynthUtteranceTest, Preconditions) {
  SyntheticSpeakerSpec spec;
  Rng rng(1);
  EXPECT_THROW(SynthUtterance(spec, 1.0, &rng), DataError);
  spec.formants = {9000.0};
  EXPECT_THROW(SynthUtterance(spec, 1.5, &rng), DataError);
  spec = {};
  spec.f0_min = 200;
  spec.f0_max = 100;
  EXPECT_THROW(SynthUtterance(spec, 1.5, &rng), DataError);
}

TEST(SpeakerSpecTest, DisjointPitchBandsSeparateLogMelMeans) {
  auto specs = MakeSpeakerSpecs(4, 7);
  ASSERT_EQ(specs.size(), 4u);
  for (size_t i = 1; i < specs.size(); ++i) {
    EXPECT_GT(specs[i].f0_min, specs[i - 1].f0_max);
    EXPECT_NE(specs[i].id, specs[i - 1].id);
  }
  EXPECT_EQ(specs[0].id, "spk000");
  // Mean log-mel per speaker over a few utterances; the gap between speakers
  // must dominate the within-speaker spread.
  MelConfig mel;
  std::vector<std::vector<double>> means(specs.size());
  for (size_t s = 0; s < specs.size(); ++s) {
    for (uint64_t u = 0; u < 3; ++u) {
      Rng rng(DeriveSeed(specs[s].seed, u));
      auto lm = LogMel(SynthUtterance(specs[s], 1.5, &rng), mel);
      means[s].push_back(lm.data.mean());
    }
  }
  double within = 0.0, between = 1e9;
  for (size_t s = 0; s < specs.size(); ++s) {
    auto [lo, hi] = std::minmax_element(means[s].begin(), means[s].end());
    within = std::max(within, *hi - *lo);
  }
  for (size_t s = 0; s < specs.size(); ++s) {
    for (size_t t = s + 1; t < specs.size(); ++t) {
      double ms = (means[s][0] + means[s][1] + means[s][2]) / 3;
      double mt = (means[t][0] + means[t][1] + means[t][2]) / 3;
      between = std::min(between, std::abs(ms - mt));
    }
  }
  RecordProperty("within", std::to_string(within));
  RecordProperty("between", std::to_string(between));
  EXPECT_GT(between, 0.01);
  EXPECT_EQ(MakeSpeakerSpecs(4, 7)[2].formants, specs[2].formants);
}

TEST(BuildCorpusTest, CountsManifestAndDeterminism) {
  testing::TempDir dir;
  auto specs = MakeSpeakerSpecs(4, 1);
  CorpusOptions options;
  options.min_duration_s = 1.2;
  options.max_duration_s = 1.3;
  auto m1 = BuildCorpus(specs, 20, dir.File("a"), options);
  auto m2 = BuildCorpus(specs, 20, dir.File("b"), options);
  EXPECT_EQ(m1.SpeakerIds().size(), 4u);
  EXPECT_EQ(m1.NumUtterances(), 80u);
  size_t files = 0;
  for (const auto& e : std::filesystem::recursive_directory_iterator(dir.File("a"))) {
    files += e.path().extension() == ".wav";
  }
  EXPECT_EQ(files, 80u);
  auto p1 = m1.AllPaths(), p2 = m2.AllPaths();
  for (size_t i = 0; i < p1.size(); ++i) {
    ASSERT_EQ(testing::ReadBytes(p1[i]), testing::ReadBytes(p2[i])) << p1[i];
  }
  auto read = ReadManifest(dir.File("a/manifest.tsv"));
  EXPECT_EQ(read.AllPaths(), p1);
  Waveform w = LoadWav(p1[5]);
  EXPECT_GE(w.DurationSeconds(), 1.2 - 1e-9);
  EXPECT_LE(w.DurationSeconds(), 1.3 + 1e-9);
}

TEST(BuildCorpusTest, Errors) {
  testing::TempDir dir;
  EXPECT_THROW(BuildCorpus(MakeSpeakerSpecs(2, 1), 0, dir.File("x")), DataError);
  EXPECT_THROW(BuildCorpus({}, 3, dir.File("x")), DataError);
}

TEST(NoiseTest, KindsAreDistinctAndDeterministic) {
  Rng a(5), b(5);
  for (NoiseKind kind : {NoiseKind::kColored, NoiseKind::kHum, NoiseKind::kBabble}) {
    Waveform x = SynthNoise(kind, 1.0, &a);
    Waveform y = SynthNoise(kind, 1.0, &b);
    EXPECT_EQ(x.size(), 16000u);
    EXPECT_EQ(x.samples, y.samples);
    double energy = 0;
    for (float v : x.samples) energy += v * v;
    EXPECT_GT(energy, 0.0);
  }
  testing::TempDir dir;
  auto paths = BuildNoiseCorpus(5, 9, dir.File("noise"), 1.0);
  ASSERT_EQ(paths.size(), 5u);
  EXPECT_EQ(std::filesystem::path(paths[0]).filename(), "noise_000.wav");
  EXPECT_EQ(LoadWav(paths[4]).size(), 16000u);
}

}  // namespace
}  // namespace byola
