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

#include "byola/dsp_features.h"

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <cstring>
#include <random>

#include "byola/errors.h"
#include "test_util.h"

namespace byola {
namespace {

// Filter centers straight from the HTK formula: n_mels + 2 equally spaced
// mel points between fmin and fmax, the interior ones being the centers.
std::vector<double> OracleCenters(const MelConfig& c) {
  auto to_mel = [](double f) { return 2595.0 * std::log10(1.0 + f / 700.0); };
  auto to_hz = [](double m) { return 700.0 * (std::pow(10.0, m / 2595.0) - 1.0); };
  const double lo = to_mel(c.fmin), hi = to_mel(c.fmax);
  std::vector<double> centers;
  for (int i = 1; i <= c.n_mels; ++i) {
    centers.push_back(to_hz(lo + (hi - lo) * i / (c.n_mels + 1)));
  }
  return centers;
}

LogMelSpectrogram RandomSpec(int frames, int bins, uint64_t seed, double scale = 1.0) {
  std::mt19937_64 gen(seed);
  std::normal_distribution<double> dist(0.5, scale);
  LogMelSpectrogram s;
  s.data.resize(frames, bins);
  for (int t = 0; t < frames; ++t)
    for (int f = 0; f < bins; ++f) s.data(t, f) = dist(gen);
  return s;
}

TEST(MelConfigTest, DefaultsAndDerivedSizes) {
  MelConfig c;
  EXPECT_EQ(c.WindowSamples(), 1024);
  EXPECT_EQ(c.HopSamples(), 160);
  EXPECT_EQ(c.FftSize(), 1024);
  EXPECT_NO_THROW(c.Validate());
  c.hop_ms = 80.0;
  EXPECT_THROW(c.Validate(), DataError);
  c = MelConfig{};
  c.fmax = 9000.0;
  EXPECT_THROW(c.Validate(), DataError);
  c = MelConfig{};
  c.n_mels = 0;
  EXPECT_THROW(c.Validate(), DataError);
}

TEST(MelScaleTest, HtkFormula) {
  EXPECT_NEAR(HzToMel(700.0), 2595.0 * std::log10(2.0), 1e-9);
  EXPECT_NEAR(MelToHz(HzToMel(1234.5)), 1234.5, 1e-9);
  EXPECT_EQ(HzToMel(0.0), 0.0);
}

TEST(LogMelTest, OneSecondGivesHundredFrames) {
  auto s = LogMel(testing::WhiteNoise(1.0, 1), MelConfig{});
  EXPECT_EQ(s.NumFrames(), 100);
  EXPECT_EQ(s.NumBins(), 64);
  EXPECT_EQ(NumFrames(16001, MelConfig{}), 101);
  EXPECT_EQ(NumFrames(159, MelConfig{}), 1);
}

TEST(LogMelTest, SilenceHitsTheFloor) {
  Waveform w;
  w.samples.assign(8000, 0.0f);
  auto s = LogMel(w, MelConfig{});
  const double floor = std::log(1e-10);
  EXPECT_TRUE((s.data == floor).all());
}

TEST(LogMelTest, ToneLandsInNearestCenteredFilter) {
  MelConfig c;
  auto centers = OracleCenters(c);
  LogMelExtractor ex(c);
  ASSERT_EQ(ex.filter_centers().size(), centers.size());
  for (size_t i = 0; i < centers.size(); ++i) {
    EXPECT_NEAR(ex.filter_centers()[i], centers[i], 1e-6);
  }
  for (double freq : {1000.0, 437.0, 3100.0}) {
    int want = 0;
    for (int i = 1; i < c.n_mels; ++i) {
      if (std::abs(centers[i] - freq) < std::abs(centers[want] - freq)) want = i;
    }
    auto s = ex.Compute(testing::Tone(freq, 1.0));
    for (int t = 5; t < s.NumFrames() - 5; ++t) {
      Eigen::Index arg;
      s.data.row(t).maxCoeff(&arg);
      ASSERT_EQ(arg, want) << "freq " << freq << " frame " << t;
    }
  }
}

TEST(LogMelTest, TooShortOrWrongRate) {
  Waveform w;
  w.samples.assign(100, 0.1f);
  EXPECT_THROW(LogMel(w, MelConfig{}), DataError);
  Waveform other = testing::Tone(440, 0.5, 22050);
  EXPECT_THROW(LogMel(other, MelConfig{}), DataError);
}

TEST(LogMelTest, TimeShiftByWholeHopsShiftsFrames) {
  const MelConfig c;
  Waveform w = testing::WhiteNoise(1.0, 3);
  for (int k : {1, 3, 7}) {
    Waveform shifted;
    shifted.samples.assign(static_cast<size_t>(k * c.HopSamples()), 0.0f);
    shifted.samples.insert(shifted.samples.end(), w.samples.begin(), w.samples.end());
    auto a = LogMel(w, c);
    auto b = LogMel(shifted, c);
    // Frames whose windows lie fully inside the original signal.
    for (int t = 4; t < a.NumFrames() - 4; ++t) {
      for (int f = 0; f < c.n_mels; ++f) {
        ASSERT_NEAR(b.data(t + k, f), a.data(t, f), 1e-5) << k << " " << t << " " << f;
      }
    }
  }
}

TEST(LogMelTest, DoublingAmplitudeAddsLog4) {
  Waveform w = testing::WhiteNoise(0.5, 4);
  Waveform louder = w;
  for (auto& s : louder.samples) s *= 2.0f;
  auto a = LogMel(w, MelConfig{});
  auto b = LogMel(louder, MelConfig{});
  const double floor = std::log(1e-10);
  for (int t = 0; t < a.NumFrames(); ++t) {
    for (int f = 0; f < a.NumBins(); ++f) {
      if (a.data(t, f) > floor + 1.0) {
        ASSERT_NEAR(b.data(t, f) - a.data(t, f), std::log(4.0), 1e-5);
      }
    }
  }
}

TEST(LogMelTest, ComputeFramesMatchesFullComputation) {
  LogMelExtractor ex(MelConfig{});
  Waveform w = testing::WhiteNoise(0.7, 9);
  auto full = ex.Compute(w);
  auto part = ex.ComputeFrames(w, 13, 40);
  ASSERT_EQ(part.NumFrames(), 40);
  EXPECT_TRUE((part.data - full.data.middleRows(13, 40)).abs().maxCoeff() < 1e-12);
}

TEST(NormStatsTest, ConstantCorpusUsesStdFloor) {
  LogMelSpectrogram s;
  s.data = FeatureMatrix::Constant(10, 4, 3.5);
  std::vector<LogMelSpectrogram> corpus = {s};
  NormStats st = ComputeNormStats(corpus);
  EXPECT_DOUBLE_EQ(st.mean, 3.5);
  EXPECT_DOUBLE_EQ(st.std, 1e-5);
}

TEST(NormStatsTest, HandComputedCells) {
  LogMelSpectrogram s;
  s.data.resize(1, 2);
  s.data << 0.0, 2.0;
  std::vector<LogMelSpectrogram> corpus = {s};
  NormStats st = ComputeNormStats(corpus);
  EXPECT_DOUBLE_EQ(st.mean, 1.0);
  EXPECT_DOUBLE_EQ(st.std, 1.0);
}

TEST(NormStatsTest, MatchesTwoPassOracle) {
  std::vector<LogMelSpectrogram> corpus;
  for (int i = 0; i < 50; ++i) corpus.push_back(RandomSpec(20 + i, 8, 100 + i, 3.0));
  double sum = 0.0, count = 0.0;
  for (const auto& s : corpus) {
    sum += s.data.sum();
    count += static_cast<double>(s.data.size());
  }
  const double mean = sum / count;
  double sq = 0.0;
  for (const auto& s : corpus) sq += (s.data - mean).square().sum();
  const double std = std::sqrt(sq / count);
  NormStats st = ComputeNormStats(corpus);
  EXPECT_NEAR(st.mean, mean, 1e-6 * std::abs(mean));
  EXPECT_NEAR(st.std, std, 1e-6 * std);

  std::vector<LogMelSpectrogram> reversed(corpus.rbegin(), corpus.rend());
  NormStats rs = ComputeNormStats(reversed);
  EXPECT_NEAR(rs.mean, st.mean, 1e-9);
  EXPECT_NEAR(rs.std, st.std, 1e-9);

  NormAccumulator left, right;
  for (int i = 0; i < 50; ++i) (i < 17 ? left : right).Add(corpus[i]);
  left.Merge(right);
  NormStats merged = left.Finalize();
  EXPECT_NEAR(merged.mean, st.mean, 1e-9);
  EXPECT_NEAR(merged.std, st.std, 1e-9);
}

TEST(NormStatsTest, EmptyCorpusIsAnError) {
  std::vector<LogMelSpectrogram> none;
  EXPECT_THROW(ComputeNormStats(none), DataError);
}

TEST(ApplyNormTest, Arithmetic) {
  LogMelSpectrogram s;
  s.data = FeatureMatrix::Constant(2, 2, 3.0);
  auto out = ApplyNorm(s, {1.0, 2.0});
  EXPECT_TRUE((out.data == 1.0).all());
  auto zero = ApplyNorm(s, {3.0, 0.5});
  EXPECT_TRUE((zero.data == 0.0).all());
}

TEST(ApplyNormTest, InverseRecoversInput) {
  auto s = RandomSpec(30, 64, 7, 4.0);
  NormStats st{-2.5, 3.7};
  auto n = ApplyNorm(s, st);
  FeatureMatrix back = n.data * st.std + st.mean;
  EXPECT_LT((back - s.data).abs().maxCoeff(), 1e-7);
}

TEST(NormStatsFileTest, RoundtripAndLayout) {
  testing::TempDir dir;
  NormStats st{-7.25, 2.125};
  WriteNormStats(dir.File("s.nst"), st);
  auto bytes = testing::ReadBytes(dir.File("s.nst"));
  ASSERT_EQ(bytes.size(), 20u);
  EXPECT_EQ(std::string(bytes.begin(), bytes.begin() + 4), "NST1");
  double mean;
  std::memcpy(&mean, bytes.data() + 4, 8);
  EXPECT_EQ(mean, -7.25);
  NormStats back = ReadNormStats(dir.File("s.nst"));
  EXPECT_EQ(back.mean, st.mean);
  EXPECT_EQ(back.std, st.std);

  bytes[0] = 'X';
  testing::WriteBytes(dir.File("bad.nst"), bytes);
  EXPECT_THROW(ReadNormStats(dir.File("bad.nst")), DataError);
  EXPECT_THROW(ReadNormStats(dir.File("missing.nst")), DataError);
}

}  // namespace
}  // namespace byola
