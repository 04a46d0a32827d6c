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

#include <gtest/gtest.h>

#include <cmath>
#include <cstdio>
#include <cstring>
#include <sstream>

#include "byola/checkpoint.h"
#include "byola/errors.h"
#include "test_util.h"

namespace byola {
namespace {

LogMelSpectrogram Ramp(int frames, int bins) {
  LogMelSpectrogram s;
  s.data.resize(frames, bins);
  for (int t = 0; t < frames; ++t)
    for (int f = 0; f < bins; ++f) s.data(t, f) = t + 0.01 * f;
  return s;
}

Checkpoint RandomCheckpoint(int embedding_dim = 512) {
  TrainConfig config;
  config.embedding_dim = embedding_dim;
  config.projector_hidden = 16;
  config.projection_dim = 8;
  config.predictor_hidden = 16;
  Checkpoint ck;
  ck.state = CreateByolState(config, ck.mel, 77);
  return ck;
}

TEST(SegmentTest, CountsAndPadding) {
  auto segs = SegmentUtterance(Ramp(250, 4), 100);
  ASSERT_EQ(segs.size(), 3u);
  for (const auto& s : segs) EXPECT_EQ(s.NumFrames(), 100);
  EXPECT_EQ(segs[1].data(0, 0), 100.0);
  EXPECT_EQ(segs[2].data(49, 0), 249.0);
  EXPECT_EQ(segs[2].data(50, 0), 0.0);
  EXPECT_EQ(segs[2].data(99, 3), 0.0);

  EXPECT_EQ(SegmentUtterance(Ramp(100, 4), 100).size(), 1u);
  auto only = SegmentUtterance(Ramp(30, 4), 100);
  ASSERT_EQ(only.size(), 1u);
  EXPECT_EQ(only[0].NumFrames(), 100);
  EXPECT_EQ(only[0].data(29, 1), 29.01);
  EXPECT_EQ(only[0].data(30, 1), 0.0);
}

TEST(SegmentTest, RemainderRuleBoundary) {
  EXPECT_EQ(SegmentUtterance(Ramp(149, 2), 100).size(), 1u);
  EXPECT_EQ(SegmentUtterance(Ramp(150, 2), 100).size(), 2u);
  EXPECT_EQ(SegmentUtterance(Ramp(200, 2), 100).size(), 2u);
  for (int t = 1; t < 420; t += 7) {
    size_t want = t <= 100 ? 1 : t / 100 + (t % 100 >= 50 ? 1 : 0);
    EXPECT_EQ(SegmentUtterance(Ramp(t, 1), 100).size(), want) << t;
  }
}

TEST(EmbedSpectrogramTest, ConstantEncoderGivesConstant) {
  SegmentEncoder constant = [](const LogMelSpectrogram&) {
    return std::vector<float>{1.5f, -2.0f};
  };
  for (int t : {30, 100, 250, 999}) {
    auto e = EmbedSpectrogram(Ramp(t, 4), {}, 100, constant);
    EXPECT_EQ(e, (std::vector<float>{1.5f, -2.0f})) << t;
  }
  EXPECT_THROW(EmbedSpectrogram(Ramp(0, 4), {}, 100, constant), DataError);
}

TEST(EmbedSpectrogramTest, UsesSuppliedStatsAndMeansSegments) {
  // Encoder reports the segment's first cell, so stats and pooling are visible.
  SegmentEncoder first = [](const LogMelSpectrogram& s) {
    return std::vector<float>{static_cast<float>(s.data(0, 0))};
  };
  auto e = EmbedSpectrogram(Ramp(200, 2), NormStats{10.0, 2.0}, 100, first);
  EXPECT_FLOAT_EQ(e[0], ((0.0 - 10.0) / 2.0 + (100.0 - 10.0) / 2.0) / 2.0);
  SegmentEncoder bad = [](const LogMelSpectrogram&) {
    return std::vector<float>{std::nanf("")};
  };
  EXPECT_THROW(EmbedSpectrogram(Ramp(100, 2), {}, 100, bad), NumericError);
}

TEST(EmbedderTest, OneSecondUtteranceIsSingleSegment) {
  Checkpoint ck = RandomCheckpoint();
  Embedder embedder(ck, {-5.0, 4.0});
  EXPECT_EQ(embedder.dim(), 512);
  auto wave = testing::Tone(190.0, 1.0, 16000, 0.4);
  auto e = embedder.Embed(wave);
  ASSERT_EQ(e.size(), 512u);
  auto direct = CheckpointEncoder(ck)(ApplyNorm(LogMel(wave, ck.mel), {-5.0, 4.0}));
  EXPECT_EQ(e, direct);
  EXPECT_EQ(embedder.Embed(wave), e);
}

TEST(EmbedderTest, ResamplesForeignRates) {
  Checkpoint ck = RandomCheckpoint(16);
  Embedder embedder(ck, {-5.0, 4.0});
  auto wave = testing::Tone(300.0, 1.2, 22050, 0.4);
  auto foreign = embedder.Embed(wave);
  ASSERT_EQ(foreign.size(), 16u);
  EXPECT_EQ(foreign, embedder.Embed(Resample(wave, 16000)));
}

TEST(EmbedderTest, SelfConcatenationWithInteriorEncoder) {
  // An encoder that reads only interior frames sees the same segment twice.
  auto wave = testing::Tone(250.0, 1.0, 16000, 0.4);
  auto doubled = wave;
  doubled.samples.insert(doubled.samples.end(), wave.samples.begin(), wave.samples.end());
  MelConfig mel;
  SegmentEncoder interior = [](const LogMelSpectrogram& s) {
    std::vector<float> out(s.NumBins(), 0.0f);
    for (int t = 5; t < 95; ++t)
      for (int f = 0; f < s.NumBins(); ++f) out[f] += static_cast<float>(s.data(t, f));
    return out;
  };
  auto a = EmbedSpectrogram(LogMel(wave, mel), {-5.0, 4.0}, 100, interior);
  auto b = EmbedSpectrogram(LogMel(doubled, mel), {-5.0, 4.0}, 100, interior);
  for (size_t i = 0; i < a.size(); ++i) {
    EXPECT_NEAR(b[i], a[i], 1e-5 * std::max(1.0f, std::abs(a[i]))) << i;
  }
}

TEST(EmbedderTest, SelfConcatenationWithTrainedShapeEncoder) {
  // The real encoder's receptive field reaches the reflect-padded edges, so
  // the doubled utterance differs by the edge frames only.
  Checkpoint ck = RandomCheckpoint();
  Embedder embedder(ck, {-5.0, 4.0});
  auto wave = testing::Tone(250.0, 1.0, 16000, 0.4);
  auto doubled = wave;
  doubled.samples.insert(doubled.samples.end(), wave.samples.begin(), wave.samples.end());
  auto a = embedder.Embed(wave);
  auto b = embedder.Embed(doubled);
  double dot = 0.0, aa = 0.0, bb = 0.0;
  for (size_t i = 0; i < a.size(); ++i) {
    dot += double(a[i]) * b[i];
    aa += double(a[i]) * a[i];
    bb += double(b[i]) * b[i];
  }
  const double cosine_distance = 1.0 - dot / std::sqrt(aa * bb);
  RecordProperty("cosine_distance", std::to_string(cosine_distance));
  std::printf("self-concatenation cosine distance %.3g\n", cosine_distance);
  EXPECT_LT(cosine_distance, 1e-3);
}

TEST(EmbeddingIoTest, BinaryIsRawLittleEndianFloats) {
  std::vector<EmbeddingVector> embs = {{"a", {1.0f, -0.5f}}, {"b", {3.25f, 0.0f}}};
  std::ostringstream out;
  WriteEmbeddings(out, embs, EmbeddingFormat::kBinary);
  std::string bytes = out.str();
  ASSERT_EQ(bytes.size(), 16u);
  float v;
  std::memcpy(&v, bytes.data() + 8, 4);
  EXPECT_EQ(v, 3.25f);
  EXPECT_EQ(static_cast<uint8_t>(bytes[7]), 0xbf);  // -0.5f = 0xbf000000
}

TEST(EmbeddingIoTest, TextRoundtripsExactly) {
  std::vector<EmbeddingVector> embs = {{"utt_1", {0.1f, -1e-7f, 123456.78f}},
                                       {"utt_2", {std::nextafter(1.0f, 2.0f), 0.f, 2.f}}};
  std::ostringstream out;
  WriteEmbeddings(out, embs, EmbeddingFormat::kText);
  EXPECT_EQ(out.str().substr(0, 6), "utt_1\t");
  std::istringstream in(out.str());
  auto back = ReadTextEmbeddings(in);
  ASSERT_EQ(back.size(), 2u);
  for (size_t i = 0; i < 2; ++i) {
    EXPECT_EQ(back[i].id, embs[i].id);
    EXPECT_EQ(back[i].values, embs[i].values);
  }
  EXPECT_EQ(ParseEmbeddingFormat("txt"), EmbeddingFormat::kText);
  EXPECT_THROW(ParseEmbeddingFormat("csv"), DataError);
  EXPECT_EQ(UtteranceId("/x/y/spk_003.wav"), "spk_003");
}

}  // namespace
}  // namespace byola
