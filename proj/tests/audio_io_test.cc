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

#include "byola/audio_io.h"

#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "byola/errors.h"
#include "test_util.h"

namespace byola {
namespace {

using testing::MakeWavBytes;
using testing::PeakFrequency;
using testing::TempDir;
using testing::WriteBytes;

WavErrorKind LoadErrorKind(const std::string& path) {
  try {
    LoadWav(path);
  } catch (const WavError& e) {
    return e.kind();
  }
  ADD_FAILURE() << "expected a WavError for " << path;
  return WavErrorKind::kUnwritable;
}

TEST(LoadWavTest, ScalesSamplesByInverse32768) {
  TempDir dir;
  WriteBytes(dir.File("one.wav"), MakeWavBytes({32767}, 1, 22050));
  Waveform w = LoadWav(dir.File("one.wav"));
  ASSERT_EQ(w.size(), 1u);
  EXPECT_EQ(w.sample_rate, 22050);
  EXPECT_FLOAT_EQ(w.samples[0], 32767.0f / 32768.0f);
}

TEST(LoadWavTest, AveragesStereoToMono) {
  TempDir dir;
  WriteBytes(dir.File("st.wav"), MakeWavBytes({16384, -16384, 8192, 8192}, 2, 16000));
  Waveform w = LoadWav(dir.File("st.wav"));
  ASSERT_EQ(w.size(), 2u);
  EXPECT_EQ(w.samples[0], 0.0f);
  EXPECT_FLOAT_EQ(w.samples[1], 0.25f);
}

TEST(LoadWavTest, SkipsUnknownChunks) {
  TempDir dir;
  auto bytes = MakeWavBytes({100, -100}, 1, 16000);
  // Insert a LIST chunk between fmt and data.
  std::vector<uint8_t> extra = {'L', 'I', 'S', 'T', 3, 0, 0, 0, 'a', 'b', 'c', 0};
  bytes.insert(bytes.begin() + 36, extra.begin(), extra.end());
  WriteBytes(dir.File("list.wav"), bytes);
  Waveform w = LoadWav(dir.File("list.wav"));
  ASSERT_EQ(w.size(), 2u);
  EXPECT_FLOAT_EQ(w.samples[1], -100.0f / 32768.0f);
}

TEST(LoadWavTest, ErrorsAreDistinct) {
  TempDir dir;
  EXPECT_EQ(LoadErrorKind(dir.File("absent.wav")), WavErrorKind::kMissingFile);

  auto bad_magic = MakeWavBytes({1, 2}, 1, 16000);
  bad_magic[0] = 'X';
  WriteBytes(dir.File("magic.wav"), bad_magic);
  EXPECT_EQ(LoadErrorKind(dir.File("magic.wav")), WavErrorKind::kMalformedHeader);

  auto truncated = MakeWavBytes({1, 2}, 1, 16000);
  truncated.resize(20);
  WriteBytes(dir.File("short.wav"), truncated);
  EXPECT_EQ(LoadErrorKind(dir.File("short.wav")), WavErrorKind::kMalformedHeader);

  WriteBytes(dir.File("float.wav"), MakeWavBytes({0, 0}, 1, 16000, 32, 3));
  EXPECT_EQ(LoadErrorKind(dir.File("float.wav")), WavErrorKind::kUnsupportedEncoding);

  WriteBytes(dir.File("pcm8.wav"), MakeWavBytes({0, 0}, 1, 16000, 8, 1));
  EXPECT_EQ(LoadErrorKind(dir.File("pcm8.wav")), WavErrorKind::kUnsupportedEncoding);
}

TEST(SaveWavTest, RoundtripWithinOneQuantizationStep) {
  TempDir dir;
  std::mt19937_64 gen(11);
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  Waveform w;
  w.samples.resize(16000);
  for (auto& s : w.samples) s = static_cast<float>(dist(gen));
  SaveWav(dir.File("rt.wav"), w);
  Waveform back = LoadWav(dir.File("rt.wav"));
  ASSERT_EQ(back.size(), w.size());
  EXPECT_EQ(back.sample_rate, 16000);
  for (size_t i = 0; i < w.size(); ++i) {
    ASSERT_LE(std::abs(back.samples[i] - w.samples[i]), 1.0 / 32768.0) << i;
  }
}

TEST(SaveWavTest, ClampsOutOfRangeSamples) {
  TempDir dir;
  Waveform w;
  w.samples = {1.5f, -3.0f};
  SaveWav(dir.File("clip.wav"), w);
  auto bytes = testing::ReadBytes(dir.File("clip.wav"));
  ASSERT_EQ(bytes.size(), 44u + 4u);
  int16_t first = static_cast<int16_t>(bytes[44] | (bytes[45] << 8));
  int16_t second = static_cast<int16_t>(bytes[46] | (bytes[47] << 8));
  EXPECT_EQ(first, 32767);
  EXPECT_EQ(second, -32768);
}

TEST(SaveWavTest, EmptyWaveformHasZeroLengthData) {
  TempDir dir;
  SaveWav(dir.File("empty.wav"), Waveform{});
  Waveform back = LoadWav(dir.File("empty.wav"));
  EXPECT_EQ(back.size(), 0u);
  EXPECT_EQ(back.sample_rate, 16000);
}

TEST(SaveWavTest, UnwritablePath) {
  TempDir dir;
  Waveform w;
  w.samples = {0.0f};
  try {
    SaveWav(dir.File("no/such/dir/x.wav"), w);
    FAIL() << "expected WavError";
  } catch (const WavError& e) {
    EXPECT_EQ(e.kind(), WavErrorKind::kUnwritable);
  }
}

TEST(WaveformTest, ValidateRejectsNonFinite) {
  Waveform w;
  w.samples = {0.0f, std::nanf("")};
  EXPECT_THROW(w.Validate(), DataError);
  w.samples = {0.0f};
  w.sample_rate = 0;
  EXPECT_THROW(w.Validate(), DataError);
}

TEST(ResampleTest, SameRateIsIdentity) {
  Waveform w = testing::WhiteNoise(0.3, 5);
  Waveform out = Resample(w, 16000);
  EXPECT_EQ(out.samples, w.samples);
}

TEST(ResampleTest, HalvingRateHalvesLength) {
  Waveform w = testing::WhiteNoise(0.5, 6, 32000);
  ASSERT_EQ(w.size(), 16000u);
  Waveform out = Resample(w, 16000);
  EXPECT_EQ(out.size(), 8000u);
  EXPECT_EQ(out.sample_rate, 16000);
}

TEST(ResampleTest, PreservesToneFrequency) {
  Waveform w = testing::Tone(440.0, 2.0, 48000);
  Waveform out = Resample(w, 16000);
  EXPECT_NEAR(PeakFrequency(out.samples, 16000, 300.0, 600.0), 440.0, 1.0);
}

TEST(ResampleTest, PreservesToneAcrossAwkwardRatios) {
  for (int rate : {8000, 22050, 44100}) {
    Waveform w = testing::Tone(1000.0, 1.5, rate);
    Waveform out = Resample(w, 16000);
    EXPECT_NEAR(PeakFrequency(out.samples, 16000, 800.0, 1200.0), 1000.0, 1.0) << rate;
  }
}

TEST(ResampleTest, PreservesDurationWithinOneOutputSample) {
  for (int from : {8000, 11025, 16000, 22050, 44100, 48000}) {
    for (int to : {8000, 16000, 24000}) {
      for (size_t len : {1u, 7u, 1001u, 4410u}) {
        Waveform w;
        w.sample_rate = from;
        w.samples.assign(len, 0.1f);
        Waveform out = Resample(w, to);
        const double want = static_cast<double>(len) / from;
        EXPECT_LE(std::abs(out.DurationSeconds() - want), 1.0 / to)
            << from << "->" << to << " len " << len;
      }
    }
  }
}

TEST(ResampleTest, RejectsBadRate) {
  EXPECT_THROW(Resample(testing::Tone(100, 0.1), 0), DataError);
}

TEST(ResampleByRatioTest, ProducesRequestedLengthAndTone) {
  Waveform w = testing::Tone(200.0, 1.0);
  const double ratio = 1.0 / std::pow(2.0, 1.0 / 12.0);
  auto out = ResampleByRatio(w.samples, ratio, 15000);
  EXPECT_EQ(out.size(), 15000u);
  // Played back at the original rate the tone moves up by 1/ratio.
  EXPECT_NEAR(PeakFrequency(out, 16000, 150.0, 300.0), 200.0 / ratio, 0.5);
}

}  // namespace
}  // namespace byola
