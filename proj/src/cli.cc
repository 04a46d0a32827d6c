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

#include "byola/cli.h"

#include <CLI11.hpp>

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>

#include "byola/augmentation.h"
#include "byola/byol_trainer.h"
#include "byola/checkpoint.h"
#include "byola/config.h"
#include "byola/embedding.h"
#include "byola/errors.h"
#include "byola/evaluation.h"
#include "byola/synthetic_corpus.h"

namespace byola {
namespace {

std::string Fixed(double v, int digits) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.*f", digits, v);
  return buf;
}

Waveform LoadAt(const std::string& path, int rate) {
  Waveform w = LoadWav(path);
  return w.sample_rate == rate ? w : Resample(w, rate);
}

struct SynthArgs {
  int speakers = 4;
  int utts = 20;
  int noise_files = 0;
  std::string out;
  uint64_t seed = 0;
};

int RunSynth(const SynthArgs& a, std::ostream& out) {
  auto specs = MakeSpeakerSpecs(a.speakers, a.seed);
  SpeakerManifest m = BuildCorpus(specs, a.utts, a.out);
  out << "wrote " << m.NumUtterances() << " utterances for " << specs.size()
      << " speakers to " << a.out << "\n";
  if (a.noise_files > 0) {
    const std::string dir = (std::filesystem::path(a.out) / "noise").string();
    BuildNoiseCorpus(a.noise_files, DeriveSeed(a.seed, 0x6e6f697365ULL), dir);
    out << "wrote " << a.noise_files << " noise files to " << dir << "\n";
  }
  return kExitOk;
}

struct FeatstatsArgs {
  std::string manifest;
  std::string out;
  std::string config;
};

int RunFeatstats(const FeatstatsArgs& a, std::ostream& out) {
  MelConfig mel;
  if (!a.config.empty()) mel = LoadRunConfig(a.config).mel;
  SpeakerManifest m = ReadManifest(a.manifest);
  NormStats stats = ComputeNormStatsFromFiles(m.AllPaths(), mel);
  WriteNormStats(a.out, stats);
  out << "mean " << Fixed(stats.mean, 6) << "\n"
      << "std " << Fixed(stats.std, 6) << "\n";
  return kExitOk;
}

struct TrainArgs {
  std::string config;
  std::optional<uint64_t> seed;
  std::vector<std::string> overrides;
};

int RunTrain(const TrainArgs& a, std::ostream& out, std::ostream& err) {
  RunConfig cfg = LoadRunConfig(a.config);
  for (const auto& kv : a.overrides) {
    auto eq = kv.find('=');
    if (eq == std::string::npos) throw DataError("--set expects key=value, got " + kv);
    cfg.Set(kv.substr(0, eq), kv.substr(eq + 1));
  }
  if (a.seed) {
    cfg.seed = *a.seed;
    cfg.train.seed = *a.seed;
  }
  cfg.Validate();
  if (cfg.paths.manifest.empty()) throw DataError("config: paths.manifest is required");
  if (cfg.paths.checkpoint_dir.empty()) {
    throw DataError("config: paths.checkpoint_dir is required");
  }
  const std::vector<std::string> files = ReadManifest(cfg.paths.manifest).AllPaths();

  NormStats stats;
  if (!cfg.paths.stats.empty()) {
    stats = ReadNormStats(cfg.paths.stats);
  } else {
    stats = ComputeNormStatsFromFiles(files, cfg.mel);
    err << "computed stats from the training manifest: mean "
        << Fixed(stats.mean, 6) << " std " << Fixed(stats.std, 6) << "\n";
  }

  FitOptions options;
  options.checkpoint_dir = cfg.paths.checkpoint_dir;
  if (!cfg.paths.noise_dir.empty()) {
    for (const auto& p : ListWavFiles(cfg.paths.noise_dir)) {
      options.noises.push_back(LoadAt(p, cfg.mel.sample_rate));
    }
  }
  std::unique_ptr<std::ofstream> log_file;
  if (!cfg.paths.log.empty()) {
    log_file = std::make_unique<std::ofstream>(cfg.paths.log, std::ios::trunc);
    if (!*log_file) throw DataError("cannot open log " + cfg.paths.log);
    options.log = log_file.get();
  } else {
    options.log = &out;
  }
  FitFromFiles(files, cfg.train, cfg.augment, stats, cfg.mel, options);
  out << "final checkpoint "
      << (std::filesystem::path(cfg.paths.checkpoint_dir) / "final.bylc").string()
      << "\n";
  return kExitOk;
}

struct EmbedArgs {
  std::string ckpt;
  std::string stats;
  std::string wav;
  std::string manifest;
  std::string out;
  std::string format = "txt";
};

int RunEmbed(const EmbedArgs& a, std::ostream& out) {
  const EmbeddingFormat format = ParseEmbeddingFormat(a.format);
  Embedder embedder(LoadCheckpoint(a.ckpt), ReadNormStats(a.stats));
  std::vector<std::string> paths;
  if (!a.wav.empty()) paths.push_back(a.wav);
  if (!a.manifest.empty()) {
    for (const auto& p : ReadManifest(a.manifest).AllPaths()) paths.push_back(p);
  }
  std::vector<EmbeddingVector> embs;
  for (const auto& p : paths) embs.push_back(embedder.EmbedFile(p));
  WriteEmbeddings(a.out, embs, format);
  out << "wrote " << embs.size() << " embeddings of dim " << embedder.dim()
      << " to " << a.out << "\n";
  return kExitOk;
}

struct S2tArgs {
  std::string ckpt;
  std::string stats;
  std::string probe;
  std::string ref;
  bool tsv = false;
};

int RunS2t(const S2tArgs& a, std::ostream& out) {
  Embedder embedder(LoadCheckpoint(a.ckpt), ReadNormStats(a.stats));
  S2tResult r = S2tSame(ReadManifest(a.probe), ReadManifest(a.ref), embedder);
  if (a.tsv) {
    for (const auto& [speaker, d] : r.per_speaker) {
      out << "s2t_same\t" << speaker << '\t' << Fixed(d, 6) << "\n";
    }
    out << "s2t_same\tmedian\t" << Fixed(r.median, 6) << "\n";
    return kExitOk;
  }
  out << "speaker\ts2t_same\n";
  for (const auto& [speaker, d] : r.per_speaker) {
    out << speaker << '\t' << Fixed(d, 4) << "\n";
  }
  out << "median\t" << Fixed(r.median, 4) << "\n";
  return kExitOk;
}

struct McdArgs {
  std::string a;
  std::string b;
  int coeffs = 13;
};

int RunMcd(const McdArgs& a, std::ostream& out) {
  out << "mcd " << Fixed(McdFiles(a.a, a.b, MelConfig{}, a.coeffs), 3) << "\n";
  return kExitOk;
}

struct AugmentArgs {
  std::string wav;
  double pitch = 0.0;
  double stretch = 1.0;
  std::string noise;
  std::optional<double> snr;
  std::string out;
  uint64_t seed = 0;
};

int RunAugment(const AugmentArgs& a, std::ostream& out) {
  if (!a.noise.empty() && !a.snr) throw DataError("--noise requires --snr");
  Waveform w = LoadWav(a.wav);
  if (a.pitch != 0.0) w = PitchShift(w, a.pitch);
  if (a.stretch != 1.0) w = TimeStretch(w, a.stretch);
  if (!a.noise.empty()) {
    Rng rng(DeriveSeed(a.seed, 0));
    w = MixNoiseAtSnr(w, LoadAt(a.noise, w.sample_rate), *a.snr, &rng);
  }
  SaveWav(a.out, w);
  out << "wrote " << w.size() << " samples to " << a.out << "\n";
  return kExitOk;
}

}  // namespace

std::vector<std::string> ListWavFiles(const std::string& dir) {
  std::vector<std::string> out;
  std::error_code ec;
  for (const auto& entry : std::filesystem::recursive_directory_iterator(dir, ec)) {
    if (entry.is_regular_file() && entry.path().extension() == ".wav") {
      out.push_back(entry.path().string());
    }
  }
  if (ec) throw DataError("cannot list " + dir + ": " + ec.message());
  std::sort(out.begin(), out.end());
  return out;
}

NormStats ComputeNormStatsFromFiles(const std::vector<std::string>& paths,
                                    const MelConfig& mel) {
  LogMelExtractor extractor(mel);
  NormAccumulator acc;
  for (const auto& p : paths) acc.Add(extractor.Compute(LoadAt(p, mel.sample_rate)));
  return acc.Finalize();
}

int RunCli(int argc, const char* const* argv, std::ostream& out,
           std::ostream& err) {
  CLI::App app{"Self-supervised speaker embeddings from log-mel spectrograms",
               "byola"};
  app.require_subcommand(1);

  SynthArgs synth;
  auto* cmd_synth = app.add_subcommand("synth-corpus", "Write a synthetic multi-speaker corpus");
  cmd_synth->add_option("--speakers", synth.speakers, "Number of speakers")->check(CLI::PositiveNumber);
  cmd_synth->add_option("--utts", synth.utts, "Utterances per speaker")->check(CLI::NonNegativeNumber);
  cmd_synth->add_option("--noise-files", synth.noise_files, "Also write this many noise files under <out>/noise");
  cmd_synth->add_option("--out", synth.out, "Output directory")->required();
  cmd_synth->add_option("--seed", synth.seed, "Random seed")->required();

  FeatstatsArgs featstats;
  auto* cmd_stats = app.add_subcommand("featstats", "Global log-mel mean and std of a manifest");
  cmd_stats->add_option("--manifest", featstats.manifest, "speaker<TAB>path manifest")->required();
  cmd_stats->add_option("--out", featstats.out, "Output NST1 file")->required();
  cmd_stats->add_option("--config", featstats.config, "Run config (mel.* keys are used)");

  TrainArgs train;
  auto* cmd_train = app.add_subcommand("train", "Train the online/target networks");
  cmd_train->add_option("--config", train.config, "Run config file")->required();
  cmd_train->add_option("--seed", train.seed, "Override the config seed");
  cmd_train->add_option("--set", train.overrides, "Override a config key (key=value)");

  EmbedArgs embed;
  auto* cmd_embed = app.add_subcommand("embed", "Embed utterances with a trained encoder");
  cmd_embed->add_option("--ckpt", embed.ckpt, "Checkpoint")->required();
  cmd_embed->add_option("--stats", embed.stats, "Training-corpus NST1 stats")->required();
  auto* wav_opt = cmd_embed->add_option("--wav", embed.wav, "Single input WAV");
  auto* man_opt = cmd_embed->add_option("--manifest", embed.manifest, "Input manifest");
  wav_opt->excludes(man_opt);
  cmd_embed->add_option("--out", embed.out, "Output file")->required();
  cmd_embed->add_option("--format", embed.format, "bin or txt")
      ->check(CLI::IsMember({"bin", "txt"}));

  S2tArgs s2t;
  auto* cmd_s2t = app.add_subcommand("eval-s2t", "Median same-speaker centroid distance");
  cmd_s2t->add_option("--ckpt", s2t.ckpt, "Checkpoint")->required();
  cmd_s2t->add_option("--stats", s2t.stats, "Training-corpus NST1 stats")->required();
  cmd_s2t->add_option("--probe", s2t.probe, "Probe manifest")->required();
  cmd_s2t->add_option("--ref", s2t.ref, "Reference manifest")->required();
  cmd_s2t->add_flag("--tsv", s2t.tsv, "Machine-readable metric<TAB>speaker<TAB>value lines");

  McdArgs mcd;
  auto* cmd_mcd = app.add_subcommand("eval-mcd", "Mel cepstral distortion between two files");
  cmd_mcd->add_option("--a", mcd.a, "First WAV")->required();
  cmd_mcd->add_option("--b", mcd.b, "Second WAV")->required();
  cmd_mcd->add_option("--coeffs", mcd.coeffs, "Cepstral coefficients (c0 excluded)")
      ->check(CLI::PositiveNumber);

  AugmentArgs aug;
  auto* cmd_aug = app.add_subcommand("augment", "Apply the waveform augmentation chain");
  cmd_aug->add_option("--wav", aug.wav, "Input WAV")->required();
  cmd_aug->add_option("--pitch", aug.pitch, "Pitch shift in semitones");
  cmd_aug->add_option("--stretch", aug.stretch, "Duration factor");
  cmd_aug->add_option("--noise", aug.noise, "Noise WAV");
  cmd_aug->add_option("--snr", aug.snr, "Target SNR in dB");
  cmd_aug->add_option("--out", aug.out, "Output WAV")->required();
  cmd_aug->add_option("--seed", aug.seed, "Random seed")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    err << e.what() << "\n" << app.help();
    return kExitUsage;
  }
  if (cmd_embed->parsed() && embed.wav.empty() && embed.manifest.empty()) {
    err << "embed: one of --wav or --manifest is required\n" << cmd_embed->help();
    return kExitUsage;
  }

  try {
    if (cmd_synth->parsed()) return RunSynth(synth, out);
    if (cmd_stats->parsed()) return RunFeatstats(featstats, out);
    if (cmd_train->parsed()) return RunTrain(train, out, err);
    if (cmd_embed->parsed()) return RunEmbed(embed, out);
    if (cmd_s2t->parsed()) return RunS2t(s2t, out);
    if (cmd_mcd->parsed()) return RunMcd(mcd, out);
    if (cmd_aug->parsed()) return RunAugment(aug, out);
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return kExitDataError;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitDataError;
  }
  return kExitUsage;
}

int RunCli(const std::vector<std::string>& args, std::ostream& out,
           std::ostream& err) {
  std::vector<const char*> argv;
  argv.push_back("byola");
  for (const auto& a : args) argv.push_back(a.c_str());
  return RunCli(static_cast<int>(argv.size()), argv.data(), out, err);
}

}  // namespace byola
