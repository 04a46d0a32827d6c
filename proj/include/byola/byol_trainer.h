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

#ifndef BYOLA_BYOL_TRAINER_H_
#define BYOLA_BYOL_TRAINER_H_

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "byola/augmentation.h"
#include "byola/dsp_features.h"
#include "byola/neural.h"

namespace byola {

struct TrainConfig {
  double tau = 0.99;
  int batch_size = 64;
  int64_t steps = 1000;
  AdamConfig adam;
  int64_t checkpoint_every = 500;
  uint64_t seed = 0;
  int segment_frames = 100;
  int embedding_dim = 512;
  int projector_hidden = 1024;
  int projection_dim = 128;
  int predictor_hidden = 1024;
  bool skip_bad_audio = false;

  void Validate() const;
};

struct TrainStepReport {
  int64_t step = 0;
  double loss_forward = 0.0;  // online(u) vs target(u')
  double loss_reverse = 0.0;  // online(u') vs target(u)
  double loss_total = 0.0;
  double embedding_std = 0.0;  // mean over dims of the batch std of y
};

// Normalized-prediction distance ||p/|p| - z/|z|||_2, in [0, 2]. Throws
// DataError on a zero-magnitude vector.
double ByolLoss(std::span<const double> prediction,
                std::span<const double> target);

// Same, also writing d(loss)/d(prediction) into `grad` when non-null. The
// target receives no gradient.
double ByolLossWithGrad(std::span<const double> prediction,
                        std::span<const double> target,
                        std::span<double> grad);

// xi <- tau * xi + (1 - tau) * theta for every array of xi; theta may hold
// extra arrays (the predictor) which are ignored.
template <typename T>
void EmaUpdate(const ParameterSet<T>& theta, ParameterSet<T>* xi, double tau);

// Online network: encoder f, projector g, predictor q. Target: f and g with
// separate weights. Parameter names follow the concatenated layer index, so
// the target arrays share names with the first arrays of the online set.
struct ByolState {
  NetworkSpec encoder;
  NetworkSpec projector;
  NetworkSpec predictor;
  ParameterSet<float> online;
  ParameterSet<float> target;
  AdamState<float> adam;
  int64_t step = 0;

  NetworkSpec OnlineSpec() const;
  NetworkSpec TargetSpec() const;
};

// Fresh online weights (seeded) and a target that is an exact copy.
ByolState CreateByolState(const TrainConfig& config, const MelConfig& mel,
                          uint64_t seed);

// Stacks spectrograms (T x F each) into an N x 1 x F x T network input.
Tensor<float> ToNetworkInput(std::span<const LogMelSpectrogram> batch);

// Symmetrized losses and collapse monitor for a batch, without updating.
TrainStepReport EvaluateBatch(std::span<const ViewPair> batch,
                              const ByolState& state);

// One optimization step on a post-normalized batch: loss on (u -> online,
// u' -> target) and (u' -> online, u -> target), averaged over the batch;
// Adam on the online weights; then the EMA update of the target. Throws
// NumericError on a non-finite loss.
TrainStepReport TrainStep(std::span<const ViewPair> batch, ByolState* state,
                          double tau);

// Applies PostNormalize jointly over all 2N views of a batch.
std::vector<ViewPair> PostNormalizeBatch(std::span<const ViewPair> batch);

struct Checkpoint;

struct FitOptions {
  // When non-empty, step_<n>.bylc files and final.bylc are written here.
  std::string checkpoint_dir;
  // Tab-separated step log: step, loss_fwd, loss_rev, loss_total, emb_std.
  std::ostream* log = nullptr;
  std::vector<Waveform> noises;
  std::function<void(const TrainStepReport&)> on_step;
};

Checkpoint Fit(std::span<const Waveform> corpus, const TrainConfig& config,
               const AugmentationPolicy& policy, const NormStats& stats,
               const MelConfig& mel, const FitOptions& options);

// Loads (and resamples) every file first; unreadable files abort unless
// config.skip_bad_audio is set, in which case they are skipped with a
// warning on stderr.
Checkpoint FitFromFiles(const std::vector<std::string>& paths,
                        const TrainConfig& config,
                        const AugmentationPolicy& policy,
                        const NormStats& stats, const MelConfig& mel,
                        const FitOptions& options);

std::string FormatReport(const TrainStepReport& report);

}  // namespace byola

#endif  // BYOLA_BYOL_TRAINER_H_
