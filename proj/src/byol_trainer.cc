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

#include "byola/byol_trainer.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <numeric>

#include "byola/checkpoint.h"
#include "byola/errors.h"

namespace byola {

void TrainConfig::Validate() const {
  if (!(tau >= 0.0 && tau <= 1.0)) throw DataError("train config: tau must be in [0, 1]");
  if (batch_size < 1) throw DataError("train config: batch_size must be >= 1");
  if (steps < 0) throw DataError("train config: steps must be >= 0");
  if (checkpoint_every < 1) throw DataError("train config: checkpoint_every must be >= 1");
  if (segment_frames < 8) throw DataError("train config: segment_frames must be >= 8");
  if (embedding_dim < 1 || projector_hidden < 1 || projection_dim < 1 ||
      predictor_hidden < 1) {
    throw DataError("train config: network dims must be positive");
  }
  if (!(adam.lr >= 0.0) || !(adam.eps > 0.0)) throw DataError("train config: bad Adam settings");
}

double ByolLossWithGrad(std::span<const double> prediction,
                        std::span<const double> target,
                        std::span<double> grad) {
  if (prediction.size() != target.size()) {
    throw DataError("byol_loss: dimension mismatch");
  }
  double pp = 0.0, zz = 0.0;
  for (size_t i = 0; i < prediction.size(); ++i) {
    pp += prediction[i] * prediction[i];
    zz += target[i] * target[i];
  }
  const double pn = std::sqrt(pp), zn = std::sqrt(zz);
  if (!(pn > 1e-12) || !(zn > 1e-12)) {
    throw DataError("byol_loss: zero-magnitude input vector");
  }
  double sq = 0.0;
  for (size_t i = 0; i < prediction.size(); ++i) {
    double d = prediction[i] / pn - target[i] / zn;
    sq += d * d;
  }
  const double loss = std::sqrt(sq);
  if (!grad.empty()) {
    if (loss == 0.0) {
      std::fill(grad.begin(), grad.end(), 0.0);
    } else {
      // d/dp of ||p/|p| - zbar|| = (g - pbar (pbar . g)) / |p| with
      // g = (pbar - zbar) / loss.
      double proj = 0.0;
      for (size_t i = 0; i < prediction.size(); ++i) {
        double pb = prediction[i] / pn;
        double g = (pb - target[i] / zn) / loss;
        proj += pb * g;
      }
      for (size_t i = 0; i < prediction.size(); ++i) {
        double pb = prediction[i] / pn;
        double g = (pb - target[i] / zn) / loss;
        grad[i] = (g - pb * proj) / pn;
      }
    }
  }
  return loss;
}

double ByolLoss(std::span<const double> prediction,
                std::span<const double> target) {
  return ByolLossWithGrad(prediction, target, {});
}

template <typename T>
void EmaUpdate(const ParameterSet<T>& theta, ParameterSet<T>* xi, double tau) {
  if (!(tau >= 0.0 && tau <= 1.0)) throw DataError("ema: tau must be in [0, 1]");
  for (const auto& a : xi->arrays()) {
    const auto* src = theta.Find(a.name);
    if (src == nullptr || src->shape != a.shape) {
      throw ShapeError("ema: target array " + a.name +
                       " has no congruent online counterpart");
    }
  }
  for (auto& a : xi->arrays()) {
    const auto& src = theta.Find(a.name)->values;
    for (size_t i = 0; i < a.values.size(); ++i) {
      a.values[i] = static_cast<T>(tau * static_cast<double>(a.values[i]) +
                                   (1.0 - tau) * static_cast<double>(src[i]));
    }
  }
  xi->Touch();
}

template void EmaUpdate<float>(const ParameterSet<float>&, ParameterSet<float>*, double);
template void EmaUpdate<double>(const ParameterSet<double>&, ParameterSet<double>*, double);

NetworkSpec ByolState::OnlineSpec() const {
  return ConcatSpecs(ConcatSpecs(encoder, projector), predictor);
}

NetworkSpec ByolState::TargetSpec() const {
  return ConcatSpecs(encoder, projector);
}

ByolState CreateByolState(const TrainConfig& config, const MelConfig& mel,
                          uint64_t seed) {
  config.Validate();
  ByolState state;
  state.encoder =
      DefaultEncoderSpec(mel.n_mels, config.segment_frames, config.embedding_dim);
  state.projector =
      MlpSpec(config.embedding_dim, config.projector_hidden, config.projection_dim);
  state.predictor =
      MlpSpec(config.projection_dim, config.predictor_hidden, config.projection_dim);
  Rng rng(seed);
  state.online = InitParameters<float>(state.OnlineSpec(), &rng);
  const NetworkSpec target_spec = state.TargetSpec();
  for (const auto& a : state.online.arrays()) {
    // Target layers are the leading layers of the online chain.
    size_t layer = std::stoul(a.name.substr(0, a.name.find('.')));
    if (layer < target_spec.layers.size()) state.target.Add(a);
  }
  state.adam = MakeAdamState(state.online, config.adam);
  return state;
}

Tensor<float> ToNetworkInput(std::span<const LogMelSpectrogram> batch) {
  if (batch.empty()) throw DataError("network input: empty batch");
  const int frames = batch[0].NumFrames();
  const int bins = batch[0].NumBins();
  Tensor<float> x({static_cast<int>(batch.size()), 1, bins, frames});
  for (size_t n = 0; n < batch.size(); ++n) {
    if (batch[n].NumFrames() != frames || batch[n].NumBins() != bins) {
      throw ShapeError("network input: spectrograms differ in shape");
    }
    float* dst = x.item(static_cast<int>(n));
    for (int f = 0; f < bins; ++f) {
      for (int t = 0; t < frames; ++t) {
        dst[f * frames + t] = static_cast<float>(batch[n].data(t, f));
      }
    }
  }
  return x;
}

namespace {

struct BatchLosses {
  TrainStepReport report;
  ParameterSet<float> grads;
};

BatchLosses ComputeBatch(std::span<const ViewPair> batch, const ByolState& state,
                         bool want_grads) {
  if (batch.empty()) throw DataError("train_step: empty batch");
  const int n = static_cast<int>(batch.size());
  std::vector<LogMelSpectrogram> online_views, target_views;
  online_views.reserve(2 * n);
  target_views.reserve(2 * n);
  for (const auto& pair : batch) online_views.push_back(pair.u);
  for (const auto& pair : batch) online_views.push_back(pair.u_prime);
  for (const auto& pair : batch) target_views.push_back(pair.u_prime);
  for (const auto& pair : batch) target_views.push_back(pair.u);

  const NetworkSpec online_spec = state.OnlineSpec();
  auto pass = NetworkForward(online_spec, state.online, ToNetworkInput(online_views));
  // Target path: forward only, no trace, no gradient.
  Tensor<float> target_out =
      NetworkInfer(state.TargetSpec(), state.target, ToNetworkInput(target_views));

  const int dim = static_cast<int>(pass.output.item_size());
  Tensor<float> grad_out(pass.output.shape);
  std::vector<double> p(dim), z(dim), g(dim);
  double sum_fwd = 0.0, sum_rev = 0.0;
  for (int i = 0; i < 2 * n; ++i) {
    std::copy_n(pass.output.item(i), dim, p.begin());
    std::copy_n(target_out.item(i), dim, z.begin());
    double loss = ByolLossWithGrad(p, z, want_grads ? std::span<double>(g)
                                                    : std::span<double>());
    (i < n ? sum_fwd : sum_rev) += loss;
    if (want_grads) {
      float* dst = grad_out.item(i);
      for (int k = 0; k < dim; ++k) dst[k] = static_cast<float>(g[k] / n);
    }
  }

  BatchLosses out;
  TrainStepReport& r = out.report;
  r.step = state.step;
  r.loss_forward = sum_fwd / n;
  r.loss_reverse = sum_rev / n;
  r.loss_total = r.loss_forward + r.loss_reverse;

  // Collapse monitor over y = f(u) for every online view.
  const Tensor<float>& y = pass.trace.inputs[state.encoder.layers.size()];
  const int ydim = static_cast<int>(y.item_size());
  double std_sum = 0.0;
  for (int k = 0; k < ydim; ++k) {
    double mean = 0.0;
    for (int i = 0; i < y.batch(); ++i) mean += y.item(i)[k];
    mean /= y.batch();
    double var = 0.0;
    for (int i = 0; i < y.batch(); ++i) {
      double d = y.item(i)[k] - mean;
      var += d * d;
    }
    std_sum += std::sqrt(var / y.batch());
  }
  r.embedding_std = std_sum / ydim;

  if (!std::isfinite(r.loss_total)) {
    throw NumericError("train_step: non-finite loss at step " +
                       std::to_string(state.step));
  }
  if (want_grads) {
    out.grads = NetworkBackward(online_spec, state.online, pass.trace, grad_out,
                                /*want_input_grad=*/false)
                    .param_grads;
  }
  return out;
}

}  // namespace

TrainStepReport EvaluateBatch(std::span<const ViewPair> batch,
                              const ByolState& state) {
  return ComputeBatch(batch, state, false).report;
}

TrainStepReport TrainStep(std::span<const ViewPair> batch, ByolState* state,
                          double tau) {
  BatchLosses result = ComputeBatch(batch, *state, true);
  AdamStep(&state->online, result.grads, &state->adam);
  EmaUpdate(state->online, &state->target, tau);
  ++state->step;
  result.report.step = state->step;
  return result.report;
}

std::vector<ViewPair> PostNormalizeBatch(std::span<const ViewPair> batch) {
  std::vector<LogMelSpectrogram> views;
  views.reserve(2 * batch.size());
  for (const auto& pair : batch) {
    views.push_back(pair.u);
    views.push_back(pair.u_prime);
  }
  auto normed = PostNormalize(views);
  std::vector<ViewPair> out(batch.size());
  for (size_t i = 0; i < batch.size(); ++i) {
    out[i].u = std::move(normed[2 * i]);
    out[i].u_prime = std::move(normed[2 * i + 1]);
  }
  return out;
}

std::string FormatReport(const TrainStepReport& r) {
  char buf[160];
  std::snprintf(buf, sizeof(buf), "%lld\t%.6f\t%.6f\t%.6f\t%.6g",
                static_cast<long long>(r.step), r.loss_forward, r.loss_reverse,
                r.loss_total, r.embedding_std);
  return buf;
}

Checkpoint Fit(std::span<const Waveform> corpus, const TrainConfig& config,
               const AugmentationPolicy& policy, const NormStats& stats,
               const MelConfig& mel, const FitOptions& options) {
  config.Validate();
  policy.Validate();
  if (corpus.empty()) throw DataError("fit: empty training manifest");
  if (policy.enable_noise && policy.p_noise > 0.0 && options.noises.empty()) {
    throw DataError("fit: external noise enabled but no noise files were given");
  }

  Checkpoint ck;
  ck.mel = mel;
  ck.stats = stats;
  ck.seed = config.seed;
  ck.segment_frames = config.segment_frames;
  ck.state = CreateByolState(config, mel, DeriveSeed(config.seed, 0));

  Rng order_rng(DeriveSeed(config.seed, 1));
  Rng aug_rng(DeriveSeed(config.seed, 2));
  ViewPairGenerator generator(mel, stats, policy, config.segment_frames,
                              options.noises);
  MixupBank bank(static_cast<size_t>(policy.mixup_bank_size));

  if (!options.checkpoint_dir.empty()) {
    std::filesystem::create_directories(options.checkpoint_dir);
  }
  auto checkpoint_path = [&](const std::string& name) {
    return (std::filesystem::path(options.checkpoint_dir) / name).string();
  };

  std::vector<size_t> order(corpus.size());
  std::iota(order.begin(), order.end(), size_t{0});
  size_t cursor = order.size();
  std::vector<ViewPair> batch;
  for (int64_t step = 1; step <= config.steps; ++step) {
    batch.clear();
    for (int b = 0; b < config.batch_size; ++b) {
      if (cursor == order.size()) {
        std::shuffle(order.begin(), order.end(), order_rng.engine());
        cursor = 0;
      }
      batch.push_back(generator.Make(corpus[order[cursor++]], &bank, &aug_rng));
    }
    TrainStepReport report =
        TrainStep(PostNormalizeBatch(batch), &ck.state, config.tau);
    if (options.log != nullptr) *options.log << FormatReport(report) << '\n';
    if (report.embedding_std < 1e-3) {
      std::cerr << "WARNING (fit) step " << report.step
                << ": embedding std " << report.embedding_std
                << " below 1e-3, representations may be collapsing\n";
    }
    if (options.on_step) options.on_step(report);
    if (!options.checkpoint_dir.empty() && step % config.checkpoint_every == 0) {
      char name[64];
      std::snprintf(name, sizeof(name), "step_%08lld.bylc",
                    static_cast<long long>(step));
      SaveCheckpoint(ck, checkpoint_path(name));
    }
  }
  if (options.log != nullptr) options.log->flush();
  if (!options.checkpoint_dir.empty()) {
    SaveCheckpoint(ck, checkpoint_path("final.bylc"));
  }
  return ck;
}

Checkpoint FitFromFiles(const std::vector<std::string>& paths,
                        const TrainConfig& config,
                        const AugmentationPolicy& policy,
                        const NormStats& stats, const MelConfig& mel,
                        const FitOptions& options) {
  std::vector<Waveform> corpus;
  corpus.reserve(paths.size());
  for (const auto& path : paths) {
    try {
      corpus.push_back(Resample(LoadWav(path), mel.sample_rate));
    } catch (const WavError& e) {
      if (!config.skip_bad_audio) throw;
      std::cerr << "WARNING (fit) skipping " << path << ": " << e.what() << '\n';
    }
  }
  return Fit(corpus, config, policy, stats, mel, options);
}

}  // namespace byola
