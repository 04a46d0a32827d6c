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

#ifndef BYOLA_NEURAL_H_
#define BYOLA_NEURAL_H_

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "byola/random.h"

namespace byola {

enum class LayerKind : uint8_t {
  kConv2d = 0,  // 3x3, stride 1, pad 1
  kRelu = 1,
  kMaxPool = 2,  // 2x2, stride 2, floor on odd sizes
  kGlobalTimeMean = 3,  // (C, H, W) -> (C, H), mean over W
  kFlatten = 4,
  kLinear = 5,
};

const char* LayerKindName(LayerKind kind);

struct LayerSpec {
  LayerKind kind = LayerKind::kRelu;
  int units = 0;  // output channels (conv2d) or output dim (linear)

  static LayerSpec Conv2d(int out_channels) { return {LayerKind::kConv2d, out_channels}; }
  static LayerSpec Relu() { return {LayerKind::kRelu, 0}; }
  static LayerSpec MaxPool() { return {LayerKind::kMaxPool, 0}; }
  static LayerSpec GlobalTimeMean() { return {LayerKind::kGlobalTimeMean, 0}; }
  static LayerSpec Flatten() { return {LayerKind::kFlatten, 0}; }
  static LayerSpec Linear(int out_dim) { return {LayerKind::kLinear, out_dim}; }

  bool operator==(const LayerSpec&) const = default;
};

// Per-item input shape plus an ordered layer list. Shapes are per item; the
// batch dimension is implicit.
struct NetworkSpec {
  std::vector<int> input_shape;
  std::vector<LayerSpec> layers;

  // Output shape after every layer (index i = after layer i). Throws
  // ShapeError naming the first inconsistent layer.
  std::vector<std::vector<int>> LayerShapes() const;
  std::vector<int> OutputShape() const;
  int64_t OutputSize() const;

  bool operator==(const NetworkSpec&) const = default;
};

// Chains `tail` after `head`; layer indices of `tail` are shifted.
NetworkSpec ConcatSpecs(const NetworkSpec& head, const NetworkSpec& tail);

// conv(32)-relu-pool, conv(64)-relu-pool, conv(64)-relu-pool,
// global_time_mean, flatten, linear(embedding_dim) on 1 x n_mels x frames.
NetworkSpec DefaultEncoderSpec(int n_mels, int frames, int embedding_dim);
// linear(hidden)-relu-linear(out_dim).
NetworkSpec MlpSpec(int in_dim, int hidden, int out_dim);

// 64-byte aligned storage. Vectorized reductions over a misaligned buffer
// peel a pointer-dependent prefix, which would change rounding between runs.
template <typename T>
using AlignedVector = std::vector<T, Eigen::aligned_allocator<T>>;

template <typename T>
struct Tensor {
  std::vector<int> shape;  // shape[0] is the batch
  AlignedVector<T> data;

  Tensor() = default;
  explicit Tensor(std::vector<int> s, T fill = T(0));

  int64_t size() const { return static_cast<int64_t>(data.size()); }
  int batch() const { return shape.empty() ? 0 : shape[0]; }
  int64_t item_size() const;
  T* item(int n) { return data.data() + n * item_size(); }
  const T* item(int n) const { return data.data() + n * item_size(); }
};

template <typename T>
struct ParamArray {
  std::string name;  // "<layer index>.weight" or "<layer index>.bias"
  std::vector<int> shape;
  AlignedVector<T> values;
};

template <typename T>
class ParameterSet {
 public:
  std::vector<ParamArray<T>>& arrays() { return arrays_; }
  const std::vector<ParamArray<T>>& arrays() const { return arrays_; }

  void Add(ParamArray<T> array);
  ParamArray<T>* Find(const std::string& name);
  const ParamArray<T>* Find(const std::string& name) const;
  // Throws ShapeError when absent.
  const ParamArray<T>& Get(const std::string& name) const;

  int64_t Count() const;
  ParameterSet ZerosLike() const;
  template <typename U>
  ParameterSet<U> Cast() const;

  // Bumped by every in-library mutation so stale traces can be detected.
  uint64_t generation() const { return generation_; }
  void Touch() { ++generation_; }

 private:
  std::vector<ParamArray<T>> arrays_;
  uint64_t generation_ = 0;
};

// Kaiming-uniform weights (bound sqrt(6 / fan_in)), zero biases.
template <typename T>
ParameterSet<T> InitParameters(const NetworkSpec& spec, Rng* rng);

// Activations cached by a forward pass: inputs[i] is the input of layer i
// and inputs.back() the network output.
template <typename T>
struct Trace {
  std::vector<Tensor<T>> inputs;
  std::vector<std::vector<int32_t>> pool_argmax;
  const void* params = nullptr;
  uint64_t generation = 0;
};

template <typename T>
struct ForwardPass {
  Tensor<T> output;
  Trace<T> trace;
};

template <typename T>
struct BackwardPass {
  ParameterSet<T> param_grads;
  Tensor<T> grad_input;  // empty when not requested
};

template <typename T>
ForwardPass<T> NetworkForward(const NetworkSpec& spec,
                              const ParameterSet<T>& params,
                              const Tensor<T>& input);

// Forward without caching activations.
template <typename T>
Tensor<T> NetworkInfer(const NetworkSpec& spec, const ParameterSet<T>& params,
                       const Tensor<T>& input);

// Reverse-mode gradients of the traced forward computation. The trace must
// come from the same (spec, params) with no mutation in between.
template <typename T>
BackwardPass<T> NetworkBackward(const NetworkSpec& spec,
                                const ParameterSet<T>& params,
                                const Trace<T>& trace,
                                const Tensor<T>& grad_output,
                                bool want_input_grad = true);

struct AdamConfig {
  double lr = 1e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;

  bool operator==(const AdamConfig&) const = default;
};

template <typename T>
struct AdamState {
  AdamConfig config;
  ParameterSet<T> m;
  ParameterSet<T> v;
  int64_t step = 0;
};

template <typename T>
AdamState<T> MakeAdamState(const ParameterSet<T>& params,
                           const AdamConfig& config);

// One bias-corrected Adam update. Throws NumericError on a non-finite
// gradient, leaving params and state untouched.
template <typename T>
void AdamStep(ParameterSet<T>* params, const ParameterSet<T>& grads,
              AdamState<T>* state);

// Scalar loss of a network output; fills `grad` with d(loss)/d(output).
using LossFn =
    std::function<double(const Tensor<double>& output, Tensor<double>* grad)>;

struct GradCheckOptions {
  double step = 1e-4;
  // 0 checks every parameter; otherwise a seeded sample per array.
  int max_checks_per_array = 0;
  bool check_input = false;
  uint64_t seed = 0;
  // Leave out coordinates whose +-step probes flip a ReLU sign or move a
  // max-pool argmax; the central difference there straddles a kink.
  bool skip_kink_crossings = false;
};

struct GradCheckResult {
  // Largest |analytic - numeric| / max(|analytic|, |numeric|, 1e-6) over the
  // scored coordinates.
  double max_error = 0.0;
  // Same, over every probed coordinate including kink crossings.
  double max_error_all = 0.0;
  int64_t checked = 0;
  int64_t kink_crossings = 0;
};

// Central-difference check of NetworkBackward for a scalar loss.
GradCheckResult GradCheckDetailed(const NetworkSpec& spec,
                                  const ParameterSet<double>& params,
                                  const Tensor<double>& input,
                                  const LossFn& loss,
                                  const GradCheckOptions& options = {});

// GradCheckDetailed(...).max_error.
double GradCheck(const NetworkSpec& spec, const ParameterSet<double>& params,
                 const Tensor<double>& input, const LossFn& loss,
                 const GradCheckOptions& options = {});

}  // namespace byola

#endif  // BYOLA_NEURAL_H_
