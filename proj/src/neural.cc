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

#include "byola/neural.h"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include <Eigen/Core>

#include "byola/errors.h"

namespace byola {

const char* LayerKindName(LayerKind kind) {
  switch (kind) {
    case LayerKind::kConv2d: return "conv2d";
    case LayerKind::kRelu: return "relu";
    case LayerKind::kMaxPool: return "maxpool";
    case LayerKind::kGlobalTimeMean: return "global_time_mean";
    case LayerKind::kFlatten: return "flatten";
    case LayerKind::kLinear: return "linear";
  }
  return "unknown";
}

namespace {

std::string ShapeString(const std::vector<int>& shape) {
  std::string s;
  for (size_t i = 0; i < shape.size(); ++i) {
    if (i) s += "x";
    s += std::to_string(shape[i]);
  }
  return s.empty() ? "()" : s;
}

int64_t Product(const std::vector<int>& shape, size_t from = 0) {
  int64_t p = 1;
  for (size_t i = from; i < shape.size(); ++i) p *= shape[i];
  return p;
}

std::string LayerName(size_t index, LayerKind kind) {
  return "layer " + std::to_string(index) + " (" + LayerKindName(kind) + ")";
}

std::string WeightName(size_t layer) { return std::to_string(layer) + ".weight"; }
std::string BiasName(size_t layer) { return std::to_string(layer) + ".bias"; }

}  // namespace

std::vector<std::vector<int>> NetworkSpec::LayerShapes() const {
  if (input_shape.empty() || Product(input_shape) <= 0) {
    throw ShapeError("network input shape " + ShapeString(input_shape) +
                     " is empty");
  }
  std::vector<std::vector<int>> shapes;
  std::vector<int> cur = input_shape;
  for (size_t i = 0; i < layers.size(); ++i) {
    const LayerSpec& layer = layers[i];
    auto fail = [&](const std::string& why) {
      return ShapeError(LayerName(i, layer.kind) + ": " + why + " (input " +
                        ShapeString(cur) + ")");
    };
    switch (layer.kind) {
      case LayerKind::kConv2d:
        if (cur.size() != 3) throw fail("expects a CxHxW input");
        if (layer.units < 1) throw fail("needs at least one output channel");
        cur = {layer.units, cur[1], cur[2]};
        break;
      case LayerKind::kRelu:
        break;
      case LayerKind::kMaxPool:
        if (cur.size() != 3) throw fail("expects a CxHxW input");
        if (cur[1] < 2 || cur[2] < 2) throw fail("input smaller than the 2x2 window");
        cur = {cur[0], cur[1] / 2, cur[2] / 2};
        break;
      case LayerKind::kGlobalTimeMean:
        if (cur.size() != 3) throw fail("expects a CxHxW input");
        cur = {cur[0], cur[1]};
        break;
      case LayerKind::kFlatten:
        cur = {static_cast<int>(Product(cur))};
        break;
      case LayerKind::kLinear:
        if (cur.size() != 1) throw fail("expects a flat input");
        if (layer.units < 1) throw fail("needs a positive output dim");
        cur = {layer.units};
        break;
    }
    shapes.push_back(cur);
  }
  return shapes;
}

std::vector<int> NetworkSpec::OutputShape() const {
  auto shapes = LayerShapes();
  return shapes.empty() ? input_shape : shapes.back();
}

int64_t NetworkSpec::OutputSize() const { return Product(OutputShape()); }

NetworkSpec ConcatSpecs(const NetworkSpec& head, const NetworkSpec& tail) {
  auto head_out = head.OutputShape();
  if (head_out != tail.input_shape) {
    throw ShapeError("cannot chain networks: output " + ShapeString(head_out) +
                     " vs input " + ShapeString(tail.input_shape));
  }
  NetworkSpec out = head;
  out.layers.insert(out.layers.end(), tail.layers.begin(), tail.layers.end());
  return out;
}

NetworkSpec DefaultEncoderSpec(int n_mels, int frames, int embedding_dim) {
  NetworkSpec spec;
  spec.input_shape = {1, n_mels, frames};
  for (int channels : {32, 64, 64}) {
    spec.layers.push_back(LayerSpec::Conv2d(channels));
    spec.layers.push_back(LayerSpec::Relu());
    spec.layers.push_back(LayerSpec::MaxPool());
  }
  spec.layers.push_back(LayerSpec::GlobalTimeMean());
  spec.layers.push_back(LayerSpec::Flatten());
  spec.layers.push_back(LayerSpec::Linear(embedding_dim));
  return spec;
}

NetworkSpec MlpSpec(int in_dim, int hidden, int out_dim) {
  NetworkSpec spec;
  spec.input_shape = {in_dim};
  spec.layers = {LayerSpec::Linear(hidden), LayerSpec::Relu(),
                 LayerSpec::Linear(out_dim)};
  return spec;
}

template <typename T>
Tensor<T>::Tensor(std::vector<int> s, T fill)
    : shape(std::move(s)), data(static_cast<size_t>(Product(shape)), fill) {}

template <typename T>
int64_t Tensor<T>::item_size() const {
  return Product(shape, 1);
}

template <typename T>
void ParameterSet<T>::Add(ParamArray<T> array) {
  if (Find(array.name) != nullptr) {
    throw ShapeError("duplicate parameter name " + array.name);
  }
  if (static_cast<int64_t>(array.values.size()) != Product(array.shape)) {
    throw ShapeError("parameter " + array.name + " size does not match shape");
  }
  arrays_.push_back(std::move(array));
  Touch();
}

template <typename T>
ParamArray<T>* ParameterSet<T>::Find(const std::string& name) {
  for (auto& a : arrays_) {
    if (a.name == name) return &a;
  }
  return nullptr;
}

template <typename T>
const ParamArray<T>* ParameterSet<T>::Find(const std::string& name) const {
  for (const auto& a : arrays_) {
    if (a.name == name) return &a;
  }
  return nullptr;
}

template <typename T>
const ParamArray<T>& ParameterSet<T>::Get(const std::string& name) const {
  const ParamArray<T>* a = Find(name);
  if (a == nullptr) throw ShapeError("missing parameter " + name);
  return *a;
}

template <typename T>
int64_t ParameterSet<T>::Count() const {
  int64_t n = 0;
  for (const auto& a : arrays_) n += static_cast<int64_t>(a.values.size());
  return n;
}

template <typename T>
ParameterSet<T> ParameterSet<T>::ZerosLike() const {
  ParameterSet<T> out;
  for (const auto& a : arrays_) {
    out.arrays_.push_back({a.name, a.shape, AlignedVector<T>(a.values.size(), T(0))});
  }
  return out;
}

template <typename T>
template <typename U>
ParameterSet<U> ParameterSet<T>::Cast() const {
  ParameterSet<U> out;
  for (const auto& a : arrays_) {
    ParamArray<U> b{a.name, a.shape, AlignedVector<U>(a.values.begin(), a.values.end())};
    out.Add(std::move(b));
  }
  return out;
}

template <typename T>
ParameterSet<T> InitParameters(const NetworkSpec& spec, Rng* rng) {
  auto shapes = spec.LayerShapes();
  ParameterSet<T> params;
  std::vector<int> in = spec.input_shape;
  for (size_t i = 0; i < spec.layers.size(); ++i) {
    const LayerSpec& layer = spec.layers[i];
    std::vector<int> wshape;
    int64_t fan_in = 0;
    if (layer.kind == LayerKind::kConv2d) {
      wshape = {layer.units, in[0], 3, 3};
      fan_in = static_cast<int64_t>(in[0]) * 9;
    } else if (layer.kind == LayerKind::kLinear) {
      wshape = {layer.units, in[0]};
      fan_in = in[0];
    }
    if (!wshape.empty()) {
      const double bound = std::sqrt(6.0 / static_cast<double>(fan_in));
      ParamArray<T> w{WeightName(i), wshape, AlignedVector<T>(Product(wshape))};
      for (auto& v : w.values) v = static_cast<T>(rng->Uniform(-bound, bound));
      params.Add(std::move(w));
      params.Add({BiasName(i), {layer.units}, AlignedVector<T>(layer.units, T(0))});
    }
    in = shapes[i];
  }
  return params;
}

namespace {

template <typename T>
using RowMat = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
template <typename T>
using MatMap = Eigen::Map<RowMat<T>>;
template <typename T>
using ConstMatMap = Eigen::Map<const RowMat<T>>;
template <typename T>
using VecMap = Eigen::Map<Eigen::Matrix<T, Eigen::Dynamic, 1>>;
template <typename T>
using ConstVecMap = Eigen::Map<const Eigen::Matrix<T, Eigen::Dynamic, 1>>;

// cols is (C * 9) x (H * W); row (c, ky, kx) holds x[c, y + ky - 1, x + kx - 1].
template <typename T>
void Im2Col(const T* x, int channels, int height, int width, T* cols) {
  const int plane = height * width;
  for (int c = 0; c < channels; ++c) {
    const T* src = x + static_cast<int64_t>(c) * plane;
    for (int ky = 0; ky < 3; ++ky) {
      for (int kx = 0; kx < 3; ++kx) {
        T* dst = cols + static_cast<int64_t>((c * 3 + ky) * 3 + kx) * plane;
        for (int y = 0; y < height; ++y) {
          const int sy = y + ky - 1;
          T* row = dst + y * width;
          if (sy < 0 || sy >= height) {
            std::fill(row, row + width, T(0));
            continue;
          }
          const T* srow = src + sy * width;
          const int shift = kx - 1;
          const int x0 = std::max(0, -shift);
          const int x1 = std::min(width, width - shift);
          for (int xx = 0; xx < x0; ++xx) row[xx] = T(0);
          for (int xx = x0; xx < x1; ++xx) row[xx] = srow[xx + shift];
          for (int xx = x1; xx < width; ++xx) row[xx] = T(0);
        }
      }
    }
  }
}

template <typename T>
void Col2ImAdd(const T* cols, int channels, int height, int width, T* dx) {
  const int plane = height * width;
  for (int c = 0; c < channels; ++c) {
    T* dst = dx + static_cast<int64_t>(c) * plane;
    for (int ky = 0; ky < 3; ++ky) {
      for (int kx = 0; kx < 3; ++kx) {
        const T* src = cols + static_cast<int64_t>((c * 3 + ky) * 3 + kx) * plane;
        for (int y = 0; y < height; ++y) {
          const int sy = y + ky - 1;
          if (sy < 0 || sy >= height) continue;
          const T* row = src + y * width;
          T* drow = dst + sy * width;
          const int shift = kx - 1;
          const int x0 = std::max(0, -shift);
          const int x1 = std::min(width, width - shift);
          for (int xx = x0; xx < x1; ++xx) drow[xx + shift] += row[xx];
        }
      }
    }
  }
}

template <typename T>
Tensor<T> ForwardLayer(const LayerSpec& layer, size_t index,
                       const ParameterSet<T>& params, const Tensor<T>& x,
                       const std::vector<int>& out_item_shape,
                       std::vector<int32_t>* argmax) {
  const int batch = x.batch();
  std::vector<int> out_shape = {batch};
  out_shape.insert(out_shape.end(), out_item_shape.begin(), out_item_shape.end());
  Tensor<T> y(out_shape);
  switch (layer.kind) {
    case LayerKind::kConv2d: {
      const int cin = x.shape[1], h = x.shape[2], w = x.shape[3];
      const int cout = layer.units;
      const int plane = h * w;
      const auto& weight = params.Get(WeightName(index));
      const auto& bias = params.Get(BiasName(index));
      ConstMatMap<T> wm(weight.values.data(), cout, cin * 9);
      ConstVecMap<T> b(bias.values.data(), cout);
      RowMat<T> cols(cin * 9, plane);
      for (int n = 0; n < batch; ++n) {
        Im2Col(x.item(n), cin, h, w, cols.data());
        MatMap<T> out(y.item(n), cout, plane);
        out.noalias() = wm * cols;
        out.colwise() += b;
      }
      break;
    }
    case LayerKind::kRelu:
      for (int64_t i = 0; i < x.size(); ++i) y.data[i] = std::max(x.data[i], T(0));
      break;
    case LayerKind::kMaxPool: {
      const int c = x.shape[1], h = x.shape[2], w = x.shape[3];
      const int oh = h / 2, ow = w / 2;
      argmax->assign(static_cast<size_t>(y.size()), 0);
      for (int n = 0; n < batch; ++n) {
        const T* xi = x.item(n);
        T* yi = y.item(n);
        int32_t* am = argmax->data() + n * y.item_size();
        for (int ch = 0; ch < c; ++ch) {
          for (int oy = 0; oy < oh; ++oy) {
            for (int ox = 0; ox < ow; ++ox) {
              int32_t best = (ch * h + 2 * oy) * w + 2 * ox;
              for (int dy = 0; dy < 2; ++dy) {
                for (int dx = 0; dx < 2; ++dx) {
                  int32_t idx = (ch * h + 2 * oy + dy) * w + 2 * ox + dx;
                  if (xi[idx] > xi[best]) best = idx;
                }
              }
              int64_t o = (static_cast<int64_t>(ch) * oh + oy) * ow + ox;
              yi[o] = xi[best];
              am[o] = best;
            }
          }
        }
      }
      break;
    }
    case LayerKind::kGlobalTimeMean: {
      const int rows = x.shape[1] * x.shape[2], w = x.shape[3];
      for (int n = 0; n < batch; ++n) {
        ConstMatMap<T> xi(x.item(n), rows, w);
        VecMap<T> yi(y.item(n), rows);
        yi = xi.rowwise().sum() / static_cast<T>(w);
      }
      break;
    }
    case LayerKind::kFlatten:
      y.data = x.data;
      break;
    case LayerKind::kLinear: {
      const int in = x.shape[1];
      const auto& weight = params.Get(WeightName(index));
      const auto& bias = params.Get(BiasName(index));
      ConstMatMap<T> wm(weight.values.data(), layer.units, in);
      ConstMatMap<T> xm(x.data.data(), batch, in);
      MatMap<T> ym(y.data.data(), batch, layer.units);
      ym.noalias() = xm * wm.transpose();
      ym.rowwise() += ConstVecMap<T>(bias.values.data(), layer.units).transpose();
      break;
    }
  }
  return y;
}

template <typename T>
void CheckLayerParams(const NetworkSpec& spec, const ParameterSet<T>& params) {
  std::vector<int> in = spec.input_shape;
  auto shapes = spec.LayerShapes();
  for (size_t i = 0; i < spec.layers.size(); ++i) {
    const LayerSpec& layer = spec.layers[i];
    if (layer.kind == LayerKind::kConv2d || layer.kind == LayerKind::kLinear) {
      std::vector<int> want = layer.kind == LayerKind::kConv2d
                                  ? std::vector<int>{layer.units, in[0], 3, 3}
                                  : std::vector<int>{layer.units, in[0]};
      const auto* w = params.Find(WeightName(i));
      const auto* b = params.Find(BiasName(i));
      if (w == nullptr || b == nullptr || w->shape != want ||
          b->shape != std::vector<int>{layer.units}) {
        throw ShapeError(LayerName(i, layer.kind) +
                         ": parameters missing or shaped differently from " +
                         ShapeString(want));
      }
    }
    in = shapes[i];
  }
}

template <typename T>
Tensor<T> RunForward(const NetworkSpec& spec, const ParameterSet<T>& params,
                     const Tensor<T>& input, Trace<T>* trace) {
  std::vector<int> expected = {input.batch()};
  expected.insert(expected.end(), spec.input_shape.begin(), spec.input_shape.end());
  if (input.shape != expected || input.batch() < 1) {
    throw ShapeError("network input: got " + ShapeString(input.shape) +
                     ", expected Nx" + ShapeString(spec.input_shape));
  }
  auto shapes = spec.LayerShapes();
  CheckLayerParams(spec, params);
  Tensor<T> cur = input;
  if (trace != nullptr) {
    trace->inputs.clear();
    trace->pool_argmax.assign(spec.layers.size(), {});
    trace->params = &params;
    trace->generation = params.generation();
  }
  for (size_t i = 0; i < spec.layers.size(); ++i) {
    std::vector<int32_t> scratch;
    std::vector<int32_t>* argmax =
        trace != nullptr ? &trace->pool_argmax[i] : &scratch;
    Tensor<T> next = ForwardLayer(spec.layers[i], i, params, cur, shapes[i], argmax);
    if (trace != nullptr) {
      trace->inputs.push_back(std::move(cur));
    }
    cur = std::move(next);
  }
  if (trace != nullptr) trace->inputs.push_back(cur);
  return cur;
}

}  // namespace

template <typename T>
ForwardPass<T> NetworkForward(const NetworkSpec& spec,
                              const ParameterSet<T>& params,
                              const Tensor<T>& input) {
  ForwardPass<T> pass;
  pass.output = RunForward(spec, params, input, &pass.trace);
  return pass;
}

template <typename T>
Tensor<T> NetworkInfer(const NetworkSpec& spec, const ParameterSet<T>& params,
                       const Tensor<T>& input) {
  return RunForward<T>(spec, params, input, nullptr);
}

template <typename T>
BackwardPass<T> NetworkBackward(const NetworkSpec& spec,
                                const ParameterSet<T>& params,
                                const Trace<T>& trace,
                                const Tensor<T>& grad_output,
                                bool want_input_grad) {
  if (trace.params != &params || trace.generation != params.generation() ||
      trace.inputs.size() != spec.layers.size() + 1) {
    throw Error("network_backward: stale or mismatched trace");
  }
  if (grad_output.shape != trace.inputs.back().shape) {
    throw ShapeError("network_backward: grad_output shape " +
                     ShapeString(grad_output.shape) + " != output shape " +
                     ShapeString(trace.inputs.back().shape));
  }
  BackwardPass<T> result;
  result.param_grads = params.ZerosLike();

  // The first layer's input gradient is only needed when requested.
  size_t stop = 0;
  if (!want_input_grad) {
    stop = spec.layers.size();
    for (size_t i = 0; i < spec.layers.size(); ++i) {
      if (spec.layers[i].kind == LayerKind::kConv2d ||
          spec.layers[i].kind == LayerKind::kLinear) {
        stop = i;
        break;
      }
    }
  }

  Tensor<T> grad = grad_output;
  for (size_t li = spec.layers.size(); li-- > 0;) {
    const LayerSpec& layer = spec.layers[li];
    const Tensor<T>& x = trace.inputs[li];
    const bool need_dx = li > stop || want_input_grad;
    const int batch = x.batch();
    Tensor<T> dx;
    if (need_dx) dx = Tensor<T>(x.shape);
    switch (layer.kind) {
      case LayerKind::kConv2d: {
        const int cin = x.shape[1], h = x.shape[2], w = x.shape[3];
        const int cout = layer.units, plane = h * w;
        const auto& weight = params.Get(WeightName(li));
        auto* gw = result.param_grads.Find(WeightName(li));
        auto* gb = result.param_grads.Find(BiasName(li));
        ConstMatMap<T> wm(weight.values.data(), cout, cin * 9);
        MatMap<T> dw(gw->values.data(), cout, cin * 9);
        VecMap<T> db(gb->values.data(), cout);
        RowMat<T> cols(cin * 9, plane);
        RowMat<T> dcols;
        for (int n = 0; n < batch; ++n) {
          ConstMatMap<T> dy(grad.item(n), cout, plane);
          Im2Col(x.item(n), cin, h, w, cols.data());
          dw.noalias() += dy * cols.transpose();
          db += dy.rowwise().sum();
          if (need_dx) {
            dcols.noalias() = wm.transpose() * dy;
            Col2ImAdd(dcols.data(), cin, h, w, dx.item(n));
          }
        }
        break;
      }
      case LayerKind::kRelu:
        if (need_dx) {
          for (int64_t i = 0; i < x.size(); ++i) {
            dx.data[i] = x.data[i] > T(0) ? grad.data[i] : T(0);
          }
        }
        break;
      case LayerKind::kMaxPool:
        if (need_dx) {
          const auto& argmax = trace.pool_argmax[li];
          const int64_t out_item = grad.item_size();
          for (int n = 0; n < batch; ++n) {
            T* dxi = dx.item(n);
            const T* gi = grad.item(n);
            const int32_t* am = argmax.data() + n * out_item;
            for (int64_t o = 0; o < out_item; ++o) dxi[am[o]] += gi[o];
          }
        }
        break;
      case LayerKind::kGlobalTimeMean:
        if (need_dx) {
          const int rows = x.shape[1] * x.shape[2], w = x.shape[3];
          for (int n = 0; n < batch; ++n) {
            MatMap<T> dxi(dx.item(n), rows, w);
            ConstVecMap<T> gi(grad.item(n), rows);
            dxi = (gi / static_cast<T>(w)).replicate(1, w);
          }
        }
        break;
      case LayerKind::kFlatten:
        if (need_dx) dx.data = grad.data;
        break;
      case LayerKind::kLinear: {
        const int in = x.shape[1];
        const auto& weight = params.Get(WeightName(li));
        auto* gw = result.param_grads.Find(WeightName(li));
        auto* gb = result.param_grads.Find(BiasName(li));
        ConstMatMap<T> wm(weight.values.data(), layer.units, in);
        ConstMatMap<T> xm(x.data.data(), batch, in);
        ConstMatMap<T> dy(grad.data.data(), batch, layer.units);
        MatMap<T>(gw->values.data(), layer.units, in).noalias() += dy.transpose() * xm;
        VecMap<T>(gb->values.data(), layer.units) += dy.colwise().sum().transpose();
        if (need_dx) {
          MatMap<T>(dx.data.data(), batch, in).noalias() = dy * wm;
        }
        break;
      }
    }
    if (!need_dx) break;
    grad = std::move(dx);
  }
  if (want_input_grad) {
    result.grad_input = std::move(grad);
  }
  return result;
}

template <typename T>
AdamState<T> MakeAdamState(const ParameterSet<T>& params,
                           const AdamConfig& config) {
  AdamState<T> state;
  state.config = config;
  state.m = params.ZerosLike();
  state.v = params.ZerosLike();
  return state;
}

template <typename T>
void AdamStep(ParameterSet<T>* params, const ParameterSet<T>& grads,
              AdamState<T>* state) {
  auto& p = params->arrays();
  const auto& g = grads.arrays();
  auto& m = state->m.arrays();
  auto& v = state->v.arrays();
  if (p.size() != g.size() || p.size() != m.size() || p.size() != v.size()) {
    throw ShapeError("adam: parameter, gradient and moment sets differ");
  }
  for (size_t a = 0; a < p.size(); ++a) {
    if (p[a].name != g[a].name || p[a].values.size() != g[a].values.size() ||
        m[a].values.size() != p[a].values.size() ||
        v[a].values.size() != p[a].values.size()) {
      throw ShapeError("adam: array " + p[a].name + " is not congruent");
    }
    for (T x : g[a].values) {
      if (!std::isfinite(x)) {
        throw NumericError("adam: non-finite gradient in " + g[a].name);
      }
    }
  }
  const AdamConfig& c = state->config;
  const int64_t t = state->step + 1;
  const T beta1 = static_cast<T>(c.beta1);
  const T beta2 = static_cast<T>(c.beta2);
  const T one_minus_b1 = static_cast<T>(1.0 - c.beta1);
  const T one_minus_b2 = static_cast<T>(1.0 - c.beta2);
  const T bc1 = static_cast<T>(1.0 - std::pow(c.beta1, static_cast<double>(t)));
  const T bc2 = static_cast<T>(1.0 - std::pow(c.beta2, static_cast<double>(t)));
  const T lr = static_cast<T>(c.lr);
  const T eps = static_cast<T>(c.eps);
  for (size_t a = 0; a < p.size(); ++a) {
    T* pv = p[a].values.data();
    const T* gv = g[a].values.data();
    T* mv = m[a].values.data();
    T* vv = v[a].values.data();
    const size_t n = p[a].values.size();
    for (size_t i = 0; i < n; ++i) {
      mv[i] = beta1 * mv[i] + one_minus_b1 * gv[i];
      vv[i] = beta2 * vv[i] + one_minus_b2 * gv[i] * gv[i];
      const T mhat = mv[i] / bc1;
      const T vhat = vv[i] / bc2;
      pv[i] -= lr * mhat / (std::sqrt(vhat) + eps);
    }
  }
  state->step = t;
  params->Touch();
  state->m.Touch();
  state->v.Touch();
}

namespace {

// ReLU sign pattern and max-pool winners of one forward pass.
std::vector<int32_t> KinkSignature(const NetworkSpec& spec,
                                   const Trace<double>& trace) {
  std::vector<int32_t> sig;
  for (size_t i = 0; i < spec.layers.size(); ++i) {
    if (spec.layers[i].kind == LayerKind::kRelu) {
      for (double v : trace.inputs[i].data) sig.push_back(v > 0.0);
    } else if (spec.layers[i].kind == LayerKind::kMaxPool) {
      sig.insert(sig.end(), trace.pool_argmax[i].begin(), trace.pool_argmax[i].end());
    }
  }
  return sig;
}

}  // namespace

GradCheckResult GradCheckDetailed(const NetworkSpec& spec,
                                  const ParameterSet<double>& params,
                                  const Tensor<double>& input,
                                  const LossFn& loss,
                                  const GradCheckOptions& options) {
  auto pass = NetworkForward(spec, params, input);
  Tensor<double> grad_out(pass.output.shape);
  loss(pass.output, &grad_out);
  auto back = NetworkBackward(spec, params, pass.trace, grad_out,
                              options.check_input);
  const std::vector<int32_t> base_sig = KinkSignature(spec, pass.trace);

  const double h = options.step;
  Rng rng(options.seed);
  GradCheckResult result;
  // Loss at a probe point, flagging a kink crossing when requested.
  auto probe_loss = [&](const ParameterSet<double>& p, const Tensor<double>& x,
                        bool* crossed) {
    if (!options.skip_kink_crossings) return loss(NetworkInfer(spec, p, x), nullptr);
    auto probe = NetworkForward(spec, p, x);
    if (KinkSignature(spec, probe.trace) != base_sig) *crossed = true;
    return loss(probe.output, nullptr);
  };
  auto compare = [&](double analytic, double numeric, bool crossed) {
    double denom = std::max({std::abs(analytic), std::abs(numeric), 1e-6});
    double err = std::abs(analytic - numeric) / denom;
    ++result.checked;
    result.max_error_all = std::max(result.max_error_all, err);
    if (crossed) {
      ++result.kink_crossings;
    } else {
      result.max_error = std::max(result.max_error, err);
    }
  };
  auto pick = [&](size_t n) {
    std::vector<size_t> idx(n);
    std::iota(idx.begin(), idx.end(), size_t{0});
    if (options.max_checks_per_array > 0 &&
        n > static_cast<size_t>(options.max_checks_per_array)) {
      std::shuffle(idx.begin(), idx.end(), rng.engine());
      idx.resize(static_cast<size_t>(options.max_checks_per_array));
    }
    return idx;
  };

  ParameterSet<double> probe = params;
  for (size_t a = 0; a < probe.arrays().size(); ++a) {
    auto& values = probe.arrays()[a].values;
    const auto& analytic = back.param_grads.arrays()[a].values;
    for (size_t i : pick(values.size())) {
      const double saved = values[i];
      bool crossed = false;
      values[i] = saved + h;
      probe.Touch();
      double plus = probe_loss(probe, input, &crossed);
      values[i] = saved - h;
      probe.Touch();
      double minus = probe_loss(probe, input, &crossed);
      values[i] = saved;
      compare(analytic[i], (plus - minus) / (2.0 * h), crossed);
    }
  }
  if (options.check_input) {
    Tensor<double> x = input;
    for (size_t i : pick(x.data.size())) {
      const double saved = x.data[i];
      bool crossed = false;
      x.data[i] = saved + h;
      double plus = probe_loss(params, x, &crossed);
      x.data[i] = saved - h;
      double minus = probe_loss(params, x, &crossed);
      x.data[i] = saved;
      compare(back.grad_input.data[i], (plus - minus) / (2.0 * h), crossed);
    }
  }
  return result;
}

double GradCheck(const NetworkSpec& spec, const ParameterSet<double>& params,
                 const Tensor<double>& input, const LossFn& loss,
                 const GradCheckOptions& options) {
  return GradCheckDetailed(spec, params, input, loss, options).max_error;
}

#define BYOLA_INSTANTIATE(T)                                                  \
  template struct Tensor<T>;                                                  \
  template class ParameterSet<T>;                                             \
  template ParameterSet<T> InitParameters<T>(const NetworkSpec&, Rng*);       \
  template ForwardPass<T> NetworkForward<T>(const NetworkSpec&,               \
                                            const ParameterSet<T>&,           \
                                            const Tensor<T>&);                \
  template Tensor<T> NetworkInfer<T>(const NetworkSpec&,                      \
                                     const ParameterSet<T>&,                  \
                                     const Tensor<T>&);                       \
  template BackwardPass<T> NetworkBackward<T>(                                \
      const NetworkSpec&, const ParameterSet<T>&, const Trace<T>&,            \
      const Tensor<T>&, bool);                                                \
  template AdamState<T> MakeAdamState<T>(const ParameterSet<T>&,              \
                                         const AdamConfig&);                  \
  template void AdamStep<T>(ParameterSet<T>*, const ParameterSet<T>&,         \
                            AdamState<T>*);

BYOLA_INSTANTIATE(float)
BYOLA_INSTANTIATE(double)
#undef BYOLA_INSTANTIATE

template ParameterSet<double> ParameterSet<float>::Cast<double>() const;
template ParameterSet<float> ParameterSet<double>::Cast<float>() const;
template ParameterSet<float> ParameterSet<float>::Cast<float>() const;
template ParameterSet<double> ParameterSet<double>::Cast<double>() const;

}  // namespace byola
