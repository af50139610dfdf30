/*
 * SPDX-FileCopyrightText: Copyright (c) 2026 The parf-forge Authors. All rights reserved.
 * SPDX-License-Identifier: Apache-2.0
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 * http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include "parf/nn/network.hpp"

#include <Eigen/Core>

#include <algorithm>
#include <cmath>
#include <cstring>
#include <stdexcept>

#include "parf/error.hpp"

namespace parf::nn {

namespace {

template <typename T>
using RowMat = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
template <typename T>
using StridedMap = Eigen::Map<RowMat<T>, Eigen::Unaligned, Eigen::OuterStride<>>;
template <typename T>
using ConstStridedMap = Eigen::Map<const RowMat<T>, Eigen::Unaligned, Eigen::OuterStride<>>;
template <typename T>
using VecMap = Eigen::Map<Eigen::Matrix<T, Eigen::Dynamic, 1>>;

// Output columns per GEMM tile; bounds the im2col buffer.
constexpr std::size_t kTileColumns = 8192;

std::size_t tile_rows(std::size_t width) {
  return std::max<std::size_t>(1, kTileColumns / std::max<std::size_t>(1, width));
}

// ---- 3x3 convolution, stride 1, zero padding 1 ------------------------------------------

// cols(ci*9 + ky*3 + kx, (y - y0)*W + x) = in(ci, y + ky - 1, x + kx - 1)
template <typename T>
void im2col3x3(const Tensor<T>& in, std::size_t y0, std::size_t y1, RowMat<T>& cols) {
  const std::size_t W = in.width, H = in.height, P = (y1 - y0) * W;
  cols.resize(static_cast<Eigen::Index>(in.channels * 9), static_cast<Eigen::Index>(P));
  for (std::size_t ci = 0; ci < in.channels; ++ci) {
    const T* src = in.channel(ci);
    for (std::size_t ky = 0; ky < 3; ++ky) {
      for (std::size_t kx = 0; kx < 3; ++kx) {
        T* row = cols.data() + (ci * 9 + ky * 3 + kx) * P;
        for (std::size_t y = y0; y < y1; ++y) {
          T* dst = row + (y - y0) * W;
          const long sy = static_cast<long>(y + ky) - 1;
          if (sy < 0 || sy >= static_cast<long>(H)) {
            std::fill(dst, dst + W, T(0));
            continue;
          }
          const T* s = src + static_cast<std::size_t>(sy) * W;
          if (kx == 0) {
            dst[0] = T(0);
            std::memcpy(dst + 1, s, (W - 1) * sizeof(T));
          } else if (kx == 1) {
            std::memcpy(dst, s, W * sizeof(T));
          } else {
            std::memcpy(dst, s + 1, (W - 1) * sizeof(T));
            dst[W - 1] = T(0);
          }
        }
      }
    }
  }
}

template <typename T>
void col2im3x3(const RowMat<T>& cols, std::size_t y0, std::size_t y1, Tensor<T>& grad_in) {
  const std::size_t W = grad_in.width, H = grad_in.height, P = (y1 - y0) * W;
  for (std::size_t ci = 0; ci < grad_in.channels; ++ci) {
    T* dst_plane = grad_in.channel(ci);
    for (std::size_t ky = 0; ky < 3; ++ky) {
      for (std::size_t kx = 0; kx < 3; ++kx) {
        const T* row = cols.data() + (ci * 9 + ky * 3 + kx) * P;
        for (std::size_t y = y0; y < y1; ++y) {
          const long sy = static_cast<long>(y + ky) - 1;
          if (sy < 0 || sy >= static_cast<long>(H)) continue;
          const T* s = row + (y - y0) * W;
          T* d = dst_plane + static_cast<std::size_t>(sy) * W;
          if (kx == 0) {
            for (std::size_t x = 1; x < W; ++x) d[x - 1] += s[x];
          } else if (kx == 1) {
            for (std::size_t x = 0; x < W; ++x) d[x] += s[x];
          } else {
            for (std::size_t x = 0; x + 1 < W; ++x) d[x + 1] += s[x];
          }
        }
      }
    }
  }
}

template <typename T>
void conv3x3_forward(const Tensor<T>& in, const NamedTensor<T>& w, const NamedTensor<T>& b,
                     Tensor<T>& out) {
  const std::size_t cout = w.shape[0], K = in.channels * 9;
  out = Tensor<T>(cout, in.height, in.width);
  Eigen::Map<const RowMat<T>> wm(w.values.data(), static_cast<Eigen::Index>(cout),
                                 static_cast<Eigen::Index>(K));
  RowMat<T> cols;
  const std::size_t step = tile_rows(in.width);
  for (std::size_t y0 = 0; y0 < in.height; y0 += step) {
    const std::size_t y1 = std::min(in.height, y0 + step);
    im2col3x3(in, y0, y1, cols);
    StridedMap<T> o(out.data.data() + y0 * in.width, static_cast<Eigen::Index>(cout),
                    cols.cols(), Eigen::OuterStride<>(static_cast<Eigen::Index>(out.plane())));
    o.noalias() = wm * cols;
  }
  for (std::size_t c = 0; c < cout; ++c) {
    T* p = out.channel(c);
    const T bias = b.values[c];
    for (std::size_t i = 0; i < out.plane(); ++i) p[i] += bias;
  }
}

template <typename T>
void conv3x3_backward(const Tensor<T>& in, const NamedTensor<T>& w, const Tensor<T>& grad_out,
                      NamedTensor<T>& grad_w, NamedTensor<T>& grad_b, Tensor<T>* grad_in) {
  const std::size_t cout = w.shape[0], K = in.channels * 9;
  Eigen::Map<const RowMat<T>> wm(w.values.data(), static_cast<Eigen::Index>(cout),
                                 static_cast<Eigen::Index>(K));
  Eigen::Map<RowMat<T>> gw(grad_w.values.data(), static_cast<Eigen::Index>(cout),
                           static_cast<Eigen::Index>(K));
  RowMat<T> cols, dcols;
  const std::size_t step = tile_rows(in.width);
  for (std::size_t y0 = 0; y0 < in.height; y0 += step) {
    const std::size_t y1 = std::min(in.height, y0 + step);
    im2col3x3(in, y0, y1, cols);
    ConstStridedMap<T> g(grad_out.data.data() + y0 * in.width, static_cast<Eigen::Index>(cout),
                         cols.cols(),
                         Eigen::OuterStride<>(static_cast<Eigen::Index>(grad_out.plane())));
    gw.noalias() += g * cols.transpose();
    if (grad_in) {
      dcols.noalias() = wm.transpose() * g;
      col2im3x3(dcols, y0, y1, *grad_in);
    }
  }
  for (std::size_t c = 0; c < cout; ++c) {
    const T* p = grad_out.channel(c);
    T acc = T(0);
    for (std::size_t i = 0; i < grad_out.plane(); ++i) acc += p[i];
    grad_b.values[c] += acc;
  }
}

// ---- 2x2 convolution, stride 2 (learned downsampling) ------------------------------------

template <typename T>
void im2col2x2(const Tensor<T>& in, std::size_t y0, std::size_t y1, RowMat<T>& cols) {
  const std::size_t Wo = in.width / 2, P = (y1 - y0) * Wo;
  cols.resize(static_cast<Eigen::Index>(in.channels * 4), static_cast<Eigen::Index>(P));
  for (std::size_t ci = 0; ci < in.channels; ++ci) {
    const T* src = in.channel(ci);
    for (std::size_t ky = 0; ky < 2; ++ky) {
      for (std::size_t kx = 0; kx < 2; ++kx) {
        T* row = cols.data() + (ci * 4 + ky * 2 + kx) * P;
        for (std::size_t y = y0; y < y1; ++y) {
          const T* s = src + (2 * y + ky) * in.width + kx;
          T* d = row + (y - y0) * Wo;
          for (std::size_t x = 0; x < Wo; ++x) d[x] = s[2 * x];
        }
      }
    }
  }
}

template <typename T>
void col2im2x2(const RowMat<T>& cols, std::size_t y0, std::size_t y1, Tensor<T>& grad_in) {
  const std::size_t Wo = grad_in.width / 2, P = (y1 - y0) * Wo;
  for (std::size_t ci = 0; ci < grad_in.channels; ++ci) {
    T* dst = grad_in.channel(ci);
    for (std::size_t ky = 0; ky < 2; ++ky) {
      for (std::size_t kx = 0; kx < 2; ++kx) {
        const T* row = cols.data() + (ci * 4 + ky * 2 + kx) * P;
        for (std::size_t y = y0; y < y1; ++y) {
          const T* s = row + (y - y0) * Wo;
          T* d = dst + (2 * y + ky) * grad_in.width + kx;
          for (std::size_t x = 0; x < Wo; ++x) d[2 * x] += s[x];
        }
      }
    }
  }
}

template <typename T>
void down2x2_forward(const Tensor<T>& in, const NamedTensor<T>& w, const NamedTensor<T>& b,
                     Tensor<T>& out) {
  if (in.height % 2 != 0 || in.width % 2 != 0) {
    throw std::invalid_argument("downsampling needs even spatial dimensions");
  }
  const std::size_t cout = w.shape[0], K = in.channels * 4;
  const std::size_t Ho = in.height / 2, Wo = in.width / 2;
  out = Tensor<T>(cout, Ho, Wo);
  Eigen::Map<const RowMat<T>> wm(w.values.data(), static_cast<Eigen::Index>(cout),
                                 static_cast<Eigen::Index>(K));
  RowMat<T> cols;
  const std::size_t step = tile_rows(Wo);
  for (std::size_t y0 = 0; y0 < Ho; y0 += step) {
    const std::size_t y1 = std::min(Ho, y0 + step);
    im2col2x2(in, y0, y1, cols);
    StridedMap<T> o(out.data.data() + y0 * Wo, static_cast<Eigen::Index>(cout), cols.cols(),
                    Eigen::OuterStride<>(static_cast<Eigen::Index>(out.plane())));
    o.noalias() = wm * cols;
  }
  for (std::size_t c = 0; c < cout; ++c) {
    T* p = out.channel(c);
    for (std::size_t i = 0; i < out.plane(); ++i) p[i] += b.values[c];
  }
}

template <typename T>
void down2x2_backward(const Tensor<T>& in, const NamedTensor<T>& w, const Tensor<T>& grad_out,
                      NamedTensor<T>& grad_w, NamedTensor<T>& grad_b, Tensor<T>* grad_in) {
  const std::size_t cout = w.shape[0], K = in.channels * 4;
  const std::size_t Ho = in.height / 2, Wo = in.width / 2;
  Eigen::Map<const RowMat<T>> wm(w.values.data(), static_cast<Eigen::Index>(cout),
                                 static_cast<Eigen::Index>(K));
  Eigen::Map<RowMat<T>> gw(grad_w.values.data(), static_cast<Eigen::Index>(cout),
                           static_cast<Eigen::Index>(K));
  RowMat<T> cols, dcols;
  const std::size_t step = tile_rows(Wo);
  for (std::size_t y0 = 0; y0 < Ho; y0 += step) {
    const std::size_t y1 = std::min(Ho, y0 + step);
    im2col2x2(in, y0, y1, cols);
    ConstStridedMap<T> g(grad_out.data.data() + y0 * Wo, static_cast<Eigen::Index>(cout),
                         cols.cols(),
                         Eigen::OuterStride<>(static_cast<Eigen::Index>(grad_out.plane())));
    gw.noalias() += g * cols.transpose();
    if (grad_in) {
      dcols.noalias() = wm.transpose() * g;
      col2im2x2(dcols, y0, y1, *grad_in);
    }
  }
  for (std::size_t c = 0; c < cout; ++c) {
    const T* p = grad_out.channel(c);
    T acc = T(0);
    for (std::size_t i = 0; i < grad_out.plane(); ++i) acc += p[i];
    grad_b.values[c] += acc;
  }
}

// ---- 1x1 convolution (linear head) ------------------------------------------------------

template <typename T>
void conv1x1_forward(const Tensor<T>& in, const NamedTensor<T>& w, const NamedTensor<T>& b,
                     Tensor<T>& out) {
  const std::size_t cout = w.shape[0];
  out = Tensor<T>(cout, in.height, in.width);
  Eigen::Map<const RowMat<T>> wm(w.values.data(), static_cast<Eigen::Index>(cout),
                                 static_cast<Eigen::Index>(in.channels));
  Eigen::Map<const RowMat<T>> x(in.data.data(), static_cast<Eigen::Index>(in.channels),
                                static_cast<Eigen::Index>(in.plane()));
  Eigen::Map<RowMat<T>> o(out.data.data(), static_cast<Eigen::Index>(cout),
                          static_cast<Eigen::Index>(out.plane()));
  o.noalias() = wm * x;
  for (std::size_t c = 0; c < cout; ++c) {
    T* p = out.channel(c);
    for (std::size_t i = 0; i < out.plane(); ++i) p[i] += b.values[c];
  }
}

template <typename T>
void conv1x1_backward(const Tensor<T>& in, const NamedTensor<T>& w, const Tensor<T>& grad_out,
                      NamedTensor<T>& grad_w, NamedTensor<T>& grad_b, Tensor<T>* grad_in) {
  const std::size_t cout = w.shape[0];
  const auto rows = static_cast<Eigen::Index>(in.channels);
  const auto pix = static_cast<Eigen::Index>(in.plane());
  Eigen::Map<const RowMat<T>> wm(w.values.data(), static_cast<Eigen::Index>(cout), rows);
  Eigen::Map<const RowMat<T>> x(in.data.data(), rows, pix);
  Eigen::Map<const RowMat<T>> g(grad_out.data.data(), static_cast<Eigen::Index>(cout), pix);
  Eigen::Map<RowMat<T>> gw(grad_w.values.data(), static_cast<Eigen::Index>(cout), rows);
  gw.noalias() += g * x.transpose();
  for (std::size_t c = 0; c < cout; ++c) {
    const T* p = grad_out.channel(c);
    T acc = T(0);
    for (std::size_t i = 0; i < grad_out.plane(); ++i) acc += p[i];
    grad_b.values[c] += acc;
  }
  if (grad_in) {
    Eigen::Map<RowMat<T>> gi(grad_in->data.data(), rows, pix);
    gi.noalias() += wm.transpose() * g;
  }
}

// ---- parameter-free ops -----------------------------------------------------------------

template <typename T>
void activate_forward(const Tensor<T>& in, ActFn f, Tensor<T>& out) {
  const std::size_t n = in.size();
  if (f == ActFn::MirroredRelu) {
    out = Tensor<T>(2 * in.channels, in.height, in.width);
    T* pos = out.data.data();
    T* neg = out.data.data() + n;
    for (std::size_t i = 0; i < n; ++i) {
      const T v = in.data[i];
      pos[i] = v > T(0) ? v : T(0);
      neg[i] = v < T(0) ? -v : T(0);
    }
    return;
  }
  out = Tensor<T>(in.channels, in.height, in.width);
  switch (f) {
    case ActFn::Sine:
      for (std::size_t i = 0; i < n; ++i) out.data[i] = std::sin(in.data[i]);
      break;
    case ActFn::Relu:
      for (std::size_t i = 0; i < n; ++i) out.data[i] = in.data[i] > T(0) ? in.data[i] : T(0);
      break;
    case ActFn::Elu:
      for (std::size_t i = 0; i < n; ++i) {
        const T v = in.data[i];
        out.data[i] = v > T(0) ? v : std::expm1(v);
      }
      break;
    case ActFn::MirroredRelu:
      break;
  }
}

template <typename T>
void activate_backward(const Tensor<T>& in, ActFn f, const Tensor<T>& grad_out,
                       Tensor<T>& grad_in) {
  const std::size_t n = in.size();
  switch (f) {
    case ActFn::Sine:
      for (std::size_t i = 0; i < n; ++i) grad_in.data[i] += grad_out.data[i] * std::cos(in.data[i]);
      break;
    case ActFn::Relu:
      for (std::size_t i = 0; i < n; ++i) {
        if (in.data[i] > T(0)) grad_in.data[i] += grad_out.data[i];
      }
      break;
    case ActFn::Elu:
      for (std::size_t i = 0; i < n; ++i) {
        const T v = in.data[i];
        grad_in.data[i] += grad_out.data[i] * (v > T(0) ? T(1) : std::exp(v));
      }
      break;
    case ActFn::MirroredRelu: {
      const T* gpos = grad_out.data.data();
      const T* gneg = grad_out.data.data() + n;
      for (std::size_t i = 0; i < n; ++i) {
        const T v = in.data[i];
        if (v > T(0)) grad_in.data[i] += gpos[i];
        else if (v < T(0)) grad_in.data[i] -= gneg[i];
      }
      break;
    }
  }
}

template <typename T>
void upsample_forward(const Tensor<T>& in, Tensor<T>& out) {
  out = Tensor<T>(in.channels, 2 * in.height, 2 * in.width);
  for (std::size_t c = 0; c < in.channels; ++c) {
    for (std::size_t y = 0; y < out.height; ++y) {
      const T* s = in.channel(c) + (y / 2) * in.width;
      T* d = out.channel(c) + y * out.width;
      for (std::size_t x = 0; x < out.width; ++x) d[x] = s[x / 2];
    }
  }
}

template <typename T>
void upsample_backward(const Tensor<T>& grad_out, Tensor<T>& grad_in) {
  for (std::size_t c = 0; c < grad_in.channels; ++c) {
    for (std::size_t y = 0; y < grad_out.height; ++y) {
      const T* s = grad_out.channel(c) + y * grad_out.width;
      T* d = grad_in.channel(c) + (y / 2) * grad_in.width;
      for (std::size_t x = 0; x < grad_out.width; ++x) d[x / 2] += s[x];
    }
  }
}

}  // namespace

const char* to_string(ActFn f) {
  switch (f) {
    case ActFn::Sine: return "sine";
    case ActFn::Relu: return "relu";
    case ActFn::Elu: return "elu";
    case ActFn::MirroredRelu: return "mirrored-relu";
  }
  return "?";
}

GraphSpec::GraphSpec(std::size_t input_channels) {
  Node in;
  in.op = OpKind::Input;
  in.channels = input_channels;
  in.name = "input";
  nodes_.push_back(in);
}

int GraphSpec::push(Node n) {
  for (int i : n.inputs) {
    if (i < 0 || i >= static_cast<int>(nodes_.size())) {
      throw std::logic_error("graph input refers to a later node");
    }
  }
  nodes_.push_back(std::move(n));
  return static_cast<int>(nodes_.size()) - 1;
}

int GraphSpec::conv3x3(int x, std::size_t out_channels, const std::string& name) {
  const std::size_t cin = channels(x);
  Node n;
  n.op = OpKind::Conv3x3;
  n.inputs = {x};
  n.channels = out_channels;
  n.name = name;
  n.weight = static_cast<int>(params_.size());
  params_.push_back({name + ".weight", {out_channels, cin, 3, 3}, cin * 9, false});
  n.bias = static_cast<int>(params_.size());
  params_.push_back({name + ".bias", {out_channels}, cin * 9, false});
  return push(std::move(n));
}

int GraphSpec::down2x2(int x, std::size_t out_channels, const std::string& name) {
  const std::size_t cin = channels(x);
  Node n;
  n.op = OpKind::Down2x2;
  n.inputs = {x};
  n.channels = out_channels;
  n.name = name;
  n.weight = static_cast<int>(params_.size());
  params_.push_back({name + ".weight", {out_channels, cin, 2, 2}, cin * 4, false});
  n.bias = static_cast<int>(params_.size());
  params_.push_back({name + ".bias", {out_channels}, cin * 4, false});
  return push(std::move(n));
}

int GraphSpec::conv1x1(int x, std::size_t out_channels, const std::string& name, bool zero_init) {
  const std::size_t cin = channels(x);
  Node n;
  n.op = OpKind::Conv1x1;
  n.inputs = {x};
  n.channels = out_channels;
  n.name = name;
  n.weight = static_cast<int>(params_.size());
  params_.push_back({name + ".weight", {out_channels, cin, 1, 1}, cin, zero_init});
  n.bias = static_cast<int>(params_.size());
  params_.push_back({name + ".bias", {out_channels}, cin, zero_init});
  return push(std::move(n));
}

int GraphSpec::upsample(int x) {
  Node n;
  n.op = OpKind::Upsample2x;
  n.inputs = {x};
  n.channels = channels(x);
  n.name = "upsample";
  return push(std::move(n));
}

int GraphSpec::concat(const std::vector<int>& xs) {
  if (xs.empty()) throw std::logic_error("concat of nothing");
  Node n;
  n.op = OpKind::Concat;
  n.inputs = xs;
  for (int x : xs) n.channels += channels(x);
  n.name = "concat";
  return push(std::move(n));
}

int GraphSpec::activate(int x, ActFn f) {
  Node n;
  n.op = OpKind::Activate;
  n.inputs = {x};
  n.act = f;
  n.channels = f == ActFn::MirroredRelu ? 2 * channels(x) : channels(x);
  n.name = to_string(f);
  return push(std::move(n));
}

int GraphSpec::add(int a, int b) {
  if (channels(a) != channels(b)) throw std::logic_error("add of mismatched channel counts");
  Node n;
  n.op = OpKind::Add;
  n.inputs = {a, b};
  n.channels = channels(a);
  n.name = "add";
  return push(std::move(n));
}

template <typename T>
const Tensor<T>& Executor<T>::forward(const ParameterSet<T>& params, Tensor<T> input) {
  const auto nodes = graph_->nodes();
  if (params.size() != graph_->params().size()) {
    throw std::invalid_argument("parameter set does not match the graph");
  }
  if (input.channels != nodes[0].channels) {
    throw std::invalid_argument("input channel count does not match the graph");
  }
  values_.assign(nodes.size(), Tensor<T>{});
  values_[0] = std::move(input);
  for (std::size_t i = 1; i < nodes.size(); ++i) {
    const Node& n = nodes[i];
    const auto& x = values_[static_cast<std::size_t>(n.inputs[0])];
    auto& out = values_[i];
    switch (n.op) {
      case OpKind::Input:
        break;
      case OpKind::Conv3x3:
        conv3x3_forward(x, params[static_cast<std::size_t>(n.weight)],
                        params[static_cast<std::size_t>(n.bias)], out);
        break;
      case OpKind::Down2x2:
        down2x2_forward(x, params[static_cast<std::size_t>(n.weight)],
                        params[static_cast<std::size_t>(n.bias)], out);
        break;
      case OpKind::Conv1x1:
        conv1x1_forward(x, params[static_cast<std::size_t>(n.weight)],
                        params[static_cast<std::size_t>(n.bias)], out);
        break;
      case OpKind::Upsample2x:
        upsample_forward(x, out);
        break;
      case OpKind::Concat: {
        std::size_t c = 0;
        for (int j : n.inputs) c += values_[static_cast<std::size_t>(j)].channels;
        out = Tensor<T>(c, x.height, x.width);
        auto dst = out.data.begin();
        for (int j : n.inputs) {
          const auto& v = values_[static_cast<std::size_t>(j)];
          if (v.height != x.height || v.width != x.width) {
            throw std::invalid_argument("concat of mismatched spatial shapes");
          }
          dst = std::copy(v.data.begin(), v.data.end(), dst);
        }
        break;
      }
      case OpKind::Activate:
        activate_forward(x, n.act, out);
        break;
      case OpKind::Add: {
        const auto& y = values_[static_cast<std::size_t>(n.inputs[1])];
        if (!x.same_shape(y)) throw std::invalid_argument("add of mismatched shapes");
        out = x;
        for (std::size_t k = 0; k < out.size(); ++k) out.data[k] += y.data[k];
        break;
      }
    }
  }
  return values_.back();
}

template <typename T>
void Executor<T>::backward(const ParameterSet<T>& params, const Tensor<T>& grad_output,
                           ParameterSet<T>& grads) {
  if (values_.empty()) throw std::logic_error("backward called before forward");
  if (!grads.same_layout(params)) throw std::invalid_argument("gradient layout mismatch");
  const auto nodes = graph_->nodes();
  if (!grad_output.same_shape(values_.back())) {
    throw std::invalid_argument("output gradient shape mismatch");
  }
  std::vector<Tensor<T>> grad(nodes.size());
  grad.back() = grad_output;

  auto grad_of = [&](int j) -> Tensor<T>* {
    // The network input needs no gradient.
    if (j == 0) return nullptr;
    auto& g = grad[static_cast<std::size_t>(j)];
    if (g.data.empty()) {
      const auto& v = values_[static_cast<std::size_t>(j)];
      g = Tensor<T>(v.channels, v.height, v.width);
    }
    return &g;
  };

  for (std::size_t i = nodes.size() - 1; i >= 1; --i) {
    const Node& n = nodes[i];
    if (grad[i].data.empty()) continue;  // node does not reach the output
    const Tensor<T>& g = grad[i];
    const auto& x = values_[static_cast<std::size_t>(n.inputs[0])];
    switch (n.op) {
      case OpKind::Input:
        break;
      case OpKind::Conv3x3:
        conv3x3_backward(x, params[static_cast<std::size_t>(n.weight)], g,
                         grads[static_cast<std::size_t>(n.weight)],
                         grads[static_cast<std::size_t>(n.bias)], grad_of(n.inputs[0]));
        break;
      case OpKind::Down2x2:
        down2x2_backward(x, params[static_cast<std::size_t>(n.weight)], g,
                         grads[static_cast<std::size_t>(n.weight)],
                         grads[static_cast<std::size_t>(n.bias)], grad_of(n.inputs[0]));
        break;
      case OpKind::Conv1x1:
        conv1x1_backward(x, params[static_cast<std::size_t>(n.weight)], g,
                         grads[static_cast<std::size_t>(n.weight)],
                         grads[static_cast<std::size_t>(n.bias)], grad_of(n.inputs[0]));
        break;
      case OpKind::Upsample2x:
        if (auto* gi = grad_of(n.inputs[0])) upsample_backward(g, *gi);
        break;
      case OpKind::Concat: {
        std::size_t offset = 0;
        for (int j : n.inputs) {
          const std::size_t len = values_[static_cast<std::size_t>(j)].size();
          if (auto* gi = grad_of(j)) {
            for (std::size_t k = 0; k < len; ++k) gi->data[k] += g.data[offset + k];
          }
          offset += len;
        }
        break;
      }
      case OpKind::Activate:
        if (auto* gi = grad_of(n.inputs[0])) activate_backward(x, n.act, g, *gi);
        break;
      case OpKind::Add:
        for (int j : n.inputs) {
          if (auto* gi = grad_of(j)) {
            for (std::size_t k = 0; k < g.size(); ++k) gi->data[k] += g.data[k];
          }
        }
        break;
    }
    grad[i] = Tensor<T>{};  // release
  }
}

template class Executor<float>;
template class Executor<double>;

}  // namespace parf::nn
