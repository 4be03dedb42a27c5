// Copyright 2026 The leafkit Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Direct (cross-correlation) convolutions, as in most deep-learning
// frameworks: out[t] = sum_j k[j] * x[t*stride + j - pad_left].

#pragma once

#include <optional>

#include "leafkit/tensor/tensor.hpp"

namespace leafkit {

struct Conv1dOptions {
  std::size_t stride = 1;
  std::size_t pad_left = 0;
  std::size_t pad_right = 0;
  std::size_t groups = 1;
};

inline std::size_t conv_output_length(std::size_t length, std::size_t klen, std::size_t stride,
                                      std::size_t pad_left, std::size_t pad_right) {
  if (stride == 0) throw std::invalid_argument("conv: stride must be >= 1");
  const std::size_t padded = length + pad_left + pad_right;
  if (klen == 0 || klen > padded) {
    throw ShapeError("conv: kernel of length " + std::to_string(klen) + " exceeds padded input of length " +
                     std::to_string(padded));
  }
  return (padded - klen) / stride + 1;
}

namespace detail {

// Output positions o with 0 <= o*stride + k - pad < length, clipped to [0, n_out).
inline std::pair<std::size_t, std::size_t> valid_range(std::size_t n_out, std::size_t length, std::size_t stride,
                                                       std::size_t k, std::size_t pad) {
  const long s = static_cast<long>(stride);
  const long off = static_cast<long>(k) - static_cast<long>(pad);
  long lo = off >= 0 ? 0 : (-off + s - 1) / s;
  long hi = (static_cast<long>(length) - 1 - off);
  hi = hi < 0 ? -1 : hi / s;
  hi = std::min(hi, static_cast<long>(n_out) - 1);
  if (hi < lo) return {0, 0};
  return {static_cast<std::size_t>(lo), static_cast<std::size_t>(hi) + 1};
}

}  // namespace detail

/// input [batch, chan_in, time], kernels [chan_out, chan_in/groups, klen]
/// -> [batch, chan_out, floor((time + pads - klen)/stride) + 1].
template <typename T>
Tensor<T> conv1d(const Tensor<T>& input, const Tensor<T>& kernels, const Conv1dOptions& opt) {
  if (input.dim() != 3 || kernels.dim() != 3) {
    throw ShapeError("conv1d: expected input [B,C,L] and kernels [O,C/g,K], got " + shape_str(input.shape()) +
                     " and " + shape_str(kernels.shape()));
  }
  const std::size_t B = input.size(0), Cin = input.size(1), L = input.size(2);
  const std::size_t Cout = kernels.size(0), Cg = kernels.size(1), K = kernels.size(2);
  const std::size_t G = opt.groups;
  if (G == 0 || Cin % G != 0 || Cout % G != 0 || Cg != Cin / G) {
    throw ShapeError("conv1d: channel/group mismatch for input " + shape_str(input.shape()) + " and kernels " +
                     shape_str(kernels.shape()));
  }
  const std::size_t F = conv_output_length(L, K, opt.stride, opt.pad_left, opt.pad_right);
  const std::size_t s = opt.stride, pl = opt.pad_left;
  const std::size_t out_per_group = Cout / G;

  std::vector<T> out(B * Cout * F, T(0));
  const auto X = input.values();
  const auto W = kernels.values();
  for (std::size_t b = 0; b < B; ++b)
    for (std::size_t co = 0; co < Cout; ++co) {
      const std::size_t g = co / out_per_group;
      T* o = &out[(b * Cout + co) * F];
      for (std::size_t cg = 0; cg < Cg; ++cg) {
        const T* x = &X[(b * Cin + g * Cg + cg) * L];
        const T* w = &W[(co * Cg + cg) * K];
        for (std::size_t j = 0; j < K; ++j) {
          auto [lo, hi] = detail::valid_range(F, L, s, j, pl);
          const T wj = w[j];
          for (std::size_t f = lo; f < hi; ++f) o[f] += wj * x[f * s + j - pl];
        }
      }
    }

  return Tensor<T>::make_result(
      {B, Cout, F}, std::move(out), {input, kernels},
      [input, kernels, B, Cin, L, Cout, Cg, K, F, s, pl, out_per_group](detail::Node<T>& self) {
        const auto& Gr = self.grad;
        const auto X = input.values();
        const auto W = kernels.values();
        std::vector<T> gx(input.requires_grad() ? input.numel() : 0, T(0));
        std::vector<T> gw(kernels.requires_grad() ? kernels.numel() : 0, T(0));
        for (std::size_t b = 0; b < B; ++b)
          for (std::size_t co = 0; co < Cout; ++co) {
            const std::size_t g = co / out_per_group;
            const T* go = &Gr[(b * Cout + co) * F];
            for (std::size_t cg = 0; cg < Cg; ++cg) {
              const std::size_t xoff = (b * Cin + g * Cg + cg) * L;
              const std::size_t woff = (co * Cg + cg) * K;
              for (std::size_t j = 0; j < K; ++j) {
                auto [lo, hi] = detail::valid_range(F, L, s, j, pl);
                if (!gx.empty()) {
                  const T wj = W[woff + j];
                  for (std::size_t f = lo; f < hi; ++f) gx[xoff + f * s + j - pl] += wj * go[f];
                }
                if (!gw.empty()) {
                  T acc = 0;
                  for (std::size_t f = lo; f < hi; ++f) acc += go[f] * X[xoff + f * s + j - pl];
                  gw[woff + j] += acc;
                }
              }
            }
          }
        if (!gx.empty()) accumulate<T>(*input.node(), gx);
        if (!gw.empty()) accumulate<T>(*kernels.node(), gw);
      });
}

/// Symmetric-padding convenience overload.
template <typename T>
Tensor<T> conv1d(const Tensor<T>& input, const Tensor<T>& kernels, std::size_t stride, std::size_t padding) {
  return conv1d(input, kernels, Conv1dOptions{stride, padding, padding, 1});
}

/// input [batch, chan_in, h, w], kernels [chan_out, chan_in, kh, kw], optional
/// bias [chan_out]. Same stride and padding on both spatial axes.
template <typename T>
Tensor<T> conv2d(const Tensor<T>& input, const Tensor<T>& kernels, std::size_t stride, std::size_t padding,
                 const std::optional<Tensor<T>>& bias = std::nullopt) {
  if (input.dim() != 4 || kernels.dim() != 4 || kernels.size(1) != input.size(1)) {
    throw ShapeError("conv2d: expected input [B,C,H,W] and kernels [O,C,KH,KW], got " + shape_str(input.shape()) +
                     " and " + shape_str(kernels.shape()));
  }
  const std::size_t B = input.size(0), Cin = input.size(1), H = input.size(2), Wd = input.size(3);
  const std::size_t Cout = kernels.size(0), KH = kernels.size(2), KW = kernels.size(3);
  if (bias && bias->numel() != Cout) throw ShapeError("conv2d: bias length must equal output channels");
  const std::size_t OH = conv_output_length(H, KH, stride, padding, padding);
  const std::size_t OW = conv_output_length(Wd, KW, stride, padding, padding);
  const std::size_t s = stride, p = padding;

  std::vector<T> out(B * Cout * OH * OW, T(0));
  const auto X = input.values();
  const auto Wt = kernels.values();
  for (std::size_t b = 0; b < B; ++b)
    for (std::size_t co = 0; co < Cout; ++co) {
      T* o = &out[(b * Cout + co) * OH * OW];
      if (bias) std::fill(o, o + OH * OW, (*bias)[co]);
      for (std::size_t ci = 0; ci < Cin; ++ci) {
        const T* x = &X[(b * Cin + ci) * H * Wd];
        for (std::size_t kh = 0; kh < KH; ++kh) {
          auto [hlo, hhi] = detail::valid_range(OH, H, s, kh, p);
          for (std::size_t kw = 0; kw < KW; ++kw) {
            auto [wlo, whi] = detail::valid_range(OW, Wd, s, kw, p);
            const T w = Wt[((co * Cin + ci) * KH + kh) * KW + kw];
            for (std::size_t oh = hlo; oh < hhi; ++oh) {
              const T* xr = x + (oh * s + kh - p) * Wd;
              T* orow = o + oh * OW;
              for (std::size_t ow = wlo; ow < whi; ++ow) orow[ow] += w * xr[ow * s + kw - p];
            }
          }
        }
      }
    }

  std::vector<Tensor<T>> parents{input, kernels};
  if (bias) parents.push_back(*bias);
  return Tensor<T>::make_result(
      {B, Cout, OH, OW}, std::move(out), std::move(parents),
      [input, kernels, bias, B, Cin, H, Wd, Cout, KH, KW, OH, OW, s, p](detail::Node<T>& self) {
        const auto& Gr = self.grad;
        const auto X = input.values();
        const auto Wt = kernels.values();
        std::vector<T> gx(input.requires_grad() ? input.numel() : 0, T(0));
        std::vector<T> gw(kernels.requires_grad() ? kernels.numel() : 0, T(0));
        for (std::size_t b = 0; b < B; ++b)
          for (std::size_t co = 0; co < Cout; ++co) {
            const T* go = &Gr[(b * Cout + co) * OH * OW];
            for (std::size_t ci = 0; ci < Cin; ++ci) {
              const std::size_t xoff = (b * Cin + ci) * H * Wd;
              for (std::size_t kh = 0; kh < KH; ++kh) {
                auto [hlo, hhi] = detail::valid_range(OH, H, s, kh, p);
                for (std::size_t kw = 0; kw < KW; ++kw) {
                  auto [wlo, whi] = detail::valid_range(OW, Wd, s, kw, p);
                  const std::size_t widx = ((co * Cin + ci) * KH + kh) * KW + kw;
                  const T w = Wt[widx];
                  T acc = 0;
                  for (std::size_t oh = hlo; oh < hhi; ++oh) {
                    const std::size_t xrow = xoff + (oh * s + kh - p) * Wd;
                    const T* grow = go + oh * OW;
                    if (!gx.empty()) {
                      T* gxr = gx.data() + xrow;
                      for (std::size_t ow = wlo; ow < whi; ++ow) gxr[ow * s + kw - p] += w * grow[ow];
                    }
                    if (!gw.empty()) {
                      const T* xr = X.data() + xrow;
                      for (std::size_t ow = wlo; ow < whi; ++ow) acc += grow[ow] * xr[ow * s + kw - p];
                    }
                  }
                  if (!gw.empty()) gw[widx] += acc;
                }
              }
            }
          }
        if (!gx.empty()) accumulate<T>(*input.node(), gx);
        if (!gw.empty()) accumulate<T>(*kernels.node(), gw);
        if (bias && bias->requires_grad()) {
          std::vector<T> gb(Cout, T(0));
          for (std::size_t b = 0; b < B; ++b)
            for (std::size_t co = 0; co < Cout; ++co) {
              const T* go = &Gr[(b * Cout + co) * OH * OW];
              T acc = 0;
              for (std::size_t i = 0; i < OH * OW; ++i) acc += go[i];
              gb[co] += acc;
            }
          accumulate<T>(*bias->node(), gb);
        }
      });
}

}  // namespace leafkit
