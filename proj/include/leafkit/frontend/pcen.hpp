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

// Per-channel energy normalization over [B, C, F] energies:
//   M(0) = E(0),  M(t) = (1 - s) M(t-1) + s E(t)
//   out(t) = (E(t) / (eps + M(t))^alpha + delta)^r - delta^r
// alpha, delta, r, s are per channel; eps is a constant.

#pragma once

#include <cmath>
#include <vector>

#include "leafkit/core/error.hpp"
#include "leafkit/tensor/tensor.hpp"

namespace leafkit::frontend {

template <typename T>
Tensor<T> pcen(const Tensor<T>& energy, const Tensor<T>& alpha, const Tensor<T>& delta, const Tensor<T>& root,
               const Tensor<T>& smooth, double epsilon) {
  if (energy.dim() != 3) throw ShapeError("pcen: expected [B, C, F], got " + shape_str(energy.shape()));
  const std::size_t B = energy.size(0), C = energy.size(1), F = energy.size(2);
  for (const Tensor<T>* p : {&alpha, &delta, &root, &smooth}) {
    if (p->numel() != C) throw ShapeError("pcen: per-channel parameter length differs from channel count");
  }
  const auto E = energy.values();
  std::vector<T> out(B * C * F);
  for (std::size_t b = 0; b < B; ++b)
    for (std::size_t c = 0; c < C; ++c) {
      const double a = alpha[c], d = delta[c], r = root[c], s = smooth[c];
      const double dr = std::pow(d, r);
      const T* e = &E[(b * C + c) * F];
      T* o = &out[(b * C + c) * F];
      double m = 0;
      for (std::size_t t = 0; t < F; ++t) {
        const double et = e[t];
        if (et < 0) throw NumericError("pcen: negative energy");
        m = t == 0 ? et : (1.0 - s) * m + s * et;
        o[t] = static_cast<T>(std::pow(et * std::pow(epsilon + m, -a) + d, r) - dr);
      }
    }

  return Tensor<T>::make_result(
      {B, C, F}, std::move(out), {energy, alpha, delta, root, smooth},
      [=](leafkit::detail::Node<T>& self) {
        const auto& G = self.grad;
        const auto E = energy.values();
        std::vector<T> gE(energy.requires_grad() ? B * C * F : 0, T(0));
        std::vector<T> ga(C, T(0)), gd(C, T(0)), gr(C, T(0)), gs(C, T(0));
        std::vector<double> M(F), adj(F);
        for (std::size_t c = 0; c < C; ++c) {
          const double a = alpha[c], d = delta[c], r = root[c], s = smooth[c];
          double acc_a = 0, acc_d = 0, acc_r = 0, acc_s = 0;
          for (std::size_t b = 0; b < B; ++b) {
            const std::size_t off = (b * C + c) * F;
            const T* e = &E[off];
            const T* g = &G[off];
            for (std::size_t t = 0; t < F; ++t) M[t] = t == 0 ? e[0] : (1.0 - s) * M[t - 1] + s * e[t];
            // Local partials, then the reverse-time recursion for dL/dM.
            for (std::size_t t = F; t-- > 0;) {
              const double base = epsilon + M[t];
              const double q = std::pow(base, -a);
              const double u = e[t] * q + d;
              const double ur1 = std::pow(u, r - 1.0);
              const double dout_du = r * ur1;
              const double gt = g[t];
              acc_r += gt * (ur1 * u * std::log(u) - std::pow(d, r) * std::log(d));
              acc_d += gt * (dout_du - r * std::pow(d, r - 1.0));
              acc_a += gt * dout_du * (-e[t] * q * std::log(base));
              const double local_m = gt * dout_du * e[t] * (-a) * q / base;
              adj[t] = local_m + (t + 1 < F ? (1.0 - s) * adj[t + 1] : 0.0);
              if (!gE.empty()) gE[off + t] += static_cast<T>(gt * dout_du * q);
            }
            for (std::size_t t = 0; t < F; ++t) {
              if (t == 0) {
                if (!gE.empty()) gE[off] += static_cast<T>(adj[0]);
              } else {
                acc_s += adj[t] * (e[t] - M[t - 1]);
                if (!gE.empty()) gE[off + t] += static_cast<T>(s * adj[t]);
              }
            }
          }
          ga[c] = static_cast<T>(acc_a);
          gd[c] = static_cast<T>(acc_d);
          gr[c] = static_cast<T>(acc_r);
          gs[c] = static_cast<T>(acc_s);
        }
        if (!gE.empty()) accumulate<T>(*energy.node(), gE);
        accumulate<T>(*alpha.node(), ga);
        accumulate<T>(*delta.node(), gd);
        accumulate<T>(*root.node(), gr);
        accumulate<T>(*smooth.node(), gs);
      });
}

/// Steady-state PCEN output for a constant input E, where M = E.
inline double pcen_steady_state(double e, double alpha, double delta, double root, double epsilon) {
  return std::pow(e / std::pow(epsilon + e, alpha) + delta, root) - std::pow(delta, root);
}

}  // namespace leafkit::frontend
