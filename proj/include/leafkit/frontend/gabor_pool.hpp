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

// Fused Gabor filterbank + squared modulus + Gaussian lowpass pooling.
//
// For each example b and channel c:
//   y[n]   = sum_i k_c[i] x[n + i - pl]            complex Gabor, same padding
//   e[n]   = |y[n]|^2
//   out[f] = sum_j w_c[j] e[f * stride - pool_pad + j]
// with pl = (klen - 1) / 2 and pool_pad = stride, so a frame f is centered
// on sample f * stride exactly as in the centered STFT, and the frame count
// is ceil(L / stride).
//
// The correlation runs as overlap-save over FFT blocks of size M: block q
// produces outputs n in [qV, qV + V), V = M - klen + 1, from the input
// segment starting at qV - pl. The backward pass recomputes y per channel
// instead of storing it.

#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>
#include <span>
#include <vector>

#include "leafkit/dsp/fft.hpp"
#include "leafkit/dsp/kernels.hpp"
#include "leafkit/tensor/tensor.hpp"

namespace leafkit::frontend {

struct GaborPoolConfig {
  std::size_t klen = 294;
  std::size_t stride = 147;
  double sample_rate = 44100.0;
  std::size_t fft_block = 4096;

  std::size_t conv_pad() const { return (klen - 1) / 2; }
  std::size_t pool_pad() const { return stride; }
  std::size_t frames_for(std::size_t length) const { return (length + stride - 1) / stride; }
};

namespace detail {

template <typename T>
using CVec = dsp::ComplexVec<T>;

// Plain complex products; std::complex operator* adds NaN recovery paths
// that dominate these loops.
template <typename T>
inline std::complex<T> cmul(std::complex<T> a, std::complex<T> b) {
  return {a.real() * b.real() - a.imag() * b.imag(), a.real() * b.imag() + a.imag() * b.real()};
}
template <typename T>
inline std::complex<T> cmul_conj(std::complex<T> a, std::complex<T> b) {  // conj(a) * b
  return {a.real() * b.real() + a.imag() * b.imag(), a.real() * b.imag() - a.imag() * b.real()};
}

struct KernelSet {
  std::vector<double> re, im;  // [C * klen]
  std::vector<double> pool;    // [C * klen]
  std::vector<bool> pool_degenerate;
};

inline KernelSet synthesize(std::span<const double> centers, std::span<const double> sigmas,
                            std::span<const double> pool_sigmas, const GaborPoolConfig& cfg) {
  const std::size_t C = centers.size(), K = cfg.klen;
  KernelSet ks;
  ks.re.resize(C * K);
  ks.im.resize(C * K);
  ks.pool.resize(C * K);
  ks.pool_degenerate.resize(C);
  auto g = dsp::gabor_kernels(centers, sigmas, K, cfg.sample_rate);
  for (std::size_t c = 0; c < C; ++c) {
    std::copy(g[c].cos.begin(), g[c].cos.end(), ks.re.begin() + c * K);
    std::copy(g[c].sin.begin(), g[c].sin.end(), ks.im.begin() + c * K);
    auto p = dsp::gaussian_lowpass_kernel(pool_sigmas[c], K);
    std::copy(p.begin(), p.end(), ks.pool.begin() + c * K);
    // Detect the one-tap fallback, whose width gradient is zero.
    const double sd = pool_sigmas[c] * static_cast<double>(K) / 2.0;
    ks.pool_degenerate[c] = !(std::exp(-0.25 / (2.0 * sd * sd)) > 0);
  }
  return ks;
}

// Spectrum of channel c's complex kernel, reindexed to Kt[f] = K[(N - f) % N]
// so that a correlation becomes a plain product with X.
template <typename T>
CVec<T> kernel_spectrum_flipped(const KernelSet& ks, std::size_t c, std::size_t K, std::size_t N) {
  CVec<T> buf(N, std::complex<T>(0)), spec(N);
  for (std::size_t i = 0; i < K; ++i) buf[i] = {static_cast<T>(ks.re[c * K + i]), static_cast<T>(ks.im[c * K + i])};
  dsp::fft<T>(buf, spec);
  CVec<T> out(N);
  out[0] = spec[0];
  for (std::size_t f = 1; f < N; ++f) out[f] = spec[N - f];
  return out;
}

// Block layout shared by forward and backward.
struct BlockPlan {
  std::size_t M = 0, V = 0, Q = 0;

  BlockPlan(std::size_t L, std::size_t K, std::size_t block) {
    M = std::max(dsp::next_pow2(2 * K), std::min(block, dsp::next_pow2(L + K)));
    V = M - K + 1;
    Q = (L + V - 1) / V;
  }
};

// Outputs of block q from the product spectrum P: y[qV + u] for u < V.
template <typename T>
void block_outputs(CVec<T>& P, CVec<T>& tmp, const BlockPlan& bp, std::size_t q, std::size_t L, std::vector<T>& e,
                   std::vector<T>* re, std::vector<T>* im) {
  dsp::ifft_unnormalized<T>(P, tmp);
  const T inv = T(1) / static_cast<T>(bp.M);
  const std::size_t n0 = q * bp.V, n1 = std::min(L, n0 + bp.V);
  for (std::size_t n = n0; n < n1; ++n) {
    const std::complex<T> y = tmp[n - n0] * inv;
    e[n] = y.real() * y.real() + y.imag() * y.imag();
    if (re) (*re)[n] = y.real();
    if (im) (*im)[n] = y.imag();
  }
}

}  // namespace detail

/// x [B, L] -> pooled energies [B, C, ceil(L / stride)].
///
/// centers_hz, kernel_sigmas (samples) and pool_sigmas (fraction of klen/2)
/// are [C]; any of them, and x, may require grad.
template <typename T>
Tensor<T> gabor_pooled_energy(const Tensor<T>& x, const Tensor<T>& centers_hz, const Tensor<T>& kernel_sigmas,
                              const Tensor<T>& pool_sigmas, const GaborPoolConfig& cfg = {}) {
  if (x.dim() != 2) throw ShapeError("gabor_pooled_energy: expected waveforms [B, L], got " + shape_str(x.shape()));
  const std::size_t C = centers_hz.numel();
  if (kernel_sigmas.numel() != C || pool_sigmas.numel() != C) {
    throw ShapeError("gabor_pooled_energy: per-channel parameter lengths differ");
  }
  const std::size_t B = x.size(0), L = x.size(1), K = cfg.klen, S = cfg.stride;
  if (L == 0 || K == 0 || S == 0) throw ShapeError("gabor_pooled_energy: empty input, kernel or stride");
  const std::size_t F = cfg.frames_for(L), pl = cfg.conv_pad(), pp = cfg.pool_pad();
  const detail::BlockPlan bp(L, K, cfg.fft_block);
  const std::size_t M = bp.M, V = bp.V, Q = bp.Q;

  auto to_d = [](const Tensor<T>& t) { return std::vector<double>(t.values().begin(), t.values().end()); };
  const auto cen = to_d(centers_hz), sig = to_d(kernel_sigmas), psig = to_d(pool_sigmas);
  const detail::KernelSet ks = detail::synthesize(cen, sig, psig, cfg);

  // Input block spectra [B * Q], kept for the backward pass.
  auto X = std::make_shared<std::vector<detail::CVec<T>>>(B * Q);
  {
    detail::CVec<T> buf(M);
    for (std::size_t b = 0; b < B; ++b)
      for (std::size_t q = 0; q < Q; ++q) {
        for (std::size_t j = 0; j < M; ++j) {
          const long p = static_cast<long>(q * V + j) - static_cast<long>(pl);
          buf[j] = (p >= 0 && p < static_cast<long>(L)) ? x.values()[b * L + static_cast<std::size_t>(p)] : T(0);
        }
        (*X)[b * Q + q].resize(M);
        dsp::fft<T>(buf, (*X)[b * Q + q]);
      }
  }

  // Pooling over frames: out[f] = sum_j w[j] e[f*S - pp + j].
  auto pool = [=](const std::vector<T>& e, const double* w, T* out) {
    for (std::size_t f = 0; f < F; ++f) {
      const long base = static_cast<long>(f * S) - static_cast<long>(pp);
      const std::size_t j0 = base < 0 ? static_cast<std::size_t>(-base) : 0;
      const std::size_t j1 = std::min<long>(static_cast<long>(K), static_cast<long>(L) - base);
      const T* src = e.data() + base;
      double a0 = 0, a1 = 0, a2 = 0, a3 = 0;  // independent chains
      std::size_t j = j0;
      for (; j + 4 <= j1; j += 4) {
        a0 += w[j] * src[j];
        a1 += w[j + 1] * src[j + 1];
        a2 += w[j + 2] * src[j + 2];
        a3 += w[j + 3] * src[j + 3];
      }
      for (; j < j1; ++j) a0 += w[j] * src[j];
      out[f] = static_cast<T>((a0 + a1) + (a2 + a3));
    }
  };

  std::vector<T> out(B * C * F);
  {
    detail::CVec<T> P(M), tmp(M);
    std::vector<T> e(L);
    for (std::size_t c = 0; c < C; ++c) {
      const auto Kt = detail::kernel_spectrum_flipped<T>(ks, c, K, M);
      for (std::size_t b = 0; b < B; ++b) {
        for (std::size_t q = 0; q < Q; ++q) {
          const auto& Xq = (*X)[b * Q + q];
          for (std::size_t f = 0; f < M; ++f) P[f] = detail::cmul(Kt[f], Xq[f]);
          detail::block_outputs<T>(P, tmp, bp, q, L, e, nullptr, nullptr);
        }
        pool(e, &ks.pool[c * K], &out[(b * C + c) * F]);
      }
    }
  }

  return Tensor<T>::make_result(
      {B, C, F}, std::move(out), {x, centers_hz, kernel_sigmas, pool_sigmas},
      [=](leafkit::detail::Node<T>& self) {
        const bool need_x = x.requires_grad();
        const bool need_k = centers_hz.requires_grad() || kernel_sigmas.requires_grad();
        const bool need_p = pool_sigmas.requires_grad();
        const auto& G = self.grad;

        std::vector<double> d_pool_w(C * K, 0.0);
        std::vector<detail::CVec<T>> dX(need_x ? B * Q : 0);
        for (auto& v : dX) v.assign(M, std::complex<T>(0));
        std::vector<std::complex<double>> dk(need_k ? C * K : 0);

        detail::CVec<T> P(M), tmp(M), Zf(M), Dacc(M);
        std::vector<T> e(L), re(L), im(L);
        std::vector<double> de(L);
        for (std::size_t c = 0; c < C; ++c) {
          const auto Kt = detail::kernel_spectrum_flipped<T>(ks, c, K, M);
          const double* w = &ks.pool[c * K];
          if (need_k) std::fill(Dacc.begin(), Dacc.end(), std::complex<T>(0));
          for (std::size_t b = 0; b < B; ++b) {
            const T* g = &G[(b * C + c) * F];
            for (std::size_t q = 0; q < Q; ++q) {
              const auto& Xq = (*X)[b * Q + q];
              for (std::size_t f = 0; f < M; ++f) P[f] = detail::cmul(Kt[f], Xq[f]);
              detail::block_outputs<T>(P, tmp, bp, q, L, e, &re, &im);
            }

            // Transpose of pooling.
            std::fill(de.begin(), de.end(), 0.0);
            for (std::size_t f = 0; f < F; ++f) {
              const long base = static_cast<long>(f * S) - static_cast<long>(pp);
              const std::size_t j0 = base < 0 ? static_cast<std::size_t>(-base) : 0;
              const std::size_t j1 = std::min<long>(static_cast<long>(K), static_cast<long>(L) - base);
              const double gf = g[f];
              if (gf == 0.0) continue;
              for (std::size_t j = j0; j < j1; ++j) {
                const std::size_t n = static_cast<std::size_t>(base + static_cast<long>(j));
                de[n] += gf * w[j];
                if (need_p) d_pool_w[c * K + j] += gf * e[n];
              }
            }
            if (!need_k && !need_x) continue;

            for (std::size_t q = 0; q < Q; ++q) {
              // Adjoint of the block's correlation outputs, zero past V.
              std::fill(tmp.begin(), tmp.end(), std::complex<T>(0));
              const std::size_t n0 = q * V, n1 = std::min(L, n0 + V);
              for (std::size_t n = n0; n < n1; ++n) {
                tmp[n - n0] = {static_cast<T>(2.0 * re[n] * de[n]), static_cast<T>(2.0 * im[n] * de[n])};
              }
              dsp::fft<T>(tmp, Zf);
              const auto& Xq = (*X)[b * Q + q];
              if (need_k) {
                // D(i) = sum_u g(u) xb[u + i]  <=>  D^(f) = G^[(M - f) % M] X[f].
                Dacc[0] += detail::cmul(Zf[0], Xq[0]);
                for (std::size_t f = 1; f < M; ++f) Dacc[f] += detail::cmul(Zf[M - f], Xq[f]);
              }
              if (need_x) {
                // dxb = Re(conj(k) * g), a linear convolution of length M.
                auto& d = dX[b * Q + q];
                for (std::size_t f = 0; f < M; ++f) d[f] += detail::cmul_conj(Kt[f], Zf[f]);
              }
            }
          }
          if (need_k) {
            dsp::ifft_unnormalized<T>(Dacc, tmp);
            const double inv = 1.0 / static_cast<double>(M);
            for (std::size_t i = 0; i < K; ++i) {
              dk[c * K + i] = {static_cast<double>(tmp[i].real()) * inv, static_cast<double>(tmp[i].imag()) * inv};
            }
          }
        }

        if (need_x) {
          std::vector<T> gx(B * L, T(0));
          const T inv = T(1) / static_cast<T>(M);
          for (std::size_t b = 0; b < B; ++b)
            for (std::size_t q = 0; q < Q; ++q) {
              dsp::ifft_unnormalized<T>(dX[b * Q + q], tmp);
              for (std::size_t j = 0; j < M; ++j) {
                const long p = static_cast<long>(q * V + j) - static_cast<long>(pl);
                if (p >= 0 && p < static_cast<long>(L)) gx[b * L + static_cast<std::size_t>(p)] += tmp[j].real() * inv;
              }
            }
          accumulate<T>(*x.node(), gx);
        }
        if (need_k) {
          std::vector<T> gc(C, T(0)), gs(C, T(0));
          for (std::size_t c = 0; c < C; ++c) {
            const double sigma = sig[c];
            const double A = 1.0 / (std::sqrt(2.0 * std::numbers::pi) * sigma);
            const double omega = 2.0 * std::numbers::pi * cen[c] / cfg.sample_rate;
            double acc_f = 0, acc_s = 0;
            for (std::size_t i = 0; i < K; ++i) {
              const double t = dsp::kernel_time(i, K);
              const double env = A * std::exp(-t * t / (2.0 * sigma * sigma));
              const double co = std::cos(omega * t), si = std::sin(omega * t);
              const double dw = 2.0 * std::numbers::pi * t / cfg.sample_rate;
              const double denv = env * (-1.0 / sigma + t * t / (sigma * sigma * sigma));
              const auto d = dk[c * K + i];
              acc_f += d.real() * (-env * si * dw) + d.imag() * (env * co * dw);
              acc_s += d.real() * (denv * co) + d.imag() * (denv * si);
            }
            gc[c] = static_cast<T>(acc_f);
            gs[c] = static_cast<T>(acc_s);
          }
          accumulate<T>(*centers_hz.node(), gc);
          accumulate<T>(*kernel_sigmas.node(), gs);
        }

        if (need_p) {
          std::vector<T> gp(C, T(0));
          for (std::size_t c = 0; c < C; ++c) {
            if (ks.pool_degenerate[c]) continue;
            const double s = psig[c] * static_cast<double>(K) / 2.0;
            double total = 0, sum_dg = 0, sum_dw_g = 0, sum_dw_w = 0;
            for (std::size_t j = 0; j < K; ++j) {
              const double t = dsp::kernel_time(j, K);
              const double gj = std::exp(-t * t / (2.0 * s * s));
              const double dgj = gj * t * t / (s * s * s);
              total += gj;
              sum_dg += dgj;
              sum_dw_g += d_pool_w[c * K + j] * dgj;
              sum_dw_w += d_pool_w[c * K + j] * ks.pool[c * K + j];
            }
            const double dL_ds = (sum_dw_g - sum_dw_w * sum_dg) / total;
            gp[c] = static_cast<T>(dL_ds * static_cast<double>(K) / 2.0);
          }
          accumulate<T>(*pool_sigmas.node(), gp);
        }
      });
}

}  // namespace leafkit::frontend
