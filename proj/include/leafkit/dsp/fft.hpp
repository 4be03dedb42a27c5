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

// Thin FFTW wrapper. Plans are created with FFTW_ESTIMATE, which makes the
// chosen algorithm (and so the rounding) independent of timing, and cached
// per (size, direction). Execution uses the new-array interface; buffers are
// allocated through FftwAllocator so they match the plans' alignment.

#pragma once

#include <fftw3.h>

#include <complex>
#include <map>
#include <new>
#include <mutex>
#include <span>
#include <vector>

namespace leafkit::dsp {

/// std::allocator replacement returning fftw_malloc memory, so every buffer
/// has the SIMD alignment the cached plans were created with.
template <typename U>
struct FftwAllocator {
  using value_type = U;
  FftwAllocator() = default;
  template <typename V>
  FftwAllocator(const FftwAllocator<V>&) {}
  U* allocate(std::size_t n) {
    void* p = fftw_malloc(n * sizeof(U));
    if (!p) throw std::bad_alloc();
    return static_cast<U*>(p);
  }
  void deallocate(U* p, std::size_t) { fftw_free(p); }
  template <typename V>
  bool operator==(const FftwAllocator<V>&) const { return true; }
};

template <typename T>
using ComplexVec = std::vector<std::complex<T>, FftwAllocator<std::complex<T>>>;

template <typename T>
using RealVec = std::vector<T, FftwAllocator<T>>;

namespace detail {

template <typename T>
struct FftwApi;

template <>
struct FftwApi<double> {
  using plan = fftw_plan;
  using cplx = fftw_complex;
  static plan c2c(int n, int sign) {
    auto* a = fftw_alloc_complex(n);
    auto* b = fftw_alloc_complex(n);
    plan p = fftw_plan_dft_1d(n, a, b, sign, FFTW_ESTIMATE);
    fftw_free(a);
    fftw_free(b);
    return p;
  }
  static plan r2c(int n) {
    auto* a = fftw_alloc_real(n);
    auto* b = fftw_alloc_complex(n / 2 + 1);
    plan p = fftw_plan_dft_r2c_1d(n, a, b, FFTW_ESTIMATE);
    fftw_free(a);
    fftw_free(b);
    return p;
  }
  static plan c2r(int n) {
    auto* a = fftw_alloc_complex(n / 2 + 1);
    auto* b = fftw_alloc_real(n);
    plan p = fftw_plan_dft_c2r_1d(n, a, b, FFTW_ESTIMATE);
    fftw_free(a);
    fftw_free(b);
    return p;
  }
  static void exec_c2c(plan p, const std::complex<double>* in, std::complex<double>* out) {
    fftw_execute_dft(p, reinterpret_cast<cplx*>(const_cast<std::complex<double>*>(in)), reinterpret_cast<cplx*>(out));
  }
  static void exec_r2c(plan p, const double* in, std::complex<double>* out) {
    fftw_execute_dft_r2c(p, const_cast<double*>(in), reinterpret_cast<cplx*>(out));
  }
  static void exec_c2r(plan p, std::complex<double>* in, double* out) {
    fftw_execute_dft_c2r(p, reinterpret_cast<cplx*>(in), out);
  }
};

template <>
struct FftwApi<float> {
  using plan = fftwf_plan;
  using cplx = fftwf_complex;
  static plan c2c(int n, int sign) {
    auto* a = fftwf_alloc_complex(n);
    auto* b = fftwf_alloc_complex(n);
    plan p = fftwf_plan_dft_1d(n, a, b, sign, FFTW_ESTIMATE);
    fftwf_free(a);
    fftwf_free(b);
    return p;
  }
  static plan r2c(int n) {
    auto* a = fftwf_alloc_real(n);
    auto* b = fftwf_alloc_complex(n / 2 + 1);
    plan p = fftwf_plan_dft_r2c_1d(n, a, b, FFTW_ESTIMATE);
    fftwf_free(a);
    fftwf_free(b);
    return p;
  }
  static plan c2r(int n) {
    auto* a = fftwf_alloc_complex(n / 2 + 1);
    auto* b = fftwf_alloc_real(n);
    plan p = fftwf_plan_dft_c2r_1d(n, a, b, FFTW_ESTIMATE);
    fftwf_free(a);
    fftwf_free(b);
    return p;
  }
  static void exec_c2c(plan p, const std::complex<float>* in, std::complex<float>* out) {
    fftwf_execute_dft(p, reinterpret_cast<cplx*>(const_cast<std::complex<float>*>(in)), reinterpret_cast<cplx*>(out));
  }
  static void exec_r2c(plan p, const float* in, std::complex<float>* out) {
    fftwf_execute_dft_r2c(p, const_cast<float*>(in), reinterpret_cast<cplx*>(out));
  }
  static void exec_c2r(plan p, std::complex<float>* in, float* out) {
    fftwf_execute_dft_c2r(p, reinterpret_cast<cplx*>(in), out);
  }
};

enum class PlanKind { kForward, kInverse, kR2C, kC2R };

template <typename T>
typename FftwApi<T>::plan cached_plan(std::size_t n, PlanKind kind) {
  static std::mutex mu;
  static std::map<std::pair<std::size_t, PlanKind>, typename FftwApi<T>::plan> cache;
  std::lock_guard<std::mutex> lock(mu);
  auto key = std::make_pair(n, kind);
  auto it = cache.find(key);
  if (it != cache.end()) return it->second;
  const int ni = static_cast<int>(n);
  typename FftwApi<T>::plan p{};
  switch (kind) {
    case PlanKind::kForward: p = FftwApi<T>::c2c(ni, FFTW_FORWARD); break;
    case PlanKind::kInverse: p = FftwApi<T>::c2c(ni, FFTW_BACKWARD); break;
    case PlanKind::kR2C: p = FftwApi<T>::r2c(ni); break;
    case PlanKind::kC2R: p = FftwApi<T>::c2r(ni); break;
  }
  cache.emplace(key, p);
  return p;
}

}  // namespace detail

/// Unnormalized forward DFT, X[k] = sum_n x[n] exp(-2 pi i k n / N).
/// Buffers must come from ComplexVec (FFTW alignment).
template <typename T>
void fft(std::span<const std::complex<T>> in, std::span<std::complex<T>> out) {
  detail::FftwApi<T>::exec_c2c(detail::cached_plan<T>(in.size(), detail::PlanKind::kForward), in.data(), out.data());
}

/// Unnormalized inverse DFT (no 1/N factor).
template <typename T>
void ifft_unnormalized(std::span<const std::complex<T>> in, std::span<std::complex<T>> out) {
  detail::FftwApi<T>::exec_c2c(detail::cached_plan<T>(in.size(), detail::PlanKind::kInverse), in.data(), out.data());
}

/// Real forward DFT of length n = in.size(); returns n/2+1 bins.
template <typename T>
ComplexVec<T> rfft(std::span<const T> in) {
  ComplexVec<T> out(in.size() / 2 + 1);
  RealVec<T> tmp(in.begin(), in.end());
  detail::FftwApi<T>::exec_r2c(detail::cached_plan<T>(in.size(), detail::PlanKind::kR2C), tmp.data(), out.data());
  return out;
}

/// Inverse of rfft for a length-n signal, normalized by 1/n.
template <typename T>
std::vector<T> irfft(std::span<const std::complex<T>> bins, std::size_t n) {
  ComplexVec<T> tmp(bins.begin(), bins.end());  // c2r destroys its input
  RealVec<T> raw(n);
  detail::FftwApi<T>::exec_c2r(detail::cached_plan<T>(n, detail::PlanKind::kC2R), tmp.data(), raw.data());
  const T inv = T(1) / static_cast<T>(n);
  std::vector<T> out(n);
  for (std::size_t i = 0; i < n; ++i) out[i] = raw[i] * inv;
  return out;
}

inline std::size_t next_pow2(std::size_t n) {
  std::size_t p = 1;
  while (p < n) p <<= 1;
  return p;
}

}  // namespace leafkit::dsp
