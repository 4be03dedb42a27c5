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

// Elementwise arithmetic with NumPy-style broadcasting, unary maps,
// reductions, reshape and 2-D matmul.

#pragma once

#include <cmath>
#include <type_traits>

#include "leafkit/tensor/tensor.hpp"

namespace leafkit {

namespace detail {

inline Shape broadcast_shape(const Shape& a, const Shape& b) {
  const std::size_t n = std::max(a.size(), b.size());
  Shape out(n);
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t da = i < n - a.size() ? 1 : a[i - (n - a.size())];
    const std::size_t db = i < n - b.size() ? 1 : b[i - (n - b.size())];
    if (da != db && da != 1 && db != 1) {
      throw ShapeError("broadcast: incompatible shapes " + shape_str(a) + " and " + shape_str(b));
    }
    out[i] = std::max(da, db);
  }
  return out;
}

/// For each output flat index, the flat index into an operand of shape `in`
/// broadcast to `out`.
inline std::vector<std::size_t> broadcast_index(const Shape& in, const Shape& out) {
  const std::size_t n = out.size();
  std::vector<std::size_t> stride(n, 0);
  std::size_t s = 1;
  for (std::size_t k = in.size(); k-- > 0;) {
    const std::size_t axis = k + (n - in.size());
    stride[axis] = in[k] == 1 ? 0 : s;
    s *= in[k];
  }
  const std::size_t total = shape_numel(out);
  std::vector<std::size_t> idx(total);
  std::vector<std::size_t> counter(n, 0);
  std::size_t flat = 0;
  for (std::size_t i = 0; i < total; ++i) {
    idx[i] = flat;
    for (std::size_t axis = n; axis-- > 0;) {
      ++counter[axis];
      flat += stride[axis];
      if (counter[axis] < out[axis]) break;
      flat -= stride[axis] * counter[axis];
      counter[axis] = 0;
    }
  }
  return idx;
}

template <typename T, typename F, typename DA, typename DB>
Tensor<T> binary_op(const Tensor<T>& a, const Tensor<T>& b, F f, DA dfa, DB dfb) {
  if (a.shape() == b.shape()) {
    const std::size_t n = a.numel();
    std::vector<T> out(n);
    for (std::size_t i = 0; i < n; ++i) out[i] = f(a[i], b[i]);
    return Tensor<T>::make_result(a.shape(), std::move(out), {a, b},
                                  [a, b, dfa, dfb](Node<T>& self) {
                                    const std::size_t m = self.values.size();
                                    if (a.requires_grad()) {
                                      std::vector<T> ga(m);
                                      for (std::size_t i = 0; i < m; ++i) ga[i] = self.grad[i] * dfa(a[i], b[i]);
                                      accumulate<T>(*a.node(), ga);
                                    }
                                    if (b.requires_grad()) {
                                      std::vector<T> gb(m);
                                      for (std::size_t i = 0; i < m; ++i) gb[i] = self.grad[i] * dfb(a[i], b[i]);
                                      accumulate<T>(*b.node(), gb);
                                    }
                                  });
  }
  Shape out_shape = broadcast_shape(a.shape(), b.shape());
  auto ia = broadcast_index(a.shape(), out_shape);
  auto ib = broadcast_index(b.shape(), out_shape);
  const std::size_t n = ia.size();
  std::vector<T> out(n);
  for (std::size_t i = 0; i < n; ++i) out[i] = f(a[ia[i]], b[ib[i]]);
  return Tensor<T>::make_result(
      std::move(out_shape), std::move(out), {a, b},
      [a, b, ia = std::move(ia), ib = std::move(ib), dfa, dfb](Node<T>& self) {
        if (a.requires_grad()) {
          std::vector<T> ga(a.numel(), T(0));
          for (std::size_t i = 0; i < ia.size(); ++i) ga[ia[i]] += self.grad[i] * dfa(a[ia[i]], b[ib[i]]);
          accumulate<T>(*a.node(), ga);
        }
        if (b.requires_grad()) {
          std::vector<T> gb(b.numel(), T(0));
          for (std::size_t i = 0; i < ib.size(); ++i) gb[ib[i]] += self.grad[i] * dfb(a[ia[i]], b[ib[i]]);
          accumulate<T>(*b.node(), gb);
        }
      });
}

template <typename T, typename F, typename D>
Tensor<T> unary_op(const Tensor<T>& x, F f, D df) {
  const std::size_t n = x.numel();
  std::vector<T> out(n);
  for (std::size_t i = 0; i < n; ++i) out[i] = f(x[i]);
  return Tensor<T>::make_result(x.shape(), std::move(out), {x}, [x, df](Node<T>& self) {
    std::vector<T> g(self.values.size());
    for (std::size_t i = 0; i < g.size(); ++i) g[i] = self.grad[i] * df(x[i], self.values[i]);
    accumulate<T>(*x.node(), g);
  });
}

/// Domain errors are raised in 64-bit (checking) mode; in 32-bit training
/// they surface as non-finite values caught downstream.
template <typename T>
constexpr bool checking_mode = std::is_same_v<T, double>;

}  // namespace detail

template <typename T>
Tensor<T> add(const Tensor<T>& a, const Tensor<T>& b) {
  return detail::binary_op(a, b, [](T x, T y) { return x + y; }, [](T, T) { return T(1); },
                           [](T, T) { return T(1); });
}

template <typename T>
Tensor<T> sub(const Tensor<T>& a, const Tensor<T>& b) {
  return detail::binary_op(a, b, [](T x, T y) { return x - y; }, [](T, T) { return T(1); },
                           [](T, T) { return T(-1); });
}

template <typename T>
Tensor<T> mul(const Tensor<T>& a, const Tensor<T>& b) {
  return detail::binary_op(a, b, [](T x, T y) { return x * y; }, [](T, T y) { return y; },
                           [](T x, T) { return x; });
}

template <typename T>
Tensor<T> div(const Tensor<T>& a, const Tensor<T>& b) {
  return detail::binary_op(a, b, [](T x, T y) { return x / y; }, [](T, T y) { return T(1) / y; },
                           [](T x, T y) { return -x / (y * y); });
}

template <typename T>
Tensor<T> operator+(const Tensor<T>& a, const Tensor<T>& b) { return add(a, b); }
template <typename T>
Tensor<T> operator-(const Tensor<T>& a, const Tensor<T>& b) { return sub(a, b); }
template <typename T>
Tensor<T> operator*(const Tensor<T>& a, const Tensor<T>& b) { return mul(a, b); }
template <typename T>
Tensor<T> operator/(const Tensor<T>& a, const Tensor<T>& b) { return div(a, b); }

template <typename T>
Tensor<T> add_scalar(const Tensor<T>& x, T c) {
  return detail::unary_op(x, [c](T v) { return v + c; }, [](T, T) { return T(1); });
}

template <typename T>
Tensor<T> mul_scalar(const Tensor<T>& x, T c) {
  return detail::unary_op(x, [c](T v) { return v * c; }, [c](T, T) { return c; });
}

template <typename T>
Tensor<T> neg(const Tensor<T>& x) { return mul_scalar(x, T(-1)); }

template <typename T>
Tensor<T> pow(const Tensor<T>& x, T p) {
  if constexpr (detail::checking_mode<T>) {
    if (p != std::floor(p)) {
      for (T v : x.values()) {
        if (v < 0) throw NumericError("pow: negative base with non-integer exponent");
      }
    }
  }
  return detail::unary_op(x, [p](T v) { return std::pow(v, p); },
                          [p](T v, T) { return p * std::pow(v, p - T(1)); });
}

template <typename T>
Tensor<T> square(const Tensor<T>& x) {
  return detail::unary_op(x, [](T v) { return v * v; }, [](T v, T) { return T(2) * v; });
}

template <typename T>
Tensor<T> log(const Tensor<T>& x) {
  if constexpr (detail::checking_mode<T>) {
    for (T v : x.values()) {
      if (!(v > 0)) throw NumericError("log: argument must be positive");
    }
  }
  return detail::unary_op(x, [](T v) { return std::log(v); }, [](T v, T) { return T(1) / v; });
}

template <typename T>
Tensor<T> exp(const Tensor<T>& x) {
  return detail::unary_op(x, [](T v) { return std::exp(v); }, [](T, T y) { return y; });
}

template <typename T>
Tensor<T> sqrt(const Tensor<T>& x) {
  if constexpr (detail::checking_mode<T>) {
    for (T v : x.values()) {
      if (v < 0) throw NumericError("sqrt: argument must be non-negative");
    }
  }
  return detail::unary_op(x, [](T v) { return std::sqrt(v); },
                          [](T, T y) { return T(0.5) / y; });
}

template <typename T>
Tensor<T> cos(const Tensor<T>& x) {
  return detail::unary_op(x, [](T v) { return std::cos(v); }, [](T v, T) { return -std::sin(v); });
}

template <typename T>
Tensor<T> sin(const Tensor<T>& x) {
  return detail::unary_op(x, [](T v) { return std::sin(v); }, [](T v, T) { return std::cos(v); });
}

template <typename T>
Tensor<T> sum(const Tensor<T>& x) {
  T s = 0;
  for (T v : x.values()) s += v;
  return Tensor<T>::make_result({}, {s}, {x}, [x](detail::Node<T>& self) {
    std::vector<T> g(x.numel(), self.grad[0]);
    accumulate<T>(*x.node(), g);
  });
}

template <typename T>
Tensor<T> mean(const Tensor<T>& x) {
  return mul_scalar(sum(x), T(1) / static_cast<T>(x.numel()));
}

/// Same values under a new shape with equal element count.
template <typename T>
Tensor<T> reshape(const Tensor<T>& x, Shape shape) {
  if (shape_numel(shape) != x.numel()) {
    throw ShapeError("reshape: cannot view " + shape_str(x.shape()) + " as " + shape_str(shape));
  }
  return Tensor<T>::make_result(std::move(shape), x.vec(), {x}, [x](detail::Node<T>& self) {
    accumulate<T>(*x.node(), std::span<const T>(self.grad));
  });
}

/// [m,k] x [k,n] -> [m,n].
template <typename T>
Tensor<T> matmul(const Tensor<T>& a, const Tensor<T>& b) {
  if (a.dim() != 2 || b.dim() != 2 || a.size(1) != b.size(0)) {
    throw ShapeError("matmul: cannot multiply " + shape_str(a.shape()) + " by " + shape_str(b.shape()));
  }
  const std::size_t m = a.size(0), k = a.size(1), n = b.size(1);
  std::vector<T> out(m * n, T(0));
  const auto A = a.values();
  const auto B = b.values();
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t p = 0; p < k; ++p) {
      const T av = A[i * k + p];
      for (std::size_t j = 0; j < n; ++j) out[i * n + j] += av * B[p * n + j];
    }
  }
  return Tensor<T>::make_result({m, n}, std::move(out), {a, b}, [a, b, m, k, n](detail::Node<T>& self) {
    const auto& G = self.grad;
    const auto A = a.values();
    const auto B = b.values();
    if (a.requires_grad()) {
      std::vector<T> ga(m * k, T(0));
      for (std::size_t i = 0; i < m; ++i)
        for (std::size_t p = 0; p < k; ++p) {
          T s = 0;
          for (std::size_t j = 0; j < n; ++j) s += G[i * n + j] * B[p * n + j];
          ga[i * k + p] = s;
        }
      accumulate<T>(*a.node(), ga);
    }
    if (b.requires_grad()) {
      std::vector<T> gb(k * n, T(0));
      for (std::size_t i = 0; i < m; ++i)
        for (std::size_t p = 0; p < k; ++p) {
          const T av = A[i * k + p];
          for (std::size_t j = 0; j < n; ++j) gb[p * n + j] += av * G[i * n + j];
        }
      accumulate<T>(*b.node(), gb);
    }
  });
}

/// x[batch,in] . w[out,in]^T + bias[out].
template <typename T>
Tensor<T> linear(const Tensor<T>& x, const Tensor<T>& weight, const Tensor<T>& bias) {
  if (x.dim() != 2 || weight.dim() != 2 || x.size(1) != weight.size(1) || bias.numel() != weight.size(0)) {
    throw ShapeError("linear: input " + shape_str(x.shape()) + ", weight " + shape_str(weight.shape()) +
                     ", bias " + shape_str(bias.shape()));
  }
  const std::size_t batch = x.size(0), in = x.size(1), out_f = weight.size(0);
  std::vector<T> out(batch * out_f);
  const auto X = x.values();
  const auto W = weight.values();
  const auto Bv = bias.values();
  for (std::size_t b = 0; b < batch; ++b)
    for (std::size_t o = 0; o < out_f; ++o) {
      T s = Bv[o];
      for (std::size_t i = 0; i < in; ++i) s += X[b * in + i] * W[o * in + i];
      out[b * out_f + o] = s;
    }
  return Tensor<T>::make_result(
      {batch, out_f}, std::move(out), {x, weight, bias},
      [x, weight, bias, batch, in, out_f](detail::Node<T>& self) {
        const auto& G = self.grad;
        const auto X = x.values();
        const auto W = weight.values();
        if (x.requires_grad()) {
          std::vector<T> gx(batch * in, T(0));
          for (std::size_t b = 0; b < batch; ++b)
            for (std::size_t o = 0; o < out_f; ++o) {
              const T g = G[b * out_f + o];
              for (std::size_t i = 0; i < in; ++i) gx[b * in + i] += g * W[o * in + i];
            }
          accumulate<T>(*x.node(), gx);
        }
        if (weight.requires_grad()) {
          std::vector<T> gw(out_f * in, T(0));
          for (std::size_t b = 0; b < batch; ++b)
            for (std::size_t o = 0; o < out_f; ++o) {
              const T g = G[b * out_f + o];
              for (std::size_t i = 0; i < in; ++i) gw[o * in + i] += g * X[b * in + i];
            }
          accumulate<T>(*weight.node(), gw);
        }
        if (bias.requires_grad()) {
          std::vector<T> gb(out_f, T(0));
          for (std::size_t b = 0; b < batch; ++b)
            for (std::size_t o = 0; o < out_f; ++o) gb[o] += G[b * out_f + o];
          accumulate<T>(*bias.node(), gb);
        }
      });
}

}  // namespace leafkit
