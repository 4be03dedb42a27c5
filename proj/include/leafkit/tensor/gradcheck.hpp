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

// Central finite-difference check of analytic gradients (64-bit).

#pragma once

#include <functional>
#include <string>

#include "leafkit/core/rng.hpp"
#include "leafkit/tensor/tensor.hpp"

namespace leafkit {

struct GradCheckOptions {
  double step_scale = 1e-5;        // h = step_scale * (|x| + 1)
  double abs_floor = 1e-7;         // denominators below this are treated as this
  std::size_t max_coords = 0;      // per tensor; 0 checks every coordinate
  std::uint64_t seed = 0;          // picks coordinates when max_coords > 0
};

struct GradCheckReport {
  double max_rel_error = 0;
  std::size_t checked = 0;
  std::string worst_tensor;
  std::size_t worst_index = 0;
  double worst_analytic = 0;
  double worst_numeric = 0;

  bool passed(double tol) const { return checked > 0 && max_rel_error < tol; }
};

/// Compares d(loss)/d(inputs) from backward() against central differences.
///
/// `loss` must rebuild its graph from the current values of `inputs` on
/// every call and return a scalar. It must be pure: any randomness has to
/// be frozen inside the closure.
inline GradCheckReport gradient_check(const std::function<Tensor<double>()>& loss,
                                      std::vector<std::pair<std::string, Tensor<double>>> inputs,
                                      const GradCheckOptions& opt = {}) {
  for (auto& [name, t] : inputs) {
    t.set_requires_grad(true);
    t.zero_grad();
  }
  Tensor<double> out = loss();
  if (!std::isfinite(out.item())) throw NumericError("gradient_check: non-finite loss");
  out.backward();

  GradCheckReport rep;
  CounterRng rng(opt.seed, 0x6772616463686bULL);
  for (auto& [name, t] : inputs) {
    std::vector<double> analytic(t.numel(), 0.0);
    if (t.has_grad()) std::copy(t.grad().begin(), t.grad().end(), analytic.begin());

    std::vector<std::size_t> coords;
    if (opt.max_coords == 0 || opt.max_coords >= t.numel()) {
      coords.resize(t.numel());
      std::iota(coords.begin(), coords.end(), std::size_t{0});
    } else {
      for (std::size_t i = 0; i < opt.max_coords; ++i) coords.push_back(rng.uniform_index(t.numel()));
    }

    auto vals = t.mutable_values();
    for (std::size_t idx : coords) {
      const double x0 = vals[idx];
      const double h = opt.step_scale * (std::abs(x0) + 1.0);
      double fp, fm;
      {
        NoGradGuard ng;
        vals[idx] = x0 + h;
        fp = loss().item();
        vals[idx] = x0 - h;
        fm = loss().item();
        vals[idx] = x0;
      }
      if (!std::isfinite(fp) || !std::isfinite(fm)) throw NumericError("gradient_check: non-finite loss under perturbation");
      const double numeric = (fp - fm) / (2.0 * h);
      const double a = analytic[idx];
      const double denom = std::max({std::abs(a), std::abs(numeric), opt.abs_floor});
      const double rel = std::abs(a - numeric) / denom;
      ++rep.checked;
      if (rel > rep.max_rel_error || rep.checked == 1) {
        if (rel >= rep.max_rel_error) {
          rep.max_rel_error = rel;
          rep.worst_tensor = name;
          rep.worst_index = idx;
          rep.worst_analytic = a;
          rep.worst_numeric = numeric;
        }
      }
    }
  }
  return rep;
}

}  // namespace leafkit
