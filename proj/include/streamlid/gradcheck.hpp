// Copyright 2026 The streamlid Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <cmath>
#include <functional>
#include <string>
#include <vector>

#include "streamlid/common.hpp"
#include "streamlid/tensor.hpp"

namespace streamlid {

template <typename S>
struct GradCheckReport {
  S max_rel_err = S(0);
  std::string worst_param;
  size_t worst_index = 0;
  size_t checked = 0;
  bool pass = false;
};

// Central-difference verification of analytic gradients:
//   d = (f(x+eps) - f(x-eps)) / (2 eps)
// loss_fn must be pure and deterministic in the current parameter values;
// parameters are perturbed in place and restored. The relative error uses
// max(|analytic|, |numeric|, floor) as denominator so near-zero gradients
// do not dominate the report. Instantiate with S=double for a 64-bit shadow
// of the computation under test.
template <typename S>
GradCheckReport<S> grad_check(const std::function<S()>& loss_fn,
                              const std::vector<ParamRef<S>>& params,
                              const std::vector<const Tensor2<S>*>& analytic, S eps, S tolerance,
                              S denom_floor = S(0)) {
  if (params.size() != analytic.size())
    throw UsageError("grad_check: params/analytic size mismatch");
  if (denom_floor <= S(0))
    denom_floor = sizeof(S) >= 8 ? S(1e-8) : S(1e-2);

  GradCheckReport<S> report;
  for (size_t i = 0; i < params.size(); ++i) {
    Tensor2<S>& p = *params[i].value;
    const Tensor2<S>& a = *analytic[i];
    if (!p.same_shape(a)) throw ShapeError("grad_check: gradient shape mismatch for " + params[i].name);
    for (size_t k = 0; k < p.data.size(); ++k) {
      const S saved = p.data[k];
      p.data[k] = saved + eps;
      const S up = loss_fn();
      p.data[k] = saved - eps;
      const S down = loss_fn();
      p.data[k] = saved;
      if (!std::isfinite(static_cast<double>(up)) || !std::isfinite(static_cast<double>(down)))
        throw NumericError("grad_check: non-finite loss at " + params[i].name + "[" +
                           std::to_string(k) + "]");
      const S numeric = (up - down) / (S(2) * eps);
      const S denom = std::max({std::abs(a.data[k]), std::abs(numeric), denom_floor});
      const S rel = std::abs(a.data[k] - numeric) / denom;
      ++report.checked;
      if (rel > report.max_rel_err) {
        report.max_rel_err = rel;
        report.worst_param = params[i].name;
        report.worst_index = k;
      }
    }
  }
  report.pass = report.max_rel_err < tolerance;
  return report;
}

}  // namespace streamlid
