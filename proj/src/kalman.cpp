// Copyright 2026 The DLTM Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <cmath>

#include "dltm/error.hpp"
#include "dltm/variational.hpp"

namespace dltm {

SmoothedChain KalmanSmoothChain(std::span<const double> obs, std::span<const double> obs_var,
                                double drift_var, double init_mean, double init_var) {
  Require(!obs.empty(), "chain must have at least one slot");
  Require(obs.size() == obs_var.size(), "observations and variances differ in length");
  Require(drift_var > 0.0 && std::isfinite(drift_var), "drift variance must be positive");
  Require(init_var > 0.0 && std::isfinite(init_var), "initial variance must be positive");
  Require(std::isfinite(init_mean), "initial mean must be finite");
  const std::size_t T = obs.size();

  // filtered (f) and one-step predicted (p) moments
  Vec fm(T), fv(T), pm(T), pv(T);
  for (std::size_t t = 0; t < T; ++t) {
    const double r = obs_var[t];
    Require(r > 0.0 && !std::isnan(r), "observation variance must be positive");
    pm[t] = t == 0 ? init_mean : fm[t - 1];
    pv[t] = t == 0 ? init_var : fv[t - 1] + drift_var;
    if (std::isinf(r)) {
      fm[t] = pm[t];
      fv[t] = pv[t];
      continue;
    }
    Require(std::isfinite(obs[t]), "observation must be finite");
    const double gain = pv[t] / (pv[t] + r);
    fm[t] = pm[t] + gain * (obs[t] - pm[t]);
    fv[t] = pv[t] * r / (pv[t] + r);
  }

  SmoothedChain out{Vec(T), Vec(T)};
  out.mean[T - 1] = fm[T - 1];
  out.var[T - 1] = fv[T - 1];
  for (std::size_t t = T - 1; t-- > 0;) {
    const double j = fv[t] / pv[t + 1];
    out.mean[t] = fm[t] + j * (out.mean[t + 1] - pm[t + 1]);
    out.var[t] = fv[t] + j * j * (out.var[t + 1] - pv[t + 1]);
  }
  return out;
}

}  // namespace dltm
