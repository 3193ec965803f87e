// Copyright 2026 The QEstLab Authors
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

#pragma once

#include "qestlab/parallel.hpp"
#include "qestlab/qcore.hpp"
#include "qestlab/rng.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>
#include <span>
#include <vector>

namespace qestlab {

struct BetaParams {
  double alpha = 1.0;
  double beta = 1.0;
};

struct GaussianParams {
  double mean = 0.0;
  double var = 1.0;
};

inline void check(const BetaParams& p) {
  if (!(p.alpha > 0.0) || !(p.beta > 0.0)) throw DomainError("BetaParams: alpha, beta must be > 0");
}

inline BetaParams beta_update(const BetaParams& prior, long long heads, long long trials) {
  check(prior);
  if (heads < 0 || trials < 0 || heads > trials) throw DomainError("beta_update: need 0 <= k <= n");
  return {prior.alpha + static_cast<double>(heads), prior.beta + static_cast<double>(trials - heads)};
}

/// Beta function B(a, b).
inline double beta_normalization(const BetaParams& p) {
  check(p);
  return std::beta(p.alpha, p.beta);
}

inline double beta_pdf(const BetaParams& p, double x) {
  check(p);
  if (x < 0.0 || x > 1.0) return 0.0;
  return std::pow(x, p.alpha - 1.0) * std::pow(1.0 - x, p.beta - 1.0) / std::beta(p.alpha, p.beta);
}

struct BetaEstimates {
  double ba = 0.0;
  double map = 0.0;
  bool map_at_boundary = false;  // set when alpha <= 1 or beta <= 1
};

inline BetaEstimates beta_point_estimates(const BetaParams& p) {
  check(p);
  BetaEstimates e;
  e.ba = p.alpha / (p.alpha + p.beta);
  if (p.alpha > 1.0 && p.beta > 1.0) {
    e.map = (p.alpha - 1.0) / (p.alpha + p.beta - 2.0);
  } else {
    e.map_at_boundary = true;
    e.map = p.alpha >= p.beta ? 1.0 : 0.0;
  }
  return e;
}

inline GaussianParams gaussian_update(const GaussianParams& prior, double likelihood_var, double x) {
  if (!(prior.var > 0.0) || !(likelihood_var > 0.0))
    throw DomainError("gaussian_update: variances must be > 0");
  const double s = prior.var + likelihood_var;
  return {(likelihood_var * prior.mean + prior.var * x) / s, prior.var * likelihood_var / s};
}

struct UniformSupportEstimates {
  double max = 0.0;
  double unbiased_max = 0.0;
  double midpoint = 0.0;
  double mse_optimal = 0.0;
};

/// Estimators of theta from samples of U(0, theta).
inline UniformSupportEstimates uniform_support_estimators(std::span<const double> x) {
  if (x.empty()) throw DomainError("uniform_support_estimators: empty sample");
  double mx = 0.0, sum = 0.0;
  for (double v : x) {
    if (v < 0.0) throw DomainError("uniform_support_estimators: negative sample");
    mx = std::max(mx, v);
    sum += v;
  }
  const double n = static_cast<double>(x.size());
  return {mx, (n + 1.0) / n * mx, 2.0 * sum / n, (n + 2.0) / (n + 1.0) * mx};
}

struct RiskEstimate {
  double mse = 0.0, bias = 0.0, var = 0.0;
  double mse_se = 0.0, bias_se = 0.0, var_se = 0.0;
  long long trials = 0;
};

/// Risk summary of a sample of estimates against the true value.
inline RiskEstimate summarize_errors(const std::vector<double>& est, double theta0) {
  const auto m = static_cast<double>(est.size());
  RiskEstimate r;
  r.trials = static_cast<long long>(est.size());
  double se = 0.0, se2 = 0.0;
  for (double e : est) {
    const double d = e - theta0;
    r.bias += d;
    r.mse += d * d;
  }
  r.bias /= m;
  r.mse /= m;
  for (double e : est) {
    const double d = e - theta0;
    se += (d - r.bias) * (d - r.bias);
    se2 += (d * d - r.mse) * (d * d - r.mse);
  }
  const double var_d = m > 1 ? se / (m - 1.0) : 0.0;
  r.var = var_d;
  r.bias_se = std::sqrt(var_d / m);
  r.mse_se = m > 1 ? std::sqrt(se2 / (m - 1.0) / m) : 0.0;
  // Standard error of a sample variance, from the fourth central moment.
  double m4 = 0.0;
  for (double e : est) m4 += std::pow(e - theta0 - r.bias, 4);
  m4 /= m;
  r.var_se = m > 1 ? std::sqrt(std::max(0.0, (m4 - var_d * var_d * (m - 3.0) / (m - 1.0)) / m)) : 0.0;
  return r;
}

using Sampler = std::function<std::vector<double>(Rng&, double theta0, long long n)>;
using Estimator = std::function<double(std::span<const double>)>;

/// Monte-Carlo risk of an estimator; trial t draws from Rng::stream(seed, t).
inline RiskEstimate estimator_risk_mc(const Sampler& sampler, const Estimator& estimator,
                                      double theta0, long long n, long long trials,
                                      std::uint64_t seed, int workers = 1) {
  if (trials < 1) throw DomainError("estimator_risk_mc: trials must be >= 1");
  auto est = parallel_map(static_cast<std::size_t>(trials), workers, [&](std::size_t t) {
    Rng rng = Rng::stream(seed, t);
    const std::vector<double> x = sampler(rng, theta0, n);
    return estimator(std::span<const double>(x));
  });
  return summarize_errors(est, theta0);
}

inline Sampler bernoulli_sampler() {
  return [](Rng& rng, double p, long long n) {
    std::vector<double> x(n);
    for (auto& v : x) v = rng.bernoulli(p);
    return x;
  };
}

inline Sampler uniform_sampler() {
  return [](Rng& rng, double theta, long long n) {
    std::vector<double> x(n);
    for (auto& v : x) v = rng.uniform(0.0, theta);
    return x;
  };
}

inline double sample_mean(std::span<const double> x) {
  return std::accumulate(x.begin(), x.end(), 0.0) / static_cast<double>(x.size());
}

}  // namespace qestlab
