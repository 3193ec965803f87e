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

#include "qestlab/stats.hpp"

#include <gtest/gtest.h>

namespace qestlab {
namespace {

TEST(BetaUpdate, FlatPriorTwoOutcomes) {
  const BetaParams p = beta_update({1.0, 1.0}, 1, 2);
  EXPECT_EQ(p.alpha, 2.0);
  EXPECT_EQ(p.beta, 2.0);
  EXPECT_NEAR(beta_normalization(p), 1.0 / 6.0, 1e-15);
  EXPECT_NEAR(beta_pdf(p, 0.3), 6.0 * 0.3 * 0.7, 1e-14);
}

TEST(BetaUpdate, NoDataKeepsPrior) {
  const BetaParams p = beta_update({3.0, 2.0}, 0, 0);
  EXPECT_EQ(p.alpha, 3.0);
  EXPECT_EQ(p.beta, 2.0);
}

TEST(BetaUpdate, WorkedExample) {
  const BetaParams p = beta_update({3.0, 2.0}, 4, 15);
  EXPECT_EQ(p.alpha, 7.0);
  EXPECT_EQ(p.beta, 13.0);
  const auto e = beta_point_estimates(p);
  EXPECT_NEAR(e.ba, 0.35, 1e-15);
  EXPECT_NEAR(e.map, 1.0 / 3.0, 1e-15);
  EXPECT_FALSE(e.map_at_boundary);
}

TEST(BetaUpdate, RejectsMoreHeadsThanTrials) {
  EXPECT_THROW(beta_update({1.0, 1.0}, 3, 2), DomainError);
  EXPECT_THROW(beta_update({0.0, 1.0}, 0, 2), DomainError);
}

TEST(BetaUpdate, BatchingCommutes) {
  const BetaParams a = beta_update(beta_update({2.0, 5.0}, 3, 7), 4, 11);
  const BetaParams b = beta_update({2.0, 5.0}, 7, 18);
  EXPECT_EQ(a.alpha, b.alpha);
  EXPECT_EQ(a.beta, b.beta);
}

TEST(BetaEstimates, SymmetricAndBoundary) {
  const auto e = beta_point_estimates({2.0, 2.0});
  EXPECT_EQ(e.ba, 0.5);
  EXPECT_EQ(e.map, 0.5);
  const auto f = beta_point_estimates({2.0, 1.0});
  EXPECT_TRUE(f.map_at_boundary);
  EXPECT_EQ(f.map, 1.0);
}

TEST(BetaEstimates, BayesRiskOfPosteriorMean) {
  // theta ~ U(0,1), two Bernoulli draws, estimator (k + 1) / (n + 2).
  const long long trials = 400000;
  const int n = 2;
  double s = 0.0, s2 = 0.0;
  for (long long t = 0; t < trials; ++t) {
    Rng rng = Rng::stream(77, t);
    const double th = rng.uniform();
    int k = 0;
    for (int i = 0; i < n; ++i) k += rng.bernoulli(th);
    const double e = beta_point_estimates(beta_update({1.0, 1.0}, k, n)).ba - th;
    s += e * e;
    s2 += e * e * e * e;
  }
  const double mean = s / trials, se = std::sqrt((s2 / trials - mean * mean) / trials);
  EXPECT_NEAR(mean, 1.0 / (6.0 * (n + 2)), 3.0 * se);
}

TEST(GaussianUpdate, Limits) {
  const GaussianParams tight = gaussian_update({0.0, 1.0}, 1e-12, 2.5);
  EXPECT_NEAR(tight.mean, 2.5, 1e-10);
  const GaussianParams wide = gaussian_update({0.0, 1e12}, 0.3, 2.5);
  EXPECT_NEAR(wide.mean, 2.5, 1e-10);
  EXPECT_NEAR(wide.var, 0.3, 1e-10);
  EXPECT_THROW(gaussian_update({0.0, 0.0}, 1.0, 0.0), DomainError);
}

TEST(GaussianUpdate, PosteriorVarianceBelowBoth) {
  for (double vp : {0.1, 1.0, 10.0})
    for (double vl : {0.2, 3.0}) {
      const auto g = gaussian_update({0.3, vp}, vl, 1.0);
      EXPECT_LT(g.var, vp);
      EXPECT_LT(g.var, vl);
    }
}

TEST(GaussianUpdate, BayesRiskOfPosteriorMean) {
  const double vp = 2.0, vl = 0.5;
  const long long trials = 200000;
  double s = 0.0, s2 = 0.0;
  for (long long t = 0; t < trials; ++t) {
    Rng rng = Rng::stream(5, t);
    const double mu = 1.0 + std::sqrt(vp) * rng.normal();
    const double x = mu + std::sqrt(vl) * rng.normal();
    const double e = gaussian_update({1.0, vp}, vl, x).mean - mu;
    s += e * e;
    s2 += e * e * e * e;
  }
  const double mean = s / trials, se = std::sqrt((s2 / trials - mean * mean) / trials);
  EXPECT_NEAR(mean, vp * vl / (vp + vl), 3.0 * se);
}

TEST(UniformSupport, EstimatorFormulas) {
  const std::vector<double> x{0.2, 0.9, 0.4, 0.5};
  const auto e = uniform_support_estimators(x);
  EXPECT_EQ(e.max, 0.9);
  EXPECT_NEAR(e.unbiased_max, 5.0 / 4.0 * 0.9, 1e-15);
  EXPECT_NEAR(e.midpoint, 1.0, 1e-15);
  EXPECT_NEAR(e.mse_optimal, 6.0 / 5.0 * 0.9, 1e-15);
  EXPECT_THROW(uniform_support_estimators(std::vector<double>{}), DomainError);
}

TEST(UniformSupport, MonteCarloBiasAndVariance) {
  const double theta = 2.0;
  for (long long n : {5LL, 20LL}) {
    auto max_est = [](std::span<const double> s) { return uniform_support_estimators(s).max; };
    auto unb_est = [](std::span<const double> s) { return uniform_support_estimators(s).unbiased_max; };
    const auto r1 = estimator_risk_mc(uniform_sampler(), max_est, theta, n, 40000, 100 + n);
    const auto r2 = estimator_risk_mc(uniform_sampler(), unb_est, theta, n, 40000, 200 + n);
    const double nd = static_cast<double>(n);
    EXPECT_NEAR(r1.bias, -theta / (nd + 1.0), 3.0 * r1.bias_se);
    EXPECT_NEAR(r2.var, theta * theta / (nd * (nd + 2.0)), 3.0 * r2.var_se);
  }
}

TEST(UniformSupport, ShrunkMaximumBeatsUnbiased) {
  auto unb = [](std::span<const double> s) { return uniform_support_estimators(s).unbiased_max; };
  auto opt = [](std::span<const double> s) { return uniform_support_estimators(s).mse_optimal; };
  const auto a = estimator_risk_mc(uniform_sampler(), unb, 1.0, 10, 50000, 9);
  const auto b = estimator_risk_mc(uniform_sampler(), opt, 1.0, 10, 50000, 9);
  EXPECT_LT(b.mse, a.mse);
}

TEST(EstimatorRisk, BernoulliMeanSaturatesBound) {
  const double th = 0.3;
  const long long n = 50;
  const auto r = estimator_risk_mc(bernoulli_sampler(), sample_mean, th, n, 20000, 4);
  EXPECT_NEAR(r.mse, th * (1.0 - th) / n, 3.0 * r.mse_se);
}

TEST(EstimatorRisk, ConstantEstimatorIsExact) {
  const auto r = estimator_risk_mc(bernoulli_sampler(), [](std::span<const double>) { return 0.8; }, 0.3, 10, 100, 1);
  EXPECT_NEAR(r.mse, 0.25, 1e-15);
  EXPECT_NEAR(r.var, 0.0, 1e-15);
}

TEST(EstimatorRisk, BiasVarianceDecomposition) {
  auto est = [](std::span<const double> s) { return uniform_support_estimators(s).max; };
  const auto r = estimator_risk_mc(uniform_sampler(), est, 1.5, 8, 30000, 12);
  EXPECT_NEAR(r.mse, r.var + r.bias * r.bias, 3.0 * r.mse_se);
}

TEST(EstimatorRisk, ReproducibleAndWorkerIndependent) {
  auto est = [](std::span<const double> s) { return uniform_support_estimators(s).midpoint; };
  const auto a = estimator_risk_mc(uniform_sampler(), est, 1.0, 7, 2000, 42, 1);
  const auto b = estimator_risk_mc(uniform_sampler(), est, 1.0, 7, 2000, 42, 4);
  EXPECT_EQ(a.mse, b.mse);
  EXPECT_EQ(a.bias, b.bias);
  EXPECT_EQ(a.var, b.var);
  EXPECT_THROW(estimator_risk_mc(uniform_sampler(), est, 1.0, 7, 0, 42), DomainError);
}

}  // namespace
}  // namespace qestlab
