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

#include "qestlab/qfi.hpp"

#include <gtest/gtest.h>

#include "test_util.hpp"

namespace qestlab {
namespace {

using testing::max_abs;

/// (1/2)[[1, e^{i phi}(1-nu)], [e^{-i phi}(1-nu), 1]] as a function of nu.
ParamStateFamily noisy_qubit(double phi) {
  ParamStateFamily f;
  f.eval = [phi](double nu) {
    ComplexMatrix m(2, 2);
    m << 0.5, 0.5 * std::polar(1.0 - nu, phi), 0.5 * std::polar(1.0 - nu, -phi), 0.5;
    return DensityMatrix(m);
  };
  return f;
}

/// cos(a/2)|0> + e^{i theta} sin(a/2)|1>.
ParamStateFamily phase_family(double alpha) {
  ParamStateFamily f;
  f.eval = [alpha](double theta) { return DensityMatrix::from_ket(bloch_ket(alpha, theta)); };
  return f;
}

ParamStateFamily gibbs_family(const ComplexMatrix& h) {
  ParamStateFamily f;
  f.eval = [h](double t) { return gibbs_state(h, t); };
  return f;
}

TEST(ClassicalFi, BernoulliMatchesInverseVariance) {
  for (int i = 1; i <= 9; ++i) {
    const double th = 0.1 * i;
    EXPECT_NEAR(classical_fi(bernoulli_pmf(), th), 1.0 / (th * (1.0 - th)), 1e-6) << th;
  }
  EXPECT_NEAR(classical_fi(bernoulli_pmf(), 0.5), 4.0, 1e-8);
}

TEST(ClassicalFi, ParameterFreePmfIsZero) {
  Pmf p{3, [](int x, double) { return (x + 1) / 6.0; }};
  EXPECT_EQ(classical_fi(p, 0.7), 0.0);
}

TEST(ClassicalFi, EquatorialPhaseMeasurementIsOne) {
  // alpha = beta = pi/2: p0 = (1 - cos(theta - varphi + phi)) / 2.
  for (double varphi : {0.0, 0.4}) {
    for (double phi : {0.0, 1.3}) {
      Pmf p{2, [=](int x, double th) {
              const double f = -std::cos(th - varphi + phi);
              return x == 0 ? 0.5 + f / 2.0 : 0.5 - f / 2.0;
            }};
      for (double th : {0.3, 1.0, 2.2}) EXPECT_NEAR(classical_fi(p, th), 1.0, 1e-7);
    }
  }
}

TEST(ClassicalFi, RejectsNegativeProbabilities) {
  Pmf p{2, [](int x, double th) { return x == 0 ? th : 1.0 - th; }};
  EXPECT_THROW(classical_fi(p, 1.5), DomainError);
}

TEST(ClassicalFi, AdditiveOverIndependentPairs) {
  Pmf pair{4, [](int x, double th) {
             const double a = (x & 1) ? th : 1.0 - th;
             const double b = (x & 2) ? th : 1.0 - th;
             return a * b;
           }};
  for (double th : {0.2, 0.55}) EXPECT_NEAR(classical_fi(pair, th), 2.0 * classical_fi(bernoulli_pmf(), th), 1e-6);
}

TEST(Qfi, NoiseParameterClosedForm) {
  for (double phi : {0.0, 0.7}) {
    for (int i = 1; i <= 9; ++i) {
      const double nu = 0.1 * i;
      EXPECT_NEAR(qfi(noisy_qubit(phi), nu), 1.0 / (nu * (2.0 - nu)), 1e-8) << nu;
    }
  }
}

TEST(Sld, NoiseParameterMatrix) {
  const double phi = 0.7, nu = 0.3;
  const ComplexMatrix l = sld(noisy_qubit(phi), nu);
  ComplexMatrix want(2, 2);
  want << 1.0 - nu, -std::polar(1.0, phi), -std::polar(1.0, -phi), 1.0 - nu;
  want /= nu * (2.0 - nu);
  EXPECT_LT(max_abs(l - want), 1e-8);
  // Defining relation and the quadratic-form route.
  const ComplexMatrix rho = noisy_qubit(phi).eval(nu).matrix();
  const ComplexMatrix d = state_derivative(noisy_qubit(phi), nu);
  EXPECT_LT(max_abs(l * rho + rho * l - 2.0 * d), 1e-8);
  EXPECT_NEAR((rho * l * l).trace().real(), qfi(noisy_qubit(phi), nu), 1e-8);
}

TEST(Sld, ThermalQubitIsShiftedHamiltonian) {
  const ComplexMatrix h = 0.5 * pauli::z();
  for (double t : {0.4, 1.3}) {
    const auto rho = gibbs_state(h, t);
    const double mean = (rho.matrix() * h).trace().real();
    const ComplexMatrix want = (h - mean * pauli::id()) / (t * t);
    EXPECT_LT(max_abs(sld(gibbs_family(h), t) - want), 1e-7);
  }
}

TEST(Sld, ConstantFamilyGivesZero) {
  ParamStateFamily f;
  Rng rng(1);
  const auto rho = testing::random_state(rng, 3);
  f.eval = [rho](double) { return rho; };
  EXPECT_LT(max_abs(sld(f, 0.3)), 1e-12);
}

TEST(Sld, PureStateNeedsRegularization) {
  EXPECT_THROW(qfi(phase_family(1.0), 0.2, 0.0), NumericalError);
  EXPECT_THROW(qfi(phase_family(1.0), 0.2, 1.0), DomainError);
}

TEST(Qfi, PureQubitPhaseLimit) {
  for (double a : {0.0, 0.3, PI / 2.0, 2.0, PI}) EXPECT_NEAR(qfi_pure_limit(phase_family(a), 0.4), std::pow(std::sin(a), 2), 1e-4) << a;
}

TEST(Qfi, ThermalQubitClosedForm) {
  const double omega = 1.0;
  const ComplexMatrix h = 0.5 * omega * pauli::z();
  for (double t : {0.2, 0.5, 1.0, 3.0}) {
    const double x = omega / (2.0 * t);
    const double want = std::pow(omega / (2.0 * t * t), 2) / std::pow(std::cosh(x), 2);
    EXPECT_NEAR(thermal_fi(h, t), want, 1e-8 * std::max(1.0, want));
  }
  EXPECT_EQ(thermal_fi(pauli::id(3), 0.7), 0.0);
  EXPECT_THROW(thermal_fi(h, 0.0), DomainError);
}

TEST(Qfi, GibbsFamilyMatchesThermalFi) {
  Rng rng(2);
  const ComplexMatrix g = testing::random_matrix(rng, 3, 3);
  const ComplexMatrix h = 0.5 * (g + g.adjoint());
  for (double t : {0.7, 1.5}) EXPECT_NEAR(qfi(gibbs_family(h), t), thermal_fi(h, t), 1e-6);
}

TEST(OptimalPovm, NoiseParameterBasis) {
  const double phi = 0.7;
  const auto povm = optimal_povm(sld(noisy_qubit(phi), 0.4));
  ASSERT_EQ(povm.size(), 2u);
  EXPECT_LT(max_abs(povm[0] + povm[1] - pauli::id()), 1e-10);
  ComplexVector a(2), b(2);
  a << std::polar(1.0, phi), 1.0;
  b << -std::polar(1.0, phi), 1.0;
  const Ket ka(a), kb(b);
  // Each projector is one of the two basis states.
  for (const auto& p : povm) {
    const double fa = std::abs(ka.amplitudes().dot(p * ka.amplitudes()));
    const double fb = std::abs(kb.amplitudes().dot(p * kb.amplitudes()));
    EXPECT_NEAR(std::max(fa, fb), 1.0, 1e-10);
    EXPECT_NEAR(std::min(fa, fb), 0.0, 1e-10);
  }
  const double nu = 0.4;
  EXPECT_NEAR(classical_fi(born_pmf(noisy_qubit(phi), povm), nu), qfi(noisy_qubit(phi), nu), 1e-6);
}

TEST(OptimalPovm, DiagonalSldGivesComputationalBasis) {
  ComplexMatrix l = ComplexMatrix::Zero(2, 2);
  l.diagonal() << -1.0, 2.0;
  const auto povm = optimal_povm(l);
  EXPECT_LT(max_abs(povm[0] - outer(2, 0, 0)), 1e-12);
  EXPECT_LT(max_abs(povm[1] - outer(2, 1, 1)), 1e-12);
  EXPECT_THROW(optimal_povm(pauli::y() * I_UNIT), DomainError);
}

TEST(Qfi, BoundsEveryProjectiveMeasurement) {
  Rng rng(3);
  for (int rep = 0; rep < 20; ++rep) {
    const ComplexMatrix g = testing::random_matrix(rng, 2, 2);
    const ComplexMatrix gen = 0.5 * (g + g.adjoint());
    const auto rho0 = testing::random_state(rng, 2);
    ParamStateFamily fam;
    fam.eval = [=](double th) {
      const ComplexMatrix u = matrix_exponential(-I_UNIT * th * gen);
      return DensityMatrix::repaired(u * rho0.matrix() * u.adjoint());
    };
    const Ket m = testing::random_ket(rng, 2);
    const ComplexMatrix p0 = m.projector();
    const std::vector<ComplexMatrix> povm{p0, pauli::id() - p0};
    const double th = rng.uniform(0.0, 2.0);
    EXPECT_GE(qfi(fam, th) - classical_fi(born_pmf(fam, povm), th), -1e-8);
  }
}

TEST(KlDivergence, Values) {
  EXPECT_EQ(kl_divergence(bernoulli_pmf(), 0.3, 0.3), 0.0);
  EXPECT_NEAR(kl_divergence(bernoulli_pmf(), 0.25, 0.5), 0.25 * std::log(0.5) + 0.75 * std::log(1.5), 1e-15);
  EXPECT_THROW(kl_divergence(std::vector<double>{0.5, 0.5}, std::vector<double>{1.0, 0.0}), DomainError);
}

TEST(KlDivergence, CurvatureIsFisherInformation) {
  const double th = 0.3, d = 1e-4;
  EXPECT_NEAR(2.0 / (d * d) * kl_divergence(bernoulli_pmf(), th, th + d), classical_fi(bernoulli_pmf(), th), 1e-2);
}

}  // namespace
}  // namespace qestlab
