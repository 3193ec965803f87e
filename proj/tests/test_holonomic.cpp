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

#include "qestlab/holonomic.hpp"

#include <gtest/gtest.h>

#include <boost/math/quadrature/exp_sinh.hpp>

#include "test_util.hpp"

namespace qestlab {
namespace {

using testing::max_abs;

GateProgram program(std::vector<LoopSpec> loops, double beta = 1.0) {
  GateProgram p;
  p.loops = std::move(loops);
  p.beta = beta;
  return p;
}

TEST(Pulse, AreaIsPi) {
  for (double beta : {0.1, 1.0, 7.0}) {
    const double half = boost::math::quadrature::exp_sinh<double>().integrate(
        [beta](double t) { return pulse_envelope(t, beta); }, 0.0, std::numeric_limits<double>::infinity());
    EXPECT_NEAR(2.0 * half, PI, 1e-10) << beta;
    EXPECT_EQ(pulse_envelope(0.0, beta), beta);
    EXPECT_GE(pulse_area(beta, 20.0 / beta), PI * (1.0 - 1e-8));
    EXPECT_LT(pulse_area(beta, 20.0 / beta), PI);
  }
}

TEST(IdealGate, Presets) {
  Unitary2 h;
  h << 1, 1, 1, -1;
  h /= std::sqrt(2.0);
  EXPECT_LT(max_abs(ideal_gate(gates::hadamard()) - h), 1e-15);
  EXPECT_LT(max_abs(ideal_gate(gates::x()) - pauli::x()), 1e-15);
  EXPECT_LT(max_abs(ideal_gate(gates::z()) - pauli::z()), 1e-15);
  EXPECT_NEAR(phase_insensitive_overlap(ideal_gate(gates::s()), gates::s_matrix()), 1.0, 1e-15);
  const Unitary2 s = std::polar(1.0, -PI / 4.0) * gates::s_matrix();
  EXPECT_LT(max_abs(ideal_gate(gates::s()) - s), 1e-15);
}

TEST(IdealGate, AlternateRecipeIsBitFlip) {
  // (pi/2, pi/2) then (0, pi/4): n = y, m = z, so m.sigma n.sigma = -i x.
  EXPECT_LT(max_abs(ideal_gate(gates::s_alt()) - (-I_UNIT * pauli::x())), 1e-15);
  EXPECT_LT(phase_insensitive_overlap(ideal_gate(gates::s_alt()), gates::s_matrix()), 1e-15);
}

TEST(IdealGate, RepeatedLoopIsIdentity) {
  Rng rng(1);
  for (int rep = 0; rep < 10; ++rep) {
    const LoopSpec l{rng.uniform(0.0, PI), rng.uniform(0.0, 2.0 * PI)};
    const Unitary2 u = ideal_gate({l, l});
    EXPECT_LT(max_abs(u - Unitary2::Identity()), 1e-14);
  }
  EXPECT_THROW(ideal_gate({}), DomainError);
}

TEST(LambdaHamiltonian, HermitianAndBrightDarkForm) {
  Rng rng(2);
  for (int rep = 0; rep < 5; ++rep) {
    auto p = program({{rng.uniform(0.0, PI), rng.uniform(0.0, 2.0 * PI)}}, 1.3);
    const double t = rng.uniform(-3.0, 3.0);
    const ComplexMatrix h = lambda_hamiltonian(t, p, 0);
    EXPECT_LT(max_abs(h - h.adjoint()), 1e-15);
    const ComplexMatrix v = bright_dark_basis(p.loops[0]);
    EXPECT_LT(max_abs(v.adjoint() * v - pauli::id(4)), 1e-14);
    ComplexMatrix want = ComplexMatrix::Zero(4, 4);
    want(2, 0) = want(0, 2) = pulse_envelope(t, p.beta);
    EXPECT_LT(max_abs(v.adjoint() * h * v - want), 1e-14);
  }
  EXPECT_THROW(lambda_hamiltonian(0.0, program(gates::x()), 1), DomainError);
}

TEST(LambdaHamiltonian, EqualFrequenciesKeepDarkStateDecoupled) {
  auto p = program(gates::hadamard(), 0.5);
  p.rwa = false;
  p.f_e0 = p.f_e1 = 3.0;
  const ComplexMatrix v = bright_dark_basis(p.loops[0]);
  for (double t : {-1.1, 0.2, 0.9}) {
    const ComplexMatrix hb = v.adjoint() * lambda_hamiltonian(t, p, 0) * v;
    EXPECT_LT(std::abs(hb(2, 1)), 1e-15);
    EXPECT_GT(std::abs(hb(2, 0)), 1e-3);
  }
}

TEST(LambdaHamiltonian, UnequalFrequenciesCoupleDarkState) {
  auto p = program({{1.1, 0.4}}, 0.5);
  p.rwa = false;
  p.f_e0 = 3.0;
  p.f_e1 = 4.5;
  const auto w = loop_amplitudes(p.loops[0]);
  const ComplexMatrix v = bright_dark_basis(p.loops[0]);
  for (double t : {-1.1, 0.2, 0.9}) {
    const ComplexMatrix hb = v.adjoint() * lambda_hamiltonian(t, p, 0) * v;
    const cplx want = pulse_envelope(t, p.beta) * w[0] * w[1] *
                      (std::polar(1.0, -2.0 * p.f_e1 * t) - std::polar(1.0, -2.0 * p.f_e0 * t));
    EXPECT_LT(std::abs(hb(2, 1) - want), 1e-14);
    EXPECT_GT(std::abs(want), 1e-3);
  }
}

TEST(SimulateGate, IdealLimitForRandomLoops) {
  Rng rng(3);
  for (int rep = 0; rep < 20; ++rep) {
    std::vector<LoopSpec> loops{{rng.uniform(0.0, PI), rng.uniform(0.0, 2.0 * PI)}};
    if (rep % 2) loops.push_back({rng.uniform(0.0, PI), rng.uniform(0.0, 2.0 * PI)});
    const auto p = program(loops, rng.uniform(0.5, 2.0));
    const Ket in = testing::random_ket(rng, 2);
    EXPECT_LT(gate_infidelity(p, in), 1e-6) << rep;
  }
}

TEST(SimulateGate, IdentityProgram) {
  const LoopSpec l{0.7, 1.9};
  const auto p = program({l, l});
  for (const auto& k : fibonacci_states(6)) EXPECT_LT(gate_infidelity(p, k), 1e-6);
}

TEST(SimulateGate, SparseEngineMatchesDenseEvolution) {
  auto p = program(gates::s(), 1.0);
  p.rwa = false;
  p.f_e0 = 2.0;
  p.f_e1 = 3.0;
  p.gamma = 0.05;
  p.origin = PhaseOrigin::GlobalClock;
  const Ket in = bloch_ket(1.0, 0.3);
  const auto fast = simulate_gate(p, in);
  // Dense reference: evolve each window, idle in between.
  const double w = p.half_window(), dt = p.step() / 2.0;
  const std::vector<JumpChannel> decay{{p.gamma, outer(4, lvl::kg, lvl::ke)}};
  DensityMatrix rho = DensityMatrix::from_ket(embed_qubit(in));
  for (std::size_t k = 0; k < p.loops.size(); ++k) {
    if (k > 0) {
      rho = evolve(rho, TimeDepHamiltonian::constant(ComplexMatrix::Zero(4, 4)), decay,
                   {0.0, p.spacing_time(), dt, false, 1e-10});
    }
    TimeDepHamiltonian h{4, [&p, k](double t) { return lambda_hamiltonian(t, p, k); }};
    rho = evolve(rho, h, decay, {-w, w, dt, false, 1e-10});
  }
  EXPECT_LT(max_abs(fast.matrix() - rho.matrix()), 1e-7);
}

TEST(SimulateGate, PopulationConserved) {
  auto p = program(gates::hadamard(), 1.0);
  p.gamma = 0.3;
  p.rwa = false;
  p.f_e0 = p.f_e1 = 4.0;
  const auto out = simulate_gate(p, bloch_ket(0.4, 2.0));
  EXPECT_NEAR(out.matrix().trace().real(), 1.0, 1e-8);
  EXPECT_GT(out(lvl::kg, lvl::kg).real(), 1e-3);
  EXPECT_THROW(simulate_gate(p, basis_ket(3, 0)), DomainError);
}

TEST(SimulateGate, StepHalvingConverges) {
  auto p = program(gates::s(), 0.5);
  p.rwa = false;
  p.f_e0 = p.f_e1 = 1.0;
  p.gamma = 1e-3;
  const Ket in = bloch_ket(2.0, 0.7);
  const double a = gate_infidelity(p, in);
  p.dt = p.step() / 2.0;
  const double b = gate_infidelity(p, in);
  EXPECT_NEAR(a, b, 1e-8);
}

TEST(SimulateGate, DecayErrorFallsWithPulseRate) {
  auto p = program(gates::hadamard());
  p.gamma = 1.0;
  double prev = 1.0;
  for (double ratio : {1.0, 3.0, 10.0, 30.0, 100.0}) {
    p.beta = ratio * p.gamma;
    const double inf = gate_infidelity(p, basis_ket(2, 0));
    EXPECT_LT(inf, prev) << ratio;
    prev = inf;
  }
}

TEST(SimulateGate, StrongDampingFreezesQubit) {
  auto p = program(gates::x(), 1.0);
  // Zeno leakage out of the bright state is about 8 beta / gamma.
  for (double g : {50.0, 200.0}) {
    p.gamma = g;
    for (const auto& k : fibonacci_states(5)) {
      const auto out = simulate_gate(p, k);
      EXPECT_GT(fidelity(out, embed_qubit(k)), 1.0 - 20.0 / g);
    }
  }
}

TEST(SimulateGate, CounterRotatingTermsGiveInteriorOptimum) {
  auto p = program(gates::s());
  p.rwa = false;
  p.f_e0 = p.f_e1 = 1.0;
  const auto scan = beta_scan(p, 1e-4, {0.01, 0.1, 1.0}, 30);
  EXPECT_LT(scan.mean_infidelity[1], scan.mean_infidelity[0]);
  EXPECT_LT(scan.mean_infidelity[1], scan.mean_infidelity[2]);
}

TEST(GateMap, MatchesDirectSimulation) {
  auto p = program(gates::s(), 0.7);
  p.gamma = 0.2;
  p.rwa = false;
  p.f_e0 = 1.5;
  p.f_e1 = 2.5;
  const auto g = GateMap::compute(p);
  Rng rng(4);
  for (int rep = 0; rep < 4; ++rep) {
    const Ket k = testing::random_ket(rng, 2);
    EXPECT_LT(max_abs(g.apply(k) - simulate_gate(p, k).matrix()), 1e-10);
  }
}

TEST(Fibonacci, PolesNormalizationAndBalance) {
  const auto two = fibonacci_states(2);
  EXPECT_NEAR(std::norm(two[0][0]), 1.0, 1e-15);
  EXPECT_NEAR(std::norm(two[1][1]), 1.0, 1e-15);
  const auto s = fibonacci_states(100);
  ASSERT_EQ(s.size(), 100u);
  Eigen::Vector3d mean = Eigen::Vector3d::Zero();
  for (const auto& k : s) {
    EXPECT_NEAR(k.amplitudes().norm(), 1.0, 1e-14);
    const ComplexMatrix r = k.projector();
    mean += Eigen::Vector3d(2.0 * r(1, 0).real(), 2.0 * r(1, 0).imag(), (r(0, 0) - r(1, 1)).real());
  }
  EXPECT_LT((mean / 100.0).norm(), 0.05);
  EXPECT_THROW(fibonacci_states(1), DomainError);
}

TEST(AverageInfidelity, IdealLimitAndOrdering) {
  const auto ideal = average_infidelity(program(gates::s()), 50);
  EXPECT_LT(ideal.mean, 1e-6);
  auto p = program(gates::hadamard());
  p.gamma = 0.1;
  const auto s = average_infidelity(p, 50);
  EXPECT_LE(s.min, s.mean);
  EXPECT_LE(s.mean, s.max);
  EXPECT_GT(s.max, s.min);
}

TEST(AsymptoticInfidelity, SphereAverages) {
  EXPECT_NEAR(asymptotic_infidelity(Unitary2::Identity()), 0.0, 1e-14);
  EXPECT_NEAR(asymptotic_infidelity(pauli::x()), 2.0 / 3.0, 1e-12);
  EXPECT_NEAR(asymptotic_infidelity(ideal_gate(gates::s())), 1.0 / 3.0, 1e-12);
  EXPECT_THROW(asymptotic_infidelity(2.0 * Unitary2::Identity()), DomainError);
}

TEST(AsymptoticInfidelity, MatchesMonteCarloAverage) {
  Rng rng(5);
  const Unitary2 u = ideal_gate(gates::hadamard());
  double s = 0.0;
  const int n = 20000;
  for (int i = 0; i < n; ++i) {
    const Ket k = testing::random_ket(rng, 2);
    s += 1.0 - std::norm(k.amplitudes().dot(u * k.amplitudes()));
  }
  EXPECT_NEAR(s / n, asymptotic_infidelity(u), 0.01);
}

TEST(MinimizeOnGrid, FindsInteriorAndFlagsBoundary) {
  std::vector<double> grid;
  for (int i = 0; i <= 20; ++i) grid.push_back(0.1 * i);
  const auto r = minimize_on_grid(grid, [](double x) { return (x - 0.73) * (x - 0.73); });
  EXPECT_NEAR(r.beta_opt, 0.73, 1e-3);
  EXPECT_FALSE(r.on_boundary);
  const auto b = minimize_on_grid(grid, [](double x) { return x; });
  EXPECT_TRUE(b.on_boundary);
  EXPECT_EQ(b.beta_opt, 0.0);
  EXPECT_THROW(minimize_on_grid({1.0, 2.0}, [](double x) { return x; }), DomainError);
}

TEST(TwoQubit, RwaLoopImplementsControlledPhase) {
  TwoQubitConfig c;
  const Ket plus = bloch_ket(PI / 2.0, 0.0);
  const auto out = simulate_two_qubit(c, two_qubit_ket(plus, plus));
  const ComplexMatrix g = ideal_two_qubit_gate(0.0, 0.0);
  for (int a = 0; a < 2; ++a)
    for (int b = 0; b < 2; ++b) {
      const int i = two_index(a, b);
      EXPECT_NEAR(g(i, i).real(), (a == 1 && b == 1) ? -1.0 : 1.0, 1e-15);
    }
  EXPECT_GT(fidelity(out, Ket(g * two_qubit_ket(plus, plus).amplitudes())), 1.0 - 1e-6);
  EXPECT_LT(cz_average_infidelity(c), 1e-6);
}

TEST(TwoQubit, RwaFidelityForGeneralLoop) {
  TwoQubitConfig c;
  c.theta = 1.2;
  c.phi = 0.5;
  c.include_h1 = true;
  Rng rng(6);
  for (int rep = 0; rep < 3; ++rep) {
    const Ket in = two_qubit_ket(testing::random_ket(rng, 2), testing::random_ket(rng, 2));
    EXPECT_LT(two_qubit_infidelity(c, in), 1e-6);
  }
}

TEST(TwoQubit, RwaTermsCommute) {
  TwoQubitConfig c;
  c.theta = 0.9;
  c.phi = 1.4;
  for (double t : {-0.7, 0.0, 1.3}) {
    const ComplexMatrix h0 = two_qubit_hamiltonian(t, c);
    c.include_h1 = true;
    const ComplexMatrix h1 = two_qubit_hamiltonian(t, c) - h0;
    c.include_h1 = false;
    EXPECT_GT(max_abs(h1), 1e-3);
    EXPECT_LT(max_abs(h0 * h1 - h1 * h0), 1e-14);
  }
}

TEST(TwoQubit, PopulationConservedWithLocalDecay) {
  TwoQubitConfig c;
  c.rwa = false;
  c.f_e0 = c.f_e1 = 5.0;
  c.gamma1 = 0.2;
  c.gamma2 = 0.05;
  const Ket minus = bloch_ket(PI / 2.0, PI);
  const auto out = simulate_two_qubit(c, two_qubit_ket(minus, minus));
  EXPECT_NEAR(out.matrix().trace().real(), 1.0, 1e-8);
  EXPECT_THROW(simulate_two_qubit(c, basis_ket(4, 0)), DomainError);
}

TEST(TwoQubit, StepHalvingConverges) {
  TwoQubitConfig c;
  c.rwa = false;
  c.f_e0 = c.f_e1 = 3.0;
  c.gamma1 = c.gamma2 = 1e-3;
  const double a = cz_average_infidelity(c);
  c.dt = c.step() / 2.0;
  EXPECT_NEAR(a, cz_average_infidelity(c), 1e-8);
}

}  // namespace
}  // namespace qestlab
