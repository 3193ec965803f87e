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

// Collisional thermometer. Qubit basis: index 0 = ground |0>, index 1 =
// excited |1>. Outcome x = 1 means the ancilla was found excited.

#pragma once

#include "qestlab/dynamics.hpp"
#include "qestlab/qcore.hpp"
#include "qestlab/qfi.hpp"
#include "qestlab/rng.hpp"

#include <array>
#include <cstdint>
#include <string>
#include <vector>

namespace qestlab {

struct ProbePrep {
  enum class Kind { Ground, Thermal, Mixture };
  Kind kind = Kind::Ground;
  double tp = 0.0;  // probe temperature (Thermal)
  double q = 1.0;   // weight of |0><0| (Mixture)

  static ProbePrep ground() { return {}; }
  static ProbePrep thermal(double tp) { return {Kind::Thermal, tp, 1.0}; }
  static ProbePrep mixture(double q) { return {Kind::Mixture, 0.0, q}; }
};

struct CollisionalParams {
  double omega = 1.0;
  double gamma_tau_se = 0.4;
  double g_tau_sa = PI / 2.0;
  ProbePrep probe;

  void validate() const {
    if (!(omega > 0.0) || !std::isfinite(omega)) throw DomainError("omega must be > 0");
    if (!(gamma_tau_se > 0.0) || !std::isfinite(gamma_tau_se))
      throw DomainError("gamma_tau_se must be > 0");
    if (!(g_tau_sa > 0.0) || g_tau_sa > PI / 2.0 + 1e-12)
      throw DomainError("g_tau_sa must lie in (0, pi/2]");
    if (probe.kind == ProbePrep::Kind::Thermal && !(probe.tp >= 0.0))
      throw DomainError("probe temperature must be >= 0");
    if (probe.kind == ProbePrep::Kind::Mixture && !(probe.q >= 0.0 && probe.q <= 1.0))
      throw DomainError("probe mixture weight q must lie in [0, 1]");
  }

  bool full_swap() const { return std::abs(g_tau_sa - PI / 2.0) < 1e-12; }
};

struct OutcomeRecord {
  std::vector<int> bits;
  double true_temperature = 0.0;
};

/// 1 / (1 + e^{omega/T}); 0 at T = 0.
inline double thermal_excited_population(double temperature, double omega) {
  if (temperature < 0.0) throw DomainError("temperature must be >= 0");
  if (temperature == 0.0) return 0.0;
  return 1.0 / (1.0 + std::exp(omega / temperature));
}

inline double mean_occupation(double temperature, double omega) {
  if (!(temperature > 0.0)) throw DomainError("temperature must be > 0");
  return 1.0 / std::expm1(omega / temperature);
}

/// Gamma = gamma (2 nbar + 1) tau_SE.
inline double relaxation(double temperature, const CollisionalParams& p) {
  return p.gamma_tau_se * (2.0 * mean_occupation(temperature, p.omega) + 1.0);
}

inline ComplexMatrix system_hamiltonian(const CollisionalParams& p) {
  return (ComplexMatrix(2, 2) << -p.omega / 2.0, 0, 0, p.omega / 2.0).finished();
}

inline ComplexMatrix sigma_minus() { return outer(2, 0, 1); }
inline ComplexMatrix sigma_plus() { return outer(2, 1, 0); }

/// Excited population of a freshly prepared ancilla.
inline double probe_excited_population(const CollisionalParams& p) {
  switch (p.probe.kind) {
    case ProbePrep::Kind::Ground:
      return 0.0;
    case ProbePrep::Kind::Thermal:
      return thermal_excited_population(p.probe.tp, p.omega);
    case ProbePrep::Kind::Mixture:
      return 1.0 - p.probe.q;
  }
  return 0.0;
}

inline DensityMatrix probe_state(const CollisionalParams& p) {
  const double e = probe_excited_population(p);
  return DensityMatrix((ComplexMatrix(2, 2) << 1.0 - e, 0, 0, e).finished());
}

/// Superoperator of the thermalization map exp(tau_SE L) in column stacking.
inline ComplexMatrix thermal_channel_superop(double temperature, const CollisionalParams& p) {
  if (!(temperature > 0.0)) throw DomainError("thermal_channel: temperature must be > 0");
  if (p.gamma_tau_se < 0.0) throw DomainError("thermal_channel: gamma_tau_se must be >= 0");
  const double nbar = mean_occupation(temperature, p.omega);
  const std::vector<JumpChannel> ch{{p.gamma_tau_se * (nbar + 1.0), sigma_minus()},
                                    {p.gamma_tau_se * nbar, sigma_plus()}};
  return matrix_exponential(liouvillian_matrix(ComplexMatrix::Zero(2, 2), ch));
}

inline DensityMatrix thermal_channel(const DensityMatrix& rho, double temperature,
                                     const CollisionalParams& p) {
  if (rho.dim() != 2) throw DomainError("thermal_channel: system must be a qubit");
  const ComplexMatrix s = thermal_channel_superop(temperature, p);
  return DensityMatrix::repaired(unvectorize(s * vectorize(rho.matrix()), 2, 2));
}

/// exp{-i theta (s+ a- + s- a+)} on system (first factor) and ancilla.
inline ComplexMatrix partial_swap_unitary(double g_tau_sa) {
  const ComplexMatrix g =
      tensor_product(sigma_plus(), sigma_minus()) + tensor_product(sigma_minus(), sigma_plus());
  return matrix_exponential(-I_UNIT * g_tau_sa * g);
}

struct CollisionOutput {
  DensityMatrix system;
  DensityMatrix ancilla;
};

/// Partial swap against a fresh probe; returns both marginals.
inline CollisionOutput collide(const DensityMatrix& rho_s, const CollisionalParams& p) {
  const ComplexMatrix u = partial_swap_unitary(p.g_tau_sa);
  const ComplexMatrix joint = u * tensor_product(rho_s.matrix(), probe_state(p).matrix()) * u.adjoint();
  return {partial_trace(DensityMatrix::repaired(joint), {2, 2}, {0}),
          partial_trace(DensityMatrix::repaired(joint), {2, 2}, {1})};
}

/// Thermalization then collision.
inline CollisionOutput stroboscopic_step(const DensityMatrix& rho_s, double temperature,
                                         const CollisionalParams& p) {
  return collide(thermal_channel(rho_s, temperature, p), p);
}

namespace detail {

inline double sin2(double x) { return std::sin(x) * std::sin(x); }

/// Excited population of the system right after thermalization, in the
/// periodic regime.
inline double steady_excited(double temperature, const CollisionalParams& p) {
  const double pth = thermal_excited_population(temperature, p.omega);
  const double eg = std::exp(-relaxation(temperature, p));
  const double s2 = sin2(p.g_tau_sa);
  const double pa = probe_excited_population(p);
  return (pth * (1.0 - eg) + eg * s2 * pa) / (1.0 - eg * (1.0 - s2));
}

}  // namespace detail

/// Periodic steady state of the system, sampled just before each collision.
/// For a ground-state probe the excited population is
/// p_th / (1 + sin^2(g tau) / (e^Gamma - 1)).
inline DensityMatrix steady_state(double temperature, const CollisionalParams& p) {
  p.validate();
  const double e = detail::steady_excited(temperature, p);
  return DensityMatrix((ComplexMatrix(2, 2) << 1.0 - e, 0, 0, e).finished());
}

/// Same cycle sampled just after each collision (fixed point of stroboscopic_step).
inline DensityMatrix steady_state_post_collision(double temperature, const CollisionalParams& p) {
  p.validate();
  const double s2 = detail::sin2(p.g_tau_sa);
  const double e = (1.0 - s2) * detail::steady_excited(temperature, p) + s2 * probe_excited_population(p);
  return DensityMatrix((ComplexMatrix(2, 2) << 1.0 - e, 0, 0, e).finished());
}

/// Linear map rho_s -> tr_A[U (rho_s x probe) U^dag] as a 4x4 superoperator.
inline ComplexMatrix collision_superop(const CollisionalParams& p) {
  const ComplexMatrix u = partial_swap_unitary(p.g_tau_sa);
  const ComplexMatrix pa = probe_state(p).matrix();
  ComplexMatrix s(4, 4);
  for (int j = 0; j < 2; ++j)
    for (int i = 0; i < 2; ++i) {
      const ComplexMatrix out =
          partial_trace(u * tensor_product(outer(2, i, j), pa) * u.adjoint(), {2, 2}, {0});
      s.col(i + 2 * j) = vectorize(out);
    }
  return s;
}

/// Power iteration of rho -> E(collide(rho)) from I/2 until the trace-norm
/// change drops below tol.
inline DensityMatrix steady_state_iterated(double temperature, const CollisionalParams& p,
                                           double tol = 1e-12, long max_iter = 100000) {
  p.validate();
  const ComplexMatrix phi = thermal_channel_superop(temperature, p) * collision_superop(p);
  ComplexVector v = vectorize(ComplexMatrix::Identity(2, 2) / 2.0);
  for (long it = 0; it < max_iter; ++it) {
    const ComplexVector w = phi * v;
    const ComplexMatrix diff = unvectorize(w - v, 2, 2);
    Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(0.5 * (diff + diff.adjoint()), Eigen::EigenvaluesOnly);
    v = w;
    if (es.eigenvalues().cwiseAbs().sum() < tol) return DensityMatrix::repaired(unvectorize(v, 2, 2));
  }
  throw NumericalError("steady_state_iterated: no convergence");
}

/// Ancilla state after colliding with the steady-state system.
inline DensityMatrix ancilla_state(double temperature, const CollisionalParams& p) {
  p.validate();
  const double s2 = detail::sin2(p.g_tau_sa);
  const double e = s2 * detail::steady_excited(temperature, p) + (1.0 - s2) * probe_excited_population(p);
  return DensityMatrix((ComplexMatrix(2, 2) << 1.0 - e, 0, 0, e).finished());
}

/// P(x | T). Full swap uses the closed forms; otherwise Born rule on ancilla_state.
inline double likelihood(int x, double temperature, const CollisionalParams& p) {
  if (x != 0 && x != 1) throw DomainError("likelihood: outcome must be 0 or 1");
  if (!(temperature > 0.0)) throw DomainError("likelihood: temperature must be > 0");
  double p1;
  if (p.full_swap()) {
    const double eg = std::exp(-relaxation(temperature, p));
    const double pth = thermal_excited_population(temperature, p.omega);
    switch (p.probe.kind) {
      case ProbePrep::Kind::Ground:
        p1 = (1.0 - eg) * pth;
        break;
      case ProbePrep::Kind::Thermal:
        p1 = eg * thermal_excited_population(p.probe.tp, p.omega) + (1.0 - eg) * pth;
        break;
      case ProbePrep::Kind::Mixture:
      default:
        p1 = p.probe.q * (1.0 - eg) * pth + (1.0 - p.probe.q) * (eg + (1.0 - eg) * pth);
        break;
    }
  } else {
    p1 = ancilla_state(temperature, p)(1, 1).real();
  }
  p1 = std::clamp(p1, 0.0, 1.0);
  return x == 1 ? p1 : 1.0 - p1;
}

inline Pmf likelihood_pmf(const CollisionalParams& p) {
  return {2, [p](int x, double t) { return likelihood(x, t, p); }};
}

/// Classical FI of the computational-basis outcome at temperature T.
inline double likelihood_fi(double temperature, const CollisionalParams& p, double h = 0.0) {
  return classical_fi(likelihood_pmf(p), temperature, h);
}

/// F(ancilla) / F_thermal in the full-swap, ground-probe configuration.
inline double qfi_ratio(double temperature, const CollisionalParams& p) {
  if (!p.full_swap()) throw DomainError("qfi_ratio: requires g_tau_sa = pi/2");
  if (p.probe.kind != ProbePrep::Kind::Ground) throw DomainError("qfi_ratio: requires ground probes");
  const double nbar = mean_occupation(temperature, p.omega);
  const double g = relaxation(temperature, p);
  const double num = (nbar + 1.0) * std::pow(std::exp(g) + 2.0 * nbar * g - 1.0, 2);
  const double den = std::exp(2.0 * g) * (nbar + 1.0) - std::exp(g) - nbar;
  return num / den;
}

/// Ancilla state as a family in T.
inline ParamStateFamily ancilla_family(const CollisionalParams& p) {
  ParamStateFamily f;
  f.eval = [p](double t) { return ancilla_state(t, p); };
  return f;
}

inline OutcomeRecord sample_trajectory(double t0, long long n, const CollisionalParams& p,
                                       std::uint64_t seed) {
  if (n < 1) throw DomainError("sample_trajectory: n must be >= 1");
  const double p1 = likelihood(1, t0, p);
  Rng rng(seed);
  OutcomeRecord rec;
  rec.true_temperature = t0;
  rec.bits.resize(n);
  for (auto& b : rec.bits) b = rng.bernoulli(p1);
  return rec;
}

namespace detail {

/// Applies a 2x2 superoperator to qubit `site` of an n-qubit operator
/// (site 0 is the most significant factor).
inline ComplexMatrix apply_local_superop(const ComplexMatrix& rho, const ComplexMatrix& sup, int n,
                                         int site) {
  const Eigen::Index dim = rho.rows();
  const Eigen::Index mask = Eigen::Index{1} << (n - 1 - site);
  ComplexMatrix out = ComplexMatrix::Zero(dim, dim);
  for (Eigen::Index r = 0; r < dim; ++r)
    for (Eigen::Index c = 0; c < dim; ++c) {
      const int i = (r & mask) ? 1 : 0, j = (c & mask) ? 1 : 0;
      const Eigen::Index r0 = r & ~mask, c0 = c & ~mask;
      for (int k = 0; k < 2; ++k)
        for (int l = 0; l < 2; ++l)
          out(r0 | (k ? mask : 0), c0 | (l ? mask : 0)) += sup(k + 2 * l, i + 2 * j) * rho(r, c);
    }
  return out;
}

/// Embeds a two-qubit gate acting on (site_a, site_b) into n qubits.
inline ComplexMatrix embed_two_qubit(const ComplexMatrix& u, int n, int site_a, int site_b) {
  const Eigen::Index dim = Eigen::Index{1} << n;
  const Eigen::Index ma = Eigen::Index{1} << (n - 1 - site_a);
  const Eigen::Index mb = Eigen::Index{1} << (n - 1 - site_b);
  ComplexMatrix out = ComplexMatrix::Zero(dim, dim);
  for (Eigen::Index c = 0; c < dim; ++c) {
    const int in = ((c & ma) ? 2 : 0) + ((c & mb) ? 1 : 0);
    const Eigen::Index base = c & ~ma & ~mb;
    for (int o = 0; o < 4; ++o) out(base | ((o & 2) ? ma : 0) | ((o & 1) ? mb : 0), c) = u(o, in);
  }
  return out;
}

inline double mutual_info_of(const ComplexMatrix& rho_ab) {
  const DensityMatrix ab = DensityMatrix::repaired(rho_ab);
  const double sa = von_neumann_entropy(partial_trace(ab, {2, 2}, {0}));
  const double sb = von_neumann_entropy(partial_trace(ab, {2, 2}, {1}));
  return std::max(0.0, sa + sb - von_neumann_entropy(ab));
}

}  // namespace detail

/// Joint state of n consecutive ancillae emitted in the steady state,
/// ordered by emission time.
inline DensityMatrix joint_block_state(int n, double temperature, const CollisionalParams& p) {
  if (n < 1) throw DomainError("joint_block_state: n must be >= 1");
  if (n > 4) throw DomainError("joint_block_state: n > 4 exceeds the dimension guard");
  const int q = n + 1;
  ComplexMatrix rho = steady_state(temperature, p).matrix();
  const ComplexMatrix probe = probe_state(p).matrix();
  for (int k = 0; k < n; ++k) rho = tensor_product(rho, probe);
  const ComplexMatrix u = partial_swap_unitary(p.g_tau_sa);
  const ComplexMatrix e = thermal_channel_superop(temperature, p);
  for (int k = 1; k <= n; ++k) {
    if (k > 1) rho = detail::apply_local_superop(rho, e, q, 0);
    const ComplexMatrix uk = detail::embed_two_qubit(u, q, 0, k);
    rho = uk * rho * uk.adjoint();
  }
  std::vector<int> keep;
  for (int k = 1; k <= n; ++k) keep.push_back(k);
  return partial_trace(DensityMatrix::repaired(rho), std::vector<int>(q, 2), keep);
}

/// Joint state of ancillae A_i and A_{i+gap}; the ancillae in between are
/// traced out as soon as they leave, which keeps the dimension at 8.
inline DensityMatrix ancilla_pair_state(int gap, double temperature, const CollisionalParams& p) {
  if (gap < 1) throw DomainError("ancilla_pair_state: gap must be >= 1");
  const ComplexMatrix u = partial_swap_unitary(p.g_tau_sa);
  const ComplexMatrix e = thermal_channel_superop(temperature, p);
  const ComplexMatrix c = collision_superop(p);
  const ComplexMatrix probe = probe_state(p).matrix();
  // Qubit order (S, A_i).
  ComplexMatrix rho = u * tensor_product(steady_state(temperature, p).matrix(), probe) * u.adjoint();
  for (int m = 1; m < gap; ++m) {
    rho = detail::apply_local_superop(rho, e, 2, 0);
    rho = detail::apply_local_superop(rho, c, 2, 0);
  }
  rho = detail::apply_local_superop(rho, e, 2, 0);
  // Qubit order (S, A_i, A_{i+gap}).
  rho = tensor_product(rho, probe);
  const ComplexMatrix u3 = detail::embed_two_qubit(u, 3, 0, 2);
  rho = u3 * rho * u3.adjoint();
  return partial_trace(DensityMatrix::repaired(rho), {2, 2, 2}, {1, 2});
}

/// I(A_i : A_{i+gap}) in nats.
inline double mutual_information(int gap, double temperature, const CollisionalParams& p) {
  return detail::mutual_info_of(ancilla_pair_state(gap, temperature, p).matrix());
}

/// Same quantity from the full joint block (gap <= 3); used as a cross-check.
inline double mutual_information_block(int gap, double temperature, const CollisionalParams& p) {
  const int n = gap + 1;
  const DensityMatrix block = joint_block_state(n, temperature, p);
  std::vector<int> dims(n, 2);
  return detail::mutual_info_of(partial_trace(block.matrix(), dims, {0, n - 1}));
}

/// Conditional outcome probabilities P(x_i | x_{i-1}, T) from consecutive ancillae.
struct Markov1Table {
  double p1_marginal = 0.0;  // P(x = 1)
  std::array<double, 2> p1_given{};  // P(x_i = 1 | x_{i-1})
};

inline Markov1Table markov1_table(double temperature, const CollisionalParams& p) {
  const ComplexMatrix r = ancilla_pair_state(1, temperature, p).matrix();
  Markov1Table t;
  for (int prev = 0; prev < 2; ++prev) {
    const double j0 = std::max(0.0, r(2 * prev, 2 * prev).real());
    const double j1 = std::max(0.0, r(2 * prev + 1, 2 * prev + 1).real());
    if (j0 + j1 < 1e-14) throw NumericalError("markov1: degenerate conditioning outcome");
    t.p1_given[prev] = j1 / (j0 + j1);
  }
  t.p1_marginal = std::clamp((r(1, 1) + r(3, 3)).real(), 0.0, 1.0);
  return t;
}

inline double markov1_likelihood(int x, int x_prev, double temperature, const CollisionalParams& p) {
  if ((x != 0 && x != 1) || (x_prev != 0 && x_prev != 1))
    throw DomainError("markov1_likelihood: outcomes must be 0 or 1");
  const double p1 = markov1_table(temperature, p).p1_given[x_prev];
  return x == 1 ? p1 : 1.0 - p1;
}

}  // namespace qestlab
