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

// Holonomic gates in a dissipative Lambda system. Single ion basis is
// (|0>, |1>, |e>, |g>); two ions use index 4*a + b.

#pragma once

#include "qestlab/dynamics.hpp"
#include "qestlab/parallel.hpp"
#include "qestlab/qcore.hpp"

#include <boost/math/quadrature/gauss.hpp>

#include <array>
#include <cmath>
#include <functional>
#include <numbers>
#include <vector>

namespace qestlab {

namespace lvl {
inline constexpr int k0 = 0, k1 = 1, ke = 2, kg = 3;
}

struct LoopSpec {
  double theta = 0.0;
  double phi = 0.0;
};

enum class PhaseOrigin { PulseCenter, GlobalClock };

struct GateProgram {
  std::vector<LoopSpec> loops;
  double beta = 1.0;
  double spacing = -1.0;  // < 0 selects 10/beta
  double f_e0 = 0.0;
  double f_e1 = 0.0;
  double gamma = 0.0;
  bool rwa = true;
  PhaseOrigin origin = PhaseOrigin::PulseCenter;
  double window = 20.0;  // half width of each pulse window in units of 1/beta
  double dt = 0.0;       // 0 selects the default step rule

  void validate() const {
    if (loops.empty() || loops.size() > 2) throw DomainError("GateProgram: need 1 or 2 loops");
    if (!(beta > 0.0) || !std::isfinite(beta)) throw DomainError("GateProgram: beta must be > 0");
    if (f_e0 < 0.0 || f_e1 < 0.0) throw DomainError("GateProgram: frequencies must be >= 0");
    if (gamma < 0.0) throw DomainError("GateProgram: gamma must be >= 0");
    if (!(window > 0.0)) throw DomainError("GateProgram: window must be > 0");
    if (dt < 0.0) throw DomainError("GateProgram: dt must be >= 0");
  }

  double spacing_time() const { return spacing < 0.0 ? 10.0 / beta : spacing; }
  double half_window() const { return window / beta; }

  /// min(1/(50 f_max), (1/beta)/200); counter-rotating frequencies only
  /// enter when they are simulated.
  double step() const {
    if (dt > 0.0) return dt;
    double fmax = std::max(gamma, beta);
    if (!rwa) fmax = std::max({fmax, f_e0, f_e1});
    return default_step(fmax, 1.0 / beta);
  }
};

/// Omega(t) = beta sech(beta t); unit area pi.
inline double pulse_envelope(double t, double beta) { return beta / std::cosh(beta * t); }

/// Area of the envelope over [-half_width, half_width].
inline double pulse_area(double beta, double half_width) {
  return 4.0 * std::atan(std::tanh(beta * half_width / 2.0));
}

using Unitary2 = Eigen::Matrix2cd;

inline Unitary2 loop_unitary(const LoopSpec& l) {
  const double c = std::cos(l.theta), s = std::sin(l.theta);
  Unitary2 u;
  u << c, s * std::polar(1.0, -l.phi), s * std::polar(1.0, l.phi), -c;
  return u;
}

/// n.sigma for one loop; U(C_m) U(C_n) for two loops (n first).
inline Unitary2 ideal_gate(const std::vector<LoopSpec>& loops) {
  if (loops.empty() || loops.size() > 2) throw DomainError("ideal_gate: need 1 or 2 loops");
  Unitary2 u = loop_unitary(loops[0]);
  if (loops.size() == 2) u = loop_unitary(loops[1]) * u;
  return u;
}

namespace gates {
inline std::vector<LoopSpec> hadamard() { return {{PI / 4.0, 0.0}}; }
inline std::vector<LoopSpec> x() { return {{PI / 2.0, 0.0}}; }
inline std::vector<LoopSpec> z() { return {{0.0, 0.0}}; }
/// Phase gate from two equatorial loops (phi, phi') = (pi/4, pi/2).
inline std::vector<LoopSpec> s() { return {{PI / 2.0, PI / 4.0}, {PI / 2.0, PI / 2.0}}; }
/// Loops (pi/2, pi/2) then (0, pi/4); evaluates to -i sigma_x.
inline std::vector<LoopSpec> s_alt() { return {{PI / 2.0, PI / 2.0}, {0.0, PI / 4.0}}; }
inline Unitary2 s_matrix() { return (Unitary2() << 1, 0, 0, I_UNIT).finished(); }
}  // namespace gates

/// |<a|b>|^2-type comparison of unitaries up to a global phase.
inline double phase_insensitive_overlap(const Unitary2& a, const Unitary2& b) {
  return std::abs((a.adjoint() * b).trace()) / 2.0;
}

/// Relative coupling amplitudes (omega_0, omega_1).
inline std::array<cplx, 2> loop_amplitudes(const LoopSpec& l) {
  return {std::sin(l.theta / 2.0) * std::polar(1.0, l.phi), cplx(-std::cos(l.theta / 2.0))};
}

namespace detail {

/// H(t) = sum_k f_k(t) |r_k><c_k| + h.c. with r_k != c_k.
struct CouplingTerm {
  int r, c;
};

struct SparseOp {
  std::vector<std::tuple<int, int, cplx>> entries;
};

/// GKLS right-hand side for Hamiltonians made of off-diagonal couplings and
/// sparse jump operators. Works on non-Hermitian operators too, so basis
/// elements |i><j| can be propagated.
template <class Mat>
class SparseGkls {
 public:
  using Coeffs = std::function<void(double, std::vector<cplx>&)>;

  SparseGkls(std::vector<CouplingTerm> terms, Coeffs coeffs, std::vector<std::pair<double, SparseOp>> jumps)
      : terms_(std::move(terms)), coeffs_(std::move(coeffs)) {
    for (auto& [rate, op] : jumps) {
      if (rate < 0.0) throw DomainError("SparseGkls: negative rate");
      if (rate == 0.0) continue;
      Jump j{rate, op, {}};
      for (auto& [r1, c1, v1] : op.entries)
        for (auto& [r2, c2, v2] : op.entries)
          if (r1 == r2) j.ldl.entries.emplace_back(c1, c2, std::conj(v1) * v2);
      jumps_.push_back(std::move(j));
    }
    f_.resize(terms_.size());
  }

  Mat operator()(double t, const Mat& rho) const {
    coeffs_(t, f_);
    Mat hr = Mat::Zero(rho.rows(), rho.cols());  // H rho - rho H
    for (std::size_t k = 0; k < terms_.size(); ++k) {
      const int r = terms_[k].r, c = terms_[k].c;
      const cplx f = f_[k], fc = std::conj(f);
      if (f == cplx(0.0)) continue;
      hr.row(r) += f * rho.row(c);
      hr.row(c) += fc * rho.row(r);
      hr.col(c) -= f * rho.col(r);
      hr.col(r) -= fc * rho.col(c);
    }
    Mat out = cplx(0.0, -1.0) * hr;
    for (const auto& j : jumps_) {
      for (auto& [r1, c1, v1] : j.l.entries)
        for (auto& [r2, c2, v2] : j.l.entries) out(r1, r2) += j.rate * v1 * std::conj(v2) * rho(c1, c2);
      for (auto& [a, b, v] : j.ldl.entries) {
        out.row(a) -= 0.5 * j.rate * v * rho.row(b);
        out.col(b) -= 0.5 * j.rate * v * rho.col(a);
      }
    }
    return out;
  }

 private:
  struct Jump {
    double rate;
    SparseOp l;
    SparseOp ldl;
  };
  std::vector<CouplingTerm> terms_;
  Coeffs coeffs_;
  std::vector<Jump> jumps_;
  mutable std::vector<cplx> f_;
};

inline SparseOp single_decay() { return {{{lvl::kg, lvl::ke, cplx(1.0)}}}; }

/// (1 + e^{-2 i f t}) or 1 under the RWA.
inline cplx counter_factor(double f, double t, bool rwa) {
  return rwa ? cplx(1.0) : cplx(1.0) + std::polar(1.0, -2.0 * f * t);
}

/// Start time of loop k on the program clock (0 = start of first window).
inline double loop_start(const GateProgram& p, std::size_t k) {
  return static_cast<double>(k) * (2.0 * p.half_window() + p.spacing_time());
}

inline double phase_time(const GateProgram& p, std::size_t k, double t_local) {
  return p.origin == PhaseOrigin::PulseCenter ? t_local : loop_start(p, k) + p.half_window() + t_local;
}

}  // namespace detail

/// Interaction-picture Hamiltonian of loop `loop_index` at pulse-local time
/// t (t = 0 at the pulse centre).
inline ComplexMatrix lambda_hamiltonian(double t, const GateProgram& prog, std::size_t loop_index) {
  if (loop_index >= prog.loops.size()) throw DomainError("lambda_hamiltonian: loop index out of range");
  const auto w = loop_amplitudes(prog.loops[loop_index]);
  const double tp = detail::phase_time(prog, loop_index, t);
  const double om = pulse_envelope(t, prog.beta);
  ComplexMatrix h = ComplexMatrix::Zero(4, 4);
  h(lvl::ke, lvl::k0) = om * w[0] * detail::counter_factor(prog.f_e0, tp, prog.rwa);
  h(lvl::ke, lvl::k1) = om * w[1] * detail::counter_factor(prog.f_e1, tp, prog.rwa);
  h(lvl::k0, lvl::ke) = std::conj(h(lvl::ke, lvl::k0));
  h(lvl::k1, lvl::ke) = std::conj(h(lvl::ke, lvl::k1));
  return h;
}

/// Basis change to (|b>, |d>, |e>, |g>) for a loop.
inline ComplexMatrix bright_dark_basis(const LoopSpec& l) {
  const auto w = loop_amplitudes(l);
  ComplexMatrix v = ComplexMatrix::Zero(4, 4);  // columns are the new basis kets
  v(lvl::k0, 0) = std::conj(w[0]);
  v(lvl::k1, 0) = std::conj(w[1]);
  v(lvl::k0, 1) = -w[1];
  v(lvl::k1, 1) = w[0];
  v(lvl::ke, 2) = 1.0;
  v(lvl::kg, 3) = 1.0;
  return v;
}

namespace detail {

using Mat4 = Eigen::Matrix4cd;

inline SparseGkls<Mat4> loop_generator(const GateProgram& p, std::size_t k) {
  const auto w = loop_amplitudes(p.loops[k]);
  auto coeffs = [p, k, w](double t, std::vector<cplx>& f) {
    const double om = pulse_envelope(t, p.beta);
    const double tp = phase_time(p, k, t);
    f[0] = om * w[0] * counter_factor(p.f_e0, tp, p.rwa);
    f[1] = om * w[1] * counter_factor(p.f_e1, tp, p.rwa);
  };
  return SparseGkls<Mat4>({{lvl::ke, lvl::k0}, {lvl::ke, lvl::k1}}, coeffs, {{p.gamma, single_decay()}});
}

/// Idle period with decay only: exact superoperator exponential.
template <class Mat>
Mat idle(const Mat& rho, const ComplexMatrix& sup) {
  const ComplexMatrix r = rho;
  return unvectorize(sup * vectorize(r), rho.rows(), rho.cols());
}

/// Runs the full program on a batch of operators.
template <class Mat>
std::vector<Mat> run_program(const GateProgram& p, std::vector<Mat> ops) {
  p.validate();
  const double w = p.half_window(), dt = p.step();
  ComplexMatrix idle_sup;
  if (p.loops.size() > 1 && p.spacing_time() > 0.0 && p.gamma > 0.0) {
    const std::vector<JumpChannel> ch{{p.gamma, outer(4, lvl::kg, lvl::ke)}};
    idle_sup = matrix_exponential(liouvillian_matrix(ComplexMatrix::Zero(4, 4), ch) * p.spacing_time());
  }
  for (std::size_t k = 0; k < p.loops.size(); ++k) {
    if (k > 0 && idle_sup.size() > 0)
      for (auto& m : ops) m = idle(m, idle_sup);
    const auto gen = loop_generator(p, k);
    for (auto& m : ops) m = rk4_integrate(gen, m, -w, w, dt);
  }
  return ops;
}

}  // namespace detail

/// Final 4-level state for a qubit input.
inline DensityMatrix simulate_gate(const GateProgram& prog, const Ket& input) {
  if (input.dim() != 2) throw DomainError("simulate_gate: input must be a qubit ket");
  detail::Mat4 rho = detail::Mat4::Zero();
  rho.topLeftCorner<2, 2>() = input.projector();
  const detail::Mat4 out = detail::run_program(prog, std::vector<detail::Mat4>{rho})[0];
  if (!out.allFinite()) throw NumericalError("simulate_gate: non-finite state");
  const double drift = std::abs(out.trace() - cplx(1.0));
  if (drift > 1e-8) throw NumericalError("simulate_gate: trace drift " + std::to_string(drift));
  return DensityMatrix::repaired(out);
}

inline Ket embed_qubit(const Ket& q) {
  ComplexVector v = ComplexVector::Zero(4);
  v.head<2>() = q.amplitudes();
  return Ket(v);
}

inline double gate_infidelity(const GateProgram& prog, const Ket& input) {
  const Ket target = embed_qubit(Ket(ideal_gate(prog.loops) * input.amplitudes()));
  return std::clamp(1.0 - fidelity(simulate_gate(prog, input), target), 0.0, 1.0);
}

/// Linear map of the program on the qubit block: images of |i><j|, i, j in {0, 1}.
struct GateMap {
  std::array<detail::Mat4, 4> images;  // index i + 2 j

  static GateMap compute(const GateProgram& prog) {
    std::vector<detail::Mat4> ops;
    for (int j = 0; j < 2; ++j)
      for (int i = 0; i < 2; ++i) {
        detail::Mat4 m = detail::Mat4::Zero();
        m(i, j) = 1.0;
        ops.push_back(m);
      }
    const auto out = detail::run_program(prog, ops);
    GateMap g;
    for (int k = 0; k < 4; ++k) g.images[k] = out[k];
    return g;
  }

  detail::Mat4 apply(const Ket& q) const {
    detail::Mat4 r = detail::Mat4::Zero();
    for (int j = 0; j < 2; ++j)
      for (int i = 0; i < 2; ++i) r += q[i] * std::conj(q[j]) * images[i + 2 * j];
    return r;
  }
};

/// Points of the Fibonacci lattice mapped to qubit kets.
inline std::vector<Ket> fibonacci_states(int n) {
  if (n < 2) throw DomainError("fibonacci_states: n must be >= 2");
  const double golden = std::numbers::phi;
  std::vector<Ket> out;
  for (int k = 1; k <= n; ++k) {
    const double z = 1.0 - 2.0 * (k - 1) / static_cast<double>(n - 1);
    const double az = std::fmod(2.0 * PI * golden * k, 2.0 * PI);
    out.push_back(bloch_ket(std::acos(std::clamp(z, -1.0, 1.0)), az));
  }
  return out;
}

struct InfidelityStats {
  double mean = 0.0, max = 0.0, min = 0.0;
};

inline InfidelityStats average_infidelity(const GateProgram& prog, int n_states) {
  const GateMap g = GateMap::compute(prog);
  const Unitary2 u = ideal_gate(prog.loops);
  const auto states = fibonacci_states(n_states);
  InfidelityStats s{0.0, 0.0, 1.0};
  for (const auto& k : states) {
    const detail::Mat4 r = g.apply(k);
    const Eigen::Vector2cd t = u * k.amplitudes();
    const double f = (t.adjoint() * r.topLeftCorner<2, 2>() * t)(0, 0).real() / r.trace().real();
    const double inf = std::clamp(1.0 - f, 0.0, 1.0);
    s.mean += inf;
    s.max = std::max(s.max, inf);
    s.min = std::min(s.min, inf);
  }
  s.mean /= static_cast<double>(states.size());
  return s;
}

/// Sphere average of 1 - |<psi|U|psi>|^2: Gauss-Legendre in cos(alpha),
/// uniform azimuth.
inline double asymptotic_infidelity(const Unitary2& u) {
  if ((u.adjoint() * u - Unitary2::Identity()).cwiseAbs().maxCoeff() > 1e-8)
    throw DomainError("asymptotic_infidelity: input not unitary");
  constexpr int kAz = 64;
  auto overlap = [&](double z) {
    double s = 0.0;
    for (int j = 0; j < kAz; ++j) {
      const Ket k = bloch_ket(std::acos(z), 2.0 * PI * j / kAz);
      s += std::norm(k.amplitudes().dot(u * k.amplitudes()));
    }
    return s / kAz;
  };
  const double mean = boost::math::quadrature::gauss<double, 30>::integrate(overlap, -1.0, 1.0) / 2.0;
  return 1.0 - mean;
}

struct BetaScan {
  std::vector<double> beta_over_f;
  std::vector<double> mean_infidelity;
};

struct OptimalBeta {
  double beta_opt = 0.0;  // in units of f
  double infidelity_min = 0.0;
  bool on_boundary = false;
  BetaScan scan;
};

/// Mean infidelity over `n_states` Fibonacci inputs for each beta/f value.
/// The template's f_e0 and f_e1 are treated as ratios to f = f_e0.
inline BetaScan beta_scan(const GateProgram& tmpl, double gamma_over_f, const std::vector<double>& grid,
                          int n_states = 100, int workers = 1) {
  const double f = tmpl.f_e0 > 0.0 ? tmpl.f_e0 : 1.0;
  auto vals = parallel_map(grid.size(), workers, [&](std::size_t i) {
    GateProgram p = tmpl;
    p.beta = grid[i] * f;
    p.gamma = gamma_over_f * f;
    if (tmpl.spacing >= 0.0) p.spacing = tmpl.spacing * tmpl.beta / p.beta;
    return average_infidelity(p, n_states).mean;
  });
  return {grid, vals};
}

/// Minimum of fn over a grid, refined by golden-section search in the
/// bracket around the best grid point. A boundary minimum is flagged and not
/// refined.
inline OptimalBeta minimize_on_grid(const std::vector<double>& grid, const std::function<double(double)>& fn,
                                    int workers = 1, double rel_tol = 1e-3) {
  if (grid.size() < 3) throw DomainError("minimize_on_grid: need at least 3 grid points");
  OptimalBeta out;
  out.scan.beta_over_f = grid;
  out.scan.mean_infidelity = parallel_map(grid.size(), workers, [&](std::size_t i) { return fn(grid[i]); });
  const auto& v = out.scan.mean_infidelity;
  const std::size_t i = std::min_element(v.begin(), v.end()) - v.begin();
  out.beta_opt = grid[i];
  out.infidelity_min = v[i];
  if (i == 0 || i + 1 == grid.size()) {
    out.on_boundary = true;
    return out;
  }
  const double g = (std::sqrt(5.0) - 1.0) / 2.0;
  double a = grid[i - 1], b = grid[i + 1];
  double c = b - g * (b - a), d = a + g * (b - a);
  double fc = fn(c), fd = fn(d);
  while ((b - a) > rel_tol * (a + b) / 2.0) {
    if (fc < fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - g * (b - a);
      fc = fn(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + g * (b - a);
      fd = fn(d);
    }
  }
  const double x = (a + b) / 2.0, fx = fn(x);
  if (fx < out.infidelity_min) {
    out.beta_opt = x;
    out.infidelity_min = fx;
  }
  return out;
}

/// Optimal beta/f of the mean single-qubit infidelity.
inline OptimalBeta optimal_beta(const GateProgram& tmpl, double gamma_over_f, const std::vector<double>& grid,
                                int n_states = 100, int workers = 1, double rel_tol = 1e-3) {
  auto fn = [&](double b) { return beta_scan(tmpl, gamma_over_f, {b}, n_states, 1).mean_infidelity[0]; };
  return minimize_on_grid(grid, fn, workers, rel_tol);
}

// Two ions --------------------------------------------------------------

struct TwoQubitConfig {
  double theta = 0.0;
  double phi = 0.0;
  double beta = 1.0;
  double f_e0 = 0.0;
  double f_e1 = 0.0;
  double gamma1 = 0.0;
  double gamma2 = 0.0;
  bool rwa = true;
  bool include_h1 = false;
  double window = 20.0;
  double dt = 0.0;

  void validate() const {
    if (!(beta > 0.0)) throw DomainError("TwoQubitConfig: beta must be > 0");
    if (f_e0 < 0.0 || f_e1 < 0.0) throw DomainError("TwoQubitConfig: frequencies must be >= 0");
    if (gamma1 < 0.0 || gamma2 < 0.0) throw DomainError("TwoQubitConfig: rates must be >= 0");
    if (!(window > 0.0) || dt < 0.0) throw DomainError("TwoQubitConfig: bad window or dt");
  }

  double step() const {
    if (dt > 0.0) return dt;
    double fmax = std::max({gamma1, gamma2, beta});
    if (!rwa) fmax = std::max({fmax, f_e0, f_e1});
    return default_step(fmax, 1.0 / beta);
  }
};

inline int two_index(int a, int b) { return 4 * a + b; }

namespace detail {

using Mat16 = Eigen::Matrix<cplx, 16, 16>;

inline std::vector<CouplingTerm> two_qubit_terms() {
  using namespace lvl;
  return {{two_index(ke, ke), two_index(k0, k0)},
          {two_index(ke, ke), two_index(k1, k1)},
          {two_index(ke, k0), two_index(k0, ke)},
          {two_index(ke, k1), two_index(k1, ke)}};
}

inline void two_qubit_coeffs(const TwoQubitConfig& c, double t, std::vector<cplx>& f) {
  const double om = pulse_envelope(t, c.beta);
  const double s = std::sin(c.theta / 2.0), co = std::cos(c.theta / 2.0);
  const cplx a0 = counter_factor(c.f_e0, t, c.rwa), a1 = counter_factor(c.f_e1, t, c.rwa);
  f[0] = om * s * std::polar(1.0, c.phi / 2.0) * a0 * a0;
  f[1] = -om * co * std::polar(1.0, -c.phi / 2.0) * a1 * a1;
  if (c.include_h1) {
    const double b0 = c.rwa ? 1.0 : 4.0 * std::pow(std::cos(c.f_e0 * t), 2);
    const double b1 = c.rwa ? 1.0 : 4.0 * std::pow(std::cos(c.f_e1 * t), 2);
    f[2] = om * s * b0;
    f[3] = -om * co * b1;
  } else {
    f[2] = f[3] = 0.0;
  }
}

inline SparseOp two_qubit_decay(int ion) {
  SparseOp op;
  for (int k = 0; k < 4; ++k) {
    if (ion == 0) op.entries.emplace_back(two_index(lvl::kg, k), two_index(lvl::ke, k), 1.0);
    else op.entries.emplace_back(two_index(k, lvl::kg), two_index(k, lvl::ke), 1.0);
  }
  return op;
}

}  // namespace detail

/// Dense two-ion Hamiltonian at time t (pulse centre at t = 0).
inline ComplexMatrix two_qubit_hamiltonian(double t, const TwoQubitConfig& c) {
  std::vector<cplx> f(4);
  detail::two_qubit_coeffs(c, t, f);
  const auto terms = detail::two_qubit_terms();
  ComplexMatrix h = ComplexMatrix::Zero(16, 16);
  for (std::size_t k = 0; k < terms.size(); ++k) {
    h(terms[k].r, terms[k].c) += f[k];
    h(terms[k].c, terms[k].r) += std::conj(f[k]);
  }
  return h;
}

inline Ket two_qubit_ket(const Ket& a, const Ket& b) {
  ComplexVector v = ComplexVector::Zero(16);
  for (int i = 0; i < a.dim(); ++i)
    for (int j = 0; j < b.dim(); ++j) v(two_index(i, j)) = a[i] * b[j];
  return Ket(v);
}

inline DensityMatrix simulate_two_qubit(const TwoQubitConfig& cfg, const Ket& input) {
  cfg.validate();
  if (input.dim() != 16) throw DomainError("simulate_two_qubit: input must have dimension 16");
  auto coeffs = [cfg](double t, std::vector<cplx>& f) { detail::two_qubit_coeffs(cfg, t, f); };
  detail::SparseGkls<detail::Mat16> gen(
      detail::two_qubit_terms(), coeffs,
      {{cfg.gamma1, detail::two_qubit_decay(0)}, {cfg.gamma2, detail::two_qubit_decay(1)}});
  const double w = cfg.window / cfg.beta;
  const detail::Mat16 rho0 = input.projector();
  const detail::Mat16 out = rk4_integrate(gen, rho0, -w, w, cfg.step());
  if (!out.allFinite()) throw NumericalError("simulate_two_qubit: non-finite state");
  const double drift = std::abs(out.trace() - cplx(1.0));
  if (drift > 1e-8) throw NumericalError("simulate_two_qubit: trace drift " + std::to_string(drift));
  return DensityMatrix::repaired(out);
}

/// Ideal two-ion loop on the computational block: a qubit gate on
/// {|00>, |11>} that leaves |01>, |10> alone.
inline ComplexMatrix ideal_two_qubit_gate(double theta, double phi) {
  const Unitary2 u = loop_unitary({theta, phi});
  ComplexMatrix g = ComplexMatrix::Identity(16, 16);
  const int i00 = two_index(0, 0), i11 = two_index(1, 1);
  g(i00, i00) = u(0, 0);
  g(i00, i11) = u(0, 1);
  g(i11, i00) = u(1, 0);
  g(i11, i11) = u(1, 1);
  return g;
}

inline double two_qubit_infidelity(const TwoQubitConfig& cfg, const Ket& input) {
  const Ket target(ideal_two_qubit_gate(cfg.theta, cfg.phi) * input.amplitudes());
  return std::clamp(1.0 - fidelity(simulate_two_qubit(cfg, input), target), 0.0, 1.0);
}

/// Mean infidelity over |++>, |+->, |-+>, |-->.
inline double cz_average_infidelity(const TwoQubitConfig& cfg, int workers = 1) {
  const Ket plus = bloch_ket(PI / 2.0, 0.0), minus = bloch_ket(PI / 2.0, PI);
  const std::array<Ket, 4> ins{two_qubit_ket(plus, plus), two_qubit_ket(plus, minus),
                               two_qubit_ket(minus, plus), two_qubit_ket(minus, minus)};
  auto v = parallel_map(4, workers, [&](std::size_t i) { return two_qubit_infidelity(cfg, ins[i]); });
  return (v[0] + v[1] + v[2] + v[3]) / 4.0;
}

/// Optimal beta/f of the CZ-type gate averaged over |+-+-> inputs; the
/// template's f_e0 sets f.
inline OptimalBeta optimal_beta_two_qubit(const TwoQubitConfig& tmpl, double gamma_over_f,
                                          const std::vector<double>& grid, int workers = 1,
                                          double rel_tol = 1e-3) {
  const double f = tmpl.f_e0 > 0.0 ? tmpl.f_e0 : 1.0;
  auto fn = [&](double b) {
    TwoQubitConfig c = tmpl;
    c.beta = b * f;
    c.gamma1 = c.gamma2 = gamma_over_f * f;
    return cz_average_infidelity(c);
  };
  return minimize_on_grid(grid, fn, workers, rel_tol);
}

}  // namespace qestlab
