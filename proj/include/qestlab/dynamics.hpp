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

#include "qestlab/qcore.hpp"

#include <functional>
#include <string>
#include <utility>
#include <vector>

namespace qestlab {

/// One GKLS dissipator rate * D[op].
struct JumpChannel {
  double rate = 0.0;
  ComplexMatrix op;
};

struct TimeDepHamiltonian {
  Eigen::Index dim = 0;
  std::function<ComplexMatrix(double)> eval;

  static TimeDepHamiltonian constant(const ComplexMatrix& h) {
    return {h.rows(), [h](double) { return h; }};
  }
};

struct EvolutionConfig {
  double t0 = 0.0;
  double t1 = 0.0;
  double dt = 1e-3;
  bool adaptive = false;
  double tol = 1e-10;  // local error per step, max-abs entry norm
};

/// L rho L^dag - 1/2 {L^dag L, rho}
inline ComplexMatrix dissipator(const ComplexMatrix& l, const ComplexMatrix& rho) {
  if (l.rows() != rho.rows() || l.cols() != rho.cols()) throw DomainError("dissipator: dims");
  const ComplexMatrix ldl = l.adjoint() * l;
  return l * rho * l.adjoint() - 0.5 * (ldl * rho + rho * ldl);
}

inline ComplexMatrix dissipator(const ComplexMatrix& l, const DensityMatrix& rho) {
  return dissipator(l, rho.matrix());
}

/// Vectorized generator under column stacking: vec(drho/dt) = L vec(rho).
inline ComplexMatrix liouvillian_matrix(const ComplexMatrix& h,
                                        const std::vector<JumpChannel>& channels) {
  const Eigen::Index d = h.rows();
  if (h.cols() != d) throw DomainError("liouvillian_matrix: H not square");
  const ComplexMatrix id = ComplexMatrix::Identity(d, d);
  ComplexMatrix out = -I_UNIT * (tensor_product(id, h) - tensor_product(h.transpose(), id));
  for (const auto& ch : channels) {
    if (ch.rate < 0.0) throw DomainError("liouvillian_matrix: negative rate");
    if (ch.op.rows() != d || ch.op.cols() != d) throw DomainError("liouvillian_matrix: op dims");
    const ComplexMatrix ldl = ch.op.adjoint() * ch.op;
    out += ch.rate * (tensor_product(ch.op.conjugate(), ch.op) - 0.5 * tensor_product(id, ldl) -
                      0.5 * tensor_product(ldl.transpose(), id));
  }
  return out;
}

/// Right-hand side of the GKLS equation with precomputed channel products.
/// Mat may be a fixed-size Eigen type for small systems.
template <class Mat>
class GklsGenerator {
 public:
  GklsGenerator(std::function<Mat(double)> h, const std::vector<JumpChannel>& channels)
      : h_(std::move(h)) {
    for (const auto& ch : channels) {
      if (ch.rate < 0.0) throw DomainError("GklsGenerator: negative rate");
      if (ch.rate == 0.0) continue;
      Mat l = ch.op;
      chans_.push_back({ch.rate, l, l.adjoint(), 0.5 * l.adjoint() * l});
    }
  }

  Mat operator()(double t, const Mat& rho) const {
    const Mat h = h_(t);
    Mat hr = h * rho;
    Mat out = cplx(0.0, -1.0) * (hr - hr.adjoint());
    for (const auto& c : chans_) {
      Mat k = c.half_ldl * rho;
      out += c.rate * (c.l * rho * c.ldag - k - k.adjoint());
    }
    return out;
  }

 private:
  struct Chan {
    double rate;
    Mat l, ldag, half_ldl;
  };
  std::function<Mat(double)> h_;
  std::vector<Chan> chans_;
};

/// One classical RK4 step.
template <class Mat, class Rhs>
Mat rk4_step(const Rhs& f, double t, const Mat& y, double h) {
  const Mat k1 = f(t, y);
  const Mat k2 = f(t + 0.5 * h, y + (0.5 * h) * k1);
  const Mat k3 = f(t + 0.5 * h, y + (0.5 * h) * k2);
  const Mat k4 = f(t + h, y + h * k3);
  return y + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

/// Fixed-step RK4 over [t0, t1] with ceil((t1-t0)/dt) equal steps.
template <class Mat, class Rhs>
Mat rk4_integrate(const Rhs& f, Mat y, double t0, double t1, double dt) {
  if (t1 < t0) throw DomainError("rk4_integrate: t1 < t0");
  if (!(dt > 0.0)) throw DomainError("rk4_integrate: dt must be > 0");
  if (t1 == t0) return y;
  const auto n = static_cast<long long>(std::ceil((t1 - t0) / dt - 1e-9));
  const double h = (t1 - t0) / static_cast<double>(std::max<long long>(n, 1));
  for (long long i = 0; i < std::max<long long>(n, 1); ++i)
    y = rk4_step(f, t0 + static_cast<double>(i) * h, y, h);
  return y;
}

/// RK4 with step doubling; local error estimate |y_2half - y_full|/15.
template <class Mat, class Rhs>
Mat rk4_adaptive(const Rhs& f, Mat y, double t0, double t1, double dt, double tol) {
  if (t1 < t0) throw DomainError("rk4_adaptive: t1 < t0");
  if (!(dt > 0.0) || !(tol > 0.0)) throw DomainError("rk4_adaptive: dt and tol must be > 0");
  double t = t0;
  double h = std::min(dt, t1 - t0);
  const double hmin = 1e-13 * std::max(1.0, std::abs(t1 - t0));
  while (t < t1) {
    if (t + h > t1) h = t1 - t;
    const Mat full = rk4_step(f, t, y, h);
    const Mat half = rk4_step(f, t + 0.5 * h, rk4_step(f, t, y, 0.5 * h), 0.5 * h);
    const double err = (half - full).cwiseAbs().maxCoeff() / 15.0;
    if (!std::isfinite(err)) throw NumericalError("rk4_adaptive: non-finite state");
    if (err <= tol) {
      t += h;
      y = half + (half - full) / 15.0;
    }
    const double fac = err > 0.0 ? 0.9 * std::pow(tol / err, 0.2) : 4.0;
    h *= std::clamp(fac, 0.2, 4.0);
    if (t < t1 && h < hmin) throw NumericalError("rk4_adaptive: step size underflow");
  }
  return y;
}

/// Integrates the GKLS equation from cfg.t0 to cfg.t1. The trace is checked
/// for drift and renormalized once at the end.
inline DensityMatrix evolve(const DensityMatrix& rho0, const TimeDepHamiltonian& h,
                            const std::vector<JumpChannel>& channels, const EvolutionConfig& cfg) {
  if (!(cfg.t1 >= cfg.t0)) throw DomainError("evolve: t1 < t0");
  if (!(cfg.dt > 0.0)) throw DomainError("evolve: dt must be > 0");
  if (h.dim != rho0.dim()) throw DomainError("evolve: Hamiltonian dimension mismatch");
  for (const auto& ch : channels)
    if (ch.op.rows() != rho0.dim()) throw DomainError("evolve: jump operator dimension mismatch");
  GklsGenerator<ComplexMatrix> gen(h.eval, channels);
  ComplexMatrix y = cfg.adaptive ? rk4_adaptive(gen, rho0.matrix(), cfg.t0, cfg.t1, cfg.dt, cfg.tol)
                                 : rk4_integrate(gen, rho0.matrix(), cfg.t0, cfg.t1, cfg.dt);
  if (!y.allFinite()) throw NumericalError("evolve: NaN or Inf in state");
  const double drift = std::abs(y.trace() - cplx(1.0));
  if (drift > 1e-8) throw NumericalError("evolve: trace drift " + std::to_string(drift));
  return DensityMatrix::repaired(y);
}

/// Default step: min(1/(50 max frequency), width/200).
inline double default_step(double max_frequency, double width) {
  double dt = width / 200.0;
  if (max_frequency > 0.0) dt = std::min(dt, 1.0 / (50.0 * max_frequency));
  return dt;
}

}  // namespace qestlab
