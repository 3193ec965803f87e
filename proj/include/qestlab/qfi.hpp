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
#include <vector>

namespace qestlab {

/// One-parameter family of states.
struct ParamStateFamily {
  std::function<DensityMatrix(double)> eval;
  std::function<ComplexMatrix(double)> deriv;  // optional; finite differences otherwise
  double h = 0.0;                              // 0 selects 1e-5 * max(1, |theta|)
};

inline double default_fd_step(double theta) { return 1e-5 * std::max(1.0, std::abs(theta)); }

inline ComplexMatrix state_derivative(const ParamStateFamily& fam, double theta) {
  if (fam.deriv) return fam.deriv(theta);
  const double h = fam.h > 0.0 ? fam.h : default_fd_step(theta);
  return (fam.eval(theta + h).matrix() - fam.eval(theta - h).matrix()) / (2.0 * h);
}

namespace detail {

struct SldSystem {
  Eigen::FullPivLU<ComplexMatrix> lu;
  ComplexVector rhs;  // vec(d rho)
  Eigen::Index d;
};

inline SldSystem sld_system(const ParamStateFamily& fam, double theta, double nu) {
  if (nu < 0.0 || nu >= 1.0) throw DomainError("sld: regularizer must lie in [0, 1)");
  ComplexMatrix rho = fam.eval(theta).matrix();
  ComplexMatrix drho = state_derivative(fam, theta);
  const Eigen::Index d = rho.rows();
  const ComplexMatrix id = ComplexMatrix::Identity(d, d);
  if (nu > 0.0) {
    rho = (1.0 - nu) * rho + nu * id / static_cast<double>(d);
    drho *= (1.0 - nu);
  } else {
    Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(rho, Eigen::EigenvaluesOnly);
    if (2.0 * es.eigenvalues().minCoeff() < 1e-12)
      throw NumericalError("sld: singular system, needs regularization (nu > 0)");
  }
  const ComplexMatrix m = tensor_product(rho.transpose(), id) + tensor_product(id, rho);
  return {Eigen::FullPivLU<ComplexMatrix>(m), vectorize(drho), d};
}

}  // namespace detail

/// Symmetric logarithmic derivative solving L rho + rho L = 2 d rho.
inline ComplexMatrix sld(const ParamStateFamily& fam, double theta, double nu = 0.0) {
  auto sys = detail::sld_system(fam, theta, nu);
  const ComplexVector x = sys.lu.solve(2.0 * sys.rhs);
  const ComplexMatrix l = unvectorize(x, sys.d, sys.d);
  return 0.5 * (l + l.adjoint());
}

/// 2 vec(d rho)^dag (rho^T kron I + I kron rho)^{-1} vec(d rho).
inline double qfi(const ParamStateFamily& fam, double theta, double nu = 0.0) {
  auto sys = detail::sld_system(fam, theta, nu);
  const ComplexVector x = sys.lu.solve(sys.rhs);
  return std::max(0.0, 2.0 * sys.rhs.dot(x).real());
}

/// Pure-state limit: Richardson extrapolation of qfi at nu = 1e-4 and 5e-5.
inline double qfi_pure_limit(const ParamStateFamily& fam, double theta) {
  return 2.0 * qfi(fam, theta, 5e-5) - qfi(fam, theta, 1e-4);
}

/// Rank-1 projectors onto the eigenvectors of a Hermitian operator.
inline std::vector<ComplexMatrix> optimal_povm(const ComplexMatrix& sld_op) {
  if ((sld_op - sld_op.adjoint()).cwiseAbs().maxCoeff() > 1e-8)
    throw DomainError("optimal_povm: operator not Hermitian");
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(0.5 * (sld_op + sld_op.adjoint()));
  std::vector<ComplexMatrix> out;
  for (Eigen::Index k = 0; k < sld_op.rows(); ++k) {
    const ComplexVector v = es.eigenvectors().col(k);
    out.push_back(v * v.adjoint());
  }
  return out;
}

/// Finite outcome distribution depending on one parameter.
struct Pmf {
  int n_outcomes = 0;
  std::function<double(int, double)> prob;

  std::vector<double> at(double theta) const {
    std::vector<double> p(n_outcomes);
    for (int x = 0; x < n_outcomes; ++x) p[x] = prob(x, theta);
    return p;
  }
};

inline Pmf bernoulli_pmf() {
  return {2, [](int x, double t) { return x == 1 ? t : 1.0 - t; }};
}

/// Born-rule distribution of a POVM on a state family.
inline Pmf born_pmf(const ParamStateFamily& fam, std::vector<ComplexMatrix> povm) {
  const int n = static_cast<int>(povm.size());
  return {n, [fam, povm = std::move(povm)](int x, double t) {
            return (povm[x] * fam.eval(t).matrix()).trace().real();
          }};
}

/// sum_x (d_theta p)^2 / p with central differences; outcomes with p < 1e-14 omitted.
inline double classical_fi(const Pmf& pmf, double theta, double h = 0.0) {
  if (!(h > 0.0)) h = default_fd_step(theta);
  double f = 0.0;
  for (int x = 0; x < pmf.n_outcomes; ++x) {
    const double p = pmf.prob(x, theta);
    const double pp = pmf.prob(x, theta + h);
    const double pm = pmf.prob(x, theta - h);
    if (p < -1e-14 || pp < -1e-14 || pm < -1e-14)
      throw DomainError("classical_fi: negative probability");
    if (p < 1e-14) continue;
    const double dp = (pp - pm) / (2.0 * h);
    f += dp * dp / p;
  }
  return f;
}

/// (<H^2> - <H>^2) / T^4 under exp(-H/T)/Z.
inline double thermal_fi(const ComplexMatrix& h, double temperature) {
  if (!(temperature > 0.0)) throw DomainError("thermal_fi: temperature must be > 0");
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(0.5 * (h + h.adjoint()), Eigen::EigenvaluesOnly);
  const Eigen::ArrayXd e = es.eigenvalues().array();
  Eigen::ArrayXd w = (-(e - e.minCoeff()) / temperature).exp();
  w /= w.sum();
  const double m1 = (w * e).sum();
  const double var = (w * (e - m1).square()).sum();
  return var / std::pow(temperature, 4);
}

inline double kl_divergence(const std::vector<double>& p, const std::vector<double>& q) {
  if (p.size() != q.size()) throw DomainError("kl_divergence: size mismatch");
  double s = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (p[i] <= 0.0) continue;
    if (q[i] <= 0.0) throw DomainError("kl_divergence: q = 0 where p > 0");
    s += p[i] * std::log(p[i] / q[i]);
  }
  return std::max(0.0, s);
}

inline double kl_divergence(const Pmf& pmf, double theta0, double theta) {
  return kl_divergence(pmf.at(theta0), pmf.at(theta));
}

}  // namespace qestlab
