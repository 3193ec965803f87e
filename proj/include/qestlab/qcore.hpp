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

#include <Eigen/Dense>
#include <unsupported/Eigen/MatrixFunctions>

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>
#include <stdexcept>
#include <string>
#include <vector>

namespace qestlab {

using cplx = std::complex<double>;
using ComplexMatrix = Eigen::MatrixXcd;
using ComplexVector = Eigen::VectorXcd;

inline constexpr cplx I_UNIT{0.0, 1.0};
inline constexpr double PI = std::numbers::pi;

/// Raised when an input violates a documented precondition or invariant.
class DomainError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Raised when a numerical procedure cannot deliver its contract
/// (step underflow, NaN, non-convergence, singular system).
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline constexpr double kStateTol = 1e-10;

/// Normalized state vector.
class Ket {
 public:
  Ket() = default;
  explicit Ket(ComplexVector amps) : amps_(std::move(amps)) {
    if (amps_.size() < 1) throw DomainError("Ket: empty amplitude vector");
    const double n = amps_.norm();
    if (!(n > 0.0) || !std::isfinite(n)) throw DomainError("Ket: zero or non-finite norm");
    amps_ /= n;
  }

  Eigen::Index dim() const { return amps_.size(); }
  const ComplexVector& amplitudes() const { return amps_; }
  cplx operator[](Eigen::Index i) const { return amps_(i); }
  ComplexMatrix projector() const { return amps_ * amps_.adjoint(); }

 private:
  ComplexVector amps_;
};

/// Hermitian, unit-trace, positive semidefinite matrix.
class DensityMatrix {
 public:
  DensityMatrix() = default;

  /// Validates the invariants at kStateTol; throws DomainError otherwise.
  explicit DensityMatrix(ComplexMatrix m) : m_(std::move(m)) { validate(m_); }

  static DensityMatrix from_ket(const Ket& k) { return DensityMatrix(k.projector(), Unchecked{}); }

  /// Symmetrize, clip tiny negative eigenvalues and renormalize the trace.
  /// Intended for states produced by numerical integration.
  static DensityMatrix repaired(const ComplexMatrix& m) {
    if (m.rows() != m.cols() || m.rows() < 1) throw DomainError("DensityMatrix: not square");
    if (!m.allFinite()) throw NumericalError("DensityMatrix: non-finite entries");
    ComplexMatrix h = 0.5 * (m + m.adjoint());
    Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(h);
    Eigen::VectorXd ev = es.eigenvalues();
    if (ev.minCoeff() < 0.0) {
      if (ev.minCoeff() < -1e-6) throw NumericalError("DensityMatrix: strongly negative eigenvalue");
      ev = ev.cwiseMax(0.0);
      h = es.eigenvectors() * ev.cast<cplx>().asDiagonal() * es.eigenvectors().adjoint();
    }
    const double tr = h.trace().real();
    if (!(tr > 0.0)) throw NumericalError("DensityMatrix: non-positive trace");
    return DensityMatrix(h / tr, Unchecked{});
  }

  static DensityMatrix maximally_mixed(Eigen::Index d) {
    return DensityMatrix(ComplexMatrix::Identity(d, d) / static_cast<double>(d), Unchecked{});
  }

  static void validate(const ComplexMatrix& m) {
    if (m.rows() != m.cols() || m.rows() < 1) throw DomainError("DensityMatrix: not square");
    if (!m.allFinite()) throw DomainError("DensityMatrix: non-finite entries");
    if ((m - m.adjoint()).cwiseAbs().maxCoeff() > kStateTol)
      throw DomainError("DensityMatrix: not Hermitian");
    if (std::abs(m.trace() - cplx(1.0)) > kStateTol) throw DomainError("DensityMatrix: trace != 1");
    Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(m, Eigen::EigenvaluesOnly);
    if (es.eigenvalues().minCoeff() < -kStateTol)
      throw DomainError("DensityMatrix: negative eigenvalue");
  }

  Eigen::Index dim() const { return m_.rows(); }
  const ComplexMatrix& matrix() const { return m_; }
  cplx operator()(Eigen::Index r, Eigen::Index c) const { return m_(r, c); }

 private:
  struct Unchecked {};
  DensityMatrix(ComplexMatrix m, Unchecked) : m_(std::move(m)) {}
  ComplexMatrix m_;
};

namespace pauli {
inline ComplexMatrix x() { return (ComplexMatrix(2, 2) << 0, 1, 1, 0).finished(); }
inline ComplexMatrix y() { return (ComplexMatrix(2, 2) << 0, -I_UNIT, I_UNIT, 0).finished(); }
inline ComplexMatrix z() { return (ComplexMatrix(2, 2) << 1, 0, 0, -1).finished(); }
inline ComplexMatrix id(Eigen::Index d = 2) { return ComplexMatrix::Identity(d, d); }
}  // namespace pauli

/// Computational basis ket |i> in dimension d.
inline Ket basis_ket(Eigen::Index d, Eigen::Index i) {
  if (i < 0 || i >= d) throw DomainError("basis_ket: index out of range");
  ComplexVector v = ComplexVector::Zero(d);
  v(i) = 1.0;
  return Ket(v);
}

/// |i><j| in dimension d.
inline ComplexMatrix outer(Eigen::Index d, Eigen::Index i, Eigen::Index j) {
  ComplexMatrix m = ComplexMatrix::Zero(d, d);
  m(i, j) = 1.0;
  return m;
}

inline ComplexMatrix tensor_product(const ComplexMatrix& a, const ComplexMatrix& b) {
  ComplexMatrix out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < a.cols(); ++j)
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  return out;
}

inline ComplexVector tensor_product(const ComplexVector& a, const ComplexVector& b) {
  ComplexVector out(a.size() * b.size());
  for (Eigen::Index i = 0; i < a.size(); ++i) out.segment(i * b.size(), b.size()) = a(i) * b;
  return out;
}

/// Reduced matrix over the factors listed in `keep` (ascending order is
/// used regardless of the order given). Works on any square operator.
inline ComplexMatrix partial_trace(const ComplexMatrix& m, const std::vector<int>& dims,
                                   std::vector<int> keep) {
  Eigen::Index total = 1;
  for (int d : dims) {
    if (d < 1) throw DomainError("partial_trace: factor dimension < 1");
    total *= d;
  }
  if (m.rows() != total || m.cols() != total) throw DomainError("partial_trace: dimension mismatch");
  std::sort(keep.begin(), keep.end());
  keep.erase(std::unique(keep.begin(), keep.end()), keep.end());
  const int nf = static_cast<int>(dims.size());
  std::vector<bool> kept(nf, false);
  for (int k : keep) {
    if (k < 0 || k >= nf) throw DomainError("partial_trace: keep index out of range");
    kept[k] = true;
  }
  Eigen::Index dk = 1, dt = 1;
  for (int f = 0; f < nf; ++f) (kept[f] ? dk : dt) *= dims[f];

  // Split a global index into (kept index, traced index).
  auto split = [&](Eigen::Index g, Eigen::Index& ik, Eigen::Index& it) {
    ik = 0;
    it = 0;
    Eigen::Index sk = 1, st = 1;
    for (int f = nf - 1; f >= 0; --f) {
      const Eigen::Index digit = g % dims[f];
      g /= dims[f];
      if (kept[f]) {
        ik += digit * sk;
        sk *= dims[f];
      } else {
        it += digit * st;
        st *= dims[f];
      }
    }
  };
  std::vector<Eigen::Index> kidx(total), tidx(total);
  for (Eigen::Index g = 0; g < total; ++g) split(g, kidx[g], tidx[g]);

  ComplexMatrix out = ComplexMatrix::Zero(dk, dk);
  for (Eigen::Index r = 0; r < total; ++r)
    for (Eigen::Index c = 0; c < total; ++c)
      if (tidx[r] == tidx[c]) out(kidx[r], kidx[c]) += m(r, c);
  return out;
}

inline DensityMatrix partial_trace(const DensityMatrix& rho, const std::vector<int>& dims,
                                   const std::vector<int>& keep) {
  return DensityMatrix::repaired(partial_trace(rho.matrix(), dims, keep));
}

/// Column-stacking vectorization: vec(ABC) = (C^T kron A) vec(B).
inline ComplexVector vectorize(const ComplexMatrix& m) {
  return Eigen::Map<const ComplexVector>(m.data(), m.size());
}

inline ComplexMatrix unvectorize(const ComplexVector& v, Eigen::Index rows, Eigen::Index cols) {
  if (rows < 1 || cols < 1 || v.size() != rows * cols)
    throw DomainError("unvectorize: size mismatch");
  return Eigen::Map<const ComplexMatrix>(v.data(), rows, cols);
}

inline ComplexMatrix matrix_exponential(const ComplexMatrix& m) {
  if (m.rows() != m.cols()) throw DomainError("matrix_exponential: not square");
  return m.exp();
}

/// Principal square root of a Hermitian PSD matrix.
inline ComplexMatrix psd_sqrt(const ComplexMatrix& m) {
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(0.5 * (m + m.adjoint()));
  Eigen::VectorXd s = es.eigenvalues().cwiseMax(0.0).cwiseSqrt();
  return es.eigenvectors() * s.cast<cplx>().asDiagonal() * es.eigenvectors().adjoint();
}

/// Uhlmann fidelity (tr sqrt(sqrt(rho) sigma sqrt(rho)))^2. Reduces to
/// <psi|rho|psi> whenever either argument is pure.
inline double fidelity(const DensityMatrix& rho, const DensityMatrix& sigma) {
  if (rho.dim() != sigma.dim()) throw DomainError("fidelity: dimension mismatch");
  const ComplexMatrix sr = psd_sqrt(rho.matrix());
  const ComplexMatrix inner = sr * sigma.matrix() * sr;
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(0.5 * (inner + inner.adjoint()),
                                                  Eigen::EigenvaluesOnly);
  const double t = es.eigenvalues().cwiseMax(0.0).cwiseSqrt().sum();
  return std::clamp(t * t, 0.0, 1.0);
}

inline double fidelity(const DensityMatrix& rho, const Ket& psi) {
  if (rho.dim() != psi.dim()) throw DomainError("fidelity: dimension mismatch");
  const double f = (psi.amplitudes().adjoint() * rho.matrix() * psi.amplitudes())(0, 0).real();
  return std::clamp(f, 0.0, 1.0);
}

inline double von_neumann_entropy(const DensityMatrix& rho) {
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(rho.matrix(), Eigen::EigenvaluesOnly);
  double s = 0.0;
  for (double l : es.eigenvalues())
    if (l > 1e-14) s -= l * std::log(l);
  return s;
}

/// cos(a/2)|0> + e^{i phi} sin(a/2)|1>.
inline Ket bloch_ket(double alpha, double phi) {
  ComplexVector v(2);
  v << std::cos(alpha / 2.0), std::polar(1.0, phi) * std::sin(alpha / 2.0);
  return Ket(v);
}

/// Real Bloch vector of a qubit state.
inline Eigen::Vector3d bloch_vector(const Ket& k) {
  if (k.dim() != 2) throw DomainError("bloch_vector: not a qubit");
  const ComplexMatrix p = k.projector();
  return {2.0 * p(1, 0).real(), 2.0 * p(1, 0).imag(), (p(0, 0) - p(1, 1)).real()};
}

/// Gibbs state exp(-H/T)/Z, computed in the eigenbasis of H.
inline DensityMatrix gibbs_state(const ComplexMatrix& h, double temperature) {
  if (!(temperature > 0.0)) throw DomainError("gibbs_state: temperature must be > 0");
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(0.5 * (h + h.adjoint()));
  const Eigen::VectorXd e = es.eigenvalues();
  Eigen::VectorXd w = (-(e.array() - e.minCoeff()) / temperature).exp();
  w /= w.sum();
  return DensityMatrix::repaired(es.eigenvectors() * w.cast<cplx>().asDiagonal() *
                                 es.eigenvectors().adjoint());
}

}  // namespace qestlab
