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
#include "qestlab/rng.hpp"

namespace qestlab::testing {

inline ComplexMatrix random_matrix(Rng& rng, Eigen::Index r, Eigen::Index c) {
  ComplexMatrix m(r, c);
  for (Eigen::Index i = 0; i < r; ++i)
    for (Eigen::Index j = 0; j < c; ++j) m(i, j) = cplx(rng.normal(), rng.normal());
  return m;
}

/// Full-rank random state from a Ginibre matrix.
inline DensityMatrix random_state(Rng& rng, Eigen::Index d) {
  const ComplexMatrix g = random_matrix(rng, d, d);
  const ComplexMatrix m = g * g.adjoint();
  return DensityMatrix(m / m.trace().real());
}

inline Ket random_ket(Rng& rng, Eigen::Index d) {
  ComplexVector v(d);
  for (Eigen::Index i = 0; i < d; ++i) v(i) = cplx(rng.normal(), rng.normal());
  return Ket(v);
}

inline double max_abs(const ComplexMatrix& m) { return m.cwiseAbs().maxCoeff(); }

}  // namespace qestlab::testing
