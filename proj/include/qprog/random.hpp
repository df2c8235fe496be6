// Copyright 2026 The qprog Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Seeded generators for random test instances: Hermitian matrices, states,
// unitaries and channels.

#ifndef QPROG_RANDOM_HPP
#define QPROG_RANDOM_HPP

#include <cstdint>
#include <random>

#include "qprog/channels.hpp"

namespace qprog {

using Rng = std::mt19937_64;

/// Matrix with i.i.d. standard complex Gaussian entries.
inline CMatrix random_ginibre(Eigen::Index rows, Eigen::Index cols, Rng& rng) {
  std::normal_distribution<double> n(0.0, 1.0);
  CMatrix m(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i) {
    for (Eigen::Index j = 0; j < cols; ++j) {
      double re = n(rng);
      double im = n(rng);
      m(i, j) = Complex(re, im);
    }
  }
  return m;
}

inline CMatrix random_hermitian(Eigen::Index d, Rng& rng) {
  return hermitian_part(random_ginibre(d, d, rng));
}

/// Haar-random unitary via QR of a Ginibre matrix with phase fix.
inline CMatrix random_unitary(Eigen::Index d, Rng& rng) {
  CMatrix g = random_ginibre(d, d, rng);
  Eigen::HouseholderQR<CMatrix> qr(g);
  CMatrix q = qr.householderQ();
  CMatrix r = qr.matrixQR().triangularView<Eigen::Upper>();
  for (Eigen::Index i = 0; i < d; ++i) {
    Complex ph = r(i, i) / std::abs(r(i, i));
    q.col(i) *= ph;
  }
  return q;
}

/// Random density matrix of the given rank (full rank when rank <= 0).
inline DensityMatrix random_density(Eigen::Index d, Rng& rng,
                                    Eigen::Index rank = 0) {
  if (rank <= 0) {
    rank = d;
  }
  CMatrix g = random_ginibre(d, rank, rng);
  CMatrix m = g * g.adjoint();
  m /= m.trace().real();
  return DensityMatrix(hermitian_part(m));
}

inline CVector random_pure_vector(Eigen::Index d, Rng& rng) {
  CMatrix g = random_ginibre(d, 1, rng);
  return g.col(0) / g.col(0).norm();
}

/// Random channel with `n_kraus` Kraus operators from a random isometry.
inline KrausChannel random_channel(int d_in, int d_out, int n_kraus, Rng& rng) {
  CMatrix u = random_unitary(static_cast<Eigen::Index>(d_out) * n_kraus, rng);
  std::vector<CMatrix> ops;
  for (int k = 0; k < n_kraus; ++k) {
    ops.push_back(u.block(static_cast<Eigen::Index>(k) * d_out, 0, d_out, d_in));
  }
  return KrausChannel(std::move(ops), d_in, d_out);
}

}  // namespace qprog

#endif  // QPROG_RANDOM_HPP
