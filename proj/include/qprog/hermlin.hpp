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

// Dense complex linear algebra kernels: Hermitian eigendecomposition, matrix
// functions, tensor products, partial traces, subsystem permutations and
// unitarily invariant norms.

#ifndef QPROG_HERMLIN_HPP
#define QPROG_HERMLIN_HPP

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <functional>
#include <limits>
#include <numeric>
#include <sstream>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "qprog/error.hpp"

namespace qprog {

using Complex = std::complex<double>;
using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;
using RMatrix = Eigen::MatrixXd;
using RVector = Eigen::VectorXd;

inline constexpr double kHermitianRelTol = 1e-12;
/// Eigenvalues with |λ| ≤ kPinvCutoff·max|λ| count as zero for x^(-1/2).
inline constexpr double kPinvCutoff = 1e-12;
/// Eigenvalues closer than this are grouped when applying discontinuous
/// functions such as sign.
inline constexpr double kClusterGap = 1e-10;

inline double max_abs(const CMatrix& m) {
  return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff();
}

inline double hermiticity_error(const CMatrix& m) {
  if (m.rows() != m.cols()) {
    return std::numeric_limits<double>::infinity();
  }
  return m.size() == 0 ? 0.0 : (m - m.adjoint()).cwiseAbs().maxCoeff();
}

inline bool is_hermitian(const CMatrix& m, double rel_tol = kHermitianRelTol) {
  if (m.rows() != m.cols()) {
    return false;
  }
  return hermiticity_error(m) <= rel_tol * max_abs(m);
}

inline void require_square(const CMatrix& m, std::string_view what) {
  if (m.rows() != m.cols()) {
    std::ostringstream msg;
    msg << what << ": expected a square matrix, got " << m.rows() << "x"
        << m.cols();
    throw DimensionError(msg.str());
  }
}

inline void require_hermitian(const CMatrix& m, std::string_view what) {
  require_square(m, what);
  double err = hermiticity_error(m);
  if (err > kHermitianRelTol * max_abs(m)) {
    std::ostringstream msg;
    msg << what << ": matrix is not Hermitian (max|M - M^dag| = " << err
        << ", max|M| = " << max_abs(m) << ")";
    throw SymmetryError(msg.str());
  }
}

inline CMatrix hermitian_part(const CMatrix& m) {
  return (m + m.adjoint()) * 0.5;
}

inline CMatrix identity(Eigen::Index d) { return CMatrix::Identity(d, d); }

inline Complex trace(const CMatrix& m) { return m.trace(); }

// ---------------------------------------------------------------------------
// Spectral decomposition

struct SpectralDecomposition {
  RVector eigenvalues;   // sorted descending
  CMatrix eigenvectors;  // columns, unitary

  Eigen::Index dim() const { return eigenvalues.size(); }

  /// U diag(f(λ)) U† for an already evaluated spectrum.
  CMatrix compose(const RVector& values) const {
    return eigenvectors * values.asDiagonal() * eigenvectors.adjoint();
  }

  CMatrix reconstruct() const { return compose(eigenvalues); }
};

/// Eigendecomposition of a Hermitian matrix with eigenvalues sorted in
/// descending order. Throws SymmetryError on non-Hermitian input.
inline SpectralDecomposition herm_eig(const CMatrix& m) {
  require_hermitian(m, "herm_eig");
  Eigen::SelfAdjointEigenSolver<CMatrix> solver(hermitian_part(m));
  if (solver.info() != Eigen::Success) {
    throw ConvergenceError("herm_eig: eigensolver did not converge");
  }
  SpectralDecomposition out;
  out.eigenvalues = solver.eigenvalues().reverse();
  out.eigenvectors = solver.eigenvectors().rowwise().reverse();
  return out;
}

/// Eigenvalues only, descending.
inline RVector herm_eigenvalues(const CMatrix& m) {
  require_hermitian(m, "herm_eigenvalues");
  Eigen::SelfAdjointEigenSolver<CMatrix> solver(hermitian_part(m),
                                                Eigen::EigenvaluesOnly);
  if (solver.info() != Eigen::Success) {
    throw ConvergenceError("herm_eigenvalues: eigensolver did not converge");
  }
  return solver.eigenvalues().reverse();
}

/// Applies f to every eigenvalue. Throws DomainError when f returns a
/// non-finite value.
template <class F>
CMatrix matrix_function(const SpectralDecomposition& eig, F&& f) {
  RVector values(eig.dim());
  for (Eigen::Index i = 0; i < eig.dim(); ++i) {
    double v = f(eig.eigenvalues[i]);
    if (!std::isfinite(v)) {
      std::ostringstream msg;
      msg << "matrix_function: function undefined at eigenvalue "
          << eig.eigenvalues[i];
      throw DomainError(msg.str());
    }
    values[i] = v;
  }
  return eig.compose(values);
}

template <class F>
CMatrix matrix_function(const CMatrix& m, F&& f) {
  return matrix_function(herm_eig(m), std::forward<F>(f));
}

/// Complex-valued spectral function, e.g. exp(i x).
template <class F>
CMatrix matrix_function_complex(const CMatrix& m, F&& f) {
  SpectralDecomposition eig = herm_eig(m);
  CVector values(eig.dim());
  for (Eigen::Index i = 0; i < eig.dim(); ++i) {
    Complex v = f(eig.eigenvalues[i]);
    if (!std::isfinite(v.real()) || !std::isfinite(v.imag())) {
      throw DomainError("matrix_function_complex: non-finite value");
    }
    values[i] = v;
  }
  return eig.eigenvectors * values.asDiagonal() * eig.eigenvectors.adjoint();
}

/// e^{iH} for Hermitian H.
inline CMatrix expi(const CMatrix& h) {
  return matrix_function_complex(h,
                                 [](double x) { return std::polar(1.0, x); });
}

/// Groups eigenvalues (descending) into clusters whose consecutive gaps are
/// below `gap`, replacing each by its cluster mean.
inline RVector cluster_means(const RVector& values, double gap = kClusterGap) {
  RVector out(values.size());
  Eigen::Index start = 0;
  while (start < values.size()) {
    Eigen::Index end = start + 1;
    while (end < values.size() && values[end - 1] - values[end] < gap) {
      ++end;
    }
    double mean = values.segment(start, end - start).mean();
    out.segment(start, end - start).setConstant(mean);
    start = end;
  }
  return out;
}

/// Matrix sign with sign(0) = 0. Eigenvalues are clustered first; a cluster
/// whose mean lies within `gap` of zero maps to zero.
inline CMatrix matrix_sign(const SpectralDecomposition& eig,
                           double gap = kClusterGap) {
  RVector means = cluster_means(eig.eigenvalues, gap);
  RVector s(means.size());
  for (Eigen::Index i = 0; i < means.size(); ++i) {
    s[i] = std::abs(means[i]) < gap ? 0.0 : (means[i] > 0 ? 1.0 : -1.0);
  }
  return eig.compose(s);
}

inline CMatrix matrix_sign(const CMatrix& m, double gap = kClusterGap) {
  return matrix_sign(herm_eig(m), gap);
}

/// Tolerance below which negative eigenvalues of a nominally PSD matrix are
/// clamped to zero.
inline double psd_clamp_tol(const RVector& values) {
  double scale = values.size() == 0 ? 0.0 : values.cwiseAbs().maxCoeff();
  return 1e-10 * std::max(1.0, scale);
}

/// Square root of a PSD matrix. Small negative eigenvalues are clamped.
inline CMatrix sqrt_psd(const SpectralDecomposition& eig) {
  const double tol = psd_clamp_tol(eig.eigenvalues);
  return matrix_function(eig, [tol](double x) {
    if (x < -tol) {
      return std::numeric_limits<double>::quiet_NaN();
    }
    return std::sqrt(std::max(x, 0.0));
  });
}

inline CMatrix sqrt_psd(const CMatrix& m) { return sqrt_psd(herm_eig(m)); }

/// Pseudo-inverse square root of a PSD matrix: eigenvalues at or below
/// kPinvCutoff·max|λ| map to zero.
inline CMatrix inv_sqrt_psd(const SpectralDecomposition& eig) {
  const double scale =
      eig.dim() == 0 ? 0.0 : eig.eigenvalues.cwiseAbs().maxCoeff();
  const double cutoff = kPinvCutoff * scale;
  const double neg_tol = psd_clamp_tol(eig.eigenvalues);
  return matrix_function(eig, [cutoff, neg_tol](double x) {
    if (x < -neg_tol) {
      return std::numeric_limits<double>::quiet_NaN();
    }
    return std::abs(x) <= cutoff ? 0.0 : 1.0 / std::sqrt(x);
  });
}

inline CMatrix inv_sqrt_psd(const CMatrix& m) {
  return inv_sqrt_psd(herm_eig(m));
}

/// Projection onto the PSD cone in Frobenius norm.
inline CMatrix psd_part(const CMatrix& m) {
  return matrix_function(m, [](double x) { return std::max(x, 0.0); });
}

// ---------------------------------------------------------------------------
// Tensor structure

inline CMatrix kron(const CMatrix& a, const CMatrix& b) {
  CMatrix out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    for (Eigen::Index j = 0; j < a.cols(); ++j) {
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
    }
  }
  return out;
}

inline CVector kron_vec(const CVector& a, const CVector& b) {
  CVector out(a.size() * b.size());
  for (Eigen::Index i = 0; i < a.size(); ++i) {
    out.segment(i * b.size(), b.size()) = a[i] * b;
  }
  return out;
}

inline CMatrix kron_all(const std::vector<CMatrix>& factors) {
  CMatrix out = CMatrix::Ones(1, 1);
  for (const CMatrix& f : factors) {
    out = kron(out, f);
  }
  return out;
}

inline CMatrix kron_power(const CMatrix& m, int n) {
  CMatrix out = CMatrix::Ones(1, 1);
  for (int i = 0; i < n; ++i) {
    out = kron(out, m);
  }
  return out;
}

/// Ordered subsystem dimensions of a tensor-product space. Subsystem 0 is the
/// most significant index.
struct SubsystemShape {
  std::vector<int> dims;

  SubsystemShape() = default;
  SubsystemShape(std::initializer_list<int> d) : dims(d) { validate(); }
  explicit SubsystemShape(std::vector<int> d) : dims(std::move(d)) {
    validate();
  }

  void validate() const {
    for (int d : dims) {
      if (d < 1) {
        throw DimensionError("SubsystemShape: dimensions must be positive");
      }
    }
  }

  std::size_t size() const { return dims.size(); }

  Eigen::Index total() const {
    Eigen::Index t = 1;
    for (int d : dims) {
      t *= d;
    }
    return t;
  }

  /// Row-major strides: stride[k] = product of dims after k.
  std::vector<Eigen::Index> strides() const {
    std::vector<Eigen::Index> s(dims.size(), 1);
    for (std::size_t k = dims.size(); k-- > 1;) {
      s[k - 1] = s[k] * dims[k];
    }
    return s;
  }

  SubsystemShape permuted(const std::vector<int>& perm) const {
    std::vector<int> out(perm.size());
    for (std::size_t j = 0; j < perm.size(); ++j) {
      out[j] = dims[static_cast<std::size_t>(perm[j])];
    }
    return SubsystemShape(out);
  }
};

namespace detail {

inline void check_shape(const CMatrix& m, const SubsystemShape& shape,
                        std::string_view what) {
  require_square(m, what);
  if (shape.total() != m.rows()) {
    std::ostringstream msg;
    msg << what << ": subsystem dimensions multiply to " << shape.total()
        << " but the matrix has dimension " << m.rows();
    throw DimensionError(msg.str());
  }
}

// Linear offsets of every multi-index over `subsystems` inside the full space.
inline std::vector<Eigen::Index> offsets(const SubsystemShape& shape,
                                         const std::vector<int>& subsystems) {
  auto strides = shape.strides();
  std::vector<Eigen::Index> out{0};
  for (int k : subsystems) {
    std::vector<Eigen::Index> next;
    next.reserve(out.size() * static_cast<std::size_t>(shape.dims[k]));
    for (Eigen::Index base : out) {
      for (int v = 0; v < shape.dims[k]; ++v) {
        next.push_back(base + v * strides[k]);
      }
    }
    out = std::move(next);
  }
  return out;
}

}  // namespace detail

/// Partial trace keeping the listed subsystems (in their original order).
inline CMatrix partial_trace(const CMatrix& m, const SubsystemShape& shape,
                             std::vector<int> keep) {
  detail::check_shape(m, shape, "partial_trace");
  std::sort(keep.begin(), keep.end());
  if (std::adjacent_find(keep.begin(), keep.end()) != keep.end()) {
    throw DimensionError("partial_trace: repeated subsystem index");
  }
  std::vector<int> traced;
  for (int k = 0; k < static_cast<int>(shape.size()); ++k) {
    if (!std::binary_search(keep.begin(), keep.end(), k)) {
      traced.push_back(k);
    }
  }
  for (int k : keep) {
    if (k < 0 || k >= static_cast<int>(shape.size())) {
      throw DimensionError("partial_trace: subsystem index out of range");
    }
  }
  auto kept = detail::offsets(shape, keep);
  auto tr = detail::offsets(shape, traced);
  const auto n = static_cast<Eigen::Index>(kept.size());
  CMatrix out = CMatrix::Zero(n, n);
  for (Eigen::Index r = 0; r < n; ++r) {
    for (Eigen::Index c = 0; c < n; ++c) {
      Complex acc = 0.0;
      for (Eigen::Index t : tr) {
        acc += m(kept[r] + t, kept[c] + t);
      }
      out(r, c) = acc;
    }
  }
  return out;
}

/// Traces out a single subsystem.
inline CMatrix trace_out(const CMatrix& m, const SubsystemShape& shape,
                         int subsystem) {
  std::vector<int> keep;
  for (int k = 0; k < static_cast<int>(shape.size()); ++k) {
    if (k != subsystem) {
      keep.push_back(k);
    }
  }
  return partial_trace(m, shape, keep);
}

/// Index map of a subsystem permutation: output subsystem j is input
/// subsystem perm[j]. Entry i gives the output index of input basis state i.
inline std::vector<Eigen::Index> permutation_index_map(
    const SubsystemShape& shape, const std::vector<int>& perm) {
  const std::size_t k = shape.size();
  if (perm.size() != k) {
    throw DimensionError("permute_subsystems: permutation has wrong length");
  }
  std::vector<bool> seen(k, false);
  for (int p : perm) {
    if (p < 0 || static_cast<std::size_t>(p) >= k ||
        seen[static_cast<std::size_t>(p)]) {
      throw DimensionError("permute_subsystems: invalid permutation");
    }
    seen[static_cast<std::size_t>(p)] = true;
  }
  SubsystemShape out_shape = shape.permuted(perm);
  auto out_strides = out_shape.strides();
  // Stride in the output space of each input subsystem.
  std::vector<Eigen::Index> stride_of_input(k);
  for (std::size_t j = 0; j < k; ++j) {
    stride_of_input[static_cast<std::size_t>(perm[j])] = out_strides[j];
  }
  std::vector<Eigen::Index> map{0};
  for (std::size_t s = 0; s < k; ++s) {
    std::vector<Eigen::Index> next;
    next.reserve(map.size() * static_cast<std::size_t>(shape.dims[s]));
    for (Eigen::Index base : map) {
      for (int v = 0; v < shape.dims[s]; ++v) {
        next.push_back(base + v * stride_of_input[s]);
      }
    }
    map = std::move(next);
  }
  return map;
}

/// Reorders tensor factors: output subsystem j is input subsystem perm[j].
inline CMatrix permute_subsystems(const CMatrix& m, const SubsystemShape& shape,
                                  const std::vector<int>& perm) {
  detail::check_shape(m, shape, "permute_subsystems");
  auto map = permutation_index_map(shape, perm);
  const Eigen::Index n = m.rows();
  CMatrix out(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) {
      out(map[static_cast<std::size_t>(i)], map[static_cast<std::size_t>(j)]) =
          m(i, j);
    }
  }
  return out;
}

/// Permutation operator P with P (x_0 ⊗ ... ) = x_perm[0] ⊗ ..., so that
/// permute_subsystems(M) = P M P†.
inline CMatrix permutation_operator(const SubsystemShape& shape,
                                    const std::vector<int>& perm) {
  auto map = permutation_index_map(shape, perm);
  const Eigen::Index n = shape.total();
  CMatrix p = CMatrix::Zero(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    p(map[static_cast<std::size_t>(i)], i) = 1.0;
  }
  return p;
}

// ---------------------------------------------------------------------------
// Norms

struct Norms {
  double trace_norm = 0.0;
  double spectral_norm = 0.0;
  double frobenius_norm = 0.0;
};

/// Singular values for general matrices, |eigenvalues| for Hermitian ones.
inline RVector singular_values(const CMatrix& m) {
  if (m.size() == 0) {
    return RVector();
  }
  if (is_hermitian(m)) {
    RVector v = herm_eigenvalues(m).cwiseAbs();
    std::sort(v.data(), v.data() + v.size(), std::greater<>());
    return v;
  }
  Eigen::BDCSVD<CMatrix> svd(m);
  return svd.singularValues();
}

inline Norms norms(const CMatrix& m) {
  RVector s = singular_values(m);
  Norms out;
  if (s.size() > 0) {
    out.trace_norm = s.sum();
    out.spectral_norm = s.maxCoeff();
  }
  out.frobenius_norm = m.norm();
  return out;
}

inline double trace_norm(const CMatrix& m) {
  return singular_values(m).sum();
}

inline double spectral_norm(const CMatrix& m) {
  RVector s = singular_values(m);
  return s.size() == 0 ? 0.0 : s.maxCoeff();
}

inline double frobenius_norm(const CMatrix& m) { return m.norm(); }

/// Schatten p-norm for real p ≥ 1.
inline double schatten_norm(const CMatrix& m, double p) {
  if (!(p >= 1.0)) {
    throw DomainError("schatten_norm: p must be at least 1");
  }
  RVector s = singular_values(m);
  if (std::isinf(p)) {
    return s.size() == 0 ? 0.0 : s.maxCoeff();
  }
  double acc = 0.0;
  for (Eigen::Index i = 0; i < s.size(); ++i) {
    acc += std::pow(s[i], p);
  }
  return std::pow(acc, 1.0 / p);
}

/// Row-major vectorization, vec(M)[i*n + j] = M(i, j).
inline CVector vec_rowmajor(const CMatrix& m) {
  CVector v(m.size());
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      v[i * m.cols() + j] = m(i, j);
    }
  }
  return v;
}

inline CMatrix unvec_rowmajor(const CVector& v, Eigen::Index rows,
                              Eigen::Index cols) {
  CMatrix m(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i) {
    for (Eigen::Index j = 0; j < cols; ++j) {
      m(i, j) = v[i * cols + j];
    }
  }
  return m;
}

inline bool is_unitary(const CMatrix& u, double tol = 1e-10) {
  if (u.rows() != u.cols()) {
    return false;
  }
  return (u.adjoint() * u - identity(u.rows())).cwiseAbs().maxCoeff() <= tol;
}

}  // namespace qprog

#endif  // QPROG_HERMLIN_HPP
