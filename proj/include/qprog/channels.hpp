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

// Density matrices, Choi matrices, Kraus channels, a small channel zoo and
// the Choi-space cost functions.

#ifndef QPROG_CHANNELS_HPP
#define QPROG_CHANNELS_HPP

#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "qprog/hermlin.hpp"

namespace qprog {

inline constexpr double kStateTol = 1e-10;
inline constexpr double kChoiTol = 1e-9;
inline constexpr double kKrausTol = 1e-9;

/// Unit-trace positive semidefinite Hermitian matrix.
class DensityMatrix {
 public:
  DensityMatrix() = default;

  /// Validates the invariants (Hermitian, PSD to -tol, unit trace to tol).
  explicit DensityMatrix(const CMatrix& m, double tol = kStateTol) {
    require_hermitian(m, "DensityMatrix");
    m_ = hermitian_part(m);
    double tr = m_.trace().real();
    if (std::abs(tr - 1.0) > tol) {
      std::ostringstream msg;
      msg << "DensityMatrix: trace is " << tr << ", expected 1";
      throw ValidationError(msg.str());
    }
    if (m_.rows() > 0) {
      double lo = herm_eigenvalues(m_).minCoeff();
      if (lo < -tol) {
        std::ostringstream msg;
        msg << "DensityMatrix: minimum eigenvalue " << lo << " is negative";
        throw ValidationError(msg.str());
      }
    }
  }

  static DensityMatrix maximally_mixed(Eigen::Index d) {
    return DensityMatrix(identity(d) / static_cast<double>(d));
  }

  static DensityMatrix pure(const CVector& psi) {
    CVector v = psi / psi.norm();
    return DensityMatrix(v * v.adjoint());
  }

  const CMatrix& matrix() const { return m_; }
  Eigen::Index dim() const { return m_.rows(); }

 private:
  CMatrix m_;
};

/// Unit-trace Choi state of a channel, ordered (input copy, output).
class ChoiMatrix {
 public:
  ChoiMatrix() = default;

  ChoiMatrix(const CMatrix& m, int d_in, int d_out, double tol = kChoiTol)
      : d_in_(d_in), d_out_(d_out) {
    if (d_in < 1 || d_out < 1 ||
        m.rows() != static_cast<Eigen::Index>(d_in) * d_out) {
      throw DimensionError("ChoiMatrix: dimension mismatch");
    }
    state_ = DensityMatrix(m, tol);
    CMatrix marg = partial_trace(state_.matrix(), {d_in, d_out}, {0});
    double err =
        (marg - identity(d_in) / static_cast<double>(d_in)).cwiseAbs().maxCoeff();
    if (err > tol) {
      std::ostringstream msg;
      msg << "ChoiMatrix: input marginal deviates from I/d_in by " << err;
      throw ValidationError(msg.str());
    }
  }

  const CMatrix& matrix() const { return state_.matrix(); }
  const DensityMatrix& state() const { return state_; }
  int d_in() const { return d_in_; }
  int d_out() const { return d_out_; }
  Eigen::Index dim() const { return state_.dim(); }

 private:
  DensityMatrix state_;
  int d_in_ = 0;
  int d_out_ = 0;
};

/// Completely positive trace-preserving map in Kraus form.
class KrausChannel {
 public:
  KrausChannel() = default;

  KrausChannel(std::vector<CMatrix> ops, int d_in, int d_out,
               double tol = kKrausTol)
      : ops_(std::move(ops)), d_in_(d_in), d_out_(d_out) {
    if (ops_.empty()) {
      throw ValidationError("KrausChannel: no Kraus operators");
    }
    CMatrix acc = CMatrix::Zero(d_in, d_in);
    for (const CMatrix& a : ops_) {
      if (a.rows() != d_out || a.cols() != d_in) {
        throw DimensionError("KrausChannel: Kraus operator has wrong shape");
      }
      acc += a.adjoint() * a;
    }
    double err = (acc - identity(d_in)).cwiseAbs().maxCoeff();
    if (err > tol) {
      std::ostringstream msg;
      msg << "KrausChannel: not trace preserving, max|sum A^dag A - I| = "
          << err;
      throw ValidationError(msg.str());
    }
  }

  const std::vector<CMatrix>& kraus_ops() const { return ops_; }
  int d_in() const { return d_in_; }
  int d_out() const { return d_out_; }

  CMatrix apply(const CMatrix& rho) const {
    if (rho.rows() != d_in_ || rho.cols() != d_in_) {
      throw DimensionError("KrausChannel::apply: dimension mismatch");
    }
    CMatrix out = CMatrix::Zero(d_out_, d_out_);
    for (const CMatrix& a : ops_) {
      out += a * rho * a.adjoint();
    }
    return out;
  }

 private:
  std::vector<CMatrix> ops_;
  int d_in_ = 0;
  int d_out_ = 0;
};

// ---------------------------------------------------------------------------
// Fixed operators

namespace pauli {

inline CMatrix I() { return identity(2); }

inline CMatrix X() {
  CMatrix m(2, 2);
  m << 0, 1, 1, 0;
  return m;
}

inline CMatrix Y() {
  CMatrix m(2, 2);
  m << 0, Complex(0, -1), Complex(0, 1), 0;
  return m;
}

inline CMatrix Z() {
  CMatrix m(2, 2);
  m << 1, 0, 0, -1;
  return m;
}

}  // namespace pauli

/// Shift X|k> = |k+1 mod d>.
inline CMatrix shift_operator(int d) {
  CMatrix x = CMatrix::Zero(d, d);
  for (int k = 0; k < d; ++k) {
    x((k + 1) % d, k) = 1.0;
  }
  return x;
}

/// Clock Z|k> = ω^k |k>, ω = exp(2πi/d).
inline CMatrix clock_operator(int d) {
  CMatrix z = CMatrix::Zero(d, d);
  for (int k = 0; k < d; ++k) {
    z(k, k) = std::polar(1.0, 2.0 * std::numbers::pi * k / d);
  }
  return z;
}

/// Generalized Pauli (Weyl) unitaries X^a Z^b at index a·d + b, orthogonal
/// under Tr(U_i† U_j) = d δ_ij. For d = 2 the list is exactly {I, X, Y, Z}.
inline std::vector<CMatrix> weyl_unitaries(int d) {
  if (d < 2) {
    throw DomainError("weyl_unitaries: d must be at least 2");
  }
  if (d == 2) {
    return {pauli::I(), pauli::X(), pauli::Y(), pauli::Z()};
  }
  CMatrix x = shift_operator(d);
  CMatrix z = clock_operator(d);
  std::vector<CMatrix> out;
  out.reserve(static_cast<std::size_t>(d * d));
  CMatrix xa = identity(d);
  for (int a = 0; a < d; ++a) {
    CMatrix zb = identity(d);
    for (int b = 0; b < d; ++b) {
      out.push_back(xa * zb);
      zb = zb * z;
    }
    xa = xa * x;
  }
  return out;
}

/// |Φ> = d^{-1/2} Σ_i |ii>.
inline CVector max_entangled_vector(int d) {
  if (d < 2) {
    throw DomainError("max_entangled: d must be at least 2");
  }
  CVector v = CVector::Zero(static_cast<Eigen::Index>(d) * d);
  for (int i = 0; i < d; ++i) {
    v[i * d + i] = 1.0 / std::sqrt(static_cast<double>(d));
  }
  return v;
}

inline DensityMatrix max_entangled(int d) {
  CVector v = max_entangled_vector(d);
  return DensityMatrix(v * v.adjoint());
}

/// (I ⊗ A)|Φ> for a d_out × d_in operator A.
inline CVector choi_vector(const CMatrix& a) {
  const Eigen::Index d_in = a.cols();
  const Eigen::Index d_out = a.rows();
  CVector v(d_in * d_out);
  const double s = 1.0 / std::sqrt(static_cast<double>(d_in));
  for (Eigen::Index i = 0; i < d_in; ++i) {
    for (Eigen::Index o = 0; o < d_out; ++o) {
      v[i * d_out + o] = s * a(o, i);
    }
  }
  return v;
}

/// Unnormalized-operator version of the Choi map, Σ_k (I⊗A_k)Φ(I⊗A_k)†.
inline CMatrix choi_matrix_of_kraus(const std::vector<CMatrix>& ops) {
  if (ops.empty()) {
    throw ValidationError("choi_of_channel: no Kraus operators");
  }
  const Eigen::Index n = ops.front().rows() * ops.front().cols();
  CMatrix acc = CMatrix::Zero(n, n);
  for (const CMatrix& a : ops) {
    CVector v = choi_vector(a);
    acc += v * v.adjoint();
  }
  return acc;
}

inline ChoiMatrix choi_of_channel(const KrausChannel& ch) {
  return ChoiMatrix(choi_matrix_of_kraus(ch.kraus_ops()), ch.d_in(),
                    ch.d_out());
}

/// E(ρ) = d_in · Tr_in[(ρᵀ ⊗ I) χ].
inline CMatrix apply_via_choi(const CMatrix& chi, int d_in, int d_out,
                              const CMatrix& rho) {
  if (rho.rows() != d_in || rho.cols() != d_in ||
      chi.rows() != static_cast<Eigen::Index>(d_in) * d_out) {
    throw DimensionError("apply_via_choi: dimension mismatch");
  }
  CMatrix prod = kron(rho.transpose(), identity(d_out)) * chi;
  return static_cast<double>(d_in) * partial_trace(prod, {d_in, d_out}, {1});
}

inline DensityMatrix apply_via_choi(const ChoiMatrix& chi,
                                    const DensityMatrix& rho) {
  return DensityMatrix(hermitian_part(
      apply_via_choi(chi.matrix(), chi.d_in(), chi.d_out(), rho.matrix())));
}

/// (I ⊗ E) applied to a state on (reference ⊗ input).
inline CMatrix apply_on_second(const KrausChannel& ch, const CMatrix& m,
                               int d_ref) {
  CMatrix out = CMatrix::Zero(static_cast<Eigen::Index>(d_ref) * ch.d_out(),
                              static_cast<Eigen::Index>(d_ref) * ch.d_out());
  for (const CMatrix& a : ch.kraus_ops()) {
    CMatrix big = kron(identity(d_ref), a);
    out += big * m * big.adjoint();
  }
  return out;
}

// ---------------------------------------------------------------------------
// Channel zoo

namespace detail {

inline void check_probability(double p, std::string_view what) {
  if (!(p >= 0.0 && p <= 1.0)) {
    std::ostringstream msg;
    msg << what << ": parameter p = " << p << " outside [0, 1]";
    throw DomainError(msg.str());
  }
}

}  // namespace detail

inline KrausChannel identity_channel(int d) {
  return KrausChannel({identity(d)}, d, d);
}

/// K0 = diag(1, √(1−p)), K1 = √p |0><1|.
inline KrausChannel amplitude_damping(double p) {
  detail::check_probability(p, "amplitude_damping");
  CMatrix k0 = CMatrix::Zero(2, 2);
  k0(0, 0) = 1.0;
  k0(1, 1) = std::sqrt(1.0 - p);
  CMatrix k1 = CMatrix::Zero(2, 2);
  k1(0, 1) = std::sqrt(p);
  return KrausChannel({k0, k1}, 2, 2);
}

/// ρ ↦ (1−p)ρ + p·Tr(ρ)·I/d.
inline KrausChannel depolarizing(double p, int d = 2) {
  detail::check_probability(p, "depolarizing");
  if (d < 2) {
    throw DomainError("depolarizing: d must be at least 2");
  }
  std::vector<CMatrix> ops;
  if (p < 1.0) {
    ops.push_back(std::sqrt(1.0 - p) * identity(d));
  }
  if (p > 0.0) {
    const double w = std::sqrt(p / d);
    for (int i = 0; i < d; ++i) {
      for (int j = 0; j < d; ++j) {
        CMatrix e = CMatrix::Zero(d, d);
        e(i, j) = w;
        ops.push_back(e);
      }
    }
  }
  return KrausChannel(std::move(ops), d, d);
}

/// Qubit dephasing ρ ↦ (1−p)ρ + p·diag(ρ) = (1−p/2)ρ + (p/2)ZρZ.
inline KrausChannel dephasing(double p) {
  detail::check_probability(p, "dephasing");
  return KrausChannel(
      {std::sqrt(1.0 - p / 2.0) * pauli::I(), std::sqrt(p / 2.0) * pauli::Z()},
      2, 2);
}

/// ρ ↦ Σ_i p_i U_i ρ U_i† over weyl_unitaries(d); d² = probs.size().
inline KrausChannel pauli_channel(const std::vector<double>& probs) {
  const int d = static_cast<int>(std::lround(std::sqrt(probs.size())));
  if (d < 2 || static_cast<std::size_t>(d * d) != probs.size()) {
    throw DomainError("pauli_channel: need d^2 probabilities with d >= 2");
  }
  double total = 0.0;
  for (double p : probs) {
    if (!(p >= 0.0)) {
      throw DomainError("pauli_channel: negative probability");
    }
    total += p;
  }
  if (std::abs(total - 1.0) > 1e-12) {
    throw DomainError("pauli_channel: probabilities do not sum to 1");
  }
  auto us = weyl_unitaries(d);
  std::vector<CMatrix> ops;
  for (std::size_t i = 0; i < probs.size(); ++i) {
    if (probs[i] > 0.0) {
      ops.push_back(std::sqrt(probs[i]) * us[i]);
    }
  }
  return KrausChannel(std::move(ops), d, d);
}

inline KrausChannel unitary_channel(const CMatrix& u) {
  if (!is_unitary(u, 1e-9)) {
    throw DomainError("unitary_channel: operator is not unitary");
  }
  return KrausChannel({u}, static_cast<int>(u.cols()),
                      static_cast<int>(u.rows()));
}

/// R(θ) = exp(iθX) as a 2×2 matrix.
inline CMatrix rotation_unitary(double theta) {
  return std::cos(theta) * pauli::I() +
         Complex(0.0, std::sin(theta)) * pauli::X();
}

inline KrausChannel rotation(double theta) {
  return unitary_channel(rotation_unitary(theta));
}

// ---------------------------------------------------------------------------
// Cost functions between a target and a simulated Choi matrix

enum class CostKind { C1, F, CF, CR, Cp, Cmu };

/// A cost function with its parameter (p for Cp, μ for Cmu).
struct CostSpec {
  CostKind kind = CostKind::C1;
  double param = 0.0;
};

inline std::string cost_name(CostKind k) {
  switch (k) {
    case CostKind::C1:
      return "C1";
    case CostKind::F:
      return "F";
    case CostKind::CF:
      return "CF";
    case CostKind::CR:
      return "CR";
    case CostKind::Cp:
      return "Cp";
    case CostKind::Cmu:
      return "Cmu";
  }
  return "?";
}

inline CostKind parse_cost_kind(std::string_view s) {
  if (s == "C1") return CostKind::C1;
  if (s == "F") return CostKind::F;
  if (s == "CF") return CostKind::CF;
  if (s == "CR") return CostKind::CR;
  if (s == "Cp") return CostKind::Cp;
  if (s == "Cmu") return CostKind::Cmu;
  throw ValidationError("unknown cost kind '" + std::string(s) + "'");
}

namespace detail {

inline void check_same_dims(const CMatrix& a, const CMatrix& b,
                            std::string_view what) {
  if (a.rows() != b.rows() || a.cols() != b.cols() || a.rows() != a.cols()) {
    std::ostringstream msg;
    msg << what << ": dimension mismatch (" << a.rows() << " vs " << b.rows()
        << ")";
    throw DimensionError(msg.str());
  }
}

}  // namespace detail

/// Huber penalty h_μ(x).
inline double huber(double x, double mu) {
  double ax = std::abs(x);
  return ax < mu ? x * x / (2.0 * mu) : ax - mu / 2.0;
}

/// Derivative of the Huber penalty.
inline double huber_derivative(double x, double mu) {
  if (std::abs(x) < mu) {
    return x / mu;
  }
  return x > 0 ? 1.0 : -1.0;
}

/// C1 = ‖χ_target − χ_sim‖_1.
inline double trace_distance_cost(const CMatrix& target, const CMatrix& sim) {
  detail::check_same_dims(target, sim, "C1");
  return trace_norm(hermitian_part(target - sim));
}

/// Bures fidelity F = Tr√(√A B √A), clamped to [0, 1]. Evaluated on the
/// support of A: with A = V D V†, F = Tr√(√D V†BV √D), which avoids the
/// square roots of round-off eigenvalues in the kernel of A.
inline double fidelity(const CMatrix& a, const CMatrix& b) {
  detail::check_same_dims(a, b, "F");
  SpectralDecomposition eig = herm_eig(hermitian_part(a));
  const double cut = kPinvCutoff * std::max(1.0, eig.eigenvalues.cwiseAbs().maxCoeff());
  Eigen::Index r = 0;
  while (r < eig.dim() && eig.eigenvalues[r] > cut) {
    ++r;
  }
  if (r == 0) {
    return 0.0;
  }
  CMatrix w = eig.eigenvectors.leftCols(r) *
              eig.eigenvalues.head(r).cwiseSqrt().cast<Complex>().asDiagonal();
  RVector ev = herm_eigenvalues(hermitian_part(w.adjoint() * hermitian_part(b) * w));
  double f = 0.0;
  for (Eigen::Index i = 0; i < ev.size(); ++i) {
    f += std::sqrt(std::max(ev[i], 0.0));
  }
  return std::clamp(f, 0.0, 1.0);
}

/// Quantum relative entropy S(A‖B) in bits; +∞ when supp A ⊄ supp B.
inline double relative_entropy(const CMatrix& a, const CMatrix& b) {
  detail::check_same_dims(a, b, "relative_entropy");
  SpectralDecomposition ea = herm_eig(hermitian_part(a));
  SpectralDecomposition eb = herm_eig(hermitian_part(b));
  const double cut_a = kPinvCutoff * std::max(1.0, ea.eigenvalues.cwiseAbs().maxCoeff());
  const double cut_b = kPinvCutoff * std::max(1.0, eb.eigenvalues.cwiseAbs().maxCoeff());
  // overlap(i, j) = |<a_i|b_j>|²
  RMatrix overlap = (ea.eigenvectors.adjoint() * eb.eigenvectors).cwiseAbs2();
  double s = 0.0;
  for (Eigen::Index i = 0; i < ea.dim(); ++i) {
    const double ai = ea.eigenvalues[i];
    if (ai <= cut_a) {
      continue;
    }
    s += ai * std::log2(ai);
    for (Eigen::Index j = 0; j < eb.dim(); ++j) {
      const double bj = eb.eigenvalues[j];
      const double w = overlap(i, j);
      if (bj <= cut_b) {
        if (ai * w > 1e-12) {
          return std::numeric_limits<double>::infinity();
        }
        continue;
      }
      s -= ai * w * std::log2(bj);
    }
  }
  return std::max(s, 0.0);
}

/// Σ_i h_μ(λ_i) over the eigenvalues of χ_target − χ_sim.
inline double huber_cost(const CMatrix& target, const CMatrix& sim, double mu) {
  if (!(mu > 0.0)) {
    throw DomainError("Cmu: mu must be positive");
  }
  detail::check_same_dims(target, sim, "Cmu");
  RVector ev = herm_eigenvalues(hermitian_part(target - sim));
  double acc = 0.0;
  for (Eigen::Index i = 0; i < ev.size(); ++i) {
    acc += huber(ev[i], mu);
  }
  return acc;
}

/// Cost between raw Choi operators, without re-validating the invariants.
inline double cost_eval(const CostSpec& cost, const CMatrix& target,
                        const CMatrix& sim) {
  switch (cost.kind) {
    case CostKind::C1:
      return trace_distance_cost(target, sim);
    case CostKind::F:
      return fidelity(target, sim);
    case CostKind::CF: {
      double f = fidelity(target, sim);
      return 1.0 - f * f;
    }
    case CostKind::CR:
      return std::min(relative_entropy(target, sim),
                      relative_entropy(sim, target));
    case CostKind::Cp:
      detail::check_same_dims(target, sim, "Cp");
      return schatten_norm(hermitian_part(target - sim), cost.param);
    case CostKind::Cmu:
      return huber_cost(target, sim, cost.param);
  }
  throw ValidationError("cost_eval: unknown cost kind");
}

inline double cost_eval(const CostSpec& cost, const ChoiMatrix& target,
                        const ChoiMatrix& sim) {
  if (target.d_in() != sim.d_in() || target.d_out() != sim.d_out()) {
    throw DimensionError("cost_eval: Choi dimensions differ");
  }
  return cost_eval(cost, target.matrix(), sim.matrix());
}

}  // namespace qprog

#endif  // QPROG_CHANNELS_HPP
