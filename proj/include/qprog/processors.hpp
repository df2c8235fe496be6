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

// Programmable processors as CPTP maps Λ from program states to Choi
// matrices: teleportation, port-based teleportation (full and Choi-space
// reduced) and parametric quantum circuits.

#ifndef QPROG_PROCESSORS_HPP
#define QPROG_PROCESSORS_HPP

#include <algorithm>
#include <boost/multiprecision/cpp_int.hpp>
#include <cmath>
#include <memory>
#include <numeric>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "qprog/channels.hpp"

namespace qprog {

inline constexpr double kProcessorTol = 1e-8;

inline constexpr int kMaxPbtProgramDim = 64;   // full PBT, N <= 3 at d = 2
inline constexpr int kMaxPbtPovmDim = 512;     // reduced PBT, N <= 8 at d = 2
inline constexpr int kMaxPqcRegisters = 6;
inline constexpr int kMaxMpqcRegisters = 4;

/// Set of admissible programs of a processor.
enum class ProgramSet {
  kStates,  // all density matrices
  kChoi,    // Choi states on (A, B) with Tr_B = I/d_A
};

/// Structural tag carried by a program state.
enum class ProgramStructure { kGeneric, kPortSymmetric, kChoiPower };

inline std::string structure_name(ProgramStructure s) {
  switch (s) {
    case ProgramStructure::kGeneric:
      return "generic";
    case ProgramStructure::kPortSymmetric:
      return "port-symmetric";
    case ProgramStructure::kChoiPower:
      return "choi-power";
  }
  return "generic";
}

struct ProgramState {
  DensityMatrix state;
  ProgramStructure structure = ProgramStructure::kGeneric;

  const CMatrix& matrix() const { return state.matrix(); }
  Eigen::Index dim() const { return state.dim(); }
};

/// Linear CPTP map Λ: program space → Choi space (input copy, output),
/// stored as Kraus operators together with its transfer matrix.
class ProcessorMap {
 public:
  ProcessorMap() = default;

  ProcessorMap(std::vector<CMatrix> kraus, int d_prog, int d_in, int d_out,
               std::string label, ProgramSet set = ProgramSet::kStates)
      : kraus_(std::move(kraus)),
        d_prog_(d_prog),
        d_in_(d_in),
        d_out_(d_out),
        label_(std::move(label)),
        set_(set) {
    const Eigen::Index n = static_cast<Eigen::Index>(d_in) * d_out;
    CMatrix acc = CMatrix::Zero(d_prog, d_prog);
    for (const CMatrix& a : kraus_) {
      if (a.rows() != n || a.cols() != d_prog) {
        throw DimensionError("ProcessorMap: Kraus operator has wrong shape");
      }
      acc += a.adjoint() * a;
    }
    double err = (acc - identity(d_prog)).cwiseAbs().maxCoeff();
    if (err > kProcessorTol) {
      std::ostringstream msg;
      msg << "ProcessorMap(" << label_
          << "): not trace preserving, max|sum A^dag A - I| = " << err;
      throw ValidationError(msg.str());
    }
    transfer_ = CMatrix::Zero(n * n, static_cast<Eigen::Index>(d_prog) * d_prog);
    for (const CMatrix& a : kraus_) {
      transfer_ += kron(a, CMatrix(a.conjugate()));
    }
  }

  /// Builds the map from its transfer matrix S, vec(Λ(π)) = S vec(π) in
  /// row-major vectorization, and extracts Kraus operators from the
  /// eigendecomposition of its Choi operator.
  static ProcessorMap from_transfer(const CMatrix& s, int d_prog, int d_in,
                                    int d_out, std::string label,
                                    ProgramSet set = ProgramSet::kStates) {
    const Eigen::Index n = static_cast<Eigen::Index>(d_in) * d_out;
    const Eigen::Index dp = d_prog;
    if (s.rows() != n * n || s.cols() != dp * dp) {
      throw DimensionError("ProcessorMap::from_transfer: shape mismatch");
    }
    // J[(a,i),(b,j)] = Λ(|a><b|)_{ij}
    CMatrix j(dp * n, dp * n);
    for (Eigen::Index a = 0; a < dp; ++a) {
      for (Eigen::Index b = 0; b < dp; ++b) {
        for (Eigen::Index r = 0; r < n; ++r) {
          for (Eigen::Index c = 0; c < n; ++c) {
            j(a * n + r, b * n + c) = s(r * n + c, a * dp + b);
          }
        }
      }
    }
    SpectralDecomposition eig = herm_eig(hermitian_part(j));
    const double cut = 1e-12 * std::max(1.0, eig.eigenvalues.cwiseAbs().maxCoeff());
    std::vector<CMatrix> kraus;
    for (Eigen::Index k = 0; k < eig.dim(); ++k) {
      const double lam = eig.eigenvalues[k];
      if (lam <= cut) {
        if (lam < -1e-9) {
          throw ValidationError(
              "ProcessorMap::from_transfer: map is not completely positive");
        }
        continue;
      }
      CMatrix a(n, dp);
      const double w = std::sqrt(lam);
      for (Eigen::Index r = 0; r < n; ++r) {
        for (Eigen::Index c = 0; c < dp; ++c) {
          a(r, c) = w * eig.eigenvectors(c * n + r, k);
        }
      }
      kraus.push_back(std::move(a));
    }
    return ProcessorMap(std::move(kraus), d_prog, d_in, d_out,
                        std::move(label), set);
  }

  const std::vector<CMatrix>& kraus_ops() const { return kraus_; }
  const CMatrix& transfer() const { return transfer_; }
  int d_prog() const { return d_prog_; }
  int d_in() const { return d_in_; }
  int d_out() const { return d_out_; }
  int d_choi() const { return d_in_ * d_out_; }
  const std::string& label() const { return label_; }
  ProgramSet program_set() const { return set_; }

  /// Λ(π) on a raw operator (linear extension).
  CMatrix apply(const CMatrix& pi) const {
    if (pi.rows() != d_prog_ || pi.cols() != d_prog_) {
      std::ostringstream msg;
      msg << "ProcessorMap::apply(" << label_ << "): program has dimension "
          << pi.rows() << ", expected " << d_prog_;
      throw DimensionError(msg.str());
    }
    CVector v = transfer_ * vec_rowmajor(pi);
    return unvec_rowmajor(v, d_choi(), d_choi());
  }

  ChoiMatrix apply(const ProgramState& pi) const {
    return ChoiMatrix(hermitian_part(apply(pi.matrix())), d_in_, d_out_);
  }

  /// Λ*(X) = Σ_k A_k† X A_k.
  CMatrix dual(const CMatrix& x) const {
    if (x.rows() != d_choi() || x.cols() != d_choi()) {
      throw DimensionError("ProcessorMap::dual: dimension mismatch");
    }
    CVector v = transfer_.adjoint() * vec_rowmajor(x);
    return unvec_rowmajor(v, d_prog_, d_prog_);
  }

 private:
  std::vector<CMatrix> kraus_;
  CMatrix transfer_;
  int d_prog_ = 0;
  int d_in_ = 0;
  int d_out_ = 0;
  std::string label_;
  ProgramSet set_ = ProgramSet::kStates;
};

inline ChoiMatrix processor_apply(const ProcessorMap& p,
                                  const ProgramState& pi) {
  return p.apply(pi);
}

inline CMatrix processor_dual(const ProcessorMap& p, const CMatrix& x) {
  require_hermitian(x, "processor_dual");
  return hermitian_part(p.dual(x));
}

inline ProgramState make_program(const CMatrix& m,
                                 ProgramStructure s = ProgramStructure::kGeneric) {
  return ProgramState{DensityMatrix(m), s};
}

/// χ^{⊗N} as a program state on the interleaved ordering (A1,B1,…,AN,BN).
inline ProgramState choi_power_program(const CMatrix& chi, int n) {
  return ProgramState{DensityMatrix(hermitian_part(kron_power(chi, n))),
                      ProgramStructure::kChoiPower};
}

// ---------------------------------------------------------------------------
// Teleportation

/// Λ(π) = d^{-2} Σ_i (U_i* ⊗ U_i) π (U_i* ⊗ U_i)†, with π on (A, B).
inline ProcessorMap teleportation_processor(int d) {
  if (d < 2) {
    throw DomainError("teleportation_processor: d must be at least 2");
  }
  std::vector<CMatrix> kraus;
  for (const CMatrix& u : weyl_unitaries(d)) {
    kraus.push_back(kron(CMatrix(u.conjugate()), u) / static_cast<double>(d));
  }
  std::ostringstream label;
  label << "teleportation(d=" << d << ")";
  return ProcessorMap(std::move(kraus), d * d, d, d, label.str());
}

// ---------------------------------------------------------------------------
// Port-based teleportation

enum class PbtMeasurement {
  kMaxEntangled,  // Φ_{A_i C}
  kSinglet,       // Ψ⁻_{A_i C}, qubits only
};

namespace detail {

inline int int_pow(int base, int exp) {
  long long r = 1;
  for (int i = 0; i < exp; ++i) {
    r *= base;
    if (r > (1LL << 30)) {
      throw CapacityError("dimension overflow");
    }
  }
  return static_cast<int>(r);
}

// Projector onto the pair state of (A_i, C) embedded on (A_1..A_N, C).
inline CMatrix pbt_pair_projector(int n, int d, int port, PbtMeasurement m) {
  CVector pair;
  if (m == PbtMeasurement::kMaxEntangled) {
    pair = max_entangled_vector(d);
  } else {
    if (d != 2) {
      throw DomainError("pbt_povm: singlet measurement requires d = 2");
    }
    pair = CVector::Zero(4);
    pair[1] = 1.0 / std::sqrt(2.0);
    pair[2] = -1.0 / std::sqrt(2.0);
  }
  CMatrix proj_pair = pair * pair.adjoint();
  // Order (A_port, C, rest) then move into (A_1..A_N, C).
  CMatrix local = kron(proj_pair, identity(int_pow(d, n - 1)));
  std::vector<int> dims(static_cast<std::size_t>(n + 1), d);
  // Current order: [A_port, C, A_others in increasing order].
  std::vector<int> current;
  current.push_back(port);
  current.push_back(n);  // C
  for (int k = 0; k < n; ++k) {
    if (k != port) {
      current.push_back(k);
    }
  }
  // perm[j] = position in current order of target subsystem j.
  std::vector<int> perm(static_cast<std::size_t>(n + 1));
  for (int j = 0; j <= n; ++j) {
    perm[static_cast<std::size_t>(j)] = static_cast<int>(
        std::find(current.begin(), current.end(), j) - current.begin());
  }
  return permute_subsystems(local, SubsystemShape(dims), perm);
}

}  // namespace detail

/// Square-root-measurement POVM on (A_1..A_N, C):
/// Π_i = σ^{-1/2} Φ_{A_iC} σ^{-1/2} + (1/N)(I − Σ_k σ^{-1/2} Φ_{A_kC} σ^{-1/2}),
/// σ = Σ_i Φ_{A_iC}. N = 1 returns {I}.
inline std::vector<CMatrix> pbt_povm(int n, int d,
                                     PbtMeasurement m = PbtMeasurement::kMaxEntangled) {
  if (n < 1 || d < 2) {
    throw DomainError("pbt_povm: need N >= 1 and d >= 2");
  }
  const int dim = detail::int_pow(d, n + 1);
  if (dim > kMaxPbtPovmDim) {
    std::ostringstream msg;
    msg << "pbt_povm: POVM dimension " << dim << " exceeds cap "
        << kMaxPbtPovmDim;
    throw CapacityError(msg.str());
  }
  if (n == 1) {
    if (m == PbtMeasurement::kSinglet && d != 2) {
      throw DomainError("pbt_povm: singlet measurement requires d = 2");
    }
    return {identity(dim)};
  }
  std::vector<CMatrix> phis;
  CMatrix sigma = CMatrix::Zero(dim, dim);
  for (int i = 0; i < n; ++i) {
    phis.push_back(detail::pbt_pair_projector(n, d, i, m));
    sigma += phis.back();
  }
  CMatrix s = inv_sqrt_psd(hermitian_part(sigma));
  std::vector<CMatrix> tilde;
  CMatrix total = CMatrix::Zero(dim, dim);
  for (int i = 0; i < n; ++i) {
    tilde.push_back(hermitian_part(s * phis[static_cast<std::size_t>(i)] * s));
    total += tilde.back();
  }
  CMatrix rest = (identity(dim) - total) / static_cast<double>(n);
  std::vector<CMatrix> out;
  for (int i = 0; i < n; ++i) {
    out.push_back(hermitian_part(tilde[static_cast<std::size_t>(i)] + rest));
  }
  return out;
}

namespace detail {

// ⟨l|_C Π |k⟩_C as an operator on A (C is the last factor of dimension d).
inline CMatrix c_block(const CMatrix& pi, int d, int l, int k) {
  const Eigen::Index da = pi.rows() / d;
  CMatrix out(da, da);
  for (Eigen::Index r = 0; r < da; ++r) {
    for (Eigen::Index c = 0; c < da; ++c) {
      out(r, c) = pi(r * d + l, c * d + k);
    }
  }
  return out;
}

// Fills transfer-matrix entry block S[(r, c), :] with G_{rc}: χ_rc = Tr[G π],
// so S[(r,c),(a,b)] = G(b, a).
inline void set_transfer_row(CMatrix& s, Eigen::Index row, const CMatrix& g) {
  const Eigen::Index dp = g.rows();
  for (Eigen::Index a = 0; a < dp; ++a) {
    for (Eigen::Index b = 0; b < dp; ++b) {
      s(row, a * dp + b) = g(b, a);
    }
  }
}

}  // namespace detail

/// Full PBT processor on programs over (A1,B1,…,AN,BN), d_prog = d^{2N}.
inline ProcessorMap pbt_processor(int n, int d,
                                  PbtMeasurement m = PbtMeasurement::kMaxEntangled) {
  if (n < 1 || d < 2) {
    throw DomainError("pbt_processor: need N >= 1 and d >= 2");
  }
  const int dp = detail::int_pow(d, 2 * n);
  if (dp > kMaxPbtProgramDim) {
    std::ostringstream msg;
    msg << "pbt_processor: program dimension " << dp << " exceeds cap "
        << kMaxPbtProgramDim << " (use pbt_reduced_map)";
    throw CapacityError(msg.str());
  }
  auto povm = pbt_povm(n, d, m);
  const int nc = d * d;  // Choi dimension
  // Grouped (A_1..A_N, B_1..B_N) → interleaved (A_1,B_1,…).
  std::vector<int> dims(static_cast<std::size_t>(2 * n), d);
  std::vector<int> perm(static_cast<std::size_t>(2 * n));
  for (int i = 0; i < n; ++i) {
    perm[static_cast<std::size_t>(2 * i)] = i;
    perm[static_cast<std::size_t>(2 * i + 1)] = n + i;
  }
  SubsystemShape grouped(dims);
  CMatrix pmat = permutation_operator(grouped, perm);

  CMatrix s = CMatrix::Zero(nc * nc, static_cast<Eigen::Index>(dp) * dp);
  for (int k = 0; k < d; ++k) {
    for (int mm = 0; mm < d; ++mm) {
      for (int l = 0; l < d; ++l) {
        for (int nn = 0; nn < d; ++nn) {
          CMatrix g = CMatrix::Zero(dp, dp);
          for (int i = 0; i < n; ++i) {
            CMatrix pa = detail::c_block(povm[static_cast<std::size_t>(i)], d, l, k);
            std::vector<CMatrix> bfac(static_cast<std::size_t>(n), identity(d));
            CMatrix e = CMatrix::Zero(d, d);
            e(nn, mm) = 1.0;
            bfac[static_cast<std::size_t>(i)] = e;
            g += kron(pa, kron_all(bfac));
          }
          g /= static_cast<double>(d);
          CMatrix gi = pmat * g * pmat.adjoint();
          const Eigen::Index r = k * d + mm;
          const Eigen::Index c = l * d + nn;
          detail::set_transfer_row(s, r * nc + c, gi);
        }
      }
    }
  }
  std::ostringstream label;
  label << "pbt(N=" << n << ",d=" << d << ")";
  return ProcessorMap::from_transfer(s, dp, d, d, label.str());
}

/// PBT map restricted to programs χ^{⊗N}, written as a map of the single-port
/// Choi state χ on (A, B). Valid on the Choi set only.
inline ProcessorMap pbt_reduced_map(int n, int d,
                                    PbtMeasurement m = PbtMeasurement::kMaxEntangled) {
  if (n < 1 || d < 2) {
    throw DomainError("pbt_reduced_map: need N >= 1 and d >= 2");
  }
  auto povm = pbt_povm(n, d, m);  // enforces the capacity cap
  const int nc = d * d;
  std::vector<int> adims(static_cast<std::size_t>(n), d);
  SubsystemShape ashape(adims);
  const double weight = 1.0 / std::pow(static_cast<double>(d), n);
  CMatrix s = CMatrix::Zero(nc * nc, nc * nc);
  for (int k = 0; k < d; ++k) {
    for (int l = 0; l < d; ++l) {
      // Σ_i Tr_{Ā_i} ⟨l|_C Π_i |k⟩_C
      CMatrix t = CMatrix::Zero(d, d);
      for (int i = 0; i < n; ++i) {
        CMatrix pa = detail::c_block(povm[static_cast<std::size_t>(i)], d, l, k);
        t += partial_trace(pa, ashape, {i});
      }
      t *= weight;
      for (int mm = 0; mm < d; ++mm) {
        for (int nn = 0; nn < d; ++nn) {
          CMatrix e = CMatrix::Zero(d, d);
          e(nn, mm) = 1.0;
          CMatrix g = kron(t, e);
          const Eigen::Index r = k * d + mm;
          const Eigen::Index c = l * d + nn;
          detail::set_transfer_row(s, r * nc + c, g);
        }
      }
    }
  }
  std::ostringstream label;
  label << "pbt_reduced(N=" << n << ",d=" << d << ")";
  return ProcessorMap::from_transfer(s, nc, d, d, label.str(), ProgramSet::kChoi);
}

/// (1/N!) Σ_s P_s π P_s† over joint permutations of the (A_i, B_i) pairs.
inline ProgramState symmetrize_program(const CMatrix& pi, int n, int d) {
  const int dp = detail::int_pow(d, 2 * n);
  if (pi.rows() != dp || pi.cols() != dp) {
    throw DimensionError("symmetrize_program: program dimension mismatch");
  }
  std::vector<int> ports(static_cast<std::size_t>(n));
  std::iota(ports.begin(), ports.end(), 0);
  SubsystemShape shape(std::vector<int>(static_cast<std::size_t>(2 * n), d));
  CMatrix acc = CMatrix::Zero(dp, dp);
  int count = 0;
  do {
    std::vector<int> perm(static_cast<std::size_t>(2 * n));
    for (int j = 0; j < n; ++j) {
      perm[static_cast<std::size_t>(2 * j)] = 2 * ports[static_cast<std::size_t>(j)];
      perm[static_cast<std::size_t>(2 * j + 1)] =
          2 * ports[static_cast<std::size_t>(j)] + 1;
    }
    acc += permute_subsystems(pi, shape, perm);
    ++count;
  } while (std::next_permutation(ports.begin(), ports.end()));
  acc /= static_cast<double>(count);
  return ProgramState{DensityMatrix(hermitian_part(acc)),
                      ProgramStructure::kPortSymmetric};
}

/// binom(N + d⁴ − 1, d⁴ − 1): number of real parameters of a port-symmetric
/// program.
inline boost::multiprecision::cpp_int symmetric_param_count(int n, int d) {
  if (n < 1 || d < 1) {
    throw DomainError("symmetric_param_count: need N >= 1 and d >= 1");
  }
  using boost::multiprecision::cpp_int;
  const cpp_int k = cpp_int(d) * d * d * d - 1;
  // binom(N + k, N) computed incrementally; every partial result is exact.
  cpp_int r = 1;
  for (int i = 1; i <= n; ++i) {
    r = r * (k + i) / i;
  }
  return r;
}

// ---------------------------------------------------------------------------
// Parametric quantum circuits

struct PqcHamiltonians {
  CMatrix h0;
  CMatrix h1;
};

/// H0 = √2(X⊗Y − Y⊗X), H1 = (√2Z + √3Y + √5X) ⊗ (Y + √2Z), on (A, R0).
inline PqcHamiltonians default_pqc_hamiltonians() {
  using namespace pauli;
  const double r2 = std::sqrt(2.0), r3 = std::sqrt(3.0), r5 = std::sqrt(5.0);
  PqcHamiltonians h;
  h.h0 = r2 * (kron(X(), Y()) - kron(Y(), X()));
  h.h1 = kron(r2 * Z() + r3 * Y() + r5 * X(), Y() + r2 * Z());
  return h;
}

/// H_AD = (arcsin(√p)/2)(Y⊗X − X⊗Y); exp(i H_AD) on (A, R0 = |0>) realizes
/// amplitude damping with parameter p.
inline CMatrix ad_hamiltonian(double p) {
  detail::check_probability(p, "ad_hamiltonian");
  using namespace pauli;
  return (std::asin(std::sqrt(p)) / 2.0) * (kron(Y(), X()) - kron(X(), Y()));
}

namespace detail {

// Controlled gate on (A, R0, R_j) with a register of dimension `reg_dim`:
// level 0 → e^{iH0}, level 1 → e^{iH1}, level 2 (qutrit only) → identity.
inline CMatrix pqc_local_gate(const CMatrix& e0, const CMatrix& e1,
                              int reg_dim) {
  CMatrix g = CMatrix::Zero(4 * reg_dim, 4 * reg_dim);
  for (int lvl = 0; lvl < reg_dim; ++lvl) {
    CMatrix proj = CMatrix::Zero(reg_dim, reg_dim);
    proj(lvl, lvl) = 1.0;
    const CMatrix& u = lvl == 0 ? e0 : (lvl == 1 ? e1 : identity(4));
    g += kron(u, proj);
  }
  return g;
}

inline ProcessorMap build_pqc(int n, const PqcHamiltonians& h, int reg_dim,
                              const std::string& label) {
  require_hermitian(h.h0, "pqc_processor: H0");
  require_hermitian(h.h1, "pqc_processor: H1");
  if (h.h0.rows() != 4 || h.h1.rows() != 4) {
    throw DimensionError("pqc_processor: Hamiltonians must act on (A, R0), 4x4");
  }
  const CMatrix e0 = expi(h.h0);
  const CMatrix e1 = expi(h.h1);
  CMatrix gate = pqc_local_gate(e0, e1, reg_dim);
  // Subsystems (A, R0, R1..RN).
  std::vector<int> dims{2, 2};
  for (int j = 0; j < n; ++j) {
    dims.push_back(reg_dim);
  }
  SubsystemShape shape(dims);
  const int d_r = 2 * int_pow(reg_dim, n);  // program dimension
  const int d_full = 2 * d_r;
  const int rest = int_pow(reg_dim, n - 1);
  CMatrix u = identity(d_full);
  for (int j = 1; j <= n; ++j) {
    // Gate in order (A, R0, R_j, others) moved into (A, R0, R1..RN).
    CMatrix local = kron(gate, identity(rest));
    std::vector<int> current{0, 1, j + 1};
    for (int k = 2; k < n + 2; ++k) {
      if (k != j + 1) {
        current.push_back(k);
      }
    }
    std::vector<int> perm(current.size());
    for (std::size_t t = 0; t < current.size(); ++t) {
      perm[t] = static_cast<int>(
          std::find(current.begin(), current.end(), static_cast<int>(t)) -
          current.begin());
    }
    CMatrix uj = permute_subsystems(local, shape, perm);
    u = uj * u;  // U_N ⋯ U_1
  }
  // V = (I_B ⊗ U)(|Φ>_BA ⊗ I_R): R → (B, A, R)
  CVector phi = max_entangled_vector(2);
  CMatrix phi_r = kron(CMatrix(phi), identity(d_r));
  CMatrix v = kron(identity(2), u) * phi_r;
  std::vector<CMatrix> kraus;
  for (int r = 0; r < d_r; ++r) {
    CMatrix a(4, d_r);
    for (int ba = 0; ba < 4; ++ba) {
      a.row(ba) = v.row(static_cast<Eigen::Index>(ba) * d_r + r);
    }
    kraus.push_back(std::move(a));
  }
  return ProcessorMap(std::move(kraus), d_r, 2, 2, label);
}

}  // namespace detail

/// PQC processor on programs over (R0, R1..RN), all qubits.
inline ProcessorMap pqc_processor(int n, const PqcHamiltonians& h =
                                             default_pqc_hamiltonians()) {
  if (n < 1) {
    throw DomainError("pqc_processor: N must be at least 1");
  }
  if (n > kMaxPqcRegisters) {
    std::ostringstream msg;
    msg << "pqc_processor: N = " << n << " exceeds cap " << kMaxPqcRegisters;
    throw CapacityError(msg.str());
  }
  std::ostringstream label;
  label << "pqc(N=" << n << ")";
  return detail::build_pqc(n, h, 2, label.str());
}

/// Monotonic PQC: registers R1..RN are qutrits whose level 2 applies no gate.
inline ProcessorMap mpqc_processor(int n, const PqcHamiltonians& h =
                                              default_pqc_hamiltonians()) {
  if (n < 1) {
    throw DomainError("mpqc_processor: N must be at least 1");
  }
  if (n > kMaxMpqcRegisters) {
    std::ostringstream msg;
    msg << "mpqc_processor: N = " << n << " exceeds cap " << kMaxMpqcRegisters;
    throw CapacityError(msg.str());
  }
  std::ostringstream label;
  label << "mpqc(N=" << n << ")";
  return detail::build_pqc(n, h, 3, label.str());
}

/// Embeds a PQC_M program (R0 ⊗ M qubit registers) into mPQC_N as
/// π_M ⊗ |2><2|^{⊗(N−M)}, with qubit levels mapped to qutrit levels {0, 1}.
inline CMatrix embed_pqc_program(const CMatrix& pi_m, int m, int n) {
  if (m < 1 || m > n) {
    throw DomainError("embed_pqc_program: need 1 <= M <= N");
  }
  const int dm = 2 * detail::int_pow(2, m);
  if (pi_m.rows() != dm || pi_m.cols() != dm) {
    throw DimensionError("embed_pqc_program: program dimension mismatch");
  }
  CMatrix iso = CMatrix::Zero(3, 2);
  iso(0, 0) = 1.0;
  iso(1, 1) = 1.0;
  CMatrix v = identity(2);
  for (int j = 0; j < m; ++j) {
    v = kron(v, iso);
  }
  CMatrix out = v * pi_m * v.adjoint();
  CMatrix two = CMatrix::Zero(3, 3);
  two(2, 2) = 1.0;
  for (int j = m; j < n; ++j) {
    out = kron(out, two);
  }
  return out;
}

}  // namespace qprog

#endif  // QPROG_PROCESSORS_HPP
