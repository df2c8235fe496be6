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

// Dense primal-dual interior-point solver for real symmetric block SDPs in
// standard form, a Hermitian modeling layer on top of it, and the channel
// simulation programs: diamond distance, diamond/trace/fidelity-optimal
// programs and Choi-space PBT optimization.
//
// Standard form:  minimize <C, X>  s.t.  <A_i, X> = b_i,  X ⪰ 0,
// with X block diagonal. The dual is  maximize b·y  s.t.  C − Σ y_i A_i = Z ⪰ 0.

#ifndef QPROG_SDP_HPP
#define QPROG_SDP_HPP

#include <algorithm>
#include <cmath>
#include <functional>
#include <iomanip>
#include <limits>
#include <ostream>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "qprog/optim.hpp"
#include "qprog/processors.hpp"

namespace qprog {

// ---------------------------------------------------------------------------
// Problem and solution types

/// Coefficient of one constraint (or of the objective) on a single block.
struct SdpTerm {
  int block = 0;
  RMatrix a;  // symmetric, blocks[block] × blocks[block]
};

struct SdpConstraint {
  std::vector<SdpTerm> terms;
  double b = 0.0;
};

struct SdpProblem {
  std::vector<int> blocks;
  std::vector<RMatrix> c;  // objective, one symmetric matrix per block
  std::vector<SdpConstraint> constraints;

  int add_block(int n) {
    blocks.push_back(n);
    c.push_back(RMatrix::Zero(n, n));
    return static_cast<int>(blocks.size()) - 1;
  }

  int total_dim() const {
    int t = 0;
    for (int n : blocks) {
      t += n;
    }
    return t;
  }

  void validate() const {
    if (blocks.empty()) {
      throw ValidationError("SdpProblem: no blocks");
    }
    if (c.size() != blocks.size()) {
      throw DimensionError("SdpProblem: objective/block count mismatch");
    }
    auto check = [&](const RMatrix& m, int blk, std::string_view what) {
      if (blk < 0 || blk >= static_cast<int>(blocks.size())) {
        throw DimensionError(std::string(what) + ": block index out of range");
      }
      const int n = blocks[static_cast<std::size_t>(blk)];
      if (m.rows() != n || m.cols() != n) {
        throw DimensionError(std::string(what) + ": block size mismatch");
      }
      double asym = m.size() == 0 ? 0.0 : (m - m.transpose()).cwiseAbs().maxCoeff();
      double scale = m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff();
      if (asym > 1e-12 * std::max(1.0, scale)) {
        throw SymmetryError(std::string(what) + ": coefficient not symmetric");
      }
    };
    for (std::size_t k = 0; k < blocks.size(); ++k) {
      check(c[k], static_cast<int>(k), "SdpProblem objective");
    }
    for (const SdpConstraint& con : constraints) {
      for (const SdpTerm& t : con.terms) {
        check(t.a, t.block, "SdpProblem constraint");
      }
    }
  }
};

enum class SdpStatus { kOptimal, kMaxIter, kInfeasible, kNumericalFailure };

inline std::string status_name(SdpStatus s) {
  switch (s) {
    case SdpStatus::kOptimal:
      return "optimal";
    case SdpStatus::kMaxIter:
      return "max_iter";
    case SdpStatus::kInfeasible:
      return "infeasible";
    case SdpStatus::kNumericalFailure:
      return "numerical_failure";
  }
  return "?";
}

/// Per-iteration diagnostics.
struct SdpIterate {
  double primal_objective = 0.0;
  double dual_objective = 0.0;
  double primal_residual = 0.0;  // ‖b − A(X)‖ / (1 + ‖b‖)
  double dual_residual = 0.0;    // ‖C − Z − Aᵀy‖ / (1 + ‖C‖)
  double complementarity = 0.0;  // <X, Z>
};

struct SdpSolution {
  std::vector<RMatrix> x;
  std::vector<RMatrix> z;
  RVector y;
  double primal_objective = 0.0;
  double dual_objective = 0.0;
  double gap = 0.0;  // |primal − dual|
  double primal_residual = 0.0;
  double dual_residual = 0.0;
  SdpStatus status = SdpStatus::kMaxIter;
  int iterations = 0;
  std::string message;
  std::vector<SdpIterate> history;
};

struct SdpOptions {
  double tol = 1e-8;
  int max_iters = 100;
  double step_fraction = 0.98;
  double infeasibility_bound = 1e12;
};

/// Raised by solvers that require an optimal solution.
class SdpError : public Error {
 public:
  explicit SdpError(const std::string& msg, SdpSolution sol = {})
      : Error(msg), solution(std::move(sol)) {}
  SdpSolution solution;
};

// ---------------------------------------------------------------------------
// Interior-point method

namespace detail {

using BlockMat = std::vector<RMatrix>;

inline double block_dot(const BlockMat& a, const BlockMat& b) {
  double s = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) {
    s += (a[k].array() * b[k].array()).sum();
  }
  return s;
}

inline double block_norm(const BlockMat& a) { return std::sqrt(block_dot(a, a)); }

inline RMatrix sym(const RMatrix& m) { return (m + m.transpose()) * 0.5; }

// A(X)_i = Σ_terms <A_i, X>.
inline RVector apply_a(const SdpProblem& p, const BlockMat& x) {
  RVector out(static_cast<Eigen::Index>(p.constraints.size()));
  for (std::size_t i = 0; i < p.constraints.size(); ++i) {
    double s = 0.0;
    for (const SdpTerm& t : p.constraints[i].terms) {
      s += (t.a.array() * x[static_cast<std::size_t>(t.block)].array()).sum();
    }
    out[static_cast<Eigen::Index>(i)] = s;
  }
  return out;
}

// Aᵀ(y) = Σ_i y_i A_i.
inline BlockMat apply_at(const SdpProblem& p, const RVector& y) {
  BlockMat out;
  for (int n : p.blocks) {
    out.push_back(RMatrix::Zero(n, n));
  }
  for (std::size_t i = 0; i < p.constraints.size(); ++i) {
    const double yi = y[static_cast<Eigen::Index>(i)];
    for (const SdpTerm& t : p.constraints[i].terms) {
      out[static_cast<std::size_t>(t.block)] += yi * t.a;
    }
  }
  return out;
}

// Largest α with M + α dM ⪰ 0 given M = L Lᵀ.
inline double max_step(const Eigen::LLT<RMatrix>& chol, const RMatrix& dm) {
  if (dm.size() == 0) {
    return std::numeric_limits<double>::infinity();
  }
  RMatrix b = chol.matrixL().solve(dm);
  RMatrix s = chol.matrixL().solve(RMatrix(b.transpose()));
  Eigen::SelfAdjointEigenSolver<RMatrix> es(sym(s), Eigen::EigenvaluesOnly);
  double lo = es.eigenvalues().minCoeff();
  return lo >= 0 ? std::numeric_limits<double>::infinity() : -1.0 / lo;
}

// Nesterov-Todd scaling of one block: T X Tᵀ = T⁻ᵀ Z T⁻¹ = D (diagonal).
struct NtScaling {
  RMatrix t;     // T
  RMatrix tinv;  // T⁻¹
  RMatrix w;     // T⁻¹ T⁻ᵀ, with W Z W = X
  RVector d;     // diag(D)
  Eigen::LLT<RMatrix> chol_x;
  Eigen::LLT<RMatrix> chol_z;
};

inline bool nt_scaling(const RMatrix& x, const RMatrix& z, NtScaling& s) {
  s.chol_x.compute(x);
  s.chol_z.compute(z);
  if (s.chol_x.info() != Eigen::Success || s.chol_z.info() != Eigen::Success) {
    return false;
  }
  RMatrix l = s.chol_x.matrixL();
  RMatrix r = s.chol_z.matrixL();
  Eigen::JacobiSVD<RMatrix> svd(r.transpose() * l,
                                Eigen::ComputeFullU | Eigen::ComputeFullV);
  s.d = svd.singularValues();
  if (s.d.size() > 0 && s.d.minCoeff() <= 0.0) {
    return false;
  }
  const RMatrix& u = svd.matrixU();
  RVector sq = s.d.cwiseSqrt();
  RVector isq = sq.cwiseInverse();
  s.t = isq.asDiagonal() * u.transpose() * r.transpose();
  s.tinv = r.transpose().triangularView<Eigen::Upper>().solve(
      RMatrix(u * sq.asDiagonal()));
  s.w = sym(s.tinv * s.tinv.transpose());
  return true;
}

// T⁻¹ Δ T⁻ᵀ where Δ solves (DΔ + ΔD)/2 = rhs.
inline RMatrix lyap_scaled(const NtScaling& s, const RMatrix& rhs) {
  const Eigen::Index n = rhs.rows();
  RMatrix delta(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) {
      delta(i, j) = 2.0 * rhs(i, j) / (s.d[i] + s.d[j]);
    }
  }
  return sym(s.tinv * delta * s.tinv.transpose());
}

}  // namespace detail

/// Infeasible-start primal-dual interior-point method with Nesterov-Todd
/// scaling and a Mehrotra predictor-corrector.
inline SdpSolution solve_sdp(const SdpProblem& p, const SdpOptions& opt = {}) {
  using detail::BlockMat;
  p.validate();
  const std::size_t nb = p.blocks.size();
  const auto m = static_cast<Eigen::Index>(p.constraints.size());
  const double n_total = static_cast<double>(p.total_dim());

  RVector b(m);
  for (Eigen::Index i = 0; i < m; ++i) {
    b[i] = p.constraints[static_cast<std::size_t>(i)].b;
  }
  const double norm_b = b.norm();
  const double norm_c = detail::block_norm(p.c);

  // Starting point.
  BlockMat x(nb), z(nb);
  for (std::size_t k = 0; k < nb; ++k) {
    const int n = p.blocks[k];
    const double rn = std::sqrt(static_cast<double>(n));
    double xi = std::max(10.0, rn);
    double eta = std::max({10.0, rn, p.c[k].norm()});
    for (const SdpConstraint& con : p.constraints) {
      for (const SdpTerm& t : con.terms) {
        if (t.block == static_cast<int>(k)) {
          const double an = t.a.norm();
          xi = std::max(xi, n * (1.0 + std::abs(con.b)) / (1.0 + an));
          eta = std::max(eta, an);
        }
      }
    }
    x[k] = xi * RMatrix::Identity(n, n);
    z[k] = eta * RMatrix::Identity(n, n);
  }
  RVector y = RVector::Zero(m);

  SdpSolution sol;
  std::vector<detail::NtScaling> scal(nb);
  for (int it = 0; it <= opt.max_iters; ++it) {
    RVector rp = b - detail::apply_a(p, x);
    BlockMat aty = detail::apply_at(p, y);
    BlockMat rd(nb);
    for (std::size_t k = 0; k < nb; ++k) {
      rd[k] = p.c[k] - z[k] - aty[k];
    }
    const double pobj = detail::block_dot(p.c, x);
    const double dobj = b.dot(y);
    const double xz = detail::block_dot(x, z);
    const double mu = xz / n_total;
    SdpIterate diag;
    diag.primal_objective = pobj;
    diag.dual_objective = dobj;
    diag.primal_residual = rp.norm() / (1.0 + norm_b);
    diag.dual_residual = detail::block_norm(rd) / (1.0 + norm_c);
    diag.complementarity = xz;
    sol.history.push_back(diag);
    sol.iterations = it;

    const double gap = std::abs(pobj - dobj);
    if (gap <= opt.tol && diag.primal_residual <= opt.tol &&
        diag.dual_residual <= opt.tol) {
      sol.status = SdpStatus::kOptimal;
      break;
    }
    double xmax = 0.0, zmax = 0.0;
    for (std::size_t k = 0; k < nb; ++k) {
      xmax = std::max(xmax, x[k].trace());
      zmax = std::max(zmax, z[k].trace());
    }
    if (xmax > opt.infeasibility_bound || zmax > opt.infeasibility_bound ||
        y.cwiseAbs().maxCoeff() > opt.infeasibility_bound) {
      sol.status = SdpStatus::kInfeasible;
      sol.message = "iterates diverged; problem is likely infeasible";
      break;
    }
    if (it == opt.max_iters) {
      sol.status = SdpStatus::kMaxIter;
      std::ostringstream msg;
      msg << "iteration cap reached: gap " << gap << ", primal res "
          << diag.primal_residual << ", dual res " << diag.dual_residual;
      sol.message = msg.str();
      break;
    }

    bool ok = true;
    for (std::size_t k = 0; k < nb && ok; ++k) {
      ok = detail::nt_scaling(x[k], z[k], scal[k]);
    }
    if (!ok) {
      sol.status = SdpStatus::kNumericalFailure;
      sol.message = "loss of positive definiteness";
      break;
    }

    // Schur complement M_ij = <A_i, W A_j W>.
    RMatrix mm = RMatrix::Zero(m, m);
    std::vector<std::vector<RMatrix>> waw(static_cast<std::size_t>(m));
    for (Eigen::Index j = 0; j < m; ++j) {
      const auto& con = p.constraints[static_cast<std::size_t>(j)];
      for (const SdpTerm& t : con.terms) {
        const RMatrix& w = scal[static_cast<std::size_t>(t.block)].w;
        waw[static_cast<std::size_t>(j)].push_back(detail::sym(w * t.a * w));
      }
    }
    for (Eigen::Index i = 0; i < m; ++i) {
      const auto& ci = p.constraints[static_cast<std::size_t>(i)];
      for (Eigen::Index j = i; j < m; ++j) {
        const auto& cj = p.constraints[static_cast<std::size_t>(j)];
        double s = 0.0;
        for (const SdpTerm& ti : ci.terms) {
          for (std::size_t q = 0; q < cj.terms.size(); ++q) {
            if (cj.terms[q].block == ti.block) {
              s += (ti.a.array() * waw[static_cast<std::size_t>(j)][q].array()).sum();
            }
          }
        }
        mm(i, j) = s;
        mm(j, i) = s;
      }
    }
    Eigen::LDLT<RMatrix> fact(mm);
    if (fact.info() != Eigen::Success || !fact.isPositive()) {
      double ridge = 1e-14 * std::max(1.0, mm.diagonal().cwiseAbs().maxCoeff());
      fact.compute(mm + ridge * RMatrix::Identity(m, m));
    }

    // W Rd W, reused by both solves.
    BlockMat wrdw(nb);
    for (std::size_t k = 0; k < nb; ++k) {
      wrdw[k] = detail::sym(scal[k].w * rd[k] * scal[k].w);
    }
    const RVector a_wrdw = detail::apply_a(p, wrdw);

    // Solves for (dX, dy, dZ) with dX + W dZ W = Rc.
    auto solve_dir = [&](const BlockMat& rc, BlockMat& dx, RVector& dy,
                         BlockMat& dz) {
      RVector rhs = rp - detail::apply_a(p, rc) + a_wrdw;
      dy = fact.solve(rhs);
      // Iterative refinement against the unfactored operator; M is badly
      // conditioned near the optimum.
      for (int r = 0; r < 2; ++r) {
        BlockMat wadyw = detail::apply_at(p, dy);
        for (std::size_t k = 0; k < nb; ++k) {
          wadyw[k] = scal[k].w * wadyw[k] * scal[k].w;
        }
        dy += fact.solve(rhs - detail::apply_a(p, wadyw));
      }
      BlockMat atdy = detail::apply_at(p, dy);
      dx.resize(nb);
      dz.resize(nb);
      for (std::size_t k = 0; k < nb; ++k) {
        dz[k] = detail::sym(rd[k] - atdy[k]);
        dx[k] = detail::sym(rc[k] - scal[k].w * dz[k] * scal[k].w);
      }
    };
    auto step_lengths = [&](const BlockMat& dx, const BlockMat& dz) {
      double ap = std::numeric_limits<double>::infinity();
      double ad = std::numeric_limits<double>::infinity();
      for (std::size_t k = 0; k < nb; ++k) {
        ap = std::min(ap, detail::max_step(scal[k].chol_x, dx[k]));
        ad = std::min(ad, detail::max_step(scal[k].chol_z, dz[k]));
      }
      return std::make_pair(ap, ad);
    };

    // Predictor.
    BlockMat rc(nb);
    for (std::size_t k = 0; k < nb; ++k) {
      rc[k] = -x[k];
    }
    BlockMat dx, dz;
    RVector dy;
    solve_dir(rc, dx, dy, dz);
    auto [ap_aff, ad_aff] = step_lengths(dx, dz);
    ap_aff = std::min(1.0, ap_aff);
    ad_aff = std::min(1.0, ad_aff);
    double mu_aff = 0.0;
    for (std::size_t k = 0; k < nb; ++k) {
      mu_aff += ((x[k] + ap_aff * dx[k]).array() * (z[k] + ad_aff * dz[k]).array()).sum();
    }
    mu_aff /= n_total;
    const double sigma = std::clamp(std::pow(std::max(mu_aff, 0.0) / mu, 3.0), 0.0, 1.0);

    // Corrector in the scaled space.
    for (std::size_t k = 0; k < nb; ++k) {
      const auto& s = scal[k];
      RMatrix dxs = s.t * dx[k] * s.t.transpose();
      RMatrix dzs = s.tinv.transpose() * dz[k] * s.tinv;
      RMatrix rhs = -RMatrix(s.d.cwiseAbs2().asDiagonal()) -
                    detail::sym(dxs * dzs);
      rhs.diagonal().array() += sigma * mu;
      rc[k] = detail::lyap_scaled(s, rhs);
    }
    solve_dir(rc, dx, dy, dz);
    auto [ap, ad] = step_lengths(dx, dz);
    ap = std::min(1.0, opt.step_fraction * ap);
    ad = std::min(1.0, opt.step_fraction * ad);
    for (std::size_t k = 0; k < nb; ++k) {
      x[k] = detail::sym(x[k] + ap * dx[k]);
      z[k] = detail::sym(z[k] + ad * dz[k]);
    }
    y += ad * dy;
  }

  const SdpIterate& last = sol.history.back();
  sol.x = std::move(x);
  sol.z = std::move(z);
  sol.y = std::move(y);
  sol.primal_objective = last.primal_objective;
  sol.dual_objective = last.dual_objective;
  sol.gap = std::abs(last.primal_objective - last.dual_objective);
  sol.primal_residual = last.primal_residual;
  sol.dual_residual = last.dual_residual;
  return sol;
}

/// Writes the problem in SDPA sparse format. SDPA's dual form
/// max <F0, Y> s.t. <F_i, Y> = c_i, Y ⪰ 0 coincides with the standard form
/// above under F0 = −C, F_i = A_i, c_i = b_i.
inline void write_sdpa(const SdpProblem& p, std::ostream& os) {
  p.validate();
  os << std::setprecision(17);
  os << "* standard-form SDP: min <C,X> s.t. <A_i,X> = b_i, X psd (F0 = -C)\n";
  os << p.constraints.size() << "\n" << p.blocks.size() << "\n";
  for (std::size_t k = 0; k < p.blocks.size(); ++k) {
    os << p.blocks[k] << (k + 1 < p.blocks.size() ? " " : "\n");
  }
  for (std::size_t i = 0; i < p.constraints.size(); ++i) {
    os << p.constraints[i].b << (i + 1 < p.constraints.size() ? " " : "\n");
  }
  if (p.constraints.empty()) {
    os << "\n";
  }
  auto emit = [&](std::size_t matno, int blk, const RMatrix& a, double sign) {
    for (Eigen::Index r = 0; r < a.rows(); ++r) {
      for (Eigen::Index c = r; c < a.cols(); ++c) {
        if (a(r, c) != 0.0) {
          os << matno << " " << blk + 1 << " " << r + 1 << " " << c + 1 << " "
             << sign * a(r, c) << "\n";
        }
      }
    }
  };
  for (std::size_t k = 0; k < p.blocks.size(); ++k) {
    emit(0, static_cast<int>(k), p.c[k], -1.0);
  }
  for (std::size_t i = 0; i < p.constraints.size(); ++i) {
    for (const SdpTerm& t : p.constraints[i].terms) {
      emit(i + 1, t.block, t.a, 1.0);
    }
  }
}

// ---------------------------------------------------------------------------
// Hermitian modeling layer

/// [[Re H, −Im H], [Im H, Re H]].
inline RMatrix embed_hermitian(const CMatrix& h) {
  const Eigen::Index n = h.rows();
  RMatrix out(2 * n, 2 * n);
  out.topLeftCorner(n, n) = h.real();
  out.topRightCorner(n, n) = -h.imag();
  out.bottomLeftCorner(n, n) = h.imag();
  out.bottomRightCorner(n, n) = h.real();
  return out;
}

/// Inverse of embed_hermitian, averaged over the two redundant copies.
inline CMatrix extract_hermitian(const RMatrix& x) {
  const Eigen::Index n = x.rows() / 2;
  RMatrix re = (x.topLeftCorner(n, n) + x.bottomRightCorner(n, n)) * 0.5;
  RMatrix im = (x.bottomLeftCorner(n, n) - x.topRightCorner(n, n)) * 0.5;
  CMatrix h(n, n);
  h.real() = re;
  h.imag() = im;
  return hermitian_part(h);
}

/// Orthonormal Hermitian basis of n×n matrices under <A,B> = Tr(AB):
/// diagonal units, (e_ij + e_ji)/√2 and i(e_ij − e_ji)/√2 for i < j.
inline std::vector<CMatrix> hermitian_basis(int n) {
  std::vector<CMatrix> out;
  out.reserve(static_cast<std::size_t>(n * n));
  const double s = 1.0 / std::sqrt(2.0);
  for (int i = 0; i < n; ++i) {
    CMatrix e = CMatrix::Zero(n, n);
    e(i, i) = 1.0;
    out.push_back(e);
  }
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      CMatrix e = CMatrix::Zero(n, n);
      e(i, j) = s;
      e(j, i) = s;
      out.push_back(e);
      CMatrix f = CMatrix::Zero(n, n);
      f(i, j) = Complex(0.0, s);
      f(j, i) = Complex(0.0, -s);
      out.push_back(f);
    }
  }
  return out;
}

/// Builds real standard-form SDPs over complex Hermitian PSD variables and
/// nonnegative scalars. A linear functional Tr(G H) on a Hermitian variable
/// becomes <embed(G)/2, X> on its real block.
class HermitianSdp {
 public:
  /// Adjoint of a linear map into the constraint space: E ↦ L*(E).
  using Adjoint = std::function<CMatrix(const CMatrix&)>;

  int add_hermitian(int n) {
    vars_.push_back({n, false});
    problem_.add_block(2 * n);
    return static_cast<int>(vars_.size()) - 1;
  }

  int add_scalar() {
    vars_.push_back({1, true});
    problem_.add_block(1);
    return static_cast<int>(vars_.size()) - 1;
  }

  /// Adds Tr(G H_var) (or g·s for a scalar) to the minimized objective.
  void add_objective(int var, const CMatrix& g) {
    problem_.c[static_cast<std::size_t>(var)] += coefficient(var, g);
  }

  /// Σ_v Tr(G_v H_v) = b.
  void add_constraint(const std::vector<std::pair<int, CMatrix>>& terms,
                      double b) {
    SdpConstraint con;
    con.b = b;
    for (const auto& [var, g] : terms) {
      RMatrix a = coefficient(var, g);
      if (a.cwiseAbs().maxCoeff() > 0.0) {
        con.terms.push_back({var, std::move(a)});
      }
    }
    problem_.constraints.push_back(std::move(con));
  }

  /// Hermitian equality Σ_v L_v(H_v) = R on an n×n space, imposed as the n²
  /// real equations Tr(E_k ·) over hermitian_basis(n).
  void add_hermitian_equality(const std::vector<std::pair<int, Adjoint>>& maps,
                              const CMatrix& rhs) {
    const int n = static_cast<int>(rhs.rows());
    for (const CMatrix& e : hermitian_basis(n)) {
      std::vector<std::pair<int, CMatrix>> terms;
      for (const auto& [var, adj] : maps) {
        terms.emplace_back(var, adj(e));
      }
      add_constraint(terms, (e * rhs).trace().real());
    }
  }

  const SdpProblem& problem() const { return problem_; }

  CMatrix hermitian_value(const SdpSolution& s, int var) const {
    return extract_hermitian(s.x[static_cast<std::size_t>(var)]);
  }

  double scalar_value(const SdpSolution& s, int var) const {
    return s.x[static_cast<std::size_t>(var)](0, 0);
  }

 private:
  struct Var {
    int n;
    bool scalar;
  };

  RMatrix coefficient(int var, const CMatrix& g) const {
    const Var& v = vars_.at(static_cast<std::size_t>(var));
    if (g.rows() != v.n || g.cols() != v.n) {
      throw DimensionError("HermitianSdp: coefficient has wrong dimension");
    }
    if (v.scalar) {
      RMatrix a(1, 1);
      a(0, 0) = g(0, 0).real();
      return a;
    }
    return embed_hermitian(hermitian_part(g)) * 0.5;
  }

  std::vector<Var> vars_;
  SdpProblem problem_;
};

// ---------------------------------------------------------------------------
// Channel programs

/// Result of a program optimization: the projected program, the SDP value and
/// the distance moved by the final projection onto the program set.
struct ProgramOptimum {
  ProgramState program;
  double value = 0.0;
  double projection_residual = 0.0;
  SdpSolution solution;
};

namespace detail {

inline SdpSolution require_optimal(const SdpSolution& s, std::string_view what) {
  if (s.status != SdpStatus::kOptimal) {
    throw SdpError(std::string(what) + ": SDP solver returned " +
                       status_name(s.status) + " (" + s.message + ")",
                   s);
  }
  return s;
}

// Adds the program-set constraint on π: Tr π = 1, or Tr_B π = I/d_A.
inline void add_program_constraint(HermitianSdp& sdp, int pi_var, int d_prog,
                                   ProgramSet set) {
  if (set == ProgramSet::kStates) {
    sdp.add_constraint({{pi_var, identity(d_prog)}}, 1.0);
    return;
  }
  const int d = static_cast<int>(std::lround(std::sqrt(d_prog)));
  if (d * d != d_prog) {
    throw DimensionError("Choi program constraint needs a square dimension");
  }
  HermitianSdp::Adjoint adj = [d](const CMatrix& e) {
    return CMatrix(kron(e, identity(d)));
  };
  sdp.add_hermitian_equality({{pi_var, adj}}, identity(d) / static_cast<double>(d));
}

inline ProgramState finalize_program(const CMatrix& raw, int d_prog,
                                     ProgramSet set, double& residual) {
  CMatrix projected;
  if (set == ProgramSet::kChoi) {
    const int d = static_cast<int>(std::lround(std::sqrt(d_prog)));
    projected = dykstra_choi_projection(hermitian_part(raw), d, d).matrix();
  } else {
    projected = project_to_states(hermitian_part(raw)).matrix();
  }
  residual = (projected - raw).norm();
  return ProgramState{DensityMatrix(projected), ProgramStructure::kGeneric};
}

inline HermitianSdp::Adjoint identity_adjoint(double scale = 1.0) {
  return [scale](const CMatrix& e) { return CMatrix(scale * e); };
}

// Adds the epigraph t·I − Tr_out Z − S = 0 with S ⪰ 0, returning t's id.
inline int add_spectral_epigraph(HermitianSdp& sdp, int z_var, int d_in,
                                 int d_out) {
  const int t = sdp.add_scalar();
  const int s = sdp.add_hermitian(d_in);
  HermitianSdp::Adjoint t_adj = [](const CMatrix& e) {
    CMatrix m(1, 1);
    m(0, 0) = e.trace();
    return m;
  };
  HermitianSdp::Adjoint z_adj = [d_out](const CMatrix& e) {
    return CMatrix(-kron(e, identity(d_out)));
  };
  sdp.add_hermitian_equality({{t, t_adj}, {z_var, z_adj}, {s, identity_adjoint(-1.0)}},
                             CMatrix::Zero(d_in, d_in));
  CMatrix two(1, 1);
  two(0, 0) = 2.0;
  sdp.add_objective(t, two);
  return t;
}

}  // namespace detail

/// C◇ for the difference χ_Ω of two unit-trace Choi matrices:
/// minimize 2t s.t. Z − W = d_in χ_Ω, t·I − Tr_out Z ⪰ 0, Z, W ⪰ 0.
inline double diamond_distance(const CMatrix& chi_omega, int d_in,
                               const SdpOptions& opt = {},
                               SdpSolution* info = nullptr) {
  require_hermitian(chi_omega, "diamond_distance");
  const int n = static_cast<int>(chi_omega.rows());
  if (d_in < 1 || n % d_in != 0) {
    throw DimensionError("diamond_distance: d_in does not divide dimension");
  }
  const int d_out = n / d_in;
  if (chi_omega.cwiseAbs().maxCoeff() == 0.0) {
    return 0.0;
  }
  HermitianSdp sdp;
  const int z = sdp.add_hermitian(n);
  const int w = sdp.add_hermitian(n);
  sdp.add_hermitian_equality(
      {{z, detail::identity_adjoint()}, {w, detail::identity_adjoint(-1.0)}},
      static_cast<double>(d_in) * chi_omega);
  detail::add_spectral_epigraph(sdp, z, d_in, d_out);
  SdpSolution s = detail::require_optimal(solve_sdp(sdp.problem(), opt),
                                          "diamond_distance");
  if (info) {
    *info = s;
  }
  return std::max(0.0, s.primal_objective);
}

inline double diamond_distance(const ChoiMatrix& a, const ChoiMatrix& b,
                               const SdpOptions& opt = {}) {
  if (a.d_in() != b.d_in() || a.d_out() != b.d_out()) {
    throw DimensionError("diamond_distance: Choi dimensions differ");
  }
  return diamond_distance(hermitian_part(a.matrix() - b.matrix()), a.d_in(), opt);
}

/// C◇ of a fixed program on a processor.
inline double program_diamond_cost(const ProcessorMap& p, const CMatrix& chi_e,
                                   const CMatrix& pi, const SdpOptions& opt = {}) {
  return diamond_distance(hermitian_part(chi_e - p.apply(pi)), p.d_in(), opt);
}

/// Jointly minimizes C◇ over programs:
/// minimize 2t s.t. Z − W + d Λ(π) = d χ_E, t·I − Tr_out Z ⪰ 0, π admissible.
inline ProgramOptimum optimize_program_diamond(const ProcessorMap& p,
                                               const CMatrix& chi_e,
                                               const SdpOptions& opt = {}) {
  detail::check_target(p, chi_e);
  const int n = p.d_choi();
  const double d = p.d_in();
  HermitianSdp sdp;
  const int z = sdp.add_hermitian(n);
  const int w = sdp.add_hermitian(n);
  const int pi = sdp.add_hermitian(p.d_prog());
  HermitianSdp::Adjoint lam = [&p, d](const CMatrix& e) {
    return CMatrix(d * p.dual(e));
  };
  sdp.add_hermitian_equality({{z, detail::identity_adjoint()},
                              {w, detail::identity_adjoint(-1.0)},
                              {pi, lam}},
                             d * hermitian_part(chi_e));
  detail::add_spectral_epigraph(sdp, z, p.d_in(), p.d_out());
  detail::add_program_constraint(sdp, pi, p.d_prog(), p.program_set());
  ProgramOptimum out;
  out.solution = detail::require_optimal(solve_sdp(sdp.problem(), opt),
                                         "optimize_program_diamond");
  out.value = std::max(0.0, out.solution.primal_objective);
  out.program = detail::finalize_program(sdp.hermitian_value(out.solution, pi),
                                         p.d_prog(), p.program_set(),
                                         out.projection_residual);
  return out;
}

/// Minimizes C1 over programs:
/// minimize Tr P + Tr Q s.t. P − Q + Λ(π) = χ_E, P, Q ⪰ 0, π admissible.
inline ProgramOptimum optimize_program_trace(const ProcessorMap& p,
                                             const CMatrix& chi_e,
                                             const SdpOptions& opt = {}) {
  detail::check_target(p, chi_e);
  const int n = p.d_choi();
  HermitianSdp sdp;
  const int pp = sdp.add_hermitian(n);
  const int qq = sdp.add_hermitian(n);
  const int pi = sdp.add_hermitian(p.d_prog());
  HermitianSdp::Adjoint lam = [&p](const CMatrix& e) { return p.dual(e); };
  sdp.add_hermitian_equality({{pp, detail::identity_adjoint()},
                              {qq, detail::identity_adjoint(-1.0)},
                              {pi, lam}},
                             hermitian_part(chi_e));
  sdp.add_objective(pp, identity(n));
  sdp.add_objective(qq, identity(n));
  detail::add_program_constraint(sdp, pi, p.d_prog(), p.program_set());
  ProgramOptimum out;
  out.solution = detail::require_optimal(solve_sdp(sdp.problem(), opt),
                                         "optimize_program_trace");
  out.value = std::max(0.0, out.solution.primal_objective);
  out.program = detail::finalize_program(sdp.hermitian_value(out.solution, pi),
                                         p.d_prog(), p.program_set(),
                                         out.projection_residual);
  return out;
}

/// Maximizes F over programs: maximize Re Tr X s.t. [[χ_E, X], [X†, Λ(π)]] ⪰ 0.
/// χ_E is restricted to its support, χ_E = V D V†, so the fixed block D is
/// positive definite and X = V Y_12.
inline ProgramOptimum optimize_program_fidelity(const ProcessorMap& p,
                                                const CMatrix& chi_e,
                                                const SdpOptions& opt = {}) {
  detail::check_target(p, chi_e);
  const int n = p.d_choi();
  SpectralDecomposition eig = herm_eig(hermitian_part(chi_e));
  const double cut = kPinvCutoff * std::max(1.0, eig.eigenvalues.cwiseAbs().maxCoeff());
  int r = 0;
  while (r < eig.dim() && eig.eigenvalues[r] > cut) {
    ++r;
  }
  if (r == 0) {
    throw ValidationError("optimize_program_fidelity: target is zero");
  }
  const CMatrix v = eig.eigenvectors.leftCols(r);
  const CMatrix dmat = eig.eigenvalues.head(r).cast<Complex>().asDiagonal();
  const int k = r + n;
  HermitianSdp sdp;
  const int yv = sdp.add_hermitian(k);
  const int pi = sdp.add_hermitian(p.d_prog());
  // Y11 = D
  HermitianSdp::Adjoint top = [k, r](const CMatrix& e) {
    CMatrix m = CMatrix::Zero(k, k);
    m.topLeftCorner(r, r) = e;
    return m;
  };
  sdp.add_hermitian_equality({{yv, top}}, dmat);
  // Y22 − Λ(π) = 0
  HermitianSdp::Adjoint bottom = [k, n](const CMatrix& e) {
    CMatrix m = CMatrix::Zero(k, k);
    m.bottomRightCorner(n, n) = e;
    return m;
  };
  HermitianSdp::Adjoint lam = [&p](const CMatrix& e) { return CMatrix(-p.dual(e)); };
  sdp.add_hermitian_equality({{yv, bottom}, {pi, lam}}, CMatrix::Zero(n, n));
  detail::add_program_constraint(sdp, pi, p.d_prog(), p.program_set());
  // −Re Tr(V Y12) = Tr(G Y), G12 = −V†/2, G21 = −V/2.
  CMatrix g = CMatrix::Zero(k, k);
  g.topRightCorner(r, n) = -0.5 * v.adjoint();
  g.bottomLeftCorner(n, r) = -0.5 * v;
  sdp.add_objective(yv, g);
  ProgramOptimum out;
  out.solution = detail::require_optimal(solve_sdp(sdp.problem(), opt),
                                         "optimize_program_fidelity");
  out.value = std::clamp(-out.solution.primal_objective, 0.0, 1.0);
  out.program = detail::finalize_program(sdp.hermitian_value(out.solution, pi),
                                         p.d_prog(), p.program_set(),
                                         out.projection_residual);
  return out;
}

struct ChoiOptimum {
  ChoiMatrix choi;
  double value = 0.0;
  double projection_residual = 0.0;
};

/// Minimizes C◇ of PBT with N ports over single-port Choi programs χ^{⊗N}.
inline ChoiOptimum optimize_choi_diamond(int n, int d, const CMatrix& chi_e,
                                         const SdpOptions& opt = {}) {
  ProcessorMap p = pbt_reduced_map(n, d);
  ProgramOptimum o = optimize_program_diamond(p, chi_e, opt);
  return ChoiOptimum{ChoiMatrix(o.program.matrix(), d, d), o.value,
                     o.projection_residual};
}

}  // namespace qprog

#endif  // QPROG_SDP_HPP
