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

// First-order optimization over program states: cost gradients, Euclidean
// projections onto states and Choi states, projected subgradient,
// Frank-Wolfe and the closed-form unitary-learning program.

#ifndef QPROG_OPTIM_HPP
#define QPROG_OPTIM_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <sstream>
#include <utility>
#include <vector>

#include "qprog/processors.hpp"
#include "qprog/random.hpp"

namespace qprog {

enum class LearningRateKind { kInvSqrt, kHarmonic };

/// α_k = a/√k (inv_sqrt) or a/(b + k) (harmonic), k = 1, 2, …
struct LearningRate {
  LearningRateKind kind = LearningRateKind::kInvSqrt;
  double a = 1.0;
  double b = 0.0;

  double operator()(int k) const {
    if (kind == LearningRateKind::kInvSqrt) {
      return a / std::sqrt(static_cast<double>(k));
    }
    return a / (b + k);
  }
};

enum class InitialProgram { kMaximallyMixed, kRandom };

struct OptimConfig {
  int max_iters = 200;
  LearningRate learning_rate;
  double tolerance = 1e-9;  // best-cost stall threshold
  int window = 50;          // iterations over which the stall is measured
  CostSpec cost{CostKind::C1, 0.0};
  std::uint64_t seed = 0;
  InitialProgram initial = InitialProgram::kMaximallyMixed;
  std::optional<CMatrix> start;  // overrides `initial` when set

  void validate() const {
    if (max_iters < 1) {
      throw ValidationError("OptimConfig: max_iters must be at least 1");
    }
    if (!(learning_rate.a > 0.0)) {
      throw ValidationError("OptimConfig: learning rate a must be positive");
    }
    if (learning_rate.kind == LearningRateKind::kHarmonic &&
        !(learning_rate.b > -1.0)) {
      throw ValidationError("OptimConfig: harmonic rate needs b > -1");
    }
    if (window < 1) {
      throw ValidationError("OptimConfig: window must be at least 1");
    }
    if (cost.kind == CostKind::Cmu && !(cost.param > 0.0)) {
      throw ValidationError("OptimConfig: Cmu needs mu > 0");
    }
    if (cost.kind != CostKind::C1 && cost.kind != CostKind::CF &&
        cost.kind != CostKind::Cmu) {
      throw ValidationError("OptimConfig: cost must be C1, CF or Cmu");
    }
  }
};

struct OptimResult {
  ProgramState program;                         // best program found
  std::vector<std::pair<int, double>> cost_trace;  // best-so-far per iteration
  std::vector<double> iterate_costs;            // cost of each iterate
  bool converged = false;
  double final_cost = 0.0;
  int iterations = 0;
};

// ---------------------------------------------------------------------------
// Costs and gradients

namespace detail {

inline void check_target(const ProcessorMap& p, const CMatrix& chi_e) {
  if (chi_e.rows() != p.d_choi() || chi_e.cols() != p.d_choi()) {
    throw DimensionError("target Choi matrix does not match the processor");
  }
}

}  // namespace detail

inline double program_cost(const ProcessorMap& p, const CMatrix& chi_e,
                           const CMatrix& pi, const CostSpec& cost) {
  detail::check_target(p, chi_e);
  return cost_eval(cost, chi_e, hermitian_part(p.apply(pi)));
}

/// ∇C1(π) = Λ*[sign(Λ(π) − χ_E)] with sign(0) = 0.
inline CMatrix grad_c1(const ProcessorMap& p, const CMatrix& chi_e,
                       const CMatrix& pi) {
  detail::check_target(p, chi_e);
  CMatrix diff = hermitian_part(p.apply(pi) - chi_e);
  return hermitian_part(p.dual(matrix_sign(diff)));
}

/// ∇F(π) = ½ Λ*[√χ_E (√χ_E Λ(π) √χ_E)^{-1/2} √χ_E], evaluated on the
/// support of χ_E = V D V† as W (W†Λ(π)W)^{-1/2} W† with W = V √D.
inline CMatrix grad_fidelity(const ProcessorMap& p, const CMatrix& chi_e,
                             const CMatrix& pi) {
  detail::check_target(p, chi_e);
  SpectralDecomposition eig = herm_eig(hermitian_part(chi_e));
  const double cut = kPinvCutoff * std::max(1.0, eig.eigenvalues.cwiseAbs().maxCoeff());
  Eigen::Index r = 0;
  while (r < eig.dim() && eig.eigenvalues[r] > cut) {
    ++r;
  }
  if (r == 0) {
    return CMatrix::Zero(p.d_prog(), p.d_prog());
  }
  CMatrix w = eig.eigenvectors.leftCols(r) *
              eig.eigenvalues.head(r).cwiseSqrt().cast<Complex>().asDiagonal();
  CMatrix inner = hermitian_part(w.adjoint() * hermitian_part(p.apply(pi)) * w);
  CMatrix mid = w * inv_sqrt_psd(inner) * w.adjoint();
  return hermitian_part(p.dual(hermitian_part(mid))) * 0.5;
}

/// ∇CF = −2F ∇F.
inline CMatrix grad_cf(const ProcessorMap& p, const CMatrix& chi_e,
                       const CMatrix& pi) {
  double f = fidelity(chi_e, hermitian_part(p.apply(pi)));
  return -2.0 * f * grad_fidelity(p, chi_e, pi);
}

/// ∇C_μ(π) = Λ*[h'_μ(Λ(π) − χ_E)].
inline CMatrix grad_smooth(const ProcessorMap& p, const CMatrix& chi_e,
                           const CMatrix& pi, double mu) {
  if (!(mu > 0.0)) {
    throw DomainError("grad_smooth: mu must be positive");
  }
  detail::check_target(p, chi_e);
  CMatrix diff = hermitian_part(p.apply(pi) - chi_e);
  CMatrix h = matrix_function(diff, [mu](double x) { return huber_derivative(x, mu); });
  return hermitian_part(p.dual(h));
}

/// Lipschitz constant d/μ of ∇C_μ, with d the Choi dimension.
inline double smooth_lipschitz(const ProcessorMap& p, double mu) {
  return static_cast<double>(p.d_choi()) / mu;
}

inline CMatrix cost_gradient(const ProcessorMap& p, const CMatrix& chi_e,
                             const CMatrix& pi, const CostSpec& cost) {
  switch (cost.kind) {
    case CostKind::C1:
      return grad_c1(p, chi_e, pi);
    case CostKind::F:
      return grad_fidelity(p, chi_e, pi);
    case CostKind::CF:
      return grad_cf(p, chi_e, pi);
    case CostKind::Cmu:
      return grad_smooth(p, chi_e, pi, cost.param);
    default:
      throw ValidationError("cost_gradient: no gradient for " +
                            cost_name(cost.kind));
  }
}

// ---------------------------------------------------------------------------
// Projections

/// Euclidean projection of a real vector onto the probability simplex.
/// θ = (Σ_{j≤s} u_j − 1)/s with s = max{k : u_k > (Σ_{j≤k} u_j − 1)/k},
/// u sorted in decreasing order.
inline RVector project_to_simplex(const RVector& x) {
  const Eigen::Index n = x.size();
  if (n == 0) {
    throw DimensionError("project_to_simplex: empty vector");
  }
  std::vector<double> u(x.data(), x.data() + n);
  std::sort(u.begin(), u.end(), std::greater<>());
  double cum = 0.0;
  double theta = 0.0;
  for (Eigen::Index k = 0; k < n; ++k) {
    cum += u[static_cast<std::size_t>(k)];
    double t = (cum - 1.0) / static_cast<double>(k + 1);
    if (u[static_cast<std::size_t>(k)] > t) {
      theta = t;
    }
  }
  RVector out(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    out[i] = std::max(x[i] - theta, 0.0);
  }
  return out;
}

/// Closest density matrix in Frobenius norm: keep eigenvectors, project the
/// spectrum onto the simplex.
inline DensityMatrix project_to_states(const CMatrix& x) {
  SpectralDecomposition eig = herm_eig(x);
  CMatrix m = eig.compose(project_to_simplex(eig.eigenvalues));
  return DensityMatrix(hermitian_part(m));
}

struct DykstraOptions {
  int max_iters = 200000;
  double tol = 1e-11;
};

/// Euclidean projection onto {χ ⪰ 0, Tr_B χ = I/d_A} on (A, B), by Dykstra's
/// alternating projections between the affine set and the PSD cone.
inline ChoiMatrix dykstra_choi_projection(const CMatrix& x, int d_a, int d_b,
                                          const DykstraOptions& opt = {}) {
  require_hermitian(x, "dykstra_choi_projection");
  const Eigen::Index n = static_cast<Eigen::Index>(d_a) * d_b;
  if (x.rows() != n) {
    throw DimensionError("dykstra_choi_projection: dimension mismatch");
  }
  const SubsystemShape shape{d_a, d_b};
  const CMatrix target = identity(d_a) / static_cast<double>(d_a);
  auto affine = [&](const CMatrix& y) {
    CMatrix marg = partial_trace(y, shape, {0});
    return CMatrix(y + kron(target - marg, identity(d_b)) / static_cast<double>(d_b));
  };
  CMatrix cur = hermitian_part(x);
  CMatrix p = CMatrix::Zero(n, n);
  CMatrix q = CMatrix::Zero(n, n);
  double residual = 0.0;
  for (int it = 0; it < opt.max_iters; ++it) {
    CMatrix y = affine(cur + p);
    p = cur + p - y;
    CMatrix next = psd_part(hermitian_part(y + q));
    q = y + q - next;
    residual =
        (partial_trace(next, shape, {0}) - target).cwiseAbs().maxCoeff();
    double step = (next - cur).cwiseAbs().maxCoeff();
    cur = std::move(next);
    if (residual <= opt.tol && step <= opt.tol) {
      return ChoiMatrix(cur, d_a, d_b);
    }
  }
  std::ostringstream msg;
  msg << "dykstra_choi_projection: no convergence after " << opt.max_iters
      << " iterations (marginal residual " << residual << ")";
  throw ConvergenceError(msg.str());
}

inline ChoiMatrix dykstra_choi_projection(const CMatrix& x, int d) {
  return dykstra_choi_projection(x, d, d);
}

/// Projection onto the processor's admissible program set.
inline DensityMatrix project_to_programs(const ProcessorMap& p,
                                         const CMatrix& x) {
  if (p.program_set() == ProgramSet::kChoi) {
    const int d = static_cast<int>(std::lround(std::sqrt(p.d_prog())));
    return dykstra_choi_projection(hermitian_part(x), d, d).state();
  }
  return project_to_states(hermitian_part(x));
}

// ---------------------------------------------------------------------------
// Iterative methods

namespace detail {

inline CMatrix initial_program(const ProcessorMap& p, const OptimConfig& cfg) {
  const int d = p.d_prog();
  if (cfg.start) {
    if (cfg.start->rows() != d) {
      throw DimensionError("OptimConfig: start program has wrong dimension");
    }
    return project_to_programs(p, *cfg.start).matrix();
  }
  if (cfg.initial == InitialProgram::kRandom) {
    Rng rng(cfg.seed);
    CMatrix r = random_density(d, rng).matrix();
    return project_to_programs(p, r).matrix();
  }
  return identity(d) / static_cast<double>(d);
}

// Tracks the best iterate and the stall criterion.
class BestTracker {
 public:
  BestTracker(const OptimConfig& cfg, OptimResult& res) : cfg_(cfg), res_(res) {}

  void record(int k, const CMatrix& pi, double c) {
    res_.iterate_costs.push_back(c);
    if (res_.cost_trace.empty() || c < best_) {
      best_ = c;
      best_pi_ = pi;
    }
    res_.cost_trace.emplace_back(k, best_);
    res_.iterations = k;
  }

  bool stalled() const {
    const auto& t = res_.cost_trace;
    const auto w = static_cast<std::size_t>(cfg_.window);
    if (t.size() <= w) {
      return false;
    }
    return t[t.size() - 1 - w].second - t.back().second < cfg_.tolerance;
  }

  void finish(ProgramStructure tag) {
    res_.program = ProgramState{DensityMatrix(hermitian_part(best_pi_)), tag};
    res_.final_cost = best_;
  }

  double best() const { return best_; }

 private:
  const OptimConfig& cfg_;
  OptimResult& res_;
  double best_ = 0.0;
  CMatrix best_pi_;
};

}  // namespace detail

/// π_{k+1} = P_S(π_k − α_k g_k), g_k ∈ ∂C(π_k); returns the best iterate.
/// `iterates`, when non-null, receives π_0, π_1, ….
inline OptimResult projected_subgradient(const ProcessorMap& p,
                                         const CMatrix& chi_e,
                                         const OptimConfig& cfg,
                                         std::vector<CMatrix>* iterates = nullptr) {
  cfg.validate();
  detail::check_target(p, chi_e);
  OptimResult res;
  detail::BestTracker best(cfg, res);
  CMatrix pi = detail::initial_program(p, cfg);
  best.record(0, pi, program_cost(p, chi_e, pi, cfg.cost));
  if (iterates) {
    iterates->push_back(pi);
  }
  for (int k = 1; k <= cfg.max_iters; ++k) {
    CMatrix g = cost_gradient(p, chi_e, pi, cfg.cost);
    if (g.cwiseAbs().maxCoeff() == 0.0) {
      res.converged = true;  // zero subgradient: π is optimal
      break;
    }
    pi = project_to_programs(p, pi - cfg.learning_rate(k) * g).matrix();
    if (iterates) {
      iterates->push_back(pi);
    }
    best.record(k, pi, program_cost(p, chi_e, pi, cfg.cost));
    if (best.best() == 0.0 || best.stalled()) {
      res.converged = true;
      break;
    }
  }
  best.finish(ProgramStructure::kGeneric);
  return res;
}

/// Frank-Wolfe over density matrices: σ_i is the unit eigenvector of the
/// smallest eigenvalue of ∇C(π_i), π_{i+1} = i/(i+2) π_i + 2/(i+2) |σ_i><σ_i|.
/// `iterates`, when non-null, receives π_1, π_2, ….
inline OptimResult frank_wolfe(const ProcessorMap& p, const CMatrix& chi_e,
                               const OptimConfig& cfg,
                               std::vector<CMatrix>* iterates = nullptr) {
  cfg.validate();
  detail::check_target(p, chi_e);
  if (p.program_set() != ProgramSet::kStates) {
    throw ValidationError(
        "frank_wolfe: only supported over the full state space");
  }
  OptimResult res;
  detail::BestTracker best(cfg, res);
  CMatrix pi = detail::initial_program(p, cfg);
  best.record(0, pi, program_cost(p, chi_e, pi, cfg.cost));
  if (iterates) {
    iterates->push_back(pi);
  }
  for (int i = 1; i <= cfg.max_iters; ++i) {
    CMatrix g = cost_gradient(p, chi_e, pi, cfg.cost);
    SpectralDecomposition eig = herm_eig(g);
    CVector sigma = eig.eigenvectors.col(eig.dim() - 1);
    const double w = 2.0 / (i + 2.0);
    pi = (1.0 - w) * pi + w * (sigma * sigma.adjoint());
    if (iterates) {
      iterates->push_back(pi);
    }
    best.record(i, pi, program_cost(p, chi_e, pi, cfg.cost));
    if (best.best() == 0.0 || best.stalled()) {
      res.converged = true;
      break;
    }
  }
  best.finish(ProgramStructure::kGeneric);
  return res;
}

struct UnitaryProgram {
  ProgramState program;
  double fidelity_sq = 0.0;  // top eigenvalue of Λ*[|χ_U><χ_U|]
  bool degenerate = false;   // top eigenvalue not unique
};

/// Program maximizing F for a unitary target: the top eigenvector of
/// Λ*[|χ_U><χ_U|].
inline UnitaryProgram learn_unitary_program(const ProcessorMap& p,
                                            const CMatrix& u) {
  if (!is_unitary(u, 1e-9)) {
    throw DomainError("learn_unitary_program: target is not unitary");
  }
  if (u.cols() != p.d_in() || u.rows() != p.d_out()) {
    throw DimensionError("learn_unitary_program: unitary dimension mismatch");
  }
  CVector chi = choi_vector(u);
  CMatrix m = hermitian_part(p.dual(chi * chi.adjoint()));
  SpectralDecomposition eig = herm_eig(m);
  UnitaryProgram out;
  CVector top = eig.eigenvectors.col(0);
  out.program = ProgramState{DensityMatrix(top * top.adjoint()),
                             ProgramStructure::kGeneric};
  out.fidelity_sq = eig.eigenvalues[0];
  out.degenerate = eig.dim() > 1 && eig.eigenvalues[0] - eig.eigenvalues[1] < 1e-10;
  return out;
}

}  // namespace qprog

#endif  // QPROG_OPTIM_HPP
