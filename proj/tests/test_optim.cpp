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

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "oracles.hpp"
#include "qprog/optim.hpp"

namespace qprog {
namespace {

CMatrix choi(const KrausChannel& ch) { return choi_of_channel(ch).matrix(); }

double inner(const CMatrix& g, const CMatrix& dir) {
  return (g.adjoint() * dir).trace().real();
}

CMatrix random_program(const ProcessorMap& p, Rng& rng) {
  if (p.program_set() == ProgramSet::kChoi) {
    return choi(random_channel(p.d_in(), p.d_in(), 4, rng));
  }
  return random_density(p.d_prog(), rng).matrix();
}

// Direction that keeps the program inside its admissible affine set.
CMatrix random_direction(const ProcessorMap& p, Rng& rng) {
  CMatrix h = oracle::traceless_direction(p.d_prog(), rng);
  if (p.program_set() == ProgramSet::kChoi) {
    const int d = p.d_in();
    CMatrix tb = partial_trace(h, SubsystemShape{d, d}, {0});
    h -= kron(tb, identity(d) / static_cast<double>(d));
    h /= h.norm();
  }
  return h;
}

std::vector<ProcessorMap> families() {
  std::vector<ProcessorMap> v;
  v.push_back(teleportation_processor(2));
  v.push_back(pbt_processor(2, 2));
  v.push_back(pbt_reduced_map(3, 2));
  v.push_back(pqc_processor(1));
  v.push_back(mpqc_processor(1));
  return v;
}

// Worst absolute mismatch between the analytic directional derivative and a
// central difference over `n` random directions.
double fd_mismatch(const ProcessorMap& p, const CMatrix& chi, const CMatrix& pi,
                   const CostSpec& cost, int n, double h, Rng& rng,
                   bool relative = false) {
  auto f = [&](const CMatrix& x) { return program_cost(p, chi, x, cost); };
  CMatrix g = cost_gradient(p, chi, pi, cost);
  double worst = 0.0;
  for (int k = 0; k < n; ++k) {
    CMatrix dir = random_direction(p, rng);
    double fd = oracle::directional_fd(f, pi, dir, h);
    double an = inner(g, dir);
    double err = std::abs(fd - an);
    if (relative) err /= std::max(1.0, std::abs(fd));
    worst = std::max(worst, err);
  }
  return worst;
}

// ---------------------------------------------------------------------------
// Gradients

TEST(GradC1, VanishesAtExactSimulation) {
  ProcessorMap p = teleportation_processor(2);
  CMatrix chi = choi(pauli_channel({0.7, 0.1, 0.1, 0.1}));
  CMatrix pi = chi;  // teleportation is self-dual: χ_E itself is the program
  EXPECT_LE(program_cost(p, chi, pi, {CostKind::C1, 0}), 1e-12);
  EXPECT_LE(max_abs(grad_c1(p, chi, pi)), 1e-12);
}

TEST(GradC1, MatchesFiniteDifferenceAtDifferentiablePoint) {
  Rng rng(11);
  ProcessorMap p = teleportation_processor(2);
  CMatrix chi = choi(amplitude_damping(0.5));
  CMatrix pi = random_density(4, rng).matrix();
  EXPECT_LE(fd_mismatch(p, chi, pi, {CostKind::C1, 0}, 20, 1e-6, rng), 1e-5);
}

TEST(GradC1, SatisfiesSubgradientInequality) {
  Rng rng(12);
  ProcessorMap p = pbt_processor(2, 2);
  CMatrix chi = choi(amplitude_damping(0.3));
  CMatrix pi = random_density(p.d_prog(), rng).matrix();
  CMatrix g = grad_c1(p, chi, pi);
  const double c0 = program_cost(p, chi, pi, {CostKind::C1, 0});
  for (int k = 0; k < 50; ++k) {
    CMatrix s = random_density(p.d_prog(), rng).matrix();
    double cs = program_cost(p, chi, s, {CostKind::C1, 0});
    EXPECT_GE(cs, c0 + inner(g, s - pi) - 1e-10);
  }
}

TEST(GradCF, PureTargetIsNegatedDualOfTargetProjector) {
  Rng rng(13);
  ProcessorMap p = pqc_processor(1);
  CMatrix u = random_unitary(2, rng);
  CVector v = choi_vector(u);
  CMatrix chi = v * v.adjoint();
  for (int k = 0; k < 3; ++k) {
    CMatrix pi = random_density(p.d_prog(), rng).matrix();
    CMatrix expected = -hermitian_part(p.dual(chi));
    EXPECT_LE(max_abs(grad_cf(p, chi, pi) - expected), 1e-9);
  }
}

TEST(GradCF, MatchesFiniteDifference) {
  Rng rng(14);
  ProcessorMap p = teleportation_processor(2);
  CMatrix chi = choi(amplitude_damping(0.4));
  CMatrix pi = random_density(4, rng).matrix();
  EXPECT_LE(fd_mismatch(p, chi, pi, {CostKind::CF, 0}, 20, 1e-6, rng, true),
            1e-6);
}

TEST(GradCF, ChainRuleThroughFidelity) {
  Rng rng(15);
  ProcessorMap p = pbt_processor(2, 2);
  CMatrix chi = choi(depolarizing(0.3));
  CMatrix pi = random_density(p.d_prog(), rng).matrix();
  double f = fidelity(chi, hermitian_part(p.apply(pi)));
  EXPECT_LE(max_abs(grad_cf(p, chi, pi) + 2.0 * f * grad_fidelity(p, chi, pi)),
            1e-12);
}

TEST(GradSmooth, VanishesAtExactSimulation) {
  ProcessorMap p = teleportation_processor(2);
  CMatrix chi = choi(pauli_channel({0.4, 0.3, 0.2, 0.1}));
  EXPECT_LE(max_abs(grad_smooth(p, chi, chi, 0.1)), 1e-12);
}

TEST(GradSmooth, MatchesFiniteDifference) {
  Rng rng(16);
  ProcessorMap p = teleportation_processor(2);
  CMatrix chi = choi(amplitude_damping(0.5));
  CMatrix pi = random_density(4, rng).matrix();
  EXPECT_LE(fd_mismatch(p, chi, pi, {CostKind::Cmu, 0.1}, 20, 1e-5, rng), 1e-6);
}

TEST(GradSmooth, LipschitzConstantBoundsGradientChange) {
  Rng rng(17);
  for (const ProcessorMap& p : families()) {
    const double mu = 0.05;
    const double lip = smooth_lipschitz(p, mu);
    EXPECT_DOUBLE_EQ(lip, p.d_choi() / mu);
    CMatrix chi = choi(amplitude_damping(0.3));
    for (int k = 0; k < 10; ++k) {
      CMatrix a = random_program(p, rng);
      CMatrix b = random_program(p, rng);
      double lhs = (grad_smooth(p, chi, a, mu) - grad_smooth(p, chi, b, mu)).norm();
      EXPECT_LE(lhs, lip * (a - b).norm() + 1e-12) << p.label();
    }
  }
}

TEST(GradSmooth, ApproachesC1SubgradientAsMuVanishes) {
  Rng rng(18);
  ProcessorMap p = teleportation_processor(2);
  CMatrix chi = choi(amplitude_damping(0.5));
  CMatrix pi = random_density(4, rng).matrix();
  EXPECT_LE(max_abs(grad_smooth(p, chi, pi, 1e-8) - grad_c1(p, chi, pi)), 1e-6);
}

TEST(GradSmooth, RejectsNonPositiveMu) {
  ProcessorMap p = teleportation_processor(2);
  CMatrix chi = choi(identity_channel(2));
  EXPECT_THROW(grad_smooth(p, chi, chi, 0.0), Error);
  EXPECT_THROW(grad_smooth(p, chi, chi, -1.0), Error);
}

TEST(Gradients, FiniteDifferenceOnEveryProcessorFamily) {
  Rng rng(19);
  CMatrix target = choi(amplitude_damping(0.35));
  for (const ProcessorMap& p : families()) {
    CMatrix pi = random_program(p, rng);
    EXPECT_LE(fd_mismatch(p, target, pi, {CostKind::C1, 0}, 20, 1e-6, rng), 1e-5)
        << p.label();
    EXPECT_LE(fd_mismatch(p, target, pi, {CostKind::CF, 0}, 20, 1e-6, rng, true),
              1e-4)
        << p.label();
    EXPECT_LE(fd_mismatch(p, target, pi, {CostKind::Cmu, 0.1}, 20, 1e-5, rng),
              1e-6)
        << p.label();
  }
}

TEST(Gradients, UnknownCostHasNoGradient) {
  ProcessorMap p = teleportation_processor(2);
  CMatrix chi = choi(identity_channel(2));
  EXPECT_THROW(cost_gradient(p, chi, chi, {CostKind::CR, 0}), ValidationError);
}

TEST(Costs, ConvexInProgram) {
  Rng rng(20);
  const std::vector<CostSpec> costs = {{CostKind::C1, 0},
                                       {CostKind::CF, 0},
                                       {CostKind::Cmu, 0.1},
                                       {CostKind::Cp, 2.0},
                                       {CostKind::Cp, 3.0}};
  CMatrix chi = choi(amplitude_damping(0.6));
  for (const ProcessorMap& p : families()) {
    for (const CostSpec& c : costs) {
      for (int trial = 0; trial < 5; ++trial) {
        CMatrix a = random_program(p, rng);
        CMatrix b = random_program(p, rng);
        for (double t : {0.25, 0.5, 0.75}) {
          double lhs = program_cost(p, chi, t * a + (1 - t) * b, c);
          double rhs = t * program_cost(p, chi, a, c) +
                       (1 - t) * program_cost(p, chi, b, c);
          EXPECT_LE(lhs, rhs + 1e-10) << p.label() << " " << cost_name(c.kind);
        }
      }
    }
  }
}

// ---------------------------------------------------------------------------
// Projections

TEST(ProjectToStates, DensityMatrixIsFixed) {
  Rng rng(21);
  for (int d : {2, 3, 5}) {
    CMatrix rho = random_density(d, rng).matrix();
    EXPECT_LE(max_abs(project_to_states(rho).matrix() - rho), 1e-12);
  }
}

TEST(ProjectToStates, DiagonalExamples) {
  RVector x(3);
  x << 0.9, 0.6, -0.1;
  RVector y = project_to_states(x.cast<Complex>().asDiagonal().toDenseMatrix())
                  .matrix()
                  .diagonal()
                  .real();
  EXPECT_NEAR(y[0], 0.65, 1e-12);
  EXPECT_NEAR(y[1], 0.35, 1e-12);
  EXPECT_NEAR(y[2], 0.0, 1e-12);
  RVector grid = oracle::simplex_projection_grid(x);
  EXPECT_LE((y - grid).cwiseAbs().maxCoeff(), 1e-3);

  CMatrix m = CMatrix::Zero(2, 2);
  m(0, 0) = 2.0;
  m(1, 1) = -1.0;
  CMatrix p = project_to_states(m).matrix();
  EXPECT_NEAR(p(0, 0).real(), 1.0, 1e-12);
  EXPECT_NEAR(p(1, 1).real(), 0.0, 1e-12);
}

TEST(ProjectToStates, SimplexStepMatchesBisectionOracle) {
  Rng rng(22);
  std::normal_distribution<double> normal;
  for (int trial = 0; trial < 200; ++trial) {
    const int n = 2 + trial % 7;
    RVector x(n);
    for (int i = 0; i < n; ++i) x[i] = 3.0 * normal(rng);
    RVector got = project_to_simplex(x);
    EXPECT_LE((got - oracle::simplex_projection_bisect(x)).cwiseAbs().maxCoeff(),
              1e-10);
    EXPECT_NEAR(got.sum(), 1.0, 1e-12);
    EXPECT_GE(got.minCoeff(), 0.0);
  }
  for (int trial = 0; trial < 20; ++trial) {
    RVector x(3);
    for (int i = 0; i < 3; ++i) x[i] = normal(rng);
    EXPECT_LE((project_to_simplex(x) - oracle::simplex_projection_grid(x))
                  .cwiseAbs()
                  .maxCoeff(),
              1e-3);
  }
}

TEST(ProjectToStates, KeepsEigenvectorsAndIsNonexpansive) {
  Rng rng(23);
  for (int trial = 0; trial < 20; ++trial) {
    CMatrix x = random_hermitian(4, rng);
    CMatrix px = project_to_states(x).matrix();
    EXPECT_LE(max_abs(px * x - x * px), 1e-10);  // shared eigenbasis
    CMatrix y = random_hermitian(4, rng);
    CMatrix py = project_to_states(y).matrix();
    EXPECT_LE((px - py).norm(), (x - y).norm() + 1e-12);
    CMatrix s = random_density(4, rng).matrix();
    EXPECT_LE((px - s).norm(), (x - s).norm() + 1e-12);
  }
}

TEST(Dykstra, ValidChoiIsFixed) {
  Rng rng(24);
  CMatrix chi = choi(random_channel(2, 2, 3, rng));
  EXPECT_LE(max_abs(dykstra_choi_projection(chi, 2).matrix() - chi), 1e-9);
}

TEST(Dykstra, PerturbedChoiProjectsToNearestFeasiblePoint) {
  Rng rng(25);
  CMatrix phi = max_entangled(2).matrix();
  CMatrix x = phi + 0.1 * random_hermitian(4, rng);
  ChoiMatrix proj = dykstra_choi_projection(x, 2);
  const CMatrix& pm = proj.matrix();
  EXPECT_GE(herm_eigenvalues(pm).minCoeff(), -1e-9);
  EXPECT_LE(max_abs(partial_trace(pm, SubsystemShape{2, 2}, {0}) -
                    identity(2) / 2.0),
            1e-9);
  EXPECT_LE((pm - x).norm(), (phi - x).norm() + 1e-12);
  // Variational inequality Re Tr[(x − P)(y − P)] ≤ 0 over feasible y.
  for (int k = 0; k < 200; ++k) {
    CMatrix y = choi(random_channel(2, 2, 1 + k % 4, rng));
    EXPECT_LE(inner(x - pm, y - pm), 1e-8);
    EXPECT_LE((pm - x).norm(), (y - x).norm() + 1e-12);
  }
}

TEST(Dykstra, Idempotent) {
  Rng rng(26);
  CMatrix x = random_hermitian(9, rng);
  CMatrix once = dykstra_choi_projection(x, 3).matrix();
  CMatrix twice = dykstra_choi_projection(once, 3).matrix();
  EXPECT_LE(max_abs(once - twice), 1e-9);
}

TEST(Dykstra, ReportsNonConvergence) {
  Rng rng(27);
  CMatrix x = 5.0 * random_hermitian(4, rng);
  DykstraOptions opt;
  opt.max_iters = 1;
  EXPECT_THROW(dykstra_choi_projection(x, 2, 2, opt), ConvergenceError);
}

TEST(ProjectToPrograms, DispatchesOnProgramSet) {
  Rng rng(28);
  CMatrix x = random_hermitian(4, rng);
  ProcessorMap tele = teleportation_processor(2);
  ProcessorMap red = pbt_reduced_map(2, 2);
  EXPECT_LE(max_abs(project_to_programs(tele, x).matrix() -
                    project_to_states(x).matrix()),
            1e-12);
  EXPECT_LE(max_abs(project_to_programs(red, x).matrix() -
                    dykstra_choi_projection(x, 2).matrix()),
            1e-12);
}

// ---------------------------------------------------------------------------
// Iterative methods

TEST(OptimConfig, Validation) {
  ProcessorMap p = teleportation_processor(2);
  CMatrix chi = choi(identity_channel(2));
  auto bad = [&](auto mutate) {
    OptimConfig cfg;
    mutate(cfg);
    EXPECT_THROW(projected_subgradient(p, chi, cfg), ValidationError);
  };
  bad([](OptimConfig& c) { c.max_iters = 0; });
  bad([](OptimConfig& c) { c.learning_rate.a = 0.0; });
  bad([](OptimConfig& c) {
    c.learning_rate.kind = LearningRateKind::kHarmonic;
    c.learning_rate.b = -1.0;
  });
  bad([](OptimConfig& c) { c.window = 0; });
  bad([](OptimConfig& c) { c.cost = {CostKind::Cmu, 0.0}; });
  bad([](OptimConfig& c) { c.cost = {CostKind::CR, 0.0}; });
  OptimConfig cfg;
  EXPECT_THROW(projected_subgradient(p, CMatrix::Identity(9, 9), cfg),
               DimensionError);
  cfg.start = CMatrix::Identity(3, 3);
  EXPECT_THROW(projected_subgradient(p, chi, cfg), DimensionError);
}

TEST(LearningRate, Schedules) {
  LearningRate inv;
  EXPECT_DOUBLE_EQ(inv(4), 0.5);
  LearningRate harm{LearningRateKind::kHarmonic, 2.0, 3.0};
  EXPECT_DOUBLE_EQ(harm(1), 0.5);
}

TEST(Subgradient, PauliTargetIsSimulatedExactly) {
  ProcessorMap p = teleportation_processor(2);
  CMatrix chi = choi(pauli_channel({0.7, 0.1, 0.1, 0.1}));
  OptimConfig cfg;
  OptimResult r = projected_subgradient(p, chi, cfg);
  EXPECT_LE(r.iterations, 200);
  EXPECT_LE(r.final_cost, 1e-6);
}

TEST(Subgradient, RotationByHalfPiIsSimulatedExactly) {
  ProcessorMap p = teleportation_processor(2);
  CMatrix chi = choi(rotation(std::numbers::pi / 2));
  OptimResult r = projected_subgradient(p, chi, OptimConfig{});
  EXPECT_LE(r.final_cost, 1e-4);
}

TEST(Subgradient, RecoversReachableTarget) {
  Rng rng(29);
  ProcessorMap p = teleportation_processor(2);
  CMatrix pi0 = random_density(4, rng).matrix();
  CMatrix chi = hermitian_part(p.apply(pi0));
  const double c0 = program_cost(p, chi, pi0, {CostKind::C1, 0});
  OptimResult r = projected_subgradient(p, chi, OptimConfig{});
  EXPECT_LE(r.final_cost, c0 + 1e-6);
}

TEST(Subgradient, IteratesAreProgramsAndBestCostIsMonotone) {
  Rng rng(30);
  for (const ProcessorMap& p : families()) {
    CMatrix chi = choi(amplitude_damping(0.4));
    OptimConfig cfg;
    cfg.max_iters = 60;
    std::vector<CMatrix> iterates;
    OptimResult r = projected_subgradient(p, chi, cfg, &iterates);
    ASSERT_EQ(iterates.size(), r.iterate_costs.size()) << p.label();
    for (const CMatrix& pi : iterates) {
      EXPECT_NO_THROW((void)DensityMatrix{pi}) << p.label();
      if (p.program_set() == ProgramSet::kChoi) {
        EXPECT_NO_THROW((void)ChoiMatrix(pi, p.d_in(), p.d_in())) << p.label();
      }
    }
    for (std::size_t k = 1; k < r.cost_trace.size(); ++k) {
      EXPECT_LE(r.cost_trace[k].second, r.cost_trace[k - 1].second);
    }
    EXPECT_DOUBLE_EQ(r.final_cost, r.cost_trace.back().second);
    EXPECT_NEAR(program_cost(p, chi, r.program.matrix(), cfg.cost), r.final_cost,
                1e-12);
  }
}

TEST(Subgradient, DeterministicUnderSeed) {
  ProcessorMap p = pqc_processor(1);
  CMatrix chi = choi(amplitude_damping(0.2));
  OptimConfig cfg;
  cfg.initial = InitialProgram::kRandom;
  cfg.seed = 7;
  OptimResult a = projected_subgradient(p, chi, cfg);
  OptimResult b = projected_subgradient(p, chi, cfg);
  EXPECT_EQ(a.iterate_costs, b.iterate_costs);
  EXPECT_EQ(a.program.matrix(), b.program.matrix());
  cfg.seed = 8;
  OptimResult c = projected_subgradient(p, chi, cfg);
  EXPECT_NE(a.iterate_costs.front(), c.iterate_costs.front());
}

TEST(Subgradient, StallStopsEarly) {
  ProcessorMap p = teleportation_processor(2);
  CMatrix chi = choi(identity_channel(2));
  OptimConfig cfg;
  cfg.window = 5;
  cfg.tolerance = 1.0;  // any window counts as stalled
  OptimResult r = projected_subgradient(p, chi, cfg);
  EXPECT_TRUE(r.converged);
  EXPECT_LT(r.iterations, cfg.max_iters);
}

TEST(FrankWolfe, UnitaryTargetFollowsMixingLaw) {
  Rng rng(31);
  for (const ProcessorMap& p :
       {teleportation_processor(2), pqc_processor(1), pbt_processor(2, 2)}) {
    CMatrix u = random_unitary(2, rng);
    CVector v = choi_vector(u);
    CMatrix chi = v * v.adjoint();
    UnitaryProgram best = learn_unitary_program(p, u);
    ASSERT_FALSE(best.degenerate) << p.label();
    OptimConfig cfg;
    cfg.cost = {CostKind::CF, 0};
    cfg.max_iters = 60;
    cfg.tolerance = 0.0;
    cfg.window = 1000;
    std::vector<CMatrix> it;
    frank_wolfe(p, chi, cfg, &it);
    ASSERT_GE(it.size(), 50u);
    for (int k = 1; k <= 50; ++k) {
      const double w = 2.0 / (k + static_cast<double>(k) * k);
      CMatrix expected = w * it[0] + (1.0 - w) * best.program.matrix();
      EXPECT_LE(max_abs(it[k - 1] - expected), 1e-12) << p.label() << " k=" << k;
    }
  }
}

TEST(FrankWolfe, PbtDepolarizingBeatsChoiProgram) {
  ProcessorMap p = pbt_processor(2, 2);
  CMatrix chi = choi(depolarizing(0.8));
  OptimResult r = frank_wolfe(p, chi, OptimConfig{});
  double baseline =
      program_cost(p, chi, kron_power(chi, 2), {CostKind::C1, 0});
  EXPECT_LE(r.final_cost, baseline);
  for (std::size_t k = 1; k < r.cost_trace.size(); ++k) {
    EXPECT_LE(r.cost_trace[k].second, r.cost_trace[k - 1].second);
  }
}

TEST(FrankWolfe, RejectsChoiProgramSet) {
  ProcessorMap p = pbt_reduced_map(2, 2);
  CMatrix chi = choi(depolarizing(0.5));
  EXPECT_THROW(frank_wolfe(p, chi, OptimConfig{}), ValidationError);
}

TEST(LearnUnitary, PauliXOnTeleportation) {
  ProcessorMap p = teleportation_processor(2);
  UnitaryProgram r = learn_unitary_program(p, pauli::X());
  EXPECT_NEAR(r.fidelity_sq, 1.0, 1e-12);
  CVector v = choi_vector(pauli::X());
  EXPECT_LE(max_abs(r.program.matrix() - v * v.adjoint()), 1e-10);
}

TEST(LearnUnitary, HalfPiRotationIsExact) {
  ProcessorMap p = teleportation_processor(2);
  EXPECT_NEAR(learn_unitary_program(p, rotation_unitary(std::numbers::pi / 2))
                  .fidelity_sq,
              1.0, 1e-12);
}

TEST(LearnUnitary, FidelityMatchesCostEvaluation) {
  Rng rng(32);
  for (const ProcessorMap& p : families()) {
    if (p.program_set() != ProgramSet::kStates) continue;
    CMatrix u = random_unitary(2, rng);
    UnitaryProgram r = learn_unitary_program(p, u);
    CVector v = choi_vector(u);
    double f = program_cost(p, v * v.adjoint(), r.program.matrix(),
                            {CostKind::F, 0});
    EXPECT_NEAR(f * f, r.fidelity_sq, 1e-9) << p.label();
    // No random program does better.
    for (int k = 0; k < 20; ++k) {
      CMatrix s = random_density(p.d_prog(), rng).matrix();
      double fs = program_cost(p, v * v.adjoint(), s, {CostKind::F, 0});
      EXPECT_LE(fs * fs, r.fidelity_sq + 1e-10);
    }
  }
}

TEST(LearnUnitary, RejectsNonUnitary) {
  ProcessorMap p = teleportation_processor(2);
  EXPECT_THROW(learn_unitary_program(p, 2.0 * pauli::X()), DomainError);
  EXPECT_THROW(learn_unitary_program(p, identity(3)), DimensionError);
}

}  // namespace
}  // namespace qprog
