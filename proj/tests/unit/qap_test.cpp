#include <cmath>

#include <gtest/gtest.h>

#include "blindmatch/qap.hpp"
#include "blindmatch/synthetic.hpp"
#include "test_util.hpp"

namespace {

using namespace blindmatch;
using bmtest::error_code_of;
using bmtest::random_prototypes;
using bmtest::random_qap;

// GW instance with pair terms.
struct GwInstance {
  SimilarityMatrix x, y;
  FactorizedQap qap;
};

GwInstance gw_instance(std::size_t n, std::uint64_t seed) {
  Rng rng(seed);
  GwInstance g{gw_kernel(random_prototypes(n, 3, rng)), gw_kernel(random_prototypes(n, 3, rng)), {}};
  g.qap = to_qap(g.x, g.y, DistortionSpec::squared_diff());
  return g;
}

HahnGrantConfig quick_config() {
  HahnGrantConfig cfg;
  cfg.primal_heuristic_seeds = 5;
  cfg.max_iters = 200;
  return cfg;
}

// ---------------------------------------------------------------------------
// Enumeration

TEST(Enumeration, SingleItem) {
  const auto q = make_factorized_qap(Matrix(1, 1, 3.0), Matrix(1, 1, 2.0), 0.0);
  const auto r = solve_enumeration(q);
  EXPECT_EQ(r.primal_perm, identity_permutation(1));
  EXPECT_NEAR(r.primal_cost, 6.0, 1e-12);
  EXPECT_TRUE(r.converged);
}

TEST(Enumeration, MatchesDoubleLoopOverAllPermutations) {
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const auto g = gw_instance(6, seed);
    const auto r = solve_enumeration(g.qap);
    EXPECT_LT(bmtest::relative_error(r.primal_cost, bmtest::brute_force_distortion(g.x, g.y, DistortionSpec::squared_diff())),
              1e-9);
    EXPECT_EQ(r.qap_dual, r.qap_primal);
    EXPECT_TRUE(r.converged);
    EXPECT_EQ(r.stop_reason, StopReason::kExact);
  }
}

TEST(Enumeration, RefusesLargeInstances) {
  EXPECT_EQ(error_code_of([] { solve_enumeration(random_qap(kMaxEnumerationSize + 1, 1)); }), ErrorCode::kTooLarge);
}

// ---------------------------------------------------------------------------
// Factorized Hahn-Grant

TEST(HahnGrant, DualSoundOnRandomInstances) {
  Rng rng(31);
  for (int t = 0; t < 40; ++t) {
    const std::size_t n = 4 + rng.below(4);
    const auto q = t % 2 ? random_qap(n, 100 + t) : gw_instance(n, 100 + t).qap;
    const double opt = solve_enumeration(q).qap_primal;
    for (LapBackend lap : {LapBackend::kJonkerVolgenant, LapBackend::kAuction}) {
      auto cfg = quick_config();
      cfg.lap = lap;
      const auto r = solve_factorized_hahn_grant(q, cfg);
      EXPECT_LE(r.qap_dual, opt + 1e-9);
      EXPECT_GE(r.qap_primal, opt - 1e-9);
      EXPECT_LE(r.qap_dual, r.qap_primal + 1e-6);
    }
  }
}

TEST(HahnGrant, HistoryIsMonotoneAndConvergenceIsCertified) {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const auto g = gw_instance(7, seed);
    const auto r = solve_factorized_hahn_grant(g.qap, quick_config());
    ASSERT_FALSE(r.history.empty());
    for (std::size_t i = 1; i < r.history.size(); ++i)
      EXPECT_GE(r.history[i].qap_dual, r.history[i - 1].qap_dual - 1e-12);
    if (r.converged) {
      EXPECT_LE(r.gap(), 1e-6);
      EXPECT_NEAR(r.qap_primal, solve_enumeration(g.qap).qap_primal, 1e-9);
    }
  }
}

TEST(HahnGrant, PrimalCostIsTheDistortionOfThePermutation) {
  const auto g = gw_instance(8, 3);
  const auto r = solve_factorized_hahn_grant(g.qap, quick_config());
  EXPECT_LT(bmtest::relative_error(r.primal_cost, distortion(g.x, g.y, DistortionSpec::squared_diff(), r.primal_perm)),
            1e-6);
}

TEST(HahnGrant, ImplicitCostsStayNonnegative) {
  for (LapBackend lap : {LapBackend::kJonkerVolgenant, LapBackend::kAuction})
    for (std::uint64_t seed = 0; seed < 4; ++seed) {
      const auto q = seed % 2 ? random_qap(6, seed) : gw_instance(6, seed).qap;
      auto cfg = quick_config();
      cfg.lap = lap;
      cfg.max_iters = 30;
      double lowest = 0.0;
      cfg.on_iteration = [&](const HahnGrantState& s) { lowest = std::min(lowest, s.min_pair_cost()); };
      solve_factorized_hahn_grant(q, cfg);
      EXPECT_GE(lowest, -1e-6) << to_string(lap);
    }
}

TEST(HahnGrant, IdenticalKernelsCloseTheGapAtIdentity) {
  Rng rng(32);
  const auto k = gw_kernel(random_prototypes(9, 4, rng));
  auto cfg = quick_config();
  cfg.primal_heuristic_seeds = 0;
  const auto r = solve_factorized_hahn_grant(to_qap(k, k, DistortionSpec::squared_diff()), cfg);
  EXPECT_TRUE(r.converged);
  EXPECT_EQ(r.primal_perm, identity_permutation(9));
  EXPECT_NEAR(r.primal_cost, 0.0, 1e-9);
  EXPECT_NEAR(r.dual_bound, 0.0, 1e-9);
}

TEST(HahnGrant, ZeroFactorsConvergeImmediately) {
  const auto q = make_factorized_qap(Matrix(5, 5, 0.0), Matrix(5, 5, 0.0), 0.0);
  const auto r = solve_factorized_hahn_grant(q, quick_config());
  EXPECT_TRUE(r.converged);
  EXPECT_EQ(r.iterations, 1);
  EXPECT_EQ(r.qap_dual, 0.0);
}

TEST(HahnGrant, TimeLimitReturnsBestSoFar) {
  auto cfg = quick_config();
  cfg.time_limit = 1e-3;
  cfg.max_iters = 100000;
  cfg.tol_abs = cfg.tol_rel = 1e-15;
  const auto r = solve_factorized_hahn_grant(random_qap(30, 7), cfg);
  EXPECT_EQ(r.stop_reason, StopReason::kTimeLimit);
  EXPECT_FALSE(r.converged);
  EXPECT_TRUE(is_permutation(r.primal_perm, 30));
}

TEST(HahnGrant, IterationLimit) {
  auto cfg = quick_config();
  cfg.max_iters = 2;
  cfg.tol_abs = cfg.tol_rel = 1e-15;
  const auto r = solve_factorized_hahn_grant(random_qap(12, 8), cfg);
  EXPECT_EQ(r.iterations, 2);
  EXPECT_EQ(r.history.size(), 2u);
}

TEST(HahnGrant, InitialPermutationIsUsed) {
  const auto q = random_qap(6, 9);
  const auto best = solve_enumeration(q).primal_perm;
  auto cfg = quick_config();
  cfg.initial_perm = best;
  cfg.max_iters = 1;
  EXPECT_NEAR(solve_factorized_hahn_grant(q, cfg).qap_primal, q.objective(best), 1e-12);
  cfg.initial_perm = Permutation{0, 0, 1, 2, 3, 4};
  EXPECT_EQ(error_code_of([&] { solve_factorized_hahn_grant(q, cfg); }), ErrorCode::kInvalidArgument);
}

TEST(HahnGrant, RejectsInvalidTolerances) {
  const auto q = random_qap(4, 10);
  for (int field = 0; field < 3; ++field) {
    auto cfg = quick_config();
    (field == 0 ? cfg.tol_abs : field == 1 ? cfg.tol_rel : cfg.tol_gap) = -1.0;
    EXPECT_EQ(error_code_of([&] { solve_factorized_hahn_grant(q, cfg); }), ErrorCode::kInvalidConfig);
  }
  auto cfg = quick_config();
  cfg.time_limit = -1.0;
  EXPECT_EQ(error_code_of([&] { solve_factorized_hahn_grant(q, cfg); }), ErrorCode::kInvalidConfig);
}

TEST(HahnGrant, LapBackendNames) {
  EXPECT_EQ(parse_lap_backend("jv"), LapBackend::kJonkerVolgenant);
  EXPECT_EQ(parse_lap_backend("auction"), LapBackend::kAuction);
  EXPECT_EQ(to_string(LapBackend::kAuction), "auction");
  EXPECT_EQ(error_code_of([] { parse_lap_backend("hungarian-ish"); }), ErrorCode::kInvalidConfig);
}

// ---------------------------------------------------------------------------
// Reference solver and equivalence

// Runs both solvers for `iters` iterations; returns the largest difference in
// bound or leader over all iterations.
double equivalence_error(const FactorizedQap& q, int iters) {
  const auto ref = solve_hahn_grant_reference(expand_tensor(q), iters, -1.0);
  std::vector<double> bounds;
  std::vector<Matrix> leaders;
  HahnGrantConfig cfg;
  cfg.primal_heuristic_seeds = 0;
  cfg.max_iters = iters;
  cfg.tol_abs = cfg.tol_rel = cfg.tol_gap = 1e-300;
  cfg.on_iteration = [&](const HahnGrantState& s) {
    bounds.push_back(s.bound());
    leaders.push_back(s.leader_solved());
  };
  solve_factorized_hahn_grant(q, cfg);
  const std::size_t steps = std::min(bounds.size(), ref.trace.size());
  EXPECT_GT(steps, 0u);
  double worst = 0.0;
  for (std::size_t t = 0; t < steps; ++t) {
    worst = std::max(worst, std::abs(bounds[t] - ref.trace[t].bound));
    for (std::size_t i = 0; i < q.size(); ++i)
      for (std::size_t j = 0; j < q.size(); ++j)
        worst = std::max(worst, std::abs(leaders[t](i, j) - ref.trace[t].leader(i, j)));
  }
  return worst;
}

TEST(HahnGrantReference, AgreesWithFactorizedSolver) {
  for (std::uint64_t seed = 0; seed < 6; ++seed) EXPECT_LT(equivalence_error(random_qap(4 + seed % 3, seed), 20), 1e-9);
}

TEST(HahnGrantReference, AgreesWithPairTerms) {
  for (std::uint64_t seed = 0; seed < 6; ++seed)
    EXPECT_LT(equivalence_error(gw_instance(4 + seed % 3, seed).qap, 20), 1e-9);
}

TEST(HahnGrantReference, ZeroTensor) {
  CostTensor c{4, std::vector<double>(256, 0.0)};
  const auto r = solve_hahn_grant_reference(c, 10);
  EXPECT_EQ(r.bound, 0.0);
  EXPECT_TRUE(r.converged);
  EXPECT_LE(r.trace.size(), 2u);
}

TEST(HahnGrantReference, BoundIsValid) {
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const auto q = random_qap(5, 40 + seed);
    EXPECT_LE(solve_hahn_grant_reference(expand_tensor(q), 50).bound, solve_enumeration(q).qap_primal + 1e-9);
  }
}

TEST(HahnGrantReference, SizeLimits) {
  EXPECT_EQ(error_code_of([] { expand_tensor(random_qap(kMaxReferenceSize + 1, 1)); }), ErrorCode::kTooLarge);
  EXPECT_EQ(error_code_of([] { solve_hahn_grant_reference(CostTensor{3, std::vector<double>(80)}, 1); }),
            ErrorCode::kSizeMismatch);
}

// ---------------------------------------------------------------------------
// Heuristics

Matrix identity_biased(std::size_t n) {
  Matrix s(n, n, 0.5 / static_cast<double>(n));
  for (std::size_t i = 0; i < n; ++i) s(i, i) += 0.5;
  return s;
}

TEST(Faq, IdenticalKernelsFromIdentityBiasedStart) {
  Rng rng(33);
  const auto k = gw_kernel(random_prototypes(10, 4, rng));
  const auto q = to_qap(k, k, DistortionSpec::squared_diff());
  const auto p = faq_from(q, identity_biased(10));
  EXPECT_NEAR(q.to_distortion(q.objective(p)), 0.0, 1e-9);
}

TEST(Faq, NeverBelowOptimumAndUsuallyBeatsRandom) {
  Rng rng(34);
  int beats = 0;
  for (int t = 0; t < 100; ++t) {
    const std::size_t n = 4 + rng.below(5);
    const auto q = random_qap(n, 500 + t);
    const double cost = q.objective(solve_faq(q, 1, t));
    if (t < 20) {
      EXPECT_GE(cost, solve_enumeration(q).qap_primal - 1e-12);
    }
    beats += cost <= q.objective(random_permutation(n, rng));
  }
  EXPECT_GE(beats, 95);
}

TEST(TwoOpt, LocalOptimumIsAFixedPoint) {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const auto q = random_qap(8, 600 + seed);
    Rng rng(seed);
    const auto init = random_permutation(8, rng);
    const auto once = solve_2opt(q, init);
    EXPECT_LE(q.objective(once), q.objective(init) + 1e-12);
    EXPECT_EQ(solve_2opt(q, once), once);
    EXPECT_GE(q.objective(once), solve_enumeration(q).qap_primal - 1e-12);
  }
}

TEST(PrimalHeuristic, SingleSeedOnIdenticalKernels) {
  Rng rng(35);
  const auto k = gw_kernel(random_prototypes(8, 4, rng));
  const auto q = to_qap(k, k, DistortionSpec::squared_diff());
  EXPECT_NEAR(q.to_distortion(q.objective(primal_heuristic(q, 1))), 0.0, 1e-9);
}

TEST(PrimalHeuristic, DeterministicForSeed) {
  const auto q = random_qap(9, 36);
  EXPECT_EQ(primal_heuristic(q, 4, 7), primal_heuristic(q, 4, 7));
}

// ---------------------------------------------------------------------------
// Entropic GW and the transport identity

Matrix random_coupling(std::size_t n, Rng& rng) {
  Matrix m(n, n);
  for (double& v : m.values()) v = rng.uniform(0.01, 1.0);
  return sinkhorn_normalize(std::move(m), std::vector<double>(n, 1.0 / n), std::vector<double>(n, 1.0 / n), 500);
}

TEST(Transport, FactoredObjectiveMatchesQuadrupleLoop) {
  Rng rng(37);
  for (KernelKind kind : {KernelKind::kGwDistance, KernelKind::kCka}) {
    const auto spec = DistortionSpec::for_kernel(kind);
    const auto x = build_kernel(random_prototypes(6, 3, rng), kind);
    const auto y = build_kernel(random_prototypes(6, 3, rng), kind);
    const Matrix t = random_coupling(6, rng);
    EXPECT_LT(bmtest::relative_error(transport_objective(x, y, spec, t), relaxed_qap_objective_direct(x, y, spec, t)),
              1e-12);
  }
}

TEST(Transport, ScaledCouplingIdentity) {
  Rng rng(38);
  const std::size_t n = 7;
  const auto x = gw_kernel(random_prototypes(n, 3, rng));
  const auto y = gw_kernel(random_prototypes(n, 3, rng));
  const auto spec = DistortionSpec::squared_diff();
  const Matrix t = random_coupling(n, rng);
  Matrix s = t;
  for (double& v : s.values()) v *= static_cast<double>(n);
  EXPECT_LT(bmtest::relative_error(relaxed_qap_objective_direct(x, y, spec, s),
                                   static_cast<double>(n * n) * transport_objective(x, y, spec, t)),
            1e-9);
}

TEST(EntropicGw, CouplingHasUniformMarginalsAndPermutationIsFeasible) {
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const auto g = gw_instance(7, 700 + seed);
    const auto r = solve_entropic_gw(g.x, g.y, DistortionSpec::squared_diff());
    for (std::size_t i = 0; i < 7; ++i) {
      double row = 0.0, col = 0.0;
      for (std::size_t j = 0; j < 7; ++j) {
        row += r.coupling(i, j);
        col += r.coupling(j, i);
        EXPECT_GE(r.coupling(i, j), 0.0);
      }
      EXPECT_NEAR(row, 1.0 / 7, 1e-9);
      EXPECT_NEAR(col, 1.0 / 7, 1e-9);
    }
    EXPECT_GT(r.eps_entropy, 0.0);
    ASSERT_TRUE(is_permutation(r.perm, 7));
    EXPECT_GE(g.qap.objective(r.perm), solve_enumeration(g.qap).qap_primal - 1e-12);
  }
}

TEST(ReportForPermutation, UsesTheAffineMap) {
  const auto g = gw_instance(5, 39);
  const Permutation p{4, 3, 2, 1, 0};
  const auto r = report_for_permutation(g.qap, p, "manual");
  EXPECT_EQ(r.solver, "manual");
  EXPECT_EQ(r.primal_perm, p);
  EXPECT_FALSE(r.converged);
  EXPECT_LT(bmtest::relative_error(r.primal_cost, distortion(g.x, g.y, DistortionSpec::squared_diff(), p)), 1e-9);
}

}  // namespace
