#include <gtest/gtest.h>

#include "blindmatch/lap.hpp"
#include "test_util.hpp"

namespace {

using namespace blindmatch;
using bmtest::brute_force_lap;
using bmtest::uniform_matrix;

// Certificate checks shared by both solvers.
void expect_certificate(const Matrix& c, const LapSolution& s) {
  const std::size_t n = c.rows();
  ASSERT_TRUE(is_permutation(s.assignment, n));
  double objective = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const auto a = static_cast<std::size_t>(s.assignment[i]);
    objective += c(i, a);
    EXPECT_LE(c(i, a) - s.u[i] - s.v[a], s.epsilon + 1e-9);
    for (std::size_t j = 0; j < n; ++j) EXPECT_GE(c(i, j) - s.u[i] - s.v[j], -s.epsilon - 1e-9);
  }
  EXPECT_NEAR(s.objective, objective, 1e-9);
  EXPECT_LE(s.objective - s.dual_objective(), static_cast<double>(n) * s.epsilon + 1e-6);
}

TEST(LapJv, TwoByTwoHandExample) {
  const Matrix c(2, 2, {1, 2, 3, 1});
  const auto s = solve_lap_jv(c);
  EXPECT_EQ(s.assignment, (Permutation{0, 1}));
  EXPECT_DOUBLE_EQ(s.objective, 2.0);
  EXPECT_DOUBLE_EQ(s.dual_objective(), 2.0);
}

TEST(LapJv, ComplementOfIdentity) {
  Matrix c(3, 3, 1.0);
  for (std::size_t i = 0; i < 3; ++i) c(i, i) = 0.0;
  const auto s = solve_lap_jv(c);
  EXPECT_EQ(s.assignment, identity_permutation(3));
  EXPECT_EQ(s.objective, 0.0);
}

TEST(LapJv, SingleEntry) {
  const auto s = solve_lap_jv(Matrix(1, 1, 4.5));
  EXPECT_EQ(s.assignment, (Permutation{0}));
  EXPECT_DOUBLE_EQ(s.u[0] + s.v[0], 4.5);
}

TEST(LapJv, MatchesBruteForceAndCertifies) {
  Rng rng(21);
  for (int t = 0; t < 200; ++t) {
    const std::size_t n = 1 + rng.below(8);
    const Matrix c = uniform_matrix(n, n, rng);
    const auto s = solve_lap_jv(c);
    EXPECT_NEAR(s.objective, brute_force_lap(c), 1e-12);
    EXPECT_NEAR(s.dual_objective(), s.objective, 1e-9);
    expect_certificate(c, s);
  }
}

TEST(LapJv, HandlesNegativeAndTiedCosts) {
  Rng rng(22);
  for (int t = 0; t < 50; ++t) {
    const std::size_t n = 2 + rng.below(6);
    Matrix c(n, n);
    for (double& v : c.values()) v = static_cast<double>(rng.below(3)) - 1.0;
    const auto s = solve_lap_jv(c, 1e-11);
    EXPECT_EQ(s.objective, brute_force_lap(c));
    expect_certificate(c, s);
  }
}

TEST(LapJv, RejectsBadInput) {
  EXPECT_EQ(bmtest::error_code_of([] { solve_lap_jv(Matrix(2, 3, 0.0)); }), ErrorCode::kInvalidArgument);
  Matrix c(2, 2, 0.0);
  c(0, 1) = std::numeric_limits<double>::infinity();
  EXPECT_EQ(bmtest::error_code_of([&] { solve_lap_jv(c); }), ErrorCode::kNonFinite);
}

TEST(LapAuction, TwoByTwoHandExample) {
  const Matrix c(2, 2, {1, 2, 3, 1});
  const auto s = solve_lap_auction(c, 1e-6);
  EXPECT_NEAR(s.objective, 2.0, 2e-6);
  expect_certificate(c, s);
}

TEST(LapAuction, IdentityStructure) {
  // Gap between diagonal and off-diagonal entries is 1.
  Matrix c(6, 6, 1.0);
  for (std::size_t i = 0; i < 6; ++i) c(i, i) = 0.0;
  for (double eps : {0.5, 0.1, 1e-3})
    EXPECT_EQ(solve_lap_auction(c, eps).assignment, identity_permutation(6));
}

TEST(LapAuction, WithinNEpsilonOfJv) {
  Rng rng(23);
  for (int t = 0; t < 200; ++t) {
    const std::size_t n = 1 + rng.below(50);
    const Matrix c = uniform_matrix(n, n, rng);
    const double eps = 1e-4;
    const auto a = solve_lap_auction(c, eps);
    const double exact = solve_lap_jv(c).objective;
    EXPECT_LE(a.objective - exact, static_cast<double>(n) * eps + 1e-12);
    EXPECT_GE(a.objective, exact - 1e-12);
    EXPECT_LE(a.dual_objective(), exact + 1e-9);
    expect_certificate(c, a);
  }
}

TEST(LapAuction, ReportsEveryScalingPhase) {
  Rng rng(24);
  const Matrix c = uniform_matrix(20, 20, rng);
  AuctionOptions options;
  std::vector<double> eps;
  options.on_phase = [&](const AuctionTrace& t) { eps.push_back(t.epsilon); };
  solve_lap_auction(c, 1e-5, options);
  ASSERT_FALSE(eps.empty());
  for (std::size_t i = 1; i < eps.size(); ++i) EXPECT_LT(eps[i], eps[i - 1]);
  EXPECT_DOUBLE_EQ(eps.back(), 1e-5);
}

TEST(LapWorkspace, ReuseGivesTheSameAnswers) {
  Rng rng(25);
  LapWorkspace ws;
  LapSolution out;
  for (int t = 0; t < 30; ++t) {
    const std::size_t n = 1 + rng.below(12);
    const Matrix c = uniform_matrix(n, n, rng);
    ws.solve_jv(c, out);
    const auto fresh = solve_lap_jv(c);
    EXPECT_EQ(out.assignment, fresh.assignment);
    EXPECT_EQ(out.objective, fresh.objective);
  }
}

}  // namespace
