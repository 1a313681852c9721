#include <gtest/gtest.h>

#include <random>

#include "dynheight/fibral.hpp"

namespace dynheight {
namespace {

Rational q(long a, long b = 1) {
  Rational r(a, b);
  r.canonicalize();
  return r;
}

DenseMatrix<Integer> imat(std::initializer_list<std::initializer_list<long>> rows) {
  DenseMatrix<Integer> m;
  for (const auto& r : rows) {
    std::vector<Integer> row;
    for (long x : r) row.emplace_back(x);
    m.push_back(std::move(row));
  }
  return m;
}

DenseMatrix<Rational> rmat(std::initializer_list<std::initializer_list<long>> rows) {
  DenseMatrix<Rational> m;
  for (const auto& r : rows) {
    std::vector<Rational> row;
    for (long x : r) row.emplace_back(x);
    m.push_back(std::move(row));
  }
  return m;
}

const PermTypeMatrix kId2{{0, 1}};
const PermTypeMatrix kSwap{{1, 0}};

TEST(PermType, Examples) {
  EXPECT_TRUE(is_perm_type(imat({{1, 0}, {0, 1}})));
  EXPECT_TRUE(is_perm_type(imat({{1, 1}, {0, 0}})));
  EXPECT_FALSE(is_perm_type(imat({{1, 0}, {1, 1}})));
  EXPECT_FALSE(is_perm_type(imat({{2, 0}, {0, 1}})));
  EXPECT_EQ(PermTypeMatrix::from_dense(imat({{1, 1}, {0, 0}})).image, (std::vector<std::size_t>{0, 0}));
  EXPECT_EQ((PermTypeMatrix{{0, 0}}.dense()), rmat({{1, 1}, {0, 0}}));
}

TEST(RowSums, Examples) {
  EXPECT_EQ(row_sum_bounds(rmat({{1, 1}, {1, 1}})), std::make_pair(q(2), q(2)));
  EXPECT_EQ(row_sum_bounds(rmat({{1, 1}, {0, 0}})), std::make_pair(q(0), q(2)));
  EXPECT_THROW(row_sum_bounds(rmat({{1, -1}, {0, 0}})), ValidationError);
}

TEST(Spectral, Examples) {
  EXPECT_NEAR(spectral_radius({{1, 1}, {1, 1}}).value, 2.0, 1e-9);
  EXPECT_NEAR(spectral_radius({{1, 0}, {0, 1}}).value, 1.0, 1e-9);
  const auto nil = spectral_radius({{0, 1}, {0, 0}}, 20000, 1e-9);
  EXPECT_NEAR(nil.value, 0.0, 1e-8);
  EXPECT_NEAR(spectral_radius({{2, 1}, {1, 2}}).value, 3.0, 1e-9);
}

TEST(SolveWeights, Examples) {
  EXPECT_EQ(solve_weights(q(5), {PermTypeMatrix{{0}}, PermTypeMatrix{{0}}}, {q(3)}).x, std::vector<Rational>{q(1)});
  const auto w = solve_weights(q(5), {kId2, kSwap}, {q(1), q(0)});
  EXPECT_EQ(w.x, (std::vector<Rational>{q(4, 15), q(1, 15)}));
  EXPECT_TRUE(w.strong_hypothesis);
  const auto weak = solve_weights(q(3), {kId2, kSwap}, {q(1), q(0)});
  EXPECT_FALSE(weak.strong_hypothesis);
  EXPECT_EQ(weak.x, (std::vector<Rational>{q(2, 3), q(1, 3)}));
  EXPECT_EQ(solve_weights(q(2), {PermTypeMatrix{{1, 2, 0}}}, {q(1), q(1), q(1)}).x,
            (std::vector<Rational>{q(1), q(1), q(1)}));
  EXPECT_TRUE(solve_weights(q(7), {PermTypeMatrix{{1, 2, 0}}, PermTypeMatrix{{0, 0, 0}}}, {q(1), q(0), q(2)})
                  .strong_hypothesis);
  EXPECT_THROW(solve_weights(q(2), {kId2, kSwap}, {q(1), q(0)}), ValidationError);
}

TEST(SolveWeights, UsesTheImageConvention) {
  // x_t = alpha^-1 (x_{A(t)} + c_t) with A = (0 -> 1, 1 -> 1).
  const auto w = solve_weights(q(3), {PermTypeMatrix{{1, 1}}}, {q(0), q(2)});
  EXPECT_EQ(w.x[1], q(1));
  EXPECT_EQ(w.x[0], q(1, 3));
}

TEST(Synthetic, HandModels) {
  SyntheticModel one;
  one.n = 1;
  one.alpha = 2;
  one.actions = {PermTypeMatrix{{0}}};
  one.c = {q(0)};
  one.points = {ModelPoint{0, 0, {0}, 0, 0}};
  const auto m1 = complete_synthetic(one);
  EXPECT_EQ(m1.points[0].iE, q(0));
  EXPECT_TRUE(verify_intersection_formula(m1).ok);

  SyntheticModel two;
  two.n = 2;
  two.alpha = 5;
  two.actions = {kId2, kSwap};
  two.c = {q(1), q(0)};
  two.points = {ModelPoint{0, 0, {0, 1}, 0, 0}, ModelPoint{1, 1, {1, 0}, 0, 0}};
  const auto m2 = complete_synthetic(two);
  // vf = 0 forces L = 0, so iE = -x_sigma.
  EXPECT_EQ(m2.points[0].iE, q(-4, 15));
  EXPECT_EQ(m2.points[1].iE, q(-1, 15));
  const auto rep = verify_intersection_formula(m2);
  EXPECT_TRUE(rep.ok);
  EXPECT_EQ(rep.x, (std::vector<Rational>{q(4, 15), q(1, 15)}));
}

TEST(Synthetic, RejectsIncompatibleGraph) {
  SyntheticModel m;
  m.n = 2;
  m.alpha = 5;
  m.actions = {kId2, kSwap};
  m.c = {q(1), q(0)};
  m.points = {ModelPoint{0, 0, {0, 0}, 0, 0}, ModelPoint{1, 1, {1, 0}, 0, 0}};
  EXPECT_THROW(complete_synthetic(m), ValidationError);
}

TEST(Synthetic, SeededModelsVerify) {
  for (std::uint64_t seed = 1; seed <= 100; ++seed) {
    Lcg64 pick(seed * 7919);
    const std::size_t n = 1 + pick.below(6);
    const std::size_t k = 1 + pick.below(3);
    const Rational alpha = Rational(static_cast<long>(k)) + pick.small_rational(0, 1) + q(1 + pick.between(0, 5), 3);
    const auto m = build_synthetic(n, k, alpha, seed);
    EXPECT_LE(m.points.size(), 40u);
    const auto rep = verify_intersection_formula(m);
    EXPECT_TRUE(rep.ok) << "seed " << seed << ": " << (rep.failures.empty() ? "" : rep.failures.front());
    EXPECT_EQ(rep.weight_residual, 0);
    EXPECT_EQ(rep.intersection_residual, 0);
    EXPECT_EQ(rep.invariant_residual, 0);
    EXPECT_LE(rep.iteration_error, rep.iteration_bound);
  }
}

TEST(Synthetic, Deterministic) {
  const auto a = build_synthetic(4, 2, q(7, 2), 42);
  const auto b = build_synthetic(4, 2, q(7, 2), 42);
  ASSERT_EQ(a.points.size(), b.points.size());
  for (std::size_t i = 0; i < a.points.size(); ++i) {
    EXPECT_EQ(a.points[i].iE, b.points[i].iE);
    EXPECT_EQ(a.points[i].images, b.points[i].images);
  }
}

TEST(Synthetic, PerturbationIsLocalized) {
  auto m = build_synthetic(3, 2, q(5), 5);
  const std::size_t touched = m.points.size() / 2;
  m.points[touched].iE += q(1, 7);
  std::vector<std::size_t> expected{touched};
  for (const auto& p : m.points)
    for (std::size_t img : p.images)
      if (img == touched) expected.push_back(p.id);
  std::sort(expected.begin(), expected.end());
  expected.erase(std::unique(expected.begin(), expected.end()), expected.end());

  const auto rep = verify_intersection_formula(m);
  EXPECT_FALSE(rep.ok);
  ASSERT_GE(rep.failures.size(), 2u);
  EXPECT_EQ(rep.failures[0].rfind("intersection identity fails at points " + detail::id_list(expected), 0), 0u)
      << rep.failures[0];
  EXPECT_EQ(rep.failures[1].rfind("invariant identity fails at points " + detail::id_list(expected), 0), 0u);
  EXPECT_EQ(rep.weight_residual, 0);
  EXPECT_GE(rep.intersection_residual, q(1, 7));
}

// Row-sum bounds hold for the spectral radius of random nonnegative matrices.
TEST(Property, RowSumBracketsSpectralRadius) {
  Lcg64 rng(2024);
  for (int trial = 0; trial < 100; ++trial) {
    DenseMatrix<Rational> m(6, std::vector<Rational>(6));
    for (auto& row : m)
      for (auto& x : row) x = Rational(rng.between(0, 10), rng.between(1, 4));
    for (auto& row : m)
      for (auto& x : row) x.canonicalize();
    const auto [lo, hi] = row_sum_bounds(m);
    const auto est = spectral_radius(to_doubles(m));
    EXPECT_GE(est.value, lo.get_d() - 1e-6);
    EXPECT_LE(est.value, hi.get_d() + 1e-6);
  }
}

TEST(Property, ActionSumsHaveRadiusK) {
  Lcg64 rng(77);
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t n = 1 + rng.below(6);
    const std::size_t k = 1 + rng.below(3);
    std::vector<PermTypeMatrix> acts(k);
    for (auto& a : acts)
      for (std::size_t j = 0; j < n; ++j) a.image.push_back(rng.below(n));
    const auto s = action_sum(acts);
    const auto [lo, hi] = row_sum_bounds(transpose(s));
    EXPECT_EQ(lo, Rational(static_cast<long>(k)));
    EXPECT_EQ(hi, Rational(static_cast<long>(k)));
    EXPECT_LE(spectral_radius(to_doubles(s)).value, static_cast<double>(k) + 1e-6);
    std::vector<Rational> c;
    for (std::size_t j = 0; j < n; ++j) c.push_back(rng.small_rational(5, 5));
    const std::vector<Rational> alphas{Rational(Rational(static_cast<long>(k)) + q(1, 10)),
                                       Rational(static_cast<long>(n * k)), Rational(static_cast<long>(n * k + 1))};
    for (const auto& alpha : alphas) {
      if (alpha <= Rational(static_cast<long>(k))) continue;
      const auto w = solve_weights(alpha, acts, c);
      const auto op = weight_operator(alpha, acts);
      for (std::size_t t = 0; t < n; ++t) {
        Rational r = -c[t];
        for (std::size_t j = 0; j < n; ++j) r += op[t][j] * w.x[j];
        EXPECT_EQ(r, 0);
      }
      EXPECT_EQ(w.strong_hypothesis, alpha > Rational(static_cast<long>(n * k)));
    }
  }
}

}  // namespace
}  // namespace dynheight
