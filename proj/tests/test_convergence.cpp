#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>

#include "gamma_elastica/gamma_elastica.hpp"

using namespace gamma_elastica;

namespace {

const NematicModel kModel(3.0, VolumetricLaw::reference());

}  // namespace

TEST(EpsSchedule, DefaultAndValidation) {
  const EpsSchedule s;
  ASSERT_EQ(s.size(), 8u);
  EXPECT_EQ(s[0], 0.2);
  EXPECT_EQ(s[7], 0.2 / 128.0);
  EXPECT_THROW(EpsSchedule({0.1, 0.1}), ConfigError);
  EXPECT_THROW(EpsSchedule({0.1, 0.2}), ConfigError);
  EXPECT_THROW(EpsSchedule({0.1, -0.01}), ConfigError);
  EXPECT_THROW(EpsSchedule(std::vector<double>{}), ConfigError);
  EXPECT_THROW(EpsSchedule::geometric(0.2, 1.5, 4), ConfigError);
}

TEST(CompactGrid, WithinRadiusAndDeterministic) {
  const auto a = CompactGrid<3>::build(2.0, 100, 7);
  const auto b = CompactGrid<3>::build(2.0, 100, 7);
  ASSERT_EQ(a.points.size(), b.points.size());
  for (std::size_t k = 0; k < a.points.size(); ++k) {
    EXPECT_LE(norm(a.points[k]), 2.0 * (1.0 + 1e-12));
    EXPECT_EQ(a.points[k].a, b.points[k].a);
  }
  EXPECT_THROW(CompactGrid<3>::build(0.0, 10), ConfigError);
}

TEST(UniformLimit, NematicDefaultsConvergeAtRateOne) {
  const auto grid = CompactGrid<3>::build(2.0, 200);
  ConvergenceCriteria crit;
  crit.min_rate = 0.9;
  const ConvergenceReport r = uniform_limit_scan(kModel, limit_of(kModel), grid, EpsSchedule(), crit);
  ASSERT_EQ(r.rows.size(), 8u);
  EXPECT_TRUE(r.passed);
  EXPECT_GE(r.rate, 0.9);
  EXPECT_LE(r.inversions, 1);
  for (const auto& row : r.rows) EXPECT_GE(row.error, 0.0);
  EXPECT_TRUE(std::isfinite(r.rate));
}

TEST(UniformLimit, WellSamplesHaveVanishingLimit) {
  CompactGrid<3> grid;
  grid.radius = 1.3;
  Rng rng(60);
  for (int k = 0; k < 50; ++k) grid.points.push_back(u_of_n(random_unit_vector(rng)));
  const NematicLimit lim = limit_of(kModel);
  for (const auto& e : grid.points) EXPECT_NEAR(lim.value(e), 0.0, 1e-12);
  const ConvergenceReport r = uniform_limit_scan(kModel, lim, grid, EpsSchedule());
  EXPECT_LT(r.rows.back().error, r.rows.front().error);
  EXPECT_LT(r.rows.back().error, 1e-2);
}

TEST(UniformLimit, SyntheticSingleWell) {
  const double radius = 2.0;
  const SyntheticModel<3> model(WellFamily<3>::finite({SymMat3::zero()}), 1.5, 2.0);
  const auto grid = CompactGrid<3>::build(radius, 100);
  const ConvergenceReport r = uniform_limit_scan(model, limit_of(model), grid, EpsSchedule());
  for (const auto& e : grid.points) EXPECT_NEAR(limit_of(model).value(e), 0.5 * 2.0 * norm2(e), 1e-14);
  // eps |E| stays in the quadratic branch of g_p, so V_eps equals the limit up
  // to roundoff, which grows like 1/eps.
  for (const auto& row : r.rows) EXPECT_LE(row.error, 1e-9 * radius * radius);
}

TEST(UniformLimit, InfiniteValuesAreReported) {
  const auto grid = CompactGrid<3>::build(10.0, 10);
  EXPECT_THROW(uniform_limit_scan(kModel, limit_of(kModel), grid, EpsSchedule({0.5})), InfiniteValue);
}

TEST(DistLimit, SingleZeroWellTargetsSquaredNorm) {
  Rng rng(61);
  for (int k = 0; k < 10; ++k) {
    const SymMat3 e = random_sym_in_ball<3>(rng, 2.0);
    const ConvergenceReport r = dist_limit_scan(e, WellFamily<3>::finite({SymMat3::zero()}), EpsSchedule());
    for (const auto& row : r.rows) {
      EXPECT_EQ(row.target, norm2(e));
      EXPECT_GE(row.value, 0.0);
    }
    // I + eps E is symmetric positive definite here, so its nearest rotation is I
    // and the rescaled distance equals |E|^2 up to roundoff at every eps.
    for (const auto& row : r.rows) EXPECT_LE(row.error, 1e-10);
    EXPECT_TRUE(r.passed);
  }
}

TEST(DistLimit, WellMemberHasZeroTarget) {
  const SymMat3 w = SymMat3::diagonal({0.5, -0.25, -0.25});
  const ConvergenceReport r = dist_limit_scan(w, WellFamily<3>::finite({w, SymMat3::zero()}), EpsSchedule());
  for (const auto& row : r.rows) EXPECT_EQ(row.target, 0.0);
  // I + eps U_n differs from the well stretch only across n, where 1 - eps/2
  // stands against (1 + eps)^(-1/2); both are coaxial and positive definite.
  const SymMat3 u = u_of_n(normalized({1.0, 2.0, 3.0}));
  const ConvergenceReport n = dist_limit_scan(u, WellFamily<3>::nematic(), EpsSchedule());
  for (const auto& row : n.rows) {
    EXPECT_NEAR(row.target, 0.0, 1e-14);
    const double gap = 1.0 / std::sqrt(1.0 + row.eps) - (1.0 - 0.5 * row.eps);
    const double expected = 2.0 * gap * gap / (row.eps * row.eps);
    EXPECT_NEAR(row.value, expected, 1e-6 * expected + 1e-13);
  }
  EXPECT_GT(n.rate, 1.9);
}

TEST(DistLimit, NematicRelativeErrorAtSmallEps) {
  Rng rng(62);
  for (int k = 0; k < 10; ++k) {
    const SymMat3 e = random_sym_in_ball<3>(rng, 2.0);
    const ConvergenceReport r = dist_limit_scan(e, WellFamily<3>::nematic(), EpsSchedule({1e-3}));
    EXPECT_LE(r.rows[0].error, 1e-2);
    EXPECT_NEAR(r.rows[0].target, min_dist2_to_un(e), 1e-15);
  }
}

TEST(Coercivity, SyntheticRatioIsTheScale) {
  const SyntheticModel<3> model(WellFamily<3>::finite({SymMat3::zero(), SymMat3::diagonal({1.0, -1.0, 0.0})}), 1.5,
                                2.5);
  CoercivitySampler s;
  s.count = 500;
  const CoercivityReport r = coercivity_scan(model, s, EpsSchedule({0.1, 0.05}));
  ASSERT_EQ(r.rows.size(), 2u);
  for (const auto& row : r.rows) {
    EXPECT_NEAR(row.c_min, 2.5, 1e-9);
    EXPECT_GT(row.near, 0);
    EXPECT_GT(row.far, 0);
    EXPECT_GT(row.mid, 0);
  }
}

TEST(Coercivity, NematicFrozenConstantOnSmallSample) {
  CoercivitySampler s;
  s.count = 300;
  s.seed = 99;
  const CoercivityReport r = coercivity_scan(kModel, s, EpsSchedule({0.1, 0.05, 0.02}));
  EXPECT_GE(r.c_min, 3.0);
  for (const auto& row : r.rows) {
    EXPECT_GT(det(row.argmin), 0.0);
    EXPECT_GE(row.argmin_distance, 5e-4);
  }
}

TEST(Coercivity, Deterministic) {
  CoercivitySampler s;
  s.count = 200;
  const CoercivityReport a = coercivity_scan(kModel, s, EpsSchedule({0.1}));
  const CoercivityReport b = coercivity_scan(kModel, s, EpsSchedule({0.1}));
  EXPECT_EQ(a.rows[0].c_min, b.rows[0].c_min);
  EXPECT_EQ(a.rows[0].argmin.a, b.rows[0].argmin.a);
}

TEST(QuadraticBound, FitThenVerify) {
  const NematicLimit lim{LimitParams(1.0, 2.0)};
  const auto grid = CompactGrid<3>::build(5.0, 300);
  const QuadraticBound b = quadratic_lower_bound_fit(lim, grid);
  EXPECT_TRUE(b.verified);
  EXPECT_GT(b.c1, 0.0);
  EXPECT_GE(b.worst_margin, 0.0);
  // Bound at the origin: -C2 <= V(0) = 1.5 mu.
  EXPECT_LE(-b.c2, lim.value(SymMat3::zero()));
  // Verification reaches ten times the radius, i.e. |E| = 50 >= 10.
  EXPECT_GT(b.verification_points, static_cast<int>(grid.points.size()));
}

TEST(QuadraticBound, LargeStrainRatioStaysAboveC1) {
  const NematicLimit lim{LimitParams(1.0, 2.0)};
  const QuadraticBound b = quadratic_lower_bound_fit(lim, CompactGrid<3>::build(5.0, 300));
  Rng rng(63);
  for (int k = 0; k < 1000; ++k) {
    const SymMat3 e = 1e3 * random_sym_direction<3>(rng);
    EXPECT_GE(lim.value(e) / norm2(e), b.c1);
    // dist(E, Q) >= |E| - max_Q |q| and the extreme points U_n have |U_n|^2 = 3/2.
    const double r = std::max(0.0, norm(e) - std::sqrt(1.5));
    EXPECT_GE(lim.value(e), lim.params.mu * r * r);
  }
}

TEST(HullMembership, Examples) {
  const LimitParams p(1.0, 2.0);
  EXPECT_TRUE(hull_membership(p, u_of_n(normalized({1, -1, 2}))).member_of_vqce_zero);
  const HullMembership zero = hull_membership(p, SymMat3::zero());
  EXPECT_TRUE(zero.member_of_vqce_zero);
  EXPECT_TRUE(zero.implies_qe2_member);
  const HullMembership out = hull_membership(p, SymMat3::diagonal({1.5, -0.75, -0.75}));
  EXPECT_FALSE(out.member_of_vqce_zero);
  EXPECT_GT(out.projection_distance, 0.0);
  EXPECT_THROW(hull_membership(LimitParams(1.0, -0.5), SymMat3::zero()), ConfigError);
}

TEST(Scans, BitReproducible) {
  const auto grid = CompactGrid<3>::build(2.0, 50);
  const ConvergenceReport a = uniform_limit_scan(kModel, limit_of(kModel), grid, EpsSchedule::geometric(0.2, 0.5, 3));
  const int cap = thread_cap();
  set_thread_cap(1);
  const ConvergenceReport b = uniform_limit_scan(kModel, limit_of(kModel), grid, EpsSchedule::geometric(0.2, 0.5, 3));
  set_thread_cap(cap);
  ASSERT_EQ(a.rows.size(), b.rows.size());
  for (std::size_t k = 0; k < a.rows.size(); ++k) {
    EXPECT_EQ(a.rows[k].error, b.rows[k].error);
    EXPECT_EQ(a.rows[k].value, b.rows[k].value);
  }
  EXPECT_EQ(a.rate, b.rate);
}

TEST(FitRate, RecoversPowerLaw) {
  std::vector<ScanRow> rows;
  for (double eps : {0.4, 0.2, 0.1, 0.05, 0.025}) rows.push_back({eps, 0.0, 0.0, 3.0 * eps * eps});
  EXPECT_NEAR(fit_rate(rows), 2.0, 1e-12);
}
