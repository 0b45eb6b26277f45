#include <gtest/gtest.h>

#include <cmath>

#include "gamma_elastica/gamma_elastica.hpp"
#include "oracles.hpp"

using namespace gamma_elastica;

namespace {

const NematicModel kModel(3.0, VolumetricLaw::reference());

Mat3 random_mat(Rng& rng, double scale) {
  Mat3 m;
  for (double& x : m.a) x = scale * rng.normal();
  return m;
}

template <int D>
DisplacementField<D> perturbed(const BoxMesh<D>& mesh, const BoundarySpec<D>& bc, Rng& rng, double amp) {
  DisplacementField<D> u = affine_extension(mesh, bc);
  for (auto& v : u.values)
    for (double& x : v) x += amp * rng.normal();
  u.apply(mesh, bc);
  return u;
}

}  // namespace

TEST(BoxMesh, CountsAndVolumes) {
  const BoxMesh<2> m2(1);
  EXPECT_EQ(m2.elements().size(), 2u);
  EXPECT_NEAR(m2.total_volume(), 1.0, 1e-12);
  const BoxMesh<3> m3(2);
  EXPECT_EQ(m3.elements().size(), 48u);
  EXPECT_EQ(m3.vertex_count(), 27u);
  EXPECT_NEAR(m3.total_volume(), 1.0, 1e-12);
  for (const auto& el : m3.elements()) EXPECT_NEAR(el.volume, 1.0 / 48.0, 1e-15);
  double mass = 0.0;
  for (double m : m3.lumped_mass()) mass += m;
  EXPECT_NEAR(mass, 1.0, 1e-12);
}

TEST(BoxMesh, SizeCap) {
  EXPECT_NO_THROW(BoxMesh<3>(10));
  EXPECT_THROW(BoxMesh<3>(11), SizeError);
  EXPECT_THROW(BoxMesh<2>(4, 10), SizeError);
  EXPECT_THROW(BoxMesh<2>(0), ConfigError);
}

TEST(BoxMesh, AffineFieldGradientIsExact) {
  Rng rng(70);
  const BoxMesh<3> mesh(3);
  const Mat3 f = random_mat(rng, 1.0);
  const DisplacementField<3> u = DisplacementField<3>::affine(mesh, f);
  for (const auto& el : mesh.elements()) EXPECT_LE(norm(element_gradient(el, u.values) - f), 1e-12);
}

TEST(Boundary, ProjectionConformsToData) {
  Rng rng(71);
  const BoxMesh<3> mesh(3);
  const BoundarySpec<3> bc = BoundarySpec<3>::affine(random_mat(rng, 1.0), {{0, 0}, {2, 1}});
  DisplacementField<3> u = DisplacementField<3>::zero(mesh);
  for (auto& v : u.values)
    for (double& x : v) x = rng.normal();
  u.apply(mesh, bc);
  EXPECT_LE(u.boundary_residual(mesh, bc), 1e-12);
  EXPECT_THROW((BoundarySpec<3>{{}, Mat3::zero()}.validate(mesh)), ConfigError);
}

TEST(EnergyEps, AffineFieldsAreExact) {
  Rng rng(72);
  const BoxMesh<3> mesh(2);
  const LoadSpec<3> load = LoadSpec<3>::constant({0.1, -0.3, 0.2});
  for (int k = 0; k < 20; ++k) {
    const SymMat3 e = random_sym_in_ball<3>(rng, 1.0);
    const DisplacementField<3> u = DisplacementField<3>::affine(mesh, e.full());
    const double expected = rescaled_density(kModel, 0.1, e) - load_work(mesh, u, load);
    EXPECT_NEAR(energy_eps(mesh, u, kModel, 0.1, load), expected, 1e-12 * (1.0 + std::abs(expected)));
    // Non-symmetric gradients enter through W_eps(I + eps F) itself.
    const Mat3 f = random_mat(rng, 0.5);
    const DisplacementField<3> w = DisplacementField<3>::affine(mesh, f);
    EXPECT_NEAR(energy_eps(mesh, w, kModel, 0.1, LoadSpec<3>{}), energy(kModel, 0.1, Mat3::identity() + 0.1 * f) / 0.01,
                1e-12);
  }
}

TEST(EnergyEps, Examples) {
  const BoxMesh<3> mesh(2);
  const DisplacementField<3> zero = DisplacementField<3>::zero(mesh);
  EXPECT_NEAR(energy_eps(mesh, zero, kModel, 0.1, LoadSpec<3>{}), rescaled_density(kModel, 0.1, SymMat3::zero()), 1e-12);
  EXPECT_GT(energy_eps(mesh, zero, kModel, 0.1, LoadSpec<3>{}), 0.0);
  const SymMat3 u = u_of_n({1, 0, 0});
  double prev = kInfinity;
  for (double eps : {0.2, 0.1, 0.05, 0.025}) {
    const double e = energy_eps(mesh, DisplacementField<3>::affine(mesh, u.full()), kModel, eps, LoadSpec<3>{});
    EXPECT_LT(e, prev);
    EXPECT_LT(e, 4.0 * eps * kModel.mu);
    prev = e;
  }
  // A folded element makes the whole functional infinite.
  DisplacementField<3> fold = DisplacementField<3>::zero(mesh);
  fold.values[13] = {-100.0, 0.0, 0.0};
  EXPECT_EQ(energy_eps(mesh, fold, kModel, 0.1, LoadSpec<3>{}), kInfinity);
}

TEST(EnergyEps, DiscreteFrameIndifference) {
  Rng rng(73);
  const BoxMesh<3> mesh(2);
  const double eps = 0.1;
  for (int k = 0; k < 20; ++k) {
    const Mat3 f = random_mat(rng, 0.5);
    const BoundarySpec<3> bc = BoundarySpec<3>::affine(f);
    const DisplacementField<3> u = perturbed(mesh, bc, rng, 0.05);
    const Mat3 r = random_rotation<3>(rng);
    DisplacementField<3> ru = u;
    for (std::size_t v = 0; v < u.values.size(); ++v) {
      const Vec3& x = mesh.points()[v];
      Vec3 y;
      for (int i = 0; i < 3; ++i) y[i] = x[i] + eps * u.values[v][i];
      const Vec3 ry = r * y;
      for (int i = 0; i < 3; ++i) ru.values[v][i] = (ry[i] - x[i]) / eps;
    }
    const double a = energy_eps(mesh, u, kModel, eps, LoadSpec<3>{});
    const double b = energy_eps(mesh, ru, kModel, eps, LoadSpec<3>{});
    EXPECT_NEAR(a, b, 1e-9 * (1.0 + a));
  }
}

TEST(EnergyRelaxed, Examples) {
  Rng rng(74);
  const BoxMesh<3> mesh(2);
  const NematicLimit lim = limit_of(kModel);
  for (int k = 0; k < 10; ++k) {
    const Mat3 f = random_mat(rng, 1.0);
    EXPECT_NEAR(energy_relaxed(mesh, DisplacementField<3>::affine(mesh, f), lim, LoadSpec<3>{}), fqc(lim.params, f),
                1e-12 * (1.0 + fqc(lim.params, f)));
  }
  const Mat3 inside = SymMat3::diagonal({0.5, 0.0, -0.5}).full();
  EXPECT_NEAR(energy_relaxed(mesh, DisplacementField<3>::affine(mesh, inside), lim, LoadSpec<3>{}), 0.0, 1e-20);
  // Eigenvalue -0.75 leaves the box; the projection clips it to -1/2 and shifts
  // the others by 1/8, so dist^2 = 2 (1/8)^2 + (1/4)^2 = 3/32.
  const Mat3 outside = SymMat3::diagonal({0.5, 0.25, -0.75}).full();
  EXPECT_NEAR(energy_relaxed(mesh, DisplacementField<3>::affine(mesh, outside), lim, LoadSpec<3>{}),
              kModel.mu * 3.0 / 32.0, 1e-12);
}

TEST(Minimize, RelaxedAffineDataGivesClosedForm) {
  Rng rng(75);
  const NematicLimit lim = limit_of(kModel);
  const BoxMesh<3> mesh(3);
  for (int k = 0; k < 3; ++k) {
    const Mat3 f = random_mat(rng, 0.8);
    const MinimizeResult<3> r = minimize_relaxed(lim, mesh, BoundarySpec<3>::affine(f), LoadSpec<3>{});
    EXPECT_NEAR(r.value, fqc(lim.params, f), 1e-8);
    EXPECT_LE(r.u.boundary_residual(mesh, BoundarySpec<3>::affine(f)), 1e-12);
    EXPECT_EQ(r.starts.size(), 5u);
  }
}

TEST(Minimize, NeverWorseThanItsAffineStart) {
  Rng rng(76);
  const BoxMesh<3> mesh(2);
  const LoadSpec<3> load = LoadSpec<3>::constant({0.5, 0.0, -0.5});
  for (int k = 0; k < 3; ++k) {
    const BoundarySpec<3> bc = BoundarySpec<3>::affine(random_mat(rng, 0.3), {{0, 0}, {0, 1}});
    const MinimizeResult<3> r = minimize_eps(kModel, 0.1, mesh, bc, load);
    const double start = energy_eps(mesh, affine_extension(mesh, bc), kModel, 0.1, load);
    EXPECT_LE(r.value, start);
    EXPECT_LE(r.starts[0].value, r.starts[0].start_value);
    EXPECT_EQ(r.starts[0].start_value, start);
    EXPECT_LE(r.u.boundary_residual(mesh, bc), 1e-12);
  }
}

TEST(Minimize, RelaxedProblemIsConvexInTheDofs) {
  Rng rng(77);
  const NematicLimit lim = limit_of(kModel);
  const BoxMesh<3> mesh(3);
  const LoadSpec<3> load = LoadSpec<3>::constant({1.0, 0.5, -0.3});
  const BoundarySpec<3> bc = BoundarySpec<3>::affine(random_mat(rng, 0.6), {{0, 0}, {1, 1}});
  MinimizeOptions opts;
  opts.starts = 6;
  opts.perturbation = 2.0;
  const MinimizeResult<3> r = minimize_relaxed(lim, mesh, bc, load, opts);
  ASSERT_EQ(r.starts.size(), 6u);
  for (const auto& s : r.starts) {
    EXPECT_EQ(s.status, LbfgsStatus::converged);
    EXPECT_NEAR(s.value, r.value, 1e-7);
  }
}

TEST(Minimize, QuadraticCaseMatchesDenseSolve) {
  const SyntheticModel<2> model(WellFamily<2>::finite({SymMat2::zero()}), 1.5, 2.0);
  const WellLimit<2> lim = limit_of(model);
  Mat2 f;
  f(0, 0) = 0.3;
  f(0, 1) = -0.2;
  f(1, 0) = 0.1;
  f(1, 1) = 0.4;
  for (int n : {2, 3, 4}) {
    const BoxMesh<2> mesh(n);
    const MinimizeResult<2> r =
        minimize_relaxed(lim, mesh, BoundarySpec<2>::affine(f), LoadSpec<2>::constant({1.5, -0.7}));
    EXPECT_NEAR(r.value, oracle::quadratic_minimum_2d(mesh, 2.0, f, {1.5, -0.7}), 1e-6) << "n = " << n;
  }
}

TEST(Minimize, RejectsMultiwellRelaxedTarget) {
  const SyntheticModel<2> model(WellFamily<2>::finite({SymMat2::zero(), SymMat2::identity()}), 1.5, 1.0);
  const BoxMesh<2> mesh(2);
  EXPECT_THROW(minimize_relaxed(limit_of(model), mesh, BoundarySpec<2>::affine(Mat2::zero()), LoadSpec<2>{}),
               ConfigError);
}

TEST(Minimize, AllInfiniteStartsFail) {
  const BoxMesh<3> mesh(2);
  // Boundary data with negative determinant: every field has a folded element.
  const BoundarySpec<3> bc = BoundarySpec<3>::affine(Mat3::diagonal({-30.0, 0.0, 0.0}));
  EXPECT_THROW(minimize_eps(kModel, 0.1, mesh, bc, LoadSpec<3>{}), OptimizerFailure);
}

TEST(Sweep, WellDataGapVanishes) {
  const NematicLimit lim = limit_of(kModel);
  const std::vector<SweepCell> cells = {{0.2, 2}, {0.1, 3}, {0.05, 4}};
  const SweepReport r = epsilon_sweep(cells, kModel, lim, BoundarySpec<3>::affine(u_of_n({1, 0, 0}).full()), LoadSpec<3>{});
  ASSERT_TRUE(r.all_cells_ok());
  for (const auto& c : r.cells) {
    EXPECT_NEAR(c.m, 0.0, 1e-10);
    EXPECT_LE(c.m_eps, rescaled_density(kModel, c.eps, u_of_n({1, 0, 0})) + 1e-12);
  }
  EXPECT_TRUE(r.gap_decreasing);
  EXPECT_LE(r.cells.back().gap, 0.05 * kModel.mu);
  // The affine well field minimises both problems, so the gradient distance sits
  // at optimizer accuracy instead of decaying along the schedule.
  const StrongConvergenceReport d = strong_convergence_diagnostic(r, false);
  EXPECT_TRUE(d.passed);
  for (double g : d.gradient_distance) EXPECT_LE(g, 1e-5);
}

TEST(Sweep, StretchedWellDataHitsClosedFormTarget) {
  const NematicLimit lim = limit_of(kModel);
  const std::vector<SweepCell> cells = {{0.1, 2}, {0.05, 2}, {0.025, 2}};
  const SweepReport r =
      epsilon_sweep(cells, kModel, lim, BoundarySpec<3>::affine(1.5 * u_of_n({1, 0, 0}).full()), LoadSpec<3>{});
  ASSERT_TRUE(r.all_cells_ok());
  for (const auto& c : r.cells) EXPECT_NEAR(c.m, 0.375 * kModel.mu, 1e-8);
  EXPECT_TRUE(r.relative_gap_decreasing);
}

TEST(Sweep, SmallLoadKeepsGradientsBounded) {
  const NematicLimit lim = limit_of(kModel);
  const std::vector<SweepCell> cells = {{0.2, 2}, {0.1, 2}, {0.05, 2}};
  const SweepReport r = epsilon_sweep(cells, kModel, lim, BoundarySpec<3>::affine(Mat3::zero()),
                                      LoadSpec<3>::constant({0.3, 0.0, -0.2}));
  ASSERT_TRUE(r.all_cells_ok());
  for (const auto& c : r.cells) {
    EXPECT_TRUE(std::isfinite(c.m_eps));
    EXPECT_TRUE(std::isfinite(c.m));
    EXPECT_LE(c.grad_lp, 2.0 * r.cells.front().grad_lp + 1.0);
  }
}

TEST(Sweep, QuadraticCaseStrongConvergenceRate) {
  const SyntheticModel<2> model(WellFamily<2>::finite({SymMat2::zero()}), 1.5, 2.0);
  const std::vector<SweepCell> cells = {{0.2, 4}, {0.1, 4}, {0.05, 4}, {0.025, 4}};
  Mat2 f;
  f(0, 0) = 0.2;
  f(1, 1) = -0.1;
  const SweepReport r = epsilon_sweep(cells, model, limit_of(model), BoundarySpec<2>::affine(f),
                                      LoadSpec<2>::constant({1.0, 0.5}));
  ASSERT_TRUE(r.all_cells_ok());
  const StrongConvergenceReport d = strong_convergence_diagnostic(r, true);
  EXPECT_TRUE(d.decay_holds);
  EXPECT_GE(d.observed_rate, 0.5);
}

TEST(Sweep, DiagnosticIsDeterministic) {
  const SyntheticModel<2> model(WellFamily<2>::finite({SymMat2::zero()}), 1.5, 2.0);
  const std::vector<SweepCell> cells = {{0.1, 3}, {0.1, 3}};
  const SweepReport r = epsilon_sweep(cells, model, limit_of(model), BoundarySpec<2>::affine(Mat2::identity() * 0.1),
                                      LoadSpec<2>::constant({1.0, 0.0}));
  ASSERT_TRUE(r.all_cells_ok());
  EXPECT_EQ(r.cells[0].gradient_distance_lp, r.cells[1].gradient_distance_lp);
  EXPECT_EQ(r.cells[0].m_eps, r.cells[1].m_eps);
  // Equal gaps are not a strict decrease.
  EXPECT_FALSE(r.gap_decreasing);
  const StrongConvergenceReport d = strong_convergence_diagnostic(r, false);
  EXPECT_TRUE(d.passed);
}

TEST(Sweep, CellErrorsAreRecorded) {
  const NematicLimit lim = limit_of(kModel);
  const std::vector<SweepCell> cells = {{0.1, 2}, {0.1, 50}};
  const SweepReport r = epsilon_sweep(cells, kModel, lim, BoundarySpec<3>::affine(Mat3::zero()), LoadSpec<3>{});
  ASSERT_EQ(r.cells.size(), 2u);
  EXPECT_TRUE(r.cells[0].error.empty());
  EXPECT_FALSE(r.cells[1].error.empty());
  EXPECT_FALSE(r.all_cells_ok());
}

TEST(Sweep, NegativeLambdaIsRejected) {
  const NematicModel soft(3.0, VolumetricLaw::polynomial({0.5}, 0.5));
  EXPECT_THROW(epsilon_sweep({{0.1, 2}}, soft, limit_of(soft), BoundarySpec<3>::affine(Mat3::zero()), LoadSpec<3>{}),
               ConfigError);
}
