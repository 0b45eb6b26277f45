#pragma once

// Scans measuring the small-strain limit statements: uniform convergence of
// V_eps to V, the well-distance limit, coercivity constants, the quadratic
// lower bound on V and the zero-set membership test.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <string>
#include <vector>

#include "gamma_elastica/energy.hpp"
#include "gamma_elastica/errors.hpp"
#include "gamma_elastica/limit.hpp"
#include "gamma_elastica/matrix.hpp"
#include "gamma_elastica/parallel.hpp"
#include "gamma_elastica/random.hpp"
#include "gamma_elastica/spectral.hpp"
#include "gamma_elastica/wells.hpp"

namespace gamma_elastica {

// ---------------------------------------------------------------------------
// Samplers

inline constexpr double kInvSqrt2 = 0.70710678118654752440;

template <int D>
Mat<D> random_rotation(Rng& rng) {
  if constexpr (D == 2) {
    return planar_rotation(rng.uniform(0.0, 2.0 * std::numbers::pi));
  } else {
    // Uniform unit quaternion.
    double q[4];
    double n = 0.0;
    do {
      n = 0.0;
      for (double& x : q) {
        x = rng.normal();
        n += x * x;
      }
    } while (n < 1e-12);
    n = std::sqrt(n);
    for (double& x : q) x /= n;
    const double w = q[0], x = q[1], y = q[2], z = q[3];
    Mat3 r;
    r(0, 0) = 1 - 2 * (y * y + z * z);
    r(0, 1) = 2 * (x * y - w * z);
    r(0, 2) = 2 * (x * z + w * y);
    r(1, 0) = 2 * (x * y + w * z);
    r(1, 1) = 1 - 2 * (x * x + z * z);
    r(1, 2) = 2 * (y * z - w * x);
    r(2, 0) = 2 * (x * z - w * y);
    r(2, 1) = 2 * (y * z + w * x);
    r(2, 2) = 1 - 2 * (x * x + y * y);
    return r;
  }
}

inline Vec3 random_unit_vector(Rng& rng) {
  Vec3 v;
  double n = 0.0;
  do {
    for (double& x : v) x = rng.normal();
    n = norm(v);
  } while (n < 1e-12);
  for (double& x : v) x /= n;
  return v;
}

/// Gaussian direction in the symmetric matrices (Frobenius unit norm).
template <int D>
SymMat<D> random_sym_direction(Rng& rng) {
  SymMat<D> s;
  double n = 0.0;
  do {
    for (int i = 0; i < D; ++i)
      for (int j = i; j < D; ++j) s(i, j) = rng.normal() * (i == j ? 1.0 : kInvSqrt2);
    n = norm(s);
  } while (n < 1e-12);
  return (1.0 / n) * s;
}

/// Uniform in the Frobenius ball of radius r.
template <int D>
SymMat<D> random_sym_in_ball(Rng& rng, double r) {
  constexpr double k = SymMat<D>::size;
  return (r * std::pow(rng.uniform(), 1.0 / k)) * random_sym_direction<D>(rng);
}

template <int D>
Mat<D> random_mat_direction(Rng& rng) {
  Mat<D> m;
  double n = 0.0;
  do {
    for (int i = 0; i < D; ++i)
      for (int j = 0; j < D; ++j) m(i, j) = rng.normal();
    n = norm(m);
  } while (n < 1e-12);
  return (1.0 / n) * m;
}

// ---------------------------------------------------------------------------
// Schedules and grids

class EpsSchedule {
 public:
  EpsSchedule() : EpsSchedule(geometric()) {}
  explicit EpsSchedule(std::vector<double> values) : values_(std::move(values)) {
    if (values_.empty()) throw ConfigError("EpsSchedule: schedule is empty");
    for (std::size_t k = 0; k < values_.size(); ++k) {
      if (!(values_[k] > 0.0) || !std::isfinite(values_[k])) throw ConfigError("EpsSchedule: eps must be positive");
      if (k > 0 && !(values_[k] < values_[k - 1])) throw ConfigError("EpsSchedule: eps must strictly decrease");
    }
  }

  /// first * ratio^k, k = 0..count-1 (default 0.2 * 2^-k, k = 0..7).
  static EpsSchedule geometric(double first = 0.2, double ratio = 0.5, int count = 8) {
    if (count < 1 || !(ratio > 0.0 && ratio < 1.0)) throw ConfigError("EpsSchedule: bad geometric schedule");
    std::vector<double> v;
    double e = first;
    for (int k = 0; k < count; ++k, e *= ratio) v.push_back(e);
    return EpsSchedule(std::move(v));
  }

  const std::vector<double>& values() const { return values_; }
  std::size_t size() const { return values_.size(); }
  double operator[](std::size_t k) const { return values_[k]; }

 private:
  std::vector<double> values_;
};

/// A finite sample of symmetric matrices within |E| <= radius.
template <int D>
struct CompactGrid {
  double radius = 1.0;
  std::vector<SymMat<D>> points;

  void validate() const {
    if (points.empty()) throw ConfigError("CompactGrid: grid is empty");
    for (const auto& p : points)
      if (norm(p) > radius * (1.0 + 1e-12)) throw ConfigError("CompactGrid: point outside the radius bound");
  }

  /// Structured points (origin, scaled basis, identity multiples, well
  /// samples, spectral-set boundary) followed by `random_count` seeded points.
  static CompactGrid build(double radius, int random_count, std::uint64_t seed = kDefaultSeed) {
    if (!(radius > 0.0)) throw ConfigError("CompactGrid: radius must be positive");
    CompactGrid g;
    g.radius = radius;
    auto add = [&](const SymMat<D>& e) {
      const double n = norm(e);
      g.points.push_back(n > radius ? (radius / n) * e : e);
    };
    add(SymMat<D>::zero());
    for (double s : {-1.0, -0.5, 0.5, 1.0})
      for (int i = 0; i < D; ++i)
        for (int j = i; j < D; ++j) {
          SymMat<D> b;
          b(i, j) = i == j ? 1.0 : kInvSqrt2;
          add((s * radius) * b);
        }
    const double id = radius / std::sqrt(static_cast<double>(D));
    for (double s : {-1.0, -0.5, 0.5, 1.0}) add((s * id) * SymMat<D>::identity());
    if constexpr (D == 3) {
      const Vec3 dirs[] = {{1, 0, 0}, {0, 1, 0}, {0, 0, 1}, normalized({1, 1, 1}), normalized({1, -2, 0.5})};
      for (const Vec3& n : dirs) {
        add(u_of_n(n));
        add(1.5 * u_of_n(n));
      }
      add(SymMat3::diagonal({1.0, -0.5, -0.5}));
      add(SymMat3::diagonal({0.75, -0.25, -0.5}));
      add(SymMat3::diagonal({-0.5, 1.0, -0.5}));
      add(SymMat3::diagonal({0.25, 0.25, -0.5}));
    }
    Rng rng(seed);
    for (int k = 0; k < random_count; ++k) add(random_sym_in_ball<D>(rng, radius));
    g.validate();
    return g;
  }
};

// ---------------------------------------------------------------------------
// Reports

struct ScanRow {
  double eps = 0.0;
  double value = 0.0;   // measured quantity at this eps
  double target = 0.0;  // its limit
  double error = 0.0;   // sup-error or |value - target|
};

struct ConvergenceCriteria {
  int max_inversions = 1;
  double inversion_tolerance = 0.05;  // an inversion may grow the error by at most this fraction
  double min_rate = 0.0;
  double final_error_bound = kInfinity;
  double error_floor = 1e-12;  // errors at or below this count as converged
};

struct ConvergenceReport {
  std::string kind;
  std::vector<ScanRow> rows;
  double rate = 0.0;  // log-log slope of error against eps over the last fit points
  int inversions = 0;
  bool monotone = false;  // within the allowed inversions
  bool passed = false;
};

inline constexpr int kRateFitPoints = 4;

/// Least-squares slope of log(error) against log(eps) over the last `points` rows
/// with error above `floor`; 0 when fewer than two such rows remain.
inline double fit_rate(const std::vector<ScanRow>& rows, int points = kRateFitPoints, double floor = 0.0) {
  const std::size_t start = rows.size() > static_cast<std::size_t>(points) ? rows.size() - points : 0;
  std::vector<double> xs, ys;
  for (std::size_t k = start; k < rows.size(); ++k)
    if (rows[k].error > floor && std::isfinite(rows[k].error)) {
      xs.push_back(std::log(rows[k].eps));
      ys.push_back(std::log(rows[k].error));
    }
  if (xs.size() < 2) return 0.0;
  const double n = static_cast<double>(xs.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t k = 0; k < xs.size(); ++k) {
    mx += xs[k];
    my += ys[k];
  }
  mx /= n;
  my /= n;
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t k = 0; k < xs.size(); ++k) {
    sxy += (xs[k] - mx) * (ys[k] - my);
    sxx += (xs[k] - mx) * (xs[k] - mx);
  }
  return sxx > 0.0 ? sxy / sxx : 0.0;
}

/// Fills rate, inversions and the verdict. Rows at the error floor are roundoff:
/// they never count as inversions and are left out of the rate fit. A scan that
/// ends on the floor has converged and skips the rate check. `require_monotone`
/// is off for scans whose finite-eps values may approach from either side.
inline void grade(ConvergenceReport& r, const ConvergenceCriteria& c, bool require_monotone = true) {
  r.rate = fit_rate(r.rows, kRateFitPoints, c.error_floor);
  r.inversions = 0;
  bool within = true;
  for (std::size_t k = 1; k < r.rows.size(); ++k) {
    const double prev = r.rows[k - 1].error, cur = r.rows[k].error;
    if (cur > prev && cur > c.error_floor) {
      ++r.inversions;
      if (cur > prev * (1.0 + c.inversion_tolerance)) within = false;
    }
  }
  r.monotone = within && r.inversions <= c.max_inversions;
  const double last = r.rows.empty() ? kInfinity : r.rows.back().error;
  const bool at_floor = last <= c.error_floor;
  r.passed = (r.monotone || !require_monotone) && (at_floor || r.rate >= c.min_rate) && last <= c.final_error_bound;
}

// ---------------------------------------------------------------------------
// Scans

/// sup over the grid of |V_eps(E) - V(E)| for each scheduled eps.
template <class Model, class Limit, int D = Model::dim>
ConvergenceReport uniform_limit_scan(const Model& model, const Limit& limit, const CompactGrid<D>& grid,
                                     const EpsSchedule& sched, const ConvergenceCriteria& criteria = {}) {
  grid.validate();
  ConvergenceReport report;
  report.kind = "uniform_limit";
  const std::size_t n = grid.points.size();
  std::vector<double> target(n);
  for (std::size_t k = 0; k < n; ++k) target[k] = limit.value(grid.points[k]);
  for (double eps : sched.values()) {
    std::vector<double> err(n), val(n);
    parallel_for(n, [&](std::size_t k) {
      val[k] = rescaled_density(model, eps, grid.points[k]);
      err[k] = std::abs(val[k] - target[k]);
    });
    ScanRow row{eps, 0.0, 0.0, -1.0};
    for (std::size_t k = 0; k < n; ++k) {
      if (!std::isfinite(val[k]))
        throw InfiniteValue("uniform_limit_scan: V_eps is +inf at eps = " + std::to_string(eps) +
                            " (grid radius too large for the schedule)");
      if (err[k] > row.error) row = {eps, val[k], target[k], err[k]};
    }
    report.rows.push_back(row);
  }
  grade(report, criteria);
  return report;
}

/// dist^2(I + eps E, U_eps) / eps^2 against dist^2(E, M). The error column is
/// relative: |value - target| / (1 + target).
template <int D>
ConvergenceReport dist_limit_scan(const SymMat<D>& e, const WellFamily<D>& family, const EpsSchedule& sched,
                                  const ConvergenceCriteria& criteria = {}, const SphereSearchOptions& search = {}) {
  ConvergenceReport report;
  report.kind = "dist_limit";
  const double target = dist2_to_family(e, family);
  for (double eps : sched.values()) {
    const EpsilonWells<D> wells{family, eps, search};
    const double d = dist_to_wells(Mat<D>::identity() + eps * e.full(), wells).distance;
    const double value = d * d / (eps * eps);
    report.rows.push_back({eps, value, target, std::abs(value - target) / (1.0 + target)});
  }
  grade(report, criteria, false);
  return report;
}

// ---------------------------------------------------------------------------
// Coercivity

struct CoercivitySampler {
  int count = 10000;  // per eps
  double near_fraction = 0.4;
  double far_fraction = 0.3;  // the rest is mid range
  double near_min = 1e-3, near_max = 1.0;
  double far_min = 5.0, far_max = 50.0;
  std::uint64_t seed = kDefaultSeed;
};

struct CoercivityRow {
  double eps = 0.0;
  double c_min = kInfinity;
  Mat3 argmin{};
  double argmin_distance = 0.0;
  int samples = 0;
  int near = 0, mid = 0, far = 0;
};

struct CoercivityReport {
  std::vector<CoercivityRow> rows;
  double c_min = kInfinity;  // over every row
  double p = 1.5;
};

namespace detail {
enum class Regime { near, mid, far };

/// One sample with det F > 0 in the requested regime.
template <class Model>
Mat3 coercivity_sample(const Model& model, double eps, Regime regime, const CoercivitySampler& s, Rng& rng) {
  for (;;) {
    Mat3 f;
    if (regime == Regime::near) {
      const EpsilonWells<3> wells = model.wells(eps);
      Mat3 member;
      if (wells.family.is_nematic()) {
        member = wells.nematic_member(random_unit_vector(rng));
      } else {
        const auto& list = wells.family.finite_wells();
        const auto pick = static_cast<std::size_t>(rng.uniform() * static_cast<double>(list.size()));
        member = wells.finite_member(list[std::min(pick, list.size() - 1)]);
      }
      const double t = s.near_min * std::pow(s.near_max / s.near_min, rng.uniform());
      f = random_rotation<3>(rng) * member + t * random_mat_direction<3>(rng);
    } else if (regime == Regime::mid) {
      f = rng.uniform(0.3, 3.0) * std::sqrt(3.0) * random_mat_direction<3>(rng);
    } else {
      const double size = s.far_min * std::pow(s.far_max / s.far_min, rng.uniform());
      if (rng.uniform() < 0.5) {
        f = size * random_mat_direction<3>(rng);
      } else {
        // Large stretches with a moderate determinant: the branch det F < M of the growth bound.
        const double a = size / std::sqrt(2.0), j = rng.uniform(0.05, 2.5);
        f = random_rotation<3>(rng) * Mat3::diagonal({a, a, j / (a * a)}) * random_rotation<3>(rng);
      }
    }
    if (det(f) > 0.0) return f;
    if (regime != Regime::near) {
      for (int j = 0; j < 3; ++j) f(0, j) = -f(0, j);
      if (det(f) > 0.0) return f;
    }
  }
}
}  // namespace detail

/// Empirical min of W_eps(F) / g_p(dist(F, U_eps)) over near-well shells,
/// mid range and far field, for each scheduled eps. Samples on the wells
/// (distance < near_min / 2) are skipped.
template <class Model>
CoercivityReport coercivity_scan(const Model& model, const CoercivitySampler& sampler, const EpsSchedule& sched) {
  static_assert(Model::dim == 3, "coercivity_scan samples 3x3 deformation gradients");
  CoercivityReport report;
  report.p = model.coercivity_exponent();
  const GpFunction g(report.p);
  const int near_count = static_cast<int>(std::lround(sampler.count * sampler.near_fraction));
  const int far_count = static_cast<int>(std::lround(sampler.count * sampler.far_fraction));
  for (std::size_t k = 0; k < sched.size(); ++k) {
    const double eps = sched[k];
    Rng rng(sampler.seed + 7919u * k);
    std::vector<Mat3> samples(static_cast<std::size_t>(sampler.count));
    std::vector<detail::Regime> regimes(samples.size());
    for (int s = 0; s < sampler.count; ++s) {
      regimes[s] = s < near_count ? detail::Regime::near
                   : s < near_count + far_count ? detail::Regime::far
                                                : detail::Regime::mid;
      samples[s] = detail::coercivity_sample(model, eps, regimes[s], sampler, rng);
    }
    std::vector<double> ratio(samples.size(), kInfinity), dist(samples.size(), 0.0);
    const EpsilonWells<3> wells = model.wells(eps);
    parallel_for(samples.size(), [&](std::size_t s) {
      dist[s] = dist_to_wells(samples[s], wells).distance;
      if (dist[s] < 0.5 * sampler.near_min) return;
      ratio[s] = energy(model, eps, samples[s]) / g(dist[s]);
    });
    CoercivityRow row;
    row.eps = eps;
    for (std::size_t s = 0; s < samples.size(); ++s) {
      if (!std::isfinite(ratio[s])) continue;
      ++row.samples;
      if (regimes[s] == detail::Regime::near) ++row.near;
      else if (regimes[s] == detail::Regime::far) ++row.far;
      else ++row.mid;
      if (ratio[s] < row.c_min) {
        row.c_min = ratio[s];
        row.argmin = samples[s];
        row.argmin_distance = dist[s];
      }
    }
    report.c_min = std::min(report.c_min, row.c_min);
    report.rows.push_back(row);
  }
  return report;
}

// ---------------------------------------------------------------------------
// Quadratic lower bound V(E) >= C1 |E|^2 - C2

struct QuadraticBound {
  double c1 = 0.0;
  double c2 = 0.0;
  bool verified = false;
  double worst_margin = kInfinity;  // min over the verification set of V - (C1 |E|^2 - C2)
  int verification_points = 0;
};

inline constexpr double kQuadraticBoundSlack = 0.1;

/// Fit on `grid`: C1 is half the smallest V/|E|^2 over the outer half of the
/// grid, C2 the largest C1 |E|^2 - V over the grid plus a relative slack.
/// Then asserts the bound on the grid rescaled to twice the radius and on a
/// far shell at ten times the radius.
template <class Limit, int D = Limit::dim>
QuadraticBound quadratic_lower_bound_fit(const Limit& limit, const CompactGrid<D>& grid,
                                         std::uint64_t seed = kDefaultSeed) {
  grid.validate();
  QuadraticBound b;
  double ratio = kInfinity;
  for (const auto& e : grid.points) {
    const double n2 = norm2(e);
    if (n2 >= 0.25 * grid.radius * grid.radius) ratio = std::min(ratio, limit.value(e) / n2);
  }
  if (!std::isfinite(ratio)) throw ConfigError("quadratic_lower_bound_fit: grid has no outer points");
  b.c1 = 0.5 * ratio;
  double excess = 0.0;
  for (const auto& e : grid.points) excess = std::max(excess, b.c1 * norm2(e) - limit.value(e));
  b.c2 = excess * (1.0 + kQuadraticBoundSlack) + kQuadraticBoundSlack;

  std::vector<SymMat<D>> check;
  for (const auto& e : grid.points) check.push_back(2.0 * e);
  Rng rng(seed ^ 0xB0B0u);
  for (int k = 0; k < 500; ++k) check.push_back((10.0 * grid.radius) * random_sym_direction<D>(rng));
  b.verification_points = static_cast<int>(check.size());
  for (const auto& e : check) b.worst_margin = std::min(b.worst_margin, limit.value(e) - (b.c1 * norm2(e) - b.c2));
  b.verified = b.worst_margin >= 0.0;
  return b;
}

// ---------------------------------------------------------------------------
// Zero-set membership

struct HullMembership {
  bool member_of_vqce_zero = false;
  bool implies_qe2_member = false;  // inclusion of the zero set into the quasiconvex hull
  double vqce = 0.0;
  double projection_distance = 0.0;
};

inline HullMembership hull_membership(const LimitParams& params, const SymMat3& e, double tol = 1e-8) {
  if (!params.lambda_nonnegative()) throw ConfigError("hull_membership: requires lambda >= 0");
  HullMembership h;
  h.vqce = vqce(params, e);
  h.projection_distance = project_Q(e).distance;
  h.member_of_vqce_zero = h.vqce <= tol;
  h.implies_qe2_member = h.member_of_vqce_zero;
  return h;
}

}  // namespace gamma_elastica
