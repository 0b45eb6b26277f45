#pragma once

// Minimization of smooth functions of a unit director n in S^2.

#include <algorithm>
#include <cmath>
#include <numbers>
#include <utility>
#include <vector>

#include "gamma_elastica/matrix.hpp"

namespace gamma_elastica {

inline constexpr int kDefaultLatticePoints = 2562;

struct SphereSearchOptions {
  int lattice_points = kDefaultLatticePoints;
  int golden_steps = 20;  // per one-dimensional line search
  int rounds = 4;         // alternating tangent-coordinate passes
  int candidates = 3;     // lattice minima refined independently
  int polish_rounds = 2;  // extra passes on an accurate objective, when the caller has one
};

inline double lattice_spacing(const SphereSearchOptions& opts) {
  return std::sqrt(4.0 * std::numbers::pi / opts.lattice_points);
}

/// Half width of the bracket left after the refinement rounds.
inline double refined_half_width(const SphereSearchOptions& opts) {
  return 1.5 * lattice_spacing(opts) * std::pow(0.25, opts.rounds);
}

/// Quasi-uniform Fibonacci lattice of n points on S^2.
inline std::vector<Vec3> fibonacci_lattice(int n) {
  std::vector<Vec3> pts;
  pts.reserve(static_cast<std::size_t>(n));
  const double golden_angle = std::numbers::pi * (3.0 - std::sqrt(5.0));
  for (int i = 0; i < n; ++i) {
    const double z = 1.0 - (2.0 * i + 1.0) / n;
    const double r = std::sqrt(std::max(0.0, 1.0 - z * z));
    const double phi = golden_angle * i;
    pts.push_back({r * std::cos(phi), r * std::sin(phi), z});
  }
  return pts;
}

inline Vec3 normalized(Vec3 v) {
  const double n = norm(v);
  for (auto& x : v) x /= n;
  return v;
}

/// Orthonormal pair spanning the tangent plane at n.
inline std::pair<Vec3, Vec3> tangent_basis(const Vec3& n) {
  const Vec3 helper = std::abs(n[0]) < 0.6 ? Vec3{1, 0, 0} : Vec3{0, 1, 0};
  const Vec3 t1 = normalized(cross(n, helper));
  return {t1, cross(n, t1)};
}

struct SphereMinimum {
  Vec3 director{0, 0, 1};
  double value = 0.0;
};

namespace detail {

template <class Fn>
double golden_section(Fn&& fn, double lo, double hi, int steps, double& arg) {
  const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double x1 = hi - inv_phi * (hi - lo), x2 = lo + inv_phi * (hi - lo);
  double f1 = fn(x1), f2 = fn(x2);
  for (int k = 0; k < steps; ++k) {
    if (f1 <= f2) {
      hi = x2;
      x2 = x1;
      f2 = f1;
      x1 = hi - inv_phi * (hi - lo);
      f1 = fn(x1);
    } else {
      lo = x1;
      x1 = x2;
      f1 = f2;
      x2 = lo + inv_phi * (hi - lo);
      f2 = fn(x2);
    }
  }
  if (f1 <= f2) {
    arg = x1;
    return f1;
  }
  arg = x2;
  return f2;
}

}  // namespace detail

/// Alternating golden-section passes along the two tangent directions at n,
/// shrinking the bracket fourfold after each round.
template <class Fn>
SphereMinimum refine_on_sphere(Fn&& fn, SphereMinimum start, double half_width, int rounds, int steps) {
  for (int round = 0; round < rounds; ++round) {
    for (int axis = 0; axis < 2; ++axis) {
      const Vec3 n = start.director;
      const auto [t1, t2] = tangent_basis(n);
      const Vec3& t = axis == 0 ? t1 : t2;
      auto along = [&](double s) { return normalized({n[0] + s * t[0], n[1] + s * t[1], n[2] + s * t[2]}); };
      double s = 0.0;
      const double v =
          detail::golden_section([&](double x) { return fn(along(x)); }, -half_width, half_width, steps, s);
      if (v < start.value) start = {along(s), v};
    }
    half_width *= 0.25;
  }
  return start;
}

/// Lattice scan followed by golden-section refinement of the best few lattice
/// points in local tangent coordinates. Antipodal points are not identified;
/// objectives that are even in n simply see two equivalent minima.
template <class Fn>
SphereMinimum minimize_on_sphere(Fn&& fn, const SphereSearchOptions& opts = {}) {
  const std::vector<Vec3> lattice = fibonacci_lattice(opts.lattice_points);
  std::vector<std::pair<double, int>> scored;
  scored.reserve(lattice.size());
  for (int i = 0; i < static_cast<int>(lattice.size()); ++i) scored.emplace_back(fn(lattice[i]), i);

  const int keep = std::min<int>(opts.candidates, static_cast<int>(scored.size()));
  std::partial_sort(scored.begin(), scored.begin() + keep, scored.end());

  SphereMinimum best{lattice[scored[0].second], scored[0].first};
  for (int c = 0; c < keep; ++c) {
    const SphereMinimum start{lattice[scored[c].second], scored[c].first};
    const SphereMinimum m = refine_on_sphere(fn, start, 1.5 * lattice_spacing(opts), opts.rounds, opts.golden_steps);
    if (m.value < best.value) best = m;
  }
  return best;
}

}  // namespace gamma_elastica
