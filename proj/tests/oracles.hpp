#pragma once

// Brute-force reference computations used by the tests. They share no search
// code with the library: sphere minima come from a latitude-longitude grid
// with compass refinement, rotation distances from sampled rotations, the
// spectral-set projection from an eigenvalue grid, and the quadratic finite
// element problem from a dense linear solve.

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <utility>
#include <vector>

#include "gamma_elastica/matrix.hpp"
#include "gamma_elastica/mesh.hpp"
#include "gamma_elastica/random.hpp"

namespace oracle {

using gamma_elastica::Mat;
using gamma_elastica::Mat3;
using gamma_elastica::SymMat;
using gamma_elastica::SymMat3;
using gamma_elastica::Vec3;

inline Vec3 polar(double theta, double phi) {
  return {std::sin(theta) * std::cos(phi), std::sin(theta) * std::sin(phi), std::cos(theta)};
}

struct SphereResult {
  double value = std::numeric_limits<double>::infinity();
  Vec3 argmin{0, 0, 1};
};

/// min over the unit sphere of fn: nt x np latitude-longitude grid (10^4 nodes
/// by default), then compass search in (theta, phi) from the best 8 nodes.
template <class Fn>
SphereResult sphere_min(Fn&& fn, int nt = 100, int np = 100) {
  std::vector<std::pair<double, std::pair<double, double>>> nodes;
  nodes.reserve(static_cast<std::size_t>(nt * np));
  for (int i = 0; i < nt; ++i) {
    const double theta = std::numbers::pi * (i + 0.5) / nt;
    for (int j = 0; j < np; ++j) {
      const double phi = 2.0 * std::numbers::pi * j / np;
      nodes.push_back({fn(polar(theta, phi)), {theta, phi}});
    }
  }
  const std::size_t keep = std::min<std::size_t>(8, nodes.size());
  std::partial_sort(nodes.begin(), nodes.begin() + keep, nodes.end(),
                    [](const auto& a, const auto& b) { return a.first < b.first; });
  SphereResult best;
  for (std::size_t k = 0; k < keep; ++k) {
    double th = nodes[k].second.first, ph = nodes[k].second.second, f = nodes[k].first;
    double step = std::numbers::pi / nt;
    while (step > 1e-11) {
      bool moved = false;
      const double cand[4][2] = {{th + step, ph}, {th - step, ph}, {th, ph + step}, {th, ph - step}};
      for (const auto& c : cand) {
        const double v = fn(polar(c[0], c[1]));
        if (v < f) {
          f = v;
          th = c[0];
          ph = c[1];
          moved = true;
        }
      }
      if (!moved) step *= 0.5;
    }
    if (f < best.value) best = {f, polar(th, ph)};
  }
  return best;
}

/// Rodrigues rotation, written out independently of the library kernel.
inline Mat3 rotation_from_vector(const Vec3& w) {
  const double t = std::sqrt(w[0] * w[0] + w[1] * w[1] + w[2] * w[2]);
  Mat3 k;
  k(0, 1) = -w[2];
  k(0, 2) = w[1];
  k(1, 0) = w[2];
  k(1, 2) = -w[0];
  k(2, 0) = -w[1];
  k(2, 1) = w[0];
  Mat3 r = Mat3::identity();
  if (t < 1e-300) return r;
  const double a = std::sin(t) / t, b = (1.0 - std::cos(t)) / (t * t);
  return r + a * k + b * (k * k);
}

inline double frob(const Mat3& a) {
  double s = 0.0;
  for (double x : a.a) s += x * x;
  return std::sqrt(s);
}

/// min over SO(3) of |F - R|: best of `samples` random rotations, then
/// compass refinement R <- R exp(step * e_k) over the six axis directions.
inline double dist_to_SO_sampled(const Mat3& f, int samples, std::uint64_t seed) {
  gamma_elastica::Rng rng(seed);
  Mat3 best;
  double bv = std::numeric_limits<double>::infinity();
  for (int s = 0; s < samples; ++s) {
    double q[4], n = 0.0;
    for (double& x : q) {
      x = rng.normal();
      n += x * x;
    }
    n = std::sqrt(n);
    const Vec3 axis{q[1] / n, q[2] / n, q[3] / n};
    const double angle = 2.0 * std::acos(std::clamp(q[0] / n, -1.0, 1.0));
    const double an = std::sqrt(axis[0] * axis[0] + axis[1] * axis[1] + axis[2] * axis[2]);
    Vec3 w{0, 0, 0};
    if (an > 0)
      for (int i = 0; i < 3; ++i) w[i] = axis[i] / an * angle;
    const Mat3 r = rotation_from_vector(w);
    const double v = frob(f - r);
    if (v < bv) {
      bv = v;
      best = r;
    }
  }
  double step = 0.1;
  while (step > 1e-10) {
    bool moved = false;
    for (int k = 0; k < 3; ++k)
      for (double sgn : {1.0, -1.0}) {
        Vec3 w{0, 0, 0};
        w[k] = sgn * step;
        const Mat3 r = best * rotation_from_vector(w);
        const double v = frob(f - r);
        if (v < bv) {
          bv = v;
          best = r;
          moved = true;
        }
      }
    if (!moved) step *= 0.5;
  }
  return bv;
}

/// Pure product-grid QP: min |e - x| over x on the step grid of
/// [-1/2, 1]^3 with x0 + x1 + x2 = 0 (x2 determined by the other two).
inline double q_grid_distance(const Vec3& e, double step, Vec3* arg = nullptr) {
  double best = std::numeric_limits<double>::infinity();
  const int n = static_cast<int>(std::lround(1.5 / step));
  for (int i = 0; i <= n; ++i)
    for (int j = 0; j <= n; ++j) {
      const double x0 = -0.5 + i * step, x1 = -0.5 + j * step, x2 = -x0 - x1;
      if (x2 < -0.5 - 1e-12 || x2 > 1.0 + 1e-12) continue;
      const double d = std::sqrt((e[0] - x0) * (e[0] - x0) + (e[1] - x1) * (e[1] - x1) + (e[2] - x2) * (e[2] - x2));
      if (d < best) {
        best = d;
        if (arg) *arg = {x0, x1, x2};
      }
    }
  return best;
}

/// Grid QP at `step`, then repeated local grids around the incumbent with the
/// step divided by 10 each pass, down to `final_step`.
inline double q_grid_distance_refined(const Vec3& e, double step = 2e-2, double final_step = 2e-6) {
  Vec3 x{};
  double best = q_grid_distance(e, step, &x);
  for (double h = step / 10.0; h >= final_step * 0.999; h /= 10.0) {
    const Vec3 centre = x;
    for (int i = -15; i <= 15; ++i)
      for (int j = -15; j <= 15; ++j) {
        const double x0 = std::clamp(centre[0] + i * h, -0.5, 1.0);
        const double x1 = std::clamp(centre[1] + j * h, -0.5, 1.0);
        const double x2 = -x0 - x1;
        if (x2 < -0.5 || x2 > 1.0) continue;
        const double d = std::sqrt((e[0] - x0) * (e[0] - x0) + (e[1] - x1) * (e[1] - x1) + (e[2] - x2) * (e[2] - x2));
        if (d < best) {
          best = d;
          x = {x0, x1, x2};
        }
      }
  }
  return best;
}

/// Eigenvalues (ascending) of a symmetric 3x3 matrix by the trigonometric
/// closed form of the cubic.
inline Vec3 sym_eigenvalues_closed(const SymMat3& s) {
  const double q = (s(0, 0) + s(1, 1) + s(2, 2)) / 3.0;
  const double p1 = s(0, 1) * s(0, 1) + s(0, 2) * s(0, 2) + s(1, 2) * s(1, 2);
  const double d0 = s(0, 0) - q, d1 = s(1, 1) - q, d2 = s(2, 2) - q;
  const double p2 = d0 * d0 + d1 * d1 + d2 * d2 + 2.0 * p1;
  if (p2 <= 1e-300) return {q, q, q};
  const double p = std::sqrt(p2 / 6.0);
  const double b00 = d0 / p, b11 = d1 / p, b22 = d2 / p, b01 = s(0, 1) / p, b02 = s(0, 2) / p, b12 = s(1, 2) / p;
  const double r = 0.5 * (b00 * (b11 * b22 - b12 * b12) - b01 * (b01 * b22 - b12 * b02) + b02 * (b01 * b12 - b11 * b02));
  const double phi = std::acos(std::clamp(r, -1.0, 1.0)) / 3.0;
  const double hi = q + 2.0 * p * std::cos(phi);
  const double lo = q + 2.0 * p * std::cos(phi + 2.0 * std::numbers::pi / 3.0);
  return {lo, 3.0 * q - hi - lo, hi};
}

/// min over R in SO(3) of |F - R A|, from the singular values of F A^T.
inline double procrustes_distance(const Mat3& f, const Mat3& a) {
  Mat3 m;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j)
      for (int k = 0; k < 3; ++k) m(i, j) += f(i, k) * a(j, k);
  SymMat3 mtm;
  for (int i = 0; i < 3; ++i)
    for (int j = i; j < 3; ++j)
      for (int k = 0; k < 3; ++k) mtm(i, j) += m(k, i) * m(k, j);
  const Vec3 ev = sym_eigenvalues_closed(mtm);
  const double dm = m(0, 0) * (m(1, 1) * m(2, 2) - m(1, 2) * m(2, 1)) - m(0, 1) * (m(1, 0) * m(2, 2) - m(1, 2) * m(2, 0)) +
                    m(0, 2) * (m(1, 0) * m(2, 1) - m(1, 1) * m(2, 0));
  const double s0 = std::sqrt(std::max(ev[0], 0.0)), s1 = std::sqrt(std::max(ev[1], 0.0)),
               s2 = std::sqrt(std::max(ev[2], 0.0));
  const double nuclear = s2 + s1 + (dm < 0.0 ? -s0 : s0);
  const double d2 = frob(f) * frob(f) + frob(a) * frob(a) - 2.0 * nuclear;
  return std::sqrt(std::max(d2, 0.0));
}

/// det(E - t I) by cofactor expansion.
inline double char_poly(const SymMat3& e, double t) {
  const double a = e(0, 0) - t, b = e(1, 1) - t, c = e(2, 2) - t;
  const double d = e(0, 1), f = e(0, 2), g = e(1, 2);
  return a * (b * c - g * g) - d * (d * c - g * f) + f * (d * g - b * f);
}

/// Dense Gaussian elimination with partial pivoting.
inline std::vector<double> solve_dense(std::vector<std::vector<double>> a, std::vector<double> b) {
  const std::size_t n = b.size();
  for (std::size_t c = 0; c < n; ++c) {
    std::size_t p = c;
    for (std::size_t r = c + 1; r < n; ++r)
      if (std::abs(a[r][c]) > std::abs(a[p][c])) p = r;
    std::swap(a[c], a[p]);
    std::swap(b[c], b[p]);
    for (std::size_t r = c + 1; r < n; ++r) {
      const double m = a[r][c] / a[c][c];
      for (std::size_t k = c; k < n; ++k) a[r][k] -= m * a[c][k];
      b[r] -= m * b[c];
    }
  }
  std::vector<double> x(n);
  for (std::size_t r = n; r-- > 0;) {
    double s = b[r];
    for (std::size_t k = r + 1; k < n; ++k) s -= a[r][k] * x[k];
    x[r] = s / a[r][r];
  }
  return x;
}

/// Minimum of sum_T |T| c/2 |sym grad u|^2 - sum_v m_v l . u_v over 2-d P1
/// fields with u = F x on the whole boundary, by assembling the stiffness
/// matrix from vertex coordinates and solving the normal equations densely.
inline double quadratic_minimum_2d(const gamma_elastica::BoxMesh<2>& mesh, double c, const Mat<2>& f,
                                   const std::array<double, 2>& load) {
  const std::size_t nv = mesh.vertex_count();
  const int n = mesh.divisions();
  std::vector<int> free_index(nv, -1);
  int nf = 0;
  std::vector<std::array<double, 2>> u(nv);
  for (std::size_t v = 0; v < nv; ++v) {
    const auto& x = mesh.points()[v];
    const auto idx = mesh.lattice_index(static_cast<int>(v));
    const bool boundary = idx[0] == 0 || idx[0] == n || idx[1] == 0 || idx[1] == n;
    u[v] = {f(0, 0) * x[0] + f(0, 1) * x[1], f(1, 0) * x[0] + f(1, 1) * x[1]};
    if (!boundary) {
      free_index[v] = nf;
      nf += 2;
    }
  }
  // The energy is quadratic: E(x) = 1/2 x^T K x - r^T x + const in the free DOFs.
  // K and r follow from evaluating the energy's exact quadratic form per element.
  std::vector<std::vector<double>> k(nf, std::vector<double>(nf, 0.0));
  std::vector<double> rhs(nf, 0.0);
  for (const auto& el : mesh.elements()) {
    const auto& p0 = mesh.points()[el.vertices[0]];
    const auto& p1 = mesh.points()[el.vertices[1]];
    const auto& p2 = mesh.points()[el.vertices[2]];
    const double j = (p1[0] - p0[0]) * (p2[1] - p0[1]) - (p2[0] - p0[0]) * (p1[1] - p0[1]);
    const double area = std::abs(j) / 2.0;
    // Barycentric gradients.
    std::array<std::array<double, 2>, 3> g;
    g[0] = {(p1[1] - p2[1]) / j, (p2[0] - p1[0]) / j};
    g[1] = {(p2[1] - p0[1]) / j, (p0[0] - p2[0]) / j};
    g[2] = {(p0[1] - p1[1]) / j, (p1[0] - p0[0]) / j};
    // Strain of the unit displacement (vertex a, component i).
    auto strain = [&](int a, int i) {
      std::array<double, 3> e{};  // e00, e11, e01
      if (i == 0) {
        e[0] = g[a][0];
        e[2] = 0.5 * g[a][1];
      } else {
        e[1] = g[a][1];
        e[2] = 0.5 * g[a][0];
      }
      return e;
    };
    auto inner = [](const std::array<double, 3>& x, const std::array<double, 3>& y) {
      return x[0] * y[0] + x[1] * y[1] + 2.0 * x[2] * y[2];
    };
    for (int a = 0; a < 3; ++a)
      for (int i = 0; i < 2; ++i) {
        const int va = el.vertices[a];
        const auto ea = strain(a, i);
        for (int b = 0; b < 3; ++b)
          for (int jj = 0; jj < 2; ++jj) {
            const int vb = el.vertices[b];
            const double kab = c * area * inner(ea, strain(b, jj));
            if (free_index[va] >= 0 && free_index[vb] >= 0) {
              k[free_index[va] + i][free_index[vb] + jj] += kab;
            } else if (free_index[va] >= 0) {
              rhs[free_index[va] + i] -= kab * u[vb][jj];
            }
          }
      }
  }
  const auto& mass = mesh.lumped_mass();
  for (std::size_t v = 0; v < nv; ++v)
    if (free_index[v] >= 0)
      for (int i = 0; i < 2; ++i) rhs[free_index[v] + i] += mass[v] * load[i];
  const std::vector<double> x = solve_dense(k, rhs);
  for (std::size_t v = 0; v < nv; ++v)
    if (free_index[v] >= 0)
      for (int i = 0; i < 2; ++i) u[v][i] = x[free_index[v] + i];
  // Energy at the solution.
  double energy = 0.0;
  for (const auto& el : mesh.elements()) {
    const auto& p0 = mesh.points()[el.vertices[0]];
    const auto& p1 = mesh.points()[el.vertices[1]];
    const auto& p2 = mesh.points()[el.vertices[2]];
    const double j = (p1[0] - p0[0]) * (p2[1] - p0[1]) - (p2[0] - p0[0]) * (p1[1] - p0[1]);
    std::array<std::array<double, 2>, 3> g;
    g[0] = {(p1[1] - p2[1]) / j, (p2[0] - p1[0]) / j};
    g[1] = {(p2[1] - p0[1]) / j, (p0[0] - p2[0]) / j};
    g[2] = {(p0[1] - p1[1]) / j, (p1[0] - p0[0]) / j};
    double grad[2][2] = {{0, 0}, {0, 0}};
    for (int a = 0; a < 3; ++a)
      for (int i = 0; i < 2; ++i)
        for (int d = 0; d < 2; ++d) grad[i][d] += u[el.vertices[a]][i] * g[a][d];
    const double e01 = 0.5 * (grad[0][1] + grad[1][0]);
    energy += std::abs(j) / 2.0 * 0.5 * c * (grad[0][0] * grad[0][0] + grad[1][1] * grad[1][1] + 2.0 * e01 * e01);
  }
  for (std::size_t v = 0; v < nv; ++v) energy -= mass[v] * (load[0] * u[v][0] + load[1] * u[v][1]);
  return energy;
}

}  // namespace oracle
