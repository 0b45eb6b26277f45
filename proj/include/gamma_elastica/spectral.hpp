#pragma once

// Jacobi eigen/singular-value kernels for 2x2 and 3x3 matrices and the
// distance to SO(d) they induce.

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numeric>
#include <type_traits>

#include "gamma_elastica/errors.hpp"
#include "gamma_elastica/matrix.hpp"

namespace gamma_elastica {

inline constexpr int kMaxJacobiSweeps = 50;
// Column pairs closer to orthogonal than this (relative) are left alone.
inline constexpr double kRoundoff = 2.0 * std::numeric_limits<double>::epsilon();

/// Eigenvalues in ascending order, eigenvectors as the matching columns.
template <int D>
struct SpectralDecomp {
  Vec<D> eigenvalues{};
  Mat<D> eigenvectors = Mat<D>::identity();

  SymMat<D> reconstruct() const {
    SymMat<D> s;
    for (int i = 0; i < D; ++i)
      for (int j = i; j < D; ++j) {
        double v = 0.0;
        for (int k = 0; k < D; ++k) v += eigenvectors(i, k) * eigenvalues[k] * eigenvectors(j, k);
        s(i, j) = v;
      }
    return s;
  }

  Vec<D> eigenvector(int k) const { return eigenvectors.column(k); }
};

/// F = U diag(sigma) V^T with sigma ascending and U, V orthogonal.
template <int D>
struct Svd {
  Mat<D> u = Mat<D>::identity();
  Vec<D> sigma{};
  Mat<D> v = Mat<D>::identity();
};

namespace detail {

template <int D>
void sort_columns_ascending(std::type_identity_t<Vec<D>>& values, Mat<D>& cols) {
  std::array<int, D> order;
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int l, int r) { return values[l] < values[r]; });
  Vec<D> sorted_values;
  Mat<D> sorted_cols;
  for (int k = 0; k < D; ++k) {
    sorted_values[k] = values[order[k]];
    sorted_cols.set_column(k, cols.column(order[k]));
  }
  values = sorted_values;
  cols = sorted_cols;
}

/// Makes the largest-magnitude entry of each column positive (first on ties).
template <int D>
void canonicalize_signs(Mat<D>& cols) {
  for (int k = 0; k < D; ++k) {
    int arg = 0;
    for (int i = 1; i < D; ++i)
      if (std::abs(cols(i, k)) > std::abs(cols(arg, k)) + 1e-14) arg = i;
    if (cols(arg, k) < 0.0)
      for (int i = 0; i < D; ++i) cols(i, k) = -cols(i, k);
  }
}

/// Replaces column k by a unit vector orthogonal to the columns in `done`.
template <int D>
void complete_column(Mat<D>& q, int k, const std::type_identity_t<std::array<bool, D>>& done) {
  Vec<D> best{};
  double best_norm = -1.0;
  for (int axis = 0; axis < D; ++axis) {
    Vec<D> c{};
    c[axis] = 1.0;
    for (int j = 0; j < D; ++j) {
      if (!done[j]) continue;
      const Vec<D> qj = q.column(j);
      const double p = dot(c, qj);
      for (int i = 0; i < D; ++i) c[i] -= p * qj[i];
    }
    const double n = norm(c);
    if (n > best_norm + 1e-12) {
      best_norm = n;
      best = c;
    }
  }
  for (auto& x : best) x /= best_norm;
  q.set_column(k, best);
}

}  // namespace detail

/// Cyclic Jacobi eigensolver. Throws IterationLimit past kMaxJacobiSweeps.
template <int D>
SpectralDecomp<D> eig_sym(const SymMat<D>& e) {
  Mat<D> a = e.full();
  Mat<D> q = Mat<D>::identity();
  const double scale = norm(e);
  const double skip = std::max(1e-300, 1e-20 * scale);

  bool converged = false;
  for (int sweep = 0; sweep < kMaxJacobiSweeps && !converged; ++sweep) {
    converged = true;
    for (int p = 0; p < D - 1; ++p) {
      for (int r = p + 1; r < D; ++r) {
        const double apq = a(p, r);
        // Negligible against both diagonal entries, or against the matrix scale.
        const double small = 100.0 * std::abs(apq);
        if (std::abs(apq) <= skip ||
            (std::abs(a(p, p)) + small == std::abs(a(p, p)) && std::abs(a(r, r)) + small == std::abs(a(r, r)))) {
          a(p, r) = a(r, p) = 0.0;
          continue;
        }
        converged = false;
        const double theta = (a(r, r) - a(p, p)) / (2.0 * apq);
        double t;
        if (std::abs(theta) > 1e150) {
          t = 0.5 / theta;
        } else {
          t = (theta >= 0.0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        }
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        const double tau = s / (1.0 + c);
        a(p, p) -= t * apq;
        a(r, r) += t * apq;
        a(p, r) = a(r, p) = 0.0;
        for (int k = 0; k < D; ++k) {
          if (k == p || k == r) continue;
          const double g = a(k, p), h = a(k, r);
          a(k, p) = a(p, k) = g - s * (h + g * tau);
          a(k, r) = a(r, k) = h + s * (g - h * tau);
        }
        for (int k = 0; k < D; ++k) {
          const double g = q(k, p), h = q(k, r);
          q(k, p) = g - s * (h + g * tau);
          q(k, r) = h + s * (g - h * tau);
        }
      }
    }
  }
  if (!converged) throw IterationLimit("eig_sym: Jacobi sweep cap exceeded");

  SpectralDecomp<D> out;
  for (int k = 0; k < D; ++k) out.eigenvalues[k] = a(k, k);
  out.eigenvectors = q;
  detail::sort_columns_ascending(out.eigenvalues, out.eigenvectors);
  detail::canonicalize_signs(out.eigenvectors);
  return out;
}

/// One-sided (Hestenes) Jacobi SVD.
template <int D>
Svd<D> svd(const Mat<D>& f) {
  Mat<D> a = f;
  Mat<D> v = Mat<D>::identity();

  bool converged = false;
  for (int sweep = 0; sweep < kMaxJacobiSweeps && !converged; ++sweep) {
    converged = true;
    for (int p = 0; p < D - 1; ++p) {
      for (int r = p + 1; r < D; ++r) {
        double alpha = 0.0, beta = 0.0, gamma = 0.0;
        for (int i = 0; i < D; ++i) {
          alpha += a(i, p) * a(i, p);
          beta += a(i, r) * a(i, r);
          gamma += a(i, p) * a(i, r);
        }
        if (std::abs(gamma) <= 1e-300 || std::abs(gamma) <= kRoundoff * std::sqrt(alpha * beta)) continue;
        converged = false;
        const double zeta = (beta - alpha) / (2.0 * gamma);
        double t;
        if (std::abs(zeta) > 1e150) {
          t = 0.5 / zeta;
        } else {
          t = (zeta >= 0.0 ? 1.0 : -1.0) / (std::abs(zeta) + std::sqrt(1.0 + zeta * zeta));
        }
        const double c = 1.0 / std::sqrt(1.0 + t * t);
        const double s = c * t;
        for (int i = 0; i < D; ++i) {
          const double x = a(i, p), y = a(i, r);
          a(i, p) = c * x - s * y;
          a(i, r) = s * x + c * y;
          const double vx = v(i, p), vy = v(i, r);
          v(i, p) = c * vx - s * vy;
          v(i, r) = s * vx + c * vy;
        }
      }
    }
  }
  if (!converged) throw IterationLimit("svd: Jacobi sweep cap exceeded");

  Svd<D> out;
  for (int k = 0; k < D; ++k) out.sigma[k] = norm(a.column(k));
  // Sort the singular triplets ascending by sigma.
  std::array<int, D> order;
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int l, int r) { return out.sigma[l] < out.sigma[r]; });
  Vec<D> sigma;
  Mat<D> u, vs;
  for (int k = 0; k < D; ++k) {
    sigma[k] = out.sigma[order[k]];
    u.set_column(k, a.column(order[k]));
    vs.set_column(k, v.column(order[k]));
  }
  const double smax = sigma[D - 1];
  std::array<bool, D> done{};
  for (int k = D - 1; k >= 0; --k) {
    if (sigma[k] > 1e-13 * smax && sigma[k] > 1e-300) {
      Vec<D> c = u.column(k);
      for (auto& x : c) x /= sigma[k];
      u.set_column(k, c);
      done[k] = true;
    }
  }
  for (int k = D - 1; k >= 0; --k) {
    if (!done[k]) {
      detail::complete_column(u, k, done);
      done[k] = true;
    }
  }
  out.sigma = sigma;
  out.u = u;
  out.v = vs;
  return out;
}

/// Ordered singular values 0 <= s_1 <= ... <= s_d.
template <int D>
Vec<D> singular_values(const Mat<D>& f) {
  return svd(f).sigma;
}

/// Rotation maximizing tr(R^T M) over SO(d) (constrained Procrustes).
template <int D>
Mat<D> nearest_rotation(const Mat<D>& m) {
  const Svd<D> s = svd(m);
  Mat<D> ud = s.u;
  if (det(s.u) * det(s.v) < 0.0) {
    for (int i = 0; i < D; ++i) ud(i, 0) = -ud(i, 0);  // flip the smallest singular direction
  }
  return ud * transpose(s.v);
}

/// max over R in SO(d) of tr(R^T M): the nuclear norm of M, with the smallest
/// singular value counted negatively when det M < 0.
template <int D>
double signed_nuclear_norm(const Mat<D>& m) {
  const Svd<D> s = svd(m);
  double total = 0.0;
  for (int k = 0; k < D; ++k) total += s.sigma[k];
  if (det(s.u) * det(s.v) < 0.0) total -= 2.0 * s.sigma[0];
  return total;
}

/// min over R in SO(d) of |F - R|.
template <int D>
double dist_to_SO(const Mat<D>& f) {
  const Svd<D> s = svd(f);
  const double flip = det(s.u) * det(s.v) < 0.0 ? -1.0 : 1.0;
  double d2 = (s.sigma[0] - flip) * (s.sigma[0] - flip);
  for (int k = 1; k < D; ++k) d2 += (s.sigma[k] - 1.0) * (s.sigma[k] - 1.0);
  return std::sqrt(d2);
}

template <int D>
struct RotationFit {
  Mat<D> rotation = Mat<D>::identity();
  double distance = 0.0;
};

/// min over R in SO(d) of |F - R A|, with the attaining rotation.
template <int D>
RotationFit<D> fit_rotation(const Mat<D>& f, const Mat<D>& a) {
  RotationFit<D> fit;
  fit.rotation = nearest_rotation(f * transpose(a));
  fit.distance = norm(f - fit.rotation * a);
  return fit;
}

}  // namespace gamma_elastica
