#pragma once

// Dense d x d matrices (d in {2,3}) with a packed symmetric counterpart.

#include <array>
#include <cmath>
#include <cstddef>
#include <initializer_list>
#include <limits>
#include <span>
#include <string>

#include "gamma_elastica/errors.hpp"

namespace gamma_elastica {

template <int D>
concept SupportedDim = (D == 2 || D == 3);

template <int D>
using Vec = std::array<double, D>;

template <int D>
  requires SupportedDim<D>
struct Mat {
  static constexpr int dim = D;
  static constexpr std::size_t size = D * D;

  std::array<double, size> a{};  // row-major

  constexpr double& operator()(int i, int j) { return a[i * D + j]; }
  constexpr double operator()(int i, int j) const { return a[i * D + j]; }

  static constexpr Mat zero() { return Mat{}; }

  static constexpr Mat identity() {
    Mat m;
    for (int i = 0; i < D; ++i) m(i, i) = 1.0;
    return m;
  }

  static constexpr Mat diagonal(const Vec<D>& d) {
    Mat m;
    for (int i = 0; i < D; ++i) m(i, i) = d[i];
    return m;
  }

  /// Row-major construction; throws DomainError on a size mismatch.
  static Mat from_row_major(std::span<const double> values) {
    if (values.size() != size) throw DomainError("Mat: expected " + std::to_string(size) + " entries");
    Mat m;
    for (std::size_t k = 0; k < size; ++k) m.a[k] = values[k];
    return m;
  }

  static Mat outer(const Vec<D>& u, const Vec<D>& v) {
    Mat m;
    for (int i = 0; i < D; ++i)
      for (int j = 0; j < D; ++j) m(i, j) = u[i] * v[j];
    return m;
  }

  Vec<D> column(int j) const {
    Vec<D> c;
    for (int i = 0; i < D; ++i) c[i] = (*this)(i, j);
    return c;
  }

  void set_column(int j, const Vec<D>& c) {
    for (int i = 0; i < D; ++i) (*this)(i, j) = c[i];
  }

  Mat& operator+=(const Mat& o) {
    for (std::size_t k = 0; k < size; ++k) a[k] += o.a[k];
    return *this;
  }
  Mat& operator-=(const Mat& o) {
    for (std::size_t k = 0; k < size; ++k) a[k] -= o.a[k];
    return *this;
  }
  Mat& operator*=(double s) {
    for (auto& x : a) x *= s;
    return *this;
  }

  friend Mat operator+(Mat l, const Mat& r) { return l += r; }
  friend Mat operator-(Mat l, const Mat& r) { return l -= r; }
  friend Mat operator-(Mat m) { return m *= -1.0; }
  friend Mat operator*(Mat m, double s) { return m *= s; }
  friend Mat operator*(double s, Mat m) { return m *= s; }

  friend Mat operator*(const Mat& l, const Mat& r) {
    Mat m;
    for (int i = 0; i < D; ++i)
      for (int k = 0; k < D; ++k) {
        const double lik = l(i, k);
        for (int j = 0; j < D; ++j) m(i, j) += lik * r(k, j);
      }
    return m;
  }

  friend Vec<D> operator*(const Mat& m, const Vec<D>& v) {
    Vec<D> r{};
    for (int i = 0; i < D; ++i)
      for (int j = 0; j < D; ++j) r[i] += m(i, j) * v[j];
    return r;
  }

  friend bool operator==(const Mat&, const Mat&) = default;
};

/// Symmetric matrix stored as its packed upper triangle, row by row.
template <int D>
  requires SupportedDim<D>
struct SymMat {
  static constexpr int dim = D;
  static constexpr std::size_t size = D * (D + 1) / 2;

  std::array<double, size> a{};

  static constexpr std::size_t index(int i, int j) {
    if (i > j) {
      const int t = i;
      i = j;
      j = t;
    }
    // offset of row i in the packed upper triangle
    return static_cast<std::size_t>(i * D - i * (i - 1) / 2 + (j - i));
  }

  constexpr double& operator()(int i, int j) { return a[index(i, j)]; }
  constexpr double operator()(int i, int j) const { return a[index(i, j)]; }

  static constexpr SymMat zero() { return SymMat{}; }

  static constexpr SymMat identity() {
    SymMat s;
    for (int i = 0; i < D; ++i) s(i, i) = 1.0;
    return s;
  }

  static constexpr SymMat diagonal(const Vec<D>& d) {
    SymMat s;
    for (int i = 0; i < D; ++i) s(i, i) = d[i];
    return s;
  }

  /// Symmetric part of a full matrix.
  static SymMat sym_part(const Mat<D>& f) {
    SymMat s;
    for (int i = 0; i < D; ++i)
      for (int j = i; j < D; ++j) s(i, j) = 0.5 * (f(i, j) + f(j, i));
    return s;
  }

  /// From a row-major d x d array that must already be symmetric.
  static SymMat from_row_major(std::span<const double> values, double tol = 1e-12) {
    const Mat<D> m = Mat<D>::from_row_major(values);
    for (int i = 0; i < D; ++i)
      for (int j = i + 1; j < D; ++j)
        if (std::abs(m(i, j) - m(j, i)) > tol * (1.0 + std::abs(m(i, j))))
          throw DomainError("SymMat: input matrix is not symmetric");
    return sym_part(m);
  }

  Mat<D> full() const {
    Mat<D> m;
    for (int i = 0; i < D; ++i)
      for (int j = 0; j < D; ++j) m(i, j) = (*this)(i, j);
    return m;
  }

  SymMat& operator+=(const SymMat& o) {
    for (std::size_t k = 0; k < size; ++k) a[k] += o.a[k];
    return *this;
  }
  SymMat& operator-=(const SymMat& o) {
    for (std::size_t k = 0; k < size; ++k) a[k] -= o.a[k];
    return *this;
  }
  SymMat& operator*=(double s) {
    for (auto& x : a) x *= s;
    return *this;
  }

  friend SymMat operator+(SymMat l, const SymMat& r) { return l += r; }
  friend SymMat operator-(SymMat l, const SymMat& r) { return l -= r; }
  friend SymMat operator-(SymMat m) { return m *= -1.0; }
  friend SymMat operator*(SymMat m, double s) { return m *= s; }
  friend SymMat operator*(double s, SymMat m) { return m *= s; }

  friend bool operator==(const SymMat&, const SymMat&) = default;
};

using Mat2 = Mat<2>;
using Mat3 = Mat<3>;
using SymMat2 = SymMat<2>;
using SymMat3 = SymMat<3>;
using Vec3 = Vec<3>;

// ---------------------------------------------------------------------------
// Elementary operations

template <int D>
SymMat<D> symmetrize(const Mat<D>& f) {
  return SymMat<D>::sym_part(f);
}

template <int D>
Mat<D> transpose(const Mat<D>& m) {
  Mat<D> t;
  for (int i = 0; i < D; ++i)
    for (int j = 0; j < D; ++j) t(i, j) = m(j, i);
  return t;
}

template <int D>
double trace(const Mat<D>& m) {
  double t = 0.0;
  for (int i = 0; i < D; ++i) t += m(i, i);
  return t;
}

template <int D>
double trace(const SymMat<D>& s) {
  double t = 0.0;
  for (int i = 0; i < D; ++i) t += s(i, i);
  return t;
}

/// Frobenius pairing A : B.
template <int D>
double frobenius_dot(const Mat<D>& l, const Mat<D>& r) {
  double s = 0.0;
  for (std::size_t k = 0; k < Mat<D>::size; ++k) s += l.a[k] * r.a[k];
  return s;
}

template <int D>
double frobenius_dot(const SymMat<D>& l, const SymMat<D>& r) {
  double s = 0.0;
  for (int i = 0; i < D; ++i)
    for (int j = 0; j < D; ++j) s += l(i, j) * r(i, j);
  return s;
}

template <int D>
double norm2(const Mat<D>& m) {
  return frobenius_dot(m, m);
}

template <int D>
double norm2(const SymMat<D>& s) {
  return frobenius_dot(s, s);
}

template <int D>
double norm(const Mat<D>& m) {
  return std::sqrt(norm2(m));
}

template <int D>
double norm(const SymMat<D>& s) {
  return std::sqrt(norm2(s));
}

template <int D>
double det(const Mat<D>& m) {
  if constexpr (D == 2) {
    return m(0, 0) * m(1, 1) - m(0, 1) * m(1, 0);
  } else {
    return m(0, 0) * (m(1, 1) * m(2, 2) - m(1, 2) * m(2, 1)) -
           m(0, 1) * (m(1, 0) * m(2, 2) - m(1, 2) * m(2, 0)) +
           m(0, 2) * (m(1, 0) * m(2, 1) - m(1, 1) * m(2, 0));
  }
}

/// Cofactor matrix, cof(F) = det(F) F^{-T}; the derivative of det at F.
template <int D>
Mat<D> cofactor(const Mat<D>& m) {
  Mat<D> c;
  if constexpr (D == 2) {
    c(0, 0) = m(1, 1);
    c(0, 1) = -m(1, 0);
    c(1, 0) = -m(0, 1);
    c(1, 1) = m(0, 0);
  } else {
    c(0, 0) = m(1, 1) * m(2, 2) - m(1, 2) * m(2, 1);
    c(0, 1) = m(1, 2) * m(2, 0) - m(1, 0) * m(2, 2);
    c(0, 2) = m(1, 0) * m(2, 1) - m(1, 1) * m(2, 0);
    c(1, 0) = m(0, 2) * m(2, 1) - m(0, 1) * m(2, 2);
    c(1, 1) = m(0, 0) * m(2, 2) - m(0, 2) * m(2, 0);
    c(1, 2) = m(0, 1) * m(2, 0) - m(0, 0) * m(2, 1);
    c(2, 0) = m(0, 1) * m(1, 2) - m(0, 2) * m(1, 1);
    c(2, 1) = m(0, 2) * m(1, 0) - m(0, 0) * m(1, 2);
    c(2, 2) = m(0, 0) * m(1, 1) - m(0, 1) * m(1, 0);
  }
  return c;
}

template <int D>
Mat<D> inverse(const Mat<D>& m) {
  const double d = det(m);
  if (d == 0.0) throw DomainError("inverse: singular matrix");
  return transpose(cofactor(m)) * (1.0 / d);
}

template <int D>
bool all_finite(const Mat<D>& m) {
  for (double x : m.a)
    if (!std::isfinite(x)) return false;
  return true;
}

template <int D>
bool all_finite(const SymMat<D>& s) {
  for (double x : s.a)
    if (!std::isfinite(x)) return false;
  return true;
}

template <std::size_t N>
double dot(const std::array<double, N>& u, const std::array<double, N>& v) {
  double s = 0.0;
  for (std::size_t i = 0; i < N; ++i) s += u[i] * v[i];
  return s;
}

template <std::size_t N>
double norm(const std::array<double, N>& v) {
  return std::sqrt(dot(v, v));
}

inline Vec3 cross(const Vec3& u, const Vec3& v) {
  return {u[1] * v[2] - u[2] * v[1], u[2] * v[0] - u[0] * v[2], u[0] * v[1] - u[1] * v[0]};
}

/// Rotation about a unit axis (Rodrigues).
inline Mat3 axis_angle(const Vec3& axis, double angle) {
  const double c = std::cos(angle), s = std::sin(angle), t = 1.0 - c;
  const double x = axis[0], y = axis[1], z = axis[2];
  Mat3 r;
  r(0, 0) = c + x * x * t;
  r(0, 1) = x * y * t - z * s;
  r(0, 2) = x * z * t + y * s;
  r(1, 0) = y * x * t + z * s;
  r(1, 1) = c + y * y * t;
  r(1, 2) = y * z * t - x * s;
  r(2, 0) = z * x * t - y * s;
  r(2, 1) = z * y * t + x * s;
  r(2, 2) = c + z * z * t;
  return r;
}

inline Mat2 planar_rotation(double angle) {
  Mat2 r;
  r(0, 0) = std::cos(angle);
  r(0, 1) = -std::sin(angle);
  r(1, 0) = std::sin(angle);
  r(1, 1) = std::cos(angle);
  return r;
}

}  // namespace gamma_elastica
