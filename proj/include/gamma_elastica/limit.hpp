#pragma once

// Linearized densities V, f and the relaxed envelopes f^qc = V^qce(sym .).

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include "gamma_elastica/energy.hpp"
#include "gamma_elastica/errors.hpp"
#include "gamma_elastica/matrix.hpp"
#include "gamma_elastica/spectral.hpp"
#include "gamma_elastica/wells.hpp"

namespace gamma_elastica {

/// Lame-type constants of the nematic limit, lambda = W_vol''(1) - 2 mu / 3.
struct LimitParams {
  double mu = 1.0;
  double lambda = 0.0;

  LimitParams() = default;
  LimitParams(double shear, double bulk) : mu(shear), lambda(bulk) {
    if (!(mu > 0.0) || !std::isfinite(mu)) throw ConfigError("LimitParams: mu must be positive");
    if (!std::isfinite(lambda)) throw ConfigError("LimitParams: lambda must be finite");
  }

  static LimitParams from_model(const NematicModel& model) {
    return {model.mu, model.vol.d2_at_1() - 2.0 / 3.0 * model.mu};
  }

  /// The closed-form envelope is only relied upon when this holds.
  bool lambda_nonnegative() const { return lambda >= 0.0; }
};

/// min over n of |E - U_n|^2 = |E|^2 - 3 lambda_max(E) + tr E + 3/2.
inline double min_dist2_to_un(const SymMat3& e) {
  const double top = eig_sym(e).eigenvalues[2];
  return std::max(0.0, norm2(e) - 3.0 * top + trace(e) + 1.5);
}

/// A minimizing director of |E - U_n|^2: the top eigenvector of E.
inline Vec3 argmin_director(const SymMat3& e) { return eig_sym(e).eigenvector(2); }

inline double v_limit(const LimitParams& params, const SymMat3& e) {
  const double tr = trace(e);
  return params.mu * min_dist2_to_un(e) + 0.5 * params.lambda * tr * tr;
}

/// dV/dE where the top eigenvalue is simple.
inline SymMat3 v_limit_gradient(const LimitParams& params, const SymMat3& e) {
  const Vec3 n = argmin_director(e);
  const double tr = trace(e);
  SymMat3 g;
  for (int i = 0; i < 3; ++i)
    for (int j = i; j < 3; ++j)
      g(i, j) = params.mu * (2.0 * e(i, j) - 3.0 * n[i] * n[j] + (i == j ? 1.0 : 0.0)) +
                (i == j ? params.lambda * tr : 0.0);
  return g;
}

inline double f_limit(const LimitParams& params, const Mat3& f) { return v_limit(params, symmetrize(f)); }

// ---------------------------------------------------------------------------
// Projection onto Q = {U symmetric : tr U = 0, eigenvalues in [-1/2, 1]}

inline constexpr double kQLower = -0.5;
inline constexpr double kQUpper = 1.0;

struct QProjection {
  SymMat3 projected{};
  double distance = 0.0;
  double multiplier = 0.0;  // shift tau of the trace hyperplane
  Vec3 eigenvalues{};       // of the input, ascending
  Vec3 projected_eigenvalues{};
  double kkt_residual = 0.0;
};

namespace detail {
inline double clip_q(double x) { return std::clamp(x, kQLower, kQUpper); }

inline double shifted_sum(const Vec3& e, double tau) {
  return clip_q(e[0] - tau) + clip_q(e[1] - tau) + clip_q(e[2] - tau);
}

/// Max violation of the KKT system of min |x - e|^2 over the box-hyperplane set.
inline double q_kkt_residual(const Vec3& e, const Vec3& x, double tau) {
  double r = std::abs(x[0] + x[1] + x[2]);
  for (int i = 0; i < 3; ++i) {
    const double nu = e[i] - x[i] - tau;
    r = std::max(r, std::max(0.0, x[i] - kQUpper));
    r = std::max(r, std::max(0.0, kQLower - x[i]));
    if (x[i] >= kQUpper) {
      r = std::max(r, std::max(0.0, -nu));
    } else if (x[i] <= kQLower) {
      r = std::max(r, std::max(0.0, nu));
    } else {
      r = std::max(r, std::abs(nu));
    }
  }
  return r;
}
}  // namespace detail

inline constexpr double kProjectionTolerance = 1e-12;
inline constexpr int kProjectionMaxIterations = 200;

/// Frobenius-nearest point of Q, via the eigenvalue problem
/// x_i = clip(e_i - tau) with sum x_i = 0, solved by bisection on tau.
inline QProjection project_Q(const SymMat3& e) {
  const SpectralDecomp<3> s = eig_sym(e);
  const Vec3& ev = s.eigenvalues;
  double lo = ev[0] - 1.0 - 1e-9, hi = ev[2] + 0.5 + 1e-9;
  if (!(detail::shifted_sum(ev, lo) > 0.0 && detail::shifted_sum(ev, hi) < 0.0))
    throw std::logic_error("project_Q: bisection bracket does not straddle the root");
  double tau = 0.5 * (lo + hi);
  for (int it = 0; it < kProjectionMaxIterations; ++it) {
    tau = 0.5 * (lo + hi);
    const double r = detail::shifted_sum(ev, tau);
    if (std::abs(r) <= kProjectionTolerance) break;
    (r > 0.0 ? lo : hi) = tau;
  }
  // Exact root on the active set identified by bisection.
  int free_count = 0;
  double free_sum = 0.0, clipped = 0.0;
  for (int i = 0; i < 3; ++i) {
    const double x = ev[i] - tau;
    if (x >= kQUpper) {
      clipped += kQUpper;
    } else if (x <= kQLower) {
      clipped += kQLower;
    } else {
      ++free_count;
      free_sum += ev[i];
    }
  }
  if (free_count > 0) {
    const double exact = (free_sum + clipped) / free_count;
    if (std::abs(detail::shifted_sum(ev, exact)) <= std::abs(detail::shifted_sum(ev, tau))) tau = exact;
  }

  QProjection out;
  out.eigenvalues = ev;
  out.multiplier = tau;
  for (int i = 0; i < 3; ++i) out.projected_eigenvalues[i] = detail::clip_q(ev[i] - tau);
  double d2 = 0.0;
  for (int i = 0; i < 3; ++i) d2 += (ev[i] - out.projected_eigenvalues[i]) * (ev[i] - out.projected_eigenvalues[i]);
  out.distance = std::sqrt(d2);
  SpectralDecomp<3> p = s;
  p.eigenvalues = out.projected_eigenvalues;
  out.projected = p.reconstruct();
  out.kkt_residual = detail::q_kkt_residual(ev, out.projected_eigenvalues, tau);
  return out;
}

inline double vqce(const LimitParams& params, const SymMat3& e) {
  const double d = project_Q(e).distance;
  const double tr = trace(e);
  return params.mu * d * d + 0.5 * params.lambda * tr * tr;
}

inline double fqc(const LimitParams& params, const Mat3& f) { return vqce(params, symmetrize(f)); }

/// dV^qce/dE = 2 mu (E - P_Q(E)) + lambda tr(E) I; continuous everywhere.
inline SymMat3 vqce_gradient(const LimitParams& params, const SymMat3& e) {
  const QProjection q = project_Q(e);
  SymMat3 g = (2.0 * params.mu) * (e - q.projected);
  const double tr = trace(e);
  for (int i = 0; i < 3; ++i) g(i, i) += params.lambda * tr;
  return g;
}

// ---------------------------------------------------------------------------
// Limit densities usable by the scans and the relaxed solver.

/// Nematic limit: V(E) with relaxed envelope V^qce.
struct NematicLimit {
  static constexpr int dim = 3;
  LimitParams params;

  double value(const SymMat3& e) const { return v_limit(params, e); }

  double relaxed(const Mat3& f) const { return fqc(params, f); }
  DensityEval<3> relaxed_with_gradient(const Mat3& f) const {
    const SymMat3 e = symmetrize(f);
    return {vqce(params, e), vqce_gradient(params, e).full()};
  }
};

/// Limit of the synthetic family, V(E) = c/2 dist^2(E, M). Its relaxation is
/// only available in closed form for a single well, where V is convex.
template <int D>
struct WellLimit {
  static constexpr int dim = D;
  double c = 1.0;
  std::vector<SymMat<D>> wells;

  bool convex() const { return wells.size() == 1; }

  double value(const SymMat<D>& e) const {
    double best = std::numeric_limits<double>::infinity();
    for (const auto& w : wells) best = std::min(best, norm2(e - w));
    return 0.5 * c * best;
  }

  double relaxed(const Mat<D>& f) const {
    require_convex();
    return value(symmetrize(f));
  }

  DensityEval<D> relaxed_with_gradient(const Mat<D>& f) const {
    require_convex();
    const SymMat<D> r = symmetrize(f) - wells.front();
    return {0.5 * c * norm2(r), (c * r).full()};
  }

 private:
  void require_convex() const {
    if (!convex()) throw ConfigError("WellLimit: relaxed density needs a single well (multiwell envelope unknown)");
  }
};

inline NematicLimit limit_of(const NematicModel& model) { return {LimitParams::from_model(model)}; }

template <int D>
WellLimit<D> limit_of(const SyntheticModel<D>& model) {
  return {model.c, model.wells_family.finite_wells()};
}

/// dist^2(E, M) for a well family.
template <int D>
double dist2_to_family(const SymMat<D>& e, const WellFamily<D>& family) {
  if (family.is_nematic()) {
    if constexpr (D == 3) return min_dist2_to_un(e);
  }
  double best = std::numeric_limits<double>::infinity();
  for (const auto& w : family.finite_wells()) best = std::min(best, norm2(e - w));
  return best;
}

}  // namespace gamma_elastica
