#pragma once

// Well families M and the induced epsilon-dependent wells SO(d){I + eps U + o(eps)}.

#include <cmath>
#include <limits>
#include <optional>
#include <utility>
#include <vector>

#include "gamma_elastica/errors.hpp"
#include "gamma_elastica/matrix.hpp"
#include "gamma_elastica/spectral.hpp"
#include "gamma_elastica/sphere.hpp"

namespace gamma_elastica {

inline void require_unit(const Vec3& n, const char* where) {
  if (!(std::abs(norm(n) - 1.0) <= 1e-12)) throw DomainError(std::string(where) + ": director is not a unit vector");
}

/// L_{n,eps}^alpha = (1+eps)^{2 alpha} n (x) n + (1+eps)^{-alpha} (I - n (x) n), i.e. a = (1+eps)^3.
inline SymMat3 nematic_step_tensor(const Vec3& n, double eps, double alpha) {
  const double along = std::pow(1.0 + eps, 2.0 * alpha);
  const double across = std::pow(1.0 + eps, -alpha);
  SymMat3 l;
  for (int i = 0; i < 3; ++i)
    for (int j = i; j < 3; ++j) l(i, j) = (along - across) * n[i] * n[j] + (i == j ? across : 0.0);
  return l;
}

/// The well L_{n,eps}^{1/2}.
inline SymMat3 nematic_stretch(const Vec3& n, double eps) { return nematic_step_tensor(n, eps, 0.5); }

/// The limit well U_n = (3 n (x) n - I) / 2.
inline SymMat3 u_of_n(const Vec3& n) {
  require_unit(n, "u_of_n");
  SymMat3 u;
  for (int i = 0; i < 3; ++i)
    for (int j = i; j < 3; ++j) u(i, j) = 1.5 * n[i] * n[j] - (i == j ? 0.5 : 0.0);
  return u;
}

/// The compact set M: a finite list of symmetric matrices, or (d = 3) the
/// nematic family {U_n : n in S^2}.
template <int D>
class WellFamily {
 public:
  static WellFamily finite(std::vector<SymMat<D>> wells) {
    if (wells.empty()) throw ConfigError("WellFamily: finite well list must be nonempty");
    for (const auto& w : wells)
      if (!all_finite(w)) throw ConfigError("WellFamily: non-finite well entry");
    WellFamily f;
    f.wells_ = std::move(wells);
    return f;
  }

  static WellFamily nematic()
    requires(D == 3)
  {
    WellFamily f;
    f.nematic_ = true;
    return f;
  }

  bool is_nematic() const { return nematic_; }
  const std::vector<SymMat<D>>& finite_wells() const { return wells_; }

  /// max over M of |U|; used by the triangle-inequality bounds.
  double radius() const {
    if (nematic_) return std::sqrt(1.5);
    double r = 0.0;
    for (const auto& w : wells_) r = std::max(r, norm(w));
    return r;
  }

 private:
  bool nematic_ = false;
  std::vector<SymMat<D>> wells_;
};

/// U_eps = L_{n,eps}^{1/2} for the nematic family, I + eps U for finite families.
template <int D>
struct EpsilonWells {
  WellFamily<D> family;
  double eps = 0.0;
  SphereSearchOptions search{};

  Mat<D> finite_member(const SymMat<D>& u) const { return Mat<D>::identity() + eps * u.full(); }

  Mat3 nematic_member(const Vec3& n) const
    requires(D == 3)
  {
    return nematic_stretch(n, eps).full();
  }

  /// max over members of |U_eps - I|.
  double max_offset() const {
    if (family.is_nematic()) {
      const double a = std::pow(1.0 + eps, -0.5) - 1.0;
      return std::sqrt(eps * eps + 2.0 * a * a);
    }
    double r = 0.0;
    for (const auto& w : family.finite_wells()) r = std::max(r, std::abs(eps) * norm(w));
    return r;
  }
};

template <int D>
struct WellDistance {
  double distance = 0.0;
  Mat<D> rotation = Mat<D>::identity();
  Mat<D> well = Mat<D>::identity();  // the attaining U_eps
  std::optional<Vec3> director;      // nematic family only
  int well_index = -1;               // finite family only
};

/// min over R in SO(d), U_eps in wells of |F - R U_eps|.
template <int D>
WellDistance<D> dist_to_wells(const Mat<D>& f, const EpsilonWells<D>& wells) {
  WellDistance<D> best;
  best.distance = std::numeric_limits<double>::infinity();
  if (!wells.family.is_nematic()) {
    const auto& list = wells.family.finite_wells();
    for (int k = 0; k < static_cast<int>(list.size()); ++k) {
      const Mat<D> member = wells.finite_member(list[k]);
      const RotationFit<D> fit = fit_rotation(f, member);
      if (fit.distance < best.distance) {
        best.distance = fit.distance;
        best.rotation = fit.rotation;
        best.well = member;
        best.well_index = k;
      }
    }
    return best;
  }
  if constexpr (D == 3) {
    // |F - R A_n|^2 = |F|^2 + |A_n|^2 - 2 tr(R^T F A_n); |A_n| does not depend on n,
    // so the director search maximizes the signed nuclear norm of F A_n.
    const SphereMinimum coarse = minimize_on_sphere(
        [&](const Vec3& n) { return -signed_nuclear_norm(f * wells.nematic_member(n)); }, wells.search);
    // The nuclear-norm form cancels near a well; polish on the direct distance.
    auto direct = [&](const Vec3& n) {
      const double d = fit_rotation(f, wells.nematic_member(n)).distance;
      return d * d;
    };
    const SphereMinimum m =
        refine_on_sphere(direct, {coarse.director, direct(coarse.director)}, 4.0 * refined_half_width(wells.search),
                         wells.search.polish_rounds, wells.search.golden_steps);
    const Mat3 member = wells.nematic_member(m.director);
    const RotationFit<3> fit = fit_rotation(f, member);
    best.distance = fit.distance;
    best.rotation = fit.rotation;
    best.well = member;
    best.director = m.director;
  }
  return best;
}

}  // namespace gamma_elastica
