#pragma once

// Nonlinear multiwell densities W_eps and their rescalings V_eps, f_eps.

#include <cmath>
#include <limits>
#include <string>
#include <utility>
#include <vector>

#include "gamma_elastica/errors.hpp"
#include "gamma_elastica/matrix.hpp"
#include "gamma_elastica/spectral.hpp"
#include "gamma_elastica/wells.hpp"

namespace gamma_elastica {

inline constexpr double kInfinity = std::numeric_limits<double>::infinity();

/// Coercivity profile: t^2/2 on [0,1], t^p/p + 1/2 - 1/p beyond.
class GpFunction {
 public:
  explicit GpFunction(double p) : p_(p) {
    if (!(p > 1.0 && p <= 2.0)) throw DomainError("GpFunction: p must lie in (1, 2]");
  }

  double p() const { return p_; }

  double operator()(double t) const {
    check(t);
    if (t <= 1.0) return 0.5 * t * t;
    return std::pow(t, p_) / p_ + (0.5 - 1.0 / p_);
  }

  double derivative(double t) const {
    check(t);
    return t <= 1.0 ? t : std::pow(t, p_ - 1.0);
  }

  /// g'(t)/t, continuous down to t = 0.
  double derivative_over_t(double t) const {
    check(t);
    return t <= 1.0 ? 1.0 : std::pow(t, p_ - 2.0);
  }

 private:
  static void check(double t) {
    if (!(t >= 0.0)) throw DomainError("g_p: argument must be nonnegative");
  }
  double p_;
};

/// Volumetric energy of the determinant.
///
/// reference:  t^2 - 1 - 2 log t
/// polynomial: sum_k c_k (t-1)^k (k >= 2) + barrier (t - 1 - log t)
class VolumetricLaw {
 public:
  enum class Kind { reference, polynomial };

  static VolumetricLaw reference() {
    VolumetricLaw v;
    v.kind_ = Kind::reference;
    v.growth_k_ = 0.5;
    v.growth_m_ = 2.5;
    return v;
  }

  /// coefficients[i] multiplies (t-1)^{i+2}.
  static VolumetricLaw polynomial(std::vector<double> coefficients, double barrier) {
    if (coefficients.empty()) throw ConfigError("VolumetricLaw: polynomial needs at least the quadratic coefficient");
    if (!(barrier > 0.0)) throw ConfigError("VolumetricLaw: barrier weight must be positive");
    while (coefficients.size() > 1 && coefficients.back() == 0.0) coefficients.pop_back();
    if (!(coefficients.back() > 0.0)) throw ConfigError("VolumetricLaw: leading coefficient must be positive");
    VolumetricLaw v;
    v.kind_ = Kind::polynomial;
    v.coefficients_ = std::move(coefficients);
    v.barrier_ = barrier;
    if (!(v.d2_at_1() > 0.0)) throw ConfigError("VolumetricLaw: second derivative at 1 must be positive");
    v.calibrate_growth();
    return v;
  }

  Kind kind() const { return kind_; }
  const std::vector<double>& coefficients() const { return coefficients_; }
  double barrier() const { return barrier_; }

  /// Constants (k, M) with W(t) >= k t^2 for every t >= M.
  double growth_k() const { return growth_k_; }
  double growth_m() const { return growth_m_; }

  double operator()(double t) const {
    check(t);
    if (kind_ == Kind::reference) {
      const double x = t - 1.0;
      return x * (2.0 + x) - 2.0 * std::log1p(x);
    }
    const double x = t - 1.0;
    double poly = 0.0;
    for (std::size_t i = coefficients_.size(); i-- > 0;) poly = poly * x + coefficients_[i];
    return poly * x * x + barrier_ * (x - std::log1p(x));
  }

  double derivative(double t) const {
    check(t);
    if (kind_ == Kind::reference) return 2.0 * t - 2.0 / t;
    const double x = t - 1.0;
    double d = 0.0;
    for (std::size_t i = coefficients_.size(); i-- > 0;) d = d * x + static_cast<double>(i + 2) * coefficients_[i];
    return d * x + barrier_ * (1.0 - 1.0 / t);
  }

  /// Exact W''(1).
  double d2_at_1() const {
    if (kind_ == Kind::reference) return 4.0;
    return 2.0 * coefficients_[0] + barrier_;
  }

 private:
  static void check(double t) {
    if (!(t > 0.0)) throw DomainError("W_vol: argument must be positive");
  }

  void calibrate_growth() {
    const std::size_t degree = coefficients_.size() + 1;
    growth_k_ = degree == 2 ? 0.5 * coefficients_[0] : 1.0;
    // Smallest point of a geometric scan past which W(t) >= k t^2 holds on the scan.
    std::vector<double> ts;
    for (double t = 1.0; t < 1e6; t *= 1.05) ts.push_back(t);
    growth_m_ = ts.back();
    for (std::size_t i = ts.size(); i-- > 0;) {
      if ((*this)(ts[i]) < growth_k_ * ts[i] * ts[i]) break;
      growth_m_ = ts[i];
    }
  }

  Kind kind_ = Kind::reference;
  std::vector<double> coefficients_;
  double barrier_ = 0.0;
  double growth_k_ = 0.0;
  double growth_m_ = 0.0;
};

template <int D>
struct DensityEval {
  double value = 0.0;
  Mat<D> gradient{};  // dW/dF; unspecified when value is +inf
};

// ---------------------------------------------------------------------------
// Compressible nematic elastomer, a = (1+eps)^3.

struct NematicModel {
  static constexpr int dim = 3;

  double mu = 1.0;
  VolumetricLaw vol = VolumetricLaw::reference();

  NematicModel() = default;
  NematicModel(double shear, VolumetricLaw law) : mu(shear), vol(std::move(law)) { validate(); }

  void validate() const {
    if (!(mu > 0.0) || !std::isfinite(mu)) throw ConfigError("NematicModel: mu must be positive");
  }

  WellFamily<3> family() const { return WellFamily<3>::nematic(); }
  EpsilonWells<3> wells(double eps) const { return {family(), eps, {}}; }
  double coercivity_exponent() const { return 1.5; }
};

/// W_eps(F), +inf when det F <= 0.
inline double energy(const NematicModel& model, double eps, const Mat3& f) {
  const double j = det(f);
  if (!(j > 0.0)) return kInfinity;
  const double along = std::pow(1.0 + eps, -2.0), across = 1.0 + eps;
  // (1+eps)(s1^2 + s2^2) + (1+eps)^{-2} s3^2 with s3^2 the top eigenvalue of F^T F
  const double top = eig_sym(symmetrize(transpose(f) * f)).eigenvalues[2];
  const double weighted = across * norm2(f) + (along - across) * top;
  return 0.5 * model.mu * (std::pow(j, -2.0 / 3.0) * weighted - 3.0) + model.vol(j);
}

inline DensityEval<3> energy_with_gradient(const NematicModel& model, double eps, const Mat3& f) {
  DensityEval<3> out;
  const double j = det(f);
  if (!(j > 0.0)) {
    out.value = kInfinity;
    return out;
  }
  const double along = std::pow(1.0 + eps, -2.0), across = 1.0 + eps;
  const SpectralDecomp<3> c = eig_sym(symmetrize(transpose(f) * f));
  const double top = c.eigenvalues[2];
  const Vec3 v = c.eigenvector(2);
  const double weighted = across * norm2(f) + (along - across) * top;
  const double jm23 = std::pow(j, -2.0 / 3.0);
  out.value = 0.5 * model.mu * (jm23 * weighted - 3.0) + model.vol(j);

  const Mat3 cof = cofactor(f);
  const Mat3 fvv = Mat3::outer(f * v, v);
  Mat3 g = (2.0 * across) * f + (2.0 * (along - across)) * fvv;
  g *= jm23;
  g -= ((2.0 / 3.0) * jm23 * weighted / j) * cof;
  out.gradient = (0.5 * model.mu) * g + model.vol.derivative(j) * cof;
  return out;
}

/// W_{n,eps}(F) for a fixed director; bounds energy() from above.
inline double energy_for_director(const NematicModel& model, double eps, const Vec3& n, const Mat3& f) {
  require_unit(n, "nematic_energy_n");
  const double j = det(f);
  if (!(j > 0.0)) return kInfinity;
  const Mat3 linv = nematic_step_tensor(n, eps, -1.0).full();
  const double tr = trace(transpose(f) * linv * f);
  return 0.5 * model.mu * (tr * std::pow(j, -2.0 / 3.0) - 3.0) + model.vol(j);
}

// ---------------------------------------------------------------------------
// Synthetic multiwell family W_eps = c g_p(dist(F, U_eps)).

template <int D>
struct SyntheticModel {
  static constexpr int dim = D;

  WellFamily<D> wells_family = WellFamily<D>::finite({SymMat<D>::zero()});
  double p = 1.5;
  double c = 1.0;

  SyntheticModel() = default;
  SyntheticModel(WellFamily<D> family, double exponent, double scale)
      : wells_family(std::move(family)), p(exponent), c(scale) {
    validate();
  }

  void validate() const {
    if (wells_family.is_nematic()) throw ConfigError("SyntheticModel: wells must be a finite list");
    GpFunction check(p);
    if (!(c > 0.0) || !std::isfinite(c)) throw ConfigError("SyntheticModel: scale c must be positive");
  }

  const WellFamily<D>& family() const { return wells_family; }
  EpsilonWells<D> wells(double eps) const { return {wells_family, eps, {}}; }
  double coercivity_exponent() const { return p; }
};

template <int D>
double energy(const SyntheticModel<D>& model, double eps, const Mat<D>& f) {
  const GpFunction g(model.p);
  return model.c * g(dist_to_wells(f, model.wells(eps)).distance);
}

template <int D>
DensityEval<D> energy_with_gradient(const SyntheticModel<D>& model, double eps, const Mat<D>& f) {
  const GpFunction g(model.p);
  const WellDistance<D> w = dist_to_wells(f, model.wells(eps));
  DensityEval<D> out;
  out.value = model.c * g(w.distance);
  // d/dF dist^2/2 = F - R U at the attaining pair; g(d) = h(d^2/2) with h' = g'(d)/d.
  out.gradient = (model.c * g.derivative_over_t(w.distance)) * (f - w.rotation * w.well);
  return out;
}

// ---------------------------------------------------------------------------
// Rescalings

/// V_eps(E) = W_eps(I + eps E) / eps^2.
template <class Model>
double rescaled_density(const Model& model, double eps, const SymMat<Model::dim>& e) {
  if (!(eps > 0.0)) throw DomainError("rescaled_density: eps must be positive");
  constexpr int D = Model::dim;
  return energy(model, eps, Mat<D>::identity() + eps * e.full()) / (eps * eps);
}

/// f_eps(F) = V_eps(sym F).
template <class Model>
double rescaled_density_full(const Model& model, double eps, const Mat<Model::dim>& f) {
  return rescaled_density(model, eps, symmetrize(f));
}

}  // namespace gamma_elastica
