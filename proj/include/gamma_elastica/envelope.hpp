#pragma once

// Numeric upper estimate of the symmetric quasiconvex envelope:
//   V^qce(E) <= average over the unit box of V(E + e(phi)),
// minimized over P1 fields phi vanishing on the box boundary.

#include <functional>
#include <optional>
#include <utility>

#include "gamma_elastica/energy.hpp"
#include "gamma_elastica/errors.hpp"
#include "gamma_elastica/limit.hpp"
#include "gamma_elastica/matrix.hpp"
#include "gamma_elastica/mesh.hpp"
#include "gamma_elastica/solver.hpp"

namespace gamma_elastica {

/// A density of the symmetric strain. Without `gradient` the nodal gradient
/// of the cell problem is formed from central differences of `value`.
template <int D>
struct StrainDensity {
  std::function<double(const SymMat<D>&)> value;
  std::function<SymMat<D>(const SymMat<D>&)> gradient;  // dV/dE as a full-matrix derivative
};

/// The nematic limit density V with its analytic derivative.
inline StrainDensity<3> nematic_strain_density(const LimitParams& params) {
  return {[params](const SymMat3& e) { return v_limit(params, e); },
          [params](const SymMat3& e) { return v_limit_gradient(params, e); }};
}

namespace detail {
template <int D>
SymMat<D> central_difference(const std::function<double(const SymMat<D>&)>& v, const SymMat<D>& e) {
  constexpr double h = 1e-6;
  SymMat<D> g;
  for (int i = 0; i < D; ++i)
    for (int j = i; j < D; ++j) {
      SymMat<D> plus = e, minus = e;
      plus(i, j) += h;
      minus(i, j) -= h;
      const double d = (v(plus) - v(minus)) / (2.0 * h);
      g(i, j) = i == j ? d : 0.5 * d;  // a packed off-diagonal entry stands for two matrix entries
    }
  return g;
}
}  // namespace detail

template <int D>
struct QceEstimate {
  double value = kInfinity;
  double density_at_e = kInfinity;  // phi = 0 competitor
  bool converged = false;
  MinimizeResult<D> solve;
};

/// Cell problem on a grid_n^d Kuhn mesh of the unit box (grid_n divisions per axis).
template <int D>
QceEstimate<D> qce_numeric_estimate(const StrainDensity<D>& density, const SymMat<D>& e, int grid_n,
                                    const MinimizeOptions& opts = {}) {
  if (grid_n < 2) throw ConfigError("qce_numeric_upper: grid_n must be >= 2");
  if (!density.value) throw ConfigError("qce_numeric_upper: density has no value callable");
  const BoxMesh<D> mesh(grid_n);
  const BoundarySpec<D> zero = BoundarySpec<D>::affine(Mat<D>::zero());

  FieldObjective<D> cell = [&](const DisplacementField<D>& phi) {
    return assemble(
        mesh, phi, LoadSpec<D>{},
        [&](const Mat<D>& g) {
          const SymMat<D> strain = e + symmetrize(g);
          DensityEval<D> w;
          w.value = density.value(strain);
          if (!std::isfinite(w.value)) return w;
          const SymMat<D> dv = density.gradient ? density.gradient(strain) : detail::central_difference(density.value, strain);
          w.gradient = dv.full();
          return w;
        },
        true);
  };

  QceEstimate<D> out;
  out.density_at_e = density.value(e);
  try {
    out.solve = minimize<D>(cell, mesh, zero, opts);
  } catch (const OptimizerFailure&) {
    throw OptimizerFailure("qce_numeric_upper: every start diverged");
  }
  if (!std::isfinite(out.solve.value)) throw OptimizerFailure("qce_numeric_upper: every start diverged");
  // The unit box has volume one, so the functional is already the cell average.
  out.value = out.solve.value;
  out.converged = out.solve.converged;
  return out;
}

template <int D>
double qce_numeric_upper(const StrainDensity<D>& density, const SymMat<D>& e, int grid_n,
                         const MinimizeOptions& opts = {}) {
  return qce_numeric_estimate(density, e, grid_n, opts).value;
}

}  // namespace gamma_elastica
