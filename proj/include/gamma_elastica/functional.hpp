#pragma once

// Discrete functionals on P1 fields: the rescaled nonlinear energy
// (1/eps^2) sum |T| W_eps(I + eps grad u_T) - L(u) and the relaxed energy
// sum |T| f^qc(grad u_T) - L(u).

#include <cmath>
#include <vector>

#include "gamma_elastica/energy.hpp"
#include "gamma_elastica/limit.hpp"
#include "gamma_elastica/matrix.hpp"
#include "gamma_elastica/mesh.hpp"

namespace gamma_elastica {

/// L(u) with lumped vertex quadrature.
template <int D>
double load_work(const BoxMesh<D>& mesh, const DisplacementField<D>& u, const LoadSpec<D>& load) {
  if (load.is_zero()) return 0.0;
  const auto& mass = mesh.lumped_mass();
  double w = 0.0;
  for (std::size_t v = 0; v < u.values.size(); ++v) w += mass[v] * dot(load.at(static_cast<int>(v)), u.values[v]);
  return w;
}

template <int D>
struct FieldEval {
  double value = 0.0;
  std::vector<double> gradient;  // per scalar DOF, vertex-major
};

/// Element-order assembly of sum |T| density(grad u_T) - L(u) and its nodal
/// gradient. `density(G)` returns the value and dW/dG. Stops at the first
/// element with an infinite density.
template <int D, class Density>
FieldEval<D> assemble(const BoxMesh<D>& mesh, const DisplacementField<D>& u, const LoadSpec<D>& load,
                      Density&& density, bool with_gradient) {
  FieldEval<D> out;
  if (with_gradient) out.gradient.assign(u.values.size() * D, 0.0);
  for (const auto& el : mesh.elements()) {
    const Mat<D> g = element_gradient(el, u.values);
    const DensityEval<D> w = density(g);
    if (!std::isfinite(w.value)) {
      out.value = kInfinity;
      return out;
    }
    out.value += el.volume * w.value;
    if (!with_gradient) continue;
    // d/du_a = |T| P grad(phi_a); grad(phi_k) is row k-1 of the inverse edge matrix.
    Vec<D> sum_rows{};
    for (int k = 0; k < D; ++k) {
      Vec<D> grad_phi;
      for (int j = 0; j < D; ++j) grad_phi[j] = el.inverse_edges(k, j);
      const Vec<D> pg = w.gradient * grad_phi;
      const int vtx = el.vertices[k + 1];
      for (int i = 0; i < D; ++i) {
        out.gradient[vtx * D + i] += el.volume * pg[i];
        sum_rows[i] += pg[i];
      }
    }
    const int v0 = el.vertices[0];
    for (int i = 0; i < D; ++i) out.gradient[v0 * D + i] -= el.volume * sum_rows[i];
  }
  if (!load.is_zero()) {
    const auto& mass = mesh.lumped_mass();
    for (std::size_t v = 0; v < u.values.size(); ++v) {
      const Vec<D> l = load.at(static_cast<int>(v));
      out.value -= mass[v] * dot(l, u.values[v]);
      if (with_gradient)
        for (int i = 0; i < D; ++i) out.gradient[v * D + i] -= mass[v] * l[i];
    }
  }
  return out;
}

/// Rescaled nonlinear energy; the value is +inf if det(I + eps grad u_T) <= 0 on some element.
template <class Model, int D = Model::dim>
FieldEval<D> energy_eps_with_gradient(const BoxMesh<D>& mesh, const DisplacementField<D>& u, const Model& model,
                                      double eps, const LoadSpec<D>& load, bool with_gradient = true) {
  const double inv_eps = 1.0 / eps, inv_eps2 = inv_eps * inv_eps;
  return assemble(
      mesh, u, load,
      [&](const Mat<D>& g) {
        const Mat<D> f = Mat<D>::identity() + eps * g;
        if (!with_gradient) return DensityEval<D>{energy(model, eps, f) * inv_eps2, {}};
        DensityEval<D> w = energy_with_gradient(model, eps, f);
        w.value *= inv_eps2;
        w.gradient *= inv_eps;
        return w;
      },
      with_gradient);
}

template <class Model, int D = Model::dim>
double energy_eps(const BoxMesh<D>& mesh, const DisplacementField<D>& u, const Model& model, double eps,
                  const LoadSpec<D>& load) {
  return energy_eps_with_gradient(mesh, u, model, eps, load, false).value;
}

/// Relaxed energy with density `limit.relaxed` (f^qc).
template <class Limit, int D = Limit::dim>
FieldEval<D> energy_relaxed_with_gradient(const BoxMesh<D>& mesh, const DisplacementField<D>& u, const Limit& limit,
                                          const LoadSpec<D>& load, bool with_gradient = true) {
  return assemble(
      mesh, u, load,
      [&](const Mat<D>& g) {
        if (!with_gradient) return DensityEval<D>{limit.relaxed(g), {}};
        return limit.relaxed_with_gradient(g);
      },
      with_gradient);
}

template <class Limit, int D = Limit::dim>
double energy_relaxed(const BoxMesh<D>& mesh, const DisplacementField<D>& u, const Limit& limit,
                      const LoadSpec<D>& load) {
  return energy_relaxed_with_gradient(mesh, u, limit, load, false).value;
}

// ---------------------------------------------------------------------------
// Norms

/// (sum |T| |grad u_T|^p)^{1/p}
template <int D>
double gradient_lp_norm(const BoxMesh<D>& mesh, const DisplacementField<D>& u, double p) {
  double s = 0.0;
  for (const auto& el : mesh.elements()) s += el.volume * std::pow(norm(element_gradient(el, u.values)), p);
  return std::pow(s, 1.0 / p);
}

/// (sum |T| |grad u_T - grad w_T|^p)^{1/p}
template <int D>
double gradient_lp_distance(const BoxMesh<D>& mesh, const DisplacementField<D>& u, const DisplacementField<D>& w,
                            double p) {
  double s = 0.0;
  for (const auto& el : mesh.elements())
    s += el.volume * std::pow(norm(element_gradient(el, u.values) - element_gradient(el, w.values)), p);
  return std::pow(s, 1.0 / p);
}

/// Lumped (sum m_v |u_v - w_v|^p)^{1/p}
template <int D>
double field_lp_distance(const BoxMesh<D>& mesh, const DisplacementField<D>& u, const DisplacementField<D>& w,
                         double p) {
  const auto& mass = mesh.lumped_mass();
  double s = 0.0;
  for (std::size_t v = 0; v < u.values.size(); ++v) {
    Vec<D> d;
    for (int i = 0; i < D; ++i) d[i] = u.values[v][i] - w.values[v][i];
    s += mass[v] * std::pow(norm(d), p);
  }
  return std::pow(s, 1.0 / p);
}

}  // namespace gamma_elastica
