#pragma once

// P1 discretization of the unit box: Kuhn triangulation, boundary data, loads.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <stdexcept>
#include <string>
#include <type_traits>
#include <variant>
#include <vector>

#include "gamma_elastica/errors.hpp"
#include "gamma_elastica/matrix.hpp"

namespace gamma_elastica {

/// Default element caps: 6 * 10^3 tets in 3-d, 2 * 100^2 triangles in 2-d.
template <int D>
constexpr std::size_t default_element_cap() {
  return D == 3 ? 6000 : 20000;
}

template <int D>
struct Element {
  std::array<int, D + 1> vertices{};
  double volume = 0.0;
  // Row k-1 of the inverse edge matrix is grad phi_k (k = 1..D); grad phi_0 = -sum.
  Mat<D> inverse_edges{};
};

template <int D>
  requires SupportedDim<D>
class BoxMesh {
 public:
  BoxMesh(int divisions, std::size_t element_cap = default_element_cap<D>()) : n_(divisions) {
    if (divisions < 1) throw ConfigError("BoxMesh: divisions must be >= 1");
    std::size_t cells = 1;
    for (int k = 0; k < D; ++k) cells *= static_cast<std::size_t>(divisions);
    const std::size_t per_cell = D == 3 ? 6 : 2;
    if (cells * per_cell > element_cap)
      throw SizeError("BoxMesh: " + std::to_string(cells * per_cell) + " elements exceed cap " +
                      std::to_string(element_cap));
    build(cells);
  }

  int divisions() const { return n_; }
  double spacing() const { return 1.0 / n_; }
  std::size_t vertex_count() const { return points_.size(); }
  const std::vector<Vec<D>>& points() const { return points_; }
  const std::vector<Element<D>>& elements() const { return elements_; }

  /// Lumped vertex masses (each element shares its volume equally).
  const std::vector<double>& lumped_mass() const { return mass_; }

  int vertex_id(const std::array<int, D>& idx) const {
    int id = 0;
    for (int k = D - 1; k >= 0; --k) id = id * (n_ + 1) + idx[k];
    return id;
  }

  std::array<int, D> lattice_index(int id) const {
    std::array<int, D> idx{};
    for (int k = 0; k < D; ++k) {
      idx[k] = id % (n_ + 1);
      id /= (n_ + 1);
    }
    return idx;
  }

  double total_volume() const {
    double v = 0.0;
    for (const auto& e : elements_) v += e.volume;
    return v;
  }

 private:
  void build(std::size_t cells) {
    const int nv = static_cast<int>(std::pow(n_ + 1, D) + 0.5);
    points_.resize(static_cast<std::size_t>(nv));
    for (int id = 0; id < nv; ++id) {
      const auto idx = lattice_index(id);
      for (int k = 0; k < D; ++k) points_[id][k] = static_cast<double>(idx[k]) / n_;
    }
    std::array<int, D> perm;
    std::iota(perm.begin(), perm.end(), 0);
    std::vector<std::array<int, D>> perms;
    do {
      perms.push_back(perm);
    } while (std::next_permutation(perm.begin(), perm.end()));

    elements_.reserve(cells * perms.size());
    for (std::size_t cell = 0; cell < cells; ++cell) {
      std::array<int, D> corner{};
      std::size_t rest = cell;
      for (int k = 0; k < D; ++k) {
        corner[k] = static_cast<int>(rest % static_cast<std::size_t>(n_));
        rest /= static_cast<std::size_t>(n_);
      }
      for (const auto& p : perms) {
        Element<D> el;
        std::array<int, D> walk = corner;
        el.vertices[0] = vertex_id(walk);
        for (int k = 0; k < D; ++k) {
          ++walk[p[k]];
          el.vertices[k + 1] = vertex_id(walk);
        }
        Mat<D> edges;  // columns x_k - x_0
        for (int k = 0; k < D; ++k)
          for (int i = 0; i < D; ++i) edges(i, k) = points_[el.vertices[k + 1]][i] - points_[el.vertices[0]][i];
        const double jac = det(edges);
        if (!(std::abs(jac) > 0.0)) throw std::logic_error("BoxMesh: degenerate element");
        el.volume = std::abs(jac) / (D == 3 ? 6.0 : 2.0);
        el.inverse_edges = inverse(edges);
        elements_.push_back(el);
      }
    }
    mass_.assign(points_.size(), 0.0);
    for (const auto& el : elements_)
      for (int v : el.vertices) mass_[v] += el.volume / (D + 1);
  }

  int n_;
  std::vector<Vec<D>> points_;
  std::vector<Element<D>> elements_;
  std::vector<double> mass_;
};

/// A face of the box: the set x_axis = side (side in {0, 1}).
struct BoxFace {
  int axis = 0;
  int side = 0;
  friend bool operator==(const BoxFace&, const BoxFace&) = default;
};

template <int D>
std::vector<BoxFace> all_faces() {
  std::vector<BoxFace> faces;
  for (int a = 0; a < D; ++a)
    for (int s = 0; s < 2; ++s) faces.push_back({a, s});
  return faces;
}

/// Dirichlet data u = h on a union of whole box faces; h affine (x -> F x)
/// or given per vertex.
template <int D>
struct BoundarySpec {
  std::vector<BoxFace> faces = all_faces<D>();
  std::variant<Mat<D>, std::vector<Vec<D>>> data = Mat<D>::zero();

  static BoundarySpec affine(const Mat<D>& f, std::vector<BoxFace> faces = all_faces<D>()) {
    return {std::move(faces), f};
  }

  void validate(const BoxMesh<D>& mesh) const {
    if (faces.empty()) throw ConfigError("BoundarySpec: at least one Dirichlet face is required");
    for (const auto& f : faces)
      if (f.axis < 0 || f.axis >= D || (f.side != 0 && f.side != 1))
        throw ConfigError("BoundarySpec: invalid face");
    if (const auto* values = std::get_if<std::vector<Vec<D>>>(&data))
      if (values->size() != mesh.vertex_count()) throw ConfigError("BoundarySpec: per-vertex data size mismatch");
  }

  bool is_affine() const { return std::holds_alternative<Mat<D>>(data); }

  Vec<D> value(const BoxMesh<D>& mesh, int vertex) const {
    if (const auto* f = std::get_if<Mat<D>>(&data)) return (*f) * mesh.points()[vertex];
    return std::get<std::vector<Vec<D>>>(data)[vertex];
  }

  /// Per-vertex flag: true on the Dirichlet part.
  std::vector<bool> constrained(const BoxMesh<D>& mesh) const {
    std::vector<bool> fixed(mesh.vertex_count(), false);
    const int n = mesh.divisions();
    for (std::size_t v = 0; v < fixed.size(); ++v) {
      const auto idx = mesh.lattice_index(static_cast<int>(v));
      for (const auto& f : faces)
        if (idx[f.axis] == (f.side == 0 ? 0 : n)) fixed[v] = true;
    }
    return fixed;
  }
};

/// Dead load density l: constant or per vertex.
template <int D>
struct LoadSpec {
  std::variant<Vec<D>, std::vector<Vec<D>>> density = Vec<D>{};

  static LoadSpec constant(const Vec<D>& l) { return {l}; }

  Vec<D> at(int vertex) const {
    if (const auto* c = std::get_if<Vec<D>>(&density)) return *c;
    return std::get<std::vector<Vec<D>>>(density)[vertex];
  }

  void validate(const BoxMesh<D>& mesh) const {
    if (const auto* values = std::get_if<std::vector<Vec<D>>>(&density)) {
      if (values->size() != mesh.vertex_count()) throw ConfigError("LoadSpec: per-vertex load size mismatch");
      for (const auto& v : *values)
        for (double x : v)
          if (!std::isfinite(x)) throw ConfigError("LoadSpec: non-finite load");
    } else {
      for (double x : std::get<Vec<D>>(density))
        if (!std::isfinite(x)) throw ConfigError("LoadSpec: non-finite load");
    }
  }

  bool is_zero() const {
    if (const auto* c = std::get_if<Vec<D>>(&density))
      return std::all_of(c->begin(), c->end(), [](double x) { return x == 0.0; });
    return false;
  }
};

/// Per-vertex displacement vectors.
template <int D>
struct DisplacementField {
  std::vector<Vec<D>> values;

  static DisplacementField zero(const BoxMesh<D>& mesh) { return {std::vector<Vec<D>>(mesh.vertex_count())}; }

  static DisplacementField affine(const BoxMesh<D>& mesh, const Mat<D>& f) {
    DisplacementField u = zero(mesh);
    for (std::size_t v = 0; v < u.values.size(); ++v) u.values[v] = f * mesh.points()[v];
    return u;
  }

  std::vector<double> flatten() const {
    std::vector<double> x;
    x.reserve(values.size() * D);
    for (const auto& v : values) x.insert(x.end(), v.begin(), v.end());
    return x;
  }

  static DisplacementField unflatten(const std::vector<double>& x) {
    DisplacementField u;
    u.values.resize(x.size() / D);
    for (std::size_t v = 0; v < u.values.size(); ++v)
      for (int i = 0; i < D; ++i) u.values[v][i] = x[v * D + i];
    return u;
  }

  /// Overwrites the Dirichlet part with the boundary data.
  void apply(const BoxMesh<D>& mesh, const BoundarySpec<D>& bc) {
    const auto fixed = bc.constrained(mesh);
    for (std::size_t v = 0; v < values.size(); ++v)
      if (fixed[v]) values[v] = bc.value(mesh, static_cast<int>(v));
  }

  /// max |u - h| over the Dirichlet part.
  double boundary_residual(const BoxMesh<D>& mesh, const BoundarySpec<D>& bc) const {
    const auto fixed = bc.constrained(mesh);
    double r = 0.0;
    for (std::size_t v = 0; v < values.size(); ++v) {
      if (!fixed[v]) continue;
      const Vec<D> h = bc.value(mesh, static_cast<int>(v));
      for (int i = 0; i < D; ++i) r = std::max(r, std::abs(values[v][i] - h[i]));
    }
    return r;
  }
};

/// Constant gradient of a P1 field on one element.
template <int D>
Mat<D> element_gradient(const Element<D>& el, const std::type_identity_t<std::vector<Vec<D>>>& u) {
  Mat<D> diff;  // columns u_k - u_0
  for (int k = 0; k < D; ++k)
    for (int i = 0; i < D; ++i) diff(i, k) = u[el.vertices[k + 1]][i] - u[el.vertices[0]][i];
  return diff * el.inverse_edges;
}

}  // namespace gamma_elastica
