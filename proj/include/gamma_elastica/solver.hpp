#pragma once

// Multi-start minimization of the discrete functionals, epsilon sweeps and
// the strong-convergence diagnostic.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "gamma_elastica/errors.hpp"
#include "gamma_elastica/functional.hpp"
#include "gamma_elastica/lbfgs.hpp"
#include "gamma_elastica/limit.hpp"
#include "gamma_elastica/mesh.hpp"
#include "gamma_elastica/parallel.hpp"
#include "gamma_elastica/random.hpp"

namespace gamma_elastica {

struct MinimizeOptions {
  double tol = 1e-8;          // projected-gradient infinity norm
  int starts = 5;             // start 0 is the affine extension itself
  double perturbation = 0.25; // start amplitude, in units of the mesh spacing
  std::uint64_t seed = kDefaultSeed;
  int max_iterations = 5000;
  int memory = 10;
};

struct StartReport {
  double start_value = kInfinity;
  double value = kInfinity;
  double gradient_norm = kInfinity;
  int iterations = 0;
  LbfgsStatus status = LbfgsStatus::stalled;
};

template <int D>
struct MinimizeResult {
  DisplacementField<D> u;
  double value = kInfinity;
  double gradient_norm = kInfinity;
  int iterations = 0;
  int best_start = -1;
  bool converged = false;  // the best start met the tolerance
  std::vector<StartReport> starts;

  /// Throws NoDescent when every start stalled above the tolerance.
  const MinimizeResult& require_converged() const {
    const bool any = std::any_of(starts.begin(), starts.end(),
                                 [](const StartReport& s) { return s.status == LbfgsStatus::converged; });
    if (!any) throw NoDescent("minimize: all starts stalled above tolerance (best value " + std::to_string(value) + ")");
    return *this;
  }
};

/// Affine extension of the boundary data: F x for affine data, otherwise the
/// least-squares affine fit of the Dirichlet values.
template <int D>
DisplacementField<D> affine_extension(const BoxMesh<D>& mesh, const BoundarySpec<D>& bc) {
  if (const auto* f = std::get_if<Mat<D>>(&bc.data)) return DisplacementField<D>::affine(mesh, *f);
  const auto fixed = bc.constrained(mesh);
  constexpr int K = D + 1;
  std::array<std::array<double, K>, K> normal{};
  std::array<Vec<D>, K> rhs{};
  for (std::size_t v = 0; v < fixed.size(); ++v) {
    if (!fixed[v]) continue;
    std::array<double, K> phi;
    for (int i = 0; i < D; ++i) phi[i] = mesh.points()[v][i];
    phi[D] = 1.0;
    const Vec<D> h = bc.value(mesh, static_cast<int>(v));
    for (int a = 0; a < K; ++a) {
      for (int b = 0; b < K; ++b) normal[a][b] += phi[a] * phi[b];
      for (int i = 0; i < D; ++i) rhs[a][i] += phi[a] * h[i];
    }
  }
  // Gauss-Jordan with partial pivoting; a single face leaves the normal matrix
  // singular, in which case the fit degrades to the mean value.
  std::array<Vec<D>, K> coef{};
  bool singular = false;
  for (int c = 0; c < K && !singular; ++c) {
    int piv = c;
    for (int r = c + 1; r < K; ++r)
      if (std::abs(normal[r][c]) > std::abs(normal[piv][c])) piv = r;
    if (std::abs(normal[piv][c]) < 1e-12) {
      singular = true;
      break;
    }
    std::swap(normal[c], normal[piv]);
    std::swap(rhs[c], rhs[piv]);
    for (int r = 0; r < K; ++r) {
      if (r == c) continue;
      const double m = normal[r][c] / normal[c][c];
      for (int b = 0; b < K; ++b) normal[r][b] -= m * normal[c][b];
      for (int i = 0; i < D; ++i) rhs[r][i] -= m * rhs[c][i];
    }
  }
  DisplacementField<D> u = DisplacementField<D>::zero(mesh);
  if (!singular) {
    for (int a = 0; a < K; ++a)
      for (int i = 0; i < D; ++i) coef[a][i] = rhs[a][i] / normal[a][a];
    for (std::size_t v = 0; v < u.values.size(); ++v)
      for (int i = 0; i < D; ++i) {
        double s = coef[D][i];
        for (int k = 0; k < D; ++k) s += coef[k][i] * mesh.points()[v][k];
        u.values[v][i] = s;
      }
  } else {
    Vec<D> mean{};
    int count = 0;
    for (std::size_t v = 0; v < fixed.size(); ++v) {
      if (!fixed[v]) continue;
      const Vec<D> h = bc.value(mesh, static_cast<int>(v));
      for (int i = 0; i < D; ++i) mean[i] += h[i];
      ++count;
    }
    for (auto& x : mean) x /= std::max(count, 1);
    for (auto& val : u.values) val = mean;
  }
  u.apply(mesh, bc);
  return u;
}

/// Field objective: value and nodal gradient of a displacement field.
template <int D>
using FieldObjective = std::function<FieldEval<D>(const DisplacementField<D>&)>;

/// Minimizes `objective` over fields satisfying `bc` (free DOFs only).
/// Start 0 is the affine extension of the data; the remaining starts add
/// seeded perturbations. The best result is selected by (value, start index).
template <int D>
MinimizeResult<D> minimize(const FieldObjective<D>& objective, const BoxMesh<D>& mesh, const BoundarySpec<D>& bc,
                           const MinimizeOptions& opts = {}) {
  bc.validate(mesh);
  const auto fixed = bc.constrained(mesh);
  std::vector<std::size_t> free_dofs;
  for (std::size_t v = 0; v < fixed.size(); ++v)
    if (!fixed[v])
      for (int i = 0; i < D; ++i) free_dofs.push_back(v * D + i);

  const DisplacementField<D> base = affine_extension(mesh, bc);
  const std::vector<double> base_flat = base.flatten();

  auto expand = [&](const std::vector<double>& x) {
    std::vector<double> full = base_flat;
    for (std::size_t k = 0; k < free_dofs.size(); ++k) full[free_dofs[k]] = x[k];
    return DisplacementField<D>::unflatten(full);
  };
  Objective reduced = [&](const std::vector<double>& x, std::vector<double>& g) {
    const FieldEval<D> e = objective(expand(x));
    if (std::isfinite(e.value)) {
      g.resize(free_dofs.size());
      for (std::size_t k = 0; k < free_dofs.size(); ++k) g[k] = e.gradient[free_dofs[k]];
    }
    return e.value;
  };

  LbfgsOptions lopts;
  lopts.gradient_tolerance = opts.tol;
  lopts.max_iterations = opts.max_iterations;
  lopts.memory = opts.memory;

  const int starts = std::max(1, opts.starts);
  std::vector<LbfgsResult> results(static_cast<std::size_t>(starts));
  std::vector<StartReport> reports(static_cast<std::size_t>(starts));
  parallel_for(static_cast<std::size_t>(starts), [&](std::size_t s) {
    std::vector<double> x0(free_dofs.size());
    for (std::size_t k = 0; k < free_dofs.size(); ++k) x0[k] = base_flat[free_dofs[k]];
    std::vector<double> g;
    double start_value = reduced(x0, g);
    if (s > 0) {
      Rng rng(opts.seed + 0x9E3779B97F4A7C15ull * s);
      std::vector<double> noise(x0.size());
      for (auto& z : noise) z = rng.normal();
      double amplitude = opts.perturbation * mesh.spacing();
      for (int shrink = 0; shrink < 20; ++shrink, amplitude *= 0.5) {
        std::vector<double> trial = x0;
        for (std::size_t k = 0; k < trial.size(); ++k) trial[k] += amplitude * noise[k];
        const double v = reduced(trial, g);
        if (std::isfinite(v)) {
          x0 = std::move(trial);
          start_value = v;
          break;
        }
      }
    }
    if (free_dofs.empty()) {
      results[s].x = x0;
      results[s].value = start_value;
      results[s].gradient_norm = 0.0;
      results[s].status = std::isfinite(start_value) ? LbfgsStatus::converged : LbfgsStatus::infinite_start;
    } else {
      results[s] = lbfgs_minimize(reduced, x0, lopts);
    }
    reports[s] = {start_value, results[s].value, results[s].gradient_norm, results[s].iterations, results[s].status};
  });

  int best = -1;
  for (int s = 0; s < starts; ++s) {
    if (!std::isfinite(results[s].value)) continue;
    if (best < 0 || results[s].value < results[best].value) best = s;
  }
  if (best < 0) throw OptimizerFailure("minimize: every start evaluated to +inf");

  MinimizeResult<D> out;
  out.u = expand(results[best].x);
  out.value = results[best].value;
  out.gradient_norm = results[best].gradient_norm;
  out.iterations = results[best].iterations;
  out.best_start = best;
  out.converged = results[best].status == LbfgsStatus::converged;
  out.starts = std::move(reports);
  return out;
}

template <class Model, int D = Model::dim>
MinimizeResult<D> minimize_eps(const Model& model, double eps, const BoxMesh<D>& mesh, const BoundarySpec<D>& bc,
                               const LoadSpec<D>& load, const MinimizeOptions& opts = {}) {
  load.validate(mesh);
  FieldObjective<D> obj = [&](const DisplacementField<D>& u) {
    return energy_eps_with_gradient(mesh, u, model, eps, load);
  };
  return minimize<D>(obj, mesh, bc, opts);
}

template <class Limit, int D = Limit::dim>
MinimizeResult<D> minimize_relaxed(const Limit& limit, const BoxMesh<D>& mesh, const BoundarySpec<D>& bc,
                                   const LoadSpec<D>& load, const MinimizeOptions& opts = {}) {
  load.validate(mesh);
  FieldObjective<D> obj = [&](const DisplacementField<D>& u) {
    return energy_relaxed_with_gradient(mesh, u, limit, load);
  };
  return minimize<D>(obj, mesh, bc, opts);
}

// ---------------------------------------------------------------------------
// Sweeps

struct SweepCell {
  double eps = 0.1;
  int mesh_n = 4;
};

struct SweepCellReport {
  double eps = 0.0;
  int mesh_n = 0;
  double m_eps = kInfinity;
  double m = kInfinity;
  double gap = kInfinity;           // |m_eps - m|
  double relative_gap = kInfinity;  // gap / |m|, +inf when m = 0
  int iterations = 0;
  double gradient_norm = kInfinity;       // stationarity of the eps solve
  double grad_lp = kInfinity;             // ||grad u_eps||_{L^p}
  double field_distance_lp = kInfinity;   // ||u_eps - u||_{L^p}
  double gradient_distance_lp = kInfinity;// ||grad u_eps - grad u||_{L^p}
  bool converged = false;
  bool relaxed_converged = false;
  std::string error;  // nonempty when the cell failed
};

struct SweepReport {
  double p = 1.5;
  std::vector<SweepCellReport> cells;
  bool gap_decreasing = false;           // absolute gap, strictly along the schedule
  bool relative_gap_decreasing = false;  // only meaningful when m != 0

  bool all_cells_ok() const {
    return std::all_of(cells.begin(), cells.end(), [](const SweepCellReport& c) { return c.error.empty(); });
  }
};

namespace detail {
inline bool strictly_decreasing(const std::vector<double>& v) {
  if (v.size() < 2) return !v.empty() && std::isfinite(v.front());
  for (std::size_t k = 1; k < v.size(); ++k)
    if (!(v[k] < v[k - 1])) return false;
  return true;
}
}  // namespace detail

/// Called once per successful cell with (cell index, mesh, eps solution, relaxed solution).
template <int D>
struct SweepObserver {
  using Callback = std::function<void(std::size_t, const BoxMesh<D>&, const MinimizeResult<D>&, const MinimizeResult<D>&)>;
};

/// m (relaxed, once per mesh) and m_eps per schedule cell, with field distances.
/// Per-cell solver errors are recorded and the sweep continues.
template <class Model, class Limit, int D = Model::dim>
SweepReport epsilon_sweep(const std::vector<SweepCell>& schedule, const Model& model, const Limit& limit,
                          const BoundarySpec<D>& bc, const LoadSpec<D>& load, const MinimizeOptions& opts = {},
                          const typename SweepObserver<D>::Callback& observer = {}) {
  if constexpr (std::is_same_v<Limit, NematicLimit>) {
    if (!limit.params.lambda_nonnegative())
      throw ConfigError("epsilon_sweep: relaxed target requires lambda >= 0");
  }
  SweepReport report;
  report.p = model.coercivity_exponent();
  struct Relaxed {
    MinimizeResult<D> result;
  };
  std::map<int, Relaxed> relaxed_cache;

  for (const SweepCell& cell : schedule) {
    SweepCellReport r;
    r.eps = cell.eps;
    r.mesh_n = cell.mesh_n;
    try {
      const BoxMesh<D> mesh(cell.mesh_n);
      auto it = relaxed_cache.find(cell.mesh_n);
      if (it == relaxed_cache.end())
        it = relaxed_cache.emplace(cell.mesh_n, Relaxed{minimize_relaxed(limit, mesh, bc, load, opts)}).first;
      const MinimizeResult<D>& rel = it->second.result;
      r.m = rel.value;
      r.relaxed_converged = rel.converged;

      const MinimizeResult<D> sol = minimize_eps(model, cell.eps, mesh, bc, load, opts);
      r.m_eps = sol.value;
      r.iterations = sol.iterations;
      r.gradient_norm = sol.gradient_norm;
      r.converged = sol.converged;
      r.gap = std::abs(r.m_eps - r.m);
      r.relative_gap = r.m != 0.0 ? r.gap / std::abs(r.m) : kInfinity;
      r.grad_lp = gradient_lp_norm(mesh, sol.u, report.p);
      r.field_distance_lp = field_lp_distance(mesh, sol.u, rel.u, report.p);
      r.gradient_distance_lp = gradient_lp_distance(mesh, sol.u, rel.u, report.p);
      if (observer) observer(report.cells.size(), mesh, sol, rel);
    } catch (const std::exception& e) {
      r.error = e.what();
    }
    report.cells.push_back(std::move(r));
  }

  std::vector<double> gaps, rel;
  for (const auto& c : report.cells) {
    gaps.push_back(c.error.empty() ? c.gap : kInfinity);
    rel.push_back(c.error.empty() ? c.relative_gap : kInfinity);
  }
  report.gap_decreasing = report.all_cells_ok() && detail::strictly_decreasing(gaps);
  report.relative_gap_decreasing = report.all_cells_ok() && detail::strictly_decreasing(rel);
  return report;
}

struct StrongConvergenceReport {
  std::vector<double> eps;
  std::vector<double> gradient_distance;  // ||grad u_eps - grad u||_{L^p}
  bool hypothesis_asserted = false;       // user-asserted uniform strict quasiconvexity
  bool decay_holds = false;               // nonincreasing and final below first
  bool passed = true;                     // decay_holds, when asserted
  double observed_rate = 0.0;             // log-log slope against eps
};

/// Reports the decay sequence; the decay is asserted only under the flag.
inline StrongConvergenceReport strong_convergence_diagnostic(const SweepReport& sweep, bool hypothesis_asserted) {
  StrongConvergenceReport out;
  out.hypothesis_asserted = hypothesis_asserted;
  for (const auto& c : sweep.cells) {
    out.eps.push_back(c.eps);
    out.gradient_distance.push_back(c.error.empty() ? c.gradient_distance_lp : kInfinity);
  }
  const auto& g = out.gradient_distance;
  bool monotone = !g.empty();
  for (std::size_t k = 1; k < g.size(); ++k)
    if (!(g[k] <= g[k - 1])) monotone = false;
  out.decay_holds = monotone && g.size() >= 2 && g.back() < g.front();
  if (g.size() >= 2 && g.front() > 0.0 && g.back() > 0.0 && std::isfinite(g.front()) && std::isfinite(g.back()))
    out.observed_rate = std::log(g.front() / g.back()) / std::log(out.eps.front() / out.eps.back());
  out.passed = !hypothesis_asserted || out.decay_holds;
  return out;
}

}  // namespace gamma_elastica
