#pragma once

// Limited-memory BFGS with Armijo backtracking over extended-real objectives.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <deque>
#include <functional>
#include <limits>
#include <vector>

namespace gamma_elastica {

struct LbfgsOptions {
  int memory = 10;
  int max_iterations = 5000;
  double gradient_tolerance = 1e-8;  // on the infinity norm of the gradient
  double armijo = 1e-4;
  double backtrack = 0.5;
  int max_backtracks = 60;
  int stall_iterations = 20;  // consecutive iterations without relative progress
};

enum class LbfgsStatus { converged, stalled, iteration_limit, infinite_start };

struct LbfgsResult {
  std::vector<double> x;
  double value = std::numeric_limits<double>::infinity();
  double gradient_norm = std::numeric_limits<double>::infinity();  // infinity norm
  int iterations = 0;
  int evaluations = 0;
  LbfgsStatus status = LbfgsStatus::stalled;
};

/// Objective: returns f(x) (possibly +inf) and writes the gradient when finite.
using Objective = std::function<double(const std::vector<double>&, std::vector<double>&)>;

namespace detail {
inline double dot(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}
inline double inf_norm(const std::vector<double>& a) {
  double s = 0.0;
  for (double x : a) s = std::max(s, std::abs(x));
  return s;
}
}  // namespace detail

/// Steps producing +inf or NaN are rejected by the line search, so iterates
/// never leave the effective domain of the objective.
inline LbfgsResult lbfgs_minimize(const Objective& objective, std::vector<double> x, const LbfgsOptions& opts = {}) {
  using detail::dot;
  using detail::inf_norm;
  const std::size_t n = x.size();
  LbfgsResult out;
  std::vector<double> g(n), g_new(n), x_new(n), d(n);
  double f = objective(x, g);
  out.evaluations = 1;
  if (!std::isfinite(f)) {
    out.x = std::move(x);
    out.value = f;
    out.status = LbfgsStatus::infinite_start;
    return out;
  }

  struct Pair {
    std::vector<double> s, y;
    double rho;
  };
  std::deque<Pair> history;
  int no_progress = 0;
  out.status = LbfgsStatus::iteration_limit;

  for (int it = 0; it < opts.max_iterations; ++it) {
    out.iterations = it;
    const double gnorm = inf_norm(g);
    if (gnorm <= opts.gradient_tolerance) {
      out.status = LbfgsStatus::converged;
      break;
    }

    // Two-loop recursion.
    for (std::size_t i = 0; i < n; ++i) d[i] = -g[i];
    std::vector<double> alpha(history.size());
    for (std::size_t k = history.size(); k-- > 0;) {
      alpha[k] = history[k].rho * dot(history[k].s, d);
      for (std::size_t i = 0; i < n; ++i) d[i] -= alpha[k] * history[k].y[i];
    }
    if (!history.empty()) {
      const auto& last = history.back();
      const double gamma = dot(last.s, last.y) / dot(last.y, last.y);
      for (auto& v : d) v *= gamma;
    } else {
      const double scale = 1.0 / std::max(1.0, gnorm);
      for (auto& v : d) v *= scale;
    }
    for (std::size_t k = 0; k < history.size(); ++k) {
      const double beta = history[k].rho * dot(history[k].y, d);
      for (std::size_t i = 0; i < n; ++i) d[i] += (alpha[k] - beta) * history[k].s[i];
    }

    double slope = dot(g, d);
    if (!(slope < 0.0)) {
      history.clear();
      const double scale = 1.0 / std::max(1.0, gnorm);
      for (std::size_t i = 0; i < n; ++i) d[i] = -g[i] * scale;
      slope = dot(g, d);
    }

    bool accepted = false;
    double step = 1.0, f_new = f;
    for (int attempt = 0; attempt < 2 && !accepted; ++attempt) {
      step = 1.0;
      for (int bt = 0; bt < opts.max_backtracks; ++bt) {
        for (std::size_t i = 0; i < n; ++i) x_new[i] = x[i] + step * d[i];
        f_new = objective(x_new, g_new);
        ++out.evaluations;
        if (std::isfinite(f_new) && f_new <= f + opts.armijo * step * slope) {
          accepted = true;
          break;
        }
        step *= opts.backtrack;
      }
      if (!accepted && !history.empty()) {
        // Retry along steepest descent with a fresh memory.
        history.clear();
        const double scale = 1.0 / std::max(1.0, gnorm);
        for (std::size_t i = 0; i < n; ++i) d[i] = -g[i] * scale;
        slope = dot(g, d);
      } else if (!accepted) {
        break;
      }
    }
    if (!accepted) {
      out.status = LbfgsStatus::stalled;
      break;
    }

    Pair p{std::vector<double>(n), std::vector<double>(n), 0.0};
    for (std::size_t i = 0; i < n; ++i) {
      p.s[i] = x_new[i] - x[i];
      p.y[i] = g_new[i] - g[i];
    }
    const double sy = dot(p.s, p.y);
    if (sy > 1e-12 * std::sqrt(dot(p.s, p.s) * dot(p.y, p.y))) {
      p.rho = 1.0 / sy;
      history.push_back(std::move(p));
      if (static_cast<int>(history.size()) > opts.memory) history.pop_front();
    }

    const double decrease = f - f_new;
    no_progress = decrease <= 1e-15 * std::max(1.0, std::abs(f)) ? no_progress + 1 : 0;
    x.swap(x_new);
    g.swap(g_new);
    f = f_new;
    out.iterations = it + 1;
    if (no_progress >= opts.stall_iterations) {
      out.status = inf_norm(g) <= opts.gradient_tolerance ? LbfgsStatus::converged : LbfgsStatus::stalled;
      break;
    }
  }
  out.gradient_norm = inf_norm(g);
  if (out.status == LbfgsStatus::iteration_limit && out.gradient_norm <= opts.gradient_tolerance)
    out.status = LbfgsStatus::converged;
  out.x = std::move(x);
  out.value = f;
  return out;
}

}  // namespace gamma_elastica
