#pragma once

// JSON descriptors of models and reports, CSV tables, mesh/field export.
// Requires nlohmann/json ("json.hpp") on the include path.

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <ostream>
#include <set>
#include <sstream>
#include <string>
#include <variant>
#include <vector>

#include "json.hpp"

#include "gamma_elastica/convergence.hpp"
#include "gamma_elastica/energy.hpp"
#include "gamma_elastica/errors.hpp"
#include "gamma_elastica/matrix.hpp"
#include "gamma_elastica/mesh.hpp"
#include "gamma_elastica/solver.hpp"

namespace gamma_elastica::io {

using json = nlohmann::json;

#ifdef GAMMA_ELASTICA_VERSION
inline constexpr const char* kVersion = GAMMA_ELASTICA_VERSION;
#else
inline constexpr const char* kVersion = "0.1.0";
#endif

/// FNV-1a, 64 bit.
inline std::uint64_t fnv1a(const std::string& s) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  return h;
}

inline std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

/// Shortest-exact text for a double (%.17g); non-finite values as "+inf", "-inf", "nan".
inline std::string num(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "+inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

/// JSON number, or the string form for non-finite values.
inline json jnum(double x) {
  if (std::isfinite(x)) return x;
  return num(x);
}

// ---------------------------------------------------------------------------
// Schema helpers

inline void reject_unknown(const json& j, const std::set<std::string>& allowed, const std::string& where) {
  if (!j.is_object()) throw ConfigError(where + ": expected an object");
  for (auto it = j.begin(); it != j.end(); ++it)
    if (!allowed.count(it.key())) throw ConfigError(where + ": unknown key '" + it.key() + "'");
}

inline double get_number(const json& j, const std::string& key, const std::string& where) {
  if (!j.contains(key)) throw ConfigError(where + ": missing '" + key + "'");
  if (!j.at(key).is_number()) throw ConfigError(where + ": '" + key + "' must be a number");
  return j.at(key).get<double>();
}

inline double get_number_or(const json& j, const std::string& key, double fallback, const std::string& where) {
  return j.contains(key) ? get_number(j, key, where) : fallback;
}

inline int get_int_or(const json& j, const std::string& key, int fallback, const std::string& where) {
  if (!j.contains(key)) return fallback;
  if (!j.at(key).is_number_integer()) throw ConfigError(where + ": '" + key + "' must be an integer");
  return j.at(key).get<int>();
}

inline std::vector<double> get_numbers(const json& j, const std::string& where) {
  if (!j.is_array()) throw ConfigError(where + ": expected an array of numbers");
  std::vector<double> out;
  for (const auto& x : j) {
    if (!x.is_number()) throw ConfigError(where + ": expected an array of numbers");
    out.push_back(x.get<double>());
  }
  return out;
}

template <int D>
Mat<D> mat_from_json(const json& j, const std::string& where) {
  const auto v = get_numbers(j, where);
  if (v.size() != static_cast<std::size_t>(D * D))
    throw ConfigError(where + ": expected " + std::to_string(D * D) + " entries (row-major)");
  try {
    return Mat<D>::from_row_major(v);
  } catch (const DomainError& e) {
    throw ConfigError(where + ": " + e.what());
  }
}

template <int D>
SymMat<D> sym_from_json(const json& j, const std::string& where) {
  const Mat<D> m = mat_from_json<D>(j, where);
  try {
    return SymMat<D>::from_row_major(std::span<const double>(m.a.data(), m.a.size()));
  } catch (const DomainError& e) {
    throw ConfigError(where + ": " + e.what());
  }
}

template <int D>
json to_json(const Mat<D>& m) {
  json a = json::array();
  for (int i = 0; i < D; ++i)
    for (int j = 0; j < D; ++j) a.push_back(jnum(m(i, j)));
  return a;
}

template <int D>
json to_json(const SymMat<D>& s) {
  return to_json(s.full());
}

// ---------------------------------------------------------------------------
// Models

using AnyModel = std::variant<NematicModel, SyntheticModel<2>, SyntheticModel<3>>;

inline VolumetricLaw volumetric_from_json(const json& j) {
  const std::string where = "model.volumetric";
  reject_unknown(j, {"kind", "coefficients", "barrier"}, where);
  const std::string kind = j.value("kind", "reference");
  if (kind == "reference") {
    if (j.contains("coefficients") || j.contains("barrier"))
      throw ConfigError(where + ": the reference law takes no parameters");
    return VolumetricLaw::reference();
  }
  if (kind == "polynomial") {
    if (!j.contains("coefficients")) throw ConfigError(where + ": polynomial law needs 'coefficients'");
    return VolumetricLaw::polynomial(get_numbers(j.at("coefficients"), where + ".coefficients"),
                                     get_number(j, "barrier", where));
  }
  throw ConfigError(where + ": unknown kind '" + kind + "'");
}

inline json to_json(const VolumetricLaw& v) {
  if (v.kind() == VolumetricLaw::Kind::reference) return {{"kind", "reference"}};
  return {{"kind", "polynomial"}, {"coefficients", v.coefficients()}, {"barrier", v.barrier()}};
}

template <int D>
SyntheticModel<D> synthetic_from_json(const json& j) {
  std::vector<SymMat<D>> wells;
  if (j.contains("wells")) {
    if (!j.at("wells").is_array()) throw ConfigError("model.wells: expected an array of matrices");
    for (std::size_t k = 0; k < j.at("wells").size(); ++k)
      wells.push_back(sym_from_json<D>(j.at("wells")[k], "model.wells[" + std::to_string(k) + "]"));
  } else {
    wells.push_back(SymMat<D>::zero());
  }
  try {
    return SyntheticModel<D>(WellFamily<D>::finite(std::move(wells)), get_number_or(j, "p", 1.5, "model"),
                             get_number_or(j, "c", 1.0, "model"));
  } catch (const DomainError& e) {
    throw ConfigError(std::string("model: ") + e.what());
  }
}

inline AnyModel model_from_json(const json& j) {
  if (!j.is_object()) throw ConfigError("model: expected an object");
  const std::string kind = j.value("kind", "");
  if (kind == "nematic") {
    reject_unknown(j, {"kind", "mu", "volumetric"}, "model");
    const VolumetricLaw vol = j.contains("volumetric") ? volumetric_from_json(j.at("volumetric")) : VolumetricLaw::reference();
    return NematicModel(get_number_or(j, "mu", 1.0, "model"), vol);
  }
  if (kind == "synthetic") {
    reject_unknown(j, {"kind", "dim", "p", "c", "wells"}, "model");
    const int dim = get_int_or(j, "dim", 3, "model");
    if (dim == 2) return synthetic_from_json<2>(j);
    if (dim == 3) return synthetic_from_json<3>(j);
    throw ConfigError("model: dim must be 2 or 3");
  }
  throw ConfigError("model: 'kind' must be \"nematic\" or \"synthetic\"");
}

inline json to_json(const NematicModel& m) {
  return {{"kind", "nematic"}, {"mu", m.mu}, {"volumetric", to_json(m.vol)}};
}

template <int D>
json to_json(const SyntheticModel<D>& m) {
  json wells = json::array();
  for (const auto& w : m.wells_family.finite_wells()) wells.push_back(to_json(w));
  return {{"kind", "synthetic"}, {"dim", D}, {"p", m.p}, {"c", m.c}, {"wells", wells}};
}

inline json to_json(const AnyModel& m) {
  return std::visit([](const auto& x) { return to_json(x); }, m);
}

// ---------------------------------------------------------------------------
// Reports

inline json header_json(const std::string& config_hash) {
  return {{"artifact", "gamma-elastica"}, {"version", kVersion}, {"config_hash", config_hash}};
}

inline void write_csv_header(std::ostream& os, const std::string& config_hash) {
  os << "# gamma-elastica " << kVersion << "\n# config-hash " << config_hash << "\n";
}

inline json to_json(const ConvergenceReport& r) {
  json rows = json::array();
  for (const auto& row : r.rows)
    rows.push_back({{"eps", jnum(row.eps)}, {"value", jnum(row.value)}, {"target", jnum(row.target)},
                    {"error", jnum(row.error)}});
  return {{"kind", r.kind},           {"rows", rows},           {"rate", jnum(r.rate)},
          {"inversions", r.inversions}, {"monotone", r.monotone}, {"passed", r.passed}};
}

inline void write_csv(std::ostream& os, const ConvergenceReport& r) {
  os << "eps,value,target,error\n";
  for (const auto& row : r.rows)
    os << num(row.eps) << ',' << num(row.value) << ',' << num(row.target) << ',' << num(row.error) << '\n';
}

inline json to_json(const CoercivityReport& r) {
  json rows = json::array();
  for (const auto& row : r.rows)
    rows.push_back({{"eps", jnum(row.eps)},
                    {"c_min", jnum(row.c_min)},
                    {"argmin", to_json(row.argmin)},
                    {"argmin_distance", jnum(row.argmin_distance)},
                    {"samples", row.samples},
                    {"near", row.near},
                    {"mid", row.mid},
                    {"far", row.far}});
  return {{"kind", "coercivity"}, {"p", jnum(r.p)}, {"c_min", jnum(r.c_min)}, {"rows", rows}};
}

inline void write_csv(std::ostream& os, const CoercivityReport& r) {
  os << "eps,c_min,argmin_distance,samples\n";
  for (const auto& row : r.rows)
    os << num(row.eps) << ',' << num(row.c_min) << ',' << num(row.argmin_distance) << ',' << row.samples << '\n';
}

inline json to_json(const QuadraticBound& b) {
  return {{"kind", "quadratic_bound"},         {"c1", jnum(b.c1)},
          {"c2", jnum(b.c2)},                  {"verified", b.verified},
          {"worst_margin", jnum(b.worst_margin)}, {"verification_points", b.verification_points}};
}

inline const char* status_name(LbfgsStatus s) {
  switch (s) {
    case LbfgsStatus::converged:
      return "converged";
    case LbfgsStatus::stalled:
      return "stalled";
    case LbfgsStatus::iteration_limit:
      return "iteration_limit";
    case LbfgsStatus::infinite_start:
      return "infinite_start";
  }
  return "unknown";
}

inline json to_json(const SweepCellReport& c) {
  json j = {{"eps", jnum(c.eps)},
            {"mesh_n", c.mesh_n},
            {"m_eps", jnum(c.m_eps)},
            {"m", jnum(c.m)},
            {"gap", jnum(c.gap)},
            {"relative_gap", jnum(c.relative_gap)},
            {"iterations", c.iterations},
            {"gradient_norm", jnum(c.gradient_norm)},
            {"grad_lp", jnum(c.grad_lp)},
            {"field_distance_lp", jnum(c.field_distance_lp)},
            {"gradient_distance_lp", jnum(c.gradient_distance_lp)},
            {"converged", c.converged},
            {"relaxed_converged", c.relaxed_converged}};
  if (!c.error.empty()) j["error"] = c.error;
  return j;
}

inline json to_json(const SweepReport& r) {
  json cells = json::array();
  for (const auto& c : r.cells) cells.push_back(to_json(c));
  return {{"p", jnum(r.p)},
          {"cells", cells},
          {"gap_decreasing", r.gap_decreasing},
          {"relative_gap_decreasing", r.relative_gap_decreasing}};
}

inline json to_json(const StrongConvergenceReport& r) {
  json seq = json::array();
  for (std::size_t k = 0; k < r.eps.size(); ++k)
    seq.push_back({{"eps", jnum(r.eps[k])}, {"gradient_distance", jnum(r.gradient_distance[k])}});
  return {{"sequence", seq},
          {"hypothesis_asserted", r.hypothesis_asserted},
          {"decay_holds", r.decay_holds},
          {"passed", r.passed},
          {"observed_rate", jnum(r.observed_rate)}};
}

inline void write_csv(std::ostream& os, const SweepReport& r) {
  os << "eps,mesh_n,m_eps,m,gap,relative_gap,iterations,grad_lp,field_distance_lp,gradient_distance_lp,converged,"
        "error\n";
  for (const auto& c : r.cells) {
    std::string err = c.error;
    for (char& ch : err)
      if (ch == ',' || ch == '\n') ch = ';';
    os << num(c.eps) << ',' << c.mesh_n << ',' << num(c.m_eps) << ',' << num(c.m) << ',' << num(c.gap) << ','
       << num(c.relative_gap) << ',' << c.iterations << ',' << num(c.grad_lp) << ',' << num(c.field_distance_lp)
       << ',' << num(c.gradient_distance_lp) << ',' << (c.converged ? 1 : 0) << ',' << err << '\n';
  }
}

/// Two-column plot table: eps, gap.
inline void write_gap_csv(std::ostream& os, const SweepReport& r) {
  os << "eps,gap\n";
  for (const auto& c : r.cells) os << num(c.eps) << ',' << num(c.gap) << '\n';
}

/// Point cloud: vertex coordinates followed by displacement components.
template <int D>
void write_field_csv(std::ostream& os, const BoxMesh<D>& mesh, const DisplacementField<D>& u) {
  static const char* axes[] = {"x", "y", "z"};
  for (int i = 0; i < D; ++i) os << axes[i] << ',';
  for (int i = 0; i < D; ++i) os << 'u' << axes[i] << (i + 1 < D ? "," : "\n");
  for (std::size_t v = 0; v < mesh.vertex_count(); ++v) {
    for (int i = 0; i < D; ++i) os << num(mesh.points()[v][i]) << ',';
    for (int i = 0; i < D; ++i) os << num(u.values[v][i]) << (i + 1 < D ? "," : "\n");
  }
}

}  // namespace gamma_elastica::io
