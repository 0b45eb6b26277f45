#pragma once

// Command-line front end: `eval`, `scan` and `sweep` driven by a JSON config.
// Requires CLI11 ("CLI11.hpp") and nlohmann/json ("json.hpp") on the include path.
//
// Exit codes: 0 pass, 1 assertion failure, 2 configuration error, 3 runtime error.

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "gamma_elastica/convergence.hpp"
#include "gamma_elastica/energy.hpp"
#include "gamma_elastica/errors.hpp"
#include "gamma_elastica/io.hpp"
#include "gamma_elastica/limit.hpp"
#include "gamma_elastica/mesh.hpp"
#include "gamma_elastica/parallel.hpp"
#include "gamma_elastica/solver.hpp"

namespace gamma_elastica::cli {

using io::json;

enum ExitCode : int { kPass = 0, kAssertionFailed = 1, kConfigFailure = 2, kRuntimeFailure = 3 };

struct Overrides {
  std::optional<double> eps;
  std::optional<int> mesh_n;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out;
  std::optional<int> threads;
  bool dry_run = false;
};

/// Files to write, keyed by name relative to the output directory. Nothing
/// is written until a command has completed.
struct Outputs {
  std::map<std::string, std::string> files;
  std::string stdout_text;
  std::vector<std::string> failures;
};

struct RunConfig {
  std::string command;
  json document;   // effective config after overrides
  json canonical;  // the document without output location; hashed and echoed into reports
  io::AnyModel model;
  std::uint64_t seed = kDefaultSeed;
  std::optional<std::string> out_dir;
  std::string hash;

  const json& section() const { return document.at(command); }
};

// ---------------------------------------------------------------------------
// Config parsing

inline EpsSchedule schedule_from_json(const json& j, const std::string& where) {
  if (j.is_array()) return EpsSchedule(io::get_numbers(j, where));
  io::reject_unknown(j, {"values", "first", "ratio", "count"}, where);
  if (j.contains("values")) return EpsSchedule(io::get_numbers(j.at("values"), where + ".values"));
  return EpsSchedule::geometric(io::get_number_or(j, "first", 0.2, where), io::get_number_or(j, "ratio", 0.5, where),
                                io::get_int_or(j, "count", 8, where));
}

inline ConvergenceCriteria criteria_from_json(const json& j, const std::string& where) {
  ConvergenceCriteria c;
  if (j.is_null()) return c;
  io::reject_unknown(j, {"max_inversions", "inversion_tolerance", "min_rate", "final_error_bound", "error_floor"}, where);
  c.max_inversions = io::get_int_or(j, "max_inversions", c.max_inversions, where);
  c.inversion_tolerance = io::get_number_or(j, "inversion_tolerance", c.inversion_tolerance, where);
  c.min_rate = io::get_number_or(j, "min_rate", c.min_rate, where);
  c.final_error_bound = io::get_number_or(j, "final_error_bound", c.final_error_bound, where);
  c.error_floor = io::get_number_or(j, "error_floor", c.error_floor, where);
  if (!(c.error_floor >= 0.0)) throw ConfigError(where + ".error_floor: must be >= 0");
  return c;
}

template <int D>
CompactGrid<D> grid_from_json(const json& j, std::uint64_t seed, const std::string& where) {
  io::reject_unknown(j, {"radius", "random_points"}, where);
  return CompactGrid<D>::build(io::get_number_or(j, "radius", 1.0, where),
                               io::get_int_or(j, "random_points", 200, where), seed);
}

template <int D>
BoundarySpec<D> boundary_from_json(const json& j, const std::string& where) {
  io::reject_unknown(j, {"faces", "F"}, where);
  BoundarySpec<D> bc;
  if (j.contains("faces") && !(j.at("faces").is_string() && j.at("faces") == "all")) {
    if (!j.at("faces").is_array()) throw ConfigError(where + ".faces: expected \"all\" or a list of faces");
    bc.faces.clear();
    for (const auto& f : j.at("faces")) {
      io::reject_unknown(f, {"axis", "side"}, where + ".faces");
      bc.faces.push_back({io::get_int_or(f, "axis", -1, where + ".faces"), io::get_int_or(f, "side", -1, where + ".faces")});
    }
  }
  bc.data = j.contains("F") ? io::mat_from_json<D>(j.at("F"), where + ".F") : Mat<D>::zero();
  if (bc.faces.empty()) throw ConfigError(where + ": at least one Dirichlet face is required");
  for (const auto& f : bc.faces)
    if (f.axis < 0 || f.axis >= D || (f.side != 0 && f.side != 1)) throw ConfigError(where + ": invalid face");
  return bc;
}

template <int D>
LoadSpec<D> load_from_json(const json& j, const std::string& where) {
  if (j.is_null()) return {};
  const auto v = io::get_numbers(j, where);
  if (v.size() != static_cast<std::size_t>(D)) throw ConfigError(where + ": expected " + std::to_string(D) + " entries");
  Vec<D> l;
  for (int i = 0; i < D; ++i) l[i] = v[i];
  return LoadSpec<D>::constant(l);
}

inline int model_dim(const io::AnyModel& m) {
  return std::visit([](const auto& x) { return std::decay_t<decltype(x)>::dim; }, m);
}

/// Parses and validates the whole document; throws ConfigError.
inline RunConfig parse_config(const std::string& text, const std::string& subcommand, const Overrides& ov) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config: malformed JSON: ") + e.what());
  }
  io::reject_unknown(doc, {"command", "model", "seed", "output", "threads", "eval", "scan", "sweep"}, "config");
  RunConfig cfg;
  cfg.command = doc.value("command", subcommand);
  if (!subcommand.empty() && cfg.command != subcommand)
    throw ConfigError("config: 'command' is \"" + cfg.command + "\" but the subcommand is \"" + subcommand + "\"");
  if (cfg.command != "eval" && cfg.command != "scan" && cfg.command != "sweep")
    throw ConfigError("config: command must be eval, scan or sweep");
  doc["command"] = cfg.command;
  if (!doc.contains(cfg.command)) doc[cfg.command] = json::object();
  for (const char* other : {"eval", "scan", "sweep"})
    if (cfg.command != other && doc.contains(other))
      throw ConfigError(std::string("config: section '") + other + "' does not belong to command " + cfg.command);
  if (!doc.contains("model")) throw ConfigError("config: missing 'model'");
  cfg.model = io::model_from_json(doc.at("model"));

  if (doc.contains("seed")) {
    if (!doc.at("seed").is_number_unsigned()) throw ConfigError("config: 'seed' must be a nonnegative integer");
    cfg.seed = doc.at("seed").get<std::uint64_t>();
  }
  if (ov.seed) cfg.seed = *ov.seed;
  doc["seed"] = cfg.seed;

  if (doc.contains("threads")) {
    if (!doc.at("threads").is_number_integer() || doc.at("threads").get<int>() < 1)
      throw ConfigError("config: 'threads' must be a positive integer");
  }
  // Thread count does not change results, so it is kept out of the hash.
  doc.erase("threads");

  if (doc.contains("output")) {
    io::reject_unknown(doc.at("output"), {"dir"}, "config.output");
    if (!doc.at("output").contains("dir") || !doc.at("output").at("dir").is_string())
      throw ConfigError("config.output: 'dir' must be a string");
    cfg.out_dir = doc.at("output").at("dir").get<std::string>();
  }
  if (ov.out) cfg.out_dir = *ov.out;
  if (cfg.out_dir) doc["output"] = {{"dir", *cfg.out_dir}};
  if (cfg.command != "eval" && !cfg.out_dir) {
    cfg.out_dir = "gamma_elastica_out";
    doc["output"] = {{"dir", *cfg.out_dir}};
  }

  json& sec = doc[cfg.command];
  if (!sec.is_object()) throw ConfigError("config: section '" + cfg.command + "' must be an object");
  if (ov.eps) {
    if (!(*ov.eps > 0.0)) throw ConfigError("--eps must be positive");
    if (cfg.command == "eval") sec["eps"] = *ov.eps;
    if (cfg.command == "scan") sec["schedule"] = json::array({*ov.eps});
    if (cfg.command == "sweep" && sec.contains("cells") && sec.at("cells").is_array())
      for (auto& c : sec["cells"])
        if (c.is_object()) c["eps"] = *ov.eps;
  }
  if (ov.mesh_n) {
    if (cfg.command != "sweep") throw ConfigError("--mesh-n applies to sweep only");
    if (sec.contains("cells") && sec.at("cells").is_array())
      for (auto& c : sec["cells"])
        if (c.is_object()) c["mesh_n"] = *ov.mesh_n;
  }
  cfg.document = doc;
  // Where results go does not change them either.
  cfg.canonical = doc;
  cfg.canonical.erase("output");
  cfg.hash = io::hex64(io::fnv1a(cfg.canonical.dump()));
  return cfg;
}

// ---------------------------------------------------------------------------
// eval

template <class Model>
json eval_one(const Model& model, double eps, const Mat<Model::dim>& f, const json& limit_override) {
  constexpr int D = Model::dim;
  json r;
  r["F"] = io::to_json(f);
  r["det"] = io::jnum(det(f));
  r["W"] = io::jnum(energy(model, eps, f));
  r["V_eps"] = io::jnum(rescaled_density(model, eps, symmetrize(f)));
  if constexpr (std::is_same_v<Model, NematicModel>) {
    NematicLimit lim = limit_of(model);
    if (!limit_override.is_null()) {
      io::reject_unknown(limit_override, {"mu", "lambda"}, "eval.limit");
      lim.params = LimitParams(io::get_number_or(limit_override, "mu", lim.params.mu, "eval.limit"),
                               io::get_number_or(limit_override, "lambda", lim.params.lambda, "eval.limit"));
    }
    r["V"] = io::jnum(lim.value(symmetrize(f)));
    r["f"] = io::jnum(f_limit(lim.params, f));
    r["fqc"] = io::jnum(fqc(lim.params, f));
    r["lambda"] = io::jnum(lim.params.lambda);
  } else {
    if (!limit_override.is_null()) throw ConfigError("eval.limit: only the nematic model takes limit overrides");
    const WellLimit<D> lim = limit_of(model);
    r["V"] = io::jnum(lim.value(symmetrize(f)));
    r["f"] = r["V"];
    r["fqc"] = lim.convex() ? io::jnum(lim.relaxed(f)) : json(nullptr);  // multiwell envelope has no closed form
  }
  return r;
}

inline void cmd_eval(const RunConfig& cfg, Outputs& out, bool dry = false) {
  const json& sec = cfg.section();
  io::reject_unknown(sec, {"eps", "matrices", "limit"}, "eval");
  const double eps = io::get_number_or(sec, "eps", 0.1, "eval");
  if (!(eps > 0.0)) throw ConfigError("eval: eps must be positive");
  if (!sec.contains("matrices") || !sec.at("matrices").is_array() || sec.at("matrices").empty())
    throw ConfigError("eval: 'matrices' must be a nonempty list");
  const json limit_override = sec.value("limit", json(nullptr));
  json results = json::array();
  std::visit(
      [&](const auto& model) {
        constexpr int D = std::decay_t<decltype(model)>::dim;
        std::vector<Mat<D>> mats;
        for (std::size_t k = 0; k < sec.at("matrices").size(); ++k)
          mats.push_back(io::mat_from_json<D>(sec.at("matrices")[k], "eval.matrices[" + std::to_string(k) + "]"));
        if (dry) {
          if (!limit_override.is_null()) eval_one(model, eps, Mat<D>::identity(), limit_override);
          return;
        }
        for (const auto& f : mats) results.push_back(eval_one(model, eps, f, limit_override));
      },
      cfg.model);
  json report = {{"header", io::header_json(cfg.hash)},
                 {"model", io::to_json(cfg.model)},
                 {"eps", eps},
                 {"results", results}};
  if (dry) return;
  const std::string text = report.dump(2) + "\n";
  out.stdout_text = text;
  if (cfg.out_dir) out.files["eval.json"] = text;
}

// ---------------------------------------------------------------------------
// scan

inline std::string csv_with_header(const std::string& hash, const std::string& body) {
  std::ostringstream os;
  io::write_csv_header(os, hash);
  os << body;
  return os.str();
}

template <class R>
std::string csv_of(const std::string& hash, const R& report) {
  std::ostringstream os;
  io::write_csv(os, report);
  return csv_with_header(hash, os.str());
}

inline void failure_rows(const ConvergenceReport& r, const ConvergenceCriteria& c, Outputs& out) {
  if (r.passed) return;
  std::ostringstream os;
  os << r.kind << ": monotone=" << (r.monotone ? 1 : 0) << " inversions=" << r.inversions << " rate=" << io::num(r.rate)
     << " (min " << io::num(c.min_rate) << ") final_error=" << io::num(r.rows.empty() ? 0.0 : r.rows.back().error)
     << " (bound " << io::num(c.final_error_bound) << ")";
  out.failures.push_back(os.str());
}

inline void cmd_scan(const RunConfig& cfg, Outputs& out, bool dry = false) {
  const json& sec = cfg.section();
  const std::string kind = sec.value("kind", "");
  json report = {{"header", io::header_json(cfg.hash)}, {"config", cfg.canonical}};
  if (kind == "uniform_limit") {
    io::reject_unknown(sec, {"kind", "schedule", "grid", "criteria"}, "scan");
    const EpsSchedule sched = schedule_from_json(sec.value("schedule", json::object()), "scan.schedule");
    const ConvergenceCriteria crit = criteria_from_json(sec.value("criteria", json(nullptr)), "scan.criteria");
    std::visit(
        [&](const auto& model) {
          constexpr int D = std::decay_t<decltype(model)>::dim;
          const CompactGrid<D> grid = grid_from_json<D>(sec.value("grid", json::object()), cfg.seed, "scan.grid");
          if (dry) return;
          const ConvergenceReport r = uniform_limit_scan(model, limit_of(model), grid, sched, crit);
          report["report"] = io::to_json(r);
          report["grid_points"] = grid.points.size();
          out.files["scan.csv"] = csv_of(cfg.hash, r);
          failure_rows(r, crit, out);
        },
        cfg.model);
  } else if (kind == "dist_limit") {
    io::reject_unknown(sec, {"kind", "schedule", "matrix", "criteria"}, "scan");
    const EpsSchedule sched = schedule_from_json(sec.value("schedule", json::object()), "scan.schedule");
    const ConvergenceCriteria crit = criteria_from_json(sec.value("criteria", json(nullptr)), "scan.criteria");
    if (!sec.contains("matrix")) throw ConfigError("scan: dist_limit needs 'matrix'");
    std::visit(
        [&](const auto& model) {
          constexpr int D = std::decay_t<decltype(model)>::dim;
          const SymMat<D> e = io::sym_from_json<D>(sec.at("matrix"), "scan.matrix");
          if (dry) return;
          const ConvergenceReport r = dist_limit_scan(e, model.family(), sched, crit);
          report["report"] = io::to_json(r);
          out.files["scan.csv"] = csv_of(cfg.hash, r);
          failure_rows(r, crit, out);
        },
        cfg.model);
  } else if (kind == "coercivity") {
    io::reject_unknown(sec, {"kind", "schedule", "sampler", "c_frozen"}, "scan");
    const EpsSchedule sched = schedule_from_json(sec.value("schedule", json::array({0.1, 0.05, 0.02})), "scan.schedule");
    CoercivitySampler s;
    s.seed = cfg.seed;
    if (sec.contains("sampler")) {
      const json& j = sec.at("sampler");
      io::reject_unknown(j, {"count", "near_fraction", "far_fraction", "near_min", "near_max", "far_min", "far_max"},
                         "scan.sampler");
      s.count = io::get_int_or(j, "count", s.count, "scan.sampler");
      s.near_fraction = io::get_number_or(j, "near_fraction", s.near_fraction, "scan.sampler");
      s.far_fraction = io::get_number_or(j, "far_fraction", s.far_fraction, "scan.sampler");
      s.near_min = io::get_number_or(j, "near_min", s.near_min, "scan.sampler");
      s.near_max = io::get_number_or(j, "near_max", s.near_max, "scan.sampler");
      s.far_min = io::get_number_or(j, "far_min", s.far_min, "scan.sampler");
      s.far_max = io::get_number_or(j, "far_max", s.far_max, "scan.sampler");
      if (s.count < 1 || s.near_fraction < 0 || s.far_fraction < 0 || s.near_fraction + s.far_fraction > 1 ||
          !(s.near_min > 0 && s.near_min < s.near_max) || !(s.far_min > 0 && s.far_min < s.far_max))
        throw ConfigError("scan.sampler: inconsistent sampler ranges");
    }
    const double c_frozen = io::get_number_or(sec, "c_frozen", 0.0, "scan");
    std::visit(
        [&](const auto& model) {
          if constexpr (std::decay_t<decltype(model)>::dim != 3) {
            throw ConfigError("scan: coercivity sampling is implemented for 3x3 gradients");
          } else {
            if (dry) return;
            const CoercivityReport r = coercivity_scan(model, s, sched);
            report["report"] = io::to_json(r);
            report["c_frozen"] = c_frozen;
            out.files["scan.csv"] = csv_of(cfg.hash, r);
            for (const auto& row : r.rows)
              if (!(row.c_min >= c_frozen))
                out.failures.push_back("coercivity: eps=" + io::num(row.eps) + " c_min=" + io::num(row.c_min) +
                                       " below c_frozen=" + io::num(c_frozen));
          }
        },
        cfg.model);
  } else if (kind == "quadratic_bound") {
    io::reject_unknown(sec, {"kind", "grid"}, "scan");
    std::visit(
        [&](const auto& model) {
          constexpr int D = std::decay_t<decltype(model)>::dim;
          const CompactGrid<D> grid = grid_from_json<D>(sec.value("grid", json::object()), cfg.seed, "scan.grid");
          if (dry) return;
          const QuadraticBound b = quadratic_lower_bound_fit(limit_of(model), grid, cfg.seed);
          report["report"] = io::to_json(b);
          out.files["scan.csv"] = csv_with_header(cfg.hash, "c1,c2,worst_margin,verified\n" + io::num(b.c1) + "," +
                                                                 io::num(b.c2) + "," + io::num(b.worst_margin) + "," +
                                                                 (b.verified ? "1" : "0") + "\n");
          if (!b.verified) out.failures.push_back("quadratic_bound: margin " + io::num(b.worst_margin) + " < 0");
        },
        cfg.model);
  } else if (kind == "hull_membership") {
    io::reject_unknown(sec, {"kind", "matrices", "tol"}, "scan");
    const auto* nematic = std::get_if<NematicModel>(&cfg.model);
    if (!nematic) throw ConfigError("scan: hull_membership needs the nematic model");
    const LimitParams params = LimitParams::from_model(*nematic);
    if (!params.lambda_nonnegative()) throw ConfigError("scan: hull_membership requires lambda >= 0");
    const double tol = io::get_number_or(sec, "tol", 1e-8, "scan");
    if (!sec.contains("matrices") || !sec.at("matrices").is_array()) throw ConfigError("scan: 'matrices' required");
    std::ostringstream csv;
    csv << "index,vqce,projection_distance,member,implies_qe2\n";
    json rows = json::array();
    for (std::size_t k = 0; k < sec.at("matrices").size(); ++k) {
      const SymMat3 e = io::sym_from_json<3>(sec.at("matrices")[k], "scan.matrices[" + std::to_string(k) + "]");
      if (dry) continue;
      const HullMembership h = hull_membership(params, e, tol);
      rows.push_back({{"E", io::to_json(e)},
                      {"vqce", io::jnum(h.vqce)},
                      {"projection_distance", io::jnum(h.projection_distance)},
                      {"member_of_vqce_zero", h.member_of_vqce_zero},
                      {"implies_qe2_member", h.implies_qe2_member}});
      csv << k << ',' << io::num(h.vqce) << ',' << io::num(h.projection_distance) << ','
          << (h.member_of_vqce_zero ? 1 : 0) << ',' << (h.implies_qe2_member ? 1 : 0) << '\n';
    }
    report["report"] = {{"kind", "hull_membership"}, {"rows", rows}};
    out.files["scan.csv"] = csv_with_header(cfg.hash, csv.str());
  } else {
    throw ConfigError("scan: 'kind' must be uniform_limit, dist_limit, coercivity, quadratic_bound or hull_membership");
  }
  if (dry) return;
  report["passed"] = out.failures.empty();
  out.files["scan.json"] = report.dump(2) + "\n";
}

// ---------------------------------------------------------------------------
// sweep

inline void cmd_sweep(const RunConfig& cfg, Outputs& out, bool dry = false) {
  const json& sec = cfg.section();
  io::reject_unknown(sec,
                     {"cells", "boundary", "load", "starts", "tol", "max_iterations", "relaxed_only", "final_gap_bound",
                      "strict_quasiconvexity", "export_fields"},
                     "sweep");
  if (!sec.contains("cells") || !sec.at("cells").is_array() || sec.at("cells").empty())
    throw ConfigError("sweep: 'cells' must be a nonempty list of {eps, mesh_n}");
  std::vector<SweepCell> cells;
  for (const auto& c : sec.at("cells")) {
    io::reject_unknown(c, {"eps", "mesh_n"}, "sweep.cells");
    SweepCell cell{io::get_number(c, "eps", "sweep.cells"), io::get_int_or(c, "mesh_n", 0, "sweep.cells")};
    if (!(cell.eps > 0.0)) throw ConfigError("sweep.cells: eps must be positive");
    if (cell.mesh_n < 1) throw ConfigError("sweep.cells: mesh_n must be a positive integer");
    cells.push_back(cell);
  }
  MinimizeOptions opts;
  opts.seed = cfg.seed;
  opts.starts = io::get_int_or(sec, "starts", opts.starts, "sweep");
  opts.tol = io::get_number_or(sec, "tol", opts.tol, "sweep");
  opts.max_iterations = io::get_int_or(sec, "max_iterations", opts.max_iterations, "sweep");
  if (opts.starts < 1 || !(opts.tol > 0.0) || opts.max_iterations < 1) throw ConfigError("sweep: invalid solver options");
  const bool relaxed_only = sec.value("relaxed_only", false);
  const bool strict_qc = sec.value("strict_quasiconvexity", false);
  const bool export_fields = sec.value("export_fields", false);
  const std::optional<double> gap_bound =
      sec.contains("final_gap_bound") ? std::optional<double>(io::get_number(sec, "final_gap_bound", "sweep"))
                                      : std::nullopt;

  json report = {{"header", io::header_json(cfg.hash)}, {"config", cfg.canonical}};
  std::visit(
      [&](const auto& model) {
        using Model = std::decay_t<decltype(model)>;
        constexpr int D = Model::dim;
        const BoundarySpec<D> bc = boundary_from_json<D>(sec.value("boundary", json::object()), "sweep.boundary");
        const LoadSpec<D> load = load_from_json<D>(sec.value("load", json(nullptr)), "sweep.load");
        const auto limit = limit_of(model);
        if constexpr (std::is_same_v<Model, NematicModel>) {
          if (!limit.params.lambda_nonnegative())
            throw ConfigError("sweep: the relaxed target requires lambda = W_vol''(1) - 2 mu / 3 >= 0");
        } else {
          if (!limit.convex()) throw ConfigError("sweep: relaxed density unavailable for multiwell synthetic models");
        }
        for (const auto& c : cells) {
          std::size_t count = D == 3 ? 6 : 2;
          for (int k = 0; k < D; ++k) count *= static_cast<std::size_t>(c.mesh_n);
          if (count > default_element_cap<D>())
            throw ConfigError("sweep.cells: mesh_n = " + std::to_string(c.mesh_n) + " exceeds the element cap");
        }
        const Mat<D>* affine = std::get_if<Mat<D>>(&bc.data);
        const bool closed_form = affine && load.is_zero() && bc.faces.size() == 2 * D;
        if (dry) return;

        if (relaxed_only) {
          json rows = json::array();
          std::ostringstream csv;
          csv << "mesh_n,m,iterations,converged\n";
          std::map<int, bool> seen;
          for (const auto& c : cells) {
            if (seen[c.mesh_n]) continue;
            seen[c.mesh_n] = true;
            const BoxMesh<D> mesh(c.mesh_n);
            const MinimizeResult<D> r = minimize_relaxed(limit, mesh, bc, load, opts);
            rows.push_back({{"mesh_n", c.mesh_n}, {"m", io::jnum(r.value)}, {"iterations", r.iterations},
                            {"converged", r.converged}});
            csv << c.mesh_n << ',' << io::num(r.value) << ',' << r.iterations << ',' << (r.converged ? 1 : 0) << '\n';
            if (closed_form) {
              const double target = limit.relaxed(*affine);
              if (!(std::abs(r.value - target) <= 1e-8 * std::max(1.0, std::abs(target))))
                out.failures.push_back("relaxed: mesh_n=" + std::to_string(c.mesh_n) + " m=" + io::num(r.value) +
                                       " differs from the closed form " + io::num(target));
            }
            if (export_fields) {
              std::ostringstream f;
              io::write_field_csv(f, mesh, r.u);
              out.files["relaxed_field_n" + std::to_string(c.mesh_n) + ".csv"] = csv_with_header(cfg.hash, f.str());
            }
          }
          report["relaxed"] = rows;
          if (closed_form) report["closed_form_m"] = io::jnum(limit.relaxed(*affine));
          out.files["relaxed.csv"] = csv_with_header(cfg.hash, csv.str());
          return;
        }

        typename SweepObserver<D>::Callback observer;
        if (export_fields) {
          observer = [&](std::size_t index, const BoxMesh<D>& mesh, const MinimizeResult<D>& eps_sol,
                         const MinimizeResult<D>& rel_sol) {
            std::ostringstream a, b;
            io::write_field_csv(a, mesh, eps_sol.u);
            io::write_field_csv(b, mesh, rel_sol.u);
            out.files["field_eps_cell" + std::to_string(index) + ".csv"] = csv_with_header(cfg.hash, a.str());
            out.files["field_relaxed_cell" + std::to_string(index) + ".csv"] = csv_with_header(cfg.hash, b.str());
          };
        }
        const SweepReport r = epsilon_sweep(cells, model, limit, bc, load, opts, observer);
        const StrongConvergenceReport strong = strong_convergence_diagnostic(r, strict_qc);
        report["report"] = io::to_json(r);
        report["strong_convergence"] = io::to_json(strong);
        std::ostringstream csv, gap;
        io::write_csv(csv, r);
        io::write_gap_csv(gap, r);
        out.files["sweep.csv"] = csv_with_header(cfg.hash, csv.str());
        out.files["gap.csv"] = csv_with_header(cfg.hash, gap.str());
        for (const auto& c : r.cells)
          if (!c.error.empty())
            std::cerr << "sweep: cell eps=" << io::num(c.eps) << " mesh_n=" << c.mesh_n << " failed: " << c.error << "\n";
        if (gap_bound) {
          const auto& last = r.cells.back();
          if (!last.error.empty() || !(last.gap <= *gap_bound))
            out.failures.push_back("sweep: final gap " + io::num(last.gap) + " exceeds " + io::num(*gap_bound));
        }
        if (!strong.passed) out.failures.push_back("sweep: gradient distance does not decay (strict quasiconvexity asserted)");
      },
      cfg.model);
  if (dry) return;
  report["passed"] = out.failures.empty();
  out.files[relaxed_only ? "relaxed.json" : "sweep.json"] = report.dump(2) + "\n";
}

// ---------------------------------------------------------------------------
// Driver

inline int write_outputs(const RunConfig& cfg, const Outputs& out, std::ostream& stdout_stream) {
  if (!out.files.empty()) {
    namespace fs = std::filesystem;
    const fs::path dir = cfg.out_dir.value_or(".");
    fs::create_directories(dir);
    for (const auto& [name, text] : out.files) {
      std::ofstream f(dir / name, std::ios::binary);
      f << text;
      if (!f) throw std::runtime_error("cannot write " + (dir / name).string());
    }
  }
  stdout_stream << out.stdout_text;
  return 0;
}

/// Runs the CLI on an argument vector (argv[0] included).
inline int run(std::vector<std::string> args, std::ostream& out_stream = std::cout, std::ostream& err_stream = std::cerr) {
  CLI::App app{"gamma-elastica: multiwell energies, small-strain limits and relaxed minima"};
  app.require_subcommand(1);
  Overrides ov;
  std::string config_path;
  std::optional<double> eps;
  std::optional<int> mesh_n, threads;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out;
  app.set_version_flag("--version", std::string(io::kVersion));
  const std::pair<const char*, const char*> commands[] = {
      {"eval", "Evaluate energies, limit densities and envelopes at given matrices"},
      {"scan", "Run a convergence, coercivity, bound or hull-membership scan"},
      {"sweep", "Minimize the discrete functionals over a schedule of (eps, mesh) cells"}};
  for (const auto& [name, about] : commands) {
    CLI::App* sub = app.add_subcommand(name, about);
    sub->add_option("config", config_path, "JSON config file")->required();
    sub->add_option("--eps", eps, "Override eps (eval), the schedule (scan) or every cell's eps (sweep)");
    sub->add_option("--mesh-n", mesh_n, "Override every sweep cell's mesh divisions");
    sub->add_option("--seed", seed, "Override the seed");
    sub->add_option("--out", out, "Output directory");
    sub->add_option("--threads", threads, "Cap library parallelism")->check(CLI::PositiveNumber);
    sub->add_flag("--dry-run", ov.dry_run, "Validate the config and exit without writing files");
  }
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out_stream, err_stream);
    return code == 0 ? kPass : kConfigFailure;
  }
  ov.eps = eps;
  ov.mesh_n = mesh_n;
  ov.seed = seed;
  ov.out = out;
  ov.threads = threads;
  const std::string subcommand = app.get_subcommands().front()->get_name();

  RunConfig cfg;
  try {
    std::ifstream f(config_path, std::ios::binary);
    if (!f) throw ConfigError("cannot read config file '" + config_path + "'");
    std::stringstream ss;
    ss << f.rdbuf();
    const json raw = [&] {
      try {
        return json::parse(ss.str());
      } catch (const json::parse_error& e) {
        throw ConfigError(std::string("config: malformed JSON: ") + e.what());
      }
    }();
    if (raw.is_object() && raw.contains("threads") && raw.at("threads").is_number_integer())
      set_thread_cap(raw.at("threads").get<int>());
    cfg = parse_config(ss.str(), subcommand, ov);
    if (ov.threads) set_thread_cap(*ov.threads);
  } catch (const ConfigError& e) {
    err_stream << "config error: " << e.what() << "\n";
    return kConfigFailure;
  } catch (const std::exception& e) {
    err_stream << "config error: " << e.what() << "\n";
    return kConfigFailure;
  }
  if (ov.dry_run) {
    try {
      Outputs ignored;
      if (cfg.command == "eval") cmd_eval(cfg, ignored, true);
      if (cfg.command == "scan") cmd_scan(cfg, ignored, true);
      if (cfg.command == "sweep") cmd_sweep(cfg, ignored, true);
    } catch (const std::exception& e) {
      err_stream << "config error: " << e.what() << "\n";
      return kConfigFailure;
    }
    err_stream << "dry run: config " << cfg.hash << " is valid (" << cfg.command << ")\n";
    return kPass;
  }

  Outputs outputs;
  try {
    if (cfg.command == "eval") cmd_eval(cfg, outputs);
    if (cfg.command == "scan") cmd_scan(cfg, outputs);
    if (cfg.command == "sweep") cmd_sweep(cfg, outputs);
    write_outputs(cfg, outputs, out_stream);
  } catch (const ConfigError& e) {
    err_stream << "config error: " << e.what() << "\n";
    return kConfigFailure;
  } catch (const std::exception& e) {
    err_stream << "runtime error: " << e.what() << "\n";
    return kRuntimeFailure;
  }
  if (!outputs.failures.empty()) {
    err_stream << "assertion failures:\n";
    for (const auto& f : outputs.failures) err_stream << "  " << f << "\n";
    return kAssertionFailed;
  }
  return kPass;
}

}  // namespace gamma_elastica::cli
