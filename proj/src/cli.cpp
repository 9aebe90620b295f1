#include "sten/cli.hpp"

#include <filesystem>
#include <fstream>
#include <functional>
#include <future>
#include <iostream>
#include <random>

#include <CLI11.hpp>
#include <json.hpp>

#include "sten/connection.hpp"
#include "sten/io.hpp"
#include "sten/monotonicity.hpp"
#include "sten/sharp_interface.hpp"
#include "sten/solver.hpp"

namespace sten::cli {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

struct Ctx {
  json config;
  std::string config_hash;
  fs::path out;
  int jobs = 1;
  std::uint64_t seed = 1;
};

json load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config: " + path);
  json cfg = json::parse(in, nullptr, /*allow_exceptions=*/false);
  if (cfg.is_discarded()) throw ConfigError("config is not valid JSON: " + path);
  return cfg;
}

const json& require(const json& cfg, const std::string& key) {
  if (!cfg.contains(key)) throw ConfigError("config is missing \"" + key + "\"");
  return cfg.at(key);
}

json report_base(const Ctx& ctx) {
  json j;
  j["tool"] = kToolVersion;
  j["config_hash"] = ctx.config_hash;
  return j;
}

void save_json(const fs::path& path, const json& j) { write_text_atomic(path, j.dump(2) + "\n"); }

Potential potential_from(const json& spec) {
  const std::string family = require(spec, "name").get<std::string>();
  std::vector<double> params;
  if (spec.contains("dim")) params.push_back(spec["dim"].get<double>());
  if (family == "triple_well") {
    params.clear();
    params.push_back(spec.value("deepen", 0.0));
  }
  return Potential::make(family, params);
}

Boundary boundary_from(const json& cfg) {
  const std::string b = cfg.value("boundary", "dirichlet");
  if (b == "dirichlet") return Boundary::kDirichlet;
  if (b == "periodic") return Boundary::kPeriodic;
  throw ConfigError("boundary must be \"dirichlet\" or \"periodic\"");
}

Vec vec_from(const json& arr, int dim, const char* what) {
  if (!arr.is_array() || static_cast<int>(arr.size()) != dim)
    throw ConfigError(std::string(what) + " must be an array of length dim");
  Vec v(dim);
  for (int k = 0; k < dim; ++k) v[k] = arr[k].get<double>();
  return v;
}

Grid grid_from(const json& spec) {
  const int dim = require(spec, "dim").get<int>();
  if (dim < 1 || dim > kMaxDim) throw ConfigError("grid dim must be 1..3");
  Vec origin = vec_from(require(spec, "origin"), dim, "grid.origin");
  const double h = require(spec, "spacing").get<double>();
  const json& cells_j = require(spec, "cells");
  if (!cells_j.is_array() || static_cast<int>(cells_j.size()) != dim)
    throw ConfigError("grid.cells must be an array of length dim");
  std::array<int, kMaxDim> cells{};
  for (int a = 0; a < dim; ++a) cells[a] = cells_j[a].get<int>();
  try {
    return Grid::make(dim, origin, h, cells);
  } catch (const DomainError& e) {
    throw ConfigError(e.what());
  }
}

// Initial/boundary data: the init field supplies Dirichlet traces unless a
// named boundary function overrides them.
GridField init_field(const json& cfg, const Grid& g) {
  const Boundary bc = boundary_from(cfg);
  GridField f = manufactured_field(require(cfg, "init").get<std::string>(), g, bc);
  const std::string dir = cfg.value("dirichlet", "from_init");
  if (bc == Boundary::kDirichlet && dir != "from_init") {
    std::function<Vec(const Vec&)> trace;
    if (dir == "radial_unit") {
      trace = [](const Vec& x) {
        const double r = x.norm();
        if (r == 0.0) throw ConfigError("radial_unit boundary hits the origin");
        return Vec(x / r);
      };
    } else if (dir.rfind("constant:", 0) == 0) {
      GridField c = manufactured_field(dir, g, bc);
      const Vec v = c.values.col(0);
      trace = [v](const Vec&) { return v; };
    } else {
      throw ConfigError("unknown dirichlet spec: " + dir);
    }
    for_each_node(g, [&](Index node, int ix, int iy, int iz) {
      const int idx[3] = {ix, iy, iz};
      for (int a = 0; a < g.dim; ++a)
        if (idx[a] == 0 || idx[a] == g.cells[a]) {
          f.values.col(node) = trace(g.position(ix, iy, iz));
          return;
        }
    });
  }
  return f;
}

SolveConfig solve_config_from(const json& cfg) {
  SolveConfig sc;
  if (cfg.contains("solver")) {
    const json& s = cfg["solver"];
    sc.dt = s.value("dt", 0.0);
    sc.tol = s.value("tol", 1e-6);
    sc.max_iters = s.value("max_iters", static_cast<long>(400000));
    sc.energy_check_interval = s.value("energy_check_interval", static_cast<long>(1));
    if (s.contains("epsilon") && !s["epsilon"].is_null()) sc.epsilon = s["epsilon"].get<double>();
  }
  return sc;
}

std::vector<double> radii_from(const json& cfg, const Grid& g, const Vec& center) {
  const double limit = ball_radius_limit(g, center);
  double rmin = 4.0 * g.spacing, rmax = limit, ratio = 1.0905077326652577;
  if (cfg.contains("radii")) {
    const json& r = cfg["radii"];
    rmin = r.value("min", rmin);
    rmax = r.value("max", rmax);
    ratio = r.value("ratio", ratio);
  }
  return geometric_radii(rmin, std::min(rmax, limit), ratio);
}

// ---- solve ------------------------------------------------------------------

int cmd_solve(const Ctx& ctx) {
  const Potential pot = potential_from(require(ctx.config, "potential"));
  const Grid g = grid_from(require(ctx.config, "grid"));
  GridField init = init_field(ctx.config, g);
  const SolveConfig sc = solve_config_from(ctx.config);

  SolveResult res = relax(init, pot, sc);
  write_field_snapshot(res.field, ctx.out / "u");

  CsvWriter rcsv({"iteration", "residual"});
  for (std::size_t k = 0; k < res.residual_history.size(); ++k)
    rcsv.row(std::vector<double>{static_cast<double>(k), res.residual_history[k]});
  rcsv.save(ctx.out / "residuals.csv");
  if (!res.energy_history.empty()) {
    CsvWriter ecsv({"sample", "energy"});
    for (std::size_t k = 0; k < res.energy_history.size(); ++k)
      ecsv.row(std::vector<double>{static_cast<double>(k), res.energy_history[k]});
    ecsv.save(ctx.out / "energies.csv");
  }

  json rep = report_base(ctx);
  rep["converged"] = res.converged;
  rep["iterations"] = res.iterations;
  rep["final_residual"] = res.final_residual;
  rep["dt_used"] = res.dt_used;
  rep["tol"] = sc.tol;
  rep["energy_monotone"] = res.energy_monotone;
  rep["max_energy_uptick"] = res.max_energy_uptick;
  rep["potential"] = pot.name();
  save_json(ctx.out / "solve.json", rep);
  std::cout << (res.converged ? "converged" : "NOT converged") << " after " << res.iterations
            << " iterations, residual " << format_double(res.final_residual) << "\n";
  return res.converged ? kExitOk : kExitCheckFailed;
}

// ---- verify-tensor ----------------------------------------------------------

json algebra_checks(const GridField& f, const Potential& pot) {
  TensorField t = stress_tensor(f, pot);
  TraceIdentityReport tr = trace_identity_report(t, f, pot);
  PsdIdentityReport ps = psd_identity_report(t, f, pot);
  json j;
  j["trace_formula_gap"] = tr.max_formula_gap;
  j["trace_bound_excess"] = tr.max_bound_excess;
  if (f.grid.dim == 2) j["trace_planar_gap"] = tr.max_planar_gap;
  j["trace_pass"] = tr.pass;
  j["psd_entry_gap"] = ps.max_entry_gap;
  j["psd_min_eigenvalue"] = ps.min_eigenvalue;
  j["psd_pass"] = ps.pass;
  j["pass"] = tr.pass && ps.pass;
  return j;
}

int cmd_verify_tensor(const Ctx& ctx) {
  const Potential pot = potential_from(require(ctx.config, "potential"));
  json rep = report_base(ctx);
  bool all_pass = true;

  if (ctx.config.contains("snapshot")) {
    GridField f = read_field_snapshot(ctx.config["snapshot"].get<std::string>());
    if (pot.dim() != f.dim_u()) throw ConfigError("potential/snapshot dimension mismatch");
    json alg = algebra_checks(f, pot);
    all_pass = alg["pass"].get<bool>();
    // Divergence identity as a relative diagnostic on a single grid.
    const double gap = divergence_identity_gap(f, pot);
    Eigen::MatrixXd lap = laplacian(f);
    double scale = 0.0;
    for (Index node = 0; node < f.grid.num_nodes(); ++node)
      scale = std::max(scale, lap.col(node).cwiseAbs().maxCoeff());
    const bool div_ok = gap <= 1e-10 || gap <= 0.05 * std::max(scale, 1e-10);
    alg["divergence_gap"] = gap;
    alg["divergence_relative_ok"] = div_ok;
    all_pass = all_pass && div_ok;
    rep["snapshot_checks"] = alg;
  } else {
    const json& ts = require(ctx.config, "tensor");
    const json& box = require(ts, "box");
    const int dim = require(ctx.config, "potential").value("dim", 2);
    Vec origin = vec_from(require(box, "origin"), dim, "tensor.box.origin");
    const json& lengths_j = require(box, "lengths");
    std::vector<double> lengths;
    for (const auto& v : lengths_j) lengths.push_back(v.get<double>());
    if (static_cast<int>(lengths.size()) != dim)
      throw ConfigError("tensor.box.lengths must match dim");
    std::vector<double> hs;
    for (const auto& v : require(ts, "h_sequence")) hs.push_back(v.get<double>());
    const int margin = ts.value("margin", 2);
    const Boundary bc = boundary_from(ts);

    CsvWriter csv({"field", "h", "gap"});
    json fields_rep = json::array();
    for (const auto& fname_j : require(ts, "fields")) {
      const std::string fname = fname_j.get<std::string>();
      auto factory = [&](double h) {
        std::array<int, kMaxDim> cells{};
        for (int a = 0; a < dim; ++a)
          cells[a] = std::max(4, static_cast<int>(std::lround(lengths[a] / h)));
        Grid g = Grid::make(dim, origin, h, cells);
        return manufactured_field(fname, g, bc);
      };
      ConvergenceReport conv = verify_divergence_identity(factory, pot, hs, margin);
      for (std::size_t k = 0; k < hs.size(); ++k)
        csv.row(std::vector<std::string>{fname, format_double(hs[k]),
                                         format_double(conv.errors[k])});
      json fj;
      fj["field"] = fname;
      fj["order"] = conv.exact ? 99.0 : conv.order;
      fj["exact"] = conv.exact;
      fj["divergence_pass"] = conv.pass;
      fj["algebra"] = algebra_checks(factory(hs.back()), pot);
      all_pass = all_pass && conv.pass && fj["algebra"]["pass"].get<bool>();
      fields_rep.push_back(fj);
    }
    csv.save(ctx.out / "divergence_convergence.csv");
    rep["fields"] = fields_rep;
    rep["order_threshold"] = 1.8;
  }
  rep["pass"] = all_pass;
  save_json(ctx.out / "verify_tensor.json", rep);
  std::cout << (all_pass ? "tensor checks passed" : "tensor checks FAILED") << "\n";
  return all_pass ? kExitOk : kExitCheckFailed;
}

// ---- monotonicity / modica ---------------------------------------------------

json monotonicity_json(const MonotonicityReport& r) {
  json j;
  j["exponent"] = r.exponent;
  j["pass"] = r.pass;
  json viol = json::array();
  for (const auto& v : r.violations) viol.push_back({{"index", v.index}, {"excess", v.magnitude}});
  j["violations"] = viol;
  return j;
}

GridField field_input(const Ctx& ctx) {
  if (ctx.config.contains("snapshot"))
    return read_field_snapshot(ctx.config["snapshot"].get<std::string>());
  const Grid g = grid_from(require(ctx.config, "grid"));
  return manufactured_field(require(ctx.config, "init").get<std::string>(), g,
                            boundary_from(ctx.config));
}

int cmd_monotonicity(const Ctx& ctx) {
  const Potential pot = potential_from(require(ctx.config, "potential"));
  GridField f = field_input(ctx);
  const int n = f.grid.dim;
  Vec center = Vec::Zero(n);
  if (ctx.config.contains("center")) center = vec_from(ctx.config["center"], n, "center");
  const std::vector<double> radii = radii_from(ctx.config, f.grid, center);

  BallEnergyProfile profile = ball_energy(f, pot, center, radii);
  MonotonicityReport weak = check_weak_monotonicity(profile, n);
  MonotonicityReport strong = check_strong_monotonicity(profile, n);
  LiouvilleReport liou = liouville_consistency(f, pot, center, radii);

  CsvWriter csv({"R", "E", "quad_error", "ratio_weak", "tol_weak", "ratio_strong", "tol_strong"});
  for (std::size_t k = 0; k < radii.size(); ++k)
    csv.row(std::vector<double>{radii[k], profile.energies[k], profile.quad_errors[k],
                                weak.ratios[k], weak.tolerances[k], strong.ratios[k],
                                strong.tolerances[k]});
  csv.save(ctx.out / "ball_energy.csv");

  json rep = report_base(ctx);
  rep["weak"] = monotonicity_json(weak);
  rep["strong"] = monotonicity_json(strong);
  GrowthFit pw = growth_rate(profile, GrowthModel::kPower);
  GrowthFit lg = growth_rate(profile, GrowthModel::kLog);
  rep["growth_power_exponent"] = pw.identically_zero ? json() : json(pw.rate);
  rep["growth_log_coefficient"] = lg.identically_zero ? json() : json(lg.rate);
  rep["growth_identically_zero"] = pw.identically_zero;
  rep["liouville_bound_holds"] = liou.bound_holds;
  rep["liouville_worst_margin"] = liou.worst_margin;
  rep["liouville_pairs"] = liou.pairs_checked;
  // The weak inequality and the n=2 log bound are theorems for W >= 0;
  // strong monotonicity may legitimately fail and is reported only.
  const bool pass = weak.pass && liou.bound_holds;
  rep["pass"] = pass;
  save_json(ctx.out / "monotonicity.json", rep);
  std::cout << "weak " << (weak.pass ? "pass" : "FAIL") << ", strong "
            << (strong.pass ? "pass" : "fail (reported)") << ", log-bound "
            << (liou.bound_holds ? "pass" : "FAIL") << "\n";
  return pass ? kExitOk : kExitCheckFailed;
}

int cmd_modica(const Ctx& ctx) {
  const Potential pot = potential_from(require(ctx.config, "potential"));
  GridField f = field_input(ctx);
  ModicaReport rep = check_modica_estimate(f, pot);
  json j = report_base(ctx);
  j["min_slack"] = rep.min_slack;
  j["violation_fraction"] = rep.violation_fraction;
  j["strengthened_trace_ok"] = rep.strengthened_ok;
  j["max_strengthened_excess"] = rep.max_strengthened_excess;
  j["pass"] = rep.strengthened_ok;
  save_json(ctx.out / "modica.json", j);
  std::cout << "min slack " << format_double(rep.min_slack) << ", violations "
            << format_double(rep.violation_fraction) << " of interior nodes\n";
  // Gradient-bound violations are findings, not failures; the conditional
  // strengthened-trace algebra must hold.
  return rep.strengthened_ok ? kExitOk : kExitCheckFailed;
}

// ---- connection ---------------------------------------------------------------

void export_profile_csv(const ConnectionProfile& c, const Potential& p, const fs::path& path) {
  std::vector<std::string> header{"eta"};
  for (int k = 0; k < c.dim_u(); ++k) header.push_back("U" + std::to_string(k + 1));
  header.push_back("kinetic");
  header.push_back("W");
  CsvWriter csv(std::move(header));
  for (Index k = 0; k < c.samples(); ++k) {
    std::vector<double> row{c.eta[k]};
    for (int m = 0; m < c.dim_u(); ++m) row.push_back(c.values(m, k));
    double kin = 0.0;
    if (k > 0 && k + 1 < c.samples())
      kin = 0.5 * ((c.values.col(k + 1) - c.values.col(k - 1)) / (2.0 * c.spacing)).squaredNorm();
    row.push_back(kin);
    row.push_back(p.W(c.values.col(k)));
    csv.row(row);
  }
  csv.save(path);
}

int cmd_connection(const Ctx& ctx) {
  const Potential pot = potential_from(require(ctx.config, "potential"));
  const json& cc = require(ctx.config, "connection");
  ConnectionSolveOptions opts;
  opts.tol = cc.value("tol", 1e-8);
  opts.max_iters = cc.value("max_iters", opts.max_iters);
  const double spacing = cc.value("spacing", 0.01);
  double L = cc.value("half_length", 0.0);

  json rep = report_base(ctx);
  rep["potential"] = pot.name();

  if (cc.value("all_pairs", false)) {
    TriangleReport tri = check_triangle_inequality(pot, L, spacing, cc.value("triangle_tol", 1e-8), opts);
    const int n = static_cast<int>(pot.minima().size());
    json table = json::array();
    for (int i = 0; i < n; ++i)
      for (int j = i + 1; j < n; ++j)
        table.push_back({{"i", i}, {"j", j}, {"sigma", tri.sigmas(i, j)}});
    rep["sigma_table"] = table;
    rep["triangle_worst_slack"] = tri.worst_slack;
    rep["max_pair_spread"] = tri.max_pair_spread;
    rep["pass"] = tri.pass;
    save_json(ctx.out / "sigma_table.json", rep);
    std::cout << "triangle inequality " << (tri.pass ? "holds" : "VIOLATED") << "\n";
    return tri.pass ? kExitOk : kExitCheckFailed;
  }

  const json& pair = require(cc, "pair");
  if (!pair.is_array() || pair.size() != 2) throw ConfigError("connection.pair must be [i, j]");
  const int i = pair[0].get<int>(), j = pair[1].get<int>();
  if (L <= 0.0) L = suggest_half_length(pot, i, j);
  ConnectionProfile c = solve_connection(pot, i, j, L, spacing, opts);
  export_profile_csv(c, pot, ctx.out / "profile.csv");
  rep["sigma"] = c.sigma;
  rep["sigma_via_2w"] = c.sigma_via_2w;
  rep["sigma_error"] = c.sigma_error;
  rep["residual"] = c.residual;
  rep["equipartition_defect"] = equipartition_defect(c, pot);
  rep["half_length"] = c.half_length;
  rep["spacing"] = c.spacing;
  rep["tail_gap"] = c.tail_gap;
  rep["pass"] = true;
  save_json(ctx.out / "connection.json", rep);
  std::cout << "sigma = " << format_double(c.sigma) << " +- " << format_double(c.sigma_error)
            << "\n";
  return kExitOk;
}

// ---- limit / surface -----------------------------------------------------------

int cmd_limit(const Ctx& ctx) {
  const Potential pot = potential_from(require(ctx.config, "potential"));
  const json& lc = require(ctx.config, "limit");
  if (pot.continuum_minima())
    throw ConfigError("limit verification needs a potential with isolated minima");
  const json& pair = require(lc, "pair");
  const int i = pair[0].get<int>(), j = pair[1].get<int>();
  if (i < 0 || j < 0 || i >= static_cast<int>(pot.minima().size()) ||
      j >= static_cast<int>(pot.minima().size()) || i == j)
    throw ConfigError("limit.pair does not name a valid phase pair");

  const double spacing = lc.value("profile_spacing", 0.01);
  const double L = lc.value("profile_half_length", suggest_half_length(pot, i, j));
  ConnectionProfile conn = solve_connection(pot, i, j, L, spacing);

  const int dim = lc.value("dim", 2);
  const double offset = lc.value("plane_offset", 0.0);
  const double box_extent = lc.value("box_extent", 1.6);
  const double mesh_extent = lc.value("mesh_extent", box_extent);
  const int mesh_elems = lc.value("mesh_elements", 2000);
  InterfaceSpec spec = InterfaceSpec::plane(dim, offset, mesh_extent, mesh_elems);

  std::vector<double> eps;
  for (const auto& v : require(lc, "epsilons")) eps.push_back(v.get<double>());
  std::vector<TestFunction> phis;
  for (const auto& b : require(lc, "bumps")) {
    TestFunction phi;
    phi.center = vec_from(require(b, "center"), dim, "bump.center");
    phi.radius = b.value("radius", 1.0);
    phi.exponent = b.value("exponent", 3);
    phis.push_back(phi);
  }

  LimitTensorReport rep =
      verify_limit_tensor(spec, conn, pot, eps, phis, box_extent, lc.value("grid_ratio", 10));

  CsvWriter csv({"eps", "i", "j", "phi", "value", "target", "error", "zero_tolerance"});
  for (const auto& pr : rep.pairings)
    csv.row(std::vector<double>{pr.eps, static_cast<double>(pr.i + 1),
                                static_cast<double>(pr.j + 1), static_cast<double>(pr.phi_index),
                                pr.value, pr.target, pr.error, pr.zero_tolerance});
  csv.save(ctx.out / "limit_convergence.csv");

  json j_rep = report_base(ctx);
  j_rep["sigma"] = rep.sigma_used;
  j_rep["projection_gap"] = rep.projection_gap;
  j_rep["order_threshold"] = rep.order_threshold;
  json sums = json::array();
  for (const auto& s : rep.summaries)
    sums.push_back({{"i", s.i + 1},
                    {"j", s.j + 1},
                    {"phi", s.phi_index},
                    {"zero_target", s.zero_target},
                    {"order", s.order},
                    {"final_error", s.final_error},
                    {"final_tolerance", s.final_tolerance},
                    {"pass", s.pass}});
  j_rep["entries"] = sums;
  j_rep["pass"] = rep.pass;
  save_json(ctx.out / "limit.json", j_rep);
  std::cout << (rep.pass ? "limit tensor checks passed" : "limit tensor checks FAILED") << "\n";
  return rep.pass ? kExitOk : kExitCheckFailed;
}

int cmd_surface(const Ctx& ctx) {
  const json& sc = require(ctx.config, "surface");
  const std::string name = require(sc, "name").get<std::string>();
  InterfaceSpec spec = [&]() {
    if (name == "plane")
      return InterfaceSpec::plane(sc.value("dim", 3), sc.value("offset", 0.0),
                                  sc.value("extent", 6.0), sc.value("elements", 512));
    if (name == "catenoid")
      return InterfaceSpec::catenoid(sc.value("v_extent", 3.0), sc.value("elements", 512),
                                     sc.value("elements_axial", 0) > 0
                                         ? sc["elements_axial"].get<int>()
                                         : sc.value("elements", 512));
    throw ConfigError("surface.name must be \"plane\" or \"catenoid\"");
  }();
  const int n = spec.dim();
  Vec p = vec_from(require(sc, "point"), n, "surface.point");
  const json& rr = require(sc, "radii");
  std::vector<double> radii =
      geometric_radii(require(rr, "min").get<double>(), require(rr, "max").get<double>(),
                      rr.value("ratio", 1.0905077326652577));

  AreaProfile prof = surface_ball_area(spec, p, radii);
  MonotonicityReport mono = check_surface_monotonicity(prof, n);

  CsvWriter csv({"R", "area", "quad_error", "ratio", "tol"});
  for (std::size_t k = 0; k < radii.size(); ++k)
    csv.row(std::vector<double>{prof.radii[k], prof.areas[k], prof.quad_errors[k],
                                mono.ratios[k], mono.tolerances[k]});
  csv.save(ctx.out / "surface_area.csv");

  json rep = report_base(ctx);
  rep["surface"] = spec.name();
  rep["mesh_area"] = spec.mesh_area();
  rep["monotonicity"] = monotonicity_json(mono);
  rep["pass"] = mono.pass;
  save_json(ctx.out / "surface.json", rep);
  std::cout << "surface ratio monotonicity " << (mono.pass ? "pass" : "FAIL") << "\n";
  return mono.pass ? kExitOk : kExitCheckFailed;
}

// ---- gradient consistency (used by report-all) ---------------------------------

int cmd_gradient_check(const Ctx& ctx) {
  const Potential pot = potential_from(require(ctx.config, "potential"));
  const json& gc = ctx.config.value("gradient_check", json::object());
  const int count = gc.value("points", 100);
  const double lo = gc.value("low", -2.0), hi = gc.value("high", 2.0);
  std::vector<double> hs = {1e-2, 5e-3, 2.5e-3};
  if (gc.contains("h_sequence")) {
    hs.clear();
    for (const auto& v : gc["h_sequence"]) hs.push_back(v.get<double>());
  }
  std::mt19937_64 rng(ctx.seed);
  std::uniform_real_distribution<double> dist(lo, hi);
  std::vector<Vec> pts;
  for (int k = 0; k < count; ++k) {
    Vec x(pot.dim());
    for (int a = 0; a < pot.dim(); ++a) x[a] = dist(rng);
    pts.push_back(x);
  }
  GradientConsistencyReport rep = check_gradient_consistency(pot, pts, hs);
  json j = report_base(ctx);
  j["median_order"] = std::isfinite(rep.median_order) ? json(rep.median_order) : json("exact");
  j["exact_points"] = rep.exact_points;
  j["points"] = count;
  j["pass"] = rep.pass;
  save_json(ctx.out / "gradient_check.json", j);
  return rep.pass ? kExitOk : kExitCheckFailed;
}

// ---- report-all -----------------------------------------------------------------

int cmd_report_all(const Ctx& ctx) {
  struct Section {
    std::string name;
    std::function<int(const Ctx&)> fn;
  };
  std::vector<Section> sections;
  if (ctx.config.contains("gradient_check"))
    sections.push_back({"gradient_check", cmd_gradient_check});
  if (ctx.config.contains("tensor")) sections.push_back({"tensor", cmd_verify_tensor});
  if (ctx.config.contains("connection")) sections.push_back({"connection", cmd_connection});
  if (ctx.config.contains("limit")) sections.push_back({"limit", cmd_limit});
  if (ctx.config.contains("surface")) sections.push_back({"surface", cmd_surface});
  if (ctx.config.contains("snapshot") || ctx.config.contains("init")) {
    sections.push_back({"monotonicity", cmd_monotonicity});
    sections.push_back({"modica", cmd_modica});
  }
  if (sections.empty()) throw ConfigError("report-all: no applicable sections in config");

  std::vector<int> codes(sections.size(), 0);
  std::vector<std::future<int>> futures(sections.size());
  const int jobs = std::max(1, ctx.jobs);
  std::size_t next = 0;
  while (next < sections.size()) {
    const std::size_t batch = std::min<std::size_t>(jobs, sections.size() - next);
    for (std::size_t b = 0; b < batch; ++b) {
      const std::size_t idx = next + b;
      Ctx sub = ctx;
      sub.out = ctx.out / sections[idx].name;
      futures[idx] = std::async(std::launch::async,
                                [fn = sections[idx].fn, sub]() { return fn(sub); });
    }
    for (std::size_t b = 0; b < batch; ++b) codes[next + b] = futures[next + b].get();
    next += batch;
  }

  json rep = report_base(ctx);
  bool pass = true;
  json secs = json::array();
  for (std::size_t k = 0; k < sections.size(); ++k) {
    secs.push_back({{"name", sections[k].name}, {"exit_code", codes[k]}});
    pass = pass && codes[k] == kExitOk;
  }
  rep["sections"] = secs;
  rep["pass"] = pass;
  save_json(ctx.out / "report.json", rep);
  std::cout << (pass ? "all sections passed" : "some sections FAILED") << "\n";
  return pass ? kExitOk : kExitCheckFailed;
}

}  // namespace

int run(const std::vector<std::string>& args) {
  CLI::App app{"stress-energy tensor verification toolkit for vector Allen-Cahn systems"};
  app.require_subcommand(1);

  std::string config_path, out_dir = "sten-out";
  int jobs = 1;
  std::uint64_t seed = 1;
  app.add_option("--config", config_path, "run configuration (JSON)");
  app.add_option("--out", out_dir, "output directory");
  app.add_option("--jobs", jobs, "worker pool size for independent checks");
  app.add_option("--seed", seed, "seed for randomized sampling");

  std::map<std::string, std::function<int(const Ctx&)>> dispatch = {
      {"solve", cmd_solve},           {"verify-tensor", cmd_verify_tensor},
      {"monotonicity", cmd_monotonicity}, {"modica", cmd_modica},
      {"connection", cmd_connection}, {"limit", cmd_limit},
      {"surface", cmd_surface},       {"report-all", cmd_report_all}};
  for (const auto& [name, fn] : dispatch)
    app.add_subcommand(name)->ignore_case();

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) {  // --help
      std::cout << app.help();
      return kExitOk;
    }
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfigError;
  }

  try {
    Ctx ctx;
    if (config_path.empty()) throw ConfigError("--config is required");
    ctx.config = load_config(config_path);
    ctx.config_hash = fnv1a_hex(ctx.config.dump());
    ctx.out = out_dir;
    ctx.jobs = jobs;
    ctx.seed = seed;
    std::filesystem::create_directories(ctx.out);
    for (const auto& [name, fn] : dispatch)
      if (app.get_subcommand(name)->parsed()) return fn(ctx);
    throw ConfigError("no subcommand given");
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfigError;
  } catch (const SolveDivergedError& e) {
    std::cerr << "numerical divergence: " << e.what() << "\n";
    return kExitDiverged;
  } catch (const ConnectionConvergenceError& e) {
    std::cerr << "numerical divergence: " << e.what() << "\n";
    return kExitDiverged;
  } catch (const DomainError& e) {
    std::cerr << "validation failure: " << e.what() << "\n";
    return kExitCheckFailed;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}

}  // namespace sten::cli
