#include "sten/solver.hpp"

#include <cmath>
#include <sstream>

namespace sten {
namespace {

// One forward-Euler step: next = u + dt * (s_lap * Lap u - s_w * W_u(u)).
// Dirichlet boundary nodes are copied through unchanged. Returns the
// sup-norm of the rate over the nodes that move (the PDE residual of u).
template <int N>
double sweep(const Grid& g, Boundary bc, const Potential& pot, double s_lap, double s_w,
             double dt, const Eigen::MatrixXd& u, Eigen::MatrixXd& next) {
  const double inv_h2 = 1.0 / (g.spacing * g.spacing);
  Index stride[3] = {0, 0, 0};
  for (int a = 0; a < g.dim; ++a) stride[a] = g.stride(a) * N;
  const double* src = u.data();
  double* dst = next.data();
  const bool periodic = (bc == Boundary::kPeriodic);

  double res = 0.0;
  double lap[N], wu[N];
  for_each_node(g, [&](Index node, int ix, int iy, int iz) {
    const int idx[3] = {ix, iy, iz};
    const Index base = node * N;
    if (!periodic) {
      for (int a = 0; a < g.dim; ++a)
        if (idx[a] == 0 || idx[a] == g.cells[a]) {
          for (int c = 0; c < N; ++c) dst[base + c] = src[base + c];
          return;
        }
    }
    for (int c = 0; c < N; ++c) lap[c] = 0.0;
    for (int a = 0; a < g.dim; ++a) {
      const Index s = stride[a];
      Index im = base - s, ip = base + s;
      if (periodic) {
        if (idx[a] == 0) im = base + (g.cells[a] - 1) * s;
        if (idx[a] == g.cells[a]) ip = base - (g.cells[a] - 1) * s;
      }
      for (int c = 0; c < N; ++c) lap[c] += src[im + c] + src[ip + c] - 2.0 * src[base + c];
    }
    pot.wu_raw(src + base, wu);
    for (int c = 0; c < N; ++c) {
      const double rate = s_lap * lap[c] * inv_h2 - s_w * wu[c];
      dst[base + c] = src[base + c] + dt * rate;
      const double mag = std::abs(rate);
      if (!std::isfinite(mag))
        res = std::numeric_limits<double>::quiet_NaN();
      else
        res = std::max(res, mag);  // max() keeps NaN sticky once set
    }
  });
  return res;
}

double dispatch_sweep(const Grid& g, Boundary bc, const Potential& pot, double s_lap, double s_w,
                      double dt, const Eigen::MatrixXd& u, Eigen::MatrixXd& next) {
  switch (g.dim) {
    case 1: return sweep<1>(g, bc, pot, s_lap, s_w, dt, u, next);
    case 2: return sweep<2>(g, bc, pot, s_lap, s_w, dt, u, next);
    case 3: return sweep<3>(g, bc, pot, s_lap, s_w, dt, u, next);
    default: throw ShapeError("unsupported dimension");
  }
}

}  // namespace

double stable_time_step(const GridField& state, const Potential& p, std::optional<double> eps,
                        double safety) {
  const Grid& g = state.grid;
  const double s_lap = eps.value_or(1.0);
  const double s_w = eps ? 1.0 / *eps : 1.0;
  double lambda = 0.0;
  for (Index node = 0; node < g.num_nodes(); ++node)
    lambda = std::max(lambda, p.hessian_norm(state.values.col(node)));
  const double diffusive = 4.0 * g.dim / (g.spacing * g.spacing);
  return safety * 2.0 / (diffusive * s_lap + lambda * s_w);
}

SolveResult relax(const GridField& init, const Potential& p, const SolveConfig& cfg) {
  init.validate();
  if (p.dim() != init.dim_u()) throw ShapeError("potential/field dimension mismatch");
  if (!(cfg.tol > 0.0)) throw ConfigError("solver tol must be > 0");
  if (cfg.max_iters < 1) throw ConfigError("solver max_iters must be >= 1");
  if (cfg.epsilon && !(*cfg.epsilon > 0.0)) throw ConfigError("solver epsilon must be > 0");
  if (cfg.dt < 0.0) throw ConfigError("solver dt must be >= 0");

  const double s_lap = cfg.epsilon.value_or(1.0);
  const double s_w = cfg.epsilon ? 1.0 / *cfg.epsilon : 1.0;
  const double dt_max = stable_time_step(init, p, cfg.epsilon, cfg.safety);
  double dt = cfg.dt;
  if (dt == 0.0) {
    dt = dt_max;
  } else if (dt > dt_max) {
    std::ostringstream msg;
    msg << "dt=" << dt << " exceeds the explicit-scheme stability bound " << dt_max;
    throw ConfigError(msg.str());
  }

  SolveResult result;
  result.dt_used = dt;
  GridField state = init;
  Eigen::MatrixXd next(state.values.rows(), state.values.cols());

  const long energy_every = cfg.energy_check_interval;
  // The 1e-10 relative tolerance is per step; samples taken every k steps
  // aggregate k per-step allowances.
  const double uptick_tol = 1e-10 * std::max<long>(energy_every, 1);
  double prev_energy = 0.0;
  bool have_energy = false;
  auto monitor_energy = [&]() {
    const double e = box_energy_midpoint(state, p);
    result.energy_history.push_back(e);
    if (have_energy) {
      const double uptick = (e - prev_energy) / std::max(std::abs(prev_energy), 1e-300);
      if (uptick > uptick_tol) {
        result.energy_monotone = false;
        result.max_energy_uptick = std::max(result.max_energy_uptick, uptick);
      }
    }
    prev_energy = e;
    have_energy = true;
  };

  for (long iter = 0; iter <= cfg.max_iters; ++iter) {
    if (energy_every > 0 && iter % energy_every == 0) monitor_energy();
    const double res = dispatch_sweep(state.grid, state.boundary, p, s_lap, s_w, dt,
                                      state.values, next);
    result.residual_history.push_back(res);
    if (!std::isfinite(res)) {
      std::ostringstream msg;
      msg << "relaxation diverged (non-finite residual) at iteration " << iter;
      throw SolveDivergedError(msg.str(), state);
    }
    result.final_residual = res;
    result.iterations = iter;
    if (res <= cfg.tol) {
      result.converged = true;
      break;
    }
    if (iter == cfg.max_iters) break;
    state.values.swap(next);
  }
  result.field = std::move(state);
  return result;
}

double pde_residual(const GridField& f, const Potential& p, std::optional<double> eps) {
  f.validate();
  if (p.dim() != f.dim_u()) throw ShapeError("potential/field dimension mismatch");
  if (eps && !(*eps > 0.0)) throw DomainError("epsilon must be > 0");
  const double s_lap = eps.value_or(1.0);
  const double s_w = eps ? 1.0 / *eps : 1.0;
  Eigen::MatrixXd scratch(f.values.rows(), f.values.cols());
  // dt = 0: the sweep just evaluates the rate and reports its sup-norm.
  return dispatch_sweep(f.grid, f.boundary, p, s_lap, s_w, 0.0, f.values, scratch);
}

}  // namespace sten
