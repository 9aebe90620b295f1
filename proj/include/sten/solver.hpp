#pragma once

#include <optional>
#include <vector>

#include "sten/grid.hpp"
#include "sten/potential.hpp"

namespace sten {

// Forward-Euler gradient flow u_t = Lap u - W_u(u) (or the eps-scaled
// system). dt = 0 selects the stability-limited step
// 0.9 * 2 / (4n/h^2 * s_lap + Lambda * s_w), with Lambda a sampled bound on
// |W_uu| over the initial iterate's value range.
struct SolveConfig {
  double dt = 0.0;
  double tol = 1e-6;
  long max_iters = 400000;
  std::optional<double> epsilon;
  long energy_check_interval = 1;  // 0 disables the energy monitor
  double safety = 0.9;
};

struct SolveResult {
  GridField field;
  std::vector<double> residual_history;
  std::vector<double> energy_history;  // sampled every energy_check_interval
  double final_residual = 0.0;
  long iterations = 0;
  double dt_used = 0.0;
  bool converged = false;
  // Soft monitor: roundoff near convergence may wiggle the midpoint-rule
  // energy by a few ulp, so violations set a flag instead of aborting.
  bool energy_monotone = true;
  double max_energy_uptick = 0.0;  // worst relative increase observed
};

// NaN/overflow during iteration; carries the last finite iterate.
struct SolveDivergedError : std::runtime_error {
  SolveDivergedError(const std::string& what, GridField last)
      : std::runtime_error(what), last_iterate(std::move(last)) {}
  GridField last_iterate;
};

// Largest stable forward-Euler step for the given state.
double stable_time_step(const GridField& state, const Potential& p,
                        std::optional<double> eps = {}, double safety = 0.9);

// Relax init toward a steady state. Dirichlet boundary nodes are held at
// their initial values; periodic fields wrap. Deterministic: identical
// config and init give a bit-identical result.
SolveResult relax(const GridField& init, const Potential& p, const SolveConfig& cfg = {});

// Max-norm over the interior of Lap u - W_u(u) (or eps Lap u - W_u(u)/eps).
double pde_residual(const GridField& f, const Potential& p, std::optional<double> eps = {});

}  // namespace sten
