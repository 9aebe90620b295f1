#pragma once

#include <functional>
#include <vector>

#include "sten/convergence.hpp"
#include "sten/potential.hpp"

namespace sten {

// Sampled heteroclinic orbit U(eta) on [-L, L] joining two minima of W.
struct ConnectionProfile {
  Eigen::VectorXd eta;     // symmetric grid, even cell count
  Eigen::MatrixXd values;  // dim_u x N
  Vec left_minimum, right_minimum;
  double spacing = 0.0;
  double half_length = 0.0;
  double sigma = 0.0;         // action quadrature (filled by solve/sigma)
  double sigma_via_2w = 0.0;  // same integral via 2W (equipartition route)
  double sigma_error = 0.0;   // Richardson + tail error bar
  double residual = 0.0;      // sup-norm of Udotdot - W_u(U) at convergence
  int phase_anchor = 0;       // index where |U| is minimal
  double anchor_offset = 0.0; // sub-cell offset of the energy peak from eta=0
  double tail_gap = 0.0;      // max deviation from the minima over the outer
                              // tenth of each tail (should be <= 1e-6)
  long iterations = 0;

  int dim_u() const { return static_cast<int>(values.rows()); }
  Index samples() const { return eta.size(); }
};

struct ConnectionSolveOptions {
  double tol = 1e-8;
  long max_iters = 4000000;
  double dt = 0.0;  // 0 = stability-limited
};

// Relaxation failed to reach the residual tolerance (or blew up).
struct ConnectionConvergenceError : std::runtime_error {
  ConnectionConvergenceError(const std::string& what, double res)
      : std::runtime_error(what), residual(res) {}
  double residual = 0.0;
};

// Solve Udotdot - W_u(U) = 0, U(-L) = a_i, U(L) = a_j by gradient-flow
// relaxation of the 1D action with clamped endpoints, then re-anchor so the
// energy-density peak sits at eta = 0 (nearest node). Rejects potentials
// with continuum minima and i == j.
ConnectionProfile solve_connection(const Potential& p, int i, int j, double half_length,
                                   double spacing, const ConnectionSolveOptions& opts = {});

// Half-length needed for the linearized tails to decay below tail_tol,
// from the decay rate sqrt(lambda_min(W_uu(a))) at each endpoint.
double suggest_half_length(const Potential& p, int i, int j, double tail_tol = 1e-6);

// Build a profile from a closed-form curve (oracle tests).
ConnectionProfile sample_profile(const std::function<Vec(double)>& fn, double half_length,
                                 double spacing, Vec left_min, Vec right_min);

// Sup over interior nodes of | |Udot|^2/2 - W(U) | (centered differences).
double equipartition_defect(const ConnectionProfile& c, const Potential& p);

// Refinement study of the equipartition defect over solved profiles at a
// halving spacing sequence; passes at measured order >= 1.8.
ConvergenceReport check_equipartition(const Potential& p, int i, int j, double half_length,
                                      const std::vector<double>& spacings,
                                      const ConnectionSolveOptions& opts = {});

struct SigmaResult {
  double value = 0.0;    // integral of |Udot|^2/2 + W(U), midpoint rule + tails
  double via_2w = 0.0;   // integral of 2 W(U) (equal under equipartition)
  double error = 0.0;    // Richardson estimate + tail bound
  double tail = 0.0;     // added tail mass
};

SigmaResult sigma(const ConnectionProfile& c, const Potential& p);

struct TriangleReport {
  Eigen::MatrixXd sigmas;      // N x N, zero diagonal, symmetric
  double worst_slack = 0.0;    // min over triples of s_ij + s_jk - s_ik
  double max_pair_spread = 0.0;  // max |s_ij - s_kl| over all pairs (symmetry diagnostics)
  double tolerance = 0.0;
  bool pass = false;
};

// Solve all pairwise connections and assert s_ij + s_jk >= s_ik - tol for
// every triple. Vacuous pass for potentials with fewer than three minima.
TriangleReport check_triangle_inequality(const Potential& p, double half_length, double spacing,
                                         double tol = 1e-8,
                                         const ConnectionSolveOptions& opts = {});

// Monotone cubic (Fritsch-Carlson) interpolant of a profile, clamped to the
// endpoint minima beyond +-L. Used to evaluate U(d(x)/eps) on grids.
class ProfileInterpolant {
 public:
  explicit ProfileInterpolant(const ConnectionProfile& c);
  Vec operator()(double eta) const;
  int dim_u() const { return static_cast<int>(values_.rows()); }
  double half_length() const { return half_length_; }

 private:
  Eigen::VectorXd eta_;
  Eigen::MatrixXd values_;
  Eigen::MatrixXd slopes_;
  double spacing_ = 0.0;
  double half_length_ = 0.0;
};

}  // namespace sten
