#pragma once

#include <span>
#include <vector>

#include "sten/grid.hpp"
#include "sten/stress_tensor.hpp"

namespace sten {

// Ball energies E_{B_R}(u) around a fixed center, with per-radius quadrature
// error estimates. Energies are non-decreasing in R by construction
// (integrand >= 0, cell fractions monotone in R).
struct BallEnergyProfile {
  Vec center;
  std::vector<double> radii;
  std::vector<double> energies;
  std::vector<double> quad_errors;
};

// Geometric radius ladder (default ratio 2^{1/8}) from r_min to r_max.
std::vector<double> geometric_radii(double r_min, double r_max,
                                    double ratio = 1.0905077326652577);

// Margin rule: every ball must keep 10% of the smallest box half-width
// between itself and the boundary (box truncation proxy for entire
// solutions). Violations raise DomainError.
double ball_radius_limit(const Grid& g, const Vec& center);

struct BallQuadrature {
  std::vector<double> values;
  std::vector<double> errors;
};

// Integral of a node-sampled scalar over balls B(center, R): each cell
// contributes (volume fraction inside) * volume * corner-averaged value,
// the fraction from a vertex-count estimate refined by one subdivision
// level; the refinement delta feeds the error estimate.
BallQuadrature ball_integral(const Grid& g, const Eigen::VectorXd& nodal, const Vec& center,
                             std::span<const double> radii);

BallEnergyProfile ball_energy(const GridField& f, const Potential& p, const Vec& center,
                              std::span<const double> radii);

struct RatioViolation {
  int index = 0;       // k such that ratio_{k+1} dropped below ratio_k - tol
  double magnitude = 0.0;
};

struct MonotonicityReport {
  int exponent = 0;
  std::vector<double> ratios;      // E_k / R_k^exponent
  std::vector<double> tolerances;  // quadrature error mapped to ratio units
  std::vector<RatioViolation> violations;
  bool pass = false;
};

// Flag every k with ratio_{k+1} < ratio_k - (tol_k + tol_{k+1}).
MonotonicityReport check_ratio_monotonicity(std::span<const double> radii,
                                            std::span<const double> values,
                                            std::span<const double> errors, int exponent);

// Exponent n-2 (holds for every solution with W >= 0).
MonotonicityReport check_weak_monotonicity(const BallEnergyProfile& profile, int n);
// Exponent n-1 (requires the gradient bound |grad u|^2 <= 2W; fails for
// Ginzburg-Landau vortices).
MonotonicityReport check_strong_monotonicity(const BallEnergyProfile& profile, int n);

struct ModicaReport {
  Eigen::VectorXd slack;             // 2W - |grad u|^2 per node
  double min_slack = 0.0;            // over the interior
  double violation_fraction = 0.0;   // share of interior nodes with slack < 0
  // Wherever slack >= 0 the strengthened trace bound tr T <= -(n-1) e must
  // hold; this records the worst excess (<= 1e-10 to pass).
  double max_strengthened_excess = 0.0;
  bool strengthened_ok = false;
};

ModicaReport check_modica_estimate(const GridField& f, const Potential& p);
// Violation share restricted to interior nodes selected by keep(position).
double modica_violation_fraction(const GridField& f, const ModicaReport& rep,
                                 const std::function<bool(const Vec&)>& keep);

enum class GrowthModel { kPower, kLog };

struct GrowthFit {
  GrowthModel model = GrowthModel::kPower;
  double rate = 0.0;        // exponent (power) or log coefficient (log)
  double intercept = 0.0;
  double residual_rms = 0.0;
  int points_used = 0;
  bool identically_zero = false;
};

// Fit over the largest decade of radii: log E vs log R (power) or E vs
// log R (log model).
GrowthFit growth_rate(const BallEnergyProfile& profile, GrowthModel model);

struct LiouvilleReport {
  bool bound_holds = true;    // E(R) >= E(R0) + 2 log(R/R0) * int_{B_R0} W
  double worst_margin = 0.0;  // min over pairs of lhs - rhs (tolerance added)
  int pairs_checked = 0;
  GrowthFit growth;           // log-model fit of the energy profile
  bool nonconstant_growth = false;
};

// n=2 consistency diagnostics for the Liouville theorem: the log lower
// bound at all radius pairs (within summed quadrature error) plus a growth
// fit. For n != 2 only the growth fit is reported.
LiouvilleReport liouville_consistency(const GridField& f, const Potential& p, const Vec& center,
                                      std::span<const double> radii);

}  // namespace sten
