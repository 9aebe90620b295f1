#pragma once

#include <memory>
#include <span>
#include <vector>

#include "sten/connection.hpp"
#include "sten/monotonicity.hpp"
#include "sten/stress_tensor.hpp"

namespace sten {

struct AreaProfile {
  Vec center;
  std::vector<double> radii;
  std::vector<double> areas;
  std::vector<double> quad_errors;
};

namespace detail {
struct SurfaceImpl;
}

// An explicit analytic (n-1)-surface: signed distance, unit normal, and a
// parametric mesh with per-element area weights for surface quadrature.
// Families: hyperplane {x_1 = c} in n = 2, 3 and the unit-waist catenoid in
// n = 3.
class InterfaceSpec {
 public:
  int dim() const;
  const std::string& name() const;

  double signed_distance(const Vec& x) const;
  Vec distance_gradient(const Vec& x) const;  // unit normal extension

  // Midpoint-rule integral of f over the meshed patch of S.
  double surface_integral(const std::function<double(const Vec&)>& f) const;
  double mesh_area() const;

  // H^{n-1}(S intersect B(p, R)) with fractional elements at the ball
  // boundary. Planes use exact element/disc overlap; the catenoid uses
  // parametric subsampling with a refinement-delta error estimate. Balls
  // reaching past the meshed patch raise DomainError.
  AreaProfile ball_area(const Vec& p, std::span<const double> radii) const;

  // Plane {x_1 = offset}; the mesh spans [-extent, extent] in the in-plane
  // coordinates with elements_per_axis elements along each.
  static InterfaceSpec plane(int dim, double offset, double extent, int elements_per_axis);
  // Catenoid x = (cosh v cos t, cosh v sin t, v), |v| <= v_extent.
  static InterfaceSpec catenoid(double v_extent, int elements_around, int elements_axial);

 private:
  explicit InterfaceSpec(std::shared_ptr<const detail::SurfaceImpl> impl);
  std::shared_ptr<const detail::SurfaceImpl> impl_;
};

AreaProfile surface_ball_area(const InterfaceSpec& s, const Vec& p, std::span<const double> radii);

// Ratio detector with exponent n-1 applied to the area profile.
MonotonicityReport check_surface_monotonicity(const AreaProfile& profile, int n);

// Compactly supported polynomial bump: (1 - |x-c|^2/r^2)^k inside the
// support ball, 0 outside. k >= 1 keeps it continuous.
struct TestFunction {
  Vec center;
  double radius = 1.0;
  int exponent = 3;

  double operator()(const Vec& x) const {
    const double q = (x - center).squaredNorm() / (radius * radius);
    if (q >= 1.0) return 0.0;
    double b = 1.0 - q, r = 1.0;
    for (int k = 0; k < exponent; ++k) r *= b;
    return r;
  }
};

// u(x) = U(d(x, S)/eps) sampled on the grid; U by monotone cubic
// interpolation of the profile, clamped to the endpoint minima beyond +-L.
// Requires at least 6 cells across the eps-layer (eps/h >= 6).
GridField profile_field(const InterfaceSpec& spec, const ConnectionProfile& connection,
                        double eps, const Grid& g, Boundary boundary = Boundary::kDirichlet);

// Integral of (T_eps)_{ij} phi over the box by cell quadrature.
double pair_tensor_with_test(const TensorField& t, const TestFunction& phi, int i, int j);
double pair_tensor_with_test(const GridField& f, const Potential& p, double eps,
                             const TestFunction& phi, int i, int j);

struct LimitPairing {
  double eps = 0.0;
  int i = 0, j = 0;
  int phi_index = 0;
  double value = 0.0;
  double target = 0.0;  // sigma (d_xi d_xj - delta_ij) * int_S phi
  double error = 0.0;
  double zero_tolerance = 0.0;  // quadrature tolerance for zero targets
};

struct LimitEntrySummary {
  int i = 0, j = 0;
  int phi_index = 0;
  bool zero_target = false;
  double order = 0.0;          // nonzero targets: measured rate in eps
  bool monotone_decay = true;  // errors decrease along the sweep (10% slack)
  double final_error = 0.0;
  double final_tolerance = 0.0;
  bool pass = false;
};

struct LimitTensorReport {
  std::vector<LimitPairing> pairings;
  std::vector<LimitEntrySummary> summaries;
  double sigma_used = 0.0;
  double projection_gap = 0.0;  // idempotence/normal-annihilation defect of
                                // the tangential projector -T0/sigma
  double order_threshold = 0.8;
  bool pass = false;
};

// Verify the eps -> 0 concentration of the scaled tensor onto
// sigma (grad d x grad d - Id) * surface measure, pairing against a bump
// dictionary on a box with h = eps / grid_ratio. Nonzero targets must
// converge at measured order >= 0.8; zero targets must stay below 10x the
// quadrature tolerance at the finest eps.
LimitTensorReport verify_limit_tensor(const InterfaceSpec& spec,
                                      const ConnectionProfile& connection, const Potential& p,
                                      std::span<const double> eps_sequence,
                                      std::span<const TestFunction> phi_set, double box_extent,
                                      int grid_ratio = 10);

}  // namespace sten
