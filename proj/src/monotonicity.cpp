#include "sten/monotonicity.hpp"

#include <cmath>
#include <sstream>

namespace sten {
namespace {

template <typename F>
void for_each_interior(const Grid& g, Boundary bc, int margin, F&& f) {
  for_each_node(g, [&](Index node, int ix, int iy, int iz) {
    if (bc != Boundary::kPeriodic) {
      const int idx[3] = {ix, iy, iz};
      for (int a = 0; a < g.dim; ++a)
        if (idx[a] < margin || idx[a] > g.cells[a] - margin) return;
    }
    f(node, ix, iy, iz);
  });
}

}  // namespace

std::vector<double> geometric_radii(double r_min, double r_max, double ratio) {
  if (!(r_min > 0.0) || !(r_max > r_min)) throw ConfigError("need 0 < r_min < r_max");
  if (!(ratio > 1.0)) throw ConfigError("radius ratio must be > 1");
  std::vector<double> radii;
  for (double r = r_min; r <= r_max * (1.0 + 1e-12); r *= ratio) radii.push_back(std::min(r, r_max));
  if (radii.size() < 2) radii = {r_min, r_max};
  return radii;
}

double ball_radius_limit(const Grid& g, const Vec& center) {
  if (center.size() != g.dim) throw ShapeError("center has wrong dimension");
  double min_half = std::numeric_limits<double>::infinity();
  for (int a = 0; a < g.dim; ++a) min_half = std::min(min_half, g.half_width(a));
  const double margin = 0.1 * min_half;
  double limit = std::numeric_limits<double>::infinity();
  for (int a = 0; a < g.dim; ++a) {
    limit = std::min(limit, center[a] - g.box_low(a) - margin);
    limit = std::min(limit, g.box_high(a) - center[a] - margin);
  }
  return limit;
}

BallQuadrature ball_integral(const Grid& g, const Eigen::VectorXd& nodal, const Vec& center,
                             std::span<const double> radii) {
  if (nodal.size() != g.num_nodes()) throw ShapeError("nodal array size mismatch");
  if (center.size() != g.dim) throw ShapeError("center has wrong dimension");
  const double limit = ball_radius_limit(g, center);
  for (double r : radii) {
    if (!(r > 0.0)) throw DomainError("ball radius must be > 0");
    if (r > limit) {
      std::ostringstream msg;
      msg << "ball of radius " << r << " leaves the box (margin-adjusted limit " << limit << ")";
      throw DomainError(msg.str());
    }
  }

  const int n = g.dim;
  const double h = g.spacing;
  const double vol = g.cell_volume();
  const double cell_rad = 0.5 * h * std::sqrt(static_cast<double>(n));
  const int ncx = g.cells[0];
  const int ncy = n > 1 ? g.cells[1] : 1;
  const int ncz = n > 2 ? g.cells[2] : 1;
  const Index sx = g.stride(0);
  const Index sy = n > 1 ? g.stride(1) : 0;
  const Index sz = n > 2 ? g.stride(2) : 0;
  const int corners = 1 << n;
  const int lat = n == 1 ? 3 : (n == 2 ? 9 : 27);  // 3^n half-step lattice

  BallQuadrature out;
  out.values.assign(radii.size(), 0.0);
  out.errors.assign(radii.size(), 0.0);

  double lat_d2[27];
  for (std::size_t ri = 0; ri < radii.size(); ++ri) {
    const double R = radii[ri];
    const double R2 = R * R;
    double acc = 0.0, err = 0.0;
    for (int cz = 0; cz < ncz; ++cz)
      for (int cy = 0; cy < ncy; ++cy)
        for (int cx = 0; cx < ncx; ++cx) {
          // Cell-center distance prune.
          double d2 = 0.0;
          const int ci[3] = {cx, cy, cz};
          for (int a = 0; a < n; ++a) {
            const double xa = g.origin[a] + h * ci[a] + 0.5 * h - center[a];
            d2 += xa * xa;
          }
          const double dc = std::sqrt(d2);
          if (dc - cell_rad >= R) continue;

          const Index base = cx * sx + cy * sy + cz * sz;
          double value_c = 0.0;
          for (int c = 0; c < corners; ++c) {
            Index node = base;
            if (c & 1) node += sx;
            if (c & 2) node += sy;
            if (c & 4) node += sz;
            value_c += nodal[node];
          }
          value_c /= corners;

          double f1 = 1.0, f0 = 1.0;
          if (dc + cell_rad > R) {
            // Mixed cell: vertex-count fraction refined one subdivision level
            // on the half-step lattice.
            for (int q = 0; q < lat; ++q) {
              int rem = q;
              double dd = 0.0;
              for (int a = 0; a < n; ++a) {
                const int step = rem % 3;
                rem /= 3;
                const double xa = g.origin[a] + h * ci[a] + 0.5 * h * step - center[a];
                dd += xa * xa;
              }
              lat_d2[q] = dd;
            }
            auto inside = [&](int i0, int i1, int i2) {
              int q = i0;
              if (n > 1) q += 3 * i1;
              if (n > 2) q += 9 * i2;
              return lat_d2[q] <= R2 ? 1 : 0;
            };
            int corner_in = 0;
            for (int c = 0; c < corners; ++c)
              corner_in += inside((c & 1) ? 2 : 0, (c & 2) ? 2 : 0, (c & 4) ? 2 : 0);
            f0 = static_cast<double>(corner_in) / corners;
            const int subcells = corners;
            double sum = 0.0;
            for (int s = 0; s < subcells; ++s) {
              int sub_in = 0;
              for (int c = 0; c < corners; ++c) {
                const int i0 = ((s & 1) ? 1 : 0) + ((c & 1) ? 1 : 0);
                const int i1 = ((s & 2) ? 1 : 0) + ((c & 2) ? 1 : 0);
                const int i2 = ((s & 4) ? 1 : 0) + ((c & 4) ? 1 : 0);
                sub_in += inside(i0, i1, i2);
              }
              sum += static_cast<double>(sub_in) / corners;
            }
            f1 = sum / subcells;
          }
          acc += f1 * vol * value_c;
          err += std::abs(f1 - f0) * vol * std::abs(value_c);
        }
    out.values[ri] = acc;
    out.errors[ri] = err;
  }
  return out;
}

BallEnergyProfile ball_energy(const GridField& f, const Potential& p, const Vec& center,
                              std::span<const double> radii) {
  BallEnergyProfile profile;
  profile.center = center;
  profile.radii.assign(radii.begin(), radii.end());
  BallQuadrature q = ball_integral(f.grid, energy_density(f, p), center, radii);
  profile.energies = std::move(q.values);
  profile.quad_errors = std::move(q.errors);
  return profile;
}

MonotonicityReport check_ratio_monotonicity(std::span<const double> radii,
                                            std::span<const double> values,
                                            std::span<const double> errors, int exponent) {
  if (radii.size() != values.size() || radii.size() != errors.size())
    throw ShapeError("profile arrays must have matching lengths");
  MonotonicityReport rep;
  rep.exponent = exponent;
  for (std::size_t k = 0; k < radii.size(); ++k) {
    const double scale = std::pow(radii[k], exponent);
    rep.ratios.push_back(values[k] / scale);
    rep.tolerances.push_back(errors[k] / scale);
  }
  for (std::size_t k = 0; k + 1 < rep.ratios.size(); ++k) {
    const double allowed = rep.tolerances[k] + rep.tolerances[k + 1];
    const double drop = rep.ratios[k] - rep.ratios[k + 1];
    if (drop > allowed)
      rep.violations.push_back({static_cast<int>(k), drop - allowed});
  }
  rep.pass = rep.violations.empty();
  return rep;
}

MonotonicityReport check_weak_monotonicity(const BallEnergyProfile& profile, int n) {
  return check_ratio_monotonicity(profile.radii, profile.energies, profile.quad_errors, n - 2);
}

MonotonicityReport check_strong_monotonicity(const BallEnergyProfile& profile, int n) {
  return check_ratio_monotonicity(profile.radii, profile.energies, profile.quad_errors, n - 1);
}

ModicaReport check_modica_estimate(const GridField& f, const Potential& p) {
  const Grid& g = f.grid;
  const int n = g.dim;
  JacobianField jac = gradient(f);
  TensorField t = stress_tensor(f, p, jac);

  ModicaReport rep;
  rep.slack.resize(g.num_nodes());
  for (Index node = 0; node < g.num_nodes(); ++node) {
    const double grad2 = jac.entries.col(node).squaredNorm();
    rep.slack[node] = 2.0 * p.w_raw(f.values.col(node).data()) - grad2;
  }

  rep.min_slack = std::numeric_limits<double>::infinity();
  long interior = 0, violations = 0;
  double worst = -std::numeric_limits<double>::infinity();
  for_each_interior(g, f.boundary, 1, [&](Index node, int, int, int) {
    ++interior;
    const double s = rep.slack[node];
    rep.min_slack = std::min(rep.min_slack, s);
    if (s < 0.0) ++violations;
    if (s >= 0.0) {
      // Wherever the gradient bound holds the strengthened trace bound
      // tr T <= -(n-1) e(u) must follow.
      const double grad2 = jac.entries.col(node).squaredNorm();
      const double e = 0.5 * grad2 + p.w_raw(f.values.col(node).data());
      double tr = 0.0;
      for (int j = 0; j < n; ++j) tr += t.entries(j + n * j, node);
      worst = std::max(worst, tr + (n - 1) * e);
    }
  });
  rep.violation_fraction = interior > 0 ? static_cast<double>(violations) / interior : 0.0;
  rep.max_strengthened_excess = std::max(worst, 0.0);
  rep.strengthened_ok = rep.max_strengthened_excess <= 1e-10;
  return rep;
}

double modica_violation_fraction(const GridField& f, const ModicaReport& rep,
                                 const std::function<bool(const Vec&)>& keep) {
  long kept = 0, violations = 0;
  for_each_interior(f.grid, f.boundary, 1, [&](Index node, int ix, int iy, int iz) {
    if (!keep(f.grid.position(ix, iy, iz))) return;
    ++kept;
    if (rep.slack[node] < 0.0) ++violations;
  });
  return kept > 0 ? static_cast<double>(violations) / kept : 0.0;
}

GrowthFit growth_rate(const BallEnergyProfile& profile, GrowthModel model) {
  GrowthFit fit;
  fit.model = model;
  if (profile.radii.size() < 2) throw ConfigError("growth fit needs at least two radii");
  const double r_hi = profile.radii.back();
  const double e_max = *std::max_element(profile.energies.begin(), profile.energies.end());
  if (e_max <= 1e-14) {
    fit.identically_zero = true;
    return fit;
  }
  std::vector<double> xs, ys;
  for (std::size_t k = 0; k < profile.radii.size(); ++k) {
    if (profile.radii[k] < r_hi / 10.0) continue;  // largest decade only
    if (model == GrowthModel::kPower && profile.energies[k] <= 0.0) continue;
    xs.push_back(std::log(profile.radii[k]));
    ys.push_back(model == GrowthModel::kPower ? std::log(profile.energies[k])
                                              : profile.energies[k]);
  }
  fit.points_used = static_cast<int>(xs.size());
  if (xs.size() < 2) throw DomainError("growth fit has fewer than two usable radii");
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t k = 0; k < xs.size(); ++k) {
    sx += xs[k];
    sy += ys[k];
    sxx += xs[k] * xs[k];
    sxy += xs[k] * ys[k];
  }
  const double m = static_cast<double>(xs.size());
  fit.rate = (m * sxy - sx * sy) / (m * sxx - sx * sx);
  fit.intercept = (sy - fit.rate * sx) / m;
  double ss = 0.0;
  for (std::size_t k = 0; k < xs.size(); ++k) {
    const double r = ys[k] - (fit.rate * xs[k] + fit.intercept);
    ss += r * r;
  }
  fit.residual_rms = std::sqrt(ss / m);
  return fit;
}

LiouvilleReport liouville_consistency(const GridField& f, const Potential& p, const Vec& center,
                                      std::span<const double> radii) {
  LiouvilleReport rep;
  BallQuadrature eq = ball_integral(f.grid, energy_density(f, p), center, radii);
  BallEnergyProfile profile;
  profile.center = center;
  profile.radii.assign(radii.begin(), radii.end());
  profile.energies = eq.values;
  profile.quad_errors = eq.errors;
  rep.growth = growth_rate(profile, GrowthModel::kLog);
  rep.nonconstant_growth = !rep.growth.identically_zero && rep.growth.rate > 0.0;

  rep.worst_margin = std::numeric_limits<double>::infinity();
  if (f.grid.dim == 2) {
    BallQuadrature wq = ball_integral(f.grid, potential_density(f, p), center, radii);
    for (std::size_t k0 = 0; k0 < radii.size(); ++k0)
      for (std::size_t k = k0 + 1; k < radii.size(); ++k) {
        const double lg = std::log(radii[k] / radii[k0]);
        const double lhs = eq.values[k];
        const double rhs = eq.values[k0] + 2.0 * lg * wq.values[k0];
        const double tol = eq.errors[k] + eq.errors[k0] + 2.0 * lg * wq.errors[k0];
        rep.worst_margin = std::min(rep.worst_margin, lhs - rhs + tol);
        ++rep.pairs_checked;
      }
    rep.bound_holds = rep.pairs_checked == 0 || rep.worst_margin >= 0.0;
  }
  if (rep.pairs_checked == 0) rep.worst_margin = 0.0;
  return rep;
}

}  // namespace sten
