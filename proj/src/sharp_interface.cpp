#include "sten/sharp_interface.hpp"

#include <cmath>
#include <sstream>

namespace sten {
namespace detail {

struct SurfaceImpl {
  int dim = 0;
  std::string name;
  virtual ~SurfaceImpl() = default;
  virtual double signed_distance(const Vec& x) const = 0;
  virtual Vec distance_gradient(const Vec& x) const = 0;
  virtual double surface_integral(const std::function<double(const Vec&)>& f) const = 0;
  virtual double mesh_area() const = 0;
  virtual AreaProfile ball_area(const Vec& p, std::span<const double> radii) const = 0;
};

}  // namespace detail

namespace {

// ---- exact disc/rectangle overlap ----------------------------------------

// Antiderivative of the half-chord: integral of sqrt(r^2 - s^2) ds.
double chord_int(double s, double r) {
  s = std::clamp(s, -r, r);
  const double c = std::sqrt(std::max(0.0, r * r - s * s));
  return 0.5 * (s * c + r * r * std::asin(std::clamp(s / r, -1.0, 1.0)));
}

// Area of disc(origin, r) intersected with {s <= x, t <= y}.
double corner_area(double x, double y, double r) {
  if (x <= -r || y <= -r) return 0.0;
  x = std::min(x, r);
  y = std::min(y, r);
  if (y >= r) return 2.0 * (chord_int(x, r) - chord_int(-r, r));
  const double sy = std::sqrt(std::max(0.0, r * r - y * y));
  if (y >= 0.0) {
    double a = 0.0;
    const double b1 = std::min(x, -sy);
    a += 2.0 * (chord_int(b1, r) - chord_int(-r, r));
    if (x > -sy) {
      const double b2 = std::min(x, sy);
      a += y * (b2 + sy) + (chord_int(b2, r) - chord_int(-sy, r));
      if (x > sy) a += 2.0 * (chord_int(x, r) - chord_int(sy, r));
    }
    return a;
  }
  const double lo = -sy, hi = std::min(x, sy);
  if (hi <= lo) return 0.0;
  return y * (hi - lo) + (chord_int(hi, r) - chord_int(lo, r));
}

// Exact area of disc(center, r) within an axis-aligned rectangle.
double disc_rect_overlap(double cx, double cy, double r, double x0, double x1, double y0,
                         double y1) {
  return corner_area(x1 - cx, y1 - cy, r) - corner_area(x0 - cx, y1 - cy, r) -
         corner_area(x1 - cx, y0 - cy, r) + corner_area(x0 - cx, y0 - cy, r);
}

// ---- hyperplane {x_1 = offset} -------------------------------------------

struct PlaneImpl final : detail::SurfaceImpl {
  double offset = 0.0;
  double extent = 0.0;  // mesh spans [-extent, extent] in-plane
  int elems = 0;

  PlaneImpl(int dim_, double offset_, double extent_, int elems_) {
    dim = dim_;
    offset = offset_;
    extent = extent_;
    elems = elems_;
    std::ostringstream n;
    n << "plane(dim=" << dim << ",offset=" << offset << ")";
    name = n.str();
  }

  Vec embed(double s, double t) const {
    Vec x(dim);
    x[0] = offset;
    x[1] = s;
    if (dim == 3) x[2] = t;
    return x;
  }

  double signed_distance(const Vec& x) const override { return x[0] - offset; }
  Vec distance_gradient(const Vec&) const override {
    Vec g = Vec::Zero(dim);
    g[0] = 1.0;
    return g;
  }

  double surface_integral(const std::function<double(const Vec&)>& f) const override {
    const double d = 2.0 * extent / elems;
    double acc = 0.0;
    if (dim == 2) {
      for (int i = 0; i < elems; ++i) acc += d * f(embed(-extent + (i + 0.5) * d, 0.0));
    } else {
      for (int i = 0; i < elems; ++i)
        for (int j = 0; j < elems; ++j)
          acc += d * d * f(embed(-extent + (i + 0.5) * d, -extent + (j + 0.5) * d));
    }
    return acc;
  }

  double mesh_area() const override {
    return dim == 2 ? 2.0 * extent : 4.0 * extent * extent;
  }

  AreaProfile ball_area(const Vec& p, std::span<const double> radii) const override {
    if (p.size() != dim) throw ShapeError("point has wrong dimension");
    AreaProfile out;
    out.center = p;
    const double q = std::abs(p[0] - offset);
    const double d = 2.0 * extent / elems;
    for (double R : radii) {
      if (!(R > 0.0)) throw DomainError("ball radius must be > 0");
      double area = 0.0;
      if (R > q) {
        const double rho = std::sqrt(R * R - q * q);
        for (int a = 1; a < dim; ++a)
          if (std::abs(p[a]) + rho > extent)
            throw DomainError("ball footprint leaves the meshed surface patch");
        if (dim == 2) {
          // 1D measure: exact overlap of [p1-rho, p1+rho] with the segments.
          for (int i = 0; i < elems; ++i) {
            const double s0 = -extent + i * d, s1 = s0 + d;
            area += std::max(0.0, std::min(s1, p[1] + rho) - std::max(s0, p[1] - rho));
          }
        } else {
          for (int i = 0; i < elems; ++i)
            for (int j = 0; j < elems; ++j) {
              const double s0 = -extent + i * d, t0 = -extent + j * d;
              area += disc_rect_overlap(p[1], p[2], rho, s0, s0 + d, t0, t0 + d);
            }
        }
      }
      out.radii.push_back(R);
      out.areas.push_back(area);
      out.quad_errors.push_back(1e-13 * std::max(1.0, area));  // roundoff allowance
    }
    return out;
  }
};

// ---- catenoid --------------------------------------------------------------

struct CatenoidImpl final : detail::SurfaceImpl {
  double v_extent = 0.0;
  int nu = 0, nv = 0;

  CatenoidImpl(double v_extent_, int nu_, int nv_) {
    dim = 3;
    v_extent = v_extent_;
    nu = nu_;
    nv = nv_;
    std::ostringstream n;
    n << "catenoid(v=" << v_extent << ")";
    name = n.str();
  }

  static Vec point(double t, double v) {
    Vec x(3);
    const double ch = std::cosh(v);
    x[0] = ch * std::cos(t);
    x[1] = ch * std::sin(t);
    x[2] = v;
    return x;
  }
  // (cos t, sin t, -sinh v)/cosh v, oriented away from the axis.
  static Vec unit_normal(double t, double v) {
    Vec n(3);
    const double ch = std::cosh(v);
    n[0] = std::cos(t) / ch;
    n[1] = std::sin(t) / ch;
    n[2] = -std::sinh(v) / ch;
    return n;
  }

  // Nearest-point parameters by damped Newton on |x(t,v) - p|^2 / 2.
  void project(const Vec& p, double& t, double& v) const {
    t = std::atan2(p[1], p[0]);
    if (p.head(2).norm() < 1e-12) t = 0.0;  // on the axis: any angle
    v = std::clamp(p[2], -v_extent, v_extent);
    for (int iter = 0; iter < 100; ++iter) {
      const double ch = std::cosh(v), sh = std::sinh(v);
      const double ct = std::cos(t), st = std::sin(t);
      const Vec x = point(t, v);
      Vec xt(3), xv(3), xtt(3), xvv(3), xtv(3);
      xt << -ch * st, ch * ct, 0.0;
      xv << sh * ct, sh * st, 1.0;
      xtt << -ch * ct, -ch * st, 0.0;
      xvv << ch * ct, ch * st, 0.0;
      xtv << -sh * st, sh * ct, 0.0;
      const Vec r = x - p;
      const double g0 = r.dot(xt), g1 = r.dot(xv);
      double h00 = xt.squaredNorm() + r.dot(xtt);
      double h11 = xv.squaredNorm() + r.dot(xvv);
      double h01 = xt.dot(xv) + r.dot(xtv);
      const double gnorm = std::hypot(g0, g1);
      if (gnorm < 1e-13) break;
      double det = h00 * h11 - h01 * h01;
      double dt_step, dv_step;
      if (det <= 1e-12 * std::max(1.0, h00 * h11)) {
        // fall back to gradient descent with a conservative step
        const double scale = std::max({std::abs(h00), std::abs(h11), 1.0});
        dt_step = -g0 / scale;
        dv_step = -g1 / scale;
      } else {
        dt_step = -(h11 * g0 - h01 * g1) / det;
        dv_step = -(h00 * g1 - h01 * g0) / det;
      }
      t += dt_step;
      v += dv_step;
      v = std::clamp(v, -v_extent - 1.0, v_extent + 1.0);
    }
  }

  double signed_distance(const Vec& x) const override {
    double t, v;
    project(x, t, v);
    const Vec foot = point(t, v);
    const double dist = (x - foot).norm();
    const Vec n = unit_normal(t, v);
    return (x - foot).dot(n) >= 0.0 ? dist : -dist;
  }

  Vec distance_gradient(const Vec& x) const override {
    double t, v;
    project(x, t, v);
    const Vec foot = point(t, v);
    const Vec r = x - foot;
    const double dist = r.norm();
    const Vec n = unit_normal(t, v);
    if (dist < 1e-9) return n;
    return r.dot(n) >= 0.0 ? Vec(r / dist) : Vec(-r / dist);
  }

  double surface_integral(const std::function<double(const Vec&)>& f) const override {
    const double du = 2.0 * M_PI / nu, dv = 2.0 * v_extent / nv;
    double acc = 0.0;
    for (int j = 0; j < nv; ++j) {
      const double vm = -v_extent + (j + 0.5) * dv;
      const double w = std::cosh(vm) * std::cosh(vm) * du * dv;  // midpoint area weight
      for (int i = 0; i < nu; ++i) acc += w * f(point((i + 0.5) * du, vm));
    }
    return acc;
  }

  double mesh_area() const override {
    const double du = 2.0 * M_PI / nu, dv = 2.0 * v_extent / nv;
    double acc = 0.0;
    for (int j = 0; j < nv; ++j) {
      const double vm = -v_extent + (j + 0.5) * dv;
      acc += std::cosh(vm) * std::cosh(vm) * du * dv * nu;
    }
    return acc;
  }

  AreaProfile ball_area(const Vec& p, std::span<const double> radii) const override {
    if (p.size() != 3) throw ShapeError("point has wrong dimension");
    AreaProfile out;
    out.center = p;
    const double du = 2.0 * M_PI / nu, dv = 2.0 * v_extent / nv;
    for (double R : radii) {
      if (!(R > 0.0)) throw DomainError("ball radius must be > 0");
      if (std::abs(p[2]) + R > v_extent)
        throw DomainError("ball reaches past the meshed catenoid patch");
      double area = 0.0, err = 0.0;
      for (int j = 0; j < nv; ++j) {
        const double v0 = -v_extent + j * dv;
        const double vh = std::max(std::abs(v0), std::abs(v0 + dv));
        const double diam = (du + dv) * std::cosh(vh);
        const double vm = v0 + 0.5 * dv;
        const double w = std::cosh(vm) * std::cosh(vm) * du * dv;
        for (int i = 0; i < nu; ++i) {
          const double t0 = i * du;
          double dmin = std::numeric_limits<double>::infinity(), dmax = 0.0;
          for (int c = 0; c < 4; ++c) {
            const double tc = t0 + (c & 1 ? du : 0.0);
            const double vc = v0 + (c & 2 ? dv : 0.0);
            const double d = (point(tc, vc) - p).norm();
            dmin = std::min(dmin, d);
            dmax = std::max(dmax, d);
          }
          if (dmin - diam >= R) continue;  // fully outside
          if (dmax + diam <= R) {          // fully inside
            area += w;
            continue;
          }
          // Mixed: area-weighted subsample fractions at two resolutions.
          auto fraction = [&](int s) {
            double win = 0.0, wall = 0.0;
            for (int a = 0; a < s; ++a)
              for (int b = 0; b < s; ++b) {
                const double ts = t0 + (a + 0.5) * du / s;
                const double vs = v0 + (b + 0.5) * dv / s;
                const double ws = std::cosh(vs) * std::cosh(vs);
                wall += ws;
                if ((point(ts, vs) - p).squaredNorm() <= R * R) win += ws;
              }
            return win / wall;
          };
          const double f16 = fraction(16);
          const double f32 = fraction(32);
          area += f32 * w;
          err += std::abs(f32 - f16) * w;
        }
      }
      out.radii.push_back(R);
      out.areas.push_back(area);
      out.quad_errors.push_back(err);
    }
    return out;
  }
};

}  // namespace

InterfaceSpec::InterfaceSpec(std::shared_ptr<const detail::SurfaceImpl> impl)
    : impl_(std::move(impl)) {}

int InterfaceSpec::dim() const { return impl_->dim; }
const std::string& InterfaceSpec::name() const { return impl_->name; }
double InterfaceSpec::signed_distance(const Vec& x) const {
  if (x.size() != impl_->dim) throw ShapeError("point has wrong dimension");
  return impl_->signed_distance(x);
}
Vec InterfaceSpec::distance_gradient(const Vec& x) const {
  if (x.size() != impl_->dim) throw ShapeError("point has wrong dimension");
  return impl_->distance_gradient(x);
}
double InterfaceSpec::surface_integral(const std::function<double(const Vec&)>& f) const {
  return impl_->surface_integral(f);
}
double InterfaceSpec::mesh_area() const { return impl_->mesh_area(); }
AreaProfile InterfaceSpec::ball_area(const Vec& p, std::span<const double> radii) const {
  return impl_->ball_area(p, radii);
}

InterfaceSpec InterfaceSpec::plane(int dim, double offset, double extent, int elements_per_axis) {
  if (dim != 2 && dim != 3) throw ConfigError("plane interface supports dim 2 or 3");
  if (!(extent > 0.0) || elements_per_axis < 2) throw ConfigError("bad plane mesh parameters");
  return InterfaceSpec(std::make_shared<PlaneImpl>(dim, offset, extent, elements_per_axis));
}

InterfaceSpec InterfaceSpec::catenoid(double v_extent, int elements_around, int elements_axial) {
  if (!(v_extent > 0.0) || elements_around < 8 || elements_axial < 2)
    throw ConfigError("bad catenoid mesh parameters");
  return InterfaceSpec(std::make_shared<CatenoidImpl>(v_extent, elements_around, elements_axial));
}

AreaProfile surface_ball_area(const InterfaceSpec& s, const Vec& p,
                              std::span<const double> radii) {
  return s.ball_area(p, radii);
}

MonotonicityReport check_surface_monotonicity(const AreaProfile& profile, int n) {
  return check_ratio_monotonicity(profile.radii, profile.areas, profile.quad_errors, n - 1);
}

GridField profile_field(const InterfaceSpec& spec, const ConnectionProfile& connection,
                        double eps, const Grid& g, Boundary boundary) {
  if (!(eps > 0.0)) throw DomainError("epsilon must be > 0");
  if (g.dim != spec.dim()) throw ShapeError("grid/interface dimension mismatch");
  if (connection.dim_u() != g.dim)
    throw ShapeError("connection target dimension must match the grid dimension");
  if (eps / g.spacing < 6.0) {
    std::ostringstream msg;
    msg << "grid too coarse for the eps-layer: eps/h = " << eps / g.spacing << " < 6";
    throw ResolutionError(msg.str());
  }
  ProfileInterpolant interp(connection);
  return sample_field(g, boundary, [&](const Vec& x) {
    return interp(spec.signed_distance(x) / eps);
  });
}

double pair_tensor_with_test(const TensorField& t, const TestFunction& phi, int i, int j) {
  const Grid& g = t.grid;
  if (i < 0 || j < 0 || i >= g.dim || j >= g.dim) throw DomainError("tensor entry out of range");
  Eigen::VectorXd nodal(g.num_nodes());
  for_each_node(g, [&](Index node, int ix, int iy, int iz) {
    nodal[node] = t.entry(node, i, j) * phi(g.position(ix, iy, iz));
  });
  return cell_quadrature(g, nodal);
}

double pair_tensor_with_test(const GridField& f, const Potential& p, double eps,
                             const TestFunction& phi, int i, int j) {
  return pair_tensor_with_test(scaled_stress_tensor(f, p, eps), phi, i, j);
}

namespace {

// L1 norms along the profile used for the zero-target quadrature tolerance:
// the equipartition defect integral and the |Udot||Udddot| integral that
// controls the fixed h/eps centered-difference bias.
void profile_tolerance_integrals(const ConnectionProfile& c, const Potential& p,
                                 double& equip_l1, double& third_l1) {
  equip_l1 = 0.0;
  third_l1 = 0.0;
  const double h = c.spacing;
  const Index n = c.samples();
  for (Index k = 2; k + 2 < n; ++k) {
    const Vec du = (c.values.col(k + 1) - c.values.col(k - 1)) / (2.0 * h);
    const Vec d3 = (-c.values.col(k - 2) + 2.0 * c.values.col(k - 1) - 2.0 * c.values.col(k + 1) +
                    c.values.col(k + 2)) /
                   (2.0 * h * h * h);
    equip_l1 += h * std::abs(0.5 * du.squaredNorm() - p.w_raw(c.values.col(k).data()));
    third_l1 += h * du.norm() * d3.norm();
  }
}

}  // namespace

LimitTensorReport verify_limit_tensor(const InterfaceSpec& spec,
                                      const ConnectionProfile& connection, const Potential& p,
                                      std::span<const double> eps_sequence,
                                      std::span<const TestFunction> phi_set, double box_extent,
                                      int grid_ratio) {
  if (eps_sequence.size() < 2) throw ConfigError("limit sweep needs at least two eps values");
  for (std::size_t k = 0; k + 1 < eps_sequence.size(); ++k)
    if (!(eps_sequence[k] > eps_sequence[k + 1]))
      throw ConfigError("eps sequence must be strictly decreasing");
  if (phi_set.empty()) throw ConfigError("limit sweep needs at least one test function");
  const int n = spec.dim();

  LimitTensorReport rep;
  rep.sigma_used = connection.sigma;
  if (!(rep.sigma_used > 0.0)) throw ConfigError("connection has no computed surface tension");

  double equip_l1 = 0.0, third_l1 = 0.0;
  profile_tolerance_integrals(connection, p, equip_l1, third_l1);

  // Limit direction: grad d is constant on the hyperplane.
  Vec gd = spec.distance_gradient(Vec::Zero(n));

  // Projection algebra of the limit matrix: M = -T0/sigma = Id - gd gd^T
  // must be the orthogonal projector onto the tangent space.
  {
    Mat t0 = rep.sigma_used * (gd * gd.transpose() - Mat::Identity(n, n));
    Mat m = -t0 / rep.sigma_used;
    rep.projection_gap = std::max((m * m - m).cwiseAbs().maxCoeff(),
                                  (m * gd).cwiseAbs().maxCoeff());
    rep.projection_gap = std::max(rep.projection_gap, (m - m.transpose()).cwiseAbs().maxCoeff());
  }

  std::vector<double> s_phi(phi_set.size());
  for (std::size_t q = 0; q < phi_set.size(); ++q)
    s_phi[q] = spec.surface_integral([&](const Vec& x) { return phi_set[q](x); });

  for (double eps : eps_sequence) {
    const double h_target = eps / grid_ratio;
    int cells = 2 * std::max(2, static_cast<int>(std::lround(box_extent / h_target)));
    Grid g = Grid::make(n, Vec::Constant(n, -box_extent), 2.0 * box_extent / cells,
                        {cells, cells, cells});
    GridField u = profile_field(spec, connection, eps, g);
    JacobianField jac = gradient(u);
    TensorField t = scaled_stress_tensor(u, p, eps, jac);
    const double h = g.spacing;

    for (std::size_t q = 0; q < phi_set.size(); ++q) {
      Eigen::VectorXd phi_nodal(g.num_nodes());
      for_each_node(g, [&](Index node, int ix, int iy, int iz) {
        phi_nodal[node] = phi_set[q](g.position(ix, iy, iz));
      });
      for (int i = 0; i < n; ++i)
        for (int j = i; j < n; ++j) {
          Eigen::VectorXd nodal(g.num_nodes());
          for (Index node = 0; node < g.num_nodes(); ++node)
            nodal[node] = t.entry(node, i, j) * phi_nodal[node];
          const double value = cell_quadrature(g, nodal);
          const double coarse = cell_quadrature_coarse(g, nodal);
          const double richardson = std::abs(value - coarse) / 3.0;
          LimitPairing pr;
          pr.eps = eps;
          pr.i = i;
          pr.j = j;
          pr.phi_index = static_cast<int>(q);
          pr.value = value;
          pr.target = rep.sigma_used * (gd[i] * gd[j] - (i == j ? 1.0 : 0.0)) * s_phi[q];
          pr.error = std::abs(value - pr.target);
          const double fd_bias = (h / eps) * (h / eps) / 6.0 * third_l1;
          pr.zero_tolerance = (equip_l1 + fd_bias) * s_phi[q] + richardson;
          rep.pairings.push_back(pr);
        }
    }
  }

  // Summaries per (entry, phi).
  rep.pass = rep.projection_gap <= 1e-12;
  for (std::size_t q = 0; q < phi_set.size(); ++q)
    for (int i = 0; i < n; ++i)
      for (int j = i; j < n; ++j) {
        std::vector<double> errs, tols;
        for (const auto& pr : rep.pairings)
          if (pr.i == i && pr.j == j && pr.phi_index == static_cast<int>(q)) {
            errs.push_back(pr.error);
            tols.push_back(pr.zero_tolerance);
          }
        LimitEntrySummary s;
        s.i = i;
        s.j = j;
        s.phi_index = static_cast<int>(q);
        const double limit_coeff = gd[i] * gd[j] - (i == j ? 1.0 : 0.0);
        s.zero_target = std::abs(limit_coeff * s_phi[q]) < 1e-14;
        s.final_error = errs.back();
        s.final_tolerance = tols.back();
        if (s.zero_target) {
          s.pass = s.final_error <= 10.0 * s.final_tolerance;
        } else {
          std::vector<double> eps_list(eps_sequence.begin(), eps_sequence.end());
          s.order = fit_order(eps_list, errs);
          s.monotone_decay = true;
          for (std::size_t k = 0; k + 1 < errs.size(); ++k)
            if (errs[k + 1] > 1.1 * errs[k]) s.monotone_decay = false;
          s.pass = s.order >= rep.order_threshold && s.monotone_decay;
        }
        rep.pass = rep.pass && s.pass;
        rep.summaries.push_back(s);
      }
  return rep;
}

}  // namespace sten
