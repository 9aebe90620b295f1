#include "sten/connection.hpp"

#include <cmath>
#include <sstream>

namespace sten {
namespace {

double min_hessian_eigenvalue(const Potential& p, const Vec& a) {
  Eigen::SelfAdjointEigenSolver<Mat> es(p.Wuu(a), Eigen::EigenvaluesOnly);
  return es.eigenvalues().minCoeff();
}

// Forward-Euler rate sweep with clamped endpoints; returns the sup-norm of
// Udotdot - W_u(U) over interior nodes.
double sweep_1d(const Potential& p, double h, double dt, const Eigen::MatrixXd& u,
                Eigen::MatrixXd& next) {
  const Index n = u.cols();
  const int m = static_cast<int>(u.rows());
  const double inv_h2 = 1.0 / (h * h);
  next.col(0) = u.col(0);
  next.col(n - 1) = u.col(n - 1);
  double res = 0.0;
  double wu[kMaxDim];
  for (Index k = 1; k + 1 < n; ++k) {
    p.wu_raw(u.col(k).data(), wu);
    for (int c = 0; c < m; ++c) {
      const double rate = (u(c, k - 1) + u(c, k + 1) - 2.0 * u(c, k)) * inv_h2 - wu[c];
      next(c, k) = u(c, k) + dt * rate;
      const double mag = std::abs(rate);
      if (!std::isfinite(mag))
        res = std::numeric_limits<double>::quiet_NaN();
      else
        res = std::max(res, mag);
    }
  }
  return res;
}

// Discrete energy density (|Udot|^2/2 + W) at interior nodes; endpoints get 0.
Eigen::VectorXd profile_energy_density(const ConnectionProfile& c, const Potential& p) {
  const Index n = c.samples();
  Eigen::VectorXd e = Eigen::VectorXd::Zero(n);
  for (Index k = 1; k + 1 < n; ++k) {
    const Vec du = (c.values.col(k + 1) - c.values.col(k - 1)) / (2.0 * c.spacing);
    e[k] = 0.5 * du.squaredNorm() + p.w_raw(c.values.col(k).data());
  }
  return e;
}

void relax_to_tolerance(const Potential& p, double h, double tol, long max_iters,
                        double dt, Eigen::MatrixXd& u, double& out_res, long& total_iters) {
  Eigen::MatrixXd next(u.rows(), u.cols());
  for (long iter = 0;; ++iter) {
    const double res = sweep_1d(p, h, dt, u, next);
    if (!std::isfinite(res)) {
      std::ostringstream msg;
      msg << "connection relaxation diverged at iteration " << iter;
      throw ConnectionConvergenceError(msg.str(), res);
    }
    out_res = res;
    if (res <= tol) {
      total_iters += iter;
      return;
    }
    if (iter >= max_iters) {
      std::ostringstream msg;
      msg << "connection relaxation stalled: residual " << res << " > tol " << tol << " after "
          << max_iters << " iterations";
      throw ConnectionConvergenceError(msg.str(), res);
    }
    u.swap(next);
  }
}

}  // namespace

double suggest_half_length(const Potential& p, int i, int j, double tail_tol) {
  if (p.continuum_minima())
    throw UnsupportedError("connections need isolated minima");
  const auto& mins = p.minima();
  if (i < 0 || j < 0 || i >= static_cast<int>(mins.size()) || j >= static_cast<int>(mins.size()))
    throw DomainError("minimum index out of range");
  const Vec ai = mins[i], aj = mins[j];
  const double gap = (aj - ai).norm();
  double L = gap;
  for (const Vec& a : {ai, aj}) {
    const double lam = min_hessian_eigenvalue(p, a);
    if (!(lam > 0.0)) throw DomainError("degenerate minimum: cannot estimate tail decay");
    L = std::max(L, gap + std::log(std::max(gap, 1.0) / tail_tol) / std::sqrt(lam));
  }
  return L;
}

ConnectionProfile sample_profile(const std::function<Vec(double)>& fn, double half_length,
                                 double spacing, Vec left_min, Vec right_min) {
  if (!(half_length > 0.0) || !(spacing > 0.0))
    throw ConfigError("profile needs positive half-length and spacing");
  int cells = static_cast<int>(std::lround(2.0 * half_length / spacing));
  if (cells % 2 != 0) ++cells;
  cells = std::max(cells, 8);
  const double h = 2.0 * half_length / cells;
  ConnectionProfile c;
  c.half_length = half_length;
  c.spacing = h;
  c.left_minimum = std::move(left_min);
  c.right_minimum = std::move(right_min);
  c.eta.resize(cells + 1);
  const int m = static_cast<int>(c.left_minimum.size());
  c.values.resize(m, cells + 1);
  for (int k = 0; k <= cells; ++k) {
    c.eta[k] = -half_length + k * h;
    Vec v = fn(c.eta[k]);
    if (v.size() != m) throw ShapeError("profile sample has wrong dimension");
    c.values.col(k) = v;
  }
  Index anchor = 0;
  c.values.colwise().norm().minCoeff(&anchor);
  c.phase_anchor = static_cast<int>(anchor);
  return c;
}

ConnectionProfile solve_connection(const Potential& p, int i, int j, double half_length,
                                   double spacing, const ConnectionSolveOptions& opts) {
  if (p.continuum_minima())
    throw UnsupportedError("connection solving requires isolated minima (" + p.name() +
                           " has a continuum of minima)");
  const auto& mins = p.minima();
  if (i < 0 || j < 0 || i >= static_cast<int>(mins.size()) || j >= static_cast<int>(mins.size()))
    throw DomainError("minimum index out of range");
  if (i == j) throw DomainError("no connection between identical minima");
  if (!(half_length > 0.0) || !(spacing > 0.0))
    throw ConfigError("connection needs positive half-length and spacing");

  const Vec ai = mins[i], aj = mins[j];
  const int m = p.dim();

  int cells = static_cast<int>(std::lround(2.0 * half_length / spacing));
  if (cells % 2 != 0) ++cells;
  cells = std::max(cells, 8);
  const double h = 2.0 * half_length / cells;
  const Index n = cells + 1;

  ConnectionProfile c;
  c.half_length = half_length;
  c.spacing = h;
  c.left_minimum = ai;
  c.right_minimum = aj;
  c.eta.resize(n);
  c.values.resize(m, n);
  const double root2 = std::sqrt(2.0);
  for (Index k = 0; k < n; ++k) {
    c.eta[k] = -half_length + k * h;
    const double s = 0.5 * (1.0 + std::tanh(c.eta[k] / root2));
    c.values.col(k) = ai + s * (aj - ai);
  }
  // The endpoints are clamped for the whole relaxation; pin them to the
  // minima exactly rather than to the interpolant's tail values.
  c.values.col(0) = ai;
  c.values.col(n - 1) = aj;

  // Stability-limited step from the Hessian along the initial path.
  double lambda = 0.0;
  for (Index k = 0; k < n; ++k) lambda = std::max(lambda, p.hessian_norm(c.values.col(k)));
  double dt = opts.dt;
  const double dt_max = 0.9 * 2.0 / (4.0 / (h * h) + lambda);
  if (dt == 0.0)
    dt = dt_max;
  else if (dt > dt_max)
    throw ConfigError("connection dt exceeds the stability bound");

  c.residual = std::numeric_limits<double>::infinity();
  const int center = cells / 2;
  for (int pass = 0; pass < 3; ++pass) {
    relax_to_tolerance(p, h, opts.tol, opts.max_iters, dt, c.values, c.residual, c.iterations);
    // Re-anchor: energy-density peak to eta = 0 (nearest node).
    Eigen::VectorXd e = profile_energy_density(c, p);
    Index peak = 0;
    e.maxCoeff(&peak);
    const int shift = static_cast<int>(peak) - center;
    if (peak > 0 && peak + 1 < n) {
      const double denom = e[peak - 1] - 2.0 * e[peak] + e[peak + 1];
      const double frac = denom != 0.0 ? 0.5 * (e[peak - 1] - e[peak + 1]) / denom : 0.0;
      c.anchor_offset = (shift + frac) * h;
    } else {
      c.anchor_offset = shift * h;
    }
    if (shift == 0) break;
    Eigen::MatrixXd rolled(m, n);
    for (Index k = 0; k < n; ++k) {
      const Index from = k + shift;
      if (from < 0)
        rolled.col(k) = ai;
      else if (from >= n)
        rolled.col(k) = aj;
      else
        rolled.col(k) = c.values.col(from);
    }
    rolled.col(0) = ai;
    rolled.col(n - 1) = aj;
    c.values = std::move(rolled);
  }

  Index anchor = 0;
  c.values.colwise().norm().minCoeff(&anchor);
  c.phase_anchor = static_cast<int>(anchor);

  // Tail flatness over the outer tenth of each side (the half-length was
  // supposed to leave the profile at the minima well before the clamp).
  double tail = 0.0;
  for (Index k = 0; k < n; ++k) {
    if (c.eta[k] <= -0.9 * half_length) tail = std::max(tail, (c.values.col(k) - ai).norm());
    if (c.eta[k] >= 0.9 * half_length) tail = std::max(tail, (c.values.col(k) - aj).norm());
  }
  c.tail_gap = tail;

  const SigmaResult s = sigma(c, p);
  c.sigma = s.value;
  c.sigma_via_2w = s.via_2w;
  c.sigma_error = s.error;
  return c;
}

double equipartition_defect(const ConnectionProfile& c, const Potential& p) {
  if (p.dim() != c.dim_u()) throw ShapeError("potential/profile dimension mismatch");
  double defect = 0.0;
  for (Index k = 1; k + 1 < c.samples(); ++k) {
    const Vec du = (c.values.col(k + 1) - c.values.col(k - 1)) / (2.0 * c.spacing);
    defect = std::max(defect,
                      std::abs(0.5 * du.squaredNorm() - p.w_raw(c.values.col(k).data())));
  }
  return defect;
}

ConvergenceReport check_equipartition(const Potential& p, int i, int j, double half_length,
                                      const std::vector<double>& spacings,
                                      const ConnectionSolveOptions& opts) {
  std::vector<double> defects;
  for (double h : spacings)
    defects.push_back(equipartition_defect(solve_connection(p, i, j, half_length, h, opts), p));
  return assess_convergence(spacings, defects, 1.8, 1e-12);
}

SigmaResult sigma(const ConnectionProfile& c, const Potential& p) {
  if (p.dim() != c.dim_u()) throw ShapeError("potential/profile dimension mismatch");
  const Index n = c.samples();
  const double h = c.spacing;

  // Composite midpoint rule; midpoint samples of U and Udot from 4th-order
  // stencils where they fit (2-point fallback on the flat end intervals).
  auto quadrature = [&](Index stride, double& action, double& via_2w) {
    action = 0.0;
    via_2w = 0.0;
    const double hh = h * stride;
    Vec mid(c.dim_u()), du(c.dim_u());
    for (Index k = 0; k + stride < n; k += stride) {
      if (k >= stride && k + 2 * stride < n) {
        mid = (9.0 * (c.values.col(k) + c.values.col(k + stride)) -
               (c.values.col(k - stride) + c.values.col(k + 2 * stride))) /
              16.0;
        du = (27.0 * (c.values.col(k + stride) - c.values.col(k)) -
              (c.values.col(k + 2 * stride) - c.values.col(k - stride))) /
             (24.0 * hh);
      } else {
        mid = 0.5 * (c.values.col(k) + c.values.col(k + stride));
        du = (c.values.col(k + stride) - c.values.col(k)) / hh;
      }
      const double w = p.w_raw(mid.data());
      action += hh * (0.5 * du.squaredNorm() + w);
      via_2w += hh * 2.0 * w;
    }
  };

  SigmaResult r;
  double coarse_action = 0.0, coarse_2w = 0.0;
  quadrature(1, r.value, r.via_2w);
  quadrature(2, coarse_action, coarse_2w);
  const double quad_err = std::abs(r.value - coarse_action) / 3.0;

  // Exponential tails past the clamped endpoints, from the linearized decay
  // rate at each minimum.
  double tail = 0.0;
  const Vec* ends[2] = {&c.left_minimum, &c.right_minimum};
  for (int side = 0; side < 2; ++side) {
    const Vec& a = *ends[side];
    const double lam = min_hessian_eigenvalue(p, a);
    if (!(lam > 0.0)) continue;
    const double kappa = std::sqrt(lam);
    const Index k_in = side == 0 ? 1 : n - 2;
    const double delta = (c.values.col(k_in) - a).norm() * std::exp(-kappa * h);
    tail += 0.5 * kappa * delta * delta;
  }
  r.tail = tail;
  r.value += tail;
  r.via_2w += tail;
  r.error = quad_err + tail;
  return r;
}

TriangleReport check_triangle_inequality(const Potential& p, double half_length, double spacing,
                                         double tol, const ConnectionSolveOptions& opts) {
  if (p.continuum_minima())
    throw UnsupportedError("triangle inequality requires isolated minima");
  const int n = static_cast<int>(p.minima().size());
  TriangleReport rep;
  rep.tolerance = tol;
  rep.sigmas = Eigen::MatrixXd::Zero(n, n);
  rep.worst_slack = std::numeric_limits<double>::infinity();

  std::vector<double> values;
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) {
      const double L = half_length > 0.0 ? half_length : suggest_half_length(p, i, j);
      const ConnectionProfile c = solve_connection(p, i, j, L, spacing, opts);
      rep.sigmas(i, j) = c.sigma;
      rep.sigmas(j, i) = c.sigma;
      values.push_back(c.sigma);
    }
  for (std::size_t a = 0; a < values.size(); ++a)
    for (std::size_t b = a + 1; b < values.size(); ++b)
      rep.max_pair_spread = std::max(rep.max_pair_spread, std::abs(values[a] - values[b]));

  bool any_triple = false;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < n; ++k) {
        if (i == j || j == k || i == k) continue;
        any_triple = true;
        rep.worst_slack =
            std::min(rep.worst_slack, rep.sigmas(i, j) + rep.sigmas(j, k) - rep.sigmas(i, k));
      }
  if (!any_triple) rep.worst_slack = 0.0;  // vacuous
  rep.pass = rep.worst_slack >= -tol;
  return rep;
}

ProfileInterpolant::ProfileInterpolant(const ConnectionProfile& c)
    : eta_(c.eta), values_(c.values), spacing_(c.spacing), half_length_(c.half_length) {
  const Index n = eta_.size();
  const int m = static_cast<int>(values_.rows());
  slopes_.resize(m, n);
  // Fritsch-Carlson monotone cubic slopes, componentwise.
  for (int comp = 0; comp < m; ++comp) {
    Eigen::VectorXd d(n - 1);
    for (Index k = 0; k + 1 < n; ++k) d[k] = (values_(comp, k + 1) - values_(comp, k)) / spacing_;
    for (Index k = 1; k + 1 < n; ++k) {
      if (d[k - 1] * d[k] <= 0.0)
        slopes_(comp, k) = 0.0;
      else
        slopes_(comp, k) = 2.0 * d[k - 1] * d[k] / (d[k - 1] + d[k]);
    }
    auto end_slope = [&](double d0, double d1) {
      double s = 1.5 * d0 - 0.5 * d1;
      if (s * d0 <= 0.0) return 0.0;
      if (std::abs(s) > 3.0 * std::abs(d0)) return 3.0 * d0;
      return s;
    };
    slopes_(comp, 0) = end_slope(d[0], n > 2 ? d[1] : d[0]);
    slopes_(comp, n - 1) = end_slope(d[n - 2], n > 2 ? d[n - 3] : d[n - 2]);
  }
}

Vec ProfileInterpolant::operator()(double eta) const {
  const Index n = eta_.size();
  if (eta <= eta_[0]) return values_.col(0);
  if (eta >= eta_[n - 1]) return values_.col(n - 1);
  Index k = static_cast<Index>((eta - eta_[0]) / spacing_);
  k = std::min(k, n - 2);
  const double t = (eta - eta_[k]) / spacing_;
  const double t2 = t * t, t3 = t2 * t;
  const double h00 = 2 * t3 - 3 * t2 + 1;
  const double h10 = t3 - 2 * t2 + t;
  const double h01 = -2 * t3 + 3 * t2;
  const double h11 = t3 - t2;
  return h00 * values_.col(k) + h10 * spacing_ * slopes_.col(k) + h01 * values_.col(k + 1) +
         h11 * spacing_ * slopes_.col(k + 1);
}

}  // namespace sten
