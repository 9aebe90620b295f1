#include "sten/stress_tensor.hpp"

#include <cmath>

namespace sten {
namespace {

// Interior iteration: nodes at least `margin` cells from every Dirichlet
// boundary. Periodic fields have no boundary, so every node qualifies.
template <typename F>
void for_each_interior_node(const Grid& g, Boundary bc, int margin, F&& f) {
  const int lo = (bc == Boundary::kPeriodic) ? 0 : margin;
  for_each_node(g, [&](Index node, int ix, int iy, int iz) {
    if (bc != Boundary::kPeriodic) {
      const int idx[3] = {ix, iy, iz};
      for (int a = 0; a < g.dim; ++a)
        if (idx[a] < lo || idx[a] > g.cells[a] - lo) return;
    }
    f(node);
  });
}

TensorField build_tensor(const GridField& f, const Potential& p, const JacobianField& jac,
                         std::optional<double> eps) {
  f.validate();
  if (p.dim() != f.dim_u()) throw ShapeError("potential/field dimension mismatch");
  if (f.dim_u() != f.grid.dim) throw ShapeError("tensor requires dim_u equal to grid dim");
  if (eps && !(*eps > 0.0)) throw DomainError("epsilon must be > 0");

  const Grid& g = f.grid;
  const int n = g.dim;
  const double e = eps.value_or(1.0);
  TensorField t;
  t.grid = g;
  t.boundary = f.boundary;
  t.epsilon = eps;
  t.entries.resize(n * n, g.num_nodes());

  Mat G(n, n);
  for (Index node = 0; node < g.num_nodes(); ++node) {
    const auto J = jac.at(node);
    G.noalias() = J.transpose() * J;  // G(j,k) = u_xj . u_xk
    const double w = p.w_raw(f.values.col(node).data());
    auto col = t.entries.col(node);
    for (int j = 0; j < n; ++j) {
      double rest = 0.0;
      for (int i = 0; i < n; ++i)
        if (i != j) rest += G(i, i);
      col[j + n * j] = 0.5 * (e * G(j, j) - e * rest - 2.0 * w / e);
      for (int k = j + 1; k < n; ++k) {
        const double off = e * G(j, k);
        col[j + n * k] = off;
        col[k + n * j] = off;
      }
    }
  }
  return t;
}

}  // namespace

TensorField stress_tensor(const GridField& f, const Potential& p, const JacobianField& jac) {
  return build_tensor(f, p, jac, std::nullopt);
}

TensorField stress_tensor(const GridField& f, const Potential& p) {
  return build_tensor(f, p, gradient(f), std::nullopt);
}

TensorField scaled_stress_tensor(const GridField& f, const Potential& p, double eps,
                                 const JacobianField& jac) {
  return build_tensor(f, p, jac, eps);
}

TensorField scaled_stress_tensor(const GridField& f, const Potential& p, double eps) {
  return build_tensor(f, p, gradient(f), eps);
}

Eigen::MatrixXd tensor_divergence(const TensorField& t) {
  const Grid& g = t.grid;
  const int n = g.dim;
  // (div T)_j = sum_k d/dx_k T(j,k), differencing the stored entries with
  // the same boundary closures as the field derivatives.
  Eigen::MatrixXd div = Eigen::MatrixXd::Zero(n, g.num_nodes());
  const Eigen::MatrixXd& v = t.entries;
  Eigen::VectorXd dcol(n * n);
  for (int k = 0; k < n; ++k) {
    const Index s = g.stride(k);
    const int cells = g.cells[k];
    const double h = g.spacing;
    for_each_node(g, [&](Index node, int ix, int iy, int iz) {
      const int idx[3] = {ix, iy, iz};
      const int pos = idx[k];
      if (t.boundary == Boundary::kPeriodic) {
        const Index im = (pos == 0) ? node + (cells - 1) * s : node - s;
        const Index ip = (pos == cells) ? node - (cells - 1) * s : node + s;
        dcol = (v.col(ip) - v.col(im)) / (2.0 * h);
      } else if (pos == 0) {
        dcol = (-3.0 * v.col(node) + 4.0 * v.col(node + s) - v.col(node + 2 * s)) / (2.0 * h);
      } else if (pos == cells) {
        dcol = (3.0 * v.col(node) - 4.0 * v.col(node - s) + v.col(node - 2 * s)) / (2.0 * h);
      } else {
        dcol = (v.col(node + s) - v.col(node - s)) / (2.0 * h);
      }
      for (int j = 0; j < n; ++j) div(j, node) += dcol[j + n * k];
    });
  }
  return div;
}

Eigen::VectorXd tensor_trace(const TensorField& t) {
  const int n = t.grid.dim;
  Eigen::VectorXd tr(t.grid.num_nodes());
  for (Index node = 0; node < t.grid.num_nodes(); ++node) {
    double s = 0.0;
    for (int j = 0; j < n; ++j) s += t.entries(j + n * j, node);
    tr[node] = s;
  }
  return tr;
}

double divergence_identity_gap(const GridField& f, const Potential& p, int margin) {
  const Grid& g = f.grid;
  const int n = g.dim;
  JacobianField jac = gradient(f);
  TensorField t = stress_tensor(f, p, jac);
  Eigen::MatrixXd div = tensor_divergence(t);
  Eigen::MatrixXd lap = laplacian(f);

  double gap = 0.0;
  Vec wu(n), rhs(n);
  for_each_interior_node(g, f.boundary, margin, [&](Index node) {
    p.wu_raw(f.values.col(node).data(), wu.data());
    rhs.noalias() = jac.at(node).transpose() * (lap.col(node) - wu);
    gap = std::max(gap, (div.col(node) - rhs).cwiseAbs().maxCoeff());
  });
  return gap;
}

ConvergenceReport verify_divergence_identity(
    const std::function<GridField(double)>& field_at_spacing, const Potential& p,
    const std::vector<double>& h_sequence, int margin) {
  std::vector<double> errs;
  for (double h : h_sequence) errs.push_back(divergence_identity_gap(field_at_spacing(h), p, margin));
  return assess_convergence(h_sequence, errs, 1.8, 1e-10);
}

TraceIdentityReport trace_identity_report(const TensorField& t, const GridField& f,
                                          const Potential& p, int margin) {
  const Grid& g = t.grid;
  const int n = g.dim;
  JacobianField jac = gradient(f);
  TraceIdentityReport rep;
  rep.trace = tensor_trace(t);
  const double eps_scale = t.epsilon.value_or(1.0);

  for_each_interior_node(g, f.boundary, margin, [&](Index node) {
    const auto J = jac.at(node);
    const double grad2 = J.squaredNorm();  // sum_i |u_xi|^2
    const double w = p.w_raw(f.values.col(node).data());
    const double tr = rep.trace[node];
    // Closed-form trace: (2-n)/2 * sum |u_xi|^2 - n W (with the eps weights
    // of the scaled tensor when present).
    const double formula =
        0.5 * (2.0 - n) * eps_scale * grad2 - n * w / eps_scale;
    rep.max_formula_gap = std::max(rep.max_formula_gap, std::abs(tr - formula));
    const double e = 0.5 * eps_scale * grad2 + w / eps_scale;
    rep.max_bound_excess = std::max(rep.max_bound_excess, tr + (n - 2) * e);
    if (n == 2) rep.max_planar_gap = std::max(rep.max_planar_gap, std::abs(tr + 2.0 * w / eps_scale));
  });
  rep.max_bound_excess = std::max(rep.max_bound_excess, 0.0);
  rep.pass = rep.max_formula_gap <= 1e-12 && rep.max_bound_excess <= 1e-12 &&
             (n != 2 || rep.max_planar_gap <= 1e-12);
  return rep;
}

PsdIdentityReport psd_identity_report(const TensorField& t, const GridField& f,
                                      const Potential& p, int margin) {
  const Grid& g = t.grid;
  const int n = g.dim;
  if (t.epsilon) throw UnsupportedError("PSD identity applies to the unscaled tensor");
  JacobianField jac = gradient(f);
  PsdIdentityReport rep;
  rep.min_eigenvalue = std::numeric_limits<double>::infinity();

  Mat G(n, n), lhs(n, n);
  for_each_interior_node(g, f.boundary, margin, [&](Index node) {
    const auto J = jac.at(node);
    G.noalias() = J.transpose() * J;
    const double w = p.w_raw(f.values.col(node).data());
    const double e = 0.5 * G.trace() + w;
    lhs = t.at(node);
    lhs.diagonal().array() += e;
    rep.max_entry_gap = std::max(rep.max_entry_gap, (lhs - G).cwiseAbs().maxCoeff());
    Eigen::SelfAdjointEigenSolver<Mat> es(G, Eigen::EigenvaluesOnly);
    rep.min_eigenvalue = std::min(rep.min_eigenvalue, es.eigenvalues().minCoeff());
  });
  rep.pass = rep.max_entry_gap <= 1e-12 && rep.min_eigenvalue >= -1e-12;
  return rep;
}

}  // namespace sten
