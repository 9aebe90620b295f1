#include "sten/grid.hpp"

#include <cmath>
#include <sstream>

namespace sten {
namespace {

// Neighbor node offsets along one axis for first/second differences.
struct AxisContext {
  Index stride;
  int count;   // nodes along the axis
  int cells;   // count - 1
  double h;
};

}  // namespace

Grid Grid::make(int dim, Vec origin, double spacing, std::array<int, kMaxDim> cells) {
  if (dim < 1 || dim > kMaxDim) throw ConfigError("grid dimension must be 1..3");
  if (!(spacing > 0.0)) throw ConfigError("grid spacing must be > 0");
  if (origin.size() != dim) throw ShapeError("grid origin has wrong dimension");
  for (int a = 0; a < dim; ++a)
    if (cells[a] < 4) throw ConfigError("grid needs at least 4 cells per axis");
  for (int a = dim; a < kMaxDim; ++a) cells[a] = 0;
  Grid g;
  g.dim = dim;
  g.origin = std::move(origin);
  g.spacing = spacing;
  g.cells = cells;
  return g;
}

void GridField::validate() const {
  if (dim_u() != grid.dim) throw ShapeError("field dim_u must equal the grid dimension");
  if (values.cols() != grid.num_nodes()) throw ShapeError("field node count mismatch");
  if (!values.allFinite()) throw DomainError("field contains non-finite values");
}

GridField sample_field(const Grid& g, Boundary boundary,
                       const std::function<Vec(const Vec&)>& fn) {
  GridField f;
  f.grid = g;
  f.boundary = boundary;
  f.values.resize(g.dim, g.num_nodes());
  for_each_node(g, [&](Index node, int ix, int iy, int iz) {
    Vec u = fn(g.position(ix, iy, iz));
    if (u.size() != g.dim) throw ShapeError("sampled value has wrong dimension");
    f.values.col(node) = u;
  });
  if (boundary == Boundary::kPeriodic) {
    // Identify the duplicated high faces with the low faces exactly.
    for (int a = 0; a < g.dim; ++a) {
      const Index s = g.stride(a);
      const Index span = g.cells[a] * s;
      for_each_node(g, [&](Index node, int ix, int iy, int iz) {
        const int idx[3] = {ix, iy, iz};
        if (idx[a] == g.cells[a]) f.values.col(node) = f.values.col(node - span);
      });
    }
  }
  f.validate();
  return f;
}

GridField manufactured_field(const std::string& name, const Grid& g, Boundary boundary) {
  const int n = g.dim;
  if (name.rfind("constant:", 0) == 0) {
    Vec c(n);
    std::istringstream in(name.substr(9));
    std::string tok;
    for (int k = 0; k < n; ++k) {
      if (!std::getline(in, tok, ',')) throw ConfigError("constant field needs dim components");
      c[k] = std::stod(tok);
    }
    return sample_field(g, boundary, [c](const Vec&) { return c; });
  }
  if (name == "identity")
    return sample_field(g, boundary, [](const Vec& x) { return x; });
  if (name == "shear")
    return sample_field(g, boundary, [n](const Vec& x) {
      Vec u = Vec::Zero(n);
      u[0] = x[0];
      return u;
    });
  if (name == "quadratic")
    return sample_field(g, boundary, [n](const Vec& x) {
      Vec u(n);
      u.setConstant(x.squaredNorm());
      return u;
    });
  if (name == "trig")
    return sample_field(g, boundary, [n](const Vec& x) {
      Vec u(n);
      for (int k = 0; k < n; ++k) u[k] = (k % 2 == 0) ? std::sin(x[k]) : std::cos(x[k]);
      return u;
    });
  if (name == "front")
    return sample_field(g, boundary, [n](const Vec& x) {
      Vec u = Vec::Zero(n);
      u[0] = std::tanh(x[0] / std::sqrt(2.0));
      return u;
    });
  if (name == "vortex") {
    if (n != 2) throw ConfigError("vortex field requires dim 2");
    return sample_field(g, boundary, [](const Vec& x) {
      const double r = x.norm();
      const double f = r / std::sqrt(r * r + 2.0);
      Vec u(2);
      if (r == 0.0)
        u.setZero();
      else
        u = (f / r) * x;
      return u;
    });
  }
  throw ConfigError("unknown manufactured field: " + name);
}

namespace {

// First derivative of all components along one axis at one node.
// pos is the node index along the axis.
template <typename ValueMat>
inline void axis_first_derivative(const ValueMat& v, Boundary bc, const AxisContext& ax,
                                  Index node, int pos, Eigen::Ref<Eigen::VectorXd> out) {
  const Index s = ax.stride;
  if (bc == Boundary::kPeriodic) {
    const Index im = (pos == 0) ? node + (ax.cells - 1) * s : node - s;
    const Index ip = (pos == ax.cells) ? node - (ax.cells - 1) * s : node + s;
    out = (v.col(ip) - v.col(im)) / (2.0 * ax.h);
  } else if (pos == 0) {
    out = (-3.0 * v.col(node) + 4.0 * v.col(node + s) - v.col(node + 2 * s)) / (2.0 * ax.h);
  } else if (pos == ax.cells) {
    out = (3.0 * v.col(node) - 4.0 * v.col(node - s) + v.col(node - 2 * s)) / (2.0 * ax.h);
  } else {
    out = (v.col(node + s) - v.col(node - s)) / (2.0 * ax.h);
  }
}

template <typename ValueMat>
inline void axis_second_derivative(const ValueMat& v, Boundary bc, const AxisContext& ax,
                                   Index node, int pos, Eigen::Ref<Eigen::VectorXd> out) {
  const Index s = ax.stride;
  const double h2 = ax.h * ax.h;
  if (bc == Boundary::kPeriodic) {
    const Index im = (pos == 0) ? node + (ax.cells - 1) * s : node - s;
    const Index ip = (pos == ax.cells) ? node - (ax.cells - 1) * s : node + s;
    out = (v.col(ip) - 2.0 * v.col(node) + v.col(im)) / h2;
  } else if (pos == 0) {
    out = (2.0 * v.col(node) - 5.0 * v.col(node + s) + 4.0 * v.col(node + 2 * s) -
           v.col(node + 3 * s)) / h2;
  } else if (pos == ax.cells) {
    out = (2.0 * v.col(node) - 5.0 * v.col(node - s) + 4.0 * v.col(node - 2 * s) -
           v.col(node - 3 * s)) / h2;
  } else {
    out = (v.col(node + s) - 2.0 * v.col(node) + v.col(node - s)) / h2;
  }
}

AxisContext axis_context(const Grid& g, int axis) {
  return {g.stride(axis), g.nodes_along(axis), g.cells[axis], g.spacing};
}

}  // namespace

JacobianField gradient(const GridField& f) {
  f.validate();
  const Grid& g = f.grid;
  const int n = g.dim;
  JacobianField jac;
  jac.grid = g;
  jac.entries.resize(n * n, g.num_nodes());
  Eigen::VectorXd col(n);
  for (int a = 0; a < n; ++a) {
    const AxisContext ax = axis_context(g, a);
    for_each_node(g, [&](Index node, int ix, int iy, int iz) {
      const int idx[3] = {ix, iy, iz};
      axis_first_derivative(f.values, f.boundary, ax, node, idx[a], col);
      jac.entries.block(n * a, node, n, 1) = col;  // J(i,a) at i + n*a
    });
  }
  return jac;
}

Eigen::MatrixXd laplacian(const GridField& f) {
  f.validate();
  const Grid& g = f.grid;
  const int n = g.dim;
  Eigen::MatrixXd lap = Eigen::MatrixXd::Zero(n, g.num_nodes());
  Eigen::VectorXd col(n);
  for (int a = 0; a < n; ++a) {
    const AxisContext ax = axis_context(g, a);
    for_each_node(g, [&](Index node, int ix, int iy, int iz) {
      const int idx[3] = {ix, iy, iz};
      axis_second_derivative(f.values, f.boundary, ax, node, idx[a], col);
      lap.col(node) += col;
    });
  }
  return lap;
}

Eigen::VectorXd energy_density(const GridField& f, const Potential& p, const JacobianField& jac) {
  if (p.dim() != f.dim_u()) throw ShapeError("potential/field dimension mismatch");
  const Index nn = f.grid.num_nodes();
  Eigen::VectorXd e(nn);
  for (Index node = 0; node < nn; ++node)
    e[node] = 0.5 * jac.entries.col(node).squaredNorm() + p.w_raw(f.values.col(node).data());
  return e;
}

Eigen::VectorXd energy_density(const GridField& f, const Potential& p) {
  return energy_density(f, p, gradient(f));
}

Eigen::VectorXd potential_density(const GridField& f, const Potential& p) {
  if (p.dim() != f.dim_u()) throw ShapeError("potential/field dimension mismatch");
  const Index nn = f.grid.num_nodes();
  Eigen::VectorXd w(nn);
  for (Index node = 0; node < nn; ++node) w[node] = p.w_raw(f.values.col(node).data());
  return w;
}

double box_energy_midpoint(const GridField& f, const Potential& p) {
  const Grid& g = f.grid;
  const int n = g.dim;
  const double h = g.spacing;
  const double vol = g.cell_volume();
  const int ncx = g.cells[0];
  const int ncy = n > 1 ? g.cells[1] : 1;
  const int ncz = n > 2 ? g.cells[2] : 1;
  const Index sx = g.stride(0);
  const Index sy = n > 1 ? g.stride(1) : 0;
  const Index sz = n > 2 ? g.stride(2) : 0;
  const int corners = 1 << n;

  double total = 0.0;
  Vec ubar(n), diff(n);
  for (int cz = 0; cz < ncz; ++cz)
    for (int cy = 0; cy < ncy; ++cy)
      for (int cx = 0; cx < ncx; ++cx) {
        const Index base = cx * sx + cy * sy + cz * sz;
        // Cell-centered gradient: average corner differences along each axis.
        double grad2 = 0.0;
        ubar.setZero();
        for (int c = 0; c < corners; ++c) {
          Index node = base;
          if (c & 1) node += sx;
          if (c & 2) node += sy;
          if (c & 4) node += sz;
          ubar += f.values.col(node);
        }
        ubar /= corners;
        for (int a = 0; a < n; ++a) {
          const Index sa = a == 0 ? sx : (a == 1 ? sy : sz);
          const int bit = 1 << a;
          diff.setZero();
          for (int c = 0; c < corners; ++c) {
            if (c & bit) continue;  // pair (c, c|bit)
            Index lo = base;
            if (c & 1) lo += sx;
            if (c & 2) lo += sy;
            if (c & 4) lo += sz;
            diff += f.values.col(lo + sa) - f.values.col(lo);
          }
          diff /= (corners / 2) * h;
          grad2 += diff.squaredNorm();
        }
        total += vol * (0.5 * grad2 + p.w_raw(ubar.data()));
      }
  return total;
}

namespace {

double cell_quadrature_impl(const Grid& g, const Eigen::VectorXd& nodal, int step) {
  const int n = g.dim;
  const double h = g.spacing * step;
  double vol = 1.0;
  for (int a = 0; a < n; ++a) vol *= h;
  const int ncx = g.cells[0] / step;
  const int ncy = n > 1 ? g.cells[1] / step : 1;
  const int ncz = n > 2 ? g.cells[2] / step : 1;
  const Index sx = g.stride(0) * step;
  const Index sy = n > 1 ? g.stride(1) * step : 0;
  const Index sz = n > 2 ? g.stride(2) * step : 0;
  const int corners = 1 << n;

  double total = 0.0;
  for (int cz = 0; cz < ncz; ++cz)
    for (int cy = 0; cy < ncy; ++cy)
      for (int cx = 0; cx < ncx; ++cx) {
        const Index base = cx * sx + cy * sy + cz * sz;
        double mean = 0.0;
        for (int c = 0; c < corners; ++c) {
          Index node = base;
          if (c & 1) node += sx;
          if (c & 2) node += sy;
          if (c & 4) node += sz;
          mean += nodal[node];
        }
        total += vol * mean / corners;
      }
  return total;
}

}  // namespace

double cell_quadrature(const Grid& g, const Eigen::VectorXd& nodal) {
  if (nodal.size() != g.num_nodes()) throw ShapeError("nodal array size mismatch");
  return cell_quadrature_impl(g, nodal, 1);
}

double cell_quadrature_coarse(const Grid& g, const Eigen::VectorXd& nodal) {
  if (nodal.size() != g.num_nodes()) throw ShapeError("nodal array size mismatch");
  for (int a = 0; a < g.dim; ++a)
    if (g.cells[a] % 2 != 0) throw ConfigError("coarse quadrature needs even cell counts");
  return cell_quadrature_impl(g, nodal, 2);
}

}  // namespace sten
