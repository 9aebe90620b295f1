#pragma once

#include <array>
#include <functional>
#include <string>

#include "sten/potential.hpp"
#include "sten/types.hpp"

namespace sten {

enum class Boundary { kDirichlet, kPeriodic };

// Uniform box grid in dimension 1..3. Node (ix,iy,iz) sits at
// origin + h*(ix,iy,iz); there are cells[a]+1 nodes along axis a.
struct Grid {
  int dim = 0;
  Vec origin;
  double spacing = 0.0;
  std::array<int, kMaxDim> cells{};

  static Grid make(int dim, Vec origin, double spacing, std::array<int, kMaxDim> cells);

  int nodes_along(int axis) const { return cells[axis] + 1; }
  Index num_nodes() const {
    Index n = 1;
    for (int a = 0; a < dim; ++a) n *= nodes_along(a);
    return n;
  }
  Index stride(int axis) const {
    Index s = 1;
    for (int a = 0; a < axis; ++a) s *= nodes_along(a);
    return s;
  }
  Vec position(int ix, int iy = 0, int iz = 0) const {
    Vec x = origin;
    const int idx[3] = {ix, iy, iz};
    for (int a = 0; a < dim; ++a) x[a] += spacing * idx[a];
    return x;
  }
  double box_low(int axis) const { return origin[axis]; }
  double box_high(int axis) const { return origin[axis] + spacing * cells[axis]; }
  double half_width(int axis) const { return 0.5 * (box_high(axis) - box_low(axis)); }
  double cell_volume() const {
    double v = 1.0;
    for (int a = 0; a < dim; ++a) v *= spacing;
    return v;
  }
};

// Visit every node as f(node, ix, iy, iz). Unused index slots stay 0.
template <typename F>
void for_each_node(const Grid& g, F&& f) {
  const int nx = g.nodes_along(0);
  const int ny = g.dim > 1 ? g.nodes_along(1) : 1;
  const int nz = g.dim > 2 ? g.nodes_along(2) : 1;
  Index node = 0;
  for (int iz = 0; iz < nz; ++iz)
    for (int iy = 0; iy < ny; ++iy)
      for (int ix = 0; ix < nx; ++ix, ++node) f(node, ix, iy, iz);
}

// Sampled vector field u: box -> R^n with dim_u equal to the grid dimension.
// For periodic fields the duplicated high-face nodes mirror the low face
// exactly; sample_field enforces the identification.
struct GridField {
  Grid grid;
  Boundary boundary = Boundary::kDirichlet;
  Eigen::MatrixXd values;  // dim_u x num_nodes, one column per node

  int dim_u() const { return static_cast<int>(values.rows()); }
  Vec at(Index node) const { return values.col(node); }
  // Throws on shape mismatch or non-finite entries.
  void validate() const;
};

// Per-node Jacobian (du_i/dx_j), stored column-major per node: entry (i,j)
// of node k lives at entries(i + dim*j, k).
struct JacobianField {
  Grid grid;
  Eigen::MatrixXd entries;

  Mat at(Index node) const {
    const int n = grid.dim;
    return Eigen::Map<const Eigen::MatrixXd>(entries.col(node).data(), n, n);
  }
};

GridField sample_field(const Grid& g, Boundary boundary,
                       const std::function<Vec(const Vec&)>& fn);

// Named analytic fields for oracle tests:
//   "constant:c1,c2,..."  all nodes equal to the given vector
//   "identity"            u(x) = x
//   "shear"               u = (x_1, 0, ..., 0)
//   "quadratic"           u_i = |x|^2 for every component
//   "trig"                u_i = sin(x_i) for even i, cos(x_i) for odd i
//   "front"               u = (tanh(x_1 / sqrt(2)), 0, ..., 0)
//   "vortex"              n=2 only, u = f(r) (cos t, sin t), f(r) = r/sqrt(r^2+2)
// Signed-distance profile fields live in sharp_interface.
GridField manufactured_field(const std::string& name, const Grid& g,
                             Boundary boundary = Boundary::kDirichlet);

// Centered second-order differences in the interior; one-sided second-order
// at Dirichlet boundaries; wrap-around for periodic fields.
JacobianField gradient(const GridField& f);

// Standard 2n+1-point Laplacian with the same boundary handling as gradient.
// Returns per-node vector samples shaped like f.values.
Eigen::MatrixXd laplacian(const GridField& f);

// e(u) = |grad u|^2 / 2 + W(u) per node (Frobenius norm of the Jacobian).
Eigen::VectorXd energy_density(const GridField& f, const Potential& p);
Eigen::VectorXd energy_density(const GridField& f, const Potential& p, const JacobianField& jac);

// W(u) per node.
Eigen::VectorXd potential_density(const GridField& f, const Potential& p);

// Midpoint-rule integral of e(u) over the whole box: cell-centered gradient
// from corner differences, W at the corner-averaged state.
double box_energy_midpoint(const GridField& f, const Potential& p);

// Midpoint-rule integral over the box of a node-sampled scalar (value at a
// cell center = average of its corner nodes).
double cell_quadrature(const Grid& g, const Eigen::VectorXd& nodal);
// Same on the 2x-coarsened node lattice (all cell counts must be even);
// used for Richardson error estimates.
double cell_quadrature_coarse(const Grid& g, const Eigen::VectorXd& nodal);

}  // namespace sten
