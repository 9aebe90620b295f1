#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "sten/convergence.hpp"
#include "sten/grid.hpp"
#include "sten/io.hpp"
#include "testutil.hpp"

using namespace sten;

namespace {

Grid box2(double lo, double hi, double h) {
  const int cells = static_cast<int>(std::lround((hi - lo) / h));
  return Grid::make(2, Vec::Constant(2, lo), (hi - lo) / cells, {cells, cells, 0});
}

}  // namespace

TEST_CASE("grid construction guards") {
  CHECK_THROWS_AS(Grid::make(2, Vec::Zero(2), -0.1, {8, 8, 0}), ConfigError);
  CHECK_THROWS_AS(Grid::make(2, Vec::Zero(2), 0.1, {3, 8, 0}), ConfigError);
  CHECK_THROWS_AS(Grid::make(4, Vec::Zero(2), 0.1, {8, 8, 0}), ConfigError);
  Grid g = Grid::make(2, Vec::Zero(2), 0.25, {8, 6, 0});
  CHECK(g.num_nodes() == 9 * 7);
  CHECK(g.box_high(0) == doctest::Approx(2.0));
}

TEST_CASE("gradient is exact on constant and linear fields") {
  Grid g = box2(-1.0, 1.0, 0.1);
  SUBCASE("constant") {
    GridField f = manufactured_field("constant:0.5,-1.5", g);
    JacobianField jac = gradient(f);
    CHECK(jac.entries.cwiseAbs().maxCoeff() <= 1e-13);
  }
  SUBCASE("shear u = (x1, 0)") {
    GridField f = manufactured_field("shear", g);
    JacobianField jac = gradient(f);
    for (Index node = 0; node < g.num_nodes(); ++node) {
      Mat J = jac.at(node);
      CHECK(std::abs(J(0, 0) - 1.0) <= 1e-13);  // includes one-sided boundary stencils
      CHECK(std::abs(J(0, 1)) <= 1e-13);
      CHECK(std::abs(J(1, 0)) <= 1e-13);
      CHECK(std::abs(J(1, 1)) <= 1e-13);
    }
  }
}

TEST_CASE("laplacian is exact on linear and quadratic fields") {
  Grid g = box2(-1.0, 1.0, 0.125);
  CHECK(laplacian(manufactured_field("identity", g)).cwiseAbs().maxCoeff() <= 1e-12);
  // u_i = |x|^2 has Lap u_i = 2n at every node, boundaries included.
  Eigen::MatrixXd lap = laplacian(manufactured_field("quadratic", g));
  CHECK((lap.array() - 4.0).abs().maxCoeff() <= 1e-11);
}

TEST_CASE("trig field derivatives converge at second order") {
  std::vector<double> hs = {0.04, 0.02, 0.01};
  std::vector<double> grad_errs, lap_errs;
  for (double h : hs) {
    Grid g = box2(0.0, 1.6, h);
    GridField f = manufactured_field("trig", g);
    JacobianField jac = gradient(f);
    Eigen::MatrixXd lap = laplacian(f);
    double ge = 0.0, le = 0.0;
    for_each_node(g, [&](Index node, int ix, int iy, int) {
      const Vec x = g.position(ix, iy);
      Mat J_exact = Mat::Zero(2, 2);
      J_exact(0, 0) = std::cos(x[0]);
      J_exact(1, 1) = -std::sin(x[1]);
      ge = std::max(ge, (jac.at(node) - J_exact).cwiseAbs().maxCoeff());
      Vec lap_exact(2);
      lap_exact << -std::sin(x[0]), -std::cos(x[1]);
      le = std::max(le, (lap.col(node) - lap_exact).cwiseAbs().maxCoeff());
    });
    grad_errs.push_back(ge);
    lap_errs.push_back(le);
  }
  CHECK(fit_order(hs, grad_errs) >= 1.8);
  CHECK(fit_order(hs, lap_errs) >= 1.8);
}

TEST_CASE("periodic wrap derivatives match the analytic trig field") {
  const int cells = 64;
  const double h = 2.0 * M_PI / cells;
  Grid g = Grid::make(2, Vec::Zero(2), h, {cells, cells, 0});
  GridField f = manufactured_field("trig", g, Boundary::kPeriodic);
  JacobianField jac = gradient(f);
  double err = 0.0;
  for_each_node(g, [&](Index node, int ix, int iy, int) {
    const Vec x = g.position(ix, iy);
    err = std::max(err, std::abs(jac.at(node)(0, 0) - std::cos(x[0])));
  });
  CHECK(err <= h * h);  // centered everywhere, no boundary closure
}

TEST_CASE("energy density") {
  Grid g = box2(-1.0, 1.0, 0.1);
  SUBCASE("constant minimum gives e == 0") {
    GridField f = manufactured_field("constant:1,0", g);
    Eigen::VectorXd e = energy_density(f, Potential::double_well(2));
    CHECK(e.cwiseAbs().maxCoeff() <= 1e-14);
  }
  SUBCASE("shear with zero potential gives e == 1/2") {
    GridField f = manufactured_field("shear", g);
    Eigen::VectorXd e = energy_density(f, Potential::zero(2));
    CHECK((e.array() - 0.5).abs().maxCoeff() <= 1e-13);
  }
  SUBCASE("tanh front: e = 2W pointwise at stencil order") {
    std::vector<double> hs = {0.04, 0.02, 0.01};
    std::vector<double> errs;
    for (double h : hs) {
      Grid gf = box2(-2.0, 2.0, h);
      GridField f = manufactured_field("front", gf);
      Potential dw = Potential::double_well(2);
      Eigen::VectorXd e = energy_density(f, dw);
      Eigen::VectorXd w = potential_density(f, dw);
      double err = 0.0;
      for (Index node = 0; node < gf.num_nodes(); ++node)
        err = std::max(err, std::abs(e[node] - 2.0 * w[node]));
      errs.push_back(err);
    }
    CHECK(fit_order(hs, errs) >= 1.8);
  }
  SUBCASE("e >= 0 for random smooth fields under every family") {
    Grid gf = box2(-1.0, 1.0, 0.2);
    for (std::uint64_t seed : {1u, 2u, 3u}) {
      GridField f = testutil::random_smooth_field(gf, Boundary::kDirichlet, seed);
      for (const Potential& p : {Potential::ginzburg_landau(2), Potential::triple_well(0.4)}) {
        Eigen::VectorXd e = energy_density(f, p);
        CHECK(e.minCoeff() >= 0.0);
      }
    }
  }
}

TEST_CASE("derivatives commute with adding a constant field") {
  Grid g = box2(-1.0, 1.0, 0.2);
  GridField f = testutil::random_smooth_field(g, Boundary::kDirichlet, 17);
  GridField shifted = f;
  shifted.values.row(0).array() += 0.75;
  shifted.values.row(1).array() -= 0.25;
  CHECK((gradient(f).entries - gradient(shifted).entries).cwiseAbs().maxCoeff() <= 1e-12);
  CHECK((laplacian(f) - laplacian(shifted)).cwiseAbs().maxCoeff() <= 1e-11);
}

TEST_CASE("manufactured field values") {
  Grid g = box2(-2.0, 2.0, 0.25);
  SUBCASE("constant") {
    GridField f = manufactured_field("constant:1,0", g);
    CHECK(f.values.col(0)[0] == 1.0);
    CHECK(f.values.col(g.num_nodes() - 1)[1] == 0.0);
  }
  SUBCASE("front vanishes on the mid-plane") {
    GridField f = manufactured_field("front", g);
    for_each_node(g, [&](Index node, int ix, int iy, int) {
      if (g.position(ix, iy)[0] == 0.0) CHECK(f.values.col(node).norm() <= 1e-15);
    });
  }
  SUBCASE("vortex magnitude at r = sqrt(2)") {
    GridField f = manufactured_field("vortex", g);
    for_each_node(g, [&](Index node, int ix, int iy, int) {
      const Vec x = g.position(ix, iy);
      if (std::abs(x.norm() - std::sqrt(2.0)) < 1e-12)
        CHECK(f.values.col(node).norm() == doctest::Approx(std::sqrt(2.0) / 2.0).epsilon(1e-12));
    });
  }
  SUBCASE("unknown name is a config error") {
    CHECK_THROWS_AS(manufactured_field("nonsense", g), ConfigError);
  }
}

TEST_CASE("field snapshot round trip") {
  testutil::TempDir tmp;
  Grid g = box2(-1.0, 1.0, 0.25);
  GridField f = testutil::random_smooth_field(g, Boundary::kDirichlet, 23);
  write_field_snapshot(f, tmp.path() / "u");
  GridField back = read_field_snapshot(tmp.path() / "u");
  CHECK(back.grid.dim == 2);
  CHECK(back.grid.spacing == f.grid.spacing);
  CHECK(back.boundary == f.boundary);
  CHECK((back.values - f.values).cwiseAbs().maxCoeff() == 0.0);  // bit-exact
}

TEST_CASE("snapshot with injected NaN is rejected on load") {
  testutil::TempDir tmp;
  Grid g = box2(-1.0, 1.0, 0.25);
  GridField f = manufactured_field("front", g);
  f.values(0, 12) = std::numeric_limits<double>::quiet_NaN();
  // bypass the write-side validation by writing the raw pieces ourselves
  GridField ok = manufactured_field("front", g);
  write_field_snapshot(ok, tmp.path() / "u");
  {
    std::fstream raw(tmp.path() / "u.fld",
                     std::ios::binary | std::ios::in | std::ios::out);
    raw.seekp(-8, std::ios::end);
    const double nan = std::numeric_limits<double>::quiet_NaN();
    raw.write(reinterpret_cast<const char*>(&nan), 8);
  }
  CHECK_THROWS_AS(read_field_snapshot(tmp.path() / "u"), DomainError);
}

TEST_CASE("csv slice export") {
  testutil::TempDir tmp;
  Grid g = box2(-1.0, 1.0, 0.25);
  GridField f = manufactured_field("front", g);
  export_csv_slice(f, tmp.path() / "slice.csv", {-1, 4, 0});
  std::ifstream in(tmp.path() / "slice.csv");
  REQUIRE(in.good());
  std::string header;
  std::getline(in, header);
  CHECK(header == "x1,u1,u2");
  int rows = 0;
  for (std::string line; std::getline(in, line);) ++rows;
  CHECK(rows == g.nodes_along(0));
}

TEST_CASE("cell quadrature matches analytic integrals at second order") {
  // integral of x1^2 + x2 over [0,1]^2 = 1/3 + 1/2
  std::vector<double> hs = {0.1, 0.05, 0.025};
  std::vector<double> errs;
  for (double h : hs) {
    Grid g = box2(0.0, 1.0, h);
    Eigen::VectorXd nodal(g.num_nodes());
    for_each_node(g, [&](Index node, int ix, int iy, int) {
      const Vec x = g.position(ix, iy);
      nodal[node] = x[0] * x[0] + x[1];
    });
    errs.push_back(std::abs(cell_quadrature(g, nodal) - (1.0 / 3.0 + 0.5)));
  }
  CHECK(fit_order(hs, errs) >= 1.8);
}
