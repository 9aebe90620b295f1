#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "sten/sharp_interface.hpp"
#include "testutil.hpp"

using namespace sten;

namespace {

const double kSigmaTanh = 2.0 * std::sqrt(2.0) / 3.0;

ConnectionProfile dw_connection(int dim, double spacing = 0.01) {
  return solve_connection(Potential::double_well(dim), 0, 1, 12.0, spacing);
}

Grid box2(double half, double h) {
  const int cells = 2 * std::max(2, static_cast<int>(std::lround(half / h)));
  return Grid::make(2, Vec::Constant(2, -half), 2.0 * half / cells, {cells, cells, 0});
}

}  // namespace

TEST_CASE("plane interface: distance, mesh, and exact ball areas") {
  InterfaceSpec plane = InterfaceSpec::plane(3, 0.0, 6.0, 256);

  SUBCASE("signed distance and unit normal are exact") {
    Vec x = make_vec({0.7, -2.0, 1.0});
    CHECK(plane.signed_distance(x) == 0.7);
    CHECK((plane.distance_gradient(x) - make_vec({1.0, 0.0, 0.0})).norm() == 0.0);
    CHECK(plane.signed_distance(make_vec({-0.2, 0.0, 0.0})) == -0.2);
  }
  SUBCASE("mesh area is exact for the flat patch") {
    CHECK(plane.mesh_area() == doctest::Approx(144.0).epsilon(1e-14));
  }
  SUBCASE("through-center ball: ratio exactly pi") {
    Vec p = make_vec({0.0, 0.3, -0.4});
    auto prof = surface_ball_area(plane, p, geometric_radii(0.5, 3.0));
    for (std::size_t k = 0; k < prof.radii.size(); ++k) {
      const double ratio = prof.areas[k] / (prof.radii[k] * prof.radii[k]);
      CHECK(std::abs(ratio - M_PI) / M_PI <= 1e-9);
    }
    CHECK(check_surface_monotonicity(prof, 3).pass);
  }
  SUBCASE("offset ball: area pi (R^2 - q^2), ratio strictly increasing") {
    const double q = 0.5;
    Vec p = make_vec({q, 0.0, 0.0});
    std::vector<double> radii = geometric_radii(1.0, 4.0);
    auto prof = surface_ball_area(plane, p, radii);
    for (std::size_t k = 0; k < radii.size(); ++k) {
      const double expect = M_PI * (radii[k] * radii[k] - q * q);
      CHECK(std::abs(prof.areas[k] - expect) / expect <= 1e-9);
    }
    MonotonicityReport rep = check_surface_monotonicity(prof, 3);
    CHECK(rep.pass);
    for (std::size_t k = 0; k + 1 < rep.ratios.size(); ++k)
      CHECK(rep.ratios[k + 1] > rep.ratios[k]);
  }
  SUBCASE("R <= q means the ball misses the plane") {
    Vec p = make_vec({2.0, 0.0, 0.0});
    std::vector<double> radii = {1.0};
    auto prof = surface_ball_area(plane, p, radii);
    CHECK(prof.areas[0] == 0.0);
  }
  SUBCASE("footprint leaving the mesh raises a domain error") {
    Vec p = make_vec({0.0, 5.5, 0.0});
    std::vector<double> radii = {2.0};
    CHECK_THROWS_AS(surface_ball_area(plane, p, radii), DomainError);
  }
  SUBCASE("1d measure on the line interface in the plane case") {
    InterfaceSpec line = InterfaceSpec::plane(2, 0.0, 6.0, 512);
    Vec p = Vec::Zero(2);
    std::vector<double> radii = {1.0, 2.0};
    auto prof = surface_ball_area(line, p, radii);
    CHECK(prof.areas[0] == doctest::Approx(2.0).epsilon(1e-12));
    CHECK(prof.areas[1] == doctest::Approx(4.0).epsilon(1e-12));
  }
}

TEST_CASE("catenoid interface") {
  SUBCASE("mesh area converges to the closed form at order >= 1.8") {
    const double V = 2.0;
    const double exact = 2.0 * M_PI * (V + std::sinh(V) * std::cosh(V));
    std::vector<double> hs, errs;
    for (int nv : {32, 64, 128}) {
      InterfaceSpec cat = InterfaceSpec::catenoid(V, 2 * nv, nv);
      hs.push_back(1.0 / nv);
      errs.push_back(std::abs(cat.mesh_area() - exact));
    }
    CHECK(fit_order(hs, errs) >= 1.8);
  }
  SUBCASE("signed distance behaves like an offset along the normal") {
    InterfaceSpec cat = InterfaceSpec::catenoid(2.5, 256, 128);
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> ut(0.0, 2.0 * M_PI), uv(-1.5, 1.5),
        us(-0.3, 0.3);
    for (int trial = 0; trial < 50; ++trial) {
      const double t = ut(rng), v = uv(rng), s = us(rng);
      const double ch = std::cosh(v);
      Vec n(3);
      n << std::cos(t) / ch, std::sin(t) / ch, -std::sinh(v) / ch;
      Vec x(3);
      x << ch * std::cos(t), ch * std::sin(t), v;
      Vec probe = x + s * n;
      CHECK(cat.signed_distance(probe) == doctest::Approx(s).epsilon(1e-8));
      Vec g = cat.distance_gradient(probe);
      CHECK(std::abs(g.norm() - 1.0) <= 1e-10);  // eikonal property
      // gradient aligns with the normal, oriented by the side
      CHECK(std::abs(std::abs(g.dot(n)) - 1.0) <= 1e-8);
    }
  }
  SUBCASE("waist-centered ball areas: non-decreasing ratio, refinement stable") {
    Vec waist = make_vec({1.0, 0.0, 0.0});
    std::vector<double> radii = geometric_radii(0.4, 2.4);
    InterfaceSpec coarse = InterfaceSpec::catenoid(2.8, 256, 128);
    InterfaceSpec fine = InterfaceSpec::catenoid(2.8, 512, 256);
    auto pc = surface_ball_area(coarse, waist, radii);
    auto pf = surface_ball_area(fine, waist, radii);
    for (std::size_t k = 0; k < radii.size(); ++k)
      CHECK(std::abs(pf.areas[k] - pc.areas[k]) / pf.areas[k] <= 1e-3);
    CHECK(check_surface_monotonicity(pf, 3).pass);
    // density ratio starts near pi (smooth point) and grows
    const double first = pf.areas.front() / (radii.front() * radii.front());
    CHECK(first == doctest::Approx(M_PI).epsilon(0.05));
    const double last = pf.areas.back() / (radii.back() * radii.back());
    CHECK(last > first);
  }
  SUBCASE("ball past the meshed patch raises a domain error") {
    InterfaceSpec cat = InterfaceSpec::catenoid(2.0, 128, 64);
    Vec waist = make_vec({1.0, 0.0, 0.0});
    std::vector<double> radii = {2.5};
    CHECK_THROWS_AS(surface_ball_area(cat, waist, radii), DomainError);
  }
}

TEST_CASE("profile fields u(x) = U(d(x)/eps)") {
  ConnectionProfile conn = dw_connection(2);
  InterfaceSpec plane = InterfaceSpec::plane(2, 0.0, 2.0, 512);

  SUBCASE("on the interface the anchor value is taken") {
    Grid g = box2(1.6, 0.02);
    GridField f = profile_field(plane, conn, 0.2, g);
    for_each_node(g, [&](Index node, int ix, int iy, int) {
      if (g.position(ix, iy)[0] == 0.0) CHECK(std::abs(f.values(0, node)) <= 1e-9);
    });
  }
  SUBCASE("far side clamps to the right minimum") {
    Grid g = box2(1.6, 0.01);
    GridField f = profile_field(plane, conn, 0.1, g);
    const Index far = g.cells[0] * g.stride(0) + (g.cells[1] / 2) * g.stride(1);
    CHECK(std::abs(f.values(0, far) - 1.0) <= 1e-6);
    CHECK(std::abs(f.values(1, far)) <= 1e-9);
  }
  SUBCASE("quantitative slice value") {
    Grid g = box2(1.6, 0.01);
    GridField f = profile_field(plane, conn, 0.1, g);
    // node at x1 = 0.1: eta = 1, so u1 = tanh(1/sqrt(2))
    for_each_node(g, [&](Index node, int ix, int iy, int) {
      if (std::abs(g.position(ix, iy)[0] - 0.1) < 1e-12)
        CHECK(f.values(0, node) ==
              doctest::Approx(std::tanh(1.0 / std::sqrt(2.0))).epsilon(1e-3));
    });
  }
  SUBCASE("under-resolved layer raises a resolution error") {
    Grid g = box2(1.6, 0.05);
    CHECK_THROWS_AS(profile_field(plane, conn, 0.2, g), ResolutionError);
  }
  SUBCASE("eps must be positive") {
    Grid g = box2(1.6, 0.02);
    CHECK_THROWS_AS(profile_field(plane, conn, -0.1, g), DomainError);
  }
}

TEST_CASE("tensor pairings against bump test functions") {
  ConnectionProfile conn = dw_connection(2);
  InterfaceSpec plane = InterfaceSpec::plane(2, 0.0, 2.0, 2000);
  Potential dw = Potential::double_well(2);
  const double eps = 0.2;
  Grid g = box2(1.6, eps / 10.0);
  GridField f = profile_field(plane, conn, eps, g);
  TensorField t = scaled_stress_tensor(f, dw, eps);

  TestFunction phi{make_vec({0.1, 0.05}), 1.0, 3};
  const double s_phi = plane.surface_integral([&](const Vec& x) { return phi(x); });
  REQUIRE(s_phi > 0.1);

  SUBCASE("(1,1): equipartition cancellation keeps the pairing near zero") {
    const double val = pair_tensor_with_test(t, phi, 0, 0);
    CHECK(std::abs(val) <= 5e-3 * s_phi);
  }
  SUBCASE("(2,2): converges to -sigma int_S phi") {
    const double val = pair_tensor_with_test(t, phi, 1, 1);
    CHECK(val == doctest::Approx(-kSigmaTanh * s_phi).epsilon(0.05));
  }
  SUBCASE("(1,2): identically zero for a front with no tangential variation") {
    CHECK(std::abs(pair_tensor_with_test(t, phi, 0, 1)) <= 1e-12);
  }
  SUBCASE("bump supported away from the interface pairs to nearly nothing") {
    TestFunction far{make_vec({1.3, 0.0}), 0.25, 3};
    const double val = pair_tensor_with_test(t, far, 1, 1);
    CHECK(std::abs(val) <= 1e-4);
  }
}

TEST_CASE("limit tensor sweep on the hyperplane") {
  ConnectionProfile conn = dw_connection(2);
  InterfaceSpec plane = InterfaceSpec::plane(2, 0.0, 2.0, 2000);
  Potential dw = Potential::double_well(2);
  std::vector<double> eps = {0.4, 0.2, 0.1};
  std::vector<TestFunction> phis = {TestFunction{make_vec({0.15, 0.1}), 1.0, 3},
                                    TestFunction{make_vec({-0.1, -0.2}), 0.9, 4}};
  LimitTensorReport rep = verify_limit_tensor(plane, conn, dw, eps, phis, 1.6);
  CHECK(rep.pass);
  CHECK(rep.projection_gap <= 1e-12);
  CHECK(rep.sigma_used == doctest::Approx(kSigmaTanh).epsilon(1e-3));
  int nonzero_entries = 0;
  for (const auto& s : rep.summaries) {
    if (!s.zero_target) {
      ++nonzero_entries;
      CHECK(s.order >= 0.8);
      CHECK(s.monotone_decay);
    } else {
      CHECK(s.final_error <= 10.0 * s.final_tolerance);
    }
  }
  CHECK(nonzero_entries == static_cast<int>(phis.size()));  // only (2,2) has a limit
}

TEST_CASE("limit sweep input validation") {
  ConnectionProfile conn = dw_connection(2, 0.02);
  InterfaceSpec plane = InterfaceSpec::plane(2, 0.0, 2.0, 512);
  Potential dw = Potential::double_well(2);
  std::vector<TestFunction> phis = {TestFunction{Vec::Zero(2), 1.0, 3}};
  std::vector<double> increasing = {0.1, 0.2};
  CHECK_THROWS_AS(verify_limit_tensor(plane, conn, dw, increasing, phis, 1.6), ConfigError);
  std::vector<double> single = {0.2};
  CHECK_THROWS_AS(verify_limit_tensor(plane, conn, dw, single, phis, 1.6), ConfigError);
}
