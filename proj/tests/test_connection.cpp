#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "sten/connection.hpp"
#include "testutil.hpp"

using namespace sten;

namespace {

const double kSigmaTanh = 2.0 * std::sqrt(2.0) / 3.0;  // analytic tanh action

ConnectionProfile tanh_profile(double L, double h) {
  return sample_profile(
      [](double eta) {
        Vec u(1);
        u[0] = std::tanh(eta / std::sqrt(2.0));
        return u;
      },
      L, h, make_vec({-1.0}), make_vec({1.0}));
}

}  // namespace

TEST_CASE("double-well connection matches the tanh profile") {
  Potential dw = Potential::double_well(1);
  ConnectionProfile c = solve_connection(dw, 0, 1, 12.0, 0.01);
  CHECK(c.residual <= 1e-8);
  double err = 0.0;
  for (Index k = 0; k < c.samples(); ++k)
    err = std::max(err, std::abs(c.values(0, k) - std::tanh(c.eta[k] / std::sqrt(2.0))));
  CHECK(err <= 1e-4);
  CHECK(c.tail_gap <= 1e-6);
  CHECK(c.sigma == doctest::Approx(kSigmaTanh).epsilon(2e-4));
}

TEST_CASE("invalid connection requests are rejected") {
  Potential dw = Potential::double_well(1);
  CHECK_THROWS_AS(solve_connection(dw, 0, 0, 12.0, 0.02), DomainError);
  CHECK_THROWS_AS(solve_connection(dw, 0, 5, 12.0, 0.02), DomainError);
  CHECK_THROWS_AS(solve_connection(Potential::ginzburg_landau(2), 0, 1, 12.0, 0.02),
                  UnsupportedError);
}

TEST_CASE("suggested half-length gives resolved tails") {
  Potential dw = Potential::double_well(1);
  const double L = suggest_half_length(dw, 0, 1);
  CHECK(L >= 10.0);
  ConnectionProfile c = solve_connection(dw, 0, 1, L, 0.02);
  CHECK(c.tail_gap <= 1e-6);
}

TEST_CASE("triple-well connection converges with positive sigma") {
  Potential tw = Potential::triple_well();
  ConnectionProfile c = solve_connection(tw, 0, 1, 6.0, 0.02);
  CHECK(c.residual <= 1e-8);
  CHECK(c.sigma > 0.0);
  CHECK(c.tail_gap <= 1e-6);

  // refinement stability of sigma under h halving
  ConnectionProfile fine = solve_connection(tw, 0, 1, 6.0, 0.01);
  CHECK(std::abs(fine.sigma - c.sigma) < 1e-4);
}

TEST_CASE("equipartition") {
  Potential dw1 = Potential::double_well(1);

  SUBCASE("analytic tanh samples: both sides equal 1/4 at eta = 0") {
    ConnectionProfile c = tanh_profile(12.0, 0.01);
    const Index mid = c.samples() / 2;
    CHECK(c.eta[mid] == doctest::Approx(0.0).epsilon(1e-14));
    const Vec du = (c.values.col(mid + 1) - c.values.col(mid - 1)) / (2.0 * c.spacing);
    CHECK(0.5 * du.squaredNorm() == doctest::Approx(0.25).epsilon(1e-4));
    CHECK(dw1.W(c.values.col(mid)) == doctest::Approx(0.25).epsilon(1e-12));
    CHECK(equipartition_defect(c, dw1) <= 1e-3);
  }
  SUBCASE("constant profile at a minimum: 0 = 0") {
    ConnectionProfile c = sample_profile([](double) { return make_vec({1.0}); }, 4.0, 0.05,
                                         make_vec({1.0}), make_vec({1.0}));
    CHECK(equipartition_defect(c, dw1) <= 1e-15);
  }
  SUBCASE("solved double-well profiles: defect vanishes at second order") {
    ConvergenceReport rep = check_equipartition(dw1, 0, 1, 12.0, {0.08, 0.04, 0.02});
    CHECK(rep.pass);
    CHECK(rep.order >= 1.8);
  }
  SUBCASE("solved triple-well profiles: defect vanishes at second order") {
    ConvergenceReport rep =
        check_equipartition(Potential::triple_well(), 0, 1, 6.0, {0.08, 0.04, 0.02});
    CHECK(rep.pass);
    CHECK(rep.order >= 1.8);
  }
}

TEST_CASE("sigma quadrature") {
  Potential dw1 = Potential::double_well(1);

  SUBCASE("analytic value 2*sqrt(2)/3 within 1e-4") {
    ConnectionProfile c = solve_connection(dw1, 0, 1, 12.0, 0.01);
    SigmaResult s = sigma(c, dw1);
    CHECK(std::abs(s.value - kSigmaTanh) <= 1e-4);
    CHECK(s.error <= 1e-4);
  }
  SUBCASE("degenerate constant profile has sigma 0") {
    ConnectionProfile c = sample_profile([](double) { return make_vec({-1.0}); }, 4.0, 0.05,
                                         make_vec({-1.0}), make_vec({-1.0}));
    SigmaResult s = sigma(c, dw1);
    CHECK(std::abs(s.value) <= 1e-14);
  }
  SUBCASE("action route and 2W route agree within the equipartition budget") {
    ConnectionProfile c = solve_connection(dw1, 0, 1, 12.0, 0.02);
    const double defect = equipartition_defect(c, dw1);
    CHECK(std::abs(c.sigma - c.sigma_via_2w) <= defect * 2.0 * c.half_length + 1e-10);
  }
  SUBCASE("triple-well sigmas agree pairwise under the rotation symmetry") {
    Potential tw = Potential::triple_well();
    ConnectionProfile c01 = solve_connection(tw, 0, 1, 6.0, 0.02);
    ConnectionProfile c12 = solve_connection(tw, 1, 2, 6.0, 0.02);
    ConnectionProfile c02 = solve_connection(tw, 0, 2, 6.0, 0.02);
    CHECK(std::abs(c01.sigma - c12.sigma) <= 1e-6);
    CHECK(std::abs(c01.sigma - c02.sigma) <= 1e-6);
  }
}

TEST_CASE("profile reversal symmetry") {
  Potential tw = Potential::triple_well();
  ConnectionProfile fwd = solve_connection(tw, 0, 1, 6.0, 0.02);
  ConnectionProfile rev = solve_connection(tw, 1, 0, 6.0, 0.02);
  CHECK(std::abs(fwd.sigma - rev.sigma) <= 1e-10);
  double gap = 0.0;
  const Index n = fwd.samples();
  for (Index k = 0; k < n; ++k)
    gap = std::max(gap, (fwd.values.col(k) - rev.values.col(n - 1 - k)).norm());
  CHECK(gap <= 1e-7);
}

TEST_CASE("triangle inequality") {
  SUBCASE("symmetric triple well") {
    TriangleReport rep = check_triangle_inequality(Potential::triple_well(), 6.0, 0.02);
    CHECK(rep.pass);
    CHECK(rep.worst_slack > 0.0);               // equilateral: 2 sigma >= sigma
    CHECK(rep.max_pair_spread <= 1e-6);          // rotational symmetry
  }
  SUBCASE("two minima: vacuous pass") {
    TriangleReport rep = check_triangle_inequality(Potential::double_well(1), 12.0, 0.02);
    CHECK(rep.pass);
    CHECK(rep.sigmas.rows() == 2);
  }
  SUBCASE("deepened triple well still satisfies the inequality") {
    TriangleReport rep = check_triangle_inequality(Potential::triple_well(0.5), 0.0, 0.02);
    CHECK(rep.pass);
    CHECK(rep.max_pair_spread > 1e-4);  // asymmetry is real
  }
}

TEST_CASE("anchor convention: energy peak at eta = 0") {
  Potential tw = Potential::triple_well(0.5);
  ConnectionProfile c = solve_connection(tw, 1, 2, 0.0 < 1 ? suggest_half_length(tw, 1, 2) : 6.0,
                                         0.02);
  // peak of the discrete energy density sits at the center node
  Eigen::VectorXd e(c.samples());
  e.setZero();
  for (Index k = 1; k + 1 < c.samples(); ++k) {
    const Vec du = (c.values.col(k + 1) - c.values.col(k - 1)) / (2.0 * c.spacing);
    e[k] = 0.5 * du.squaredNorm() + tw.W(c.values.col(k));
  }
  Index peak = 0;
  e.maxCoeff(&peak);
  CHECK(peak == c.samples() / 2);
  CHECK(std::abs(c.anchor_offset) <= c.spacing);
}

TEST_CASE("profile interpolant is clamped and accurate") {
  ConnectionProfile c = tanh_profile(12.0, 0.01);
  ProfileInterpolant interp(c);
  CHECK(interp(-100.0)[0] == doctest::Approx(c.values(0, 0)));
  CHECK(interp(100.0)[0] == doctest::Approx(c.values(0, c.samples() - 1)));
  double err = 0.0;
  for (double eta = -3.0; eta <= 3.0; eta += 0.0037)
    err = std::max(err, std::abs(interp(eta)[0] - std::tanh(eta / std::sqrt(2.0))));
  CHECK(err <= 1e-6);
}
