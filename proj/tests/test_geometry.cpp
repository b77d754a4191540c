#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "vpl/geometry.hpp"

using vpl::Vec2d;

namespace {

// Independent oracle: scan the landscape over r in [0,1) at step 1e-6 and
// return the argmin.  Slow but assumption-free.
double brute_force_minimizer_radius(double omega) {
  const double step = 1e-6;
  double best_r = 0.0;
  double best_v = vpl::kr_landscape(Vec2d(0.0, 0.0), omega);
  for (double r = step; r < 1.0 - 1e-9; r += step) {
    const double v = vpl::kr_landscape(Vec2d(r, 0.0), omega);
    if (v < best_v) {
      best_v = v;
      best_r = r;
    }
  }
  return best_r;
}

}  // namespace

TEST_CASE("greens: boundary values, center values, symmetry") {
  // Dirichlet condition: x on the unit circle.
  for (double a : {0.0, 0.4, 1.7, 3.9, 5.5}) {
    const Vec2d x(std::cos(a), std::sin(a));
    CHECK(std::abs(vpl::greens(x, Vec2d(0.3, 0.2))) < 1e-12);
  }
  // G((0,0), (r,0)) = -(1/2pi) ln r, since h(0,.) vanishes.
  for (double r : {0.1, 0.35, 0.8, 0.99}) {
    const double expected = -std::log(r) / (2.0 * vpl::pi_v<double>);
    CHECK(vpl::greens(Vec2d(0.0, 0.0), Vec2d(r, 0.0)) ==
          doctest::Approx(expected).epsilon(1e-13));
  }
  CHECK(vpl::greens(Vec2d(0.3, 0.0), Vec2d(0.0, 0.5)) ==
        doctest::Approx(vpl::greens(Vec2d(0.0, 0.5), Vec2d(0.3, 0.0))).epsilon(1e-14));
}

TEST_CASE("greens: random-pair identities") {
  vpl::SplitMix64 rng(20240501);
  for (int k = 0; k < 1000; ++k) {
    const double r1 = std::sqrt(rng.uniform()) * 0.99;
    const double t1 = rng.uniform(0.0, 2.0 * vpl::pi_v<double>);
    const double r2 = std::sqrt(rng.uniform()) * 0.99;
    const double t2 = rng.uniform(0.0, 2.0 * vpl::pi_v<double>);
    const Vec2d x(r1 * std::cos(t1), r1 * std::sin(t1));
    const Vec2d y(r2 * std::cos(t2), r2 * std::sin(t2));
    if ((x - y).norm() < 1e-6) continue;
    // Symmetry.
    CHECK(std::abs(vpl::greens(x, y) - vpl::greens(y, x)) < 1e-12);
    // On-diagonal regular part vs Robin function: h(x,x) = 2 H(x).
    CHECK(std::abs(vpl::greens_regular_part(x, x) - 2.0 * vpl::robin(x)) < 1e-10);
    // Boundary vanishing for this y.
    const Vec2d xb(std::cos(t1), std::sin(t1));
    CHECK(std::abs(vpl::greens(xb, y)) < 1e-12);
  }
}

TEST_CASE("greens: coincident points rejected") {
  CHECK_THROWS_AS((void)vpl::greens(Vec2d(0.2, 0.1), Vec2d(0.2, 0.1)),
                  std::domain_error);
  CHECK_THROWS_AS((void)vpl::greens(Vec2d(1.5, 0.0), Vec2d(0.0, 0.0)),
                  std::domain_error);
}

TEST_CASE("robin: values and symmetry") {
  CHECK(vpl::robin(Vec2d(0.0, 0.0)) == 0.0);
  const double expected = -std::log(0.64) / (4.0 * vpl::pi_v<double>);
  CHECK(expected == doctest::Approx(0.0355136).epsilon(1e-4));
  CHECK(vpl::robin(Vec2d(0.6, 0.0)) == doctest::Approx(expected).epsilon(1e-14));
  CHECK(vpl::robin(Vec2d(0.3, 0.4)) == doctest::Approx(vpl::robin(Vec2d(0.4, 0.3))));
  CHECK(vpl::robin(Vec2d(-0.3, 0.4)) == doctest::Approx(vpl::robin(Vec2d(0.3, 0.4))));
  CHECK_THROWS_AS((void)vpl::robin(Vec2d(1.0, 0.0)), std::domain_error);
}

TEST_CASE("kr_landscape: values and rotation invariance") {
  CHECK(vpl::kr_landscape(Vec2d(0.0, 0.0), 3.7) == 0.0);
  const double omega = 1.0 / vpl::pi_v<double>;
  const double expected =
      -std::log(0.64) / (4.0 * vpl::pi_v<double>) - omega / 2.0 * 0.36;
  CHECK(expected == doctest::Approx(-0.0217822).epsilon(1e-4));
  CHECK(vpl::kr_landscape(Vec2d(0.6, 0.0), omega) ==
        doctest::Approx(expected).epsilon(1e-14));
  for (double a : {0.3, 2.2, 4.1}) {
    CHECK(vpl::kr_landscape(Vec2d(0.6 * std::cos(a), 0.6 * std::sin(a)), omega) ==
          doctest::Approx(expected).epsilon(1e-13));
  }
}

TEST_CASE("kr_minimizer_radius: brute-force oracle confirms the closed form") {
  const double pi = vpl::pi_v<double>;
  // Subcritical: minimum at the origin.
  CHECK(vpl::kr_minimizer_radius(0.1) == 0.0);
  CHECK(brute_force_minimizer_radius(0.1) < 2e-6);
  // Threshold: critical point merges with the origin.
  CHECK(vpl::kr_minimizer_radius(1.0 / (2.0 * pi)) == 0.0);
  // Supercritical cases, scan at step 1e-6.
  for (double omega : {1.0 / pi, 0.5, 2.0}) {
    const double scanned = brute_force_minimizer_radius(omega);
    CHECK(std::abs(scanned - vpl::kr_minimizer_radius(omega)) < 2e-6);
  }
  CHECK(vpl::kr_minimizer_radius(1.0 / pi) ==
        doctest::Approx(std::sqrt(0.5)).epsilon(1e-14));
  CHECK_THROWS_AS((void)vpl::kr_minimizer_radius(0.0), std::domain_error);
}

TEST_CASE("kr_minimizer_radius: monotone and continuous at the threshold") {
  const double omega_c = 1.0 / (2.0 * vpl::pi_v<double>);
  double prev = 0.0;
  for (double omega = 0.02; omega < 3.0; omega += 0.01) {
    const double r = vpl::kr_minimizer_radius(omega);
    CHECK(r >= prev);
    prev = r;
  }
  CHECK(vpl::kr_minimizer_radius(omega_c * (1.0 + 1e-10)) < 1e-4);
}

TEST_CASE("point_vortex_angular_velocity") {
  const double pi = vpl::pi_v<double>;
  CHECK(vpl::point_vortex_angular_velocity(0.0) ==
        doctest::Approx(1.0 / (2.0 * pi)).epsilon(1e-14));
  CHECK(vpl::point_vortex_angular_velocity(std::sqrt(0.5)) ==
        doctest::Approx(1.0 / pi).epsilon(1e-13));
  CHECK_THROWS_AS((void)vpl::point_vortex_angular_velocity(1.0), std::domain_error);

  // Consistency closure: the vortex placed on the landscape-minimizing
  // circle orbits at exactly the imposed angular velocity.  This identity
  // is what pins the 1/(2pi) threshold.
  for (double omega = 0.17; omega < 4.0; omega *= 1.37) {
    const double r_star = vpl::kr_minimizer_radius(omega);
    if (r_star == 0.0) continue;
    CHECK(std::abs(vpl::point_vortex_angular_velocity(r_star) - omega) < 1e-10);
  }
}

TEST_CASE("rotation params validation") {
  CHECK_THROWS_AS(vpl::RotationParams<double>(0.0, 10.0), std::domain_error);
  CHECK_THROWS_AS(vpl::RotationParams<double>(1.0, 0.1), std::domain_error);
  CHECK_NOTHROW(vpl::RotationParams<double>(1.0, 1000.0));
}
