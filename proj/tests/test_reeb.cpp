#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstdio>

#include "ciw/reeb.hpp"

using namespace ciw;

namespace {
constexpr double kPi = 3.14159265358979323846;
constexpr double kGolden = 1.6180339887498949;

OrbitResult golden_orbit(const Triad& T) {
  return find_closed_orbit(T, Vec{std::sqrt(kGolden) * 0.98, 0.05, 0.08, -0.03},
                           kPi * kGolden * 1.1);
}
}  // namespace

TEST_CASE("rk4 integrator agrees with the closed-form flow") {
  Triad T = Triad::from_id("ellipsoid:a1=1.6180339887498949,a2=1");
  Vec p = T.project_point(Vec{0.7, -0.3, 0.5, 0.4});
  Vec a = T.flow(p, 2.3), b = flow_rk4(T, p, 2.3, 2000);
  CHECK(norm(a - b) < 1e-10);
  Triad Tf = Triad::from_id("r3-standard");
  Vec q{0.1, 0.2, -0.3};
  CHECK(norm(Tf.flow(q, 1.7) - flow_rk4(Tf, q, 1.7, 100)) < 1e-12);
}

TEST_CASE("shooting finds the plane-1 ellipsoid orbit") {
  Triad T = Triad::from_id("ellipsoid:a1=1.6180339887498949,a2=1");
  OrbitResult orb = golden_orbit(T);
  REQUIRE(orb.found);
  CHECK(orb.period == doctest::Approx(kPi * kGolden).epsilon(1e-12));
  CHECK(orb.residual < 1e-12);
  // the orbit lies in the first coordinate plane
  CHECK(std::abs(orb.p0[2]) < 1e-12);
  CHECK(std::abs(orb.p0[3]) < 1e-12);
  CHECK(std::abs(T.constraint(orb.p0)) < 1e-13);
}

TEST_CASE("no closed orbit in the flat model") {
  Triad T = Triad::from_id("r3-standard");
  OrbitResult orb = find_closed_orbit(T, Vec{0.1, 0.2, 0.0}, 1.0);
  CHECK(!orb.found);
}

TEST_CASE("return map: symplectic, nondegenerate for the golden ratio") {
  Triad T = Triad::from_id("ellipsoid:a1=1.6180339887498949,a2=1");
  OrbitResult orb = golden_orbit(T);
  ReturnMap rm = return_map(T, orb);
  CHECK(rm.det == doctest::Approx(1.0).epsilon(1e-10));
  // rotation by 2 pi a1 / a2; margin 2 |sin(pi a1)|
  double expect = 2.0 * std::abs(std::sin(kPi * kGolden));
  CHECK(rm.floquet_margin == doctest::Approx(expect).epsilon(1e-8));
  CHECK(rm.floquet_margin > 0.1);
  CHECK(rm.unit_eigenvalues == 0);
}

TEST_CASE("return map is the identity on the round sphere orbit") {
  Triad T = Triad::from_id("ellipsoid:a1=1,a2=1");
  OrbitResult orb = find_closed_orbit(T, Vec{0.9, 0.1, 0.2, 0.1}, kPi);
  REQUIRE(orb.found);
  CHECK(orb.period == doctest::Approx(kPi).epsilon(1e-12));
  ReturnMap rm = return_map(T, orb);
  CHECK(rm.unit_eigenvalues == 2);
  CHECK(rm.floquet_margin < 1e-8);
}

TEST_CASE("asymptotic operator: symmetric, matches the invariant-case formula") {
  Triad T = Triad::from_id("ellipsoid:a1=1.6180339887498949,a2=1");
  OrbitResult orb = golden_orbit(T);
  AzSpectrum sp = assemble_az_spectrum(T, orb, 65, 4);
  CHECK(sp.sym_defect < 1e-10);
  // transported-frame holonomy equals the return-map rotation angle
  double theta = std::remainder(2.0 * kPi * kGolden, 2.0 * kPi);
  CHECK(sp.holonomy_angle == doctest::Approx(theta).epsilon(5e-4));
  std::vector<double> cf = sasakian_az_spectrum(sp.holonomy_angle, 12);
  // compare the 12 smallest-|.| eigenvalues against the closed form
  std::vector<double> low = sp.eigs;
  std::sort(low.begin(), low.end(),
            [](double a, double b) { return std::abs(a) < std::abs(b); });
  low.resize(12);
  std::sort(low.begin(), low.end());
  for (int k = 0; k < 12; ++k)
    CHECK(low[k] == doctest::Approx(cf[k]).epsilon(1e-6));
  CHECK(sp.gap() == doctest::Approx(std::abs(theta)).epsilon(1e-3));
}

TEST_CASE("spectrum is stable under refinement") {
  Triad T = Triad::from_id("ellipsoid-perturbed:seed=7");
  OrbitResult orb = golden_orbit(T);
  REQUIRE(orb.found);
  // the perturbation leaves lambda (hence the orbit) untouched
  CHECK(orb.period == doctest::Approx(kPi * kGolden).epsilon(1e-12));
  AzSpectrum s1 = assemble_az_spectrum(T, orb, 65, 4);
  AzSpectrum s2 = assemble_az_spectrum(T, orb, 129, 4);
  CHECK(s1.sym_defect < 1e-6);
  CHECK(s1.gap() == doctest::Approx(s2.gap()).epsilon(2e-3));
  // Reeb invariance is broken: the degenerate pairs split
  std::vector<double> low = s2.eigs;
  std::sort(low.begin(), low.end(),
            [](double a, double b) { return std::abs(a) < std::abs(b); });
  CHECK(std::abs(low[0] - low[1]) + std::abs(low[0] + low[1]) > 1e-3);
}

TEST_CASE("kernel of the asymptotic operator matches unit Floquet count") {
  Triad Tr = Triad::from_id("ellipsoid:a1=1,a2=1");
  OrbitResult orbr = find_closed_orbit(Tr, Vec{0.9, 0.1, 0.2, 0.1}, kPi);
  KernelReport kr = kernel_correspondence(Tr, orbr, 64);
  CHECK(kr.near_kernel == 2);
  CHECK(kr.unit_floquet == 2);
  CHECK(kr.consistent);
  Triad Tg = Triad::from_id("ellipsoid:a1=1.6180339887498949,a2=1");
  KernelReport kg = kernel_correspondence(Tg, golden_orbit(Tg), 64);
  CHECK(kg.near_kernel == 0);
  CHECK(kg.unit_floquet == 0);
  CHECK(kg.consistent);
}
