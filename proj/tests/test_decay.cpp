#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstdio>

#include "ciw/decay.hpp"
#include "ciw/instanton.hpp"
#include "ciw/rng.hpp"

using namespace ciw;

namespace {
constexpr double kPi = 3.14159265358979323846;
constexpr double kGolden = 1.6180339887498949;

MapField massless_field(const Triad& T, double Q, double Tact,
                        const CylinderGrid& g) {
  MapField f;
  f.grid = g;
  f.triad_id = T.id();
  Vec p0{std::sqrt(kGolden), 0.0, 0.0, 0.0};
  f.w.resize(g.size());
  for (int i = 0; i < g.ntau; ++i)
    for (int j = 0; j < g.nt; ++j)
      f.at(i, j) = T.flow(p0, -Q * g.tau(i) + Tact * g.t(j));
  return f;
}
}  // namespace

TEST_CASE("xi and gamma formulas") {
  CHECK(three_interval_xi(0.4) == doctest::Approx(2.0).epsilon(1e-15));
  for (double c : {0.3, 1.0, 2.5})
    CHECK(three_interval_xi(gamma_of_rate(c)) ==
          doctest::Approx(std::exp(c)).epsilon(1e-12));
  CHECK_THROWS(three_interval_xi(0.0));
  CHECK_THROWS(three_interval_xi(0.5));
}

TEST_CASE("three-interval bound: worked example and edge cases") {
  auto r = three_interval_bound({1.0, 0.3, 0.1, 0.02}, 0.4);
  CHECK(r.hypothesis_ok);
  CHECK(r.xi == doctest::Approx(2.0).epsilon(1e-15));
  CHECK(r.bound[1] == doctest::Approx(0.505).epsilon(1e-15));
  CHECK(r.bound_ok);

  auto z = three_interval_bound({0.0, 0.0, 0.0, 0.0, 0.0}, 0.25);
  CHECK(z.hypothesis_ok);
  CHECK(z.bound_ok);

  auto v = three_interval_bound({0.0, 1.0, 0.0}, 0.4);
  CHECK(!v.hypothesis_ok);
  REQUIRE(v.violations.size() == 1);
  CHECK(v.violations[0] == 1);
  CHECK(v.bound.empty());
}

TEST_CASE("pure exponential meets the hypothesis with equality") {
  for (double c : {0.4, 1.1}) {
    double gamma = gamma_of_rate(c);
    std::vector<double> xs(12);
    for (int k = 0; k < 12; ++k) xs[k] = std::exp(-c * k);
    auto r = three_interval_bound(xs, gamma);
    CHECK(r.hypothesis_ok);
    CHECK(r.bound_ok);
  }
}

TEST_CASE("property: cone-generated sequences always satisfy the bound") {
  CounterRng rng(99, 3);
  for (int trial = 0; trial < 1000; ++trial) {
    double gamma = rng.uniform(0.05, 0.45);
    double xi = three_interval_xi(gamma);
    int N = 4 + static_cast<int>(rng.uniform_int(0, 30));
    std::vector<double> xs(N + 1, 0.0);
    int nterms = 1 + static_cast<int>(rng.uniform_int(0, 3));
    for (int t = 0; t < nterms; ++t) {
      double r = xi * (1.0 + rng.uniform(0.0, 3.0));
      double A = rng.uniform(0.0, 2.0), B = rng.uniform(0.0, 2.0);
      for (int k = 0; k <= N; ++k)
        xs[k] += A * std::pow(r, -k) + B * std::pow(r, k - N);
    }
    auto res = three_interval_bound(xs, gamma);
    CHECK(res.hypothesis_ok);
    CHECK(res.bound_ok);
  }
}

TEST_CASE("analyze_decay recovers a planted exponential rate") {
  Triad T = Triad::from_id("r3-standard");
  double delta0 = 0.8, eps = 0.1;
  CylinderGrid g{8.0, 129, 24};
  MapField f;
  f.grid = g;
  f.triad_id = T.id();
  f.w.resize(g.size());
  for (int i = 0; i < g.ntau; ++i)
    for (int j = 0; j < g.nt; ++j) {
      double tau = g.tau(i), t = 2.0 * kPi * g.t(j);
      f.at(i, j) = Vec{eps * std::exp(-delta0 * tau) * std::cos(t),
                       -eps * std::exp(-delta0 * tau) * std::sin(t), 0.0};
    }
  DecayReport rep = analyze_decay(T, f);
  std::printf("# planted decay: delta_fit %.5f (target %.5f), r2 %.6f\n",
              rep.delta_fit, delta0, rep.r2);
  CHECK(rep.delta_fit == doctest::Approx(delta0).epsilon(0.02));
  CHECK(rep.r2 > 0.999);
  CHECK(rep.three_interval_violations.empty());
  write_decay_csv(rep, "/tmp/ciw_decay_test.csv");

  CHECK_THROWS(analyze_decay(T, MapField{CylinderGrid{3.0, 9, 8}, T.id(),
                                         std::vector<Vec>(72, Vec(3))}));
}

TEST_CASE("massless field: windows vanish, charge limit survives") {
  Triad T = Triad::from_id("ellipsoid:a1=1.6180339887498949,a2=1");
  CylinderGrid g{6.0, 97, 64};
  MapField f = massless_field(T, 0.3, kPi * kGolden, g);
  DecayReport rep = analyze_decay(T, f);
  for (double x : rep.xk) CHECK(x < 1e-8);
  CHECK(rep.Q_limit == doctest::Approx(0.3).epsilon(1e-4));
  CHECK(rep.T_limit == doctest::Approx(kPi * kGolden).epsilon(1e-2));
}

TEST_CASE("linear evolution rate on a known spectrum") {
  std::vector<double> A = {1, 0, 0, 0, 2, 0, 0, 0, 3};
  CHECK(linear_evolution_rate(A, 3, {1.0, 1.0, 1.0}, 10.0) ==
        doctest::Approx(1.0).epsilon(0.01));
  CHECK(linear_evolution_rate(A, 3, {0.0, 1.0, 0.0}, 10.0) ==
        doctest::Approx(2.0).epsilon(0.005));
  std::vector<double> B = {-1, 0, 0, 0, 2, 0, 0, 0, 3};
  CHECK(linear_evolution_rate(B, 3, {1.0, 0.1, 0.1}, 10.0) < 0.0);
  std::vector<double> Z = {0, 0, 0, 1};
  CHECK_THROWS(linear_evolution_rate(Z, 2, {1.0, 1.0}, 5.0));
}

TEST_CASE("theta on trivial cylinders: zero, or constant when T mismatched") {
  Triad T = Triad::from_id("ellipsoid:a1=1.6180339887498949,a2=1");
  double Tstar = kPi * kGolden;
  // a_t carries the chord factor sinc(2 pi / nt), so theta is zero only up
  // to O(h_t^2); nt = 128 puts that error at ~4e-3
  CylinderGrid g{6.0, 97, 128};
  MapField f = massless_field(T, 0.0, Tstar, g);
  ThetaReport a = theta_component(T, f, Tstar);
  CHECK(a.identity_residual < 1e-4);
  for (double s : a.slice_norm) CHECK(s < 5e-3);

  ThetaReport b = theta_component(T, f, Tstar - 0.5);
  CHECK(b.constant_tail);
  for (double s : b.slice_norm) CHECK(s == doctest::Approx(0.5).epsilon(1e-2));
}

TEST_CASE("theta identity residual is O(h^2) on the flat oracle") {
  Triad T = Triad::from_id("r3-standard");
  auto res = [&](int n) {
    CylinderGrid g{1.0, n + 1, n};
    MapField f = oracle_flat(g, 0.3, 0.0);
    return theta_component(T, f, 0.0).identity_residual;
  };
  double r1 = res(24), r2 = res(48);
  std::printf("# theta identity residual: %.3e -> %.3e (ratio %.2f)\n", r1, r2,
              r1 / r2);
  // the max sits at tau ~ 2h inside the exponential boundary layer, which
  // damps the ideal factor 4 to about 4 exp(-8 pi / 48) = 2.37 at this size
  CHECK(r1 / r2 > 2.0);
  CHECK(r2 < 0.05);
}

TEST_CASE("primitive reconstruction on the flat oracle") {
  Triad T = Triad::from_id("r3-standard");
  CylinderGrid g{1.0, 33, 32};
  MapField f = oracle_flat(g, 0.3, 0.0);
  AReport rep = reconstruct_a(T, f);
  CHECK(rep.charge_residual < 1e-3);
  CHECK(rep.path_residual < 1e-2);  // trapezoid path integration is O(h^2)
  CHECK(std::abs(rep.T_used) < 1e-2);
  // a - T tau - C0 settles towards the tail
  CHECK(rep.sup_dev.back() < rep.sup_dev.front() + 1e-6);

  Triad Te = Triad::from_id("ellipsoid:a1=1.6180339887498949,a2=1");
  CylinderGrid ge{2.0, 17, 16};
  MapField fm = massless_field(Te, 0.4, kPi * kGolden, ge);
  CHECK_THROWS(reconstruct_a(Te, fm));
}

TEST_CASE("orbit distance vanishes on the trivial cylinder") {
  Triad T = Triad::from_id("ellipsoid:a1=1.6180339887498949,a2=1");
  CylinderGrid g{2.0, 17, 16};
  MapField f = massless_field(T, 0.0, kPi * kGolden, g);
  OrbitResult orb = find_closed_orbit(
      T, Vec{std::sqrt(kGolden) * 0.98, 0.05, 0.08, -0.03}, kPi * kGolden);
  REQUIRE(orb.found);
  std::vector<double> d = limit_orbit_distance(T, f, orb);
  for (double x : d) CHECK(x < 0.02);
}
