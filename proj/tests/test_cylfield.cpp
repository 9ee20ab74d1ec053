#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>

#include "ciw/cylfield.hpp"

using namespace ciw;

namespace {
constexpr double kPi = 3.14159265358979323846;
constexpr double kGolden = 1.6180339887498949;

// massless cylinder field over the plane-1 ellipsoid orbit:
// w(tau, t) = gamma(-Q tau + T t) with gamma the Reeb trajectory
MapField massless_field(const Triad& T, double Q, double Tact,
                        const CylinderGrid& g) {
  MapField f;
  f.grid = g;
  f.triad_id = T.id();
  double a1 = kGolden;
  Vec p0{std::sqrt(a1), 0.0, 0.0, 0.0};
  f.w.resize(g.size());
  for (int i = 0; i < g.ntau; ++i)
    for (int j = 0; j < g.nt; ++j)
      f.at(i, j) = T.flow(p0, -Q * g.tau(i) + Tact * g.t(j));
  return f;
}

}  // namespace

TEST_CASE("stencils: second order in both directions") {
  CylinderGrid g{1.0, 17, 16};
  auto test_field = [](const CylinderGrid& gg) {
    std::vector<double> s(gg.size());
    for (int i = 0; i < gg.ntau; ++i)
      for (int j = 0; j < gg.nt; ++j)
        s[gg.idx(i, j)] =
            std::exp(gg.tau(i)) * std::sin(2.0 * kPi * gg.t(j) + 0.3);
    return s;
  };
  auto max_err = [&](const CylinderGrid& gg) {
    auto s = test_field(gg);
    auto dt_ = deriv_tau(gg, s);
    auto ds_ = deriv_t(gg, s);
    double m = 0.0;
    for (int i = 0; i < gg.ntau; ++i)
      for (int j = 0; j < gg.nt; ++j) {
        double ex = std::exp(gg.tau(i));
        double tr = std::sin(2.0 * kPi * gg.t(j) + 0.3);
        double trd = 2.0 * kPi * std::cos(2.0 * kPi * gg.t(j) + 0.3);
        m = std::max(m, std::abs(dt_[gg.idx(i, j)] - ex * tr));
        m = std::max(m, std::abs(ds_[gg.idx(i, j)] - ex * trd));
      }
    return m;
  };
  double e1 = max_err(g);
  double e2 = max_err(CylinderGrid{1.0, 33, 32});
  CHECK(e1 / e2 > 3.3);  // order 2
  CHECK(e1 / e2 < 5.0);
}

TEST_CASE("serialization round-trips bit-exactly") {
  Triad T = Triad::from_id("ellipsoid:a1=1.6180339887498949,a2=1");
  CylinderGrid g{2.0, 9, 8};
  MapField f = massless_field(T, 0.3, kPi * kGolden, g);
  // perturb with awkward values
  f.at(3, 5)[2] += 1.0e-13;
  save_field(f, "/tmp/ciw_field_test.txt");
  MapField f2 = load_field("/tmp/ciw_field_test.txt");
  REQUIRE(f2.grid.ntau == g.ntau);
  REQUIRE(f2.grid.nt == g.nt);
  CHECK(f2.grid.L == f.grid.L);
  CHECK(f2.triad_id == f.triad_id);
  for (int k = 0; k < g.size(); ++k)
    for (int d = 0; d < 4; ++d) {
      double a = f.w[k][d], b = f2.w[k][d];
      CHECK(std::memcmp(&a, &b, sizeof a) == 0);
    }
}

TEST_CASE("trivial cylinder: E ~ 0, T -> period, Q -> 0") {
  Triad T = Triad::from_id("ellipsoid:a1=1.6180339887498949,a2=1");
  double Tstar = kPi * kGolden;
  CylinderGrid g{1.0, 17, 32};
  MapField f = massless_field(T, 0.0, Tstar, g);
  EnergyReport r = energies(T, f);
  CHECK(std::abs(r.e_total) < 1e-4);
  CHECK(r.T == doctest::Approx(Tstar).epsilon(8e-3));
  CHECK(std::abs(r.Q) < 1e-10);
}

TEST_CASE("massless field: (T, Q) recovered, error drops ~4x per halving") {
  Triad T = Triad::from_id("ellipsoid:a1=1.6180339887498949,a2=1");
  double Tstar = kPi * kGolden, Qstar = 0.5;
  auto err = [&](int n) {
    CylinderGrid g{1.0, n + 1, n};
    MapField f = massless_field(T, Qstar, Tstar, g);
    EnergyReport r = energies(T, f);
    return std::make_pair(std::abs(r.T - Tstar), std::abs(r.Q - Qstar));
  };
  auto [eT1, eQ1] = err(16);
  auto [eT2, eQ2] = err(32);
  std::printf("# massless (T,Q) errors: T %.3e -> %.3e, Q %.3e -> %.3e\n", eT1,
              eT2, eQ1, eQ2);
  CHECK(eT1 / eT2 > 3.3);
  CHECK(eQ1 / eQ2 > 3.3);
  CHECK(eT2 < 5e-2);
  CHECK(eQ2 < 1e-3);
}

TEST_CASE("slice action/charge nearly constant on massless field") {
  Triad T = Triad::from_id("ellipsoid:a1=1.6180339887498949,a2=1");
  double Tstar = kPi * kGolden, Qstar = 0.4;
  CylinderGrid g{2.0, 33, 32};
  MapField f = massless_field(T, Qstar, Tstar, g);
  std::vector<double> Ts, Qs;
  charge_action_slices(T, f, Ts, Qs);
  for (int i = 0; i < g.ntau; ++i) {
    CHECK(Ts[i] == doctest::Approx(Tstar).epsilon(1e-2));
    CHECK(Qs[i] == doctest::Approx(Qstar).epsilon(2e-3));
  }
}

TEST_CASE("pointwise energy identities") {
  // smooth but otherwise arbitrary field on the flat model
  Triad T = Triad::from_id("r3-standard");
  CylinderGrid g{1.0, 17, 16};
  MapField f;
  f.grid = g;
  f.triad_id = T.id();
  f.w.resize(g.size());
  for (int i = 0; i < g.ntau; ++i)
    for (int j = 0; j < g.nt; ++j) {
      double tau = g.tau(i), t = 2.0 * kPi * g.t(j);
      f.at(i, j) = Vec{0.3 * std::cos(t) + 0.1 * tau,
                      0.2 * std::sin(t) - 0.05 * tau * tau,
                      0.1 * std::sin(t) + 0.2 * tau};
    }
  IdentityResiduals r = check_energy_identities(T, f);
  // algebraic identities hold to rounding at every node
  CHECK(r.energy_split < 1e-12);
  CHECK(r.dlambda_split < 1e-12);  // exact on the flat model
  CHECK(r.lambda_wedge < 1e-12);
  // the field is off-shell: on-shell residual should be visibly nonzero
  CHECK(r.onshell > 1e-3);
  CHECK(r.res_dbar > 1e-3);
}

TEST_CASE("dbar/del split: |d^pi w|^2 = |del|^2 + |dbar|^2 nodewise") {
  Triad T = Triad::from_id("ellipsoid-perturbed:seed=7");
  CylinderGrid g{1.0, 9, 8};
  MapField f = massless_field(T, 0.2, kPi * kGolden, g);
  NodeVecs db = dbar_pi(T, f), dl = del_pi(T, f), zeta, eta;
  xi_derivatives(T, f, zeta, eta);
  for (int k = 0; k < g.size(); ++k) {
    const Vec& p = f.w[k];
    double lhs = T.metric(p, zeta[k], zeta[k]) + T.metric(p, eta[k], eta[k]);
    double rhs = 2.0 * T.metric(p, db[k], db[k]) + 2.0 * T.metric(p, dl[k], dl[k]);
    CHECK(lhs == doctest::Approx(rhs).epsilon(1e-11));
  }
}
