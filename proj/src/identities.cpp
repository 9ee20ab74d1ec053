#include "ciw/identities.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <functional>
#include <future>
#include <stdexcept>
#include <thread>

#include "ciw/instanton.hpp"
#include "ciw/rng.hpp"

namespace ciw {
namespace {

constexpr double kPi = 3.14159265358979323846;

int max_threads() {
  unsigned hw = std::thread::hardware_concurrency();
  return static_cast<int>(std::min(hw == 0 ? 1u : hw, 8u));
}

template <class F>
void par_for(int n, const F& fn) {
  int nth = max_threads();
  if (nth < 2 || n < 64) {
    for (int i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<int> next{0};
  std::vector<std::thread> ths;
  for (int t = 0; t < nth; ++t)
    ths.emplace_back([&] {
      for (;;) {
        int i = next.fetch_add(16);
        if (i >= n) return;
        int e = std::min(n, i + 16);
        for (; i < e; ++i) fn(i);
      }
    });
  for (auto& th : ths) th.join();
}

double gnorm(const Triad& T, const Vec& p, const Vec& v) {
  return std::sqrt(std::max(0.0, T.metric(p, v, v)));
}

// rows of the order-measurement window tau in [L/4, 3L/4]
void window_rows(const CylinderGrid& g, int& i0, int& i1) {
  i0 = (g.ntau - 1 + 3) / 4;
  i1 = 3 * (g.ntau - 1) / 4;
}

double window_max(const CylinderGrid& g, const std::vector<double>& nodal) {
  int i0, i1;
  window_rows(g, i0, i1);
  double m = 0.0;
  for (int i = i0; i <= i1; ++i)
    for (int j = 0; j < g.nt; ++j) m = std::max(m, std::abs(nodal[g.idx(i, j)]));
  return m;
}

// trapezoid integral over rows [i0, i1], full circle in t
double rows_integral(const CylinderGrid& g, const std::vector<double>& nodal,
                     int i0, int i1) {
  double s = 0.0;
  for (int i = i0; i <= i1; ++i) {
    double w = (i == i0 || i == i1) ? 0.5 : 1.0;
    for (int j = 0; j < g.nt; ++j) s += w * nodal[g.idx(i, j)];
  }
  return s * g.htau() * g.ht();
}

std::vector<double> lap_hodge(const CylinderGrid& g,
                              const std::vector<double>& s) {
  // Hodge Laplacian on 0-forms, delta d = -(d_tautau + d_tt), via composed
  // first-derivative stencils to match the nested covariant operators
  std::vector<double> dtt = deriv_t(g, deriv_t(g, s));
  std::vector<double> dqq = deriv_tau(g, deriv_tau(g, s));
  std::vector<double> out(g.size());
  for (int k = 0; k < g.size(); ++k) out[k] = -(dqq[k] + dtt[k]);
  return out;
}

// seeded smooth scalar field on the cylinder, t-periodic
std::vector<double> smooth_scalar(const CylinderGrid& g, CounterRng& rng) {
  double a0 = 0.5 * rng.sym(), a1 = 0.5 * rng.sym(), a2 = 0.5 * rng.sym(),
         a3 = 0.5 * rng.sym();
  double p1 = 2.0 * kPi * rng.uniform(), p2 = kPi * rng.uniform(),
         p3 = 2.0 * kPi * rng.uniform(), p4 = kPi * rng.uniform();
  std::vector<double> out(g.size());
  for (int i = 0; i < g.ntau; ++i)
    for (int j = 0; j < g.nt; ++j) {
      double tt = 2.0 * kPi * g.t(j), q = kPi * g.tau(i) / g.L;
      out[g.idx(i, j)] = a0 + a1 * std::cos(tt + p1) + a2 * std::cos(q + p2) +
                         a3 * std::cos(tt + p3) * std::cos(q + p4);
    }
  return out;
}

XiOneForm smooth_oneform(const PullbackConnection& P, CounterRng& rng) {
  const CylinderGrid& g = P.f->grid;
  XiOneForm b;
  b.btau.resize(g.size());
  b.bt.resize(g.size());
  std::vector<double> c[4] = {smooth_scalar(g, rng), smooth_scalar(g, rng),
                              smooth_scalar(g, rng), smooth_scalar(g, rng)};
  for (int k = 0; k < g.size(); ++k) {
    b.btau[k] = c[0][k] * P.e1[k] + c[1][k] * P.e2[k];
    b.bt[k] = c[2][k] * P.e1[k] + c[3][k] * P.e2[k];
  }
  return b;
}

struct Ctx {
  const Triad& T;
  const MapField& f;
  PullbackConnection P;
  NodeVecs zeta, eta;    // pi dw/dtau, pi dw/dt
  NodeVecs Ptau, Pt;     // (1,0)-part components, Pt = J Ptau
  std::vector<double> atau, at;

  Ctx(const Triad& t, const MapField& m) : T(t), f(m), P(t, m) {
    xi_derivatives(T, f, zeta, eta);
    pullback_lambda(T, f, atau, at);
    NodeVecs dp = del_pi(T, f);
    int n = f.grid.size();
    Ptau.resize(n);
    Pt.resize(n);
    for (int k = 0; k < n; ++k) {
      Ptau[k] = dp[k];
      Pt[k] = T.japply(f.w[k], dp[k]);
    }
  }
};

}  // namespace

// ------------------------- pullback connection -----------------------------

PullbackConnection::PullbackConnection(const Triad& t, const MapField& m)
    : T(&t), f(&m) {
  const CylinderGrid& g = m.grid;
  int n = g.size();
  wtau = deriv_tau(m);
  wt = deriv_t(m);

  // one ambient seed for the whole frame field: pick the candidate whose xi
  // projection stays farthest from degenerate over the image
  int dim = t.dim();
  std::vector<Vec> cands;
  for (int i = 0; i < dim; ++i) {
    Vec e(dim);
    e[i] = 1.0;
    cands.push_back(e);
  }
  cands.push_back(t.xi_frame(m.w[g.idx(g.ntau / 2, 0)]).e1);
  Vec seed;
  double best = -1.0;
  for (const Vec& c : cands) {
    double mn = 1e300;
    for (int k = 0; k < n; ++k)
      mn = std::min(mn, gnorm(t, m.w[k], t.project_xi(m.w[k], c)));
    if (mn > best) {
      best = mn;
      seed = c;
    }
  }
  if (best < 1e-3)
    throw std::runtime_error("no nondegenerate frame seed over the image");

  const Triad& TT = t;
  VecField field = [&TT, seed](const Vec& q) {
    Vec w = TT.project_xi(q, seed);
    return w * (1.0 / std::sqrt(TT.metric(q, w, w)));
  };

  e1.resize(n);
  e2.resize(n);
  n1tau.resize(n);
  n1t.resize(n);
  par_for(n, [&](int k) {
    const Vec& p = m.w[k];
    e1[k] = field(p);
    e2[k] = t.japply(p, e1[k]);
    n1tau[k] = t.nabla_pi(p, wtau[k], field);
    n1t[k] = t.nabla_pi(p, wt[k], field);
  });
}

void PullbackConnection::coords(const NodeVecs& s, std::vector<double>& c1,
                                std::vector<double>& c2) const {
  int n = f->grid.size();
  c1.resize(n);
  c2.resize(n);
  for (int k = 0; k < n; ++k) {
    c1[k] = T->metric(f->w[k], s[k], e1[k]);
    c2[k] = T->metric(f->w[k], s[k], e2[k]);
  }
}

void PullbackConnection::nabla(const NodeVecs& s, NodeVecs& out_tau,
                               NodeVecs& out_t) const {
  const CylinderGrid& g = f->grid;
  std::vector<double> c1, c2;
  coords(s, c1, c2);
  std::vector<double> d1q = deriv_tau(g, c1), d2q = deriv_tau(g, c2);
  std::vector<double> d1t = deriv_t(g, c1), d2t = deriv_t(g, c2);
  int n = g.size();
  out_tau.resize(n);
  out_t.resize(n);
  for (int k = 0; k < n; ++k) {
    const Vec& p = f->w[k];
    Vec jq = T->japply(p, n1tau[k]);
    Vec jt = T->japply(p, n1t[k]);
    out_tau[k] =
        e1[k] * d1q[k] + e2[k] * d2q[k] + n1tau[k] * c1[k] + jq * c2[k];
    out_t[k] = e1[k] * d1t[k] + e2[k] * d2t[k] + n1t[k] * c1[k] + jt * c2[k];
  }
}

XiOneForm PullbackConnection::nabla(const NodeVecs& s) const {
  XiOneForm b;
  nabla(s, b.btau, b.bt);
  return b;
}

NodeVecs PullbackConnection::curvature_e1() const {
  // R(d_tau, d_t) e1 as the commutator of the pulled-back covariant
  // derivatives; the base is flat so no bracket term appears
  XiOneForm a = nabla(n1t);
  XiOneForm b = nabla(n1tau);
  int n = f->grid.size();
  NodeVecs r(n);
  for (int k = 0; k < n; ++k) r[k] = a.btau[k] - b.bt[k];
  return r;
}

Vec PullbackConnection::curvature_apply(const NodeVecs& r1, int k,
                                        const Vec& v) const {
  const Vec& p = f->w[k];
  double c1 = T->metric(p, v, e1[k]);
  double c2 = T->metric(p, v, e2[k]);
  return r1[k] * c1 + T->japply(p, r1[k]) * c2;
}

// ---------------------------- exterior calculus ----------------------------

XiOneForm star1(const XiOneForm& b) {
  XiOneForm o;
  int n = static_cast<int>(b.btau.size());
  o.btau.resize(n);
  o.bt.resize(n);
  for (int k = 0; k < n; ++k) {
    o.btau[k] = -1.0 * b.bt[k];
    o.bt[k] = b.btau[k];
  }
  return o;
}

NodeVecs d_oneform(const PullbackConnection& P, const XiOneForm& b) {
  XiOneForm nq = P.nabla(b.bt);
  XiOneForm nt = P.nabla(b.btau);
  int n = static_cast<int>(b.btau.size());
  NodeVecs out(n);
  for (int k = 0; k < n; ++k) out[k] = nq.btau[k] - nt.bt[k];
  return out;
}

NodeVecs delta_oneform(const PullbackConnection& P, const XiOneForm& b) {
  XiOneForm nq = P.nabla(b.btau);
  XiOneForm nt = P.nabla(b.bt);
  int n = static_cast<int>(b.btau.size());
  NodeVecs out(n);
  for (int k = 0; k < n; ++k) out[k] = -1.0 * (nq.btau[k] + nt.bt[k]);
  return out;
}

XiOneForm delta_twoform(const PullbackConnection& P, const NodeVecs& g2) {
  XiOneForm n2 = P.nabla(g2);
  XiOneForm out;
  int n = static_cast<int>(g2.size());
  out.btau.resize(n);
  out.bt.resize(n);
  for (int k = 0; k < n; ++k) {
    out.btau[k] = n2.bt[k];
    out.bt[k] = -1.0 * n2.btau[k];
  }
  return out;
}

// ----------------------------- evaluators ----------------------------------

namespace {

double fundamental_impl(const Ctx& c) {
  const CylinderGrid& g = c.f.grid;
  XiOneForm nz = c.P.nabla(c.zeta);
  std::vector<double> r(g.size());
  bool sas = c.T.sasakian();
  par_for(g.size(), [&](int k) {
    const Vec& p = c.f.w[k];
    Vec v = nz.btau[k] + c.T.japply(p, nz.bt[k]);
    if (!sas) {
      v -= 0.5 * c.at[k] * c.T.lieJ_apply(p, c.zeta[k]);
      v += 0.5 * c.atau[k] * c.T.lieJ_apply(p, c.T.japply(p, c.zeta[k]));
    }
    r[k] = gnorm(c.T, p, v);
  });
  return window_max(g, r);
}

double two_form_impl(const Ctx& c, bool full) {
  const CylinderGrid& g = c.f.grid;
  XiOneForm ne = c.P.nabla(c.eta);
  XiOneForm nz = c.P.nabla(c.zeta);
  std::vector<double> r(g.size());
  bool sas = c.T.sasakian();
  par_for(g.size(), [&](int k) {
    const Vec& p = c.f.w[k];
    Vec lhs = ne.btau[k] - nz.bt[k];
    Vec rhs(c.T.dim());
    if (full) {
      rhs = c.T.torsion_pi(p, c.zeta[k], c.eta[k]);
      if (!sas) {
        rhs += 0.5 * c.atau[k] *
               c.T.lieJ_apply(p, c.T.japply(p, c.eta[k]));
        rhs -= 0.5 * c.at[k] * c.T.lieJ_apply(p, c.T.japply(p, c.zeta[k]));
      }
    } else if (!sas) {
      rhs = -0.5 * (c.at[k] * c.T.lieJ_apply(p, c.Pt[k]) +
                    c.atau[k] * c.T.lieJ_apply(p, c.Ptau[k]));
    }
    r[k] = gnorm(c.T, p, lhs - rhs);
  });
  return window_max(g, r);
}

double torsion_impl(const Ctx& c) {
  const CylinderGrid& g = c.f.grid;
  std::vector<double> r(g.size());
  par_for(g.size(), [&](int k) {
    const Vec& p = c.f.w[k];
    r[k] = gnorm(c.T, p, c.T.torsion_pi(p, c.Ptau[k], c.Pt[k]));
  });
  return window_max(g, r);
}

// covariant derivative of the Lie-derivative endomorphism applied to the
// frame leg, along both coordinate directions; zero in the Sasakian case
void nabla_lieJ_legs(const Ctx& c, NodeVecs& m1tau, NodeVecs& m1t) {
  const CylinderGrid& g = c.f.grid;
  const Triad& T = c.T;
  const PullbackConnection& P = c.P;
  m1tau.assign(g.size(), Vec(T.dim()));
  m1t.assign(g.size(), Vec(T.dim()));
  if (T.sasakian()) return;
  const NodeVecs& e1 = P.e1;
  par_for(g.size(), [&](int k) {
    const Vec& p = c.f.w[k];
    Vec seed = e1[k];
    VecField fld = [&T, seed](const Vec& q) {
      Vec u = T.project_xi(q, seed);
      u = u * (1.0 / std::sqrt(T.metric(q, u, u)));
      return T.lieJ_apply(q, u);
    };
    m1tau[k] = T.nabla_pi(p, P.wtau[k], fld) - T.lieJ_apply(p, P.n1tau[k]);
    m1t[k] = T.nabla_pi(p, P.wt[k], fld) - T.lieJ_apply(p, P.n1t[k]);
  });
}

Vec nabla_lieJ_apply(const Ctx& c, const NodeVecs& m1, int k, const Vec& v) {
  const Vec& p = c.f.w[k];
  double c1 = c.T.metric(p, v, c.P.e1[k]);
  double c2 = c.T.metric(p, v, c.P.e2[k]);
  return m1[k] * c1 - c.T.japply(p, m1[k]) * c2;
}

double density_impl(const Ctx& c) {
  const CylinderGrid& g = c.f.grid;
  const Triad& T = c.T;
  int n = g.size();
  std::vector<double> epi(n);
  for (int k = 0; k < n; ++k)
    epi[k] = T.metric(c.f.w[k], c.zeta[k], c.zeta[k]) +
             T.metric(c.f.w[k], c.eta[k], c.eta[k]);
  std::vector<double> lap = lap_hodge(g, epi);

  XiOneForm nPq = c.P.nabla(c.Ptau);
  XiOneForm nPt = c.P.nabla(c.Pt);
  NodeVecs r1 = c.P.curvature_e1();

  bool sas = T.sasakian();
  NodeVecs m1tau, m1t, sfield;
  std::vector<double> daq_q, daq_t, dat_q, dat_t;
  XiOneForm ns;
  if (!sas) {
    nabla_lieJ_legs(c, m1tau, m1t);
    daq_q = deriv_tau(g, c.atau);
    daq_t = deriv_t(g, c.atau);
    dat_q = deriv_tau(g, c.at);
    dat_t = deriv_t(g, c.at);
  }

  std::vector<double> r(n);
  par_for(n, [&](int k) {
    const Vec& p = c.f.w[k];
    double lhs = -0.5 * lap[k];
    double grad2 = T.metric(p, nPq.btau[k], nPq.btau[k]) +
                   T.metric(p, nPq.bt[k], nPq.bt[k]) +
                   T.metric(p, nPt.btau[k], nPt.btau[k]) +
                   T.metric(p, nPt.bt[k], nPt.bt[k]);
    Vec Rq = c.P.curvature_apply(r1, k, c.Ptau[k]);
    Vec Rt = c.P.curvature_apply(r1, k, c.Pt[k]);
    double corr =
        T.metric(p, Rq, c.Pt[k]) - T.metric(p, Rt, c.Ptau[k]);
    double dpair = 0.0;
    if (!sas) {
      // delta-term via the three-term product expansion of
      // s = <(L J) del w, w^* lambda>
      auto ds = [&](int dir) {
        const std::vector<double>& da_q = dir == 0 ? daq_q : daq_t;
        const std::vector<double>& da_t = dir == 0 ? dat_q : dat_t;
        const NodeVecs& m1 = dir == 0 ? m1tau : m1t;
        const NodeVecs& nq = dir == 0 ? nPq.btau : nPq.bt;
        const NodeVecs& nt = dir == 0 ? nPt.btau : nPt.bt;
        Vec v = da_q[k] * T.lieJ_apply(p, c.Ptau[k]) +
                da_t[k] * T.lieJ_apply(p, c.Pt[k]);
        v += c.atau[k] * nabla_lieJ_apply(c, m1, k, c.Ptau[k]);
        v += c.at[k] * nabla_lieJ_apply(c, m1, k, c.Pt[k]);
        v += c.atau[k] * T.lieJ_apply(p, nq[k]);
        v += c.at[k] * T.lieJ_apply(p, nt[k]);
        return v;
      };
      Vec ds_tau = ds(0), ds_t = ds(1);
      dpair = T.metric(p, ds_t, c.Ptau[k]) - T.metric(p, ds_tau, c.Pt[k]);
    }
    r[k] = lhs - (grad2 + corr + dpair);
  });
  return window_max(g, r);
}

double laplacian_double_on(const Ctx& c, const NodeVecs& bq,
                           const NodeVecs& bt) {
  const CylinderGrid& g = c.f.grid;
  XiOneForm b{bq, bt};
  NodeVecs db = delta_oneform(c.P, b);
  XiOneForm dd = c.P.nabla(db);
  NodeVecs G = d_oneform(c.P, b);
  XiOneForm sd = delta_twoform(c.P, G);
  std::vector<double> r(g.size());
  for (int k = 0; k < g.size(); ++k) {
    const Vec& p = c.f.w[k];
    double lhsp = c.T.metric(p, dd.btau[k], bq[k]) +
                  c.T.metric(p, dd.bt[k], bt[k]);
    double rhsp = c.T.metric(p, sd.btau[k], bq[k]) +
                  c.T.metric(p, sd.bt[k], bt[k]);
    r[k] = lhsp - rhsp;
  }
  return window_max(g, r);
}

double laplacian_double_impl(const Ctx& c, std::uint64_t seed) {
  // primary probe: a seeded smooth (1,0)-form (the lemma's proof is pointwise
  // algebra for any such form); also evaluated on del w itself, whose both
  // sides are near zero on an instanton
  CounterRng rng(seed, 41);
  std::vector<double> c1 = smooth_scalar(c.f.grid, rng);
  std::vector<double> c2 = smooth_scalar(c.f.grid, rng);
  int n = c.f.grid.size();
  NodeVecs bq(n), bt(n);
  for (int k = 0; k < n; ++k) {
    bq[k] = c1[k] * c.P.e1[k] + c2[k] * c.P.e2[k];
    bt[k] = c.T.japply(c.f.w[k], bq[k]);
  }
  double r_probe = laplacian_double_on(c, bq, bt);
  double r_field = laplacian_double_on(c, c.Ptau, c.Pt);
  return std::max(r_probe, r_field);
}

double forms_impl(const Ctx& c, std::uint64_t seed) {
  const CylinderGrid& g = c.f.grid;
  const Triad& T = c.T;
  CounterRng rng(seed, 7);
  XiOneForm b = smooth_oneform(c.P, rng);
  NodeVecs r1 = c.P.curvature_e1();

  // route A: (d delta + delta d) beta
  NodeVecs db = delta_oneform(c.P, b);
  XiOneForm dd = c.P.nabla(db);
  NodeVecs G = d_oneform(c.P, b);
  XiOneForm sd = delta_twoform(c.P, G);

  // route B: -Tr nabla^2 + curvature correction
  XiOneForm nq = c.P.nabla(b.btau);
  XiOneForm nt = c.P.nabla(b.bt);
  XiOneForm nqq = c.P.nabla(nq.btau), nqt = c.P.nabla(nq.bt);
  XiOneForm ntq = c.P.nabla(nt.btau), ntt = c.P.nabla(nt.bt);

  int n = g.size();
  std::vector<double> res(n), resS(n);
  std::vector<double> b2(n);
  for (int k = 0; k < n; ++k) {
    const Vec& p = c.f.w[k];
    b2[k] = T.metric(p, b.btau[k], b.btau[k]) + T.metric(p, b.bt[k], b.bt[k]);
  }
  std::vector<double> lapb2 = lap_hodge(g, b2);
  for (int k = 0; k < n; ++k) {
    const Vec& p = c.f.w[k];
    Vec Aq = dd.btau[k] + sd.btau[k];
    Vec At = dd.bt[k] + sd.bt[k];
    Vec corr_q = -1.0 * c.P.curvature_apply(r1, k, b.bt[k]);
    Vec corr_t = c.P.curvature_apply(r1, k, b.btau[k]);
    Vec Bq = -1.0 * (nqq.btau[k] + nqt.bt[k]) + corr_q;
    Vec Bt = -1.0 * (ntq.btau[k] + ntt.bt[k]) + corr_t;
    res[k] = std::max(gnorm(T, p, Aq - Bq), gnorm(T, p, At - Bt));

    // scalar Bochner identity with route-A Laplacian
    double nb2 = T.metric(p, nq.btau[k], nq.btau[k]) +
                 T.metric(p, nq.bt[k], nq.bt[k]) +
                 T.metric(p, nt.btau[k], nt.btau[k]) +
                 T.metric(p, nt.bt[k], nt.bt[k]);
    double pair = T.metric(p, Aq, b.btau[k]) + T.metric(p, At, b.bt[k]);
    double ric = T.metric(p, corr_q, b.btau[k]) + T.metric(p, corr_t, b.bt[k]);
    resS[k] = -0.5 * lapb2[k] - (nb2 - pair + ric);
  }
  return std::max(window_max(g, res), window_max(g, resS));
}

double ibp_impl(const Ctx& c, std::uint64_t seed) {
  const CylinderGrid& g = c.f.grid;
  const Triad& T = c.T;
  CounterRng rng(seed, 13);
  // compactly supported section: raised-cosine bump in tau times trig in t
  std::vector<double> c1 = smooth_scalar(g, rng), c2 = smooth_scalar(g, rng);
  int n = g.size();
  NodeVecs b0(n);
  for (int i = 0; i < g.ntau; ++i) {
    double u = (g.tau(i) / g.L - 0.2) / 0.6;
    double bump = (u <= 0.0 || u >= 1.0)
                      ? 0.0
                      : 0.5 * (1.0 - std::cos(2.0 * kPi * u));
    for (int j = 0; j < g.nt; ++j) {
      int k = g.idx(i, j);
      b0[k] = bump * (c1[k] * c.P.e1[k] + c2[k] * c.P.e2[k]);
    }
  }
  XiOneForm b1 = smooth_oneform(c.P, rng);
  XiOneForm db0 = c.P.nabla(b0);
  NodeVecs sb1 = delta_oneform(c.P, b1);
  std::vector<double> f0(n), f1v(n);
  for (int k = 0; k < n; ++k) {
    const Vec& p = c.f.w[k];
    f0[k] = T.metric(p, db0.btau[k], b1.btau[k]) +
            T.metric(p, db0.bt[k], b1.bt[k]);
    f1v[k] = T.metric(p, b0[k], sb1[k]);
  }
  return std::abs(integrate(g, f0) - integrate(g, f1v));
}

double apriori_impl(const Ctx& c, double* ratio) {
  const CylinderGrid& g = c.f.grid;
  const Triad& T = c.T;
  int n = g.size();
  std::vector<double> e(n);
  for (int k = 0; k < n; ++k)
    e[k] = T.metric(c.f.w[k], c.zeta[k], c.zeta[k]) +
           T.metric(c.f.w[k], c.eta[k], c.eta[k]) +
           c.atau[k] * c.atau[k] + c.at[k] * c.at[k];
  std::vector<double> lap = lap_hodge(g, e);
  TensorNorms N = sample_tensor_norms(T, c.f);
  double C = 2.0 * N.lieJ * N.lieJ + N.nabla_lieJ + N.ric + 1.0;
  int i0, i1;
  window_rows(g, i0, i1);
  double viol = 0.0, worst = -1e300;
  for (int i = i0; i <= i1; ++i)
    for (int j = 0; j < g.nt; ++j) {
      int k = g.idx(i, j);
      double bound = C * e[k] * e[k];
      viol = std::max(viol, lap[k] - bound);
      if (bound > 0.0) worst = std::max(worst, lap[k] / bound);
    }
  if (ratio) *ratio = worst;
  return viol;
}

double coercive_impl(const Ctx& c, double d1a, double d1b, double d2a,
                     double d2b, double* ratio) {
  const CylinderGrid& g = c.f.grid;
  const Triad& T = c.T;
  if (!(d2a < d1a && d1a < d1b && d1b < d2b))
    throw std::invalid_argument("coercive domains must be strictly nested");
  double ramp = std::min(d1a - d2a, d2b - d1b) * g.L;
  double dchi = 0.5 * kPi / ramp;  // raised-cosine ramp slope sup
  TensorNorms N = sample_tensor_norms(T, c.f);
  double c1paper = 9.0 * N.lieJ * N.lieJ + 4.0 * N.nabla_lieJ + 4.0 * N.ric +
                   4.0;
  double C1 = 16.0 * dchi * dchi;  // + 8 ||K||, zero on the flat cylinder
  double C2 = 2.0 * c1paper;

  XiOneForm nz = c.P.nabla(c.zeta);
  XiOneForm ne = c.P.nabla(c.eta);
  std::vector<double> daq_q = deriv_tau(g, c.atau),
                      daq_t = deriv_t(g, c.atau),
                      dat_q = deriv_tau(g, c.at), dat_t = deriv_t(g, c.at);
  int n = g.size();
  std::vector<double> q(n), e(n), e2(n);
  for (int k = 0; k < n; ++k) {
    const Vec& p = c.f.w[k];
    q[k] = T.metric(p, nz.btau[k], nz.btau[k]) +
           T.metric(p, nz.bt[k], nz.bt[k]) +
           T.metric(p, ne.btau[k], ne.btau[k]) +
           T.metric(p, ne.bt[k], ne.bt[k]) + daq_q[k] * daq_q[k] +
           daq_t[k] * daq_t[k] + dat_q[k] * dat_q[k] + dat_t[k] * dat_t[k];
    e[k] = T.metric(p, c.zeta[k], c.zeta[k]) +
           T.metric(p, c.eta[k], c.eta[k]) + c.atau[k] * c.atau[k] +
           c.at[k] * c.at[k];
    e2[k] = e[k] * e[k];
  }
  auto row = [&](double fr) {
    return static_cast<int>(std::lround(fr * (g.ntau - 1)));
  };
  double lhs = rows_integral(g, q, row(d1a), row(d1b));
  double rhs = C1 * rows_integral(g, e, row(d2a), row(d2b)) +
               C2 * rows_integral(g, e2, row(d2a), row(d2b));
  if (ratio) *ratio = rhs > 0.0 ? lhs / rhs : 1e300;
  return std::max(0.0, lhs - rhs);
}

}  // namespace

double fundamental_equation_residual(const Triad& T, const MapField& f) {
  return fundamental_impl(Ctx(T, f));
}
double two_form_equation_residual(const Triad& T, const MapField& f,
                                  bool full_torsion) {
  return two_form_impl(Ctx(T, f), full_torsion);
}
double torsion_onshell_residual(const Triad& T, const MapField& f) {
  return torsion_impl(Ctx(T, f));
}
double weitzenboeck_density_residual(const Triad& T, const MapField& f) {
  return density_impl(Ctx(T, f));
}
double laplacian_double_residual(const Triad& T, const MapField& f) {
  return laplacian_double_impl(Ctx(T, f), 1);
}
double weitzenboeck_forms_residual(const Triad& T, const MapField& f,
                                   std::uint64_t seed) {
  return forms_impl(Ctx(T, f), seed);
}
double integration_by_parts_residual(const Triad& T, const MapField& f,
                                     std::uint64_t seed) {
  return ibp_impl(Ctx(T, f), seed);
}
double apriori_density_violation(const Triad& T, const MapField& f,
                                 double* ratio) {
  return apriori_impl(Ctx(T, f), ratio);
}
double coercive_estimate_violation(const Triad& T, const MapField& f,
                                   double d1a, double d1b, double d2a,
                                   double d2b, double* ratio) {
  return coercive_impl(Ctx(T, f), d1a, d1b, d2a, d2b, ratio);
}

double hodge_star_square_defect(const CylinderGrid& g, std::uint64_t seed) {
  CounterRng rng(seed, 3);
  XiOneForm b;
  b.btau.resize(g.size());
  b.bt.resize(g.size());
  for (int k = 0; k < g.size(); ++k) {
    Vec u(3), v(3);
    for (int i = 0; i < 3; ++i) {
      u[i] = rng.sym();
      v[i] = rng.sym();
    }
    b.btau[k] = u;
    b.bt[k] = v;
  }
  XiOneForm ss = star1(star1(b));
  double d = 0.0;
  for (int k = 0; k < g.size(); ++k)
    d = std::max(d, std::max(norm(ss.btau[k] + b.btau[k]),
                             norm(ss.bt[k] + b.bt[k])));
  return d;
}

double inner_star_defect(const Triad& T, const MapField& f,
                         std::uint64_t seed) {
  CounterRng rng(seed, 5);
  const CylinderGrid& g = f.grid;
  double d = 0.0;
  for (int k = 0; k < g.size(); ++k) {
    const Vec& p = f.w[k];
    Vec r[4];
    for (auto& v : r) {
      v = Vec(T.dim());
      for (int i = 0; i < T.dim(); ++i) v[i] = rng.sym();
      v = T.project_xi(p, v);
    }
    // <b1, b2> vs *(b1 ^ *b2) for b1 = (r0, r1), b2 = (r2, r3)
    double lhs = T.metric(p, r[0], r[2]) + T.metric(p, r[1], r[3]);
    Vec s_tau = -1.0 * r[3], s_t = r[2];  // *b2
    double rhs = T.metric(p, r[0], s_t) - T.metric(p, r[1], s_tau);
    d = std::max(d, std::abs(lhs - rhs));
  }
  return d;
}

namespace {
TensorNorms tensor_norms_impl(const Triad& T, const MapField& f) {
  TensorNorms N;
  const CylinderGrid& g = f.grid;
  int stride = std::max(1, g.size() / 96);
  bool sas = T.sasakian();
  std::vector<int> nodes;
  for (int k = 0; k < g.size(); k += stride) nodes.push_back(k);
  std::vector<double> lj(nodes.size(), 0.0), nlj(nodes.size(), 0.0),
      rc(nodes.size(), 0.0);
  par_for(static_cast<int>(nodes.size()), [&](int s) {
    const Vec& p = f.w[nodes[s]];
    XiFrame fr = T.xi_frame(p);
    if (!sas) {
      lj[s] = T.endo_opnorm(T.lie_derivative_J(p));
      Vec dirs[3] = {fr.e1, fr.e2, T.reeb(p)};
      Vec seed = fr.e1;
      VecField e1f = [&T, seed](const Vec& q) {
        Vec u = T.project_xi(q, seed);
        return u * (1.0 / std::sqrt(T.metric(q, u, u)));
      };
      VecField ljf = [&T, e1f](const Vec& q) {
        return T.lieJ_apply(q, e1f(q));
      };
      for (const Vec& d : dirs) {
        Vec m1 = T.nabla_pi(p, d, ljf) - T.lieJ_apply(p, T.nabla_pi(p, d, e1f));
        double a = T.metric(p, m1, m1);
        double b = std::abs(T.metric(p, m1, T.japply(p, m1)));
        nlj[s] = std::max(nlj[s], std::sqrt(a + b));
      }
    }
    Vec X = T.reeb(p);
    double r = T.endo_opnorm(T.curvature_pi(p, fr.e1, fr.e2));
    r = std::max(r, T.endo_opnorm(T.curvature_pi(p, fr.e1, X)));
    r = std::max(r, T.endo_opnorm(T.curvature_pi(p, fr.e2, X)));
    rc[s] = r;
  });
  for (std::size_t s = 0; s < nodes.size(); ++s) {
    N.lieJ = std::max(N.lieJ, lj[s]);
    N.nabla_lieJ = std::max(N.nabla_lieJ, nlj[s]);
    N.ric = std::max(N.ric, rc[s]);
  }
  N.lieJ *= 1.1;
  N.nabla_lieJ *= 1.1;
  N.ric *= 1.1;
  return N;
}
}  // namespace

TensorNorms sample_tensor_norms(const Triad& T, const MapField& f) {
  return tensor_norms_impl(T, f);
}

// ------------------------------- suite -------------------------------------

namespace {

MapField synthetic_field(const Triad& T, const CylinderGrid& g,
                         std::uint64_t seed) {
  // smooth t-periodic off-shell field around a sampled base point
  CounterRng rng(seed, 17);
  Vec p0 = T.sample_point(rng);
  int dim = T.dim();
  std::vector<double> amp(dim), ph(dim), pq(dim);
  for (int i = 0; i < dim; ++i) {
    amp[i] = 0.05 * (0.5 + rng.uniform());
    ph[i] = 2.0 * kPi * rng.uniform();
    pq[i] = kPi * rng.uniform();
  }
  MapField f;
  f.grid = g;
  f.triad_id = T.id();
  f.w.resize(g.size());
  for (int i = 0; i < g.ntau; ++i)
    for (int j = 0; j < g.nt; ++j) {
      Vec p = p0;
      for (int d = 0; d < dim; ++d)
        p[d] += amp[d] * std::sin(2.0 * kPi * g.t(j) + ph[d]) *
                std::cos(kPi * g.tau(i) / g.L + pq[d]);
      f.at(i, j) = T.project_point(p);
    }
  return f;
}

MapField offshell_flat_field(const CylinderGrid& g, std::uint64_t seed) {
  MapField f = oracle_flat(g, 0.3, 0.2);
  CounterRng rng(seed, 19);
  double ph = 2.0 * kPi * rng.uniform();
  for (int i = 0; i < g.ntau; ++i)
    for (int j = 0; j < g.nt; ++j) {
      double s = 0.05 * std::sin(2.0 * kPi * g.t(j) + ph) *
                 std::sin(kPi * g.tau(i) / g.L);
      f.at(i, j)[0] += s;
      f.at(i, j)[2] += 0.5 * s;
    }
  return f;
}

struct Job {
  std::string name;
  double expected;
  double cap;
  std::function<double(const Ctx&, const Ctx&)> eval;  // (onshell, offshell)
  std::string note;
};

void finish(IdentityReport& r, const std::vector<int>& ns) {
  if (r.expected_order > 0.0) {
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    int m = static_cast<int>(ns.size());
    for (int i = 0; i < m; ++i) {
      double x = -std::log(static_cast<double>(ns[i]));
      double y = std::log(std::max(r.residuals[i], 1e-300));
      sx += x;
      sy += y;
      sxx += x * x;
      sxy += x * y;
    }
    r.order = (m * sxy - sx * sy) / (m * sxx - sx * sx);
    bool mono = true;
    for (int i = 1; i < m; ++i)
      if (r.residuals[i] > r.residuals[i - 1]) mono = false;
    r.pass = r.order >= 0.8 * r.expected_order &&
             r.order <= 1.5 * r.expected_order &&
             r.residuals.back() <= r.cap && mono;
    // identities the discretization satisfies exactly (e.g. everything the
    // flat parallel frame trivializes) sit at roundoff where no order can be
    // read off; that is a pass, not a failure
    if (!r.pass && r.residuals.back() < 1e-10) {
      r.pass = true;
      r.note += " [at roundoff]";
    }
  } else {
    r.pass = true;
    for (double v : r.residuals) r.pass = r.pass && v <= r.cap;
    r.order = 0.0;
  }
}

}  // namespace

std::vector<IdentityReport> run_identity_suite(const std::string& triad_id,
                                               const std::vector<int>& ns,
                                               std::uint64_t seed) {
  Triad T = Triad::from_id(triad_id);
  bool flat = !T.constrained();

  // convention self-test before the suite proper
  {
    CylinderGrid g{1.0, 9, 8};
    if (hodge_star_square_defect(g, seed) > 1e-12)
      throw std::runtime_error("hodge star convention self-test failed");
  }

  std::vector<Job> jobs;
  if (flat) {
    jobs.push_back({"fundamental", 2.0, 0.0,
                    [](const Ctx& on, const Ctx&) {
                      return fundamental_impl(on);
                    },
                    "covariant CR equation for zeta on the exact solution"});
    jobs.push_back({"two-form-onshell", 2.0, 0.0,
                    [](const Ctx& on, const Ctx&) {
                      return two_form_impl(on, false);
                    },
                    "d-nabla of the projected differential vs the wedge term"});
    jobs.push_back({"two-form-offshell", 2.0, 0.0,
                    [](const Ctx&, const Ctx& off) {
                      return two_form_impl(off, true);
                    },
                    "full formula with torsion on an off-shell smooth field"});
    jobs.push_back({"torsion-onshell", 0.0, 1e-6,
                    [](const Ctx& on, const Ctx&) { return torsion_impl(on); },
                    "(1,1)-part of the torsion on the (1,0)-form vanishes"});
    jobs.push_back({"weitzenboeck-density", 2.0, 0.0,
                    [](const Ctx& on, const Ctx&) { return density_impl(on); },
                    "scalar Weitzenboeck for the projected energy density"});
    jobs.push_back({"laplacian-double", 2.0, 0.0,
                    [seed](const Ctx& on, const Ctx&) {
                      return laplacian_double_impl(on, seed);
                    },
                    "d-delta pairing equals delta-d pairing on (1,0)-forms"});
    jobs.push_back({"apriori-density", 0.0, 0.0,
                    [](const Ctx& on, const Ctx&) {
                      return apriori_impl(on, nullptr);
                    },
                    "density Laplacian bound with sampled tensor norms"});
    jobs.push_back({"coercive", 0.0, 0.0,
                    [](const Ctx& on, const Ctx&) {
                      return coercive_impl(on, 0.375, 0.625, 0.25, 0.75,
                                           nullptr);
                    },
                    "interior W^{2,2} bound with raised-cosine cutoff"});
  } else {
    jobs.push_back({"two-form-offshell", 2.0, 0.0,
                    [](const Ctx&, const Ctx& off) {
                      return two_form_impl(off, true);
                    },
                    "full formula with torsion on an off-shell smooth field"});
    jobs.push_back({"laplacian-double", 2.0, 0.0,
                    [seed](const Ctx&, const Ctx& off) {
                      return laplacian_double_impl(off, seed);
                    },
                    "d-delta pairing equals delta-d pairing on (1,0)-forms"});
  }
  jobs.push_back({"weitzenboeck-forms", 2.0, 0.0,
                  [seed](const Ctx&, const Ctx& off) {
                    return forms_impl(off, seed);
                  },
                  "two-route Laplacian plus scalar Bochner on a random form"});
  // the discrete covariant derivative inherits summation-by-parts from the
  // central stencils exactly; only frame-skewness roundoff remains
  jobs.push_back({"integration-by-parts", 0.0, 1e-8,
                  [seed](const Ctx&, const Ctx& off) {
                    return ibp_impl(off, seed);
                  },
                  "pairing of d-nabla against a compactly supported section"});
  jobs.push_back({"star-square", 0.0, 1e-12,
                  [](const Ctx&, const Ctx& off) {
                    return hodge_star_square_defect(off.f.grid, 23);
                  },
                  "** = -1 on 1-forms"});
  jobs.push_back({"inner-star", 0.0, 1e-12,
                  [](const Ctx&, const Ctx& off) {
                    return inner_star_defect(off.T, off.f, 29);
                  },
                  "<b1,b2> = *(b1 ^ *b2)"});

  // caps for order-checked identities: scale fixed from the coarsest run
  std::vector<IdentityReport> reports(jobs.size());
  for (std::size_t j = 0; j < jobs.size(); ++j) {
    reports[j].name = jobs[j].name;
    reports[j].expected_order = jobs[j].expected;
    reports[j].cap = jobs[j].cap;
    reports[j].note = jobs[j].note;
  }

  for (int n : ns) {
    CylinderGrid g{1.0, n + 1, n};
    MapField on_f, off_f;
    if (flat) {
      on_f = oracle_flat(g, 0.3, 0.2);
      off_f = offshell_flat_field(g, seed);
    } else {
      off_f = synthetic_field(T, g, seed);
      on_f = off_f;
    }
    Ctx on(T, on_f), off(T, off_f);
    std::vector<std::future<double>> futs;
    for (auto& jb : jobs)
      futs.push_back(std::async(std::launch::async,
                                [&jb, &on, &off] { return jb.eval(on, off); }));
    for (std::size_t j = 0; j < jobs.size(); ++j)
      reports[j].residuals.push_back(futs[j].get());
  }

  for (auto& r : reports) {
    if (r.expected_order > 0.0 && r.cap == 0.0)
      r.cap = 0.5 * r.residuals.front();  // finest must at least halve coarsest
    finish(r, ns);
  }
  return reports;
}

bool suite_pass(const std::vector<IdentityReport>& reports) {
  for (const auto& r : reports)
    if (!r.pass) return false;
  return true;
}

void write_identity_csv(const std::vector<IdentityReport>& reports,
                        const std::vector<int>& ns, const std::string& path) {
  std::FILE* fp = std::fopen(path.c_str(), "w");
  if (!fp) throw std::runtime_error("cannot open " + path);
  std::fprintf(fp, "identity,expected_order,order,pass");
  for (int n : ns) std::fprintf(fp, ",res_n%d", n);
  std::fprintf(fp, "\n");
  for (const auto& r : reports) {
    std::fprintf(fp, "%s,%.3g,%.6g,%d", r.name.c_str(), r.expected_order,
                 r.order, r.pass ? 1 : 0);
    for (double v : r.residuals) std::fprintf(fp, ",%.17g", v);
    std::fprintf(fp, "\n");
  }
  std::fclose(fp);
}

}  // namespace ciw
