#include "ciw/cylfield.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace ciw {

NodeVecs deriv_tau(const MapField& f) {
  const CylinderGrid& g = f.grid;
  double h = g.htau();
  NodeVecs out(g.size(), Vec(f.w.empty() ? 0 : f.w[0].n));
  for (int j = 0; j < g.nt; ++j) {
    for (int i = 0; i < g.ntau; ++i) {
      Vec d;
      if (i == 0)
        d = (f.at(0, j) * -3.0 + f.at(1, j) * 4.0 - f.at(2, j)) * (1.0 / (2 * h));
      else if (i == g.ntau - 1)
        d = (f.at(i, j) * 3.0 - f.at(i - 1, j) * 4.0 + f.at(i - 2, j)) *
            (1.0 / (2 * h));
      else
        d = (f.at(i + 1, j) - f.at(i - 1, j)) * (1.0 / (2 * h));
      out[g.idx(i, j)] = d;
    }
  }
  return out;
}

NodeVecs deriv_t(const MapField& f) {
  const CylinderGrid& g = f.grid;
  double h = g.ht();
  NodeVecs out(g.size(), Vec(f.w.empty() ? 0 : f.w[0].n));
  for (int i = 0; i < g.ntau; ++i)
    for (int j = 0; j < g.nt; ++j) {
      int jp = (j + 1) % g.nt, jm = (j + g.nt - 1) % g.nt;
      out[g.idx(i, j)] = (f.at(i, jp) - f.at(i, jm)) * (1.0 / (2 * h));
    }
  return out;
}

std::vector<double> deriv_tau(const CylinderGrid& g, const std::vector<double>& s) {
  double h = g.htau();
  std::vector<double> out(g.size());
  for (int j = 0; j < g.nt; ++j)
    for (int i = 0; i < g.ntau; ++i) {
      double d;
      if (i == 0)
        d = (-3.0 * s[g.idx(0, j)] + 4.0 * s[g.idx(1, j)] - s[g.idx(2, j)]) /
            (2 * h);
      else if (i == g.ntau - 1)
        d = (3.0 * s[g.idx(i, j)] - 4.0 * s[g.idx(i - 1, j)] +
             s[g.idx(i - 2, j)]) /
            (2 * h);
      else
        d = (s[g.idx(i + 1, j)] - s[g.idx(i - 1, j)]) / (2 * h);
      out[g.idx(i, j)] = d;
    }
  return out;
}

std::vector<double> deriv_t(const CylinderGrid& g, const std::vector<double>& s) {
  double h = g.ht();
  std::vector<double> out(g.size());
  for (int i = 0; i < g.ntau; ++i)
    for (int j = 0; j < g.nt; ++j) {
      int jp = (j + 1) % g.nt, jm = (j + g.nt - 1) % g.nt;
      out[g.idx(i, j)] = (s[g.idx(i, jp)] - s[g.idx(i, jm)]) / (2 * h);
    }
  return out;
}

void pullback_lambda(const Triad& T, const MapField& f, std::vector<double>& a_tau,
                     std::vector<double>& a_t) {
  NodeVecs wt = deriv_tau(f), ws = deriv_t(f);
  a_tau.resize(f.grid.size());
  a_t.resize(f.grid.size());
  for (int k = 0; k < f.grid.size(); ++k) {
    a_tau[k] = T.lambda(f.w[k], wt[k]);
    a_t[k] = T.lambda(f.w[k], ws[k]);
  }
}

void xi_derivatives(const Triad& T, const MapField& f, NodeVecs& zeta, NodeVecs& eta) {
  NodeVecs wt = deriv_tau(f), ws = deriv_t(f);
  zeta.resize(f.grid.size());
  eta.resize(f.grid.size());
  for (int k = 0; k < f.grid.size(); ++k) {
    zeta[k] = T.project_xi(f.w[k], wt[k]);
    eta[k] = T.project_xi(f.w[k], ws[k]);
  }
}

NodeVecs dbar_pi(const Triad& T, const MapField& f) {
  NodeVecs zeta, eta;
  xi_derivatives(T, f, zeta, eta);
  NodeVecs out(f.grid.size());
  for (int k = 0; k < f.grid.size(); ++k)
    out[k] = (zeta[k] + T.japply(f.w[k], eta[k])) * 0.5;
  return out;
}

NodeVecs del_pi(const Triad& T, const MapField& f) {
  NodeVecs zeta, eta;
  xi_derivatives(T, f, zeta, eta);
  NodeVecs out(f.grid.size());
  for (int k = 0; k < f.grid.size(); ++k)
    out[k] = (zeta[k] - T.japply(f.w[k], eta[k])) * 0.5;
  return out;
}

double integrate(const CylinderGrid& g, const std::vector<double>& nodal) {
  // fixed-order pairwise-free summation: deterministic row-major loops
  double s = 0.0;
  for (int i = 0; i < g.ntau; ++i) {
    double row = 0.0;
    for (int j = 0; j < g.nt; ++j) row += nodal[g.idx(i, j)];
    s += g.weight(i) * row;
  }
  return s * g.htau() * g.ht();
}

double slice_integral(const CylinderGrid& g, const std::vector<double>& nodal, int i) {
  double s = 0.0;
  for (int j = 0; j < g.nt; ++j) s += nodal[g.idx(i, j)];
  return s * g.ht();
}

EnergyReport energies(const Triad& T, const MapField& f) {
  NodeVecs zeta, eta;
  xi_derivatives(T, f, zeta, eta);
  const CylinderGrid& g = f.grid;
  std::vector<double> epi(g.size()), ndb(g.size()), ndl(g.size());
  for (int k = 0; k < g.size(); ++k) {
    const Vec& p = f.w[k];
    Vec jeta = T.japply(p, eta[k]);
    Vec db = (zeta[k] + jeta) * 0.5, dl = (zeta[k] - jeta) * 0.5;
    epi[k] = T.metric(p, zeta[k], zeta[k]) + T.metric(p, eta[k], eta[k]);
    ndb[k] = 2.0 * T.metric(p, db, db);
    ndl[k] = 2.0 * T.metric(p, dl, dl);
  }
  EnergyReport rep;
  rep.e_total = 0.5 * integrate(g, epi);
  rep.e_dbar = integrate(g, ndb);
  rep.e_del = integrate(g, ndl);
  std::vector<double> a_tau, a_t;
  pullback_lambda(T, f, a_tau, a_t);
  rep.T = 0.5 * integrate(g, epi) + slice_integral(g, a_t, 0);
  rep.Q = -slice_integral(g, a_tau, 0);
  return rep;
}

IdentityResiduals check_energy_identities(const Triad& T, const MapField& f) {
  const CylinderGrid& g = f.grid;
  NodeVecs wt = deriv_tau(f), ws = deriv_t(f);
  std::vector<double> a_tau(g.size()), a_t(g.size());
  IdentityResiduals r;
  std::vector<double> dbn(g.size());
  for (int k = 0; k < g.size(); ++k) {
    const Vec& p = f.w[k];
    a_tau[k] = T.lambda(p, wt[k]);
    a_t[k] = T.lambda(p, ws[k]);
    Vec zeta = T.project_xi(p, wt[k]);
    Vec eta = T.project_xi(p, ws[k]);
    Vec jeta = T.japply(p, eta);
    Vec db = (zeta + jeta) * 0.5, dl = (zeta - jeta) * 0.5;
    double ndb = 2.0 * T.metric(p, db, db), ndl = 2.0 * T.metric(p, dl, dl);
    double epi = T.metric(p, zeta, zeta) + T.metric(p, eta, eta);
    double wdl = T.dlambda(p, wt[k], ws[k]);
    r.energy_split = std::max(r.energy_split, std::abs(epi - ndb - ndl));
    r.dlambda_split = std::max(r.dlambda_split, std::abs(2.0 * wdl - (ndl - ndb)));
    // (w^*lambda o j) has components (a_t, -a_tau) on (dtau, dt)
    double lj_tau = a_t[k], lj_t = -a_tau[k];
    double wedge = a_tau[k] * lj_t - a_t[k] * lj_tau;
    double norm2 = a_tau[k] * a_tau[k] + a_t[k] * a_t[k];
    r.lambda_wedge = std::max(r.lambda_wedge, std::abs(wedge + norm2));
    r.onshell = std::max(r.onshell, std::abs(wdl - 0.5 * epi));
    dbn[k] = std::sqrt(ndb);
    r.res_dbar = std::max(r.res_dbar, dbn[k]);
  }
  // d(w^*lambda o j) = -(d_tau a_tau + d_t a_t) dtau ^ dt
  std::vector<double> datau = deriv_tau(g, a_tau), dat = deriv_t(g, a_t);
  for (int k = 0; k < g.size(); ++k)
    r.res_closed = std::max(r.res_closed, std::abs(datau[k] + dat[k]));
  return r;
}

void charge_action_slices(const Triad& T, const MapField& f,
                          std::vector<double>& Ts, std::vector<double>& Qs) {
  const CylinderGrid& g = f.grid;
  NodeVecs zeta, eta;
  xi_derivatives(T, f, zeta, eta);
  std::vector<double> a_tau, a_t;
  pullback_lambda(T, f, a_tau, a_t);
  std::vector<double> epi(g.size());
  for (int k = 0; k < g.size(); ++k)
    epi[k] = T.metric(f.w[k], zeta[k], zeta[k]) + T.metric(f.w[k], eta[k], eta[k]);
  Ts.assign(g.ntau, 0.0);
  Qs.assign(g.ntau, 0.0);
  // tail energies by backward trapezoid accumulation
  std::vector<double> rowsum(g.ntau);
  for (int i = 0; i < g.ntau; ++i) {
    double s = 0.0;
    for (int j = 0; j < g.nt; ++j) s += epi[g.idx(i, j)];
    rowsum[i] = s * g.ht();
  }
  std::vector<double> tail(g.ntau, 0.0);
  for (int i = g.ntau - 2; i >= 0; --i)
    tail[i] = tail[i + 1] + 0.5 * (rowsum[i] + rowsum[i + 1]) * g.htau();
  for (int i = 0; i < g.ntau; ++i) {
    Ts[i] = 0.5 * tail[i] + slice_integral(g, a_t, i);
    Qs[i] = -slice_integral(g, a_tau, i);
  }
}

void save_field(const MapField& f, const std::string& path) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot write " + path);
  char buf[512];
  std::snprintf(buf, sizeof buf, "mapfield %s %.17g %d %d\n",
                f.triad_id.c_str(), f.grid.L, f.grid.ntau, f.grid.nt);
  os << buf;
  for (int i = 0; i < f.grid.ntau; ++i)
    for (int j = 0; j < f.grid.nt; ++j) {
      const Vec& p = f.at(i, j);
      int m = std::snprintf(buf, sizeof buf, "%d %d", i, j);
      for (int d = 0; d < p.n; ++d)
        m += std::snprintf(buf + m, sizeof buf - m, " %.17g", p[d]);
      buf[m++] = '\n';
      os.write(buf, m);
    }
}

MapField load_field(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("cannot read " + path);
  std::string tag;
  MapField f;
  is >> tag >> f.triad_id >> f.grid.L >> f.grid.ntau >> f.grid.nt;
  if (tag != "mapfield" || !is)
    throw std::runtime_error("bad mapfield header in " + path);
  int dim = Triad::from_id(f.triad_id).dim();
  f.w.assign(f.grid.size(), Vec(dim));
  for (int n = 0; n < f.grid.size(); ++n) {
    int i, j;
    is >> i >> j;
    Vec p(dim);
    for (int d = 0; d < dim; ++d) is >> p[d];
    if (!is) throw std::runtime_error("truncated mapfield " + path);
    f.at(i, j) = p;
  }
  return f;
}

}  // namespace ciw
