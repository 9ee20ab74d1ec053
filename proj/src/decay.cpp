#include "ciw/decay.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <stdexcept>

namespace ciw {
namespace {

// least-squares line through (k, log y_k); returns slope and r^2
void log_linear_fit(const std::vector<double>& y, int begin, int end,
                    double& slope, double& r2) {
  int n = end - begin;
  double sx = 0, sy = 0, sxx = 0, sxy = 0, syy = 0;
  for (int k = begin; k < end; ++k) {
    double xv = k, yv = std::log(y[k]);
    sx += xv;
    sy += yv;
    sxx += xv * xv;
    sxy += xv * yv;
    syy += yv * yv;
  }
  double den = n * sxx - sx * sx;
  slope = (n * sxy - sx * sy) / den;
  double ssres = 0.0, mean = sy / n, sstot = 0.0;
  double icept = (sy - slope * sx) / n;
  for (int k = begin; k < end; ++k) {
    double yv = std::log(y[k]);
    double e = yv - (slope * k + icept);
    ssres += e * e;
    sstot += (yv - mean) * (yv - mean);
  }
  r2 = sstot > 0 ? 1.0 - ssres / sstot : 1.0;
}

// tail window [begin, end) for fitting: entries above the noise floor, last
// half of them, trimmed to the final monotone-decreasing run
void select_tail(const std::vector<double>& y, int& begin, int& end) {
  double top = 0.0;
  for (double v : y) top = std::max(top, v);
  double floor_ = 100.0 * std::numeric_limits<double>::epsilon() * top;
  end = 0;
  for (int k = 0; k < static_cast<int>(y.size()); ++k)
    if (y[k] > floor_) end = k + 1;
  begin = end / 2;
  for (int k = begin; k < end; ++k)
    if (!(y[k] > 0.0)) begin = k + 1;  // keep the fit window strictly positive
}

}  // namespace

double three_interval_xi(double gamma) {
  if (!(gamma > 0.0 && gamma < 0.5))
    throw std::invalid_argument("gamma must lie in (0, 1/2)");
  return (1.0 + std::sqrt(1.0 - 4.0 * gamma * gamma)) / (2.0 * gamma);
}

double gamma_of_rate(double c) { return 1.0 / (std::exp(c) + std::exp(-c)); }

ThreeIntervalResult three_interval_bound(const std::vector<double>& xs,
                                         double gamma) {
  ThreeIntervalResult res;
  res.xi = three_interval_xi(gamma);
  int N = static_cast<int>(xs.size()) - 1;
  for (int k = 1; k < N; ++k)
    if (xs[k] > gamma * (xs[k - 1] + xs[k + 1]) * (1.0 + 1e-12))
      res.violations.push_back(k);
  res.hypothesis_ok = res.violations.empty();
  if (!res.hypothesis_ok) return res;
  res.bound.resize(xs.size());
  res.bound_ok = true;
  for (int k = 0; k <= N; ++k) {
    res.bound[k] = xs[0] * std::pow(res.xi, -k) + xs[N] * std::pow(res.xi, -(N - k));
    double over = xs[k] - res.bound[k];
    if (over > res.max_overshoot) res.max_overshoot = over;
  }
  if (res.max_overshoot > 1e-12 * std::max(1.0, xs[0] + xs[N]))
    res.bound_ok = false;
  return res;
}

DecayReport analyze_decay(const Triad& T, const MapField& f, double gamma,
                          const OrbitResult* orbit) {
  const CylinderGrid& g = f.grid;
  int nwin = static_cast<int>(std::floor(g.L + 1e-9)) - 1;  // windows [k+1,k+2]
  if (nwin < 4)
    throw std::invalid_argument("cylinder too short: fewer than 4 unit windows");
  NodeVecs zeta, eta;
  xi_derivatives(T, f, zeta, eta);
  DecayReport rep;
  rep.gamma_used = gamma;
  rep.xk.assign(nwin, 0.0);
  for (int i = 0; i < g.ntau; ++i) {
    double tau = g.tau(i);
    for (int k = 0; k < nwin; ++k) {
      double lo = k + 1.0, hi = k + 2.0;
      if (tau < lo - 1e-9 || tau > hi + 1e-9) continue;
      bool edge = std::abs(tau - lo) < 1e-9 || std::abs(tau - hi) < 1e-9;
      double wt = (edge ? 0.5 : 1.0) * g.htau() * g.ht();
      for (int j = 0; j < g.nt; ++j) {
        int id = g.idx(i, j);
        rep.xk[k] += wt * T.metric(f.w[id], zeta[id], zeta[id]);
      }
    }
  }
  rep.three_interval_violations = three_interval_bound(rep.xk, gamma).violations;

  select_tail(rep.xk, rep.fit_begin, rep.fit_end);
  if (rep.fit_end - rep.fit_begin >= 3) {
    log_linear_fit(rep.xk, rep.fit_begin, rep.fit_end, rep.slope, rep.r2);
    rep.delta_fit = -rep.slope / 2.0;
  } else {
    rep.delta_fit = std::numeric_limits<double>::quiet_NaN();
  }

  // slice averages of the action/charge integrands over the last window
  std::vector<double> a_tau, a_t;
  pullback_lambda(T, f, a_tau, a_t);
  double qs = 0.0, ts = 0.0;
  int ns = 0;
  for (int i = 0; i < g.ntau; ++i) {
    double tau = g.tau(i);
    if (tau < nwin || tau > nwin + 1.0 + 1e-9) continue;
    qs += -slice_integral(g, a_tau, i);
    ts += slice_integral(g, a_t, i);
    ++ns;
  }
  rep.Q_limit = qs / ns;
  rep.T_limit = ts / ns;

  if (orbit) {
    std::vector<double> d = limit_orbit_distance(T, f, *orbit);
    rep.orbit_distance = d.back();
  }
  return rep;
}

double linear_evolution_rate(const std::vector<double>& A, int n,
                             const std::vector<double>& eta0, double horizon) {
  Eigen::MatrixXd M(n, n);
  for (int r = 0; r < n; ++r)
    for (int c = 0; c < n; ++c) M(r, c) = A[r * n + c];
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(M);
  double gap = std::numeric_limits<double>::infinity();
  for (int i = 0; i < n; ++i) gap = std::min(gap, std::abs(es.eigenvalues()(i)));
  if (!(gap > 0.0)) throw std::invalid_argument("degenerate spectrum: zero gap");
  Eigen::VectorXd v0(n);
  for (int i = 0; i < n; ++i) v0(i) = eta0[i];
  Eigen::VectorXd c = es.eigenvectors().transpose() * v0;
  const int m = 200;
  std::vector<double> norms(m);
  for (int jt = 0; jt < m; ++jt) {
    double tau = horizon * (jt + 1) / m;
    double s = 0.0;
    for (int i = 0; i < n; ++i) {
      double ci = c(i) * std::exp(-es.eigenvalues()(i) * tau);
      s += ci * ci;
    }
    norms[jt] = s;  // ||eta||^2
  }
  int begin, end;
  select_tail(norms, begin, end);
  double slope, r2;
  log_linear_fit(norms, begin, end, slope, r2);
  // slope is per sample; convert to per unit tau, and norms are squared
  return -slope / 2.0 * m / horizon;
}

ThetaReport theta_component(const Triad& T, const MapField& f, double Tlimit,
                            double q_threshold) {
  const CylinderGrid& g = f.grid;
  std::vector<double> a_tau, a_t;
  pullback_lambda(T, f, a_tau, a_t);
  ThetaReport rep;
  rep.Q_limit = -slice_integral(g, a_tau, g.ntau - 1);
  if (std::abs(rep.Q_limit) > q_threshold)
    throw std::invalid_argument("charge does not vanish: theta is not defined");

  NodeVecs zeta, eta;
  xi_derivatives(T, f, zeta, eta);
  // theta = re + i im, re = a_t - T, im = a_tau
  std::vector<double> re(g.size()), im(g.size());
  for (int k = 0; k < g.size(); ++k) {
    re[k] = a_t[k] - Tlimit;
    im[k] = a_tau[k];
  }
  std::vector<double> re_tau = deriv_tau(g, re), re_t = deriv_t(g, re);
  std::vector<double> im_tau = deriv_tau(g, im), im_t = deriv_t(g, im);
  // identity residual away from the rows where the one-sided stencils compose
  for (int i = 2; i < g.ntau - 2; ++i)
    for (int j = 0; j < g.nt; ++j) {
      int k = g.idx(i, j);
      double dre = 0.5 * (re_tau[k] - im_t[k]);
      double dim = 0.5 * (im_tau[k] + re_t[k]);
      double mu = 0.5 * T.metric(f.w[k], zeta[k], zeta[k]);
      double r = std::hypot(dre - mu, dim);
      rep.identity_residual = std::max(rep.identity_residual, r);
    }

  rep.slice_norm.resize(g.ntau);
  for (int i = 0; i < g.ntau; ++i) {
    double s = 0.0;
    for (int j = 0; j < g.nt; ++j) {
      int k = g.idx(i, j);
      s += re[k] * re[k] + im[k] * im[k];
    }
    rep.slice_norm[i] = std::sqrt(s * g.ht());
  }
  int begin, end;
  select_tail(rep.slice_norm, begin, end);
  if (end - begin >= 3) {
    double lo = rep.slice_norm[begin], hi = lo;
    for (int k = begin; k < end; ++k) {
      lo = std::min(lo, rep.slice_norm[k]);
      hi = std::max(hi, rep.slice_norm[k]);
    }
    rep.constant_tail = hi > 0 && (hi - lo) / hi < 1e-3;
    double slope, r2;
    log_linear_fit(rep.slice_norm, begin, end, slope, r2);
    rep.rate = -slope / g.htau();  // slices -> unit tau
  }
  return rep;
}

AReport reconstruct_a(const Triad& T, const MapField& f, double q_threshold) {
  const CylinderGrid& g = f.grid;
  std::vector<double> a_tau, a_t;
  pullback_lambda(T, f, a_tau, a_t);
  AReport rep;
  // (w*lambda o j) = a_t dtau - a_tau dt; loop integrals over slices are the
  // slice charges and obstruct exactness
  for (int i = 0; i < g.ntau; ++i)
    rep.charge_residual =
        std::max(rep.charge_residual, std::abs(slice_integral(g, a_tau, i)));
  if (rep.charge_residual > q_threshold)
    throw std::invalid_argument("charge does not vanish: no global primitive");

  auto integrate_path = [&](bool circle_first) {
    std::vector<double> a(g.size(), 0.0);
    if (circle_first) {
      for (int j = 1; j < g.nt; ++j)
        a[g.idx(0, j)] = a[g.idx(0, j - 1)] -
                         0.5 * (a_tau[g.idx(0, j - 1)] + a_tau[g.idx(0, j)]) * g.ht();
      for (int i = 1; i < g.ntau; ++i)
        for (int j = 0; j < g.nt; ++j)
          a[g.idx(i, j)] = a[g.idx(i - 1, j)] +
                           0.5 * (a_t[g.idx(i - 1, j)] + a_t[g.idx(i, j)]) * g.htau();
    } else {
      for (int i = 1; i < g.ntau; ++i)
        a[g.idx(i, 0)] = a[g.idx(i - 1, 0)] +
                         0.5 * (a_t[g.idx(i - 1, 0)] + a_t[g.idx(i, 0)]) * g.htau();
      for (int i = 0; i < g.ntau; ++i)
        for (int j = 1; j < g.nt; ++j)
          a[g.idx(i, j)] = a[g.idx(i, j - 1)] -
                           0.5 * (a_tau[g.idx(i, j - 1)] + a_tau[g.idx(i, j)]) * g.ht();
    }
    return a;
  };
  rep.a = integrate_path(true);
  std::vector<double> alt = integrate_path(false);
  for (int k = 0; k < g.size(); ++k)
    rep.path_residual = std::max(rep.path_residual, std::abs(rep.a[k] - alt[k]));

  rep.T_used = slice_integral(g, a_t, g.ntau - 1);
  rep.alpha.resize(g.ntau);
  for (int i = 0; i < g.ntau; ++i) {
    double s = 0.0;
    for (int j = 0; j < g.nt; ++j) s += rep.a[g.idx(i, j)];
    rep.alpha[i] = s * g.ht() - rep.T_used * g.tau(i);
  }
  // C0 = tail limit of alpha: average over the last tenth of the slices
  int tail0 = std::max(0, g.ntau - std::max(1, g.ntau / 10));
  double c0 = 0.0;
  for (int i = tail0; i < g.ntau; ++i) c0 += rep.alpha[i];
  rep.C0 = c0 / (g.ntau - tail0);

  rep.sup_dev.resize(g.ntau);
  for (int i = 0; i < g.ntau; ++i) {
    double m = 0.0;
    for (int j = 0; j < g.nt; ++j)
      m = std::max(m, std::abs(rep.a[g.idx(i, j)] - rep.T_used * g.tau(i) - rep.C0));
    rep.sup_dev[i] = m;
  }
  return rep;
}

std::vector<double> limit_orbit_distance(const Triad& T, const MapField& f,
                                         const OrbitResult& orbit,
                                         int orbit_samples) {
  const CylinderGrid& g = f.grid;
  std::vector<Vec> zs(orbit_samples);
  for (int m = 0; m < orbit_samples; ++m)
    zs[m] = T.flow(orbit.p0, orbit.period * m / orbit_samples);
  std::vector<double> out(g.ntau);
  for (int i = 0; i < g.ntau; ++i) {
    double sup = 0.0;
    for (int j = 0; j < g.nt; ++j) {
      const Vec& p = f.at(i, j);
      double best = std::numeric_limits<double>::infinity();
      for (const Vec& z : zs) best = std::min(best, norm(p - z));
      sup = std::max(sup, best);
    }
    out[i] = sup;
  }
  return out;
}

void write_decay_csv(const DecayReport& rep, const std::string& path) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot write " + path);
  ThreeIntervalResult ti = three_interval_bound(rep.xk, rep.gamma_used);
  os << "k,xk,bound_k,hypothesis_ok\n";
  char buf[256];
  for (size_t k = 0; k < rep.xk.size(); ++k) {
    double bd = ti.bound.empty() ? std::numeric_limits<double>::quiet_NaN()
                                 : ti.bound[k];
    bool viol = false;
    for (int v : rep.three_interval_violations) viol |= v == static_cast<int>(k);
    std::snprintf(buf, sizeof buf, "%zu,%.17g,%.17g,%d\n", k, rep.xk[k], bd, !viol);
    os << buf;
  }
  std::snprintf(buf, sizeof buf,
                "# delta_fit=%.17g r2=%.17g Q_limit=%.17g T_limit=%.17g "
                "orbit_distance=%.17g\n",
                rep.delta_fit, rep.r2, rep.Q_limit, rep.T_limit,
                rep.orbit_distance);
  os << buf;
}

}  // namespace ciw
