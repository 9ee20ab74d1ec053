#include "ciw/instanton.hpp"

#include <Eigen/IterativeLinearSolvers>
#include <Eigen/Sparse>
#include <Eigen/SparseCholesky>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <stdexcept>

#include "ciw/dual.hpp"

namespace ciw {
namespace {

constexpr double kPi = 3.14159265358979323846;

// -------- templated discrete residuals (scalar T = double or Dual) ---------

template <class T, class G>
AVec<T> stencil_tau(const CylinderGrid& g, const G& pos, int i, int j) {
  double c = 1.0 / (2.0 * g.htau());
  if (i == 0)
    return (pos(0, j) * T(-3.0) + pos(1, j) * T(4.0) - pos(2, j)) * T(c);
  if (i == g.ntau - 1)
    return (pos(i, j) * T(3.0) - pos(i - 1, j) * T(4.0) + pos(i - 2, j)) * T(c);
  return (pos(i + 1, j) - pos(i - 1, j)) * T(c);
}

template <class T, class G>
AVec<T> stencil_t(const CylinderGrid& g, const G& pos, int i, int j) {
  double c = 1.0 / (2.0 * g.ht());
  int jp = (j + 1) % g.nt, jm = (j + g.nt - 1) % g.nt;
  return (pos(i, jp) - pos(i, jm)) * T(c);
}

template <class M, class T, class G>
void dbar_residual(const M& m, const CylinderGrid& g, const G& pos, int i,
                   int j, double qw, T out[2]) {
  AVec<T> p = pos(i, j);
  AVec<T> wt = stencil_tau<T>(g, pos, i, j);
  AVec<T> ws = stencil_t<T>(g, pos, i, j);
  AVec<T> zeta = m.xi_project(p, wt);
  AVec<T> eta = m.xi_project(p, ws);
  AVec<T> db = (zeta + m.japply(p, eta)) * T(0.5);
  T y1, y2, dfac;
  m.xi_coords(p, db, y1, y2, dfac);
  using std::sqrt;
  T wgt = sqrt(T(2.0 * qw) * dfac);
  out[0] = wgt * y1;
  out[1] = wgt * y2;
}

template <class M, class T, class G>
T lam_tau(const M& m, const CylinderGrid& g, const G& pos, int i, int j) {
  return m.lambda(pos(i, j), stencil_tau<T>(g, pos, i, j));
}
template <class M, class T, class G>
T lam_t(const M& m, const CylinderGrid& g, const G& pos, int i, int j) {
  return m.lambda(pos(i, j), stencil_t<T>(g, pos, i, j));
}

template <class M, class T, class G>
T curl_residual(const M& m, const CylinderGrid& g, const G& pos, int i, int j,
                double qw) {
  double ctau = 1.0 / (2.0 * g.htau()), ct = 1.0 / (2.0 * g.ht());
  T datau;
  if (i == 0)
    datau = (T(-3.0) * lam_tau<M, T>(m, g, pos, 0, j) +
             T(4.0) * lam_tau<M, T>(m, g, pos, 1, j) -
             lam_tau<M, T>(m, g, pos, 2, j)) *
            T(ctau);
  else if (i == g.ntau - 1)
    datau = (T(3.0) * lam_tau<M, T>(m, g, pos, i, j) -
             T(4.0) * lam_tau<M, T>(m, g, pos, i - 1, j) +
             lam_tau<M, T>(m, g, pos, i - 2, j)) *
            T(ctau);
  else
    datau = (lam_tau<M, T>(m, g, pos, i + 1, j) -
             lam_tau<M, T>(m, g, pos, i - 1, j)) *
            T(ctau);
  int jp = (j + 1) % g.nt, jm = (j + g.nt - 1) % g.nt;
  T dat = (lam_t<M, T>(m, g, pos, i, jp) - lam_t<M, T>(m, g, pos, i, jm)) * T(ct);
  using std::sqrt;
  return sqrt(T(qw)) * (datau + dat);
}

double quad_weight(const CylinderGrid& g, int i) {
  return g.weight(i) * g.htau() * g.ht();
}

template <class M>
void assemble_residual(const M& m, const MapField& f, Eigen::VectorXd& r) {
  const CylinderGrid& g = f.grid;
  r.resize(3 * g.size());
  auto pos = [&f](int i, int j) -> const Vec& { return f.at(i, j); };
  for (int i = 0; i < g.ntau; ++i)
    for (int j = 0; j < g.nt; ++j) {
      double qw = quad_weight(g, i);
      double db[2];
      dbar_residual(m, g, pos, i, j, qw, db);
      int k = g.idx(i, j);
      r(3 * k) = db[0];
      r(3 * k + 1) = db[1];
      r(3 * k + 2) = curl_residual<M, double>(m, g, pos, i, j, qw);
    }
}

void tangent_basis(const Triad& T, const Vec& p, Vec B[3]) {
  int n = T.dim();
  if (!T.constrained()) {
    for (int i = 0; i < 3; ++i) {
      B[i] = Vec(n);
      B[i][i] = 1.0;
    }
    return;
  }
  Vec cand[4];
  for (int i = 0; i < n; ++i) {
    Vec e(n);
    e[i] = 1.0;
    cand[i] = T.tangent_project(p, e);
  }
  int filled = 0;
  for (int k = 0; k < 3; ++k) {
    int best = -1;
    double bestn = -1.0;
    for (int i = 0; i < n; ++i) {
      Vec w = cand[i];
      for (int m2 = 0; m2 < filled; ++m2) w -= B[m2] * dot(w, B[m2]);
      double nn = norm(w);
      if (nn > bestn) {
        bestn = nn;
        best = i;
      }
    }
    Vec w = cand[best];
    for (int m2 = 0; m2 < filled; ++m2) w -= B[m2] * dot(w, B[m2]);
    B[k] = w * (1.0 / norm(w));
    ++filled;
  }
}

template <class M>
void assemble_jacobian(const M& m, const Triad& T, const MapField& f,
                       const std::vector<std::array<Vec, 3>>& bases,
                       Eigen::SparseMatrix<double>& J) {
  const CylinderGrid& g = f.grid;
  int nint = (g.ntau - 2) * g.nt;
  std::vector<Eigen::Triplet<double>> trip;
  trip.reserve(static_cast<size_t>(nint) * 90);
  for (int i = 1; i < g.ntau - 1; ++i)
    for (int j = 0; j < g.nt; ++j) {
      int col0 = 3 * ((i - 1) * g.nt + j);
      // residual nodes whose stencils touch (i, j); radius 3 in tau because
      // the one-sided boundary stencils compose to a deeper reach
      std::set<std::pair<int, int>> cands;
      for (int di = -3; di <= 3; ++di) {
        int ci = i + di;
        if (ci >= 0 && ci < g.ntau) cands.insert({ci, j});
      }
      for (int dj = -2; dj <= 2; ++dj)
        cands.insert({i, (j + dj + 2 * g.nt) % g.nt});
      for (int d = 0; d < 3; ++d) {
        const Vec& bv = bases[g.idx(i, j)][d];
        auto pos = [&](int ii, int jj) -> AVec<Dual> {
          const Vec& p = f.at(ii, jj);
          AVec<Dual> out(p.n);
          bool seeded = (ii == i && jj == j);
          for (int c = 0; c < p.n; ++c)
            out[c] = Dual(p[c], seeded ? bv[c] : 0.0);
          return out;
        };
        for (auto [ci, cj] : cands) {
          double qw = quad_weight(g, ci);
          Dual db[2];
          dbar_residual(m, g, pos, ci, cj, qw, db);
          Dual cr = curl_residual<M, Dual>(m, g, pos, ci, cj, qw);
          int row = 3 * g.idx(ci, cj);
          if (db[0].d != 0.0) trip.emplace_back(row, col0 + d, db[0].d);
          if (db[1].d != 0.0) trip.emplace_back(row + 1, col0 + d, db[1].d);
          if (cr.d != 0.0) trip.emplace_back(row + 2, col0 + d, cr.d);
        }
      }
    }
  J.resize(3 * g.size(), 3 * nint);
  J.setFromTriplets(trip.begin(), trip.end());
}

}  // namespace

InstantonProblem::InstantonProblem(const Triad& T, MapField init)
    : triad_(T), init_(std::move(init)) {
  if (init_.triad_id.empty()) init_.triad_id = T.id();
}

double InstantonProblem::functional(const MapField& f) const {
  Eigen::VectorXd r;
  std::visit([&](const auto& m) { assemble_residual(m, f, r); }, triad_.core());
  return r.squaredNorm();
}

NodeVecs InstantonProblem::gradient(const MapField& f) const {
  const CylinderGrid& g = f.grid;
  std::vector<std::array<Vec, 3>> bases(g.size());
  for (int i = 1; i < g.ntau - 1; ++i)
    for (int j = 0; j < g.nt; ++j) {
      Vec B[3];
      tangent_basis(triad_, f.at(i, j), B);
      bases[g.idx(i, j)] = {B[0], B[1], B[2]};
    }
  Eigen::VectorXd r;
  Eigen::SparseMatrix<double> J;
  std::visit(
      [&](const auto& m) {
        assemble_residual(m, f, r);
        assemble_jacobian(m, triad_, f, bases, J);
      },
      triad_.core());
  Eigen::VectorXd gc = 2.0 * (J.transpose() * r);
  NodeVecs out(g.size(), Vec(triad_.dim()));
  for (int i = 1; i < g.ntau - 1; ++i)
    for (int j = 0; j < g.nt; ++j) {
      int c0 = 3 * ((i - 1) * g.nt + j);
      Vec v(triad_.dim());
      for (int d = 0; d < 3; ++d) v += bases[g.idx(i, j)][d] * gc(c0 + d);
      out[g.idx(i, j)] = v;
    }
  return out;
}

SolveResult InstantonProblem::solve(const SolveOptions& opt) const {
  const CylinderGrid& g = init_.grid;
  int nint = (g.ntau - 2) * g.nt;
  SolveResult res;
  MapField cur = init_;

  auto retract = [&](const MapField& f, const Eigen::VectorXd& dx,
                     const std::vector<std::array<Vec, 3>>& bases, double alpha) {
    MapField out = f;
    for (int i = 1; i < g.ntau - 1; ++i)
      for (int j = 0; j < g.nt; ++j) {
        int c0 = 3 * ((i - 1) * g.nt + j);
        Vec p = f.at(i, j);
        for (int d = 0; d < 3; ++d)
          p += bases[g.idx(i, j)][d] * (alpha * dx(c0 + d));
        out.at(i, j) = triad_.project_point(p);
      }
    return out;
  };

  double F = functional(cur);
  for (int iter = 0; iter < opt.max_iter; ++iter) {
    std::vector<std::array<Vec, 3>> bases(g.size());
    for (int i = 1; i < g.ntau - 1; ++i)
      for (int j = 0; j < g.nt; ++j) {
        Vec B[3];
        tangent_basis(triad_, cur.at(i, j), B);
        bases[g.idx(i, j)] = {B[0], B[1], B[2]};
      }
    Eigen::VectorXd r;
    Eigen::SparseMatrix<double> J;
    std::visit(
        [&](const auto& m) {
          assemble_residual(m, cur, r);
          assemble_jacobian(m, triad_, cur, bases, J);
        },
        triad_.core());
    F = r.squaredNorm();
    Eigen::VectorXd grad = 2.0 * (J.transpose() * r);
    double gnorm = grad.norm();
    {
      IdentityResiduals ir = check_energy_identities(triad_, cur);
      res.history.push_back({iter, F, gnorm, ir.res_dbar, ir.res_closed, 0.0});
    }
    if (gnorm < opt.tol_grad || F < opt.tol_f) {
      res.converged = true;
      res.message = "converged";
      break;
    }
    Eigen::VectorXd dx(3 * nint);
    bool have_gn = false;
    if (opt.method == SolveOptions::kGaussNewton) {
      Eigen::LeastSquaresConjugateGradient<Eigen::SparseMatrix<double>> lscg;
      lscg.setMaxIterations(opt.cg_max_iter);
      lscg.setTolerance(opt.cg_tol);
      lscg.compute(J);
      dx = lscg.solve(-r);
      have_gn = (lscg.info() == Eigen::Success ||
                 lscg.info() == Eigen::NoConvergence);
      if (!std::isfinite(dx.norm())) have_gn = false;
    }
    double slope = have_gn ? grad.dot(dx) : 0.0;
    if (!have_gn || slope >= 0.0) {
      dx = -grad;
      slope = -grad.squaredNorm();
    }
    double alpha = 1.0;
    bool accepted = false;
    for (int bt = 0; bt < opt.max_backtracks; ++bt) {
      MapField trial = retract(cur, dx, bases, alpha);
      double Ft = functional(trial);
      if (Ft <= F + opt.armijo_c * alpha * slope) {
        cur = trial;
        res.history.back().step = alpha;
        accepted = true;
        break;
      }
      alpha *= opt.armijo_shrink;
    }
    if (!accepted) {
      res.message = "line search stalled";
      break;
    }
  }
  res.field = cur;
  res.F = functional(cur);
  {
    NodeVecs gr = gradient(cur);
    double gn = 0.0;
    for (const Vec& v : gr) gn += dot(v, v);
    res.gnorm = std::sqrt(gn);
  }
  if (!res.converged && res.message.empty()) res.message = "max iterations";
  if (res.gnorm < opt.tol_grad || res.F < opt.tol_f) res.converged = true;
  if (res.history.empty()) {
    IdentityResiduals ir = check_energy_identities(triad_, cur);
    res.history.push_back(
        {0, res.F, res.gnorm, ir.res_dbar, ir.res_closed, 0.0});
  }
  return res;
}

MapField oracle_flat(const CylinderGrid& g, double eps, double kappa) {
  Triad T = Triad::from_id("r3-standard");
  MapField f;
  f.grid = g;
  f.triad_id = T.id();
  f.w.resize(g.size());
  for (int i = 0; i < g.ntau; ++i)
    for (int j = 0; j < g.nt; ++j) {
      // holomorphic in tau + i t with t-period 1: eps e^{-2 pi (tau + i t)}
      double tau = g.tau(i), t = 2.0 * kPi * g.t(j);
      double x = eps * std::exp(-2.0 * kPi * tau) * std::cos(t);
      double y = -eps * std::exp(-2.0 * kPi * tau) * std::sin(t);
      f.at(i, j) = Vec{x, y, kappa * tau};
    }
  // correct z by a 5-point Poisson solve so the discrete closedness residual
  // drops to composition-mismatch order
  std::vector<double> a_tau, a_t;
  pullback_lambda(T, f, a_tau, a_t);
  std::vector<double> da = deriv_tau(g, a_tau), db = deriv_t(g, a_t);
  int nint = (g.ntau - 2) * g.nt;
  if (nint > 0) {
    auto iidx = [&](int i, int j) { return (i - 1) * g.nt + j; };
    std::vector<Eigen::Triplet<double>> trip;
    Eigen::VectorXd rhs(nint);
    double wt2 = 1.0 / (g.htau() * g.htau()), wt3 = 1.0 / (g.ht() * g.ht());
    for (int i = 1; i < g.ntau - 1; ++i)
      for (int j = 0; j < g.nt; ++j) {
        int row = iidx(i, j);
        // res_closed = lap(z) - [d_tau(y x_tau) + d_t(y x_t)]; the current
        // field already carries z = kappa tau, so rhs is minus its residual
        rhs(row) = -(da[g.idx(i, j)] + db[g.idx(i, j)]);
        trip.emplace_back(row, row, -2.0 * wt2 - 2.0 * wt3);
        if (i - 1 >= 1) trip.emplace_back(row, iidx(i - 1, j), wt2);
        if (i + 1 <= g.ntau - 2) trip.emplace_back(row, iidx(i + 1, j), wt2);
        trip.emplace_back(row, iidx(i, (j + 1) % g.nt), wt3);
        trip.emplace_back(row, iidx(i, (j + g.nt - 1) % g.nt), wt3);
      }
    Eigen::SparseMatrix<double> L(nint, nint);
    L.setFromTriplets(trip.begin(), trip.end());
    Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> solver(L);
    Eigen::VectorXd zp = solver.solve(rhs);
    if (solver.info() != Eigen::Success)
      throw std::runtime_error("oracle poisson solve failed");
    for (int i = 1; i < g.ntau - 1; ++i)
      for (int j = 0; j < g.nt; ++j) f.at(i, j)[2] += zp(iidx(i, j));
  }
  return f;
}

void write_history_csv(const std::vector<IterRecord>& hist,
                       const std::string& path) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot write " + path);
  os << "iter,F,grad_norm,res_dbar,res_closed,step\n";
  char buf[256];
  for (const IterRecord& h : hist) {
    std::snprintf(buf, sizeof buf, "%d,%.17g,%.17g,%.17g,%.17g,%.17g\n", h.iter,
                  h.F, h.gnorm, h.res_dbar, h.res_closed, h.step);
    os << buf;
  }
}

}  // namespace ciw
