#include "ciw/reeb.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace ciw {
namespace {
constexpr double kPi = 3.14159265358979323846;
}

Vec flow_rk4(const Triad& T, const Vec& p, double s, int nsteps) {
  Vec q = p;
  double h = s / nsteps;
  for (int k = 0; k < nsteps; ++k) {
    Vec k1 = T.reeb(q);
    Vec k2 = T.reeb(T.project_point(q + k1 * (0.5 * h)));
    Vec k3 = T.reeb(T.project_point(q + k2 * (0.5 * h)));
    Vec k4 = T.reeb(T.project_point(q + k3 * h));
    q = T.project_point(q + (k1 + (k2 + k3) * 2.0 + k4) * (h / 6.0));
  }
  return q;
}

OrbitResult find_closed_orbit(const Triad& T, const Vec& guess,
                              double period_guess, int max_iter, double tol) {
  int n = T.dim();
  OrbitResult res;
  Vec p = T.project_point(guess);
  double per = period_guess;
  Vec xref = T.reeb(p);
  Vec pref = p;
  const double fd = 1e-6;
  for (int iter = 0; iter < max_iter; ++iter) {
    Vec q = T.flow(p, per);
    Eigen::VectorXd R(n + 2);
    for (int i = 0; i < n; ++i) R(i) = q[i] - p[i];
    R(n) = T.constraint(p);
    R(n + 1) = dot(p - pref, xref);
    double rn = 0.0;
    for (int i = 0; i < n; ++i) rn += R(i) * R(i);
    res.residual = std::sqrt(rn);
    res.iters = iter;
    if (res.residual < tol && std::abs(R(n)) < tol) {
      res.found = per > 1e-6;
      break;
    }
    Eigen::MatrixXd J(n + 2, n + 1);
    for (int c = 0; c < n; ++c) {
      Vec e(n);
      e[c] = fd;
      Vec qp = T.flow(p + e, per), qm = T.flow(p - e, per);
      for (int r = 0; r < n; ++r) J(r, c) = (qp[r] - qm[r]) / (2.0 * fd) - (r == c);
    }
    Vec xq = T.reeb(q);
    for (int r = 0; r < n; ++r) J(r, n) = xq[r];
    // constraint and phase rows
    {
      Vec gp(n), gm(n);
      for (int c = 0; c < n; ++c) {
        Vec e(n);
        e[c] = fd;
        J(n, c) = (T.constraint(p + e) - T.constraint(p - e)) / (2.0 * fd);
        J(n + 1, c) = xref[c];
      }
      J(n, n) = 0.0;
      J(n + 1, n) = 0.0;
    }
    Eigen::VectorXd dx = J.colPivHouseholderQr().solve(-R);
    if (!dx.allFinite()) break;
    Vec dp(n);
    for (int i = 0; i < n; ++i) dp[i] = dx(i);
    p = T.project_point(p + dp);
    per += dx(n);
    if (per <= 0.0 || !std::isfinite(per)) break;
  }
  res.p0 = p;
  res.period = per;
  if (res.residual >= tol) res.found = false;
  return res;
}

ReturnMap return_map(const Triad& T, const OrbitResult& orb, double unit_tol) {
  ReturnMap rm;
  rm.frame = T.xi_frame(orb.p0);
  Vec e[2] = {rm.frame.e1, rm.frame.e2};
  for (int b = 0; b < 2; ++b) {
    Vec v = T.flow_pushforward(orb.p0, orb.period, e[b]);
    v = T.project_xi(orb.p0, v);
    double c1, c2;
    T.frame_coords(rm.frame, v, c1, c2);
    rm.m[0][b] = c1;
    rm.m[1][b] = c2;
  }
  rm.det = rm.m[0][0] * rm.m[1][1] - rm.m[0][1] * rm.m[1][0];
  double tr = rm.m[0][0] + rm.m[1][1];
  double disc = tr * tr - 4.0 * rm.det;
  if (disc < 0.0) {
    // complex pair: both eigenvalues share |mu - 1|
    double re = 0.5 * tr, im = 0.5 * std::sqrt(-disc);
    double d = std::hypot(re - 1.0, im);
    rm.floquet_margin = d;
    rm.unit_eigenvalues = d < unit_tol ? 2 : 0;
  } else {
    double rt = std::sqrt(disc);
    double m1 = std::abs(0.5 * (tr + rt) - 1.0), m2 = std::abs(0.5 * (tr - rt) - 1.0);
    rm.floquet_margin = std::min(m1, m2);
    rm.unit_eigenvalues = (m1 < unit_tol) + (m2 < unit_tol);
  }
  return rm;
}

AzSpectrum assemble_az_spectrum(const Triad& T, const OrbitResult& orb,
                                int nsamples, int substeps) {
  // odd sample count: the periodic spectral differentiation matrix is then
  // exact on all representable modes and free of the Nyquist checkerboard
  // that mirrors the spectrum of a central-difference stencil
  int N = nsamples | 1;
  int fine = N * substeps;
  std::vector<Vec> curve(fine + 1);
  for (int k = 0; k <= fine; ++k)
    curve[k] = T.flow(orb.p0, orb.period * k / fine);
  XiFrame f0 = T.xi_frame(orb.p0);
  std::vector<XiFrame> frames = T.transport_frames(curve, f0);

  // holonomy of the transported frame over the loop
  double h11, h21;
  T.frame_coords(f0, frames[fine].e1, h11, h21);
  AzSpectrum out;
  out.holonomy_angle = std::atan2(h21, h11);

  // per-sample Lie-derivative matrices in the transported frame; J is
  // parallel, so it stays the standard rotation matrix in these frames
  std::vector<Eigen::Matrix2d> Lm(N);
  Eigen::Matrix2d J0;
  J0 << 0.0, -1.0, 1.0, 0.0;
  double jdefect = 0.0;
  for (int k = 0; k < N; ++k) {
    const XiFrame& f = frames[k * substeps];
    Vec eb[2] = {f.e1, f.e2};
    Eigen::Matrix2d Jm;
    for (int b = 0; b < 2; ++b) {
      double c1, c2;
      T.frame_coords(f, T.japply(f.p, eb[b]), c1, c2);
      Jm(0, b) = c1;
      Jm(1, b) = c2;
      T.frame_coords(f, T.lieJ_apply(f.p, eb[b]), c1, c2);
      Lm[k](0, b) = c1;
      Lm[k](1, b) = c2;
    }
    jdefect = std::max(jdefect, (Jm - J0).cwiseAbs().maxCoeff());
  }
  if (jdefect > 1e-3)
    throw std::runtime_error("transported frames lost compatibility with J");

  // untwist: c_k = R(-theta s_k) d_k turns the holonomy-twisted sections into
  // strictly periodic ones, at the price of a -theta J J = +theta... constant
  // zeroth-order term; in d-coordinates
  //   A = J0 D_spec - theta_twist I - (T/2) R^T L R,  theta_twist = -theta
  double th = out.holonomy_angle;
  Eigen::MatrixXd A = Eigen::MatrixXd::Zero(2 * N, 2 * N);
  for (int k = 0; k < N; ++k) {
    // exact periodic spectral differentiation row (odd N)
    for (int j = 0; j < N; ++j) {
      if (j == k) continue;
      int d = k - j;
      double sgn = (d % 2 == 0) ? 1.0 : -1.0;
      double w = 2.0 * kPi * sgn / (2.0 * std::sin(kPi * d / N));
      A.block<2, 2>(2 * k, 2 * j) += J0 * w;
    }
    double s = static_cast<double>(k) / N;
    double cg = std::cos(th * s), sg = std::sin(th * s);
    Eigen::Matrix2d G;
    G << cg, sg, -sg, cg;  // rotation by -theta s: c = G d matches the twist
    Eigen::Matrix2d Lt = G.transpose() * Lm[k] * G;
    A.block<2, 2>(2 * k, 2 * k) +=
        th * Eigen::Matrix2d::Identity() - (orb.period / 2.0) * Lt;
  }
  out.sym_defect = (A - A.transpose()).cwiseAbs().maxCoeff();
  double scale = A.cwiseAbs().maxCoeff();
  if (out.sym_defect > 1e-2 * scale)
    throw std::runtime_error("asymptotic operator assembly is not near-symmetric");
  Eigen::MatrixXd S = 0.5 * (A + A.transpose());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(S);
  out.eigs.assign(es.eigenvalues().data(), es.eigenvalues().data() + 2 * N);
  out.dim = 2 * N;
  out.matrix.resize(4 * N * N);
  for (int r = 0; r < 2 * N; ++r)
    for (int c = 0; c < 2 * N; ++c) out.matrix[r * 2 * N + c] = S(r, c);
  return out;
}

double AzSpectrum::gap() const {
  double g = std::numeric_limits<double>::infinity();
  for (double e : eigs) g = std::min(g, std::abs(e));
  return g;
}

std::vector<double> sasakian_az_spectrum(double holonomy_angle, int nev) {
  // J d/ds with twisted periodicity: eigenvalue family theta + 2 pi k, each
  // of multiplicity two
  std::vector<double> v;
  int K = nev + 2;
  for (int k = -K; k <= K; ++k) {
    double e = holonomy_angle + 2.0 * kPi * k;
    v.push_back(e);
    v.push_back(e);
  }
  std::sort(v.begin(), v.end(),
            [](double a, double b) { return std::abs(a) < std::abs(b); });
  v.resize(nev);
  std::sort(v.begin(), v.end());
  return v;
}

KernelReport kernel_correspondence(const Triad& T, const OrbitResult& orb,
                                   int nsamples) {
  KernelReport rep;
  AzSpectrum sp = assemble_az_spectrum(T, orb, nsamples);
  double h = 1.0 / nsamples;
  double scale = 0.0;
  for (double e : sp.eigs) scale = std::max(scale, std::abs(e));
  rep.threshold = 10.0 * h * h * scale;
  for (double e : sp.eigs)
    if (std::abs(e) < rep.threshold) ++rep.near_kernel;
  ReturnMap rm = return_map(T, orb, /*unit_tol=*/1e-6);
  rep.unit_floquet = rm.unit_eigenvalues;
  rep.consistent = rep.near_kernel == rep.unit_floquet;
  return rep;
}

}  // namespace ciw
