#include "ciw/triad.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <cstdlib>
#include <sstream>
#include <stdexcept>

namespace ciw {

double AxiomReport::get(const std::string& name) const {
  for (const auto& [k, v] : entries)
    if (k == name) return v;
  throw std::runtime_error("axiom entry not found: " + name);
}

// ------------------------------- parsing -----------------------------------

namespace {

std::vector<std::pair<std::string, std::string>> parse_kv(const std::string& s) {
  std::vector<std::pair<std::string, std::string>> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    auto eq = item.find('=');
    if (eq == std::string::npos)
      throw std::runtime_error("bad triad parameter: " + item);
    out.emplace_back(item.substr(0, eq), item.substr(eq + 1));
  }
  return out;
}

constexpr double kGolden = 1.6180339887498949;

}  // namespace

Triad Triad::from_id(const std::string& id) {
  Triad t;
  t.id_ = id;
  std::string head = id, params;
  if (auto c = id.find(':'); c != std::string::npos) {
    head = id.substr(0, c);
    params = id.substr(c + 1);
  }
  if (head == "r3-standard") {
    t.core_ = FlatCore{};
    return t;
  }
  if (head == "ellipsoid" || head == "ellipsoid-perturbed") {
    double a1 = kGolden, a2 = 1.0, eps = 0.15;
    std::uint64_t seed = 1;
    bool have_seed = false;
    for (auto& [k, v] : parse_kv(params)) {
      if (k == "a1") a1 = std::atof(v.c_str());
      else if (k == "a2") a2 = std::atof(v.c_str());
      else if (k == "eps") eps = std::atof(v.c_str());
      else if (k == "seed") { seed = std::strtoull(v.c_str(), nullptr, 10); have_seed = true; }
      else throw std::runtime_error("unknown triad parameter: " + k);
    }
    if (head == "ellipsoid") {
      t.core_ = EllipsoidCore::make(a1, a2);
    } else {
      if (!have_seed) throw std::runtime_error("ellipsoid-perturbed requires seed=");
      t.core_ = EllipsoidCore::make_perturbed(a1, a2, seed, eps);
    }
    return t;
  }
  throw std::runtime_error("unknown triad id: " + id);
}

// --------------------------- pointwise structure ---------------------------

int Triad::dim() const {
  return std::visit([](const auto& c) { return c.dim(); }, core_);
}
bool Triad::constrained() const {
  return std::visit([](const auto& c) { return c.constrained(); }, core_);
}
bool Triad::sasakian() const {
  return std::visit([](const auto& c) { return c.sasakian(); }, core_);
}
double Triad::lambda(const Vec& p, const Vec& v) const {
  return std::visit([&](const auto& c) { return c.lambda(p, v); }, core_);
}
double Triad::dlambda(const Vec& p, const Vec& u, const Vec& v) const {
  return std::visit([&](const auto& c) { return c.dlambda(p, u, v); }, core_);
}
Vec Triad::reeb(const Vec& p) const {
  return std::visit([&](const auto& c) { return c.reeb(p); }, core_);
}
Vec Triad::japply(const Vec& p, const Vec& v) const {
  return std::visit([&](const auto& c) { return c.japply(p, v); }, core_);
}
Vec Triad::tangent_project(const Vec& p, const Vec& v) const {
  return std::visit([&](const auto& c) { return c.tangent_project(p, v); }, core_);
}
Vec Triad::project_point(const Vec& p) const {
  return std::visit([&](const auto& c) { return c.project_point(p); }, core_);
}
double Triad::constraint(const Vec& p) const {
  return std::visit([&](const auto& c) { return double(c.constraint(p)); }, core_);
}
Vec Triad::project_xi(const Vec& p, const Vec& v) const {
  Vec vt = tangent_project(p, v);
  return vt - reeb(p) * lambda(p, vt);
}
double Triad::metric(const Vec& p, const Vec& u, const Vec& v) const {
  Vec pu = project_xi(p, u), pv = project_xi(p, v);
  return dlambda(p, pu, japply(p, pv)) + lambda(p, u) * lambda(p, v);
}
Vec Triad::flow(const Vec& p, double s) const {
  return std::visit([&](const auto& c) { return c.flow(p, s); }, core_);
}
Vec Triad::flow_pushforward(const Vec& p, double s, const Vec& v) const {
  if (!constrained()) return v;  // flat flow is a translation
  // ellipsoid flow is linear, so the differential is the flow matrix itself
  return std::visit([&](const auto& c) { return c.flow(v, s); }, core_);
}

// ------------------------------- frames ------------------------------------

XiFrame Triad::xi_frame(const Vec& p) const {
  int best = 0;
  double bestn = -1.0;
  for (int i = 0; i < dim(); ++i) {
    Vec e(dim());
    e[i] = 1.0;
    Vec w = project_xi(p, e);
    double nn = metric(p, w, w);
    if (nn > bestn) {
      bestn = nn;
      best = i;
    }
  }
  Vec e(dim());
  e[best] = 1.0;
  return xi_frame(p, e);
}

XiFrame Triad::xi_frame(const Vec& p, const Vec& seed) const {
  XiFrame f;
  f.p = p;
  Vec w = project_xi(p, seed);
  double nn = std::sqrt(metric(p, w, w));
  if (nn < 1e-12) throw std::runtime_error("degenerate xi frame seed");
  f.e1 = w * (1.0 / nn);
  f.e2 = japply(p, f.e1);
  return f;
}

void Triad::frame_coords(const XiFrame& f, const Vec& v, double& c1,
                         double& c2) const {
  Vec w = project_xi(f.p, v);
  c1 = metric(f.p, w, f.e1);
  c2 = metric(f.p, w, f.e2);
}

Vec Triad::endo_apply(const XiEndo& E, const Vec& v) const {
  double c1, c2;
  frame_coords(E.f, v, c1, c2);
  double o1 = E.m[0][0] * c1 + E.m[0][1] * c2;
  double o2 = E.m[1][0] * c1 + E.m[1][1] * c2;
  return E.f.e1 * o1 + E.f.e2 * o2;
}

double Triad::endo_opnorm(const XiEndo& E) const {
  // largest singular value of the 2x2 frame matrix
  double a = E.m[0][0], b = E.m[0][1], c = E.m[1][0], d = E.m[1][1];
  double q = a * a + b * b + c * c + d * d;
  double det = a * d - b * c;
  double disc = std::sqrt(std::max(0.0, q * q - 4.0 * det * det));
  return std::sqrt(0.5 * (q + disc));
}

// ------------------------- Lie derivative of J -----------------------------

XiEndo Triad::lie_derivative_J_fd(const Vec& p) const {
  double e = fd_.step1;
  XiFrame f = xi_frame(p);
  auto conj = [&](double s, const Vec& v) {
    Vec q = flow(p, s);
    Vec jv = japply(q, flow_pushforward(p, s, v));
    return flow_pushforward(q, -s, jv);
  };
  XiEndo E;
  E.f = f;
  Vec basis[2] = {f.e1, f.e2};
  for (int b = 0; b < 2; ++b) {
    Vec L = (conj(e, basis[b]) - conj(-e, basis[b])) * (1.0 / (2.0 * e));
    Vec Lp = project_xi(p, L);
    E.m[0][b] = metric(p, Lp, f.e1);
    E.m[1][b] = metric(p, Lp, f.e2);
  }
  return E;
}

XiEndo Triad::lie_derivative_J(const Vec& p) const {
  if (sasakian()) {
    XiEndo E;
    E.f = xi_frame(p);
    return E;
  }
  return lie_derivative_J_fd(p);
}

Vec Triad::lieJ_apply(const Vec& p, const Vec& v) const {
  if (sasakian()) return Vec(dim());
  XiEndo E = lie_derivative_J(p);
  return endo_apply(E, v);
}

// ------------------------------- charts ------------------------------------

struct Triad::Chart {
  const Triad& T;
  Vec p;
  Vec B[3];
  double h;

  Chart(const Triad& t, const Vec& point) : T(t), p(point), h(t.fd().step1) {
    int n = T.dim();
    if (!T.constrained()) {
      for (int i = 0; i < 3; ++i) {
        B[i] = Vec(n);
        B[i][i] = 1.0;
      }
      return;
    }
    // greedy Gram-Schmidt over projected ambient axes
    int filled = 0;
    Vec cand[4];
    for (int i = 0; i < n; ++i) {
      Vec e(n);
      e[i] = 1.0;
      cand[i] = T.tangent_project(p, e);
    }
    for (int k = 0; k < 3; ++k) {
      int best = -1;
      double bestn = -1.0;
      for (int i = 0; i < n; ++i) {
        Vec w = cand[i];
        for (int j = 0; j < filled; ++j) w -= B[j] * dot(w, B[j]);
        double nn = norm(w);
        if (nn > bestn) {
          bestn = nn;
          best = i;
        }
      }
      Vec w = cand[best];
      for (int j = 0; j < filled; ++j) w -= B[j] * dot(w, B[j]);
      B[k] = w * (1.0 / norm(w));
      ++filled;
    }
  }

  Vec map(const double u[3]) const {
    Vec q = p;
    for (int i = 0; i < 3; ++i) q += B[i] * u[i];
    return T.project_point(q);
  }

  void dmap(const double u[3], Vec cols[3]) const {
    if (!T.constrained()) {
      for (int i = 0; i < 3; ++i) cols[i] = B[i];
      return;
    }
    for (int i = 0; i < 3; ++i) {
      double up[3] = {u[0], u[1], u[2]}, um[3] = {u[0], u[1], u[2]};
      up[i] += h;
      um[i] -= h;
      cols[i] = (map(up) - map(um)) * (1.0 / (2.0 * h));
    }
  }

  // least-squares chart components of ambient vector v at chart position u
  void comps(const double u[3], const Vec& v, double out[3]) const {
    Vec cols[3];
    dmap(u, cols);
    Eigen::Matrix3d A;
    Eigen::Vector3d rhs;
    for (int i = 0; i < 3; ++i) {
      for (int j = 0; j < 3; ++j) A(i, j) = dot(cols[i], cols[j]);
      rhs(i) = dot(cols[i], v);
    }
    Eigen::Vector3d x = A.ldlt().solve(rhs);
    for (int i = 0; i < 3; ++i) out[i] = x(i);
  }
};

double Triad::dirderiv(const Vec& p, const Vec& X, const ScalarField& f) const {
  double nx = norm(X);
  if (nx < 1e-14) return 0.0;
  Vec u = X * (1.0 / nx);
  double h = fd_.step1;
  Vec qp = project_point(p + u * h), qm = project_point(p - u * h);
  return (f(qp) - f(qm)) / (2.0 * h) * nx;
}

Vec Triad::bracket(const Vec& p, const VecField& U, const VecField& V) const {
  Chart C(*this, p);
  double h = fd_.step1;
  double u0[3] = {0, 0, 0};
  double Uh[3], Vh[3];
  C.comps(u0, U(p), Uh);
  C.comps(u0, V(p), Vh);
  double dU[3][3], dV[3][3];  // dU[i][k] = d_i U^k
  for (int i = 0; i < 3; ++i) {
    double up[3] = {0, 0, 0}, um[3] = {0, 0, 0};
    up[i] = h;
    um[i] = -h;
    Vec qp = C.map(up), qm = C.map(um);
    double Up[3], Um[3], Vp[3], Vm[3];
    C.comps(up, U(qp), Up);
    C.comps(um, U(qm), Um);
    C.comps(up, V(qp), Vp);
    C.comps(um, V(qm), Vm);
    for (int k = 0; k < 3; ++k) {
      dU[i][k] = (Up[k] - Um[k]) / (2.0 * h);
      dV[i][k] = (Vp[k] - Vm[k]) / (2.0 * h);
    }
  }
  Vec out(dim());
  for (int k = 0; k < 3; ++k) {
    double c = 0.0;
    for (int i = 0; i < 3; ++i) c += Uh[i] * dV[i][k] - Vh[i] * dU[i][k];
    out += C.B[k] * c;
  }
  return out;
}

// --------------------------- Levi-Civita block ------------------------------

Vec Triad::lc_nabla(const Vec& p, const Vec& X, const VecField& Y) const {
  Chart C(*this, p);
  double h = fd_.step1;
  auto gmat = [&](const double u[3], double g[3][3]) {
    Vec cols[3];
    C.dmap(u, cols);
    Vec q = C.map(u);
    for (int i = 0; i < 3; ++i)
      for (int j = i; j < 3; ++j) g[i][j] = g[j][i] = metric(q, cols[i], cols[j]);
  };
  double u0[3] = {0, 0, 0};
  double g0[3][3];
  gmat(u0, g0);
  double dg[3][3][3];  // dg[k][i][j] = d_k g_ij
  for (int k = 0; k < 3; ++k) {
    double up[3] = {0, 0, 0}, um[3] = {0, 0, 0};
    up[k] = h;
    um[k] = -h;
    double gp[3][3], gm[3][3];
    gmat(up, gp);
    gmat(um, gm);
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) dg[k][i][j] = (gp[i][j] - gm[i][j]) / (2.0 * h);
  }
  Eigen::Matrix3d G;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) G(i, j) = g0[i][j];
  Eigen::Matrix3d Ginv = G.inverse();
  double Gam[3][3][3];  // Gam[l][i][j]
  for (int l = 0; l < 3; ++l)
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) {
        double s = 0.0;
        for (int k = 0; k < 3; ++k)
          s += Ginv(l, k) * (dg[i][j][k] + dg[j][i][k] - dg[k][i][j]);
        Gam[l][i][j] = 0.5 * s;
      }
  double Xh[3], Y0[3];
  C.comps(u0, X, Xh);
  C.comps(u0, Y(p), Y0);
  double dY[3][3];  // dY[i][k]
  for (int i = 0; i < 3; ++i) {
    double up[3] = {0, 0, 0}, um[3] = {0, 0, 0};
    up[i] = h;
    um[i] = -h;
    double Yp[3], Ym[3];
    C.comps(up, Y(C.map(up)), Yp);
    C.comps(um, Y(C.map(um)), Ym);
    for (int k = 0; k < 3; ++k) dY[i][k] = (Yp[k] - Ym[k]) / (2.0 * h);
  }
  Vec out(dim());
  for (int l = 0; l < 3; ++l) {
    double c = 0.0;
    for (int i = 0; i < 3; ++i) {
      c += Xh[i] * dY[i][l];
      for (int j = 0; j < 3; ++j) c += Gam[l][i][j] * Xh[i] * Y0[j];
    }
    out += C.B[l] * c;
  }
  return out;
}

// --------------------------- triad connection ------------------------------

// xi-block for a xi-direction X and xi-valued field Z: project the
// Levi-Civita derivative and Hermitianize with -(1/2) J (D J).
static Vec conn_pi_xi(const Triad& T, const Vec& p, const Vec& Xxi,
                      const VecField& Z) {
  Vec W = T.lc_nabla(p, Xxi, Z);
  VecField JZ = [&T, &Z](const Vec& q) { return T.japply(q, Z(q)); };
  Vec U = T.lc_nabla(p, Xxi, JZ);
  Vec DZ = T.project_xi(p, W);
  Vec DJZ = T.project_xi(p, U);
  Vec DJ_Z = DJZ - T.japply(p, DZ);
  return DZ - 0.5 * T.japply(p, DJ_Z);
}

Vec Triad::nabla(const Vec& p, const Vec& X, const VecField& Y) const {
  Vec Xl_dir = reeb(p);
  double r = lambda(p, X);
  Vec Xxi = tangent_project(p, X) - Xl_dir * r;
  Vec out(dim());
  if (norm(Xxi) > 1e-14) {
    auto Yl = [this, &Y](const Vec& q) { return lambda(q, Y(q)); };
    VecField Yxi_f = [this, &Y](const Vec& q) {
      Vec y = Y(q);
      return y - reeb(q) * lambda(q, y);
    };
    Vec LJJX = lieJ_apply(p, japply(p, Xxi));
    out += conn_pi_xi(*this, p, Xxi, Yxi_f);
    out += Xl_dir * (-0.5 * metric(p, Yxi_f(p), LJJX));
    out += Xl_dir * dirderiv(p, Xxi, Yl);
    out += 0.5 * Yl(p) * LJJX;
  }
  if (std::abs(r) > 1e-14) {
    VecField Xf = [this](const Vec& q) { return reeb(q); };
    Vec br = bracket(p, Xf, Y);
    Vec row = 0.5 * lieJ_apply(p, japply(p, Y(p)));
    out += r * (br + row);
  }
  return out;
}

Vec Triad::nabla_pi(const Vec& p, const Vec& X, const VecField& Z) const {
  return project_xi(p, nabla(p, X, Z));
}

Vec Triad::torsion(const Vec& p, const Vec& u, const Vec& v) const {
  Vec uc = u, vc = v;
  VecField U = [this, uc](const Vec& q) { return tangent_project(q, uc); };
  VecField V = [this, vc](const Vec& q) { return tangent_project(q, vc); };
  return nabla(p, U(p), V) - nabla(p, V(p), U) - bracket(p, U, V);
}

Vec Triad::torsion_pi(const Vec& p, const Vec& u, const Vec& v) const {
  Vec uc = u, vc = v;
  VecField U = [this, uc](const Vec& q) { return project_xi(q, uc); };
  VecField V = [this, vc](const Vec& q) { return project_xi(q, vc); };
  Vec t = nabla_pi(p, U(p), V) - nabla_pi(p, V(p), U) -
          project_xi(p, bracket(p, U, V));
  return t;
}

// ------------------------------ curvature ----------------------------------

XiEndo Triad::curvature_pi(const Vec& p, const Vec& u, const Vec& v) const {
  Chart C(*this, p);
  XiFrame f0 = xi_frame(p);
  Vec seed = f0.e1;
  auto f1 = [this, seed](const Vec& q) {
    Vec w = project_xi(q, seed);
    return w * (1.0 / std::sqrt(metric(q, w, w)));
  };
  auto f2 = [this, &f1](const Vec& q) { return japply(q, f1(q)); };
  VecField F[2] = {f1, f2};
  double h2 = fd_.step2;
  // omega[i](u): 2x2 matrix of nabla along chart direction i at chart point u
  auto omega = [&](int i, const double u[3], double w[2][2]) {
    Vec cols[3];
    C.dmap(u, cols);
    Vec q = C.map(u);
    Vec fr[2] = {f1(q), f2(q)};
    for (int b = 0; b < 2; ++b) {
      Vec nb = nabla(q, cols[i], F[b]);
      Vec nbp = project_xi(q, nb);
      for (int a = 0; a < 2; ++a) w[a][b] = metric(q, nbp, fr[a]);
    }
  };
  double u0[3] = {0, 0, 0};
  double om0[3][2][2];
  for (int i = 0; i < 3; ++i) omega(i, u0, om0[i]);
  double dom[3][3][2][2];  // dom[k][i] = d_k omega_i
  for (int k = 0; k < 3; ++k) {
    double up[3] = {0, 0, 0}, um[3] = {0, 0, 0};
    up[k] = h2;
    um[k] = -h2;
    for (int i = 0; i < 3; ++i) {
      double wp[2][2], wm[2][2];
      omega(i, up, wp);
      omega(i, um, wm);
      for (int a = 0; a < 2; ++a)
        for (int b = 0; b < 2; ++b)
          dom[k][i][a][b] = (wp[a][b] - wm[a][b]) / (2.0 * h2);
    }
  }
  double uh[3], vh[3];
  C.comps(u0, u, uh);
  C.comps(u0, v, vh);
  XiEndo E;
  E.f = f0;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) {
      double w = uh[i] * vh[j];
      if (w == 0.0) continue;
      for (int a = 0; a < 2; ++a)
        for (int b = 0; b < 2; ++b) {
          double r = dom[i][j][a][b] - dom[j][i][a][b];
          for (int c = 0; c < 2; ++c)
            r += om0[i][a][c] * om0[j][c][b] - om0[j][a][c] * om0[i][c][b];
          E.m[a][b] += w * r;
        }
    }
  return E;
}

// ------------------------------ transport ----------------------------------

std::vector<Vec> Triad::parallel_transport(const std::vector<Vec>& curve,
                                           const Vec& v0, int substeps) const {
  if (curve.empty()) return {};
  std::vector<Vec> out;
  out.reserve(curve.size());
  out.push_back(project_xi(curve[0], v0));

  Vec seed = norm(out[0]) > 1e-12 ? out[0] : xi_frame(curve[0]).e1;
  auto mkframe = [this](const Vec& q, const Vec& s) {
    Vec w = project_xi(q, s);
    double nn = std::sqrt(metric(q, w, w));
    XiFrame f;
    f.p = q;
    f.e1 = w * (1.0 / nn);
    f.e2 = japply(q, f.e1);
    return f;
  };
  double c1, c2;
  {
    XiFrame f = mkframe(curve[0], seed);
    frame_coords(f, out[0], c1, c2);
  }
  for (size_t k = 0; k + 1 < curve.size(); ++k) {
    const Vec &p0 = curve[k], &p1 = curve[k + 1];
    // re-seed the frame field if the current seed projects poorly
    {
      Vec w = project_xi(p0, seed);
      if (std::sqrt(metric(p0, w, w)) < 0.3) {
        Vec cur = mkframe(p0, seed).e1 * c1 + mkframe(p0, seed).e2 * c2;
        Vec news = norm(cur) > 1e-12 ? cur : xi_frame(p0).e1;
        XiFrame f = mkframe(p0, news);
        Vec vec = mkframe(p0, seed).e1 * c1 + mkframe(p0, seed).e2 * c2;
        seed = news;
        frame_coords(f, vec, c1, c2);
      }
    }
    auto q_of = [&](double s) { return project_point(p0 + (p1 - p0) * s); };
    auto om21 = [&](double s) {
      Vec q = q_of(s);
      Vec X = tangent_project(q, p1 - p0);
      XiFrame f = mkframe(q, seed);
      VecField f1field = [this, sd = seed](const Vec& qq) {
        Vec w = project_xi(qq, sd);
        return w * (1.0 / std::sqrt(metric(qq, w, w)));
      };
      Vec nb = nabla(q, X, f1field);
      return metric(q, project_xi(q, nb), f.e2);
    };
    double ds = 1.0 / substeps;
    for (int m = 0; m < substeps; ++m) {
      double s0 = m * ds;
      // RK4 on (c1, c2)' = (c2 w, -c1 w)
      auto rhs = [&](double s, double a, double b, double& da, double& db) {
        double w = om21(s);
        da = b * w;
        db = -a * w;
      };
      double k1a, k1b, k2a, k2b, k3a, k3b, k4a, k4b;
      rhs(s0, c1, c2, k1a, k1b);
      rhs(s0 + 0.5 * ds, c1 + 0.5 * ds * k1a, c2 + 0.5 * ds * k1b, k2a, k2b);
      rhs(s0 + 0.5 * ds, c1 + 0.5 * ds * k2a, c2 + 0.5 * ds * k2b, k3a, k3b);
      rhs(s0 + ds, c1 + ds * k3a, c2 + ds * k3b, k4a, k4b);
      c1 += ds / 6.0 * (k1a + 2 * k2a + 2 * k3a + k4a);
      c2 += ds / 6.0 * (k1b + 2 * k2b + 2 * k3b + k4b);
    }
    XiFrame f = mkframe(p1, seed);
    out.push_back(f.e1 * c1 + f.e2 * c2);
  }
  return out;
}

std::vector<XiFrame> Triad::transport_frames(const std::vector<Vec>& curve,
                                             const XiFrame& f0,
                                             int substeps) const {
  std::vector<Vec> e1s = parallel_transport(curve, f0.e1, substeps);
  std::vector<XiFrame> out;
  out.reserve(curve.size());
  for (size_t k = 0; k < curve.size(); ++k) {
    XiFrame f;
    f.p = curve[k];
    double nn = std::sqrt(metric(curve[k], e1s[k], e1s[k]));
    f.e1 = e1s[k] * (1.0 / nn);
    f.e2 = japply(curve[k], f.e1);
    out.push_back(f);
  }
  return out;
}

// ------------------------------- sampling ----------------------------------

Vec Triad::sample_point(CounterRng& rng) const {
  if (!constrained()) {
    Vec p(3);
    for (int i = 0; i < 3; ++i) p[i] = rng.sym();
    return p;
  }
  Vec p(4);
  double nn = 0.0;
  while (nn < 1e-3) {
    for (int i = 0; i < 4; ++i) p[i] = rng.sym();
    nn = norm(p);
  }
  return project_point(p * (2.0 / nn));
}

// ------------------------------ axiom suite --------------------------------

AxiomReport Triad::axiom_check(int npoints, double step,
                               std::uint64_t seed) const {
  Triad T = *this;
  T.fd_.step1 = step;
  T.fd_.step2 = 10.0 * step;
  CounterRng rng(seed, 3);
  AxiomReport rep;
  auto upd = [&rep](const std::string& name, double r) {
    for (auto& [k, v] : rep.entries)
      if (k == name) {
        if (r > v) v = r;
        return;
      }
    rep.entries.emplace_back(name, r);
  };
  for (int n = 0; n < npoints; ++n) {
    Vec p = T.sample_point(rng);
    int d = T.dim();
    auto rnd_amb = [&] {
      Vec v(d);
      for (int i = 0; i < d; ++i) v[i] = rng.sym();
      return v;
    };
    Vec X = T.tangent_project(p, rnd_amb());
    Vec ya = rnd_amb(), za = rnd_amb();
    VecField Yf = [&T, ya](const Vec& q) { return T.tangent_project(q, ya); };
    VecField Zf = [&T, za](const Vec& q) { return T.tangent_project(q, za); };
    // (1) metric compatibility, generic directions and fields
    {
      ScalarField gyz = [&T, &Yf, &Zf](const Vec& q) {
        return T.metric(q, Yf(q), Zf(q));
      };
      double lhs = T.dirderiv(p, X, gyz);
      double rhs = T.metric(p, T.nabla(p, X, Yf), Zf(p)) +
                   T.metric(p, Yf(p), T.nabla(p, X, Zf));
      upd("metric-compat", std::abs(lhs - rhs));
    }
    // (2) vanishing Reeb torsion
    upd("reeb-torsion", norm(T.torsion(p, T.reeb(p), T.tangent_project(p, ya))));
    // (3) Reeb geodesic and xi-valued Reeb rows
    {
      VecField Rf = [&T](const Vec& q) { return T.reeb(q); };
      upd("reeb-geodesic", norm(T.nabla(p, T.reeb(p), Rf)));
      Vec y = T.project_xi(p, ya);
      Vec row = T.nabla(p, y, Rf);
      upd("reeb-row-xi", std::abs(T.lambda(p, row)));
      // Reeb-row formula against the Lie-derivative expression
      Vec expect = 0.5 * T.lieJ_apply(p, T.japply(p, y));
      upd("reeb-row-formula", norm(row - expect));
    }
    // (4) Hermitian xi-block
    {
      VecField Zxi = [&T, za](const Vec& q) { return T.project_xi(q, za); };
      VecField JZxi = [&T, &Zxi](const Vec& q) { return T.japply(q, Zxi(q)); };
      Vec r = T.nabla_pi(p, X, JZxi) - T.japply(p, T.nabla_pi(p, X, Zxi));
      upd("hermitian-J", norm(r));
    }
    // (5) vanishing (J Y, Y) xi-torsion
    {
      Vec y = T.project_xi(p, ya);
      upd("pi-torsion-JYY", norm(T.torsion_pi(p, T.japply(p, y), y)));
    }
    // (6) complex-antilinear part of the Reeb row
    {
      VecField Rf = [&T](const Vec& q) { return T.reeb(q); };
      Vec y = T.project_xi(p, ya);
      Vec r = 0.5 * (T.nabla(p, y, Rf) -
                     T.japply(p, T.nabla(p, T.japply(p, y), Rf)));
      upd("dbar-reeb-row", norm(r));
    }
    // lambda of the xi-torsion reproduces dlambda
    {
      Vec y1 = T.project_xi(p, ya), y2 = T.project_xi(p, za);
      double lt = T.lambda(p, T.torsion(p, y1, y2));
      upd("lambda-torsion-dlambda", std::abs(lt - T.dlambda(p, y1, y2)));
    }
  }
  for (auto& [k, v] : rep.entries) rep.max_residual = std::max(rep.max_residual, v);
  return rep;
}

}  // namespace ciw
