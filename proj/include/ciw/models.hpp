#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "ciw/dual.hpp"
#include "ciw/rng.hpp"
#include "ciw/smallvec.hpp"

namespace ciw {

// ---------------------------------------------------------------------------
// Flat model on R^3: lambda = dz - y dx, Reeb field = d/dz.
// xi is spanned by e1 = d/dy and e2 = d/dx + y d/dz; the complex structure is
// fixed by dlambda(v, Jv) > 0, giving J e1 = -e2, J e2 = e1.
// ---------------------------------------------------------------------------
struct FlatCore {
  int dim() const { return 3; }
  bool constrained() const { return false; }

  template <class T>
  T lambda(const AVec<T>& p, const AVec<T>& v) const {
    return v[2] - p[1] * v[0];
  }
  template <class T>
  T dlambda(const AVec<T>&, const AVec<T>& u, const AVec<T>& v) const {
    return u[0] * v[1] - u[1] * v[0];
  }
  template <class T>
  AVec<T> reeb(const AVec<T>&) const {
    return AVec<T>{T(0), T(0), T(1)};
  }
  template <class T>
  AVec<T> tangent_project(const AVec<T>&, const AVec<T>& v) const {
    return v;
  }
  template <class T>
  AVec<T> project_point(const AVec<T>& p) const {
    return p;
  }
  template <class T>
  T constraint(const AVec<T>&) const {
    return T(0);
  }

  // J applied through the xi-projection of v.
  template <class T>
  AVec<T> japply(const AVec<T>& p, const AVec<T>& v) const {
    T l = lambda(p, v);
    // pi v = vx e2 + vy e1 with coordinates read off the ambient components.
    T c1 = v[1];       // e1 coefficient
    T c2 = v[0];       // e2 coefficient
    (void)l;           // Reeb part is annihilated by J
    // J(c1 e1 + c2 e2) = -c1 e2 + c2 e1
    return AVec<T>{-c1, c2, -c1 * p[1]};
  }

  template <class T>
  AVec<T> xi_project(const AVec<T>& p, const AVec<T>& v) const {
    T l = lambda(p, v);
    return AVec<T>{v[0], v[1], v[2] - l};
  }

  // coordinates of a xi-vector in the orthonormal frame (e1, e2) plus the
  // conformal factor relating the frame metric to the triad metric (1 here)
  template <class T>
  void xi_coords(const AVec<T>&, const AVec<T>& v, T& y1, T& y2, T& dfac) const {
    y1 = v[1];
    y2 = v[0];
    dfac = T(1);
  }

  template <class T>
  AVec<T> flow(const AVec<T>& p, const T& s) const {
    return AVec<T>{p[0], p[1], p[2] + s};
  }
  bool sasakian() const { return true; }
};

// ---------------------------------------------------------------------------
// Ellipsoid |z1|^2/a1 + |z2|^2/a2 = 1 in R^4 = C^2 with coordinates
// (x1, y1, x2, y2), lambda = restriction of (1/2) sum(x dy - y dx).
// The Reeb flow rotates plane j at angular rate 2/a_j.  J on xi comes from
// polar-compatibilization of a fiber metric h: the round h (Euclidean) gives
// the Sasakian structure, a seeded trig perturbation of h breaks Reeb
// invariance and produces a non-trivial Lie derivative of J.
// ---------------------------------------------------------------------------
struct PerturbTerm {
  int i = 0, j = 0;       // symmetric entry
  double c = 0.0;         // amplitude
  double phase = 0.0;
  AVec<double> k;         // wave covector
};

struct EllipsoidCore {
  double a1 = 1.0, a2 = 1.0;
  double eps = 0.0;                  // perturbation strength
  std::vector<PerturbTerm> terms;    // empty => round (Sasakian) metric

  static EllipsoidCore make(double a1, double a2) {
    EllipsoidCore m;
    m.a1 = a1;
    m.a2 = a2;
    return m;
  }

  static EllipsoidCore make_perturbed(double a1, double a2, std::uint64_t seed,
                                      double eps) {
    EllipsoidCore m = make(a1, a2);
    m.eps = eps;
    CounterRng rng(seed, /*stream=*/17);
    const int nterms = 6;
    for (int t = 0; t < nterms; ++t) {
      PerturbTerm pt;
      pt.i = rng.uniform_int(0, 3);
      pt.j = rng.uniform_int(pt.i, 3);
      pt.c = rng.sym() / nterms;
      pt.phase = rng.uniform(0.0, 6.283185307179586);
      pt.k = AVec<double>(4);
      for (int d = 0; d < 4; ++d) pt.k[d] = 2.0 * rng.sym();
      m.terms.push_back(pt);
    }
    return m;
  }

  int dim() const { return 4; }
  bool constrained() const { return true; }
  double axis(int i) const { return i < 2 ? a1 : a2; }

  template <class T>
  T constraint(const AVec<T>& p) const {
    return (p[0] * p[0] + p[1] * p[1]) * (1.0 / a1) +
           (p[2] * p[2] + p[3] * p[3]) * (1.0 / a2) - 1.0;
  }
  template <class T>
  AVec<T> grad_constraint(const AVec<T>& p) const {
    AVec<T> g(4);
    for (int i = 0; i < 4; ++i) g[i] = p[i] * (2.0 / axis(i));
    return g;
  }

  template <class T>
  T lambda(const AVec<T>& p, const AVec<T>& v) const {
    return 0.5 * (p[0] * v[1] - p[1] * v[0] + p[2] * v[3] - p[3] * v[2]);
  }
  template <class T>
  T dlambda(const AVec<T>&, const AVec<T>& u, const AVec<T>& v) const {
    return u[0] * v[1] - u[1] * v[0] + u[2] * v[3] - u[3] * v[2];
  }
  template <class T>
  AVec<T> reeb(const AVec<T>& p) const {
    return AVec<T>{p[1] * (-2.0 / a1), p[0] * (2.0 / a1), p[3] * (-2.0 / a2),
                   p[2] * (2.0 / a2)};
  }

  // Closest-point projection onto the ellipsoid (Lagrange multiplier Newton).
  template <class T>
  AVec<T> project_point(const AVec<T>& p) const {
    T mu{};
    for (int iter = 0; iter < 60; ++iter) {
      AVec<T> q(4);
      T g{}, dg{};
      for (int i = 0; i < 4; ++i) {
        double A = axis(i);
        q[i] = p[i] * A / (A + mu);
        g += q[i] * q[i] * (1.0 / A);
        dg += q[i] * q[i] * (-2.0 / (A * (A + mu)));
      }
      g -= 1.0;
      mu -= g / dg;
      if (value(g) > -1e-15 && value(g) < 1e-15 && iter > 2) break;
    }
    AVec<T> q(4);
    for (int i = 0; i < 4; ++i) q[i] = p[i] * axis(i) / (axis(i) + mu);
    return q;
  }

  template <class T>
  AVec<T> tangent_project(const AVec<T>& p, const AVec<T>& v) const {
    AVec<T> g = grad_constraint(p);
    T s = dot(g, v) / dot(g, g);
    return v - g * s;
  }

  // Fiber metric on xi used by the compatibilization: Euclidean plus a
  // seeded symmetric trig perturbation.
  template <class T>
  T hmetric(const AVec<T>& p, const AVec<T>& u, const AVec<T>& v) const {
    T s = dot(u, v);
    if (eps != 0.0) {
      for (const PerturbTerm& t : terms) {
        T ph = t.phase;
        for (int d = 0; d < 4; ++d) ph += t.k[d] * p[d];
        using std::sin;
        T w = sin(ph) * (eps * t.c);
        s += w * (u[t.i] * v[t.j] + u[t.j] * v[t.i]);
      }
    }
    return s;
  }

  template <class T>
  AVec<T> xi_project(const AVec<T>& p, const AVec<T>& v) const {
    AVec<T> vt = tangent_project(p, v);
    return vt - reeb(p) * lambda(p, vt);
  }

  // h-orthonormal basis of xi_p with dlambda(b1, b2) > 0.
  template <class T>
  void xi_basis(const AVec<T>& p, AVec<T>& b1, AVec<T>& b2) const {
    // choose the two most independent projected ambient axes by value
    AVec<T> cand[4];
    double score[4];
    for (int i = 0; i < 4; ++i) {
      AVec<T> e(4);
      e[i] = 1.0;
      cand[i] = xi_project(p, e);
      score[i] = value(norm(cand[i]));
    }
    int i1 = 0;
    for (int i = 1; i < 4; ++i)
      if (score[i] > score[i1]) i1 = i;
    using std::sqrt;
    b1 = cand[i1] * (1.0 / sqrt(hmetric(p, cand[i1], cand[i1])));
    int i2 = -1;
    double best = -1.0;
    for (int i = 0; i < 4; ++i) {
      if (i == i1) continue;
      AVec<double> c(4), bb(4);
      for (int d = 0; d < 4; ++d) {
        c[d] = value(cand[i][d]);
        bb[d] = value(b1[d]);
      }
      AVec<double> orth = c - bb * dot(c, bb);
      double sc = norm(orth);
      if (sc > best) {
        best = sc;
        i2 = i;
      }
    }
    AVec<T> c2 = cand[i2] - b1 * hmetric(p, cand[i2], b1);
    b2 = c2 * (1.0 / sqrt(hmetric(p, c2, c2)));
    if (value(dlambda(p, b1, b2)) < 0.0) b2 = -b2;
  }

  // coordinates in the h-orthonormal xi basis; the triad metric on xi is
  // dfac = dlambda(b1, b2) times the h metric
  template <class T>
  void xi_coords(const AVec<T>& p, const AVec<T>& v, T& y1, T& y2, T& dfac) const {
    AVec<T> b1(4), b2(4);
    xi_basis(p, b1, b2);
    y1 = hmetric(p, v, b1);
    y2 = hmetric(p, v, b2);
    dfac = dlambda(p, b1, b2);
  }

  template <class T>
  AVec<T> japply(const AVec<T>& p, const AVec<T>& v) const {
    AVec<T> b1(4), b2(4);
    xi_basis(p, b1, b2);
    AVec<T> w = xi_project(p, v);
    T al = hmetric(p, w, b1);
    T be = hmetric(p, w, b2);
    // J b1 = b2, J b2 = -b1 in the h-orthonormal positively oriented basis
    return b2 * al - b1 * be;
  }

  // Reeb flow in closed form: rotation by angle 2 s / a_j in plane j.
  template <class T>
  AVec<T> flow(const AVec<T>& p, const T& s) const {
    using std::cos;
    using std::sin;
    T c1 = cos(s * (2.0 / a1)), s1 = sin(s * (2.0 / a1));
    T c2 = cos(s * (2.0 / a2)), s2 = sin(s * (2.0 / a2));
    return AVec<T>{c1 * p[0] - s1 * p[1], s1 * p[0] + c1 * p[1],
                   c2 * p[2] - s2 * p[3], s2 * p[2] + c2 * p[3]};
  }
  bool sasakian() const { return eps == 0.0; }
};

}  // namespace ciw
