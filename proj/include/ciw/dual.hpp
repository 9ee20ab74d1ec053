#pragma once

#include <cmath>

namespace ciw {

// First-order dual number for forward-mode differentiation of the discrete
// residual stencils.  One derivative slot: a Jacobian column is obtained by
// seeding d=1 on a single unknown.
struct Dual {
  double v = 0.0;
  double d = 0.0;

  Dual() = default;
  Dual(double value) : v(value) {}  // NOLINT: implicit by design
  Dual(double value, double deriv) : v(value), d(deriv) {}

  Dual& operator+=(const Dual& o) { v += o.v; d += o.d; return *this; }
  Dual& operator-=(const Dual& o) { v -= o.v; d -= o.d; return *this; }
  Dual& operator*=(const Dual& o) {
    d = d * o.v + v * o.d;
    v *= o.v;
    return *this;
  }
  Dual& operator/=(const Dual& o) {
    v /= o.v;
    d = (d - v * o.d) / o.v;
    return *this;
  }
};

inline Dual operator+(Dual a, const Dual& b) { return a += b; }
inline Dual operator-(Dual a, const Dual& b) { return a -= b; }
inline Dual operator*(Dual a, const Dual& b) { return a *= b; }
inline Dual operator/(Dual a, const Dual& b) { return a /= b; }
inline Dual operator-(const Dual& a) { return {-a.v, -a.d}; }

inline bool operator<(const Dual& a, const Dual& b) { return a.v < b.v; }
inline bool operator>(const Dual& a, const Dual& b) { return a.v > b.v; }

inline Dual sqrt(const Dual& x) {
  double r = std::sqrt(x.v);
  return {r, x.d / (2.0 * r)};
}
inline Dual sin(const Dual& x) { return {std::sin(x.v), x.d * std::cos(x.v)}; }
inline Dual cos(const Dual& x) { return {std::cos(x.v), -x.d * std::sin(x.v)}; }
inline Dual exp(const Dual& x) {
  double e = std::exp(x.v);
  return {e, x.d * e};
}
inline Dual abs(const Dual& x) { return x.v < 0 ? Dual{-x.v, -x.d} : x; }

inline double value(double x) { return x; }
inline double value(const Dual& x) { return x.v; }

}  // namespace ciw
