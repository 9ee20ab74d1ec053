#pragma once

#include <array>
#include <cassert>
#include <cmath>
#include <initializer_list>

namespace ciw {

// Ambient vector of runtime dimension 3 or 4, templated on scalar so the
// same geometric code runs on doubles and on dual numbers.
template <class T>
struct AVec {
  int n = 0;
  std::array<T, 4> a{};

  AVec() = default;
  explicit AVec(int dim) : n(dim) {}
  AVec(std::initializer_list<T> xs) {
    n = static_cast<int>(xs.size());
    int i = 0;
    for (const T& x : xs) a[i++] = x;
  }

  T& operator[](int i) { return a[i]; }
  const T& operator[](int i) const { return a[i]; }

  AVec& operator+=(const AVec& o) {
    for (int i = 0; i < n; ++i) a[i] += o.a[i];
    return *this;
  }
  AVec& operator-=(const AVec& o) {
    for (int i = 0; i < n; ++i) a[i] -= o.a[i];
    return *this;
  }
  AVec& operator*=(const T& s) {
    for (int i = 0; i < n; ++i) a[i] *= s;
    return *this;
  }
};

template <class T>
AVec<T> operator+(AVec<T> u, const AVec<T>& v) { return u += v; }
template <class T>
AVec<T> operator-(AVec<T> u, const AVec<T>& v) { return u -= v; }
template <class T, class S>
AVec<T> operator*(const S& s, AVec<T> u) { return u *= T(s); }
template <class T, class S>
AVec<T> operator*(AVec<T> u, const S& s) { return u *= T(s); }
template <class T>
AVec<T> operator-(AVec<T> u) {
  for (int i = 0; i < u.n; ++i) u.a[i] = -u.a[i];
  return u;
}

template <class T>
T dot(const AVec<T>& u, const AVec<T>& v) {
  T s{};
  for (int i = 0; i < u.n; ++i) s += u.a[i] * v.a[i];
  return s;
}

template <class T>
T norm(const AVec<T>& u) {
  using std::sqrt;
  return sqrt(dot(u, u));
}

template <class T>
AVec<T> zero_like(const AVec<T>& u) { return AVec<T>(u.n); }

inline AVec<double> avec_zero(int n) { return AVec<double>(n); }

}  // namespace ciw
