// Forward-mode dual numbers used to linearize the transformed nonlinearity.
//
// Dual<T> carries a value and one directional derivative. Nesting
// Dual<Dual<double>> gives the mixed second derivative along two directions,
// which is all the second-order jet machinery needs.
#pragma once

#include <cmath>
#include <type_traits>

namespace inertia {

template <class T>
struct Dual {
  T re{};
  T eps{};

  constexpr Dual() = default;
  constexpr Dual(double value) : re(value), eps(0.0) {}  // NOLINT(google-explicit-constructor)
  constexpr Dual(T value, T derivative) : re(value), eps(derivative) {}

  Dual& operator+=(const Dual& o) {
    re += o.re;
    eps += o.eps;
    return *this;
  }
  Dual& operator-=(const Dual& o) {
    re -= o.re;
    eps -= o.eps;
    return *this;
  }
  Dual& operator*=(const Dual& o) {
    eps = eps * o.re + re * o.eps;
    re *= o.re;
    return *this;
  }
  Dual& operator/=(const Dual& o) {
    const T inv = T(1.0) / o.re;
    re *= inv;
    eps = (eps - re * o.eps) * inv;
    return *this;
  }
};

template <class T> Dual<T> operator+(Dual<T> a, const Dual<T>& b) { return a += b; }
template <class T> Dual<T> operator-(Dual<T> a, const Dual<T>& b) { return a -= b; }
template <class T> Dual<T> operator*(Dual<T> a, const Dual<T>& b) { return a *= b; }
template <class T> Dual<T> operator/(Dual<T> a, const Dual<T>& b) { return a /= b; }
template <class T> Dual<T> operator-(const Dual<T>& a) { return {-a.re, -a.eps}; }

template <class T> Dual<T> operator+(Dual<T> a, double b) { a.re += b; return a; }
template <class T> Dual<T> operator+(double b, Dual<T> a) { a.re += b; return a; }
template <class T> Dual<T> operator-(Dual<T> a, double b) { a.re -= b; return a; }
template <class T> Dual<T> operator-(double b, const Dual<T>& a) { return {b - a.re, -a.eps}; }
template <class T> Dual<T> operator*(Dual<T> a, double b) { a.re *= b; a.eps *= b; return a; }
template <class T> Dual<T> operator*(double b, Dual<T> a) { a.re *= b; a.eps *= b; return a; }
template <class T> Dual<T> operator/(Dual<T> a, double b) { a.re /= b; a.eps /= b; return a; }
template <class T> Dual<T> operator/(double b, const Dual<T>& a) {
  const T inv = T(1.0) / a.re;
  return {b * inv, -b * a.eps * inv * inv};
}

template <class T>
Dual<T> exp(const Dual<T>& a) {
  using std::exp;
  const T e = exp(a.re);
  return {e, e * a.eps};
}

// Scalar helpers that work uniformly for double and nested duals.
inline double real_part(double x) { return x; }
template <class T> double real_part(const Dual<T>& x) { return real_part(x.re); }

// Largest absolute value over every component; used as a convergence measure
// so that derivative parts converge together with the value.
inline double max_component(double x) { return std::abs(x); }
template <class T>
double max_component(const Dual<T>& x) {
  const double a = max_component(x.re);
  const double b = max_component(x.eps);
  return a > b ? a : b;
}

template <class T> struct is_dual : std::false_type {};
template <class T> struct is_dual<Dual<T>> : std::true_type {};

}  // namespace inertia
