#pragma once

// Forward-mode dual numbers with a fixed number of directional derivatives.
//
// A Dual<N> carries a value and N tangent components. Model code is written
// as templates on the scalar type, so the same source evaluates plain values
// (double) and value + N directional derivatives (Dual<N>). Jacobians of
// wider blocks are obtained by seeding the inputs in chunks of N directions.

#include <Eigen/Core>

#include <array>
#include <cmath>
#include <limits>

namespace morphco::ad {

template <int N>
struct Dual {
  double v = 0.0;
  std::array<double, N> d{};

  constexpr Dual() = default;
  constexpr Dual(double value) : v(value) {}  // NOLINT: implicit constant promotion

  static Dual variable(double value, int direction) {
    Dual r(value);
    r.d[direction] = 1.0;
    return r;
  }

  Dual& operator+=(const Dual& o) {
    v += o.v;
    for (int i = 0; i < N; ++i) d[i] += o.d[i];
    return *this;
  }
  Dual& operator-=(const Dual& o) {
    v -= o.v;
    for (int i = 0; i < N; ++i) d[i] -= o.d[i];
    return *this;
  }
  Dual& operator*=(const Dual& o) {
    for (int i = 0; i < N; ++i) d[i] = d[i] * o.v + v * o.d[i];
    v *= o.v;
    return *this;
  }
  Dual& operator/=(const Dual& o) {
    const double inv = 1.0 / o.v;
    const double q = v * inv;
    for (int i = 0; i < N; ++i) d[i] = (d[i] - q * o.d[i]) * inv;
    v = q;
    return *this;
  }
  Dual& operator+=(double o) {
    v += o;
    return *this;
  }
  Dual& operator-=(double o) {
    v -= o;
    return *this;
  }
  Dual& operator*=(double o) {
    v *= o;
    for (int i = 0; i < N; ++i) d[i] *= o;
    return *this;
  }
  Dual& operator/=(double o) { return *this *= (1.0 / o); }
};

// chain rule helper: f(x) with f'(x) = slope
template <int N>
inline Dual<N> apply(const Dual<N>& x, double value, double slope) {
  Dual<N> r(value);
  for (int i = 0; i < N; ++i) r.d[i] = slope * x.d[i];
  return r;
}

template <int N> inline Dual<N> operator+(Dual<N> a, const Dual<N>& b) { return a += b; }
template <int N> inline Dual<N> operator-(Dual<N> a, const Dual<N>& b) { return a -= b; }
template <int N> inline Dual<N> operator*(Dual<N> a, const Dual<N>& b) { return a *= b; }
template <int N> inline Dual<N> operator/(Dual<N> a, const Dual<N>& b) { return a /= b; }
template <int N> inline Dual<N> operator+(Dual<N> a, double b) { return a += b; }
template <int N> inline Dual<N> operator-(Dual<N> a, double b) { return a -= b; }
template <int N> inline Dual<N> operator*(Dual<N> a, double b) { return a *= b; }
template <int N> inline Dual<N> operator/(Dual<N> a, double b) { return a /= b; }
template <int N> inline Dual<N> operator+(double a, Dual<N> b) { return b += a; }
template <int N> inline Dual<N> operator*(double a, Dual<N> b) { return b *= a; }
template <int N>
inline Dual<N> operator-(double a, const Dual<N>& b) {
  Dual<N> r(a - b.v);
  for (int i = 0; i < N; ++i) r.d[i] = -b.d[i];
  return r;
}
template <int N>
inline Dual<N> operator/(double a, const Dual<N>& b) {
  return apply(b, a / b.v, -a / (b.v * b.v));
}
template <int N>
inline Dual<N> operator-(const Dual<N>& a) {
  return apply(a, -a.v, -1.0);
}
template <int N>
inline Dual<N> operator+(const Dual<N>& a) {
  return a;
}

#define MORPHCO_DUAL_COMPARE(op)                                                        \
  template <int N> inline bool operator op(const Dual<N>& a, const Dual<N>& b) { return a.v op b.v; } \
  template <int N> inline bool operator op(const Dual<N>& a, double b) { return a.v op b; }          \
  template <int N> inline bool operator op(double a, const Dual<N>& b) { return a op b.v; }
MORPHCO_DUAL_COMPARE(<)
MORPHCO_DUAL_COMPARE(<=)
MORPHCO_DUAL_COMPARE(>)
MORPHCO_DUAL_COMPARE(>=)
MORPHCO_DUAL_COMPARE(==)
MORPHCO_DUAL_COMPARE(!=)
#undef MORPHCO_DUAL_COMPARE

template <int N> inline Dual<N> sin(const Dual<N>& x) { return apply(x, std::sin(x.v), std::cos(x.v)); }
template <int N> inline Dual<N> cos(const Dual<N>& x) { return apply(x, std::cos(x.v), -std::sin(x.v)); }
template <int N>
inline Dual<N> tan(const Dual<N>& x) {
  const double t = std::tan(x.v);
  return apply(x, t, 1.0 + t * t);
}
template <int N>
inline Dual<N> exp(const Dual<N>& x) {
  const double e = std::exp(x.v);
  return apply(x, e, e);
}
template <int N> inline Dual<N> log(const Dual<N>& x) { return apply(x, std::log(x.v), 1.0 / x.v); }
template <int N>
inline Dual<N> sqrt(const Dual<N>& x) {
  const double s = std::sqrt(x.v);
  return apply(x, s, 0.5 / s);
}
template <int N>
inline Dual<N> abs(const Dual<N>& x) {
  return x.v < 0.0 ? -x : x;
}
template <int N> inline Dual<N> fabs(const Dual<N>& x) { return abs(x); }
template <int N>
inline Dual<N> asin(const Dual<N>& x) {
  return apply(x, std::asin(x.v), 1.0 / std::sqrt(1.0 - x.v * x.v));
}
template <int N>
inline Dual<N> acos(const Dual<N>& x) {
  return apply(x, std::acos(x.v), -1.0 / std::sqrt(1.0 - x.v * x.v));
}
template <int N>
inline Dual<N> atan(const Dual<N>& x) {
  return apply(x, std::atan(x.v), 1.0 / (1.0 + x.v * x.v));
}
template <int N>
inline Dual<N> atan2(const Dual<N>& y, const Dual<N>& x) {
  const double r2 = x.v * x.v + y.v * y.v;
  Dual<N> r(std::atan2(y.v, x.v));
  for (int i = 0; i < N; ++i) r.d[i] = (x.v * y.d[i] - y.v * x.d[i]) / r2;
  return r;
}
template <int N>
inline Dual<N> pow(const Dual<N>& x, double p) {
  const double xp = std::pow(x.v, p);
  return apply(x, xp, p * std::pow(x.v, p - 1.0));
}
template <int N> inline bool isfinite(const Dual<N>& x) {
  if (!std::isfinite(x.v)) return false;
  for (double g : x.d)
    if (!std::isfinite(g)) return false;
  return true;
}
template <int N> inline bool isnan(const Dual<N>& x) { return !isfinite(x) && !std::isinf(x.v); }
template <int N> inline bool isinf(const Dual<N>& x) { return std::isinf(x.v); }

// Value of a scalar irrespective of whether it carries derivatives.
inline double value(double x) { return x; }
template <int N>
inline double value(const Dual<N>& x) {
  return x.v;
}

// Width used for chunked Jacobian evaluation throughout the library.
inline constexpr int kChunk = 8;
using ADScalar = Dual<kChunk>;

}  // namespace morphco::ad

namespace Eigen {

template <int N>
struct NumTraits<morphco::ad::Dual<N>> : NumTraits<double> {
  using Real = morphco::ad::Dual<N>;
  using NonInteger = morphco::ad::Dual<N>;
  using Nested = morphco::ad::Dual<N>;
  using Literal = double;
  enum {
    IsComplex = 0,
    IsInteger = 0,
    IsSigned = 1,
    RequireInitialization = 1,
    ReadCost = 1,
    AddCost = N + 1,
    MulCost = 2 * N + 1
  };
  static inline Real epsilon() { return Real(std::numeric_limits<double>::epsilon()); }
  static inline Real dummy_precision() { return Real(1e-12); }
  static inline Real highest() { return Real(std::numeric_limits<double>::max()); }
  static inline Real lowest() { return Real(std::numeric_limits<double>::lowest()); }
  static inline int digits10() { return std::numeric_limits<double>::digits10; }
};

template <int N, typename BinaryOp>
struct ScalarBinaryOpTraits<morphco::ad::Dual<N>, double, BinaryOp> {
  using ReturnType = morphco::ad::Dual<N>;
};
template <int N, typename BinaryOp>
struct ScalarBinaryOpTraits<double, morphco::ad::Dual<N>, BinaryOp> {
  using ReturnType = morphco::ad::Dual<N>;
};

}  // namespace Eigen

// Reverse-mode scalar; included here so ad::value covers it wherever Dual is visible.
#include "morphco/ad/reverse.hpp"
