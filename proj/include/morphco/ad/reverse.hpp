#pragma once

// Tape-based reverse-mode scalar. Operations on Var append a node holding the
// local partial derivatives to the thread's active tape; a backward sweep
// from weighted outputs gives the gradient of Σ wᵣ·outᵣ in one pass.
// Constants (index -1) are never recorded.

#include <Eigen/Core>

#include <cmath>
#include <limits>
#include <vector>

namespace morphco::ad {

struct TapeNode {
  int a = -1, b = -1;
  double da = 0.0, db = 0.0;
};

class Tape;
inline thread_local Tape* active_tape = nullptr;

struct Var {
  double v = 0.0;
  int idx = -1;

  constexpr Var() = default;
  constexpr Var(double value) : v(value) {}  // NOLINT: implicit constant promotion
  constexpr Var(double value, int index) : v(value), idx(index) {}

  Var& operator+=(const Var& o);
  Var& operator-=(const Var& o);
  Var& operator*=(const Var& o);
  Var& operator/=(const Var& o);
};

class Tape {
 public:
  // Makes this the active tape of the calling thread until destruction.
  Tape() : previous_(active_tape) {
    nodes_.reserve(1 << 14);
    active_tape = this;
  }
  ~Tape() { active_tape = previous_; }
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  Var input(double value) { return push(value, -1, 0.0, -1, 0.0); }

  Var push(double value, int a, double da, int b, double db) {
    nodes_.push_back({a, b, da, db});
    return Var(value, static_cast<int>(nodes_.size()) - 1);
  }

  int size() const { return static_cast<int>(nodes_.size()); }
  void clear() { nodes_.clear(); }

  // Adjoints of every node after seeding `out[r]` with `weights[r]`.
  const std::vector<double>& backward(const Var* out, const double* weights, int rows) {
    adjoint_.assign(nodes_.size(), 0.0);
    for (int r = 0; r < rows; ++r)
      if (out[r].idx >= 0) adjoint_[out[r].idx] += weights[r];
    for (int i = static_cast<int>(nodes_.size()) - 1; i >= 0; --i) {
      const double g = adjoint_[i];
      if (g == 0.0) continue;
      const TapeNode& n = nodes_[i];
      if (n.a >= 0) adjoint_[n.a] += g * n.da;
      if (n.b >= 0) adjoint_[n.b] += g * n.db;
    }
    return adjoint_;
  }

 private:
  std::vector<TapeNode> nodes_;
  std::vector<double> adjoint_;
  Tape* previous_;
};

// f(x) with f'(x) = slope
inline Var unary(const Var& x, double value, double slope) {
  if (x.idx < 0) return Var(value);
  return active_tape->push(value, x.idx, slope, -1, 0.0);
}

inline Var binary(double value, const Var& x, double dx, const Var& y, double dy) {
  if (x.idx < 0 && y.idx < 0) return Var(value);
  if (x.idx < 0) return active_tape->push(value, y.idx, dy, -1, 0.0);
  if (y.idx < 0) return active_tape->push(value, x.idx, dx, -1, 0.0);
  return active_tape->push(value, x.idx, dx, y.idx, dy);
}

inline Var operator+(const Var& a, const Var& b) { return binary(a.v + b.v, a, 1.0, b, 1.0); }
inline Var operator-(const Var& a, const Var& b) { return binary(a.v - b.v, a, 1.0, b, -1.0); }
inline Var operator*(const Var& a, const Var& b) { return binary(a.v * b.v, a, b.v, b, a.v); }
inline Var operator/(const Var& a, const Var& b) {
  const double inv = 1.0 / b.v;
  const double q = a.v * inv;
  return binary(q, a, inv, b, -q * inv);
}
inline Var operator+(const Var& a, double b) { return unary(a, a.v + b, 1.0); }
inline Var operator-(const Var& a, double b) { return unary(a, a.v - b, 1.0); }
inline Var operator*(const Var& a, double b) { return unary(a, a.v * b, b); }
inline Var operator/(const Var& a, double b) { return unary(a, a.v / b, 1.0 / b); }
inline Var operator+(double a, const Var& b) { return unary(b, a + b.v, 1.0); }
inline Var operator-(double a, const Var& b) { return unary(b, a - b.v, -1.0); }
inline Var operator*(double a, const Var& b) { return unary(b, a * b.v, a); }
inline Var operator/(double a, const Var& b) { return unary(b, a / b.v, -a / (b.v * b.v)); }
inline Var operator-(const Var& a) { return unary(a, -a.v, -1.0); }
inline Var operator+(const Var& a) { return a; }

inline Var& Var::operator+=(const Var& o) { return *this = *this + o; }
inline Var& Var::operator-=(const Var& o) { return *this = *this - o; }
inline Var& Var::operator*=(const Var& o) { return *this = *this * o; }
inline Var& Var::operator/=(const Var& o) { return *this = *this / o; }

#define MORPHCO_VAR_COMPARE(op)                                                    \
  inline bool operator op(const Var& a, const Var& b) { return a.v op b.v; }     \
  inline bool operator op(const Var& a, double b) { return a.v op b; }           \
  inline bool operator op(double a, const Var& b) { return a op b.v; }
MORPHCO_VAR_COMPARE(<)
MORPHCO_VAR_COMPARE(<=)
MORPHCO_VAR_COMPARE(>)
MORPHCO_VAR_COMPARE(>=)
MORPHCO_VAR_COMPARE(==)
MORPHCO_VAR_COMPARE(!=)
#undef MORPHCO_VAR_COMPARE

inline Var sin(const Var& x) { return unary(x, std::sin(x.v), std::cos(x.v)); }
inline Var cos(const Var& x) { return unary(x, std::cos(x.v), -std::sin(x.v)); }
inline Var tan(const Var& x) {
  const double t = std::tan(x.v);
  return unary(x, t, 1.0 + t * t);
}
inline Var exp(const Var& x) {
  const double e = std::exp(x.v);
  return unary(x, e, e);
}
inline Var log(const Var& x) { return unary(x, std::log(x.v), 1.0 / x.v); }
inline Var sqrt(const Var& x) {
  const double r = std::sqrt(x.v);
  return unary(x, r, 0.5 / r);
}
inline Var abs(const Var& x) { return unary(x, std::abs(x.v), x.v < 0.0 ? -1.0 : 1.0); }
inline Var fabs(const Var& x) { return abs(x); }
inline Var asin(const Var& x) { return unary(x, std::asin(x.v), 1.0 / std::sqrt(1.0 - x.v * x.v)); }
inline Var acos(const Var& x) { return unary(x, std::acos(x.v), -1.0 / std::sqrt(1.0 - x.v * x.v)); }
inline Var atan(const Var& x) { return unary(x, std::atan(x.v), 1.0 / (1.0 + x.v * x.v)); }
inline Var atan2(const Var& y, const Var& x) {
  const double r2 = x.v * x.v + y.v * y.v;
  return binary(std::atan2(y.v, x.v), y, x.v / r2, x, -y.v / r2);
}
inline Var pow(const Var& x, double p) { return unary(x, std::pow(x.v, p), p * std::pow(x.v, p - 1.0)); }
inline bool isfinite(const Var& x) { return std::isfinite(x.v); }
inline bool isnan(const Var& x) { return std::isnan(x.v); }
inline bool isinf(const Var& x) { return std::isinf(x.v); }

inline double value(const Var& x) { return x.v; }

}  // namespace morphco::ad

namespace Eigen {

template <>
struct NumTraits<morphco::ad::Var> : NumTraits<double> {
  using Real = morphco::ad::Var;
  using NonInteger = morphco::ad::Var;
  using Nested = morphco::ad::Var;
  using Literal = double;
  enum {
    IsComplex = 0,
    IsInteger = 0,
    IsSigned = 1,
    RequireInitialization = 1,
    ReadCost = 1,
    AddCost = 4,
    MulCost = 4
  };
  static inline Real epsilon() { return Real(std::numeric_limits<double>::epsilon()); }
  static inline Real dummy_precision() { return Real(1e-12); }
  static inline Real highest() { return Real(std::numeric_limits<double>::max()); }
  static inline Real lowest() { return Real(std::numeric_limits<double>::lowest()); }
  static inline int digits10() { return std::numeric_limits<double>::digits10; }
};

template <typename BinaryOp>
struct ScalarBinaryOpTraits<morphco::ad::Var, double, BinaryOp> {
  using ReturnType = morphco::ad::Var;
};
template <typename BinaryOp>
struct ScalarBinaryOpTraits<double, morphco::ad::Var, BinaryOp> {
  using ReturnType = morphco::ad::Var;
};

}  // namespace Eigen
