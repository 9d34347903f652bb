#pragma once

#include <Eigen/Core>
#include <Eigen/Geometry>

#include <numbers>
#include <stdexcept>
#include <string>

namespace morphco {

template <class S> using Vec3 = Eigen::Matrix<S, 3, 1>;
template <class S> using Vec4 = Eigen::Matrix<S, 4, 1>;
template <class S> using Vec6 = Eigen::Matrix<S, 6, 1>;
template <class S> using VecX = Eigen::Matrix<S, Eigen::Dynamic, 1>;
template <class S> using Mat3 = Eigen::Matrix<S, 3, 3>;
template <class S> using Mat6 = Eigen::Matrix<S, 6, 6>;
template <class S> using MatX = Eigen::Matrix<S, Eigen::Dynamic, Eigen::Dynamic>;

inline constexpr double kPi = std::numbers::pi;
inline constexpr double deg2rad(double deg) { return deg * kPi / 180.0; }
inline constexpr double rad2deg(double rad) { return rad * 180.0 / kPi; }

// Base class of all errors raised by the library. Subclasses name the failure
// category; the message carries the detail (file, line, offending key).
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class LookupError : public Error {
 public:
  using Error::Error;
};

class SchemaError : public Error {
 public:
  using Error::Error;
};

class BoundViolation : public Error {
 public:
  using Error::Error;
};

class NumericError : public Error {
 public:
  using Error::Error;
};

// A caller broke a precondition (e.g. sorting individuals with no fitness).
class ContractError : public Error {
 public:
  using Error::Error;
};

// Missing or unreadable input file.
class IoError : public Error {
 public:
  using Error::Error;
};

// Cast a double-valued Eigen object to scalar type S.
template <class S, class Derived>
auto cast(const Eigen::MatrixBase<Derived>& m) {
  return m.template cast<S>();
}

}  // namespace morphco
