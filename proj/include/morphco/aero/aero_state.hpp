#pragma once

// Per-body aerodynamic state and the quasi-steady aerodynamic wrench.
//
// Body axes are x forward, y left, z up. Flow angles use the usual
// flight-dynamics axes (x forward, y right, z down), so with (u, v, w) the
// airspeed in body axes: α = atan2(−w, u), β = asin(−v/‖V‖). The wind frame W
// has x along the airspeed, z down; R_W maps W to world.

#include "morphco/ad/dual.hpp"
#include "morphco/common/types.hpp"

#include <cmath>

namespace morphco::aero {

// Below this airspeed the flow angles are undefined and set to zero.
inline constexpr double kMinAirspeed = 1e-6;

struct AirProperties {
  double density = 1.225;                 // kg/m³
  double kinematic_viscosity = 1.46e-5;   // m²/s
};

struct AeroGeometry {
  double area = 0.0;          // S [m²]
  double chord = 0.0;         // c [m]
  double span = 0.0;          // b [m]
  double reynolds_length = 0.0;

  void validate() const {
    if (!(area > 0.0 && chord > 0.0 && span > 0.0 && reynolds_length > 0.0))
      throw Error("aero geometry: area, chord, span and Reynolds length must be positive");
  }
};

template <class S>
struct AeroState {
  S alpha{0.0};
  S beta{0.0};
  S reynolds{0.0};
  S airspeed{0.0};
  Mat3<S> wind_rotation = Mat3<S>::Identity();
  bool degenerate = false;
};

template <class S>
struct Wrench {
  Vec3<S> force = Vec3<S>::Zero();
  Vec3<S> moment = Vec3<S>::Zero();
};

// Rotation from wind axes to (x forward, y right, z down) body axes.
template <class S>
Mat3<S> wind_to_body(const S& alpha, const S& beta) {
  using std::cos;
  using std::sin;
  const S ca = cos(alpha), sa = sin(alpha), cb = cos(beta), sb = sin(beta);
  Mat3<S> r;
  r << ca * cb, -ca * sb, -sa, sb, cb, S(0.0), sa * cb, -sa * sb, ca;
  return r;
}

// `rotation` is the world orientation of the aero frame A, `velocity` the world
// velocity of its origin.
template <class S>
AeroState<S> compute_aero_state(const Mat3<S>& rotation, const Vec3<S>& velocity,
                                const Eigen::Vector3d& wind, const AeroGeometry& geometry,
                                const AirProperties& air) {
  using std::asin;
  using std::atan2;
  using std::sqrt;
  AeroState<S> st;
  const Vec3<S> rel = velocity - wind.cast<S>();
  const Vec3<S> body = rotation.transpose() * rel;
  const S v2 = body.squaredNorm();
  const Mat3<S> flip = Eigen::Vector3d(1.0, -1.0, -1.0).asDiagonal().toDenseMatrix().cast<S>();
  if (ad::value(v2) < kMinAirspeed * kMinAirspeed) {
    st.degenerate = true;
    st.wind_rotation = rotation * flip;
    return st;
  }
  st.airspeed = sqrt(v2);
  st.alpha = atan2(S(-body.z()), body.x());
  S ratio = -body.y() / st.airspeed;
  if (ratio > 1.0) ratio = S(1.0);
  if (ratio < -1.0) ratio = S(-1.0);
  st.beta = asin(ratio);
  st.reynolds = st.airspeed * (geometry.reynolds_length / air.kinematic_viscosity);
  st.wind_rotation = rotation * flip * wind_to_body<S>(st.alpha, st.beta);
  return st;
}

// Coefficient order used throughout: C_D, C_L, C_Y, C_l, C_m, C_n.
enum Coefficient : int { kCD = 0, kCL, kCY, kCl, kCm, kCn };
inline constexpr int kCoefficientCount = 6;
inline constexpr const char* kCoefficientNames[kCoefficientCount] = {"CD", "CL", "CY",
                                                                     "Cl", "Cm", "Cn"};

// f = R_W q S (−C_D, C_Y, −C_L), m = R_W q S (b C_l, c C_m, b C_n), q = ½ϱ‖V‖².
template <class S>
Wrench<S> body_wrench(const AeroState<S>& st, const Vec6<S>& coeff, const AeroGeometry& geometry,
                      double density) {
  Wrench<S> w;
  if (st.degenerate) return w;
  const S qs = (0.5 * density * geometry.area) * st.airspeed * st.airspeed;
  const Vec3<S> f(-coeff[kCD], coeff[kCY], -coeff[kCL]);
  const Vec3<S> m(geometry.span * coeff[kCl], geometry.chord * coeff[kCm],
                  geometry.span * coeff[kCn]);
  w.force = st.wind_rotation * f * qs;
  w.moment = st.wind_rotation * m * qs;
  return w;
}

}  // namespace morphco::aero
