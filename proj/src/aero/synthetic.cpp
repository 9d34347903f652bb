#include "morphco/aero/synthetic.hpp"

#include <cmath>
#include <functional>

namespace morphco::aero {

namespace {

constexpr double kWingCd0 = 0.02;
constexpr double kWingOswald = 0.9;
constexpr double kWingRe0 = 2e5;
constexpr double kFuselageRe0 = 5e5;

AeroSampleTable tabulate(const SampleGrid& grid, TableMetadata meta,
                         const std::function<Vec6<double>(double, double, double)>& fn) {
  AeroSampleTable t;
  meta.synthetic = true;
  meta.ranges = {grid.alpha_deg.min, grid.alpha_deg.max, grid.beta_deg.min,
                 grid.beta_deg.max,  grid.reynolds.min,  grid.reynolds.max};
  t.meta = meta;
  for (double re : grid.reynolds.values())
    for (double b : grid.beta_deg.values())
      for (double a : grid.alpha_deg.values()) {
        AeroSample s;
        s.alpha = deg2rad(a);
        s.beta = deg2rad(b);
        s.reynolds = re;
        s.coefficients = fn(s.alpha, s.beta, re);
        t.rows.push_back(s);
      }
  return t;
}

}  // namespace

std::vector<double> GridAxis::values() const {
  if (!(step > 0.0) || max < min) throw Error("grid axis: need step > 0 and max >= min");
  std::vector<double> out;
  const int n = static_cast<int>(std::floor((max - min) / step + 1e-9));
  for (int i = 0; i <= n; ++i) out.push_back(min + i * step);
  return out;
}

SampleGrid default_wing_grid() { return {{-10, 10, 2}, {-130, 130, 2}, {0.8e5, 6.0e5, 0.4e5}}; }

SampleGrid default_fuselage_grid() { return {{-10, 10, 2}, {-30, 30, 2}, {2e5, 15e5, 1e5}}; }

SampleGrid coarse_wing_grid() { return {{-10, 10, 2}, {-30, 30, 5}, {0.8e5, 6.0e5, 2.6e5}}; }

SampleGrid coarse_fuselage_grid() { return {{-10, 10, 2}, {-30, 30, 5}, {2e5, 15e5, 6.5e5}}; }

AeroGeometry fuselage_reference_geometry() {
  AeroGeometry g;
  g.chord = 0.75;
  g.span = 0.1;
  g.area = 0.075;
  g.reynolds_length = 0.75;
  return g;
}

Vec6<double> synthetic_wing_coefficients(double ar, double alpha, double beta, double reynolds) {
  const double span_factor = ar / (2.0 + std::sqrt(ar * ar + 4.0));
  const double cl = 2.0 * kPi * span_factor * std::sin(alpha) * std::cos(alpha) * std::cos(beta);
  Vec6<double> c;
  c[kCD] = kWingCd0 * (1.0 - 0.1 * std::log(reynolds / kWingRe0)) + cl * cl / (kPi * ar * kWingOswald);
  c[kCL] = cl;
  c[kCY] = -0.05 * std::sin(beta);
  c[kCl] = -0.05 * std::sin(beta) * std::cos(alpha);
  c[kCm] = -0.02 * std::sin(alpha);
  c[kCn] = 0.01 * std::sin(beta);
  return c;
}

Vec6<double> synthetic_fuselage_coefficients(double alpha, double beta, double reynolds) {
  const double sa = std::sin(alpha), sb = std::sin(beta);
  Vec6<double> c;
  c[kCD] = 0.03 * (1.0 - 0.1 * std::log(reynolds / kFuselageRe0)) + 0.3 * sa * sa + 0.3 * sb * sb;
  c[kCL] = 0.8 * sa * std::cos(alpha) * std::cos(beta);
  c[kCY] = -0.6 * sb * std::cos(alpha);
  c[kCl] = -0.02 * sb;
  c[kCm] = (0.02 - 1.2 * sa) * std::cos(beta);
  c[kCn] = 0.15 * sb;
  return c;
}

AeroSampleTable synthetic_wing_table(double aspect_ratio, const SampleGrid& grid) {
  if (!(aspect_ratio > 0.0)) throw Error("synthetic wing table: aspect ratio must be positive");
  TableMetadata meta;
  meta.body = "wing";
  meta.airfoil = "flat-plate (synthetic)";
  meta.aspect_ratio = aspect_ratio;
  meta.taper_ratio = 1.0;
  return tabulate(grid, meta, [aspect_ratio](double a, double b, double re) {
    return synthetic_wing_coefficients(aspect_ratio, a, b, re);
  });
}

AeroSampleTable synthetic_fuselage_table(const SampleGrid& grid) {
  TableMetadata meta;
  meta.body = "fuselage";
  meta.airfoil = "body of revolution with tail (synthetic)";
  return tabulate(grid, meta, synthetic_fuselage_coefficients);
}

}  // namespace morphco::aero
