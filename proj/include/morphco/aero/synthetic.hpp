#pragma once

// Synthetic coefficient tables used when no panel-method data is available.
// Wings follow a flat-plate lift curve with a finite-span correction and a
// parabolic drag polar; the fuselage (with tail surfaces) is statically stable
// in pitch and yaw. Tables produced here are flagged `synthetic` in their
// metadata.

#include "morphco/aero/sample_table.hpp"

namespace morphco::aero {

struct GridAxis {
  double min = 0.0, max = 0.0, step = 1.0;
  std::vector<double> values() const;
};

struct SampleGrid {
  GridAxis alpha_deg, beta_deg, reynolds;
};

SampleGrid default_wing_grid();
SampleGrid default_fuselage_grid();
// Sparser grids for quick desk-scale libraries.
SampleGrid coarse_wing_grid();
SampleGrid coarse_fuselage_grid();

// Reference dimensions the fuselage coefficients are normalized by.
AeroGeometry fuselage_reference_geometry();

Vec6<double> synthetic_wing_coefficients(double aspect_ratio, double alpha, double beta,
                                         double reynolds);
Vec6<double> synthetic_fuselage_coefficients(double alpha, double beta, double reynolds);

AeroSampleTable synthetic_wing_table(double aspect_ratio, const SampleGrid& grid = default_wing_grid());
AeroSampleTable synthetic_fuselage_table(const SampleGrid& grid = default_fuselage_grid());

}  // namespace morphco::aero
