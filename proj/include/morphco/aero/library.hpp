#pragma once

// Collection of fitted coefficient models: one fuselage model and one wing
// model per discrete aspect ratio.

#include "morphco/aero/coefficient_model.hpp"
#include "morphco/aero/fit.hpp"
#include "morphco/aero/synthetic.hpp"

#include <map>
#include <optional>
#include <string>
#include <vector>

namespace morphco::aero {

class AeroLibrary {
 public:
  void set_fuselage(CoefficientModel model);
  void add_wing(CoefficientModel model);

  bool has_fuselage() const { return fuselage_.has_value(); }
  const CoefficientModel& fuselage() const;
  // Throws LookupError when no model exists for the aspect ratio.
  const CoefficientModel& wing(double aspect_ratio) const;
  std::vector<double> aspect_ratios() const;

  // Reads every *.yaml model in `dir` except manifest.yaml (body and aspect
  // ratio come from the files).
  static AeroLibrary load_directory(const std::string& dir);
  void save_directory(const std::string& dir) const;

  // Fits synthetic tables for the fuselage and each aspect ratio.
  static AeroLibrary synthetic(const std::vector<double>& aspect_ratios,
                               const FitOptions& options = {},
                               const SampleGrid& wing_grid = default_wing_grid(),
                               const SampleGrid& fuselage_grid = default_fuselage_grid());

 private:
  std::optional<CoefficientModel> fuselage_;
  std::map<long, CoefficientModel> wings_;  // keyed by round(1000·AR)
};

// Least-squares (λ = 0) symmetric fits of the coarse synthetic tables for
// every design aspect ratio. Quick to build; used for desk-scale runs.
AeroLibrary desk_library();

// Aspect-ratio grid of the co-design search: 2.0, 2.5, ..., 5.0.
std::vector<double> design_aspect_ratios();

}  // namespace morphco::aero
