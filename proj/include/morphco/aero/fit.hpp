#pragma once

#include "morphco/aero/coefficient_model.hpp"
#include "morphco/aero/lasso.hpp"
#include "morphco/aero/sample_table.hpp"

#include <array>

namespace morphco::aero {

struct FitOptions {
  BasisConfig basis;
  // Fixed regularization weight for all six coefficients; negative selects λ
  // per coefficient by cross-validation.
  double lambda = -1.0;
  CrossValidationOptions cv;
};

struct FitReport {
  CoefficientModel model;
  std::array<double, kCoefficientCount> lambda{};
  std::array<double, kCoefficientCount> rmse{};
  std::array<int, kCoefficientCount> nonzero{};
  bool rank_deficient = false;
};

// Design matrix of the basis evaluated at every table row.
Eigen::MatrixXd design_matrix(const CoefficientModel& model, const AeroSampleTable& table);

FitReport fit_coefficients(const AeroSampleTable& table, const FitOptions& options = {});

}  // namespace morphco::aero
