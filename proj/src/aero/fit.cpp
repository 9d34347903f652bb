#include "morphco/aero/fit.hpp"

#include <cmath>

namespace morphco::aero {

Eigen::MatrixXd design_matrix(const CoefficientModel& model, const AeroSampleTable& table) {
  Eigen::MatrixXd x(table.rows.size(), model.term_count());
  for (size_t i = 0; i < table.rows.size(); ++i) {
    const AeroSample& s = table.rows[i];
    x.row(i) = model.features(s.alpha, s.beta, s.reynolds).transpose();
  }
  return x;
}

FitReport fit_coefficients(const AeroSampleTable& table, const FitOptions& options) {
  table.validate();
  const ValidityBox& box = table.meta.ranges;
  CoefficientModel model(options.basis, box, std::sqrt(box.reynolds_min * box.reynolds_max));
  model.body = table.meta.body;
  model.aspect_ratio = table.meta.aspect_ratio;
  const int terms = model.term_count();
  if (static_cast<int>(table.rows.size()) <= terms)
    throw Error("aero fit: table has " + std::to_string(table.rows.size()) +
                " rows, basis has " + std::to_string(terms) + " terms");

  const Eigen::MatrixXd x = design_matrix(model, table);
  Eigen::MatrixXd y(table.rows.size(), kCoefficientCount);
  for (size_t i = 0; i < table.rows.size(); ++i) y.row(i) = table.rows[i].coefficients.transpose();

  std::vector<std::vector<char>> masks(kCoefficientCount, std::vector<char>(terms, 1));
  for (int c = 0; c < kCoefficientCount; ++c)
    for (int t = 0; t < terms; ++t) masks[c][t] = term_allowed(options.basis, c, model.terms()[t]);

  FitReport report;
  if (options.lambda < 0.0) {
    const auto cv = lasso_cross_validate(x, y, masks, options.cv);
    for (int c = 0; c < kCoefficientCount; ++c) report.lambda[c] = cv[c].lambda;
  } else {
    report.lambda.fill(options.lambda);
  }

  // The constant term carries the intercept.
  int constant = -1;
  for (int t = 0; t < terms; ++t)
    if (model.terms()[t] == BasisTerm{}) constant = t;

  LassoProblem problem(x);
  for (int c = 0; c < kCoefficientCount; ++c) {
    problem.set_response(y.col(c), masks[c]);
    const LassoResult fit = problem.solve(report.lambda[c], options.cv.lasso);
    report.rank_deficient = report.rank_deficient || fit.rank_deficient;
    Eigen::VectorXd w = fit.weights;
    if (constant >= 0) w[constant] += fit.intercept;
    model.set_weights(c, w);
    const Eigen::VectorXd residual = x * w - y.col(c);
    report.rmse[c] = std::sqrt(residual.squaredNorm() / residual.size());
    report.nonzero[c] = static_cast<int>((w.array() != 0.0).count());
  }
  model.rmse = report.rmse;
  report.model = model;
  return report;
}

}  // namespace morphco::aero
