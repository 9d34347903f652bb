#include "morphco/trajopt/nlp.hpp"

#include "morphco/common/types.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <utility>

namespace morphco::trajopt {

void NlpProblem::validate() const {
  if (n < 0 || m < 0) throw Error("nlp: negative dimension");
  if (x_lower.size() != n || x_upper.size() != n) throw Error("nlp: variable bounds have wrong size");
  if (c_lower.size() != m || c_upper.size() != m) throw Error("nlp: constraint bounds have wrong size");
  for (int i = 0; i < n; ++i)
    if (!(x_lower[i] <= x_upper[i])) throw Error("nlp: variable " + std::to_string(i) + " has lo > hi");
  for (int j = 0; j < m; ++j)
    if (!(c_lower[j] <= c_upper[j])) throw Error("nlp: row " + label(j) + " has lo > hi");
  if (jac_rows.size() != jac_cols.size() || hess_rows.size() != hess_cols.size())
    throw Error("nlp: pattern row/col lists differ in length");
  for (size_t k = 0; k < jac_rows.size(); ++k)
    if (jac_rows[k] < 0 || jac_rows[k] >= m || jac_cols[k] < 0 || jac_cols[k] >= n)
      throw Error("nlp: Jacobian pattern entry out of range");
  for (size_t k = 0; k < hess_rows.size(); ++k)
    if (hess_cols[k] < 0 || hess_rows[k] < hess_cols[k] || hess_rows[k] >= n)
      throw Error("nlp: Hessian pattern entry not in the lower triangle");
  if (!objective || !gradient || !constraints || !jacobian)
    throw Error("nlp: objective, gradient, constraint and Jacobian callbacks are required");
}

std::string NlpProblem::label(int row) const {
  if (row_label) return row_label(row);
  return "row " + std::to_string(row);
}

double max_violation(const NlpProblem& p, const Eigen::VectorXd& x) {
  double v = 0.0;
  for (int i = 0; i < p.n; ++i) v = std::max({v, p.x_lower[i] - x[i], x[i] - p.x_upper[i]});
  Eigen::VectorXd c(p.m);
  p.constraints(x, c);
  for (int j = 0; j < p.m; ++j) {
    if (!std::isfinite(c[j])) return std::numeric_limits<double>::infinity();
    v = std::max({v, p.c_lower[j] - c[j], c[j] - p.c_upper[j]});
  }
  return v;
}

DerivativeReport derivative_check(const NlpProblem& p, const Eigen::VectorXd& x0, double h) {
  DerivativeReport rep;
  Eigen::VectorXd values(p.jac_rows.size());
  p.jacobian(x0, values);
  // Sum duplicates into a dense column-major map keyed by (col, row).
  std::vector<std::vector<std::pair<int, double>>> cols(p.n);
  for (size_t k = 0; k < p.jac_rows.size(); ++k) {
    auto& col = cols[p.jac_cols[k]];
    auto it = std::find_if(col.begin(), col.end(), [&](const auto& e) { return e.first == p.jac_rows[k]; });
    if (it == col.end())
      col.emplace_back(p.jac_rows[k], values[static_cast<int>(k)]);
    else
      it->second += values[static_cast<int>(k)];
  }
  Eigen::VectorXd grad(p.n);
  p.gradient(x0, grad);

  Eigen::VectorXd x = x0, cp(p.m), cm(p.m), dense(p.m);
  for (int i = 0; i < p.n; ++i) {
    const double step = h * std::max(1.0, std::abs(x0[i]));
    x[i] = x0[i] + step;
    p.constraints(x, cp);
    const double fp = p.objective(x);
    x[i] = x0[i] - step;
    p.constraints(x, cm);
    const double fm = p.objective(x);
    x[i] = x0[i];

    const double gfd = (fp - fm) / (2.0 * step);
    const double gerr = std::abs(grad[i] - gfd) / std::max(1.0, std::abs(gfd));
    if (gerr > rep.max_gradient_error) {
      rep.max_gradient_error = gerr;
      rep.worst_gradient_col = i;
    }

    dense.setZero();
    std::vector<char> declared(p.m, 0);
    for (const auto& [row, v] : cols[i]) {
      dense[row] = v;
      declared[row] = 1;
    }
    for (int j = 0; j < p.m; ++j) {
      const double fd = (cp[j] - cm[j]) / (2.0 * step);
      if (!declared[j]) {
        if (std::abs(fd) > 1e-8) ++rep.missing_entries;
        continue;
      }
      const double err = std::abs(dense[j] - fd) / std::max(1.0, std::abs(fd));
      if (err > rep.max_jacobian_error) {
        rep.max_jacobian_error = err;
        rep.worst_row = j;
        rep.worst_col = i;
      }
    }
  }
  return rep;
}

}  // namespace morphco::trajopt
