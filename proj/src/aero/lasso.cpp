#include "morphco/aero/lasso.hpp"

#include "morphco/common/types.hpp"

#include <Eigen/QR>
#include <spdlog/spdlog.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

namespace morphco::aero {

namespace {

double soft_threshold(double x, double t) {
  if (x > t) return x - t;
  if (x < -t) return x + t;
  return 0.0;
}

}  // namespace

LassoProblem::LassoProblem(const Eigen::MatrixXd& x) {
  const int n = static_cast<int>(x.rows()), p = static_cast<int>(x.cols());
  if (n == 0) throw Error("lasso: empty design matrix");
  mean_ = x.colwise().mean().transpose();
  scale_.resize(p);
  varies_.assign(p, 0);
  z_.resize(n, p);
  for (int j = 0; j < p; ++j) {
    const Eigen::VectorXd centered = x.col(j).array() - mean_[j];
    const double sd = std::sqrt(centered.squaredNorm() / n);
    const bool varies = sd > 1e-12 * (1.0 + std::abs(mean_[j]));
    varies_[j] = varies;
    scale_[j] = varies ? sd : 1.0;
    if (varies)
      z_.col(j) = centered / sd;
    else
      z_.col(j).setZero();
  }
  gram_ = z_.transpose() * z_;
  allowed_ = varies_;
  yc_ = Eigen::VectorXd::Zero(n);
  c_ = Eigen::VectorXd::Zero(p);
}

void LassoProblem::set_response(const Eigen::VectorXd& y, const std::vector<char>& allowed) {
  if (y.size() != z_.rows()) throw Error("lasso: response length does not match design rows");
  if (!allowed.empty() && static_cast<int>(allowed.size()) != features())
    throw Error("lasso: column mask length does not match design columns");
  ymean_ = y.mean();
  yc_ = y.array() - ymean_;
  c_ = z_.transpose() * yc_;
  allowed_ = varies_;
  if (!allowed.empty())
    for (int j = 0; j < features(); ++j) allowed_[j] = allowed_[j] && allowed[j];
}

double LassoProblem::lambda_max() const {
  double m = 0.0;
  for (int j = 0; j < features(); ++j)
    if (allowed_[j]) m = std::max(m, std::abs(c_[j]));
  return m;
}

double LassoProblem::objective(const Eigen::VectorXd& w, double lambda) const {
  return 0.5 * (yc_ - z_ * w).squaredNorm() + lambda * w.lpNorm<1>();
}

LassoResult LassoProblem::finish(Eigen::VectorXd w) const {
  LassoResult r;
  r.weights = Eigen::VectorXd::Zero(features());
  r.intercept = ymean_;
  for (int j = 0; j < features(); ++j) {
    if (!allowed_[j] || w[j] == 0.0) continue;
    r.weights[j] = w[j] / scale_[j];
    r.intercept -= r.weights[j] * mean_[j];
  }
  r.standardized_weights = std::move(w);
  return r;
}

LassoResult LassoProblem::solve_least_squares() const {
  std::vector<int> cols;
  for (int j = 0; j < features(); ++j)
    if (allowed_[j]) cols.push_back(j);
  Eigen::MatrixXd a(rows(), static_cast<Eigen::Index>(cols.size()));
  for (size_t k = 0; k < cols.size(); ++k) a.col(k) = z_.col(cols[k]);
  Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod(a);
  const Eigen::VectorXd sol = cod.solve(yc_);
  Eigen::VectorXd w = Eigen::VectorXd::Zero(features());
  for (size_t k = 0; k < cols.size(); ++k) w[cols[k]] = sol[k];
  LassoResult r = finish(w);
  r.converged = true;
  r.rank_deficient = cod.rank() < static_cast<Eigen::Index>(cols.size());
  if (r.rank_deficient)
    spdlog::warn("lasso: rank-deficient design (rank {} of {}) at lambda = 0, using the "
                 "minimum-norm solution",
                 cod.rank(), cols.size());
  return r;
}

LassoResult LassoProblem::solve(double lambda, const LassoOptions& options,
                                const Eigen::VectorXd* warm_start) const {
  if (!(lambda >= 0.0)) throw Error("lasso: lambda must be non-negative");
  if (lambda == 0.0) return solve_least_squares();

  const int p = features();
  Eigen::VectorXd w = Eigen::VectorXd::Zero(p);
  if (warm_start) {
    if (warm_start->size() != p) throw Error("lasso: warm start has the wrong length");
    for (int j = 0; j < p; ++j)
      if (allowed_[j]) w[j] = (*warm_start)[j];
  }
  Eigen::VectorXd g = gram_ * w;

  std::vector<double> history;
  if (options.record_objective) history.push_back(objective(w, lambda));

  auto update = [&](int j) {
    const double gjj = gram_(j, j);
    const double rho = c_[j] - (g[j] - gjj * w[j]);
    const double next = soft_threshold(rho, lambda) / gjj;
    const double delta = next - w[j];
    if (delta != 0.0) {
      g.noalias() += gram_.col(j) * delta;
      w[j] = next;
    }
    return std::abs(delta);
  };

  int sweeps = 0;
  bool converged = false;
  while (sweeps < options.max_sweeps) {
    // Full sweep over every admissible coordinate.
    double step = 0.0;
    for (int j = 0; j < p; ++j)
      if (allowed_[j]) step = std::max(step, update(j));
    ++sweeps;
    if (options.record_objective) history.push_back(objective(w, lambda));
    if (step < options.tolerance) {
      converged = true;
      break;
    }
    // Iterate on the current support until it settles, then re-check all.
    std::vector<int> active;
    for (int j = 0; j < p; ++j)
      if (allowed_[j] && w[j] != 0.0) active.push_back(j);
    while (sweeps < options.max_sweeps) {
      double inner = 0.0;
      for (int j : active) inner = std::max(inner, update(j));
      ++sweeps;
      if (options.record_objective) history.push_back(objective(w, lambda));
      if (inner < options.tolerance) break;
    }
  }
  if (!converged)
    spdlog::warn("lasso: coordinate descent stopped after {} sweeps without converging", sweeps);
  LassoResult r = finish(w);
  r.sweeps = sweeps;
  r.converged = converged;
  r.objective = std::move(history);
  return r;
}

LassoResult lasso_fit(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, double lambda,
                      const LassoOptions& options) {
  LassoProblem problem(x);
  problem.set_response(y);
  return problem.solve(lambda, options);
}

double lasso_lambda_max(const Eigen::MatrixXd& x, const Eigen::VectorXd& y) {
  LassoProblem problem(x);
  problem.set_response(y);
  return problem.lambda_max();
}

std::vector<CrossValidationResult> lasso_cross_validate(
    const Eigen::MatrixXd& x, const Eigen::MatrixXd& y, const std::vector<std::vector<char>>& masks,
    const CrossValidationOptions& options) {
  const int n = static_cast<int>(x.rows());
  const int k = options.folds;
  if (k < 2 || n < k) throw Error("lasso cross-validation: need at least 2 folds and one row per fold");
  if (y.rows() != n) throw Error("lasso cross-validation: response rows do not match design");
  if (!masks.empty() && static_cast<Eigen::Index>(masks.size()) != y.cols())
    throw Error("lasso cross-validation: one mask per response required");
  if (options.path_length < 1 || !(options.min_ratio > 0.0 && options.min_ratio < 1.0))
    throw Error("lasso cross-validation: invalid path settings");

  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::mt19937_64 rng(options.seed);
  std::shuffle(order.begin(), order.end(), rng);
  std::vector<int> fold_of(n);
  for (int i = 0; i < n; ++i) fold_of[order[i]] = i % k;

  const int responses = static_cast<int>(y.cols());
  std::vector<CrossValidationResult> out(responses);
  LassoProblem full(x);
  for (int r = 0; r < responses; ++r) {
    full.set_response(y.col(r), masks.empty() ? std::vector<char>{} : masks[r]);
    // A constant response gives λ_max = 0; any positive λ then yields zero weights.
    const double lmax = full.lambda_max() > 0.0 ? full.lambda_max() : 1.0;
    auto& res = out[r];
    res.path.resize(options.path_length);
    for (int i = 0; i < options.path_length; ++i) {
      const double t = options.path_length == 1 ? 0.0 : double(i) / (options.path_length - 1);
      res.path[i] = lmax * std::pow(options.min_ratio, t);
    }
    res.error.assign(options.path_length, 0.0);
    res.std_error.assign(options.path_length, 0.0);
  }
  if (responses == 0) return out;

  std::vector<std::vector<std::vector<double>>> fold_err(
      responses, std::vector<std::vector<double>>(options.path_length, std::vector<double>(k)));
  for (int f = 0; f < k; ++f) {
    std::vector<int> train, test;
    for (int i = 0; i < n; ++i) (fold_of[i] == f ? test : train).push_back(i);
    Eigen::MatrixXd xt(train.size(), x.cols()), xv(test.size(), x.cols());
    for (size_t i = 0; i < train.size(); ++i) xt.row(i) = x.row(train[i]);
    for (size_t i = 0; i < test.size(); ++i) xv.row(i) = x.row(test[i]);
    LassoProblem problem(xt);
    for (int r = 0; r < responses; ++r) {
      Eigen::VectorXd yt(train.size()), yv(test.size());
      for (size_t i = 0; i < train.size(); ++i) yt[i] = y(train[i], r);
      for (size_t i = 0; i < test.size(); ++i) yv[i] = y(test[i], r);
      problem.set_response(yt, masks.empty() ? std::vector<char>{} : masks[r]);
      Eigen::VectorXd warm = Eigen::VectorXd::Zero(x.cols());
      for (int i = 0; i < options.path_length; ++i) {
        const LassoResult fit = problem.solve(out[r].path[i], options.lasso, &warm);
        warm = fit.standardized_weights;
        const Eigen::VectorXd pred = (xv * fit.weights).array() + fit.intercept;
        fold_err[r][i][f] = (pred - yv).squaredNorm() / std::max<size_t>(1, test.size());
      }
    }
  }

  for (int r = 0; r < responses; ++r) {
    auto& res = out[r];
    int best = 0;
    for (int i = 0; i < options.path_length; ++i) {
      const auto& e = fold_err[r][i];
      const double mean = std::accumulate(e.begin(), e.end(), 0.0) / k;
      double var = 0.0;
      for (double v : e) var += (v - mean) * (v - mean);
      var /= (k - 1);
      res.error[i] = mean;
      res.std_error[i] = std::sqrt(var / k);
      if (mean < res.error[best]) best = i;
    }
    int chosen = best;
    if (options.one_standard_error) {
      // Largest λ (earliest on the path) within one standard error of the best.
      const double limit = res.error[best] + res.std_error[best];
      for (int i = 0; i <= best; ++i)
        if (res.error[i] <= limit) {
          chosen = i;
          break;
        }
    }
    res.lambda = res.path[chosen];
  }
  return out;
}

}  // namespace morphco::aero
