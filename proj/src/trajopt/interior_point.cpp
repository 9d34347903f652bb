#include "morphco/common/types.hpp"
#include "morphco/trajopt/solver.hpp"

#include <Eigen/SparseCholesky>
#include <Eigen/SparseCore>
#include <fmt/format.h>
#include <spdlog/spdlog.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <optional>

namespace morphco::trajopt {

std::string to_string(SolverStatus status) {
  switch (status) {
    case SolverStatus::Solved: return "solved";
    case SolverStatus::Infeasible: return "infeasible";
    case SolverStatus::MaxIterations: return "max-iterations";
    case SolverStatus::NumericFailure: return "numeric-failure";
  }
  return "?";
}

namespace {

using Vec = Eigen::VectorXd;
using SpMat = Eigen::SparseMatrix<double>;
using Triplet = Eigen::Triplet<double>;

constexpr double kBoundInf = 1e19;

// Filter line search.
constexpr double kGammaTheta = 1e-5;
constexpr double kGammaPhi = 1e-8;
constexpr double kGammaAlpha = 0.05;
constexpr double kSwitchDelta = 1.0;
constexpr double kSwitchSTheta = 1.1;
constexpr double kSwitchSPhi = 2.3;
constexpr double kArmijo = 1e-4;
// Barrier update.
constexpr double kKappaEps = 10.0;
constexpr double kKappaMu = 0.2;
constexpr double kThetaMu = 1.5;
constexpr double kKappaSigma = 1e10;
constexpr double kDamping = 1e-4;
// Inertia correction.
constexpr double kDeltaW0 = 1e-4;
constexpr double kDeltaWMin = 1e-20;
constexpr double kDeltaWMax = 1e40;
constexpr double kDeltaC = 1e-9;
constexpr double kMaxGradient = 100.0;
constexpr double kScaleMax = 100.0;

class Run {
 public:
  Run(const NlpProblem& p, const SolverOptions& o) : p_(p), o_(o) {}

  SolverResult solve(const Vec& x0);

 private:
  struct Eval {
    double f = 0.0;
    Vec c;  // unscaled
    Vec g;  // scaled residual of the slack form
    double theta = 0.0;
    double phi = 0.0;
  };

  void setup(const Vec& x0);
  void to_full(const Vec& z, Vec& x) const;
  bool evaluate(const Vec& z, Eval& e);
  void residual(const Vec& z, Eval& e) const;
  double barrier(const Vec& z, double f) const;
  Vec barrier_gradient(const Vec& z) const;
  void evaluate_derivatives(const Vec& z);
  double violation(const Vec& c) const;
  void least_squares_multipliers();
  bool factorize(const Vec& diag, bool allow_correction);
  Vec solve_kkt(const Vec& rhs);
  void assemble(const Vec& diag, double delta_c);
  bool restoration(SolverResult& result);
  void safeguard_bound_multipliers();
  double fraction_to_boundary(const Vec& v, const Vec& dv, double tau, bool primal) const;
  int first_bad_row(const Vec& c) const;

  const NlpProblem& p_;
  const SolverOptions& o_;

  int n_ = 0, m_ = 0, nf_ = 0, ns_ = 0, nz_ = 0;
  std::vector<int> free_, col_map_, slack_of_row_;
  Vec x_full_;
  double sf_ = 1.0;
  Vec dc_;
  Vec lo_, hi_;
  std::vector<char> has_lo_, has_hi_;
  Vec target_;  // scaled equality right-hand side (unused for slack rows)

  Vec z_, y_, zl_, zu_;
  double mu_ = 0.1;
  Eval cur_;
  Vec grad_;  // scaled, free variables
  Vec jac_values_;
  SpMat a_;   // scaled m × nz
  Vec hess_values_;
  bool have_hessian_pattern_ = false;

  SpMat kkt_;
  Eigen::SimplicialLDLT<SpMat, Eigen::Lower> ldlt_;
  bool analyzed_ = false;
  double delta_w_last_ = 0.0;
  double delta_c_ = kDeltaC;

  std::vector<std::pair<double, double>> filter_;
  double theta_max_ = 0.0, theta_min_ = 0.0;

  SolverStats stats_;
};

void Run::to_full(const Vec& z, Vec& x) const {
  x = x_full_;
  for (int i = 0; i < nf_; ++i) x[free_[i]] = z[i];
}

void Run::setup(const Vec& x0) {
  n_ = p_.n;
  m_ = p_.m;
  col_map_.assign(n_, -1);
  free_.clear();
  x_full_ = x0;
  for (int i = 0; i < n_; ++i) {
    const double lo = p_.x_lower[i], hi = p_.x_upper[i];
    if (hi - lo <= 1e-14 * std::max(1.0, std::abs(lo))) {
      x_full_[i] = lo;
    } else {
      col_map_[i] = static_cast<int>(free_.size());
      free_.push_back(i);
    }
  }
  nf_ = static_cast<int>(free_.size());
  slack_of_row_.assign(m_, -1);
  ns_ = 0;
  for (int j = 0; j < m_; ++j) {
    const double lo = p_.c_lower[j], hi = p_.c_upper[j];
    if (hi - lo > 1e-14 * std::max(1.0, std::abs(lo))) slack_of_row_[j] = ns_++;
  }
  nz_ = nf_ + ns_;
  lo_ = Vec::Constant(nz_, -kBoundInf);
  hi_ = Vec::Constant(nz_, kBoundInf);
  has_lo_.assign(nz_, 0);
  has_hi_.assign(nz_, 0);
  for (int i = 0; i < nf_; ++i) {
    const double lo = p_.x_lower[free_[i]], hi = p_.x_upper[free_[i]];
    if (lo > -kBoundInf) {
      lo_[i] = lo;
      has_lo_[i] = 1;
    }
    if (hi < kBoundInf) {
      hi_[i] = hi;
      has_hi_[i] = 1;
    }
  }
  dc_ = Vec::Ones(m_);
  target_ = Vec::Zero(m_);
  z_ = Vec::Zero(nz_);
  for (int i = 0; i < nf_; ++i) z_[i] = x0[free_[i]];
}

double Run::violation(const Vec& c) const {
  double v = 0.0;
  for (int j = 0; j < m_; ++j) v = std::max({v, p_.c_lower[j] - c[j], c[j] - p_.c_upper[j]});
  return v;
}

int Run::first_bad_row(const Vec& c) const {
  for (int j = 0; j < c.size(); ++j)
    if (!std::isfinite(c[j])) return j;
  return -1;
}

void Run::residual(const Vec& z, Eval& e) const {
  e.g.resize(m_);
  for (int j = 0; j < m_; ++j) {
    const int s = slack_of_row_[j];
    e.g[j] = dc_[j] * e.c[j] - (s >= 0 ? z[nf_ + s] : target_[j]);
  }
  e.theta = e.g.lpNorm<1>();
  e.phi = barrier(z, e.f);
}

bool Run::evaluate(const Vec& z, Eval& e) {
  Vec x;
  to_full(z, x);
  ++stats_.function_evaluations;
  e.f = p_.objective(x);
  e.c.resize(m_);
  p_.constraints(x, e.c);
  if (!std::isfinite(e.f) || !e.c.allFinite()) return false;
  residual(z, e);
  return std::isfinite(e.phi);
}

double Run::barrier(const Vec& z, double f) const {
  double phi = sf_ * f;
  for (int i = 0; i < nz_; ++i) {
    if (has_lo_[i]) {
      phi -= mu_ * std::log(z[i] - lo_[i]);
      if (!has_hi_[i]) phi += kDamping * mu_ * (z[i] - lo_[i]);
    }
    if (has_hi_[i]) {
      phi -= mu_ * std::log(hi_[i] - z[i]);
      if (!has_lo_[i]) phi += kDamping * mu_ * (hi_[i] - z[i]);
    }
  }
  return phi;
}

Vec Run::barrier_gradient(const Vec& z) const {
  Vec g = Vec::Zero(nz_);
  g.head(nf_) = grad_;
  for (int i = 0; i < nz_; ++i) {
    if (has_lo_[i]) {
      g[i] -= mu_ / (z[i] - lo_[i]);
      if (!has_hi_[i]) g[i] += kDamping * mu_;
    }
    if (has_hi_[i]) {
      g[i] += mu_ / (hi_[i] - z[i]);
      if (!has_lo_[i]) g[i] -= kDamping * mu_;
    }
  }
  return g;
}

void Run::evaluate_derivatives(const Vec& z) {
  Vec x;
  to_full(z, x);
  Vec grad(n_);
  p_.gradient(x, grad);
  grad_.resize(nf_);
  for (int i = 0; i < nf_; ++i) grad_[i] = sf_ * grad[free_[i]];
  jac_values_.resize(static_cast<int>(p_.jac_rows.size()));
  p_.jacobian(x, jac_values_);
  std::vector<Triplet> t;
  t.reserve(p_.jac_rows.size() + ns_);
  for (size_t k = 0; k < p_.jac_rows.size(); ++k) {
    const int col = col_map_[p_.jac_cols[k]];
    if (col < 0) continue;
    const int row = p_.jac_rows[k];
    t.emplace_back(row, col, dc_[row] * jac_values_[static_cast<int>(k)]);
  }
  for (int j = 0; j < m_; ++j)
    if (slack_of_row_[j] >= 0) t.emplace_back(j, nf_ + slack_of_row_[j], -1.0);
  a_.resize(m_, nz_);
  a_.setFromTriplets(t.begin(), t.end());
}

void Run::assemble(const Vec& diag, double delta_c) {
  const int dim = nz_ + m_;
  std::vector<Triplet> t;
  t.reserve(hess_values_.size() + dim + a_.nonZeros());
  // The pattern stays fixed across calls; a disabled Hessian enters as zeros.
  for (size_t k = 0; k < p_.hess_rows.size(); ++k) {
    const int r = col_map_[p_.hess_rows[k]], c = col_map_[p_.hess_cols[k]];
    if (r < 0 || c < 0) continue;
    t.emplace_back(r, c, have_hessian_pattern_ ? hess_values_[static_cast<int>(k)] : 0.0);
  }
  for (int i = 0; i < nz_; ++i) t.emplace_back(i, i, diag[i]);
  for (int k = 0; k < a_.outerSize(); ++k)
    for (SpMat::InnerIterator it(a_, k); it; ++it) t.emplace_back(nz_ + it.row(), it.col(), it.value());
  for (int j = 0; j < m_; ++j) t.emplace_back(nz_ + j, nz_ + j, -delta_c);
  kkt_.resize(dim, dim);
  kkt_.setFromTriplets(t.begin(), t.end());
}

// Factorizes the KKT matrix with `diag` on the primal block, raising a
// multiple of the identity until the inertia is (nz, m, 0).
bool Run::factorize(const Vec& diag, bool allow_correction) {
  auto attempt = [&](double delta_w) {
    assemble(diag + Vec::Constant(nz_, delta_w), delta_c_);
    if (!analyzed_) {
      ldlt_.analyzePattern(kkt_);
      analyzed_ = true;
    }
    ldlt_.factorize(kkt_);
    ++stats_.factorizations;
    if (ldlt_.info() != Eigen::Success) return false;
    const Vec d = ldlt_.vectorD();
    int pos = 0, neg = 0;
    for (int i = 0; i < d.size(); ++i) {
      if (!std::isfinite(d[i])) return false;
      if (d[i] > 0.0) ++pos;
      else if (d[i] < 0.0) ++neg;
    }
    return pos == nz_ && neg == m_;
  };
  if (attempt(0.0)) return true;
  if (!allow_correction) return false;
  double delta_w = delta_w_last_ == 0.0 ? kDeltaW0 : std::max(kDeltaWMin, delta_w_last_ / 3.0);
  const double grow = delta_w_last_ == 0.0 ? 100.0 : 8.0;
  while (delta_w <= kDeltaWMax) {
    if (attempt(delta_w)) {
      delta_w_last_ = delta_w;
      return true;
    }
    delta_w *= grow;
  }
  return false;
}

Vec Run::solve_kkt(const Vec& rhs) {
  Vec sol = ldlt_.solve(rhs);
  // Refine against the unregularized matrix.
  auto apply = [&](const Vec& v) {
    Vec out = kkt_.selfadjointView<Eigen::Lower>() * v;
    out.tail(m_) += delta_c_ * v.tail(m_);
    return out;
  };
  Vec r = rhs - apply(sol);
  double rn = r.lpNorm<Eigen::Infinity>();
  for (int it = 0; it < 5 && rn > 1e-12 * (1.0 + rhs.lpNorm<Eigen::Infinity>()); ++it) {
    const Vec cand = sol + ldlt_.solve(r);
    const Vec rc = rhs - apply(cand);
    const double cn = rc.lpNorm<Eigen::Infinity>();
    if (!(cn < rn)) break;
    sol = cand;
    r = rc;
    rn = cn;
  }
  return sol;
}

void Run::least_squares_multipliers() {
  y_ = Vec::Zero(m_);
  if (m_ == 0) return;
  // [I Aᵀ; A 0] [w; y] = [−(∇f − z_L + z_U); 0]
  const bool had = have_hessian_pattern_;
  have_hessian_pattern_ = false;
  const bool ok = factorize(Vec::Ones(nz_), false);
  have_hessian_pattern_ = had;
  if (!ok) return;
  Vec rhs = Vec::Zero(nz_ + m_);
  rhs.head(nf_) = -grad_;
  rhs.head(nz_) += zl_ - zu_;
  const Vec sol = solve_kkt(rhs);
  const Vec y = sol.tail(m_);
  if (y.allFinite() && y.lpNorm<Eigen::Infinity>() <= 1e3) y_ = y;
}

void Run::safeguard_bound_multipliers() {
  for (int i = 0; i < nz_; ++i) {
    if (has_lo_[i]) {
      const double s = z_[i] - lo_[i];
      zl_[i] = std::clamp(zl_[i], mu_ / (kKappaSigma * s), kKappaSigma * mu_ / s);
    }
    if (has_hi_[i]) {
      const double s = hi_[i] - z_[i];
      zu_[i] = std::clamp(zu_[i], mu_ / (kKappaSigma * s), kKappaSigma * mu_ / s);
    }
  }
}

// Largest step in (0, 1] keeping v + α dv at least a fraction (1 − τ) away from
// the bounds (primal) or from zero (bound multipliers).
double Run::fraction_to_boundary(const Vec& v, const Vec& dv, double tau, bool primal) const {
  double alpha = 1.0;
  for (int i = 0; i < nz_; ++i) {
    if (primal) {
      if (has_lo_[i] && dv[i] < 0.0) alpha = std::min(alpha, -tau * (v[i] - lo_[i]) / dv[i]);
      if (has_hi_[i] && dv[i] > 0.0) alpha = std::min(alpha, tau * (hi_[i] - v[i]) / dv[i]);
    } else if (dv[i] < 0.0 && v[i] > 0.0) {
      alpha = std::min(alpha, -tau * v[i] / dv[i]);
    }
  }
  return alpha;
}

// Levenberg-Marquardt on ½‖g‖² plus a small barrier, until the main filter
// accepts the point. Fails at a stationary point of the infeasibility.
bool Run::restoration(SolverResult& result) {
  const double theta_start = cur_.theta;
  const double phi_start = cur_.phi;
  filter_.emplace_back((1.0 - kGammaTheta) * theta_start, phi_start - kGammaPhi * theta_start);
  const double mu_main = mu_;
  const double mu_r = std::max(mu_, cur_.g.lpNorm<Eigen::Infinity>() * 1e-2);
  double zeta = 1e-2;
  const bool had = have_hessian_pattern_;
  have_hessian_pattern_ = false;

  auto merit = [&](const Vec& z, const Vec& g) {
    double b = 0.0;
    for (int i = 0; i < nz_; ++i) {
      if (has_lo_[i]) b -= std::log(z[i] - lo_[i]);
      if (has_hi_[i]) b -= std::log(hi_[i] - z[i]);
    }
    return 0.5 * g.squaredNorm() + mu_r * b;
  };

  bool success = false;
  std::string reason = "iteration limit";
  for (int it = 0; it < o_.max_restoration_iterations; ++it) {
    ++stats_.restoration_iterations;
    // Barrier gradient and Hessian of the restoration merit.
    Vec bg = Vec::Zero(nz_), bh = Vec::Zero(nz_);
    for (int i = 0; i < nz_; ++i) {
      if (has_lo_[i]) {
        const double s = z_[i] - lo_[i];
        bg[i] -= mu_r / s;
        bh[i] += mu_r / (s * s);
      }
      if (has_hi_[i]) {
        const double s = hi_[i] - z_[i];
        bg[i] += mu_r / s;
        bh[i] += mu_r / (s * s);
      }
    }
    const Vec atg = a_.transpose() * cur_.g;
    if ((atg + bg).lpNorm<Eigen::Infinity>() <= 1e-9 * std::max(1.0, cur_.g.lpNorm<Eigen::Infinity>()) &&
        violation(cur_.c) > o_.constraint_tolerance) {
      reason = "stationary point of the infeasibility";
      break;
    }

    // [ζI + Σ_R, Aᵀ; A, −I] [dz; dy] = −[∇B; g]
    const double saved_dc = delta_c_;
    delta_c_ = 1.0;
    bool ok = factorize(Vec::Constant(nz_, zeta) + bh, false);
    Vec dz;
    if (ok) {
      Vec rhs(nz_ + m_);
      rhs.head(nz_) = -bg;
      rhs.tail(m_) = -cur_.g;
      dz = ldlt_.solve(rhs).head(nz_);
      ok = dz.allFinite();
    }
    delta_c_ = saved_dc;
    if (!ok) {
      zeta *= 10.0;
      if (zeta > 1e12) {
        reason = "no progress on the infeasibility";
        break;
      }
      continue;
    }
    const double amax = fraction_to_boundary(z_, dz, 0.99, true);
    dz *= amax;
    const Vec gl = cur_.g + a_ * dz;
    const double m0 = merit(z_, cur_.g);
    const double model = 0.5 * gl.squaredNorm() + (m0 - 0.5 * cur_.g.squaredNorm()) + bg.dot(dz) +
                         0.5 * dz.dot(bh.cwiseProduct(dz));
    const double pred = m0 - model;

    Eval trial;
    const Vec zt = z_ + dz;
    const bool finite = evaluate(zt, trial);
    const double actual = finite ? m0 - merit(zt, trial.g) : -1.0;
    if (!(pred > 0.0) || !finite || actual < 1e-4 * pred) {
      zeta *= 10.0;
      if (zeta > 1e12) {
        reason = "no progress on the infeasibility";
        break;
      }
      continue;
    }
    zeta = std::max(1e-12, zeta / 3.0);
    z_ = zt;
    cur_ = trial;
    evaluate_derivatives(z_);
    if (violation(cur_.c) <= 0.1 * o_.constraint_tolerance) {
      success = true;
      break;
    }
    bool in_filter = false;
    for (const auto& [tf, pf] : filter_) in_filter = in_filter || (cur_.theta >= tf && cur_.phi >= pf);
    if (!in_filter && cur_.theta <= 0.9 * theta_start && cur_.theta <= theta_max_) {
      success = true;
      break;
    }
  }
  have_hessian_pattern_ = had;
  mu_ = mu_main;
  residual(z_, cur_);
  if (!success) {
    result.message = fmt::format("feasibility restoration failed ({}), violation {:.3g}", reason,
                                 violation(cur_.c));
    return false;
  }
  for (int i = 0; i < nz_; ++i) {
    if (has_lo_[i]) zl_[i] = std::min(std::max(zl_[i], 1e-8), 1e3);
    if (has_hi_[i]) zu_[i] = std::min(std::max(zu_[i], 1e-8), 1e3);
  }
  safeguard_bound_multipliers();
  least_squares_multipliers();
  return true;
}

SolverResult Run::solve(const Vec& x0) {
  const auto t0 = std::chrono::steady_clock::now();
  SolverResult result;
  p_.validate();
  if (x0.size() != p_.n) throw Error("solver: initial guess has wrong dimension");
  setup(x0);
  auto finish = [&](SolverStatus status, std::string msg) {
    result.status = status;
    if (result.message.empty()) result.message = std::move(msg);
    Vec x;
    to_full(z_, x);
    result.x = x;
    result.objective = cur_.f;
    result.max_violation = std::isfinite(cur_.f) && cur_.c.allFinite() ? max_violation(p_, x)
                                                                       : std::numeric_limits<double>::infinity();
    result.lambda = y_.size() == m_ ? Vec(dc_.cwiseProduct(y_) / sf_) : Vec::Zero(m_);
    stats_.final_mu = mu_;
    stats_.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    result.stats = stats_;
    return result;
  };

  // Push free variables inside their bounds.
  for (int i = 0; i < nf_; ++i) {
    const double lo = lo_[i], hi = hi_[i];
    const double kappa = o_.bound_push;
    const double range = (has_lo_[i] && has_hi_[i]) ? hi - lo : std::numeric_limits<double>::infinity();
    if (has_lo_[i]) z_[i] = std::max(z_[i], lo + std::min(kappa * std::max(1.0, std::abs(lo)), kappa * range));
    if (has_hi_[i]) z_[i] = std::min(z_[i], hi - std::min(kappa * std::max(1.0, std::abs(hi)), kappa * range));
  }
  cur_.c.resize(m_);
  {
    Vec x;
    to_full(z_, x);
    cur_.f = p_.objective(x);
    p_.constraints(x, cur_.c);
    ++stats_.function_evaluations;
    if (!std::isfinite(cur_.f) || !cur_.c.allFinite()) {
      result.failed_row = first_bad_row(cur_.c);
      return finish(SolverStatus::NumericFailure,
                    result.failed_row >= 0 ? "non-finite constraint at " + p_.label(result.failed_row)
                                           : "non-finite objective at the initial point");
    }
  }
  // Gradient-based scaling at the starting point.
  evaluate_derivatives(z_);
  if (o_.scaling) {
    const double gmax = grad_.size() ? grad_.lpNorm<Eigen::Infinity>() : 0.0;
    sf_ = gmax > kMaxGradient ? kMaxGradient / gmax : 1.0;
    Vec rowmax = Vec::Zero(m_);
    for (size_t k = 0; k < p_.jac_rows.size(); ++k)
      if (col_map_[p_.jac_cols[k]] >= 0)
        rowmax[p_.jac_rows[k]] = std::max(rowmax[p_.jac_rows[k]], std::abs(jac_values_[static_cast<int>(k)]));
    for (int j = 0; j < m_; ++j) dc_[j] = rowmax[j] > kMaxGradient ? kMaxGradient / rowmax[j] : 1.0;
  }
  for (int j = 0; j < m_; ++j) {
    const int s = slack_of_row_[j];
    if (s < 0) {
      target_[j] = dc_[j] * p_.c_lower[j];
      continue;
    }
    const int i = nf_ + s;
    if (p_.c_lower[j] > -kBoundInf) {
      lo_[i] = dc_[j] * p_.c_lower[j];
      has_lo_[i] = 1;
    }
    if (p_.c_upper[j] < kBoundInf) {
      hi_[i] = dc_[j] * p_.c_upper[j];
      has_hi_[i] = 1;
    }
    double v = dc_[j] * cur_.c[j];
    const double kappa = o_.bound_push;
    const double range = (has_lo_[i] && has_hi_[i]) ? hi_[i] - lo_[i] : std::numeric_limits<double>::infinity();
    if (has_lo_[i]) v = std::max(v, lo_[i] + std::min(kappa * std::max(1.0, std::abs(lo_[i])), kappa * range));
    if (has_hi_[i]) v = std::min(v, hi_[i] - std::min(kappa * std::max(1.0, std::abs(hi_[i])), kappa * range));
    z_[i] = v;
  }
  evaluate_derivatives(z_);
  mu_ = o_.mu_init;
  residual(z_, cur_);
  zl_ = Vec::Zero(nz_);
  zu_ = Vec::Zero(nz_);
  for (int i = 0; i < nz_; ++i) {
    if (has_lo_[i]) zl_[i] = 1.0;
    if (has_hi_[i]) zu_[i] = 1.0;
  }
  hess_values_.resize(static_cast<int>(p_.hess_rows.size()));
  have_hessian_pattern_ = static_cast<bool>(p_.hessian);
  least_squares_multipliers();

  theta_max_ = 1e4 * std::max(1.0, cur_.theta);
  theta_min_ = 1e-4 * std::max(1.0, cur_.theta);
  const double mu_min = o_.tolerance / 10.0;

  for (int iter = 0;; ++iter) {
    stats_.iterations = iter;
    // Optimality measures.
    Vec grad_lag = Vec::Zero(nz_);
    grad_lag.head(nf_) = grad_;
    if (m_) grad_lag += a_.transpose() * y_;
    grad_lag += zu_ - zl_;
    double compl0 = 0.0, compl_mu = 0.0, zsum = 0.0;
    int nb = 0;
    for (int i = 0; i < nz_; ++i) {
      if (has_lo_[i]) {
        const double c = (z_[i] - lo_[i]) * zl_[i];
        compl0 = std::max(compl0, c);
        compl_mu = std::max(compl_mu, std::abs(c - mu_));
        zsum += zl_[i];
        ++nb;
      }
      if (has_hi_[i]) {
        const double c = (hi_[i] - z_[i]) * zu_[i];
        compl0 = std::max(compl0, c);
        compl_mu = std::max(compl_mu, std::abs(c - mu_));
        zsum += zu_[i];
        ++nb;
      }
    }
    const double s_d = std::max(kScaleMax, (y_.lpNorm<1>() + zsum) / std::max(1, m_ + nb)) / kScaleMax;
    const double s_c = std::max(kScaleMax, zsum / std::max(1, nb)) / kScaleMax;
    const double dual_inf = nz_ ? grad_lag.lpNorm<Eigen::Infinity>() : 0.0;
    const double viol = violation(cur_.c);
    stats_.stationarity = dual_inf / s_d;
    stats_.complementarity = compl0 / s_c;
    if (o_.verbose)
      spdlog::debug("ip {:4d} f={:.6e} viol={:.2e} dual={:.2e} compl={:.2e} mu={:.1e} dw={:.1e}", iter, cur_.f,
                    viol, dual_inf / s_d, compl0 / s_c, mu_, delta_w_last_);
    if (dual_inf / s_d <= o_.tolerance && compl0 / s_c <= o_.tolerance && viol <= o_.constraint_tolerance)
      return finish(SolverStatus::Solved, "converged");
    if (iter >= o_.max_iterations) return finish(SolverStatus::MaxIterations, "iteration limit reached");

    // Barrier update.
    const double inf_g = m_ ? cur_.g.lpNorm<Eigen::Infinity>() : 0.0;
    while (mu_ > mu_min) {
      const double e_mu = std::max({dual_inf / s_d, inf_g, compl_mu / s_c});
      if (e_mu > kKappaEps * mu_) break;
      mu_ = std::max(mu_min, std::min(kKappaMu * mu_, std::pow(mu_, kThetaMu)));
      filter_.clear();
      compl_mu = 0.0;
      for (int i = 0; i < nz_; ++i) {
        if (has_lo_[i]) compl_mu = std::max(compl_mu, std::abs((z_[i] - lo_[i]) * zl_[i] - mu_));
        if (has_hi_[i]) compl_mu = std::max(compl_mu, std::abs((hi_[i] - z_[i]) * zu_[i] - mu_));
      }
      residual(z_, cur_);
    }
    stats_.mu_history.push_back(mu_);

    // Newton step.
    if (have_hessian_pattern_) {
      Vec x;
      to_full(z_, x);
      p_.hessian(x, sf_, Vec(dc_.cwiseProduct(y_)), hess_values_);
      ++stats_.hessian_evaluations;
      if (!hess_values_.allFinite()) return finish(SolverStatus::NumericFailure, "non-finite Hessian");
    }
    Vec sigma = Vec::Zero(nz_);
    for (int i = 0; i < nz_; ++i) {
      if (has_lo_[i]) sigma[i] += zl_[i] / (z_[i] - lo_[i]);
      if (has_hi_[i]) sigma[i] += zu_[i] / (hi_[i] - z_[i]);
    }
    if (!factorize(sigma, true)) return finish(SolverStatus::NumericFailure, "KKT factorization failed");
    const Vec grad_phi = barrier_gradient(z_);
    Vec rhs(nz_ + m_);
    rhs.head(nz_) = -(grad_phi + (m_ ? Vec(a_.transpose() * y_) : Vec::Zero(nz_)));
    rhs.tail(m_) = -cur_.g;
    const Vec sol = solve_kkt(rhs);
    if (!sol.allFinite()) return finish(SolverStatus::NumericFailure, "non-finite Newton step");
    const Vec dz = sol.head(nz_);
    const Vec dy = sol.tail(m_);
    Vec dzl = Vec::Zero(nz_), dzu = Vec::Zero(nz_);
    for (int i = 0; i < nz_; ++i) {
      if (has_lo_[i]) {
        const double s = z_[i] - lo_[i];
        dzl[i] = mu_ / s - zl_[i] - zl_[i] / s * dz[i];
      }
      if (has_hi_[i]) {
        const double s = hi_[i] - z_[i];
        dzu[i] = mu_ / s - zu_[i] + zu_[i] / s * dz[i];
      }
    }
    const double tau = std::max(0.99, 1.0 - mu_);
    const double alpha_max = fraction_to_boundary(z_, dz, tau, true);
    const double alpha_z = std::min(fraction_to_boundary(zl_, dzl, tau, false),
                                    fraction_to_boundary(zu_, dzu, tau, false));

    // Filter line search.
    const double theta = cur_.theta, phi = cur_.phi;
    const double dphi = grad_phi.dot(dz);
    double alpha_min = kGammaAlpha * kGammaTheta;
    if (dphi < 0.0) {
      alpha_min = std::min(kGammaTheta, kGammaPhi * theta / -dphi);
      if (theta <= theta_min_)
        alpha_min = std::min(alpha_min, kSwitchDelta * std::pow(theta, kSwitchSTheta) / std::pow(-dphi, kSwitchSPhi));
      alpha_min *= kGammaAlpha;
    }
    alpha_min = std::max(alpha_min, 1e-14);

    bool tiny = true;
    for (int i = 0; i < nz_ && tiny; ++i) tiny = std::abs(dz[i]) <= 1e-15 * (1.0 + std::abs(z_[i]));

    double alpha = alpha_max;
    bool accepted = false, f_type = false;
    Eval trial;
    for (int ls = 0; ls < 60 && alpha >= alpha_min; ++ls, alpha *= 0.5) {
      const Vec zt = z_ + alpha * dz;
      if (!evaluate(zt, trial)) continue;
      if (tiny) {
        accepted = true;
        break;
      }
      if (trial.theta > theta_max_) continue;
      bool in_filter = false;
      for (const auto& [tf, pf] : filter_) in_filter = in_filter || (trial.theta >= tf && trial.phi >= pf);
      if (in_filter) continue;
      const bool switching = dphi < 0.0 && theta <= theta_min_ &&
                             alpha * std::pow(-dphi, kSwitchSPhi) > kSwitchDelta * std::pow(theta, kSwitchSTheta);
      if (switching) {
        if (trial.phi <= phi + kArmijo * alpha * dphi) {
          accepted = f_type = true;
          break;
        }
      } else if (trial.theta <= (1.0 - kGammaTheta) * theta || trial.phi <= phi - kGammaPhi * theta) {
        accepted = true;
        break;
      }
    }

    if (!accepted) {
      if (!restoration(result)) {
        const double v = violation(cur_.c);
        if (v > o_.constraint_tolerance) return finish(SolverStatus::Infeasible, result.message);
        result.message.clear();
        return finish(SolverStatus::MaxIterations, "line search failed at a feasible point");
      }
      continue;
    }
    if (!f_type) filter_.emplace_back((1.0 - kGammaTheta) * theta, phi - kGammaPhi * theta);
    z_ += alpha * dz;
    cur_ = trial;
    if (m_) y_ += alpha * dy;
    zl_ += alpha_z * dzl;
    zu_ += alpha_z * dzu;
    safeguard_bound_multipliers();
    evaluate_derivatives(z_);
    if (!grad_.allFinite() || !jac_values_.allFinite())
      return finish(SolverStatus::NumericFailure, "non-finite derivatives");
  }
}

}  // namespace

SolverResult InteriorPointSolver::solve(const NlpProblem& problem, const Eigen::VectorXd& x0) const {
  Run run(problem, options_);
  return run.solve(x0);
}

}  // namespace morphco::trajopt
