#pragma once

// Sparse sinusoidal coefficient models over (α, β, Re).
//
// Each basis term is A(kα)·B(mβ)·[log(Re/Re₀)] with A, B ∈ {sin, cos} and
// k, m ∈ 0..3 by default; sin(0·) terms are dropped. The term "1" is the
// constant. Weights are stored on the raw (unscaled) features.

#include "morphco/aero/aero_state.hpp"
#include "morphco/common/types.hpp"

#include <array>
#include <string>
#include <vector>

namespace morphco::aero {

struct BasisTerm {
  int alpha_harmonic = 0;
  bool alpha_sin = false;
  int beta_harmonic = 0;
  bool beta_sin = false;
  bool log_reynolds = false;

  // Parity of the term in β: true when the term is even (cosine factor).
  bool even_in_beta() const { return !beta_sin; }
  std::string name() const;
  static BasisTerm parse(const std::string& name);
  bool operator==(const BasisTerm&) const = default;
};

struct BasisConfig {
  int alpha_harmonics = 3;
  int beta_harmonics = 3;
  bool log_reynolds = true;
  // Restrict C_D, C_L, C_m to even and C_Y, C_l, C_n to odd terms in β.
  bool symmetric = false;

  std::vector<BasisTerm> terms() const;
  bool operator==(const BasisConfig&) const = default;
};

// True when coefficient `c` may use `term` under the basis symmetry setting.
bool term_allowed(const BasisConfig& basis, int coefficient, const BasisTerm& term);

struct ValidityBox {
  double alpha_min_deg = -10.0, alpha_max_deg = 10.0;
  double beta_min_deg = -30.0, beta_max_deg = 30.0;
  double reynolds_min = 1e5, reynolds_max = 1e6;

  bool contains(double alpha, double beta, double reynolds) const;
  bool operator==(const ValidityBox&) const = default;
};

class CoefficientModel {
 public:
  CoefficientModel() = default;
  CoefficientModel(BasisConfig basis, ValidityBox box, double reference_reynolds);

  const BasisConfig& basis() const { return basis_; }
  const std::vector<BasisTerm>& terms() const { return terms_; }
  const ValidityBox& box() const { return box_; }
  double reference_reynolds() const { return re0_; }
  int term_count() const { return static_cast<int>(terms_.size()); }

  const Eigen::VectorXd& weights(int coefficient) const { return weights_[coefficient]; }
  void set_weights(int coefficient, const Eigen::VectorXd& w);

  // Fit diagnostics carried along with the model.
  std::array<double, kCoefficientCount> rmse{};
  std::string body;
  double aspect_ratio = 0.0;

  // Raw feature row for one sample (no clamping).
  Eigen::VectorXd features(double alpha, double beta, double reynolds) const;

  // Coefficients at (α, β, Re). Arguments are clamped to the validity box;
  // `extrapolated` reports whether clamping happened.
  template <class S>
  Vec6<S> evaluate(const S& alpha, const S& beta, const S& reynolds,
                   bool* extrapolated = nullptr) const;

  bool operator==(const CoefficientModel& o) const;

 private:
  BasisConfig basis_;
  std::vector<BasisTerm> terms_;
  ValidityBox box_;
  double re0_ = 1e5;
  std::array<Eigen::VectorXd, kCoefficientCount> weights_;
};

// Silences the extrapolation warning on the current thread while alive.
class QuietExtrapolation {
 public:
  QuietExtrapolation();
  ~QuietExtrapolation();
  QuietExtrapolation(const QuietExtrapolation&) = delete;
  QuietExtrapolation& operator=(const QuietExtrapolation&) = delete;

 private:
  bool previous_;
};

// Double-valued evaluation that logs a warning when extrapolating.
Vec6<double> eval_coefficients(const CoefficientModel& model, double alpha, double beta,
                               double reynolds);

template <class S>
Wrench<S> body_wrench(const AeroState<S>& st, const CoefficientModel& model,
                      const AeroGeometry& geometry, double density) {
  if (st.degenerate) return {};
  return body_wrench<S>(st, model.evaluate<S>(st.alpha, st.beta, st.reynolds), geometry, density);
}

// YAML serialization; numbers are written with 17 significant digits so a
// save/load cycle reproduces the model bit for bit.
void save_model(const CoefficientModel& model, const std::string& path);
CoefficientModel load_model(const std::string& path);
std::string model_to_yaml(const CoefficientModel& model);
CoefficientModel model_from_yaml(const std::string& text, const std::string& source = "<string>");

namespace detail {

template <class S>
S clamp_to(const S& x, double lo, double hi, bool& clamped) {
  if (x < lo) {
    clamped = true;
    return S(lo);
  }
  if (x > hi) {
    clamped = true;
    return S(hi);
  }
  return x;
}

}  // namespace detail

template <class S>
Vec6<S> CoefficientModel::evaluate(const S& alpha, const S& beta, const S& reynolds,
                                   bool* extrapolated) const {
  using std::cos;
  using std::log;
  using std::sin;
  bool clamped = false;
  const S a = detail::clamp_to(alpha, deg2rad(box_.alpha_min_deg), deg2rad(box_.alpha_max_deg),
                               clamped);
  const S b =
      detail::clamp_to(beta, deg2rad(box_.beta_min_deg), deg2rad(box_.beta_max_deg), clamped);
  const S re = detail::clamp_to(reynolds, box_.reynolds_min, box_.reynolds_max, clamped);
  if (extrapolated) *extrapolated = clamped;

  const int ha = basis_.alpha_harmonics, hb = basis_.beta_harmonics;
  std::vector<S> sa(ha + 1), ca(ha + 1), sb(hb + 1), cb(hb + 1);
  for (int k = 0; k <= ha; ++k) {
    sa[k] = sin(S(static_cast<double>(k) * a));
    ca[k] = cos(S(static_cast<double>(k) * a));
  }
  for (int m = 0; m <= hb; ++m) {
    sb[m] = sin(S(static_cast<double>(m) * b));
    cb[m] = cos(S(static_cast<double>(m) * b));
  }
  const S lr = log(S(re / re0_));

  Vec6<S> out = Vec6<S>::Zero();
  for (int t = 0; t < term_count(); ++t) {
    const BasisTerm& term = terms_[t];
    bool used = false;
    for (int c = 0; c < kCoefficientCount; ++c) used = used || weights_[c][t] != 0.0;
    if (!used) continue;
    S phi = (term.alpha_sin ? sa[term.alpha_harmonic] : ca[term.alpha_harmonic]) *
            (term.beta_sin ? sb[term.beta_harmonic] : cb[term.beta_harmonic]);
    if (term.log_reynolds) phi = phi * lr;
    for (int c = 0; c < kCoefficientCount; ++c)
      if (weights_[c][t] != 0.0) out[c] += weights_[c][t] * phi;
  }
  return out;
}

}  // namespace morphco::aero
