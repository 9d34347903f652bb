#include "morphco/aero/coefficient_model.hpp"

#include "morphco/common/yaml_util.hpp"

#include <spdlog/spdlog.h>
#include <yaml-cpp/yaml.h>

#include <cmath>
#include <fstream>
#include <sstream>

namespace morphco::aero {

namespace {

constexpr const char* kSchema = "morphco.coefficient_model/1";

std::string harmonic(bool is_sin, int k, char arg) {
  return std::string(is_sin ? "sin" : "cos") + std::to_string(k) + arg;
}

}  // namespace

std::string BasisTerm::name() const {
  std::vector<std::string> parts;
  if (alpha_harmonic > 0) parts.push_back(harmonic(alpha_sin, alpha_harmonic, 'a'));
  if (beta_harmonic > 0) parts.push_back(harmonic(beta_sin, beta_harmonic, 'b'));
  if (log_reynolds) parts.push_back("logre");
  if (parts.empty()) return "1";
  std::string out = parts[0];
  for (size_t i = 1; i < parts.size(); ++i) out += "*" + parts[i];
  return out;
}

BasisTerm BasisTerm::parse(const std::string& name) {
  BasisTerm t;
  if (name == "1") return t;
  std::stringstream ss(name);
  std::string part;
  bool seen_a = false, seen_b = false;
  while (std::getline(ss, part, '*')) {
    if (part == "logre" && !t.log_reynolds) {
      t.log_reynolds = true;
      continue;
    }
    if (part.size() >= 5 && (part.compare(0, 3, "sin") == 0 || part.compare(0, 3, "cos") == 0)) {
      const bool is_sin = part[0] == 's';
      const char arg = part.back();
      const std::string digits = part.substr(3, part.size() - 4);
      int k = 0;
      try {
        size_t used = 0;
        k = std::stoi(digits, &used);
        if (used != digits.size()) k = 0;
      } catch (const std::exception&) {
        k = 0;
      }
      if (k > 0 && arg == 'a' && !seen_a) {
        t.alpha_harmonic = k;
        t.alpha_sin = is_sin;
        seen_a = true;
        continue;
      }
      if (k > 0 && arg == 'b' && !seen_b) {
        t.beta_harmonic = k;
        t.beta_sin = is_sin;
        seen_b = true;
        continue;
      }
    }
    throw SchemaError("invalid basis term '" + name + "'");
  }
  return t;
}

std::vector<BasisTerm> BasisConfig::terms() const {
  if (alpha_harmonics < 0 || beta_harmonics < 0)
    throw Error("basis harmonics must be non-negative");
  std::vector<BasisTerm> out;
  for (int re = 0; re <= (log_reynolds ? 1 : 0); ++re)
    for (int k = 0; k <= alpha_harmonics; ++k)
      for (int sa = 0; sa <= 1; ++sa) {
        if (k == 0 && sa == 1) continue;
        for (int m = 0; m <= beta_harmonics; ++m)
          for (int sb = 0; sb <= 1; ++sb) {
            if (m == 0 && sb == 1) continue;
            out.push_back({k, sa == 1, m, sb == 1, re == 1});
          }
      }
  return out;
}

bool term_allowed(const BasisConfig& basis, int coefficient, const BasisTerm& term) {
  if (!basis.symmetric) return true;
  const bool even = coefficient == kCD || coefficient == kCL || coefficient == kCm;
  return term.even_in_beta() == even;
}

bool ValidityBox::contains(double alpha, double beta, double reynolds) const {
  const double a = rad2deg(alpha), b = rad2deg(beta);
  return a >= alpha_min_deg && a <= alpha_max_deg && b >= beta_min_deg && b <= beta_max_deg &&
         reynolds >= reynolds_min && reynolds <= reynolds_max;
}

CoefficientModel::CoefficientModel(BasisConfig basis, ValidityBox box, double reference_reynolds)
    : basis_(basis), terms_(basis.terms()), box_(box), re0_(reference_reynolds) {
  if (!(re0_ > 0.0)) throw Error("reference Reynolds number must be positive");
  if (!(box_.alpha_min_deg <= box_.alpha_max_deg && box_.beta_min_deg <= box_.beta_max_deg &&
        box_.reynolds_min <= box_.reynolds_max && box_.reynolds_min > 0.0))
    throw Error("invalid validity box");
  for (auto& w : weights_) w = Eigen::VectorXd::Zero(term_count());
}

void CoefficientModel::set_weights(int coefficient, const Eigen::VectorXd& w) {
  if (w.size() != term_count())
    throw Error("weight vector has " + std::to_string(w.size()) + " entries, basis has " +
                std::to_string(term_count()));
  weights_.at(coefficient) = w;
}

Eigen::VectorXd CoefficientModel::features(double alpha, double beta, double reynolds) const {
  Eigen::VectorXd phi(term_count());
  const double lr = std::log(reynolds / re0_);
  for (int t = 0; t < term_count(); ++t) {
    const BasisTerm& term = terms_[t];
    const double ka = term.alpha_harmonic * alpha, mb = term.beta_harmonic * beta;
    double v = (term.alpha_sin ? std::sin(ka) : std::cos(ka)) *
               (term.beta_sin ? std::sin(mb) : std::cos(mb));
    if (term.log_reynolds) v *= lr;
    phi[t] = v;
  }
  return phi;
}

bool CoefficientModel::operator==(const CoefficientModel& o) const {
  if (!(basis_ == o.basis_ && box_ == o.box_ && re0_ == o.re0_ && body == o.body &&
        aspect_ratio == o.aspect_ratio && rmse == o.rmse))
    return false;
  for (int c = 0; c < kCoefficientCount; ++c)
    if (weights_[c] != o.weights_[c]) return false;
  return true;
}

namespace {
thread_local bool quiet_extrapolation = false;
}  // namespace

QuietExtrapolation::QuietExtrapolation() : previous_(quiet_extrapolation) { quiet_extrapolation = true; }
QuietExtrapolation::~QuietExtrapolation() { quiet_extrapolation = previous_; }

Vec6<double> eval_coefficients(const CoefficientModel& model, double alpha, double beta,
                               double reynolds) {
  bool extrapolated = false;
  Vec6<double> c = model.evaluate<double>(alpha, beta, reynolds, &extrapolated);
  if (extrapolated && !quiet_extrapolation)
    spdlog::warn("aero model '{}': (alpha={:.4g} deg, beta={:.4g} deg, Re={:.4g}) outside validity "
                 "box, clamped",
                 model.body, rad2deg(alpha), rad2deg(beta), reynolds);
  return c;
}

std::string model_to_yaml(const CoefficientModel& model) {
  using yaml::exact;
  YAML::Emitter out;
  out << YAML::BeginMap;
  out << YAML::Key << "schema" << YAML::Value << kSchema;
  out << YAML::Key << "body" << YAML::Value << model.body;
  out << YAML::Key << "aspect_ratio" << YAML::Value << exact(model.aspect_ratio);
  out << YAML::Key << "reference_reynolds" << YAML::Value << exact(model.reference_reynolds());
  const BasisConfig& b = model.basis();
  out << YAML::Key << "basis" << YAML::Value << YAML::BeginMap;
  out << YAML::Key << "alpha_harmonics" << YAML::Value << b.alpha_harmonics;
  out << YAML::Key << "beta_harmonics" << YAML::Value << b.beta_harmonics;
  out << YAML::Key << "log_reynolds" << YAML::Value << b.log_reynolds;
  out << YAML::Key << "symmetric" << YAML::Value << b.symmetric;
  out << YAML::EndMap;
  const ValidityBox& box = model.box();
  out << YAML::Key << "validity" << YAML::Value << YAML::BeginMap;
  out << YAML::Key << "alpha_deg" << YAML::Value << YAML::Flow << YAML::BeginSeq
      << exact(box.alpha_min_deg) << exact(box.alpha_max_deg) << YAML::EndSeq;
  out << YAML::Key << "beta_deg" << YAML::Value << YAML::Flow << YAML::BeginSeq
      << exact(box.beta_min_deg) << exact(box.beta_max_deg) << YAML::EndSeq;
  out << YAML::Key << "reynolds" << YAML::Value << YAML::Flow << YAML::BeginSeq
      << exact(box.reynolds_min) << exact(box.reynolds_max) << YAML::EndSeq;
  out << YAML::EndMap;
  out << YAML::Key << "rmse" << YAML::Value << YAML::BeginMap;
  for (int c = 0; c < kCoefficientCount; ++c)
    out << YAML::Key << kCoefficientNames[c] << YAML::Value << exact(model.rmse[c]);
  out << YAML::EndMap;
  // Only nonzero weights are listed, keyed by term name.
  out << YAML::Key << "weights" << YAML::Value << YAML::BeginMap;
  for (int c = 0; c < kCoefficientCount; ++c) {
    out << YAML::Key << kCoefficientNames[c] << YAML::Value << YAML::BeginMap;
    const Eigen::VectorXd& w = model.weights(c);
    for (int t = 0; t < model.term_count(); ++t)
      if (w[t] != 0.0) out << YAML::Key << model.terms()[t].name() << YAML::Value << exact(w[t]);
    out << YAML::EndMap;
  }
  out << YAML::EndMap;
  out << YAML::EndMap;
  return std::string(out.c_str()) + "\n";
}

CoefficientModel model_from_yaml(const std::string& text, const std::string& source) {
  const YAML::Node root = yaml::parse(text, source);
  yaml::Reader r(root, source);
  r.expect_schema(kSchema);
  r.allow_keys({"schema", "body", "aspect_ratio", "reference_reynolds", "basis", "validity", "rmse",
                "weights"});

  BasisConfig basis;
  {
    yaml::Reader br = r.child("basis");
    br.allow_keys({"alpha_harmonics", "beta_harmonics", "log_reynolds", "symmetric"});
    basis.alpha_harmonics = br.get<int>("alpha_harmonics");
    basis.beta_harmonics = br.get<int>("beta_harmonics");
    basis.log_reynolds = br.get<bool>("log_reynolds");
    basis.symmetric = br.get_or<bool>("symmetric", false);
    if (basis.alpha_harmonics < 0 || basis.beta_harmonics < 0 || basis.alpha_harmonics > 16 ||
        basis.beta_harmonics > 16)
      br.fail("alpha_harmonics", "harmonic count must be in [0, 16]");
  }
  ValidityBox box;
  {
    yaml::Reader vr = r.child("validity");
    vr.allow_keys({"alpha_deg", "beta_deg", "reynolds"});
    const auto a = vr.get_range("alpha_deg");
    const auto b = vr.get_range("beta_deg");
    const auto re = vr.get_range("reynolds");
    box = {a[0], a[1], b[0], b[1], re[0], re[1]};
    if (!(re[0] > 0.0)) vr.fail("reynolds", "Reynolds range must be positive");
  }
  const double re0 = r.get<double>("reference_reynolds");
  if (!(re0 > 0.0)) r.fail("reference_reynolds", "must be positive");

  CoefficientModel model(basis, box, re0);
  model.body = r.get<std::string>("body");
  model.aspect_ratio = r.get_or<double>("aspect_ratio", 0.0);
  if (r.has("rmse")) {
    yaml::Reader rr = r.child("rmse");
    for (int c = 0; c < kCoefficientCount; ++c)
      model.rmse[c] = rr.get_or<double>(kCoefficientNames[c], 0.0);
  }
  yaml::Reader wr = r.child("weights");
  wr.allow_keys({"CD", "CL", "CY", "Cl", "Cm", "Cn"});
  for (int c = 0; c < kCoefficientCount; ++c) {
    Eigen::VectorXd w = Eigen::VectorXd::Zero(model.term_count());
    if (wr.has(kCoefficientNames[c])) {
      yaml::Reader cr = wr.child(kCoefficientNames[c]);
      for (const auto& [key, node] : cr.entries()) {
        BasisTerm term;
        try {
          term = BasisTerm::parse(key);
        } catch (const SchemaError& e) {
          cr.fail(key, e.what());
        }
        int index = -1;
        for (int t = 0; t < model.term_count(); ++t)
          if (model.terms()[t] == term) index = t;
        if (index < 0) cr.fail(key, "term '" + key + "' is not part of the declared basis");
        w[index] = cr.get<double>(key);
      }
    }
    model.set_weights(c, w);
  }
  return model;
}

void save_model(const CoefficientModel& model, const std::string& path) {
  std::ofstream f(path);
  if (!f) throw Error("cannot write '" + path + "'");
  f << model_to_yaml(model);
  if (!f) throw Error("failed writing '" + path + "'");
}

CoefficientModel load_model(const std::string& path) {
  return model_from_yaml(yaml::read_file(path), path);
}

}  // namespace morphco::aero
