#include "morphco/aero/library.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <sstream>

namespace morphco::aero {

namespace {

long ar_key(double aspect_ratio) { return std::lround(aspect_ratio * 1000.0); }

}  // namespace

void AeroLibrary::set_fuselage(CoefficientModel model) { fuselage_ = std::move(model); }

void AeroLibrary::add_wing(CoefficientModel model) {
  if (!(model.aspect_ratio > 0.0)) throw Error("wing model needs a positive aspect ratio");
  wings_[ar_key(model.aspect_ratio)] = std::move(model);
}

const CoefficientModel& AeroLibrary::fuselage() const {
  if (!fuselage_) throw LookupError("aero library has no fuselage model");
  return *fuselage_;
}

const CoefficientModel& AeroLibrary::wing(double aspect_ratio) const {
  const auto it = wings_.find(ar_key(aspect_ratio));
  if (it == wings_.end()) {
    std::ostringstream msg;
    msg << "aero library has no wing model for aspect ratio " << aspect_ratio;
    throw LookupError(msg.str());
  }
  return it->second;
}

std::vector<double> AeroLibrary::aspect_ratios() const {
  std::vector<double> out;
  for (const auto& [k, m] : wings_) out.push_back(m.aspect_ratio);
  return out;
}

AeroLibrary AeroLibrary::load_directory(const std::string& dir) {
  namespace fs = std::filesystem;
  if (!fs::is_directory(dir)) throw IoError("aero library directory '" + dir + "' not found");
  std::vector<fs::path> files;
  for (const auto& e : fs::directory_iterator(dir))
    if (e.is_regular_file() && e.path().extension() == ".yaml" && e.path().filename() != "manifest.yaml")
      files.push_back(e.path());
  std::sort(files.begin(), files.end());
  AeroLibrary lib;
  for (const auto& p : files) {
    CoefficientModel m = load_model(p.string());
    if (m.body == "fuselage")
      lib.set_fuselage(std::move(m));
    else if (m.body == "wing")
      lib.add_wing(std::move(m));
    else
      throw SchemaError(p.string() + ": unknown body '" + m.body + "'");
  }
  return lib;
}

void AeroLibrary::save_directory(const std::string& dir) const {
  namespace fs = std::filesystem;
  fs::create_directories(dir);
  if (fuselage_) save_model(*fuselage_, (fs::path(dir) / "fuselage.yaml").string());
  for (const auto& [k, m] : wings_) {
    std::ostringstream name;
    name << "wing_ar" << k << ".yaml";
    save_model(m, (fs::path(dir) / name.str()).string());
  }
}

AeroLibrary AeroLibrary::synthetic(const std::vector<double>& aspect_ratios,
                                   const FitOptions& options, const SampleGrid& wing_grid,
                                   const SampleGrid& fuselage_grid) {
  AeroLibrary lib;
  lib.set_fuselage(fit_coefficients(synthetic_fuselage_table(fuselage_grid), options).model);
  for (double ar : aspect_ratios)
    lib.add_wing(fit_coefficients(synthetic_wing_table(ar, wing_grid), options).model);
  return lib;
}

std::vector<double> design_aspect_ratios() {
  std::vector<double> out;
  for (int i = 0; i <= 6; ++i) out.push_back(2.0 + 0.5 * i);
  return out;
}

AeroLibrary desk_library() {
  FitOptions options;
  options.lambda = 0.0;
  options.basis.symmetric = true;
  return AeroLibrary::synthetic(design_aspect_ratios(), options, coarse_wing_grid(), coarse_fuselage_grid());
}

}  // namespace morphco::aero
