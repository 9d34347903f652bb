#pragma once

// Shared fixtures for tests that need assembled drones: the desk aero
// library and the three reference designs.

#include "morphco/actuation/components.hpp"
#include "morphco/aero/library.hpp"
#include "morphco/platform/drone.hpp"

#include <spdlog/spdlog.h>

#include <string>

namespace morphco::testing {

inline const aero::AeroLibrary& quick_library() {
  static const aero::AeroLibrary library = [] {
    const auto level = spdlog::get_level();
    spdlog::set_level(spdlog::level::err);
    aero::AeroLibrary lib = aero::desk_library();
    spdlog::set_level(level);
    return lib;
  }();
  return library;
}

inline const actuation::ComponentCatalog& default_catalog() {
  static const actuation::ComponentCatalog catalog =
      actuation::load_catalog(std::string(MORPHCO_DATA_DIR) + "/catalog.yaml");
  return catalog;
}

inline platform::DesignParams fixed_wing_design() {
  return platform::load_design(std::string(MORPHCO_DATA_DIR) + "/designs/fixed_wing.yaml");
}

inline platform::DesignParams energy_design() {
  return platform::load_design(std::string(MORPHCO_DATA_DIR) + "/designs/energy.yaml");
}

inline platform::DesignParams agile_design() {
  return platform::load_design(std::string(MORPHCO_DATA_DIR) + "/designs/agile.yaml");
}

inline platform::DroneModel assemble(const platform::DesignParams& design) {
  return platform::assemble_drone(design, default_catalog(), quick_library());
}

}  // namespace morphco::testing
