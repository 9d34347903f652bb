#pragma once

// Tabulated aerodynamic coefficients: a CSV file with header
//   alpha_deg,beta_deg,reynolds,CD,CL,CY,Cl,Cm,Cn
// plus a YAML sidecar "<stem>.meta.yaml" describing the body and ranges.

#include "morphco/aero/coefficient_model.hpp"

#include <string>
#include <vector>

namespace morphco::aero {

struct TableMetadata {
  std::string body;       // "fuselage" or "wing"
  std::string airfoil;
  double aspect_ratio = 0.0;
  double taper_ratio = 1.0;
  bool synthetic = false;
  ValidityBox ranges;
};

struct AeroSample {
  double alpha = 0.0;  // rad
  double beta = 0.0;   // rad
  double reynolds = 0.0;
  Vec6<double> coefficients = Vec6<double>::Zero();
};

struct AeroSampleTable {
  TableMetadata meta;
  std::vector<AeroSample> rows;

  // Throws SchemaError on duplicate (α, β, Re) keys or rows outside the ranges.
  void validate(const std::string& source = "<table>") const;
};

std::string sidecar_path(const std::string& csv_path);

AeroSampleTable read_table(const std::string& csv_path);
void write_table(const AeroSampleTable& table, const std::string& csv_path);

AeroSampleTable parse_table_csv(const std::string& text, const TableMetadata& meta,
                                const std::string& source);
TableMetadata parse_metadata(const std::string& text, const std::string& source);

}  // namespace morphco::aero
