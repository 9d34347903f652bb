#pragma once

// The `morphco` command line: synth-aero, fit-aero, trajopt, codesign and
// validate. Each command writes its outputs and a manifest.yaml into the
// directory given by --out.

#include <string>
#include <vector>

namespace morphco::cli {

enum ExitCode : int {
  kExitOk = 0,
  kExitInfeasible = 1,
  kExitUsage = 2,  // bad arguments or missing file
  kExitNumeric = 3,
  kExitSchema = 4,
};

// args[0] is the program name.
int run_cli(const std::vector<std::string>& args);
int run_cli(int argc, char** argv);

// Catalog used when neither flag nor config names one: $MORPHCO_CATALOG, else
// the catalog.yaml of the installed data directory.
std::string default_catalog_path();

}  // namespace morphco::cli
