#pragma once

// Integer chromosome of a morphing-drone design. Every gene is an index into
// a finite grid; the catalogs fix the sizes of the servo and propulsion genes.

#include "morphco/actuation/components.hpp"
#include "morphco/platform/design.hpp"

#include <array>
#include <random>
#include <string>
#include <vector>

namespace morphco::codesign {

using Chromosome = std::vector<int>;

enum Gene : int {
  kChord,
  kAspectRatio,
  kVerticalOffset,
  kHorizontalOffset,
  kDihedral,
  kIncidence,
  kSweep,
  kJointCount,   // 0..3, 0 is a fixed wing
  kAxisOrder,    // permutation of (dihedral, sweep, incidence); the first kJointCount are used
  kServo0,
  kServo1,
  kServo2,
  kPropulsion,
  kControllerWeight,
  kGeneCount
};

const char* gene_name(int gene);

// ψ grid [W].
inline constexpr std::array<double, 6> kControllerWeights{0.0, 1.0, 5.0, 10.0, 50.0, 100.0};

// Axis permutations in lexicographic order of (dihedral, sweep, incidence).
const std::array<std::array<platform::JointAxis, 3>, 6>& axis_orders();

class ChromosomeSpace {
 public:
  ChromosomeSpace(std::vector<std::string> servo_ids, std::vector<std::string> propulsion_ids);
  explicit ChromosomeSpace(const actuation::ComponentCatalog& catalog);

  // Number of values of each gene; gene i takes values 0 .. sizes()[i] - 1.
  const std::vector<int>& sizes() const { return sizes_; }
  bool contains(const Chromosome& c) const;

  platform::DesignParams decode(const Chromosome& c) const;
  // Throws LookupError for off-grid values or unknown component ids.
  Chromosome encode(const platform::DesignParams& design) const;
  // Representative with inactive genes zeroed and the axis order reduced to
  // the smallest permutation with the same active prefix. Two chromosomes
  // decode to the same design exactly when their canonical forms agree.
  Chromosome canonical(const Chromosome& c) const;

  Chromosome random(std::mt19937_64& rng) const;

 private:
  std::vector<std::string> servo_ids_, propulsion_ids_;
  std::vector<int> sizes_;
};

std::string to_string(const Chromosome& c);  // "3-5-0-..."

}  // namespace morphco::codesign
