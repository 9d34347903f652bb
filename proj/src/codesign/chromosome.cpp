#include "morphco/codesign/chromosome.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>

namespace morphco::codesign {

using platform::JointAxis;

namespace {

const platform::DesignGrid& grid_of(int gene) {
  switch (gene) {
    case kChord: return platform::kChordGrid;
    case kAspectRatio: return platform::kAspectRatioGrid;
    case kVerticalOffset: return platform::kVerticalOffsetGrid;
    case kHorizontalOffset: return platform::kHorizontalOffsetGrid;
    default: return platform::kStaticAngleGrid;
  }
}

int index_on(int gene, double value) {
  const auto i = grid_of(gene).index_of(value);
  if (!i) throw LookupError(fmt::format("{} = {} is not on the search grid", gene_name(gene), value));
  return *i;
}

int index_of_id(const std::vector<std::string>& ids, const std::string& id, const char* what) {
  const auto it = std::find(ids.begin(), ids.end(), id);
  if (it == ids.end()) throw LookupError(fmt::format("{} '{}' is not in the catalog", what, id));
  return static_cast<int>(it - ids.begin());
}

}  // namespace

const char* gene_name(int gene) {
  static const char* names[kGeneCount] = {"chord",     "aspect_ratio", "vertical_offset", "horizontal_offset",
                                          "dihedral",  "incidence",    "sweep",           "joint_count",
                                          "axis_order", "servo_0",     "servo_1",         "servo_2",
                                          "propulsion", "psi"};
  if (gene < 0 || gene >= kGeneCount) throw LookupError(fmt::format("no gene {}", gene));
  return names[gene];
}

const std::array<std::array<JointAxis, 3>, 6>& axis_orders() {
  static const std::array<std::array<JointAxis, 3>, 6> orders = [] {
    std::array<JointAxis, 3> p{JointAxis::Dihedral, JointAxis::Sweep, JointAxis::Incidence};
    std::array<std::array<JointAxis, 3>, 6> out;
    // Enum order is dihedral < sweep < incidence, so next_permutation is lexicographic.
    for (int i = 0; i < 6; ++i) {
      out[i] = p;
      std::next_permutation(p.begin(), p.end());
    }
    return out;
  }();
  return orders;
}

ChromosomeSpace::ChromosomeSpace(std::vector<std::string> servo_ids, std::vector<std::string> propulsion_ids)
    : servo_ids_(std::move(servo_ids)), propulsion_ids_(std::move(propulsion_ids)) {
  if (servo_ids_.empty() || propulsion_ids_.empty())
    throw LookupError("the catalog needs at least one servo and one propulsion unit");
  sizes_.resize(kGeneCount);
  for (int g = kChord; g <= kSweep; ++g) sizes_[g] = grid_of(g).size();
  sizes_[kJointCount] = 4;
  sizes_[kAxisOrder] = 6;
  sizes_[kServo0] = sizes_[kServo1] = sizes_[kServo2] = static_cast<int>(servo_ids_.size());
  sizes_[kPropulsion] = static_cast<int>(propulsion_ids_.size());
  sizes_[kControllerWeight] = static_cast<int>(kControllerWeights.size());
}

ChromosomeSpace::ChromosomeSpace(const actuation::ComponentCatalog& catalog)
    : ChromosomeSpace(
          [&] {
            std::vector<std::string> ids;
            for (const auto& s : catalog.servos()) ids.push_back(s.id);
            return ids;
          }(),
          [&] {
            std::vector<std::string> ids;
            for (const auto& p : catalog.propulsion()) ids.push_back(p.id);
            return ids;
          }()) {}

bool ChromosomeSpace::contains(const Chromosome& c) const {
  if (c.size() != sizes_.size()) return false;
  for (size_t i = 0; i < c.size(); ++i)
    if (c[i] < 0 || c[i] >= sizes_[i]) return false;
  return true;
}

platform::DesignParams ChromosomeSpace::decode(const Chromosome& c) const {
  if (!contains(c)) throw LookupError("chromosome " + to_string(c) + " is outside the gene ranges");
  platform::DesignParams d;
  d.name = "c" + to_string(canonical(c));
  d.chord = grid_of(kChord).value(c[kChord]);
  d.aspect_ratio = grid_of(kAspectRatio).value(c[kAspectRatio]);
  d.vertical_offset = grid_of(kVerticalOffset).value(c[kVerticalOffset]);
  d.horizontal_offset = grid_of(kHorizontalOffset).value(c[kHorizontalOffset]);
  d.dihedral = deg2rad(grid_of(kDihedral).value(c[kDihedral]));
  d.incidence = deg2rad(grid_of(kIncidence).value(c[kIncidence]));
  d.sweep = deg2rad(grid_of(kSweep).value(c[kSweep]));
  const auto& order = axis_orders()[c[kAxisOrder]];
  for (int j = 0; j < c[kJointCount]; ++j) {
    d.joint_chain.push_back(order[j]);
    d.servo_ids.push_back(servo_ids_[c[kServo0 + j]]);
  }
  d.propulsion_id = propulsion_ids_[c[kPropulsion]];
  d.controller_weight = kControllerWeights[c[kControllerWeight]];
  return d;
}

Chromosome ChromosomeSpace::encode(const platform::DesignParams& d) const {
  Chromosome c(kGeneCount, 0);
  c[kChord] = index_on(kChord, d.chord);
  c[kAspectRatio] = index_on(kAspectRatio, d.aspect_ratio);
  c[kVerticalOffset] = index_on(kVerticalOffset, d.vertical_offset);
  c[kHorizontalOffset] = index_on(kHorizontalOffset, d.horizontal_offset);
  c[kDihedral] = index_on(kDihedral, rad2deg(d.dihedral));
  c[kIncidence] = index_on(kIncidence, rad2deg(d.incidence));
  c[kSweep] = index_on(kSweep, rad2deg(d.sweep));
  const int n = static_cast<int>(d.joint_chain.size());
  if (n > 3 || d.servo_ids.size() != d.joint_chain.size())
    throw LookupError("a wing carries at most 3 joints, each with one servo");
  c[kJointCount] = n;
  const auto& orders = axis_orders();
  int order = -1;
  for (int i = 0; i < 6 && order < 0; ++i)
    if (std::equal(d.joint_chain.begin(), d.joint_chain.end(), orders[i].begin())) order = i;
  if (order < 0) throw LookupError("joint chain repeats an axis");
  c[kAxisOrder] = order;
  for (int j = 0; j < n; ++j) c[kServo0 + j] = index_of_id(servo_ids_, d.servo_ids[j], "servo");
  c[kPropulsion] = index_of_id(propulsion_ids_, d.propulsion_id, "propulsion unit");
  int w = -1;
  for (size_t i = 0; i < kControllerWeights.size(); ++i)
    if (std::abs(kControllerWeights[i] - d.controller_weight) < 1e-9) w = static_cast<int>(i);
  if (w < 0) throw LookupError(fmt::format("controller weight {} is not on the search grid", d.controller_weight));
  c[kControllerWeight] = w;
  return c;
}

Chromosome ChromosomeSpace::canonical(const Chromosome& c) const {
  Chromosome out = c;
  const int n = c[kJointCount];
  for (int j = n; j < 3; ++j) out[kServo0 + j] = 0;
  const auto& orders = axis_orders();
  for (int i = 0; i < 6; ++i)
    if (std::equal(orders[i].begin(), orders[i].begin() + n, orders[c[kAxisOrder]].begin())) {
      out[kAxisOrder] = i;
      break;
    }
  return out;
}

Chromosome ChromosomeSpace::random(std::mt19937_64& rng) const {
  Chromosome c(sizes_.size());
  for (size_t i = 0; i < c.size(); ++i) c[i] = std::uniform_int_distribution<int>(0, sizes_[i] - 1)(rng);
  return c;
}

std::string to_string(const Chromosome& c) {
  std::string s;
  for (size_t i = 0; i < c.size(); ++i) s += (i ? "-" : "") + std::to_string(c[i]);
  return s;
}

}  // namespace morphco::codesign
