#pragma once

// Direct multiple-shooting transcription of a flight scenario for an
// assembled drone, the initial guess, and the per-knot trajectory view of a
// solution vector.
//
// Per knot the variables are, in order:
//   s, ṡ, s̈, τ, τ̇ (n_j each), p, v, a (3 each), q (4), ω, ω̇ (3 each), u, u̇, Δt
// Δt[k] is the step from knot k to k + 1; Δt[N−1] is fixed at zero. The
// initial condition and the rate limits enter as variable bounds.

#include "morphco/platform/drone.hpp"
#include "morphco/trajopt/nlp.hpp"
#include "morphco/trajopt/scenario.hpp"

#include <memory>
#include <string>
#include <vector>

namespace morphco::trajopt {

struct KnotLayout {
  int nj = 0;

  int s() const { return 0; }
  int sd() const { return nj; }
  int sdd() const { return 2 * nj; }
  int tau() const { return 3 * nj; }
  int taud() const { return 4 * nj; }
  int p() const { return 5 * nj; }
  int v() const { return 5 * nj + 3; }
  int a() const { return 5 * nj + 6; }
  int q() const { return 5 * nj + 9; }
  int w() const { return 5 * nj + 13; }
  int wd() const { return 5 * nj + 16; }
  int u() const { return 5 * nj + 19; }
  int ud() const { return 5 * nj + 20; }
  int dt() const { return 5 * nj + 21; }
  int size() const { return 5 * nj + 22; }
};

struct Knot {
  Eigen::VectorXd s, sd, sdd, tau, taud;
  Eigen::Vector3d p, v, a;
  Eigen::Vector4d q;
  Eigen::Vector3d w, wd;
  double u = 0.0, ud = 0.0, dt = 0.0;
};

enum class RowKind { Dynamics, Integration, Quaternion, AeroAngle, Obstacle, Checkpoint };

std::string to_string(RowKind kind);

struct RowGroup {
  RowKind kind;
  int knot = 0;
  int first_row = 0;
  int rows = 0;
  std::string detail;
};

struct TranscriptionOptions {
  // Row scaling applied to the dynamics residual (generalized forces).
  double dynamics_scale = 1.0;
};

class Transcription {
 public:
  Transcription(const platform::DroneModel& model, const Scenario& scenario, int knots,
                TranscriptionOptions options = {});

  const NlpProblem& problem() const { return problem_; }
  const KnotLayout& layout() const { return layout_; }
  int knots() const { return knots_; }
  const std::vector<RowGroup>& groups() const { return groups_; }
  int row_count(RowKind kind) const;
  const std::vector<int>& checkpoint_knots() const { return checkpoint_knots_; }

  // Global index of knot-local variable `local` at knot k.
  int index(int k, int local) const { return k * layout_.size() + local; }

  std::vector<Knot> decode(const Eigen::VectorXd& x) const;
  Eigen::VectorXd encode(const std::vector<Knot>& knots) const;

  // Start point: straight segments start → checkpoints → target at the
  // initial speed, slerped attitude, joints at rest, thrust at level trim.
  Eigen::VectorXd initial_guess() const;

  // Row group containing `row`, or nullptr.
  const RowGroup* group_of(int row) const;

 private:
  struct Impl;
  std::shared_ptr<const Impl> impl_;
  NlpProblem problem_;
  KnotLayout layout_;
  int knots_ = 0;
  std::vector<RowGroup> groups_;
  std::vector<int> checkpoint_knots_;
};

// Free functions in the shape of the pipeline.
Transcription transcribe(const platform::DroneModel& model, const Scenario& scenario, int knots);
Eigen::VectorXd initial_guess(const platform::DroneModel& model, const Scenario& scenario, int knots);

// Energy and time of a knot trajectory:
//   energy = Σ_k [W_p(u) + Σ_j W_s(ṡ, τ)] Δt,  time = Σ_k Δt.
struct Metrics {
  double energy = 0.0;  // [J]
  double time = 0.0;    // [s]
};

Metrics evaluate_metrics(const std::vector<Knot>& knots, const platform::DroneModel& model);

}  // namespace morphco::trajopt
