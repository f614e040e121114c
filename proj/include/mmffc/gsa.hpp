#pragma once

#include "mmffc/genome.hpp"
#include "mmffc/rng.hpp"

#include <Eigen/Dense>

#include <optional>
#include <span>
#include <vector>

namespace mmffc {

struct Agent {
  Position position;
  Eigen::VectorXd velocity;
  /// Empty when stale (position moved since the last evaluation).
  std::optional<double> fitness;

  static Agent at(Position p) {
    Agent a;
    a.velocity = Eigen::VectorXd::Zero(p.size());
    a.position = std::move(p);
    return a;
  }
};

struct GsaParams {
  double g0 = 100.0;
  double alpha = 20.0;
  double epsilon = 1e-9;
  int total_iterations = 1;

  void validate() const;
};

/// Closed box the positions are clamped to after every move.
struct GeneBox {
  Eigen::VectorXd lower;
  Eigen::VectorXd upper;

  static GeneBox of(const ProgramShape& shape) { return {shape.lower_bounds(), shape.upper_bounds()}; }
};

/// Normalized masses, summing to one. Ties (best == worst) give 1/n each.
Eigen::VectorXd masses(const Eigen::Ref<const Eigen::VectorXd>& fitness);

/// G(t) = G0 * exp(-alpha * t / T), defined for 0 <= t <= T.
double gravitational_constant(int t, const GsaParams& params);

/// Size of the attracting elite: linear from n at t = 0 to 1 at t = T - 1,
/// rounded half up.
int kbest(int t, int total_iterations, int n);

/// One GSA move of the whole population. Every agent must carry a fitness;
/// all fitness values become stale afterwards.
void step(std::span<Agent> agents, int t, const GsaParams& params, const GeneBox& box, Rng& rng);

}  // namespace mmffc
