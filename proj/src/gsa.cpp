#include "mmffc/gsa.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace mmffc {

void GsaParams::validate() const {
  if (!(g0 > 0.0) || !(alpha > 0.0) || !(epsilon > 0.0)) throw std::invalid_argument("GSA constants must be positive");
  if (total_iterations < 1) throw std::invalid_argument("GSA needs at least one iteration");
}

Eigen::VectorXd masses(const Eigen::Ref<const Eigen::VectorXd>& fitness) {
  const Index n = fitness.size();
  if (n == 0) throw std::invalid_argument("masses of an empty population");
  const double best = fitness.maxCoeff();
  const double worst = fitness.minCoeff();
  if (best == worst) return Eigen::VectorXd::Constant(n, 1.0 / static_cast<double>(n));
  const Eigen::VectorXd m = (fitness.array() - worst) / (best - worst);
  return m / m.sum();
}

double gravitational_constant(int t, const GsaParams& params) {
  if (t < 0 || t > params.total_iterations) throw std::out_of_range("iteration index outside the schedule");
  return params.g0 * std::exp(-params.alpha * static_cast<double>(t) / static_cast<double>(params.total_iterations));
}

int kbest(int t, int total_iterations, int n) {
  if (n < 1) throw std::invalid_argument("kbest needs at least one agent");
  if (total_iterations <= 1) return n;
  const double k = static_cast<double>(n) -
                   static_cast<double>(n - 1) * static_cast<double>(t) / static_cast<double>(total_iterations - 1);
  return std::clamp(static_cast<int>(std::floor(k + 0.5)), 1, n);
}

void step(std::span<Agent> agents, int t, const GsaParams& params, const GeneBox& box, Rng& rng) {
  const auto n = static_cast<int>(agents.size());
  if (n == 0) return;
  Eigen::VectorXd fit(n);
  for (int i = 0; i < n; ++i) {
    if (!agents[static_cast<std::size_t>(i)].fitness) throw std::logic_error("GSA step on an unevaluated agent");
    fit[i] = *agents[static_cast<std::size_t>(i)].fitness;
  }
  const Index dim = agents.front().position.size();
  for (const auto& a : agents)
    if (a.position.size() != dim || a.velocity.size() != dim) throw std::invalid_argument("agent length mismatch");

  const Eigen::VectorXd mass = masses(fit);
  const double g = gravitational_constant(t, params);

  // Elite ordered by fitness, ties to the lower index.
  std::vector<int> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return fit[a] > fit[b]; });
  order.resize(static_cast<std::size_t>(kbest(t, params.total_iterations, n)));

  // Accelerations use the positions from before the move.
  Eigen::MatrixXd accel = Eigen::MatrixXd::Zero(dim, n);
  for (int i = 0; i < n; ++i) {
    const auto& xi = agents[static_cast<std::size_t>(i)].position;
    for (int j : order) {
      if (j == i) continue;
      const auto& xj = agents[static_cast<std::size_t>(j)].position;
      const double r = rng.uniform();
      const double distance = (xj - xi).norm();
      // F_i / M_i; the M_i factor cancels, which also covers the massless worst agent.
      accel.col(i) += r * g * mass[j] / (distance + params.epsilon) * (xj - xi);
    }
  }

  for (int i = 0; i < n; ++i) {
    auto& agent = agents[static_cast<std::size_t>(i)];
    for (Index d = 0; d < dim; ++d) agent.velocity[d] = rng.uniform() * agent.velocity[d] + accel(d, i);
    agent.position = (agent.position + agent.velocity).cwiseMax(box.lower).cwiseMin(box.upper);
    agent.fitness.reset();
  }
}

}  // namespace mmffc
