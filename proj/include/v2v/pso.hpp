#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "v2v/radio.hpp"
#include "v2v/rng.hpp"

namespace v2v {

struct PsoConfig {
  int swarm_size = 30;
  double inertia = 0.5;
  double cognitive = 1.5;
  double social = 1.5;
  int iterations = 50;
  double init_beamwidth = 0.08726646259971647;  // rad (5 deg)
  double velocity_min = 0.08726646259971647;    // rad
  double velocity_max = 0.7853981633974483;     // rad
  bool per_dimension_random = true;

  void validate() const;
};

/// Average alignment-slot rate of a set of matched links as a function of
/// their beamwidths. Positions are laid out [tx0, rx0, tx1, rx1, ...].
class BeamwidthProblem {
 public:
  BeamwidthProblem(InterferenceModel model, const AntennaConfig& antenna, const RadioConfig& radio);

  std::size_t links() const { return model_.size(); }
  std::size_t dimensions() const { return 2 * model_.size(); }
  double lower() const { return lower_; }
  double upper() const { return upper_; }

  /// Clamps to the bounds, then scales each link's pair up to the alignment
  /// bound when the product falls short.
  void repair(std::span<double> position) const;
  bool feasible(std::span<const double> position) const;

  /// Mean link rate in bits/s with the alignment penalty charged. Infeasible
  /// inputs are repaired on a copy first.
  double fitness(std::span<const double> position) const;

  /// Per-link alignment-slot rates (bits/s) for a feasible position.
  std::vector<double> link_rates(std::span<const double> position) const;

 private:
  InterferenceModel model_;
  AntennaConfig antenna_;
  RadioConfig radio_;
  double lower_;
  double upper_;
  double min_product_;
};

struct Particle {
  std::vector<double> position;
  std::vector<double> velocity;
  std::vector<double> best_position;
  double fitness = 0.0;
  double best_fitness = 0.0;
  Rng rng;
};

struct Swarm {
  std::vector<Particle> particles;
  std::vector<double> best_position;
  double best_fitness = 0.0;
  int iteration = 0;
};

/// Every particle starts at the initial beamwidth; velocities are uniform in
/// the configured range except particle 0, which starts at rest so the
/// uniform narrow-beam point is always evaluated.
Swarm init_swarm(const BeamwidthProblem& problem, const PsoConfig& cfg, std::uint64_t seed);

void pso_step(Swarm& swarm, const BeamwidthProblem& problem, const PsoConfig& cfg);

struct PsoResult {
  std::vector<double> tx_width;
  std::vector<double> rx_width;
  double fitness = 0.0;
  std::vector<double> trace;  // global best after init and after each iteration
};

PsoResult optimize(const BeamwidthProblem& problem, const PsoConfig& cfg, std::uint64_t seed);

}  // namespace v2v
