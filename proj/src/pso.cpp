#include "v2v/pso.hpp"

#include <algorithm>
#include <cmath>

#include "v2v/errors.hpp"

namespace v2v {

void PsoConfig::validate() const {
  if (swarm_size < 1) throw ConfigError("pso.swarm_size must be >= 1");
  if (iterations < 1) throw ConfigError("pso.iterations must be >= 1");
  if (velocity_min > velocity_max) throw ConfigError("pso.velocity_min_deg must not exceed pso.velocity_max_deg");
  if (!(init_beamwidth > 0)) throw ConfigError("pso.init_beamwidth_deg must be > 0");
}

BeamwidthProblem::BeamwidthProblem(InterferenceModel model, const AntennaConfig& antenna, const RadioConfig& radio)
    : model_(std::move(model)),
      antenna_(antenna),
      radio_(radio),
      lower_(antenna.min_beamwidth),
      upper_(antenna.sector_beamwidth),
      min_product_(min_beamwidth_product(antenna, radio.slot_ms)) {}

void BeamwidthProblem::repair(std::span<double> x) const {
  for (std::size_t l = 0; l < links(); ++l) {
    double& t = x[2 * l];
    double& r = x[2 * l + 1];
    t = std::clamp(t, lower_, upper_);
    r = std::clamp(r, lower_, upper_);
    if (t * r >= min_product_) continue;
    const double scale = std::sqrt(min_product_ / (t * r));
    t = std::min(t * scale, upper_);
    r = std::min(r * scale, upper_);
    if (t * r < min_product_) {
      // One side hit the sector width; the other takes up the rest.
      if (t >= upper_)
        r = std::min(min_product_ / t, upper_);
      else
        t = std::min(min_product_ / r, upper_);
    }
  }
}

bool BeamwidthProblem::feasible(std::span<const double> x) const {
  for (std::size_t l = 0; l < links(); ++l) {
    const double t = x[2 * l];
    const double r = x[2 * l + 1];
    if (t < lower_ || t > upper_ || r < lower_ || r > upper_) return false;
    if (!alignment_feasible(t, r, antenna_, radio_.slot_ms)) return false;
  }
  return true;
}

std::vector<double> BeamwidthProblem::link_rates(std::span<const double> x) const {
  const std::size_t n = links();
  std::vector<double> tw(n);
  std::vector<double> rw(n);
  for (std::size_t l = 0; l < n; ++l) {
    tw[l] = x[2 * l];
    rw[l] = x[2 * l + 1];
  }
  std::vector<double> rates = model_.sinr_all(tw, rw);
  for (std::size_t l = 0; l < n; ++l) {
    const double tau = alignment_delay(tw[l], rw[l], antenna_, radio_.slot_ms);
    rates[l] = link_rate(rates[l], tau, radio_.slot_ms, radio_.bandwidth_hz, true);
  }
  return rates;
}

double BeamwidthProblem::fitness(std::span<const double> x) const {
  if (links() == 0) return 0.0;
  std::vector<double> pos(x.begin(), x.end());
  if (!feasible(pos)) repair(pos);
  const auto rates = link_rates(pos);
  double sum = 0.0;
  for (double r : rates) sum += r;
  return sum / static_cast<double>(rates.size());
}

Swarm init_swarm(const BeamwidthProblem& problem, const PsoConfig& cfg, std::uint64_t seed) {
  Swarm s;
  const std::size_t dims = problem.dimensions();
  s.particles.resize(static_cast<std::size_t>(cfg.swarm_size));
  for (std::size_t k = 0; k < s.particles.size(); ++k) {
    Particle& p = s.particles[k];
    p.rng = make_stream(seed, "pso-particle", k);
    p.position.assign(dims, cfg.init_beamwidth);
    problem.repair(p.position);
    p.velocity.assign(dims, 0.0);
    if (k != 0) {
      std::uniform_real_distribution<double> vel(cfg.velocity_min, cfg.velocity_max);
      for (double& v : p.velocity) v = vel(p.rng);
    }
    p.fitness = problem.fitness(p.position);
    p.best_position = p.position;
    p.best_fitness = p.fitness;
    if (k == 0 || p.fitness > s.best_fitness) {
      s.best_fitness = p.fitness;
      s.best_position = p.position;
    }
  }
  return s;
}

void pso_step(Swarm& s, const BeamwidthProblem& problem, const PsoConfig& cfg) {
  const std::size_t dims = problem.dimensions();
  for (Particle& p : s.particles) {
    double r_c = uniform01(p.rng);
    double r_s = uniform01(p.rng);
    for (std::size_t d = 0; d < dims; ++d) {
      if (cfg.per_dimension_random && d > 0) {
        r_c = uniform01(p.rng);
        r_s = uniform01(p.rng);
      }
      p.velocity[d] = cfg.inertia * p.velocity[d] + cfg.cognitive * r_c * (p.best_position[d] - p.position[d]) +
                      cfg.social * r_s * (s.best_position[d] - p.position[d]);
      p.position[d] += p.velocity[d];
    }
    problem.repair(p.position);
    p.fitness = problem.fitness(p.position);
    if (p.fitness > p.best_fitness) {
      p.best_fitness = p.fitness;
      p.best_position = p.position;
    }
  }
  // Synchronous global-best update after the whole sweep.
  for (const Particle& p : s.particles) {
    if (p.best_fitness > s.best_fitness) {
      s.best_fitness = p.best_fitness;
      s.best_position = p.best_position;
    }
  }
  ++s.iteration;
}

PsoResult optimize(const BeamwidthProblem& problem, const PsoConfig& cfg, std::uint64_t seed) {
  PsoResult res;
  if (problem.links() == 0) return res;
  Swarm s = init_swarm(problem, cfg, seed);
  res.trace.push_back(s.best_fitness);
  for (int it = 0; it < cfg.iterations; ++it) {
    pso_step(s, problem, cfg);
    res.trace.push_back(s.best_fitness);
  }
  for (std::size_t l = 0; l < problem.links(); ++l) {
    res.tx_width.push_back(s.best_position[2 * l]);
    res.rx_width.push_back(s.best_position[2 * l + 1]);
  }
  res.fitness = s.best_fitness;
  return res;
}

}  // namespace v2v
