#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "v2v/association.hpp"
#include "v2v/geometry.hpp"
#include "v2v/metrics.hpp"
#include "v2v/pso.hpp"
#include "v2v/queue.hpp"
#include "v2v/radio.hpp"

namespace v2v {

enum class Method { kWaf, kPso, kMind, kAsyn };

std::string to_string(Method m);
Method parse_method(const std::string& s);

struct SimConfig {
  double total_time_ms = 30000.0;
  double scheduling_slot_ms = 100.0;
  Method method = Method::kWaf;
  double fixed_beamwidth = 0.08726646259971647;  // rad, WAF / MIND / ASYN
  std::uint64_t seed = 1;

  HighwayConfig highway;
  RadioConfig radio;  // radio.slot_ms is the transmission slot
  BlockageParams blockage;
  AntennaConfig antenna;
  TrafficConfig traffic;
  AssociationConfig association;
  PsoConfig pso;
  ReportConfig report;

  /// Fixture hook: replaces the spawned fleet when set.
  std::optional<std::vector<Vehicle>> initial_vehicles;

  double slot_ms() const { return radio.slot_ms; }
  int slots_per_schedule() const;
  std::int64_t total_slots() const;
  void validate() const;
};

/// One active link and the beam state agreed at its last alignment.
struct ActiveLink {
  VehicleId tx = 0;
  VehicleId rx = 0;
  Beam tx_beam;
  Beam rx_beam;
  double tau_ms = 0.0;
  bool aligning = false;  // next slot pays the alignment penalty
};

/// Everything decided at a scheduling instant.
struct SchedulingEvent {
  std::int64_t slot = 0;
  Method method = Method::kWaf;
  bool bootstrap = false;
  std::vector<Candidate> candidates;  // learned-utility game (WAF/PSO only)
  std::vector<Pair> pairs;
  std::vector<ActiveLink> links;
  std::size_t transmitters = 0;
  std::vector<double> pso_trace;
};

struct QueueSnapshot {
  VehicleId tx = 0;
  bool matched = false;
  double length = 0.0;  // packets
  std::size_t queued = 0;
  std::uint64_t arrivals = 0;
  std::uint64_t delivered = 0;
  std::uint64_t dropped = 0;
  std::vector<double> delays;  // this slot
  std::size_t slot_arrivals = 0;
  std::size_t slot_dropped = 0;
};

struct SlotEvent {
  std::int64_t slot = 0;
  double time_ms = 0.0;  // slot end
  std::vector<QueueSnapshot> queues;
};

/// Optional observers and CSV trace streams.
struct RunHooks {
  std::function<void(const SchedulingEvent&)> on_schedule;
  std::function<void(const SlotEvent&)> on_slot;
  std::ostream* slot_csv = nullptr;      // t, vtx_id, Q, delivered, dropped, mean_delay
  std::ostream* matching_csv = nullptr;  // t_s, vtx_id, vrx_id, method, utility_tx, utility_rx, est_rate
  std::ostream* snapshot_csv = nullptr;  // t, id, role, lane, x, speed
  std::ostream* pso_csv = nullptr;       // t_s, iteration, best_fitness
};

/// Two-timescale simulation. Per scheduling slot: learned rates, pairing,
/// beamwidths, alignment. Per transmission slot, in this order: mobility,
/// beam drift, SINR and rate, service, deadline check, arrivals, CSI log.
class Simulation {
 public:
  explicit Simulation(SimConfig cfg, RunHooks hooks = {});

  MetricsBundle run();

  const SimConfig& config() const { return cfg_; }

 private:
  void schedule(std::int64_t t);
  void transmission_slot(std::int64_t t);
  void close_window(std::int64_t window_start);
  void apply_pairs(const std::vector<Pair>& pairs, double width_tx, double width_rx, std::vector<ActiveLink>& out);
  const Vehicle* find(VehicleId id) const;
  ActiveLink align(const Vehicle& tx, const Vehicle& rx, double width_tx, double width_rx) const;
  std::vector<Candidate> learned_candidates(std::int64_t t);

  SimConfig cfg_;
  RunHooks hooks_;
  Highway highway_;
  Rng exploration_rng_;
  std::map<VehicleId, PacketQueue> queues_;
  std::map<VehicleId, Rng> arrival_rng_;
  std::vector<ActiveLink> links_;
  AsynPairing asyn_;
  CsiLog csi_;
  Neighborhoods hoods_;
  std::map<VehicleId, WindowAccumulator> window_;
  std::set<VehicleId> matched_in_window_;
  std::int64_t window_start_ = 0;
  MetricsBundle metrics_;
};

MetricsBundle run(const SimConfig& cfg, RunHooks hooks = {});

}  // namespace v2v
