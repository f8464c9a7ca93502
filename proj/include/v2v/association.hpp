#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <utility>
#include <vector>

#include "v2v/geometry.hpp"
#include "v2v/queue.hpp"
#include "v2v/radio.hpp"
#include "v2v/rng.hpp"

namespace v2v {

struct AssociationConfig {
  double recency_decay = 0.9;              // W(t') proportional to decay^(t_s - t')
  double speed_normalizer_kmh = 70.0;      // |dv|_max
  double queue_normalizer = 50.0;          // Q_theta
  double exploration_beamwidth = 0.7853981633974483;  // rad
  double asyn_window_m = 20.0;

  void validate() const;
};

using Pair = std::pair<VehicleId, VehicleId>;  // (vTx, vRx)

/// One SINR sample logged by a receiver during link exploration.
struct CsiRecord {
  std::int64_t slot = 0;
  VehicleId tx = 0;
  double sinr = 0.0;
};

/// Exploration samples of the current window, keyed by receiver.
using CsiLog = std::map<VehicleId, std::vector<CsiRecord>>;

/// Candidate transmitters per receiver.
using Neighborhoods = std::map<VehicleId, std::vector<VehicleId>>;

Neighborhoods receiver_neighborhoods(std::span<const Vehicle> vehicles, const HighwayConfig& cfg);

/// Random one-to-one pairing of receivers with transmitters from their
/// neighbourhoods: receivers in random order, each taking a uniformly chosen
/// still-free candidate.
std::vector<Pair> random_exploration_matching(const Neighborhoods& hoods, Rng& rng);

struct ExplorationContext {
  const HighwayConfig* highway;
  const RadioConfig* radio;
  const AntennaConfig* antenna;
  const BlockageParams* blockage;
  double beamwidth;  // rad, both ends
};

/// One exploration slot: draws a random matching among vehicles present,
/// evaluates every receiver's SINR with only the exploration pairs active and
/// appends the samples to `log`.
void explore_slot(std::span<const Vehicle> vehicles, const Neighborhoods& hoods, std::int64_t slot,
                  const ExplorationContext& ctx, Rng& rng, CsiLog& log);

struct RateEstimate {
  double rate_bps = 0.0;
  std::vector<double> weights;  // aligned with the input records
};

/// Recency-weighted rate estimate from one transmitter's samples at one
/// receiver. Empty when there are no samples.
std::optional<RateEstimate> estimate_rate(std::span<const CsiRecord> records, std::int64_t window_end,
                                          double decay, double tau_ms, double slot_ms, double bandwidth_hz);

struct UtilityPair {
  double tx = 0.0;  // utility of the vRx for the vTx
  double rx = 0.0;  // utility of the vTx for the vRx
  double weight_tx = 0.0;
  double weight_rx = 0.0;
  double queue_proxy = 0.0;  // P_s / r_est, ms
};

/// Weighted alpha-fair (alpha = 2) utilities. Empty when the estimated rate
/// is not positive.
std::optional<UtilityPair> utilities(double est_rate_bps, double rel_speed_kmh, const TrafficConfig& traffic,
                                     const AssociationConfig& cfg);

/// A feasible vTx/vRx pair with both sides' utilities.
struct Candidate {
  VehicleId tx = 0;
  VehicleId rx = 0;
  double u_tx = 0.0;
  double u_rx = 0.0;
  double est_rate = 0.0;
};

struct MatchingResult {
  std::vector<Pair> pairs;  // sorted by tx id
  std::size_t proposals = 0;
};

/// Receiver-proposing deferred acceptance. Preferences are utility
/// descending with the lower id first on ties. Only listed candidates are
/// acceptable.
MatchingResult deferred_acceptance(std::span<const Candidate> candidates);

/// Minimum-distance baseline: vTxs in order of position take the nearest
/// unpaired vRx within r_c.
std::vector<Pair> mind_pairing(std::span<const Vehicle> vehicles, double r_c, const HighwayConfig& cfg);

/// Entry-triggered long-term pairing baseline.
class AsynPairing {
 public:
  /// Pairs eligible singles (front window, same or adjacent lane, within
  /// r_c) greedily by distance. Returns only the newly formed pairs.
  std::vector<Pair> on_entry(std::span<const Vehicle> vehicles, const HighwayConfig& cfg, double window_m);
  /// Dissolves pairs touching exited vehicles; survivors stay single for
  /// the rest of their time on the segment.
  void on_exit(std::span<const Vehicle> exited);

  const std::map<VehicleId, VehicleId>& pairs() const { return tx_to_rx_; }
  bool widowed(VehicleId id) const { return widowed_.contains(id); }

 private:
  std::map<VehicleId, VehicleId> tx_to_rx_;
  std::set<VehicleId> paired_;
  std::set<VehicleId> widowed_;
};

}  // namespace v2v
