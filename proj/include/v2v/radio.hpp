#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "v2v/geometry.hpp"

namespace v2v {

struct BlockageEntry {
  double exponent = 2.0;       // pathloss exponent
  double intercept_db = 68.0;  // dB
};

/// Pathloss parameters indexed by blocker count; counts past the end use the
/// last entry.
struct BlockageParams {
  std::vector<BlockageEntry> table{{2.0, 68.0}, {2.0, 77.0}, {2.2, 83.0}, {2.4, 88.0}, {2.6, 92.0}};

  const BlockageEntry& at(int blockers) const;
  void validate() const;
};

struct AntennaConfig {
  double sector_beamwidth = 0.7853981633974483;  // rad (45 deg)
  double sidelobe_gain = 0.1;
  double min_beamwidth = 0.08726646259971647;  // rad (5 deg)
  double pilot_ms = 0.02;

  void validate() const;
};

struct RadioConfig {
  double bandwidth_hz = 2.16e9;
  double noise_density_dbm_hz = -174.0;
  double tx_power_dbm = 15.0;
  double carrier_ghz = 60.0;
  double slot_ms = 2.0;

  double noise_watt() const;
  double tx_power_watt() const;
  void validate() const;
};

struct Beam {
  double width = 0.0;     // rad
  double steering = 0.0;  // rad, absolute
};

enum class Endpoint { kTx, kRx };

struct BeamState {
  Beam tx;
  Beam rx;
  double error_tx = 0.0;  // rad, signed
  double error_rx = 0.0;
};

/// Positive pathloss in dB for a link of length s metres with n blockers,
/// including 15 dB/km oxygen absorption.
double channel_gain_db(double s, int blockers, const BlockageParams& params);
/// Linear power gain, 10^(-pathloss/10).
double channel_gain_linear(double s, int blockers, const BlockageParams& params);

/// Mainlobe gain of the ideal sector pattern.
double mainlobe_gain(double width, double sidelobe);
double antenna_gain(double width, double error, double sidelobe);
double antenna_gain(const BeamState& beam, Endpoint end, const AntennaConfig& cfg);
/// Gain of an antenna at `from` using `beam`, toward a point `to`.
double gain_toward(Point from, const Beam& beam, Point to, double sidelobe);

/// Smallest beamwidth product keeping the pilot sweep within one slot.
double min_beamwidth_product(const AntennaConfig& cfg, double slot_ms);
bool alignment_feasible(double width_tx, double width_rx, const AntennaConfig& cfg, double slot_ms);
/// Beam training time in ms; throws ConstraintViolation when it would exceed
/// the slot.
double alignment_delay(double width_tx, double width_rx, const AntennaConfig& cfg, double slot_ms);

double shannon_rate(double sinr, double bandwidth_hz);
/// bits/s over a slot; the alignment fraction is lost only when aligning.
double link_rate(double sinr, double tau_ms, double slot_ms, double bandwidth_hz, bool aligning);

/// One active transmitter/receiver pair in plan view.
struct LinkGeometry {
  Point tx;
  Point rx;
  Beam tx_beam;
  Beam rx_beam;
};

/// Square matrix of linear channel gains: (a, b) is from the transmitter of
/// link a to the receiver of link b.
class ChannelMatrix {
 public:
  ChannelMatrix() = default;
  explicit ChannelMatrix(std::size_t n) : n_(n), g_(n * n, 0.0) {}
  std::size_t size() const { return n_; }
  double& operator()(std::size_t a, std::size_t b) { return g_[a * n_ + b]; }
  double operator()(std::size_t a, std::size_t b) const { return g_[a * n_ + b]; }

 private:
  std::size_t n_ = 0;
  std::vector<double> g_;
};

/// Cached bearing offsets for one link set so that SINR can be re-evaluated
/// cheaply for many beamwidth assignments with fixed steering.
class InterferenceModel {
 public:
  InterferenceModel(std::span<const LinkGeometry> links, ChannelMatrix gains, const RadioConfig& radio,
                    double sidelobe);

  std::size_t size() const { return n_; }
  const ChannelMatrix& gains() const { return gains_; }

  double sinr(std::size_t link, std::span<const double> tx_width, std::span<const double> rx_width) const;
  /// Same values as sinr() for every link.
  std::vector<double> sinr_all(std::span<const double> tx_width, std::span<const double> rx_width) const;

 private:
  std::size_t n_;
  ChannelMatrix gains_;
  std::vector<double> tx_offset_;  // (a, b): tx of a toward rx of b, relative to a's steering
  std::vector<double> rx_offset_;  // (a, b): rx of b toward tx of a, relative to b's steering
  double power_;
  double noise_;
  double sidelobe_;
};

/// SINR at the receiver of `links[target]` with every other link transmitting.
double sinr(std::span<const LinkGeometry> links, const ChannelMatrix& gains, std::size_t target,
            const RadioConfig& radio, double sidelobe);

/// Beam state after `elapsed_ms` of straight-line motion from a perfectly
/// aligned start. Steering stays fixed; the errors are the bearing drift.
BeamState drift_beams(Point tx0, Point rx0, double tx_speed_kmh, double rx_speed_kmh, double elapsed_ms,
                      double width_tx, double width_rx);

}  // namespace v2v

namespace v2v {

class BlockerIndex;

/// Channel gains between every transmitter and every receiver of a set of
/// vehicle pairs, with blockers counted on the given snapshot.
ChannelMatrix channel_matrix(std::span<const std::pair<const Vehicle*, const Vehicle*>> pairs,
                             const BlockerIndex& blockers, const HighwayConfig& highway,
                             const BlockageParams& params);

}  // namespace v2v
