#include "v2v/radio.hpp"

#include <algorithm>
#include <cmath>

#include "v2v/errors.hpp"
#include "v2v/units.hpp"

namespace v2v {

const BlockageEntry& BlockageParams::at(int blockers) const {
  const auto n = static_cast<std::size_t>(std::max(blockers, 0));
  return table[std::min(n, table.size() - 1)];
}

void BlockageParams::validate() const {
  if (table.empty()) throw ConfigError("blockage.table must have at least one entry");
  for (const auto& e : table)
    if (!std::isfinite(e.exponent) || !std::isfinite(e.intercept_db))
      throw ConfigError("blockage.table entries must be finite");
}

void AntennaConfig::validate() const {
  if (sidelobe_gain < 0 || sidelobe_gain >= 1) throw ConfigError("antenna.sidelobe_gain must be in [0,1)");
  if (!(min_beamwidth > 0)) throw ConfigError("antenna.min_beamwidth_deg must be > 0");
  if (sector_beamwidth < min_beamwidth || sector_beamwidth > kTwoPi)
    throw ConfigError("antenna.sector_beamwidth_deg must be in [min_beamwidth, 360]");
  if (!(pilot_ms > 0)) throw ConfigError("antenna.pilot_ms must be > 0");
}

double RadioConfig::noise_watt() const {
  return dbm_to_watt(noise_density_dbm_hz) * bandwidth_hz;
}

double RadioConfig::tx_power_watt() const { return dbm_to_watt(tx_power_dbm); }

void RadioConfig::validate() const {
  if (!(bandwidth_hz > 0)) throw ConfigError("radio.bandwidth_hz must be > 0");
  if (!(slot_ms > 0)) throw ConfigError("radio.slot_ms must be > 0");
}

double channel_gain_db(double s, int blockers, const BlockageParams& params) {
  if (!(s > 0)) throw std::domain_error("channel_gain_db: distance must be > 0");
  const auto& e = params.at(blockers);
  return 10.0 * e.exponent * std::log10(s) + e.intercept_db + 15.0 * s / 1000.0;
}

double channel_gain_linear(double s, int blockers, const BlockageParams& params) {
  return std::pow(10.0, -channel_gain_db(s, blockers, params) / 10.0);
}

double mainlobe_gain(double width, double sidelobe) {
  return (kTwoPi - (kTwoPi - width) * sidelobe) / width;
}

double antenna_gain(double width, double error, double sidelobe) {
  return std::abs(error) <= 0.5 * width ? mainlobe_gain(width, sidelobe) : sidelobe;
}

double antenna_gain(const BeamState& beam, Endpoint end, const AntennaConfig& cfg) {
  return end == Endpoint::kTx ? antenna_gain(beam.tx.width, beam.error_tx, cfg.sidelobe_gain)
                              : antenna_gain(beam.rx.width, beam.error_rx, cfg.sidelobe_gain);
}

double gain_toward(Point from, const Beam& beam, Point to, double sidelobe) {
  return antenna_gain(beam.width, wrap_angle(bearing(from, to) - beam.steering), sidelobe);
}

double min_beamwidth_product(const AntennaConfig& cfg, double slot_ms) {
  return cfg.pilot_ms / slot_ms * cfg.sector_beamwidth * cfg.sector_beamwidth;
}

bool alignment_feasible(double width_tx, double width_rx, const AntennaConfig& cfg, double slot_ms) {
  // Relative slack so that a product sitting exactly on the bound passes.
  return width_tx * width_rx >= min_beamwidth_product(cfg, slot_ms) * (1.0 - 1e-12);
}

double alignment_delay(double width_tx, double width_rx, const AntennaConfig& cfg, double slot_ms) {
  if (!(width_tx > 0 && width_rx > 0) || !alignment_feasible(width_tx, width_rx, cfg, slot_ms))
    throw ConstraintViolation("beamwidth product below the alignment bound");
  const double tau = cfg.sector_beamwidth * cfg.sector_beamwidth / (width_tx * width_rx) * cfg.pilot_ms;
  return std::min(tau, slot_ms);
}

double shannon_rate(double sinr, double bandwidth_hz) { return bandwidth_hz * std::log2(1.0 + sinr); }

double link_rate(double sinr, double tau_ms, double slot_ms, double bandwidth_hz, bool aligning) {
  const double c = shannon_rate(sinr, bandwidth_hz);
  return aligning ? (1.0 - tau_ms / slot_ms) * c : c;
}

InterferenceModel::InterferenceModel(std::span<const LinkGeometry> links, ChannelMatrix gains,
                                     const RadioConfig& radio, double sidelobe)
    : n_(links.size()),
      gains_(std::move(gains)),
      tx_offset_(n_ * n_),
      rx_offset_(n_ * n_),
      power_(radio.tx_power_watt()),
      noise_(radio.noise_watt()),
      sidelobe_(sidelobe) {
  for (std::size_t a = 0; a < n_; ++a) {
    for (std::size_t b = 0; b < n_; ++b) {
      tx_offset_[a * n_ + b] = wrap_angle(bearing(links[a].tx, links[b].rx) - links[a].tx_beam.steering);
      rx_offset_[a * n_ + b] = wrap_angle(bearing(links[b].rx, links[a].tx) - links[b].rx_beam.steering);
    }
  }
}

double InterferenceModel::sinr(std::size_t b, std::span<const double> tx_width,
                               std::span<const double> rx_width) const {
  double signal = 0.0;
  double interference = 0.0;
  const double g_rx = mainlobe_gain(rx_width[b], sidelobe_);
  for (std::size_t a = 0; a < n_; ++a) {
    const double p = power_ * antenna_gain(tx_width[a], tx_offset_[a * n_ + b], sidelobe_) * gains_(a, b) *
                     (std::abs(rx_offset_[a * n_ + b]) <= 0.5 * rx_width[b] ? g_rx : sidelobe_);
    if (a == b)
      signal = p;
    else
      interference += p;
  }
  return signal / (interference + noise_);
}

std::vector<double> InterferenceModel::sinr_all(std::span<const double> tx_width,
                                                std::span<const double> rx_width) const {
  std::vector<double> g_tx(n_);
  for (std::size_t a = 0; a < n_; ++a) g_tx[a] = mainlobe_gain(tx_width[a], sidelobe_);
  std::vector<double> out(n_);
  for (std::size_t b = 0; b < n_; ++b) {
    double signal = 0.0;
    double interference = 0.0;
    const double g_rx = mainlobe_gain(rx_width[b], sidelobe_);
    const double half_rx = 0.5 * rx_width[b];
    for (std::size_t a = 0; a < n_; ++a) {
      const std::size_t i = a * n_ + b;
      const double p = power_ * (std::abs(tx_offset_[i]) <= 0.5 * tx_width[a] ? g_tx[a] : sidelobe_) * gains_(a, b) *
                       (std::abs(rx_offset_[i]) <= half_rx ? g_rx : sidelobe_);
      if (a == b)
        signal = p;
      else
        interference += p;
    }
    out[b] = signal / (interference + noise_);
  }
  return out;
}

double sinr(std::span<const LinkGeometry> links, const ChannelMatrix& gains, std::size_t target,
            const RadioConfig& radio, double sidelobe) {
  std::vector<double> tw(links.size());
  std::vector<double> rw(links.size());
  for (std::size_t k = 0; k < links.size(); ++k) {
    tw[k] = links[k].tx_beam.width;
    rw[k] = links[k].rx_beam.width;
  }
  InterferenceModel model(links, gains, radio, sidelobe);
  return model.sinr(target, tw, rw);
}

BeamState drift_beams(Point tx0, Point rx0, double tx_speed_kmh, double rx_speed_kmh, double elapsed_ms,
                      double width_tx, double width_rx) {
  BeamState s;
  s.tx = {width_tx, bearing(tx0, rx0)};
  s.rx = {width_rx, bearing(rx0, tx0)};
  const Point tx1{tx0.x + kmh_to_m_per_ms(tx_speed_kmh) * elapsed_ms, tx0.y};
  const Point rx1{rx0.x + kmh_to_m_per_ms(rx_speed_kmh) * elapsed_ms, rx0.y};
  s.error_tx = wrap_angle(bearing(tx1, rx1) - s.tx.steering);
  s.error_rx = wrap_angle(bearing(rx1, tx1) - s.rx.steering);
  return s;
}

}  // namespace v2v

namespace v2v {

ChannelMatrix channel_matrix(std::span<const std::pair<const Vehicle*, const Vehicle*>> pairs,
                             const BlockerIndex& blockers, const HighwayConfig& highway,
                             const BlockageParams& params) {
  ChannelMatrix m(pairs.size());
  for (std::size_t a = 0; a < pairs.size(); ++a) {
    const Vehicle& tx = *pairs[a].first;
    const Point pt = tx.antenna(highway);
    for (std::size_t b = 0; b < pairs.size(); ++b) {
      const Vehicle& rx = *pairs[b].second;
      // Bodies never overlap, so distinct vehicles are never co-located.
      const double s = std::max(distance(pt, rx.antenna(highway)), 1e-3);
      m(a, b) = channel_gain_linear(s, blockers.count(tx, rx), params);
    }
  }
  return m;
}

}  // namespace v2v
