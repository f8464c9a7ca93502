#include "v2v/association.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <unordered_map>

#include "v2v/errors.hpp"

namespace v2v {

void AssociationConfig::validate() const {
  if (!(recency_decay > 0 && recency_decay <= 1)) throw ConfigError("association.recency_decay must be in (0,1]");
  if (!(speed_normalizer_kmh > 0)) throw ConfigError("association.speed_normalizer_kmh must be > 0");
  if (!(queue_normalizer > 0)) throw ConfigError("association.queue_normalizer must be > 0");
  if (!(exploration_beamwidth > 0)) throw ConfigError("association.exploration_beamwidth_deg must be > 0");
  if (asyn_window_m < 0) throw ConfigError("association.asyn_window_m must be >= 0");
}

Neighborhoods receiver_neighborhoods(std::span<const Vehicle> vehicles, const HighwayConfig& cfg) {
  Neighborhoods out;
  for (const auto& v : vehicles) {
    if (v.role != Role::kRx) continue;
    auto& list = out[v.id];
    for (const auto& w : neighbors(v, vehicles, cfg.coverage_radius, cfg)) list.push_back(w.id);
    std::sort(list.begin(), list.end());
  }
  return out;
}

std::vector<Pair> random_exploration_matching(const Neighborhoods& hoods, Rng& rng) {
  std::vector<VehicleId> receivers;
  receivers.reserve(hoods.size());
  for (const auto& [rx, _] : hoods) receivers.push_back(rx);
  std::shuffle(receivers.begin(), receivers.end(), rng);

  std::set<VehicleId> taken;
  std::vector<Pair> out;
  std::vector<VehicleId> free;
  for (VehicleId rx : receivers) {
    free.clear();
    for (VehicleId tx : hoods.at(rx))
      if (!taken.contains(tx)) free.push_back(tx);
    if (free.empty()) continue;
    std::uniform_int_distribution<std::size_t> pick(0, free.size() - 1);
    const VehicleId tx = free[pick(rng)];
    taken.insert(tx);
    out.emplace_back(tx, rx);
  }
  return out;
}

void explore_slot(std::span<const Vehicle> vehicles, const Neighborhoods& hoods, std::int64_t slot,
                  const ExplorationContext& ctx, Rng& rng, CsiLog& log) {
  std::unordered_map<VehicleId, const Vehicle*> by_id;
  for (const auto& v : vehicles) by_id.emplace(v.id, &v);

  // Restrict the window-start neighbourhoods to vehicles still on the road.
  Neighborhoods present;
  for (const auto& [rx, txs] : hoods) {
    if (!by_id.contains(rx)) continue;
    auto& list = present[rx];
    for (VehicleId tx : txs)
      if (by_id.contains(tx)) list.push_back(tx);
  }
  const auto matching = random_exploration_matching(present, rng);
  if (matching.empty()) return;

  std::vector<std::pair<const Vehicle*, const Vehicle*>> pairs;
  std::vector<LinkGeometry> links;
  for (const auto& [tx, rx] : matching) {
    const Vehicle* t = by_id.at(tx);
    const Vehicle* r = by_id.at(rx);
    pairs.emplace_back(t, r);
    const Point pt = t->antenna(*ctx.highway);
    const Point pr = r->antenna(*ctx.highway);
    links.push_back({pt, pr, {ctx.beamwidth, bearing(pt, pr)}, {ctx.beamwidth, bearing(pr, pt)}});
  }
  const BlockerIndex index(vehicles, *ctx.highway);
  InterferenceModel model(links, channel_matrix(pairs, index, *ctx.highway, *ctx.blockage), *ctx.radio,
                          ctx.antenna->sidelobe_gain);
  const std::vector<double> widths(links.size(), ctx.beamwidth);
  for (std::size_t k = 0; k < matching.size(); ++k)
    log[matching[k].second].push_back({slot, matching[k].first, model.sinr(k, widths, widths)});
}

std::optional<RateEstimate> estimate_rate(std::span<const CsiRecord> records, std::int64_t window_end,
                                          double decay, double tau_ms, double slot_ms, double bandwidth_hz) {
  if (records.empty()) return std::nullopt;
  RateEstimate est;
  est.weights.resize(records.size());
  double total = 0.0;
  for (std::size_t k = 0; k < records.size(); ++k) {
    est.weights[k] = std::pow(decay, static_cast<double>(window_end - records[k].slot));
    total += est.weights[k];
  }
  for (std::size_t k = 0; k < records.size(); ++k) {
    est.weights[k] /= total;
    est.rate_bps += est.weights[k] * link_rate(records[k].sinr, tau_ms, slot_ms, bandwidth_hz, true);
  }
  return est;
}

std::optional<UtilityPair> utilities(double est_rate_bps, double rel_speed_kmh, const TrafficConfig& traffic,
                                     const AssociationConfig& cfg) {
  if (!(est_rate_bps > 0)) return std::nullopt;
  // Everything in bits and milliseconds.
  const double rate = est_rate_bps / 1000.0;
  const double rho = traffic.influx();
  UtilityPair u;
  u.queue_proxy = traffic.packet_bits / rate;
  u.weight_tx = rho * (1.0 + std::abs(rel_speed_kmh) / cfg.speed_normalizer_kmh);
  u.weight_rx = rho * (2.0 - u.queue_proxy / cfg.queue_normalizer);
  u.tx = -u.weight_tx / rate;
  u.rx = -u.weight_rx / rate;
  return u;
}

MatchingResult deferred_acceptance(std::span<const Candidate> candidates) {
  // Receiver preference lists: best first.
  std::map<VehicleId, std::vector<const Candidate*>> prefs;
  // Transmitter view of each receiver, to compare held and new proposals.
  std::map<Pair, const Candidate*> lookup;
  for (const auto& c : candidates) {
    prefs[c.rx].push_back(&c);
    lookup[{c.tx, c.rx}] = &c;
  }
  for (auto& [rx, list] : prefs)
    std::sort(list.begin(), list.end(), [](const Candidate* a, const Candidate* b) {
      if (a->u_rx != b->u_rx) return a->u_rx > b->u_rx;
      return a->tx < b->tx;
    });

  auto tx_prefers = [&](VehicleId tx, VehicleId new_rx, VehicleId held_rx) {
    const double un = lookup.at({tx, new_rx})->u_tx;
    const double uh = lookup.at({tx, held_rx})->u_tx;
    if (un != uh) return un > uh;
    return new_rx < held_rx;
  };

  std::map<VehicleId, std::size_t> next;  // next index in each receiver's list
  std::map<VehicleId, VehicleId> held;    // tx -> rx
  std::deque<VehicleId> free;
  for (const auto& [rx, _] : prefs) free.push_back(rx);

  MatchingResult res;
  while (!free.empty()) {
    const VehicleId rx = free.front();
    free.pop_front();
    auto& list = prefs[rx];
    std::size_t& k = next[rx];
    if (k >= list.size()) continue;  // exhausted: stays single
    const VehicleId tx = list[k++]->tx;
    ++res.proposals;
    auto it = held.find(tx);
    if (it == held.end()) {
      held.emplace(tx, rx);
    } else if (tx_prefers(tx, rx, it->second)) {
      free.push_front(it->second);
      it->second = rx;
    } else {
      free.push_front(rx);
    }
  }
  for (const auto& [tx, rx] : held) res.pairs.emplace_back(tx, rx);
  return res;
}

std::vector<Pair> mind_pairing(std::span<const Vehicle> vehicles, double r_c, const HighwayConfig& cfg) {
  std::vector<const Vehicle*> txs;
  std::vector<const Vehicle*> rxs;
  for (const auto& v : vehicles) (v.role == Role::kTx ? txs : rxs).push_back(&v);
  std::sort(txs.begin(), txs.end(), [](const Vehicle* a, const Vehicle* b) {
    if (a->position != b->position) return a->position < b->position;
    return a->id < b->id;
  });
  std::vector<bool> used(rxs.size(), false);
  std::vector<Pair> out;
  for (const Vehicle* t : txs) {
    const Point pt = t->antenna(cfg);
    std::size_t best = rxs.size();
    double best_d = 0.0;
    for (std::size_t k = 0; k < rxs.size(); ++k) {
      if (used[k]) continue;
      const double d = distance(pt, rxs[k]->antenna(cfg));
      if (d > r_c) continue;
      if (best == rxs.size() || d < best_d || (d == best_d && rxs[k]->id < rxs[best]->id)) {
        best = k;
        best_d = d;
      }
    }
    if (best < rxs.size()) {
      used[best] = true;
      out.emplace_back(t->id, rxs[best]->id);
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

std::vector<Pair> AsynPairing::on_entry(std::span<const Vehicle> vehicles, const HighwayConfig& cfg,
                                        double window_m) {
  auto eligible = [&](const Vehicle& v) {
    return v.position <= window_m && !paired_.contains(v.id) && !widowed_.contains(v.id);
  };
  struct Option {
    double d;
    const Vehicle* tx;
    const Vehicle* rx;
  };
  std::vector<Option> options;
  for (const auto& t : vehicles) {
    if (t.role != Role::kTx || !eligible(t)) continue;
    for (const auto& r : vehicles) {
      if (r.role != Role::kRx || !eligible(r)) continue;
      if (std::abs(t.lane - r.lane) > 1) continue;
      const double d = distance(t.antenna(cfg), r.antenna(cfg));
      if (d <= cfg.coverage_radius) options.push_back({d, &t, &r});
    }
  }
  std::sort(options.begin(), options.end(), [](const Option& a, const Option& b) {
    if (a.d != b.d) return a.d < b.d;
    if (a.tx->id != b.tx->id) return a.tx->id < b.tx->id;
    return a.rx->id < b.rx->id;
  });
  std::vector<Pair> formed;
  for (const auto& o : options) {
    if (paired_.contains(o.tx->id) || paired_.contains(o.rx->id)) continue;
    paired_.insert(o.tx->id);
    paired_.insert(o.rx->id);
    tx_to_rx_.emplace(o.tx->id, o.rx->id);
    formed.emplace_back(o.tx->id, o.rx->id);
  }
  return formed;
}

void AsynPairing::on_exit(std::span<const Vehicle> exited) {
  for (const auto& v : exited) {
    widowed_.erase(v.id);
    if (!paired_.contains(v.id)) continue;
    VehicleId other = -1;
    for (auto it = tx_to_rx_.begin(); it != tx_to_rx_.end(); ++it) {
      if (it->first == v.id || it->second == v.id) {
        other = it->first == v.id ? it->second : it->first;
        tx_to_rx_.erase(it);
        break;
      }
    }
    paired_.erase(v.id);
    if (other >= 0) {
      paired_.erase(other);
      widowed_.insert(other);
    }
  }
}

}  // namespace v2v
