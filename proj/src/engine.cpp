#include "v2v/engine.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_map>

#include "v2v/errors.hpp"
#include "v2v/units.hpp"

namespace v2v {

std::string to_string(Method m) {
  switch (m) {
    case Method::kWaf: return "waf";
    case Method::kPso: return "pso";
    case Method::kMind: return "mind";
    case Method::kAsyn: return "asyn";
  }
  return "?";
}

Method parse_method(const std::string& s) {
  if (s == "waf") return Method::kWaf;
  if (s == "pso") return Method::kPso;
  if (s == "mind") return Method::kMind;
  if (s == "asyn") return Method::kAsyn;
  throw ConfigError("unknown method '" + s + "' (expected waf, pso, mind or asyn)");
}

int SimConfig::slots_per_schedule() const {
  return static_cast<int>(std::lround(scheduling_slot_ms / radio.slot_ms));
}

std::int64_t SimConfig::total_slots() const {
  return static_cast<std::int64_t>(std::ceil(total_time_ms / radio.slot_ms - 1e-9));
}

namespace {

bool divisible(double a, double b) {
  const double q = a / b;
  return std::abs(q - std::round(q)) < 1e-9 * std::max(1.0, q);
}

}  // namespace

void SimConfig::validate() const {
  highway.validate();
  radio.validate();
  blockage.validate();
  antenna.validate();
  traffic.validate();
  association.validate();
  pso.validate();
  if (!(total_time_ms > 0)) throw ConfigError("simulation.total_time_ms must be > 0");
  if (!divisible(total_time_ms, radio.slot_ms))
    throw ConfigError("simulation.total_time_ms must be a multiple of the transmission slot");
  if (!(scheduling_slot_ms > 0) || !divisible(scheduling_slot_ms, radio.slot_ms))
    throw ConfigError("simulation.scheduling_slot_ms must be a positive multiple of the transmission slot");
  if (!(antenna.pilot_ms < radio.slot_ms)) throw ConfigError("antenna.pilot_ms must be shorter than radio.slot_ms");
  if (!(fixed_beamwidth > 0 && fixed_beamwidth <= kTwoPi))
    throw ConfigError("antenna.fixed_beamwidth_deg must be in (0, 360]");
  if (!alignment_feasible(fixed_beamwidth, fixed_beamwidth, antenna, radio.slot_ms))
    throw ConfigError("antenna.fixed_beamwidth_deg violates the alignment bound");
  if (!alignment_feasible(antenna.min_beamwidth, antenna.min_beamwidth, antenna, radio.slot_ms))
    throw ConfigError("antenna.min_beamwidth_deg violates the alignment bound");
  if (!alignment_feasible(association.exploration_beamwidth, association.exploration_beamwidth, antenna,
                          radio.slot_ms))
    throw ConfigError("association.exploration_beamwidth_deg violates the alignment bound");
}

Simulation::Simulation(SimConfig cfg, RunHooks hooks)
    : cfg_(std::move(cfg)),
      hooks_(std::move(hooks)),
      highway_((cfg_.validate(), cfg_.highway), make_stream(cfg_.seed, "mobility")),
      exploration_rng_(make_stream(cfg_.seed, "exploration")) {
  if (cfg_.initial_vehicles) highway_.set_vehicles(*cfg_.initial_vehicles);
  for (const auto& v : highway_.vehicles()) {
    if (v.role != Role::kTx) continue;
    queues_.emplace(v.id, PacketQueue{});
    arrival_rng_.emplace(v.id, make_stream(cfg_.seed, "arrivals", static_cast<std::uint64_t>(v.id)));
  }
  metrics_.method = to_string(cfg_.method);
  metrics_.seed = cfg_.seed;
}

const Vehicle* Simulation::find(VehicleId id) const {
  for (const auto& v : highway_.vehicles())
    if (v.id == id) return &v;
  return nullptr;
}

ActiveLink Simulation::align(const Vehicle& tx, const Vehicle& rx, double width_tx, double width_rx) const {
  const Point pt = tx.antenna(cfg_.highway);
  const Point pr = rx.antenna(cfg_.highway);
  ActiveLink l;
  l.tx = tx.id;
  l.rx = rx.id;
  l.tx_beam = {width_tx, bearing(pt, pr)};
  l.rx_beam = {width_rx, bearing(pr, pt)};
  l.tau_ms = alignment_delay(width_tx, width_rx, cfg_.antenna, cfg_.slot_ms());
  l.aligning = true;
  return l;
}

void Simulation::apply_pairs(const std::vector<Pair>& pairs, double width_tx, double width_rx,
                             std::vector<ActiveLink>& out) {
  out.clear();
  for (const auto& [tx, rx] : pairs) out.push_back(align(*find(tx), *find(rx), width_tx, width_rx));
}

std::vector<Candidate> Simulation::learned_candidates(std::int64_t t) {
  const auto& vehicles = highway_.vehicles();
  const double explore_tau = alignment_delay(cfg_.association.exploration_beamwidth,
                                             cfg_.association.exploration_beamwidth, cfg_.antenna, cfg_.slot_ms());
  std::vector<Candidate> out;
  for (const auto& rx : vehicles) {
    if (rx.role != Role::kRx) continue;
    auto log = csi_.find(rx.id);
    if (log == csi_.end()) continue;
    for (const auto& tx : neighbors(rx, vehicles, cfg_.highway.coverage_radius, cfg_.highway)) {
      std::vector<CsiRecord> recs;
      for (const auto& r : log->second)
        if (r.tx == tx.id) recs.push_back(r);
      const auto est = estimate_rate(recs, t - 1, cfg_.association.recency_decay, explore_tau, cfg_.slot_ms(),
                                     cfg_.radio.bandwidth_hz);
      if (!est) continue;
      const auto u = utilities(est->rate_bps, tx.speed - rx.speed, cfg_.traffic, cfg_.association);
      if (!u) continue;
      out.push_back({tx.id, rx.id, u->tx, u->rx, est->rate_bps});
    }
  }
  std::sort(out.begin(), out.end(), [](const Candidate& a, const Candidate& b) {
    return std::pair(a.tx, a.rx) < std::pair(b.tx, b.rx);
  });
  return out;
}

void Simulation::schedule(std::int64_t t) {
  SchedulingEvent ev;
  ev.slot = t;
  ev.method = cfg_.method;
  const auto& vehicles = highway_.vehicles();
  const double psi = cfg_.antenna.sector_beamwidth;
  const double fixed = cfg_.fixed_beamwidth;

  switch (cfg_.method) {
    case Method::kWaf:
    case Method::kPso: {
      if (t == 0) {
        // No CSI yet: distance pairing with sector-level beams.
        ev.bootstrap = true;
        ev.pairs = mind_pairing(vehicles, cfg_.highway.coverage_radius, cfg_.highway);
        apply_pairs(ev.pairs, psi, psi, links_);
      } else {
        ev.candidates = learned_candidates(t);
        ev.pairs = deferred_acceptance(ev.candidates).pairs;
        apply_pairs(ev.pairs, fixed, fixed, links_);
        if (cfg_.method == Method::kPso && !links_.empty()) {
          std::vector<std::pair<const Vehicle*, const Vehicle*>> vp;
          std::vector<LinkGeometry> geo;
          for (const auto& l : links_) {
            const Vehicle* a = find(l.tx);
            const Vehicle* b = find(l.rx);
            vp.emplace_back(a, b);
            geo.push_back({a->antenna(cfg_.highway), b->antenna(cfg_.highway), l.tx_beam, l.rx_beam});
          }
          const BlockerIndex index(vehicles, cfg_.highway);
          BeamwidthProblem problem(
              InterferenceModel(geo, channel_matrix(vp, index, cfg_.highway, cfg_.blockage), cfg_.radio,
                                cfg_.antenna.sidelobe_gain),
              cfg_.antenna, cfg_.radio);
          const auto res = optimize(problem, cfg_.pso, splitmix64(cfg_.seed ^ fnv1a("pso")) ^ static_cast<std::uint64_t>(t));
          for (std::size_t k = 0; k < links_.size(); ++k) {
            links_[k].tx_beam.width = res.tx_width[k];
            links_[k].rx_beam.width = res.rx_width[k];
            links_[k].tau_ms = alignment_delay(res.tx_width[k], res.rx_width[k], cfg_.antenna, cfg_.slot_ms());
          }
          ev.pso_trace = res.trace;
        }
      }
      hoods_ = receiver_neighborhoods(vehicles, cfg_.highway);
      csi_.clear();
      break;
    }
    case Method::kMind:
      ev.pairs = mind_pairing(vehicles, cfg_.highway.coverage_radius, cfg_.highway);
      apply_pairs(ev.pairs, fixed, fixed, links_);
      break;
    case Method::kAsyn:
      // Long-term pairs live across scheduling slots.
      for (const auto& l : links_) ev.pairs.emplace_back(l.tx, l.rx);
      break;
  }

  std::size_t transmitters = 0;
  for (const auto& v : vehicles) transmitters += v.role == Role::kTx ? 1 : 0;
  ev.transmitters = transmitters;
  if (transmitters > 0)
    metrics_.matched_fraction.push_back(static_cast<double>(links_.size()) / static_cast<double>(transmitters));
  for (const auto& l : links_) matched_in_window_.insert(l.tx);
  ++metrics_.scheduling_events;
  ev.links = links_;

  if (hooks_.matching_csv) {
    std::map<Pair, const Candidate*> by_pair;
    for (const auto& c : ev.candidates) by_pair[{c.tx, c.rx}] = &c;
    for (const auto& l : links_) {
      auto& o = *hooks_.matching_csv;
      o << t << ',' << l.tx << ',' << l.rx << ',' << to_string(cfg_.method) << ',';
      if (auto it = by_pair.find({l.tx, l.rx}); it != by_pair.end())
        o << format_number(it->second->u_tx) << ',' << format_number(it->second->u_rx) << ','
          << format_number(it->second->est_rate);
      else
        o << ",,";
      o << '\n';
    }
  }
  if (hooks_.pso_csv)
    for (std::size_t k = 0; k < ev.pso_trace.size(); ++k)
      *hooks_.pso_csv << t << ',' << k << ',' << format_number(ev.pso_trace[k]) << '\n';
  if (hooks_.on_schedule) hooks_.on_schedule(ev);
}

void Simulation::transmission_slot(std::int64_t t) {
  const double slot = cfg_.slot_ms();
  const double t_start = static_cast<double>(t) * slot;
  const double t_end = t_start + slot;
  const int n_sched = cfg_.slots_per_schedule();

  // Mobility.
  const auto moved = highway_.advance(slot);
  if (!moved.exited.empty()) {
    std::set<VehicleId> gone;
    for (const auto& v : moved.exited) {
      gone.insert(v.id);
      queues_.erase(v.id);
      arrival_rng_.erase(v.id);
    }
    std::erase_if(links_, [&](const ActiveLink& l) { return gone.contains(l.tx) || gone.contains(l.rx); });
    if (cfg_.method == Method::kAsyn) asyn_.on_exit(moved.exited);
  }
  for (const auto& v : moved.entered) {
    if (v.role != Role::kTx) continue;
    queues_.emplace(v.id, PacketQueue{});
    arrival_rng_.emplace(v.id, make_stream(cfg_.seed, "arrivals", static_cast<std::uint64_t>(v.id)));
  }
  const auto& vehicles = highway_.vehicles();
  if (cfg_.method == Method::kAsyn && !moved.entered.empty()) {
    for (const auto& [tx, rx] : asyn_.on_entry(vehicles, cfg_.highway, cfg_.association.asyn_window_m)) {
      links_.push_back(align(*find(tx), *find(rx), cfg_.fixed_beamwidth, cfg_.fixed_beamwidth));
      matched_in_window_.insert(tx);
    }
  }

  // Drift and rates: steering stays as aligned, geometry is current.
  std::map<VehicleId, double> tx_rate;
  if (!links_.empty()) {
    std::vector<std::pair<const Vehicle*, const Vehicle*>> vp;
    std::vector<LinkGeometry> geo;
    std::vector<double> tw;
    std::vector<double> rw;
    for (const auto& l : links_) {
      const Vehicle* a = find(l.tx);
      const Vehicle* b = find(l.rx);
      vp.emplace_back(a, b);
      geo.push_back({a->antenna(cfg_.highway), b->antenna(cfg_.highway), l.tx_beam, l.rx_beam});
      tw.push_back(l.tx_beam.width);
      rw.push_back(l.rx_beam.width);
    }
    const BlockerIndex index(vehicles, cfg_.highway);
    const InterferenceModel model(geo, channel_matrix(vp, index, cfg_.highway, cfg_.blockage), cfg_.radio,
                                  cfg_.antenna.sidelobe_gain);
    const auto sinrs = model.sinr_all(tw, rw);
    for (std::size_t k = 0; k < links_.size(); ++k) {
      auto& l = links_[k];
      const double r = link_rate(sinrs[k], l.tau_ms, slot, cfg_.radio.bandwidth_hz, l.aligning);
      l.aligning = false;
      tx_rate[l.tx] = r;
      metrics_.rate_samples.push_back(r);
    }
  }

  // Service, deadlines, arrivals.
  const double deadline = cfg_.traffic.deadline();
  const bool boundary = (t + 1) % n_sched == 0;
  SlotEvent se;
  se.slot = t;
  se.time_ms = t_end;
  for (auto& [id, q] : queues_) {
    const auto it = tx_rate.find(id);
    const double rate = it == tx_rate.end() ? 0.0 : it->second;
    auto served = serve(q, rate, t_start, slot, deadline);
    const std::size_t n = draw_arrivals(cfg_.traffic, slot, arrival_rng_.at(id));
    DeadlineEvent events = DeadlineEvent::kNone;
    if (n > 0) events = events | DeadlineEvent::kArrival;
    if (boundary) events = events | DeadlineEvent::kSchedulingBoundary;
    const std::size_t expired = enforce_deadlines(q, t_end, rate, events, deadline);
    const std::size_t overflow = q.push(n, t_end, cfg_.traffic.packet_bits, cfg_.traffic.max_queue);
    const std::size_t dropped = served.dropped + expired + overflow;

    window_[id].add_slot(served.delays, n, dropped);
    metrics_.arrivals += n;
    metrics_.delivered += served.delays.size();
    metrics_.dropped += dropped;
    metrics_.delay_samples.insert(metrics_.delay_samples.end(), served.delays.begin(), served.delays.end());

    if (hooks_.slot_csv) {
      auto& o = *hooks_.slot_csv;
      const auto m = slot_mean_delay(served.delays);
      o << t << ',' << id << ',' << format_number(q.length(cfg_.traffic.packet_bits)) << ','
        << served.delays.size() << ',' << dropped << ',' << (m ? format_number(*m) : std::string()) << '\n';
    }
    if (hooks_.on_slot) {
      QueueSnapshot s;
      s.tx = id;
      s.matched = it != tx_rate.end();
      s.length = q.length(cfg_.traffic.packet_bits);
      s.queued = q.size();
      s.arrivals = q.arrivals();
      s.delivered = q.delivered();
      s.dropped = q.dropped();
      s.delays = std::move(served.delays);
      s.slot_arrivals = n;
      s.slot_dropped = dropped;
      se.queues.push_back(std::move(s));
    }
  }

  // Link exploration for the next window's estimates.
  if (cfg_.method == Method::kWaf || cfg_.method == Method::kPso) {
    const ExplorationContext ctx{&cfg_.highway, &cfg_.radio, &cfg_.antenna, &cfg_.blockage,
                                 cfg_.association.exploration_beamwidth};
    explore_slot(vehicles, hoods_, t, ctx, exploration_rng_, csi_);
  }

  if (hooks_.snapshot_csv)
    for (const auto& v : vehicles)
      *hooks_.snapshot_csv << format_number(t_end) << ',' << v.id << ',' << (v.role == Role::kTx ? "vtx" : "vrx")
                           << ',' << v.lane << ',' << format_number(v.position) << ',' << format_number(v.speed)
                           << '\n';
  if (hooks_.on_slot) hooks_.on_slot(se);
}

void Simulation::close_window(std::int64_t window_start) {
  SchedulingPoint p;
  p.slot = window_start;
  double drop_sum = 0.0;
  double delay_sum = 0.0;
  int with_delay = 0;
  for (VehicleId tx : matched_in_window_) {
    auto it = window_.find(tx);
    if (it == window_.end() || it->second.resolved() == 0) continue;
    const auto s = it->second.stats();
    drop_sum += s.drop_ratio;
    ++p.transmitters;
    if (s.mean_delay) {
      delay_sum += *s.mean_delay;
      ++with_delay;
    }
  }
  if (p.transmitters > 0) {
    p.drop_ratio = drop_sum / p.transmitters;
    if (with_delay > 0) p.mean_delay = delay_sum / with_delay;
    metrics_.points.push_back(p);
  }
  window_.clear();
  matched_in_window_.clear();
}

MetricsBundle Simulation::run() {
  const std::int64_t total = cfg_.total_slots();
  const int n = cfg_.slots_per_schedule();
  std::int64_t t = 0;
  if (hooks_.slot_csv) *hooks_.slot_csv << "t,vtx_id,Q,delivered,dropped,mean_delay\n";
  if (hooks_.matching_csv) *hooks_.matching_csv << "t_s,vtx_id,vrx_id,method,utility_tx,utility_rx,est_rate\n";
  if (hooks_.snapshot_csv) *hooks_.snapshot_csv << "t,id,role,lane,x,speed\n";
  if (hooks_.pso_csv) *hooks_.pso_csv << "t_s,iteration,best_fitness\n";
  try {
    for (; t < total; ++t) {
      if (t % n == 0) {
        if (t > 0) close_window(window_start_);
        window_start_ = t;
        schedule(t);
      }
      transmission_slot(t);
    }
    if (total > 0) close_window(window_start_);
  } catch (const RunError&) {
    throw;
  } catch (const std::exception& e) {
    throw RunError(t, e.what());
  }
  metrics_.slots = total;
  return metrics_;
}

MetricsBundle run(const SimConfig& cfg, RunHooks hooks) {
  Simulation sim(cfg, std::move(hooks));
  return sim.run();
}

}  // namespace v2v
