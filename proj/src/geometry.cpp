#include "v2v/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "v2v/errors.hpp"
#include "v2v/units.hpp"

namespace v2v {

void HighwayConfig::validate() const {
  if (!(segment_length > 0)) throw ConfigError("highway.segment_length_m must be > 0");
  if (lane_count < 1) throw ConfigError("highway.lane_count must be >= 1");
  if (!(lane_width > 0)) throw ConfigError("highway.lane_width_m must be > 0");
  if (static_cast<int>(lane_speeds.size()) != lane_count)
    throw ConfigError("highway.lane_speeds_kmh must have lane_count entries");
  for (double s : lane_speeds)
    if (!(s > 0)) throw ConfigError("highway.lane_speeds_kmh entries must be > 0");
  if (!(density > 0)) throw ConfigError("highway.density_veh_per_km must be > 0");
  if (truck_fraction < 0 || truck_fraction > 1) throw ConfigError("highway.truck_fraction must be in [0,1]");
  if (vtx_probability < 0 || vtx_probability > 1) throw ConfigError("highway.vtx_probability must be in [0,1]");
  if (!(coverage_radius > 0)) throw ConfigError("highway.coverage_radius_m must be > 0");
  if (min_headway < 0) throw ConfigError("highway.min_headway_m must be >= 0");
  if (car_models.empty()) throw ConfigError("highway.car_models_m must not be empty");
  for (const Body& b : car_models)
    if (!(b.length > 0 && b.width > 0)) throw ConfigError("highway.car_models_m dimensions must be > 0");
  if (!(truck_body.length > 0 && truck_body.width > 0)) throw ConfigError("highway.truck_body_m dimensions must be > 0");
}

int HighwayConfig::target_count() const {
  return static_cast<int>(std::lround(density * segment_length / 1000.0));
}

Point Vehicle::antenna(const HighwayConfig& cfg) const {
  return {position, (lane + 0.5) * cfg.lane_width};
}

double distance(Point a, Point b) { return std::hypot(b.x - a.x, b.y - a.y); }

double bearing(Point from, Point to) { return std::atan2(to.y - from.y, to.x - from.x); }

RelativeKinematics relative_kinematics(const Vehicle& tx, const Vehicle& rx, const HighwayConfig& cfg) {
  const Point a = tx.antenna(cfg);
  const Point b = rx.antenna(cfg);
  return {distance(a, b), tx.speed - rx.speed, bearing(a, b), bearing(b, a)};
}

namespace {

Vehicle draw_vehicle(const HighwayConfig& cfg, Rng& rng, double vtx_probability) {
  Vehicle v;
  if (uniform01(rng) < cfg.truck_fraction) {
    v.kind = VehicleKind::kTruck;
    v.body = cfg.truck_body;
  } else {
    v.kind = VehicleKind::kCar;
    std::uniform_int_distribution<std::size_t> pick(0, cfg.car_models.size() - 1);
    v.body = cfg.car_models[pick(rng)];
  }
  v.role = uniform01(rng) < vtx_probability ? Role::kTx : Role::kRx;
  return v;
}

/// Lane with the fewest vehicles among `allowed`, ties broken uniformly.
int least_crowded(const std::vector<int>& counts, const std::vector<bool>& allowed, Rng& rng) {
  int best = std::numeric_limits<int>::max();
  std::vector<int> ties;
  for (std::size_t l = 0; l < counts.size(); ++l) {
    if (!allowed[l]) continue;
    if (counts[l] < best) {
      best = counts[l];
      ties.assign(1, static_cast<int>(l));
    } else if (counts[l] == best) {
      ties.push_back(static_cast<int>(l));
    }
  }
  if (ties.empty()) return -1;
  if (ties.size() == 1) return ties.front();
  std::uniform_int_distribution<std::size_t> pick(0, ties.size() - 1);
  return ties[pick(rng)];
}

}  // namespace

std::vector<Vehicle> spawn_scenario(const HighwayConfig& cfg, Rng& rng, VehicleId first_id) {
  cfg.validate();
  const int target = cfg.target_count();
  const auto lanes = static_cast<std::size_t>(cfg.lane_count);
  std::vector<std::vector<Vehicle>> per_lane(lanes);
  std::vector<int> counts(lanes, 0);
  const std::vector<bool> all(lanes, true);

  VehicleId id = first_id;
  for (int k = 0; k < target; ++k) {
    Vehicle v = draw_vehicle(cfg, rng, cfg.vtx_probability);
    v.id = id++;
    v.lane = least_crowded(counts, all, rng);
    v.speed = cfg.lane_speeds[static_cast<std::size_t>(v.lane)];
    per_lane[static_cast<std::size_t>(v.lane)].push_back(v);
    ++counts[static_cast<std::size_t>(v.lane)];
  }

  std::vector<Vehicle> out;
  out.reserve(static_cast<std::size_t>(target));
  for (auto& lane : per_lane) {
    if (lane.empty()) continue;
    // Minimum centre-to-centre spacing between consecutive bodies.
    std::vector<double> spacing(lane.size(), 0.0);
    double required = 0.0;
    for (std::size_t m = 1; m < lane.size(); ++m) {
      spacing[m] = 0.5 * (lane[m - 1].body.length + lane[m].body.length) + cfg.min_headway;
      required += spacing[m];
    }
    const double slack = cfg.segment_length - required;
    if (slack < 0)
      throw ScenarioInfeasible("cannot place " + std::to_string(lane.size()) + " vehicles in lane " +
                               std::to_string(lane.front().lane) + " with the configured headway");
    // Uniformly random gaps: sorted uniform offsets on the slack.
    std::vector<double> offsets(lane.size());
    for (double& o : offsets) o = slack * uniform01(rng);
    std::sort(offsets.begin(), offsets.end());
    double base = 0.0;
    for (std::size_t m = 0; m < lane.size(); ++m) {
      base += spacing[m];
      lane[m].position = std::min(offsets[m] + base, cfg.segment_length);
      out.push_back(lane[m]);
    }
  }
  std::sort(out.begin(), out.end(), [](const Vehicle& a, const Vehicle& b) { return a.id < b.id; });
  return out;
}

std::vector<Vehicle> spawn_scenario(const HighwayConfig& cfg, std::uint64_t seed) {
  Rng rng = make_stream(seed, "mobility");
  return spawn_scenario(cfg, rng);
}

Highway::Highway(HighwayConfig cfg, Rng rng) : cfg_(std::move(cfg)), rng_(std::move(rng)) {
  vehicles_ = spawn_scenario(cfg_, rng_);
  target_ = static_cast<int>(vehicles_.size());
  next_id_ = target_;
}

void Highway::set_vehicles(std::vector<Vehicle> v) {
  vehicles_ = std::move(v);
  target_ = static_cast<int>(vehicles_.size());
  deficit_ = 0;
  for (const auto& x : vehicles_) next_id_ = std::max(next_id_, x.id + 1);
}

bool Highway::try_insert(Vehicle& out) {
  const auto lanes = static_cast<std::size_t>(cfg_.lane_count);
  Vehicle v = draw_vehicle(cfg_, rng_, cfg_.vtx_probability);

  std::vector<int> counts(lanes, 0);
  std::vector<double> upper(lanes, cfg_.min_headway);
  for (const auto& w : vehicles_) {
    const auto l = static_cast<std::size_t>(w.lane);
    ++counts[l];
    // Rear bumper of w must stay min_headway ahead of the new front bumper.
    const double ub = w.position - 0.5 * (w.body.length + v.body.length) - cfg_.min_headway;
    upper[l] = std::min(upper[l], ub);
  }
  std::vector<bool> allowed(lanes);
  for (std::size_t l = 0; l < lanes; ++l) allowed[l] = upper[l] >= 0.0;
  const int lane = least_crowded(counts, allowed, rng_);
  if (lane < 0) return false;

  v.id = next_id_++;
  v.lane = lane;
  v.speed = cfg_.lane_speeds[static_cast<std::size_t>(lane)];
  v.position = upper[static_cast<std::size_t>(lane)] * uniform01(rng_);
  vehicles_.push_back(v);
  out = v;
  return true;
}

AdvanceResult Highway::advance(double dt_ms) {
  if (!(dt_ms > 0)) throw std::invalid_argument("advance: dt must be > 0");
  AdvanceResult res;
  std::vector<Vehicle> kept;
  kept.reserve(vehicles_.size());
  for (auto& v : vehicles_) {
    v.position += kmh_to_m_per_ms(v.speed) * dt_ms;
    if (v.position >= cfg_.segment_length)
      res.exited.push_back(v);
    else
      kept.push_back(v);
  }
  vehicles_ = std::move(kept);

  const int wanted = static_cast<int>(res.exited.size()) + deficit_;
  deficit_ = 0;
  for (int k = 0; k < wanted; ++k) {
    Vehicle v;
    if (try_insert(v))
      res.entered.push_back(v);
    else
      ++deficit_;
  }
  return res;
}

bool segment_hits_rect(Point a, Point b, Point c, double half_x, double half_y) {
  double t0 = 0.0;
  double t1 = 1.0;
  const double d[2] = {b.x - a.x, b.y - a.y};
  const double p[2] = {a.x, a.y};
  const double lo[2] = {c.x - half_x, c.y - half_y};
  const double hi[2] = {c.x + half_x, c.y + half_y};
  for (int k = 0; k < 2; ++k) {
    if (d[k] == 0.0) {
      if (p[k] < lo[k] || p[k] > hi[k]) return false;
      continue;
    }
    double ta = (lo[k] - p[k]) / d[k];
    double tb = (hi[k] - p[k]) / d[k];
    if (ta > tb) std::swap(ta, tb);
    t0 = std::max(t0, ta);
    t1 = std::min(t1, tb);
    if (t0 > t1) return false;
  }
  // Open segment: a touch only at an endpoint does not count.
  return t1 > 0.0 && t0 < 1.0;
}

int count_blockers(const Vehicle& tx, const Vehicle& rx, std::span<const Vehicle> vehicles,
                   const HighwayConfig& cfg) {
  const Point a = tx.antenna(cfg);
  const Point b = rx.antenna(cfg);
  int n = 0;
  for (const auto& v : vehicles) {
    if (v.id == tx.id || v.id == rx.id) continue;
    if (segment_hits_rect(a, b, v.antenna(cfg), 0.5 * v.body.length, 0.5 * v.body.width)) ++n;
  }
  return n;
}

std::vector<Vehicle> neighbors(const Vehicle& v, std::span<const Vehicle> vehicles, double r_c,
                               const HighwayConfig& cfg) {
  std::vector<Vehicle> out;
  const Point p = v.antenna(cfg);
  for (const auto& w : vehicles) {
    if (w.id == v.id || w.role == v.role) continue;
    if (distance(p, w.antenna(cfg)) <= r_c) out.push_back(w);
  }
  return out;
}

BlockerIndex::BlockerIndex(std::span<const Vehicle> vehicles, const HighwayConfig& cfg)
    : lanes_(static_cast<std::size_t>(cfg.lane_count)), cfg_(&cfg) {
  for (const auto& v : vehicles) {
    const Point c = v.antenna(cfg);
    lanes_.at(static_cast<std::size_t>(v.lane)).push_back({c.x, c.y, 0.5 * v.body.length, 0.5 * v.body.width, v.id});
    max_half_len_ = std::max(max_half_len_, 0.5 * v.body.length);
    max_half_wid_ = std::max(max_half_wid_, 0.5 * v.body.width);
  }
  for (auto& lane : lanes_)
    std::sort(lane.begin(), lane.end(), [](const Entry& l, const Entry& r) { return l.x < r.x; });
}

int BlockerIndex::count(const Vehicle& tx, const Vehicle& rx) const {
  const Point a = tx.antenna(*cfg_);
  const Point b = rx.antenna(*cfg_);
  const double dy = b.y - a.y;
  int n = 0;
  for (std::size_t l = 0; l < lanes_.size(); ++l) {
    // Part of the segment inside this lane's band of possible bodies.
    const double yc = (static_cast<double>(l) + 0.5) * cfg_->lane_width;
    double t0 = 0.0;
    double t1 = 1.0;
    if (dy == 0.0) {
      if (std::abs(a.y - yc) > max_half_wid_) continue;
    } else {
      double ta = (yc - max_half_wid_ - a.y) / dy;
      double tb = (yc + max_half_wid_ - a.y) / dy;
      if (ta > tb) std::swap(ta, tb);
      t0 = std::max(t0, ta);
      t1 = std::min(t1, tb);
      if (t0 > t1) continue;
    }
    const double xa = a.x + t0 * (b.x - a.x);
    const double xb = a.x + t1 * (b.x - a.x);
    const double lo = std::min(xa, xb) - max_half_len_;
    const double hi = std::max(xa, xb) + max_half_len_;
    const auto& lane = lanes_[l];
    auto it = std::lower_bound(lane.begin(), lane.end(), lo, [](const Entry& e, double x) { return e.x < x; });
    for (; it != lane.end() && it->x <= hi; ++it) {
      if (it->id == tx.id || it->id == rx.id) continue;
      if (segment_hits_rect(a, b, {it->x, it->y}, it->half_len, it->half_wid)) ++n;
    }
  }
  return n;
}

}  // namespace v2v
