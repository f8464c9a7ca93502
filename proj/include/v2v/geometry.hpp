#pragma once

#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "v2v/rng.hpp"

namespace v2v {

using VehicleId = std::int64_t;

enum class Role { kTx, kRx };
enum class VehicleKind { kCar, kTruck };

struct Body {
  double length = 4.5;  // m
  double width = 1.8;   // m
};

struct HighwayConfig {
  double segment_length = 500.0;  // m
  int lane_count = 6;
  double lane_width = 3.0;  // m
  std::vector<double> lane_speeds{140, 130, 125, 110, 90, 70};  // km/h, leftmost first
  double density = 70.0;         // vehicles/km
  double truck_fraction = 0.2;
  double vtx_probability = 0.5;
  double coverage_radius = 100.0;  // m
  double min_headway = 2.0;        // m, bumper to bumper
  std::vector<Body> car_models{{4.0, 1.8}, {4.25, 1.8}, {4.5, 1.8}, {4.75, 1.8}, {5.0, 1.8}};
  Body truck_body{12.0, 2.5};

  /// Throws ConfigError when an invariant is broken.
  void validate() const;
  int target_count() const;
};

struct Point {
  double x = 0.0;
  double y = 0.0;
};

struct Vehicle {
  VehicleId id = 0;
  Role role = Role::kTx;
  int lane = 0;
  double position = 0.0;  // m, body centre along the segment
  double speed = 0.0;     // km/h
  Body body;
  VehicleKind kind = VehicleKind::kCar;

  /// Antenna point (body centre) in plan view.
  Point antenna(const HighwayConfig& cfg) const;
};

/// Relative geometry of a transmitter/receiver pair.
struct RelativeKinematics {
  double distance = 0.0;        // m
  double mean_relative_speed = 0.0;  // km/h, signed tx - rx
  double bearing_tx_to_rx = 0.0;     // rad
  double bearing_rx_to_tx = 0.0;     // rad
};

double distance(Point a, Point b);
double bearing(Point from, Point to);

RelativeKinematics relative_kinematics(const Vehicle& tx, const Vehicle& rx, const HighwayConfig& cfg);

/// Places round(density * length / 1000) vehicles, least crowded lanes first,
/// with min_headway between same-lane bodies. Deterministic in the rng state.
std::vector<Vehicle> spawn_scenario(const HighwayConfig& cfg, Rng& rng, VehicleId first_id = 0);
std::vector<Vehicle> spawn_scenario(const HighwayConfig& cfg, std::uint64_t seed);

struct AdvanceResult {
  std::vector<Vehicle> exited;
  std::vector<Vehicle> entered;
};

/// Moves the fleet forward by dt and keeps the vehicle count at the target.
///
/// Vehicles reaching the end of the segment are removed. Each removal (plus any
/// outstanding deficit) triggers an insertion near position 0 in the least
/// crowded lane that still respects the headway. If no lane admits a vehicle
/// the insertion is deferred and `deficit` keeps count.
class Highway {
 public:
  Highway(HighwayConfig cfg, Rng rng);

  const HighwayConfig& config() const { return cfg_; }
  const std::vector<Vehicle>& vehicles() const { return vehicles_; }
  int deficit() const { return deficit_; }
  int target() const { return target_; }

  AdvanceResult advance(double dt_ms);

  /// Replaces the fleet (fixtures and tests).
  void set_vehicles(std::vector<Vehicle> v);

 private:
  bool try_insert(Vehicle& out);

  HighwayConfig cfg_;
  Rng rng_;
  std::vector<Vehicle> vehicles_;
  VehicleId next_id_ = 0;
  int target_ = 0;
  int deficit_ = 0;
};

/// Number of other vehicles whose plan-view body rectangle meets the segment
/// between the two antenna points.
int count_blockers(const Vehicle& tx, const Vehicle& rx, std::span<const Vehicle> vehicles,
                   const HighwayConfig& cfg);

/// True if the open segment a-b meets the axis-aligned rectangle.
bool segment_hits_rect(Point a, Point b, Point centre, double half_x, double half_y);

/// Opposite-role vehicles within the closed coverage disc of radius r_c.
std::vector<Vehicle> neighbors(const Vehicle& v, std::span<const Vehicle> vehicles, double r_c,
                               const HighwayConfig& cfg);

/// Sorted-by-position index for repeated blocker queries on one snapshot.
class BlockerIndex {
 public:
  BlockerIndex(std::span<const Vehicle> vehicles, const HighwayConfig& cfg);
  int count(const Vehicle& tx, const Vehicle& rx) const;

 private:
  struct Entry {
    double x;
    double y;
    double half_len;
    double half_wid;
    VehicleId id;
  };
  std::vector<std::vector<Entry>> lanes_;  // sorted by x
  double max_half_len_ = 0.0;
  double max_half_wid_ = 0.0;
  const HighwayConfig* cfg_;
};

}  // namespace v2v
