#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

namespace v2v {

/// One scheduling window's joint delay / drop point, averaged over the
/// transmitters that held a link during the window and had at least one
/// packet delivered or dropped in it.
struct SchedulingPoint {
  std::int64_t slot = 0;             // first transmission slot of the window
  std::optional<double> mean_delay;  // ms; empty when nothing was delivered
  double drop_ratio = 0.0;
  int transmitters = 0;
};

struct MetricsBundle {
  std::vector<double> rate_samples;   // bits/s, one per active link per slot
  std::vector<double> delay_samples;  // ms, one per delivered packet
  std::vector<SchedulingPoint> points;
  std::vector<double> matched_fraction;  // per scheduling slot

  std::uint64_t arrivals = 0;
  std::uint64_t delivered = 0;
  std::uint64_t dropped = 0;
  std::int64_t slots = 0;
  std::int64_t scheduling_events = 0;

  std::string method;
  std::string config_hash;
  std::uint64_t seed = 0;

  /// Appends another run's samples (multi-seed aggregation).
  void merge(const MetricsBundle& other);
};

struct ReportConfig {
  std::vector<double> delay_bounds_ms{0.1, 0.075, 0.05, 0.025, 0.01};
  std::vector<double> drop_bounds{0.1, 0.01, 0.001, 0.0001, 0.00001};
  int cdf_points = 200;
};

/// Right-continuous empirical CDF evaluated at each grid value.
std::vector<std::pair<double, double>> cdf(std::span<const double> samples, std::span<const double> grid);

/// `n` evenly spaced values spanning the samples' range.
std::vector<double> linear_grid(std::span<const double> samples, int n);

/// Percentage of points with delay <= d and drop ratio <= g, for every
/// (d, g). Rows follow delay_bounds, columns drop_bounds. A point without
/// deliveries meets every delay bound.
std::vector<std::vector<double>> joint_bound_table(std::span<const SchedulingPoint> points,
                                                   std::span<const double> delay_bounds,
                                                   std::span<const double> drop_bounds);

/// Time average of the matched-vTx fraction.
double pairing_ratio(std::span<const double> matched_fraction);

/// Mean of 1 - drop ratio over the scheduling points (0 when there are none).
double success_ratio(std::span<const SchedulingPoint> points);

nlohmann::ordered_json summary_json(const MetricsBundle& bundle);
nlohmann::ordered_json joint_bound_json(const MetricsBundle& bundle, const ReportConfig& cfg);

/// Writes cdf_rate.csv, cdf_delay.csv, scatter_delay_drop.csv,
/// table_joint_bounds.json and summary.json into `dir`.
void write_report(const MetricsBundle& bundle, const ReportConfig& cfg, const std::filesystem::path& dir);

/// Fixed-precision rendering used in every export so files are byte-stable.
std::string format_number(double v);

}  // namespace v2v
