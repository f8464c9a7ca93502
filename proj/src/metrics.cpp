#include "v2v/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>

#include "v2v/errors.hpp"

namespace v2v {

void MetricsBundle::merge(const MetricsBundle& o) {
  rate_samples.insert(rate_samples.end(), o.rate_samples.begin(), o.rate_samples.end());
  delay_samples.insert(delay_samples.end(), o.delay_samples.begin(), o.delay_samples.end());
  points.insert(points.end(), o.points.begin(), o.points.end());
  matched_fraction.insert(matched_fraction.end(), o.matched_fraction.begin(), o.matched_fraction.end());
  arrivals += o.arrivals;
  delivered += o.delivered;
  dropped += o.dropped;
  slots += o.slots;
  scheduling_events += o.scheduling_events;
}

std::vector<std::pair<double, double>> cdf(std::span<const double> samples, std::span<const double> grid) {
  if (samples.empty()) throw EmptyInput("cdf: no samples");
  std::vector<double> sorted(samples.begin(), samples.end());
  std::sort(sorted.begin(), sorted.end());
  const auto n = static_cast<double>(sorted.size());
  std::vector<std::pair<double, double>> out;
  out.reserve(grid.size());
  for (double x : grid) {
    const auto k = std::upper_bound(sorted.begin(), sorted.end(), x) - sorted.begin();
    out.emplace_back(x, static_cast<double>(k) / n);
  }
  return out;
}

std::vector<double> linear_grid(std::span<const double> samples, int n) {
  if (samples.empty() || n < 1) return {};
  const auto [lo_it, hi_it] = std::minmax_element(samples.begin(), samples.end());
  const double lo = *lo_it;
  const double hi = *hi_it;
  std::vector<double> g(static_cast<std::size_t>(n));
  for (int k = 0; k < n; ++k) g[static_cast<std::size_t>(k)] = n == 1 ? hi : lo + (hi - lo) * k / (n - 1);
  return g;
}

std::vector<std::vector<double>> joint_bound_table(std::span<const SchedulingPoint> points,
                                                   std::span<const double> delay_bounds,
                                                   std::span<const double> drop_bounds) {
  std::vector<std::vector<double>> t(delay_bounds.size(), std::vector<double>(drop_bounds.size(), 0.0));
  if (points.empty()) return t;
  for (std::size_t i = 0; i < delay_bounds.size(); ++i) {
    for (std::size_t j = 0; j < drop_bounds.size(); ++j) {
      std::size_t hits = 0;
      for (const auto& p : points) {
        const bool delay_ok = !p.mean_delay || *p.mean_delay <= delay_bounds[i];
        if (delay_ok && p.drop_ratio <= drop_bounds[j]) ++hits;
      }
      t[i][j] = 100.0 * static_cast<double>(hits) / static_cast<double>(points.size());
    }
  }
  return t;
}

double pairing_ratio(std::span<const double> f) {
  if (f.empty()) return 0.0;
  return std::accumulate(f.begin(), f.end(), 0.0) / static_cast<double>(f.size());
}

double success_ratio(std::span<const SchedulingPoint> points) {
  if (points.empty()) return 0.0;
  double s = 0.0;
  for (const auto& p : points) s += 1.0 - p.drop_ratio;
  return s / static_cast<double>(points.size());
}

std::string format_number(double v) {
  if (!std::isfinite(v)) return "nan";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

namespace {

double mean(std::span<const double> v) {
  return v.empty() ? 0.0 : std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

double median(std::span<const double> v) {
  if (v.empty()) return 0.0;
  std::vector<double> s(v.begin(), v.end());
  std::sort(s.begin(), s.end());
  const std::size_t m = s.size() / 2;
  return s.size() % 2 ? s[m] : 0.5 * (s[m - 1] + s[m]);
}

// Round-trips doubles through the fixed formatting so JSON output is stable.
double stable(double v) { return std::stod(format_number(v)); }

std::string provenance(const MetricsBundle& b) {
  return "# method=" + b.method + " seed=" + std::to_string(b.seed) + " config_hash=" + b.config_hash + "\n";
}

void write_cdf(const std::filesystem::path& file, const MetricsBundle& b, std::span<const double> samples,
               int points) {
  std::ofstream out(file);
  out << provenance(b) << "value,cdf\n";
  if (samples.empty()) return;
  const auto grid = linear_grid(samples, points);
  for (const auto& [x, f] : cdf(samples, grid)) out << format_number(x) << ',' << format_number(f) << '\n';
}

}  // namespace

nlohmann::ordered_json summary_json(const MetricsBundle& b) {
  nlohmann::ordered_json j;
  j["method"] = b.method;
  j["seed"] = b.seed;
  j["config_hash"] = b.config_hash;
  j["transmission_slots"] = b.slots;
  j["scheduling_events"] = b.scheduling_events;
  j["packets"] = {{"arrived", b.arrivals}, {"delivered", b.delivered}, {"dropped", b.dropped}};
  j["rate_bps"] = {{"samples", b.rate_samples.size()},
                   {"mean", stable(mean(b.rate_samples))},
                   {"median", stable(median(b.rate_samples))}};
  j["delay_ms"] = {{"samples", b.delay_samples.size()},
                   {"mean", stable(mean(b.delay_samples))},
                   {"median", stable(median(b.delay_samples))}};
  std::vector<double> window_delays;
  for (const auto& p : b.points)
    if (p.mean_delay) window_delays.push_back(*p.mean_delay);
  j["scheduling_points"] = b.points.size();
  j["mean_window_delay_ms"] = stable(mean(window_delays));
  j["success_ratio"] = stable(success_ratio(b.points));
  j["pairing_ratio"] = stable(pairing_ratio(b.matched_fraction));
  return j;
}

nlohmann::ordered_json joint_bound_json(const MetricsBundle& b, const ReportConfig& cfg) {
  const auto t = joint_bound_table(b.points, cfg.delay_bounds_ms, cfg.drop_bounds);
  nlohmann::ordered_json j;
  j["method"] = b.method;
  j["seed"] = b.seed;
  j["config_hash"] = b.config_hash;
  j["delay_bounds_ms"] = cfg.delay_bounds_ms;
  j["drop_bounds"] = cfg.drop_bounds;
  auto rows = nlohmann::ordered_json::array();
  for (const auto& row : t) {
    auto r = nlohmann::ordered_json::array();
    for (double v : row) {
      char buf[32];
      std::snprintf(buf, sizeof buf, "%.2f", v);
      r.push_back(std::stod(buf));
    }
    rows.push_back(r);
  }
  j["percent"] = rows;
  return j;
}

void write_report(const MetricsBundle& b, const ReportConfig& cfg, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  write_cdf(dir / "cdf_rate.csv", b, b.rate_samples, cfg.cdf_points);
  write_cdf(dir / "cdf_delay.csv", b, b.delay_samples, cfg.cdf_points);
  {
    std::ofstream out(dir / "scatter_delay_drop.csv");
    out << provenance(b) << "slot,mean_delay_ms,drop_ratio,transmitters\n";
    for (const auto& p : b.points)
      out << p.slot << ',' << (p.mean_delay ? format_number(*p.mean_delay) : std::string()) << ','
          << format_number(p.drop_ratio) << ',' << p.transmitters << '\n';
  }
  std::ofstream(dir / "table_joint_bounds.json") << joint_bound_json(b, cfg).dump(2) << '\n';
  std::ofstream(dir / "summary.json") << summary_json(b).dump(2) << '\n';
}

}  // namespace v2v
