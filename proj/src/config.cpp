#include "v2v/config.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "v2v/errors.hpp"
#include "v2v/rng.hpp"
#include "v2v/units.hpp"

namespace v2v {

using nlohmann::json;

json default_config() {
  const HighwayConfig hw;
  const RadioConfig radio;
  const AntennaConfig ant;
  const TrafficConfig traffic;
  const AssociationConfig assoc;
  const PsoConfig pso;
  const ReportConfig report;
  const BlockageParams blockage;

  json cars = json::array();
  for (const auto& b : hw.car_models) cars.push_back({b.length, b.width});
  json table = json::array();
  for (const auto& e : blockage.table) table.push_back({e.exponent, e.intercept_db});

  json j;
  j["simulation"] = {{"total_time_ms", 30000.0},
                     {"scheduling_slot_ms", 100.0},
                     {"method", "waf"},
                     {"seed", 1}};
  j["highway"] = {{"segment_length_m", hw.segment_length},
                  {"lane_count", hw.lane_count},
                  {"lane_width_m", hw.lane_width},
                  {"lane_speeds_kmh", hw.lane_speeds},
                  {"density_veh_per_km", hw.density},
                  {"truck_fraction", hw.truck_fraction},
                  {"vtx_probability", hw.vtx_probability},
                  {"coverage_radius_m", hw.coverage_radius},
                  {"min_headway_m", hw.min_headway},
                  {"car_models_m", cars},
                  {"truck_body_m", {hw.truck_body.length, hw.truck_body.width}}};
  j["radio"] = {{"bandwidth_hz", radio.bandwidth_hz},
                {"noise_density_dbm_hz", radio.noise_density_dbm_hz},
                {"tx_power_dbm", radio.tx_power_dbm},
                {"carrier_ghz", radio.carrier_ghz},
                {"slot_ms", radio.slot_ms}};
  j["blockage"] = {{"table", table}};
  j["antenna"] = {{"sector_beamwidth_deg", rad_to_deg(ant.sector_beamwidth)},
                  {"fixed_beamwidth_deg", 5.0},
                  {"min_beamwidth_deg", rad_to_deg(ant.min_beamwidth)},
                  {"sidelobe_gain", ant.sidelobe_gain},
                  {"pilot_ms", ant.pilot_ms}};
  j["traffic"] = {{"packet_bits", traffic.packet_bits},
                  {"arrival_rate_per_ms", traffic.arrival_rate_per_ms},
                  {"deadline_ms", traffic.deadline_ms},
                  {"max_queue", traffic.max_queue}};
  j["association"] = {{"recency_decay", assoc.recency_decay},
                      {"speed_normalizer_kmh", assoc.speed_normalizer_kmh},
                      {"queue_normalizer", assoc.queue_normalizer},
                      {"exploration_beamwidth_deg", rad_to_deg(assoc.exploration_beamwidth)},
                      {"asyn_window_m", assoc.asyn_window_m}};
  j["pso"] = {{"swarm_size", pso.swarm_size},
              {"inertia", pso.inertia},
              {"cognitive", pso.cognitive},
              {"social", pso.social},
              {"iterations", pso.iterations},
              {"init_beamwidth_deg", rad_to_deg(pso.init_beamwidth)},
              {"velocity_min_deg", rad_to_deg(pso.velocity_min)},
              {"velocity_max_deg", rad_to_deg(pso.velocity_max)},
              {"per_dimension_random", pso.per_dimension_random}};
  j["report"] = {{"delay_bounds_ms", report.delay_bounds_ms},
                 {"drop_bounds", report.drop_bounds},
                 {"cdf_points", report.cdf_points}};
  return j;
}

namespace {

bool same_kind(const json& a, const json& b) {
  if (a.is_number() && b.is_number()) return !(a.is_number_integer() && b.is_number_float());
  return a.type() == b.type();
}

}  // namespace

void merge_config(json& base, const json& patch, const std::string& prefix) {
  if (!patch.is_object()) throw ConfigError("expected an object at '" + (prefix.empty() ? "<root>" : prefix) + "'");
  for (const auto& [key, value] : patch.items()) {
    const std::string path = prefix.empty() ? key : prefix + "." + key;
    auto it = base.find(key);
    if (it == base.end()) throw ConfigError("unknown config key '" + path + "'");
    if (it->is_object()) {
      merge_config(*it, value, path);
      continue;
    }
    if (!same_kind(*it, value)) throw ConfigError("wrong value type for '" + path + "'");
    // Integral defaults accept integral values only; floats accept any number.
    *it = it->is_number_float() ? json(value.get<double>()) : value;
  }
}

json load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file '" + path.string() + "'");
  json patch;
  try {
    patch = json::parse(in, nullptr, true, true);
  } catch (const json::parse_error& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
  json cfg = default_config();
  merge_config(cfg, patch);
  return cfg;
}

void apply_override(json& cfg, const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos || eq == 0) throw ConfigError("override must be key=value: '" + assignment + "'");
  const std::string key = assignment.substr(0, eq);
  const std::string text = assignment.substr(eq + 1);
  json value = json::parse(text, nullptr, false);
  if (value.is_discarded()) value = text;

  json patch = value;
  std::size_t end = key.size();
  while (true) {
    const auto dot = key.rfind('.', end - 1);
    const std::string part = key.substr(dot == std::string::npos ? 0 : dot + 1,
                                        end - (dot == std::string::npos ? 0 : dot + 1));
    if (part.empty()) throw ConfigError("malformed override key '" + key + "'");
    patch = json{{part, patch}};
    if (dot == std::string::npos) break;
    end = dot;
  }
  merge_config(cfg, patch);
}

namespace {

double deg(const json& j, const char* key) { return deg_to_rad(j.at(key).get<double>()); }

Body body_of(const json& j) {
  if (!j.is_array() || j.size() != 2) throw ConfigError("vehicle body must be [length, width]");
  return {j[0].get<double>(), j[1].get<double>()};
}

}  // namespace

SimConfig to_sim_config(const json& cfg) {
  SimConfig c;
  try {
    const auto& sim = cfg.at("simulation");
    c.total_time_ms = sim.at("total_time_ms").get<double>();
    c.scheduling_slot_ms = sim.at("scheduling_slot_ms").get<double>();
    c.method = parse_method(sim.at("method").get<std::string>());
    c.seed = sim.at("seed").get<std::uint64_t>();

    const auto& hw = cfg.at("highway");
    c.highway.segment_length = hw.at("segment_length_m").get<double>();
    c.highway.lane_count = hw.at("lane_count").get<int>();
    c.highway.lane_width = hw.at("lane_width_m").get<double>();
    c.highway.lane_speeds = hw.at("lane_speeds_kmh").get<std::vector<double>>();
    c.highway.density = hw.at("density_veh_per_km").get<double>();
    c.highway.truck_fraction = hw.at("truck_fraction").get<double>();
    c.highway.vtx_probability = hw.at("vtx_probability").get<double>();
    c.highway.coverage_radius = hw.at("coverage_radius_m").get<double>();
    c.highway.min_headway = hw.at("min_headway_m").get<double>();
    c.highway.car_models.clear();
    for (const auto& b : hw.at("car_models_m")) c.highway.car_models.push_back(body_of(b));
    c.highway.truck_body = body_of(hw.at("truck_body_m"));

    const auto& radio = cfg.at("radio");
    c.radio.bandwidth_hz = radio.at("bandwidth_hz").get<double>();
    c.radio.noise_density_dbm_hz = radio.at("noise_density_dbm_hz").get<double>();
    c.radio.tx_power_dbm = radio.at("tx_power_dbm").get<double>();
    c.radio.carrier_ghz = radio.at("carrier_ghz").get<double>();
    c.radio.slot_ms = radio.at("slot_ms").get<double>();

    c.blockage.table.clear();
    for (const auto& e : cfg.at("blockage").at("table")) {
      if (!e.is_array() || e.size() != 2) throw ConfigError("blockage.table rows must be [exponent, intercept_db]");
      c.blockage.table.push_back({e[0].get<double>(), e[1].get<double>()});
    }

    const auto& ant = cfg.at("antenna");
    c.antenna.sector_beamwidth = deg(ant, "sector_beamwidth_deg");
    c.fixed_beamwidth = deg(ant, "fixed_beamwidth_deg");
    c.antenna.min_beamwidth = deg(ant, "min_beamwidth_deg");
    c.antenna.sidelobe_gain = ant.at("sidelobe_gain").get<double>();
    c.antenna.pilot_ms = ant.at("pilot_ms").get<double>();

    const auto& tr = cfg.at("traffic");
    c.traffic.packet_bits = tr.at("packet_bits").get<double>();
    c.traffic.arrival_rate_per_ms = tr.at("arrival_rate_per_ms").get<double>();
    c.traffic.deadline_ms = tr.at("deadline_ms").get<double>();
    c.traffic.max_queue = tr.at("max_queue").get<int>();

    const auto& as = cfg.at("association");
    c.association.recency_decay = as.at("recency_decay").get<double>();
    c.association.speed_normalizer_kmh = as.at("speed_normalizer_kmh").get<double>();
    c.association.queue_normalizer = as.at("queue_normalizer").get<double>();
    c.association.exploration_beamwidth = deg(as, "exploration_beamwidth_deg");
    c.association.asyn_window_m = as.at("asyn_window_m").get<double>();

    const auto& pso = cfg.at("pso");
    c.pso.swarm_size = pso.at("swarm_size").get<int>();
    c.pso.inertia = pso.at("inertia").get<double>();
    c.pso.cognitive = pso.at("cognitive").get<double>();
    c.pso.social = pso.at("social").get<double>();
    c.pso.iterations = pso.at("iterations").get<int>();
    c.pso.init_beamwidth = deg(pso, "init_beamwidth_deg");
    c.pso.velocity_min = deg(pso, "velocity_min_deg");
    c.pso.velocity_max = deg(pso, "velocity_max_deg");
    c.pso.per_dimension_random = pso.at("per_dimension_random").get<bool>();

    const auto& rep = cfg.at("report");
    c.report.delay_bounds_ms = rep.at("delay_bounds_ms").get<std::vector<double>>();
    c.report.drop_bounds = rep.at("drop_bounds").get<std::vector<double>>();
    c.report.cdf_points = rep.at("cdf_points").get<int>();
  } catch (const json::exception& e) {
    throw ConfigError(e.what());
  }
  return c;
}

std::string config_hash(const json& cfg) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(fnv1a(cfg.dump())));
  return buf;
}

namespace {

template <typename F>
ValidationCheck check(std::string name, F&& f) {
  try {
    std::string detail = f();
    return {std::move(name), true, std::move(detail)};
  } catch (const std::exception& e) {
    return {std::move(name), false, e.what()};
  }
}

std::string fmt(double v) {
  std::ostringstream o;
  o << v;
  return o.str();
}

}  // namespace

std::vector<ValidationCheck> validation_report(const json& cfg) {
  std::vector<ValidationCheck> out;
  SimConfig c;
  out.push_back(check("config parses", [&] {
    c = to_sim_config(cfg);
    return std::string("method ") + to_string(c.method);
  }));
  if (!out.back().ok) return out;

  out.push_back(check("highway", [&] {
    c.highway.validate();
    return "lanes " + std::to_string(c.highway.lane_count) + ", target " + std::to_string(c.highway.target_count()) +
           " vehicles";
  }));
  out.push_back(check("spawn capacity", [&] {
    spawn_scenario(c.highway, 0);
    return std::string("fits");
  }));
  out.push_back(check("radio", [&] {
    c.radio.validate();
    return "T_t " + fmt(c.radio.slot_ms) + " ms";
  }));
  out.push_back(check("antenna", [&] {
    c.antenna.validate();
    return std::string("ok");
  }));
  out.push_back(check("blockage table", [&] {
    c.blockage.validate();
    return std::to_string(c.blockage.table.size()) + " entries";
  }));
  out.push_back(check("probabilities", [&] {
    const double ps[] = {c.highway.truck_fraction, c.highway.vtx_probability, c.association.recency_decay,
                         c.antenna.sidelobe_gain};
    for (double p : ps)
      if (!(p >= 0 && p <= 1)) throw ConfigError("probability out of [0, 1]: " + fmt(p));
    return std::string("in range");
  }));
  out.push_back(check("traffic", [&] {
    c.traffic.validate();
    return "deadline " + fmt(c.traffic.deadline()) + " ms";
  }));
  out.push_back(check("alignment bound at min beamwidth", [&] {
    if (!alignment_feasible(c.antenna.min_beamwidth, c.antenna.min_beamwidth, c.antenna, c.radio.slot_ms))
      throw ConstraintViolation("min_beamwidth_deg " + fmt(rad_to_deg(c.antenna.min_beamwidth)) +
                                " violates the alignment bound");
    return "tau " + fmt(alignment_delay(c.antenna.min_beamwidth, c.antenna.min_beamwidth, c.antenna,
                                        c.radio.slot_ms)) +
           " ms";
  }));
  out.push_back(check("alignment bound at fixed beamwidth", [&] {
    if (!alignment_feasible(c.fixed_beamwidth, c.fixed_beamwidth, c.antenna, c.radio.slot_ms))
      throw ConstraintViolation("fixed_beamwidth_deg " + fmt(rad_to_deg(c.fixed_beamwidth)) +
                                " violates the alignment bound");
    return "tau " + fmt(alignment_delay(c.fixed_beamwidth, c.fixed_beamwidth, c.antenna, c.radio.slot_ms)) + " ms";
  }));
  out.push_back(check("scheduling slot divisibility", [&] {
    const double q = c.scheduling_slot_ms / c.radio.slot_ms;
    if (std::abs(q - std::round(q)) > 1e-9 || q < 1)
      throw ConfigError("scheduling_slot_ms " + fmt(c.scheduling_slot_ms) + " is not a multiple of T_t");
    return "N = " + std::to_string(std::lround(q));
  }));
  out.push_back(check("total time divisibility", [&] {
    const double q = c.total_time_ms / c.radio.slot_ms;
    if (std::abs(q - std::round(q)) > 1e-9 || q < 1)
      throw ConfigError("total_time_ms " + fmt(c.total_time_ms) + " is not a multiple of T_t");
    return std::to_string(std::llround(q)) + " slots";
  }));
  out.push_back(check("association", [&] {
    c.association.validate();
    return std::string("ok");
  }));
  out.push_back(check("pso", [&] {
    c.pso.validate();
    return std::string("ok");
  }));
  out.push_back(check("full config", [&] {
    c.validate();
    return std::string("ok");
  }));
  return out;
}

}  // namespace v2v
