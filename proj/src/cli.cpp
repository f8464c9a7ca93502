#include "v2v/cli.hpp"

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <mutex>
#include <numeric>
#include <sstream>
#include <thread>

#include <CLI11.hpp>

#include "v2v/config.hpp"
#include "v2v/errors.hpp"

namespace v2v {

namespace {

namespace fs = std::filesystem;
using nlohmann::json;

constexpr int kConfigError = 1;
constexpr int kRuntimeError = 2;

struct TraceFlags {
  bool slots = false;
  bool matching = false;
  bool snapshots = false;
  bool pso = false;
};

struct RunJob {
  json cfg;
  fs::path dir;
};

struct RunOutcome {
  std::string name;
  MetricsBundle bundle;
  std::string error;
  std::int64_t slot = -1;
};

// "1/60" and "0.5" both accepted.
double parse_value(const std::string& s) {
  const auto slash = s.find('/');
  try {
    if (slash == std::string::npos) return std::stod(s);
    return std::stod(s.substr(0, slash)) / std::stod(s.substr(slash + 1));
  } catch (const std::exception&) {
    throw ConfigError("not a number: '" + s + "'");
  }
}

std::string tag(double v) {
  std::ostringstream o;
  o << std::setprecision(6) << v;
  return o.str();
}

std::string run_name(const json& cfg) {
  const auto& sim = cfg.at("simulation");
  std::ostringstream o;
  o << "method=" << sim.at("method").get<std::string>()
    << "_density=" << tag(cfg.at("highway").at("density_veh_per_km").get<double>())
    << "_lambda=" << tag(cfg.at("traffic").at("arrival_rate_per_ms").get<double>())
    << "_ps=" << tag(cfg.at("traffic").at("packet_bits").get<double>())
    << "_ts=" << tag(sim.at("scheduling_slot_ms").get<double>()) << "_seed=" << sim.at("seed").get<std::uint64_t>();
  return o.str();
}

fs::path output_root(const std::string& flag) {
  if (!flag.empty()) return flag;
  if (const char* env = std::getenv("V2VSIM_OUTPUT_ROOT"); env && *env) return env;
  return "runs";
}

RunOutcome execute(const RunJob& job, const TraceFlags& traces) {
  RunOutcome r;
  r.name = job.dir.filename().string();
  try {
    fs::create_directories(job.dir);
    {
      std::ofstream cfg_out(job.dir / "config.json");
      cfg_out << job.cfg.dump(2) << '\n';
    }
    SimConfig sim = to_sim_config(job.cfg);
    std::ofstream slot_csv, matching_csv, snapshot_csv, pso_csv;
    RunHooks hooks;
    if (traces.slots) {
      slot_csv.open(job.dir / "trace_slots.csv");
      hooks.slot_csv = &slot_csv;
    }
    if (traces.matching) {
      matching_csv.open(job.dir / "trace_matching.csv");
      hooks.matching_csv = &matching_csv;
    }
    if (traces.snapshots) {
      snapshot_csv.open(job.dir / "trace_snapshots.csv");
      hooks.snapshot_csv = &snapshot_csv;
    }
    if (traces.pso) {
      pso_csv.open(job.dir / "trace_pso.csv");
      hooks.pso_csv = &pso_csv;
    }
    r.bundle = run(sim, std::move(hooks));
    r.bundle.config_hash = config_hash(job.cfg);
    write_report(r.bundle, sim.report, job.dir);
  } catch (const ConfigError& e) {
    r.error = e.what();
  } catch (const RunError& e) {
    r.error = e.what();
    r.slot = e.slot();
  } catch (const std::exception& e) {
    r.error = e.what();
    r.slot = 0;
  }
  return r;
}

std::vector<RunOutcome> execute_all(const std::vector<RunJob>& jobs, const TraceFlags& traces, unsigned workers) {
  std::vector<RunOutcome> out(jobs.size());
  std::atomic<std::size_t> next{0};
  workers = std::max(1u, std::min<unsigned>(workers, static_cast<unsigned>(jobs.size())));
  std::vector<std::thread> pool;
  for (unsigned w = 0; w < workers; ++w)
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < jobs.size(); i = next++) out[i] = execute(jobs[i], traces);
    });
  for (auto& t : pool) t.join();
  return out;
}

double mean(const std::vector<double>& v) {
  return v.empty() ? 0.0 : std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

void print_summary(const std::vector<RunOutcome>& runs, std::ostream& out) {
  out << std::left << std::setw(64) << "run" << std::right << std::setw(10) << "paired" << std::setw(10) << "success"
      << std::setw(12) << "delay_ms" << std::setw(14) << "rate_gbps" << '\n';
  for (const auto& r : runs) {
    out << std::left << std::setw(64) << r.name << std::right;
    if (!r.error.empty()) {
      out << "  FAILED: " << r.error << '\n';
      continue;
    }
    const auto& b = r.bundle;
    out << std::fixed << std::setprecision(3) << std::setw(10) << pairing_ratio(b.matched_fraction) << std::setw(10)
        << success_ratio(b.points) << std::setw(12) << std::setprecision(4) << mean(b.delay_samples)
        << std::setw(14) << std::setprecision(3) << mean(b.rate_samples) / 1e9 << '\n';
    out.unsetf(std::ios::fixed);
  }
}

int finish(const std::vector<RunOutcome>& runs, std::ostream& out, std::ostream& err) {
  print_summary(runs, out);
  int code = 0;
  for (const auto& r : runs) {
    if (r.error.empty()) continue;
    if (r.slot >= 0) {
      err << "error: run " << r.name << " failed at slot " << r.slot << ": " << r.error << '\n';
      code = kRuntimeError;
    } else {
      err << "error: run " << r.name << ": " << r.error << '\n';
      code = std::max(code, kConfigError);
    }
  }
  return code;
}

json resolve(const std::string& path, const std::vector<std::string>& overrides) {
  json cfg = path.empty() ? default_config() : load_config(path);
  for (const auto& o : overrides) apply_override(cfg, o);
  return cfg;
}

std::vector<double> parse_list(const std::vector<std::string>& items) {
  std::vector<double> out;
  for (const auto& s : items) out.push_back(parse_value(s));
  return out;
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"mmWave V2V highway simulator"};
  app.require_subcommand(1);

  std::string config_path;
  std::vector<std::string> overrides;
  std::string out_dir;
  TraceFlags traces;
  unsigned jobs = std::max(1u, std::thread::hardware_concurrency());

  auto common = [&](CLI::App* sub) {
    sub->add_option("-c,--config", config_path, "Config file (JSON)");
    sub->add_option("-s,--set", overrides, "Override, dotted.key=value")->allow_extra_args(false);
  };
  auto outputs = [&](CLI::App* sub) {
    sub->add_option("-o,--out", out_dir, "Output root (default $V2VSIM_OUTPUT_ROOT or ./runs)");
    sub->add_flag("--trace-slots", traces.slots, "Write per-slot queue trace");
    sub->add_flag("--trace-matching", traces.matching, "Write per-scheduling-slot matching dump");
    sub->add_flag("--trace-snapshots", traces.snapshots, "Write per-slot vehicle positions");
    sub->add_flag("--pso-trace", traces.pso, "Write PSO convergence trace");
  };

  auto* run_cmd = app.add_subcommand("run", "Run one simulation");
  common(run_cmd);
  outputs(run_cmd);
  std::string method;
  std::vector<std::uint64_t> run_seeds;
  run_cmd->add_option("-m,--method", method, "waf, pso, mind or asyn");
  run_cmd->add_option("--seed,--seeds", run_seeds, "Seed(s)")->delimiter(',');
  run_cmd->add_option("-j,--jobs", jobs, "Parallel runs");

  auto* sweep_cmd = app.add_subcommand("sweep", "Run a parameter grid");
  common(sweep_cmd);
  outputs(sweep_cmd);
  std::vector<std::string> densities, lambdas, packet_sizes, sched_slots, methods;
  std::vector<std::uint64_t> sweep_seeds;
  sweep_cmd->add_option("--densities", densities, "Vehicles/km")->delimiter(',');
  sweep_cmd->add_option("--lambdas", lambdas, "Packets/ms, e.g. 1/60")->delimiter(',');
  sweep_cmd->add_option("--packet-sizes", packet_sizes, "Bits")->delimiter(',');
  sweep_cmd->add_option("--scheduling-slots", sched_slots, "T_s in ms")->delimiter(',');
  sweep_cmd->add_option("--methods", methods, "waf, pso, mind, asyn")->delimiter(',');
  sweep_cmd->add_option("--seeds", sweep_seeds, "Seeds")->delimiter(',');
  sweep_cmd->add_option("-j,--jobs", jobs, "Parallel runs");

  auto* validate_cmd = app.add_subcommand("validate", "Check a config statically");
  common(validate_cmd);
  auto* config_cmd = app.add_subcommand("config", "Print the resolved config as JSON");
  common(config_cmd);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n';
    return kConfigError;
  }

  try {
    if (*config_cmd) {
      out << resolve(config_path, overrides).dump(2) << '\n';
      return 0;
    }
    if (*validate_cmd) {
      const json cfg = resolve(config_path, overrides);
      bool ok = true;
      for (const auto& c : validation_report(cfg)) {
        out << (c.ok ? "PASS " : "FAIL ") << c.name << ": " << c.detail << '\n';
        ok = ok && c.ok;
      }
      return ok ? 0 : kConfigError;
    }

    const fs::path root = output_root(out_dir);
    std::vector<RunJob> grid;

    if (*run_cmd) {
      json base = resolve(config_path, overrides);
      if (!method.empty()) base["simulation"]["method"] = method;
      if (run_seeds.empty()) run_seeds.push_back(base["simulation"]["seed"].get<std::uint64_t>());
      for (auto seed : run_seeds) {
        json cfg = base;
        cfg["simulation"]["seed"] = seed;
        grid.push_back({cfg, root / run_name(cfg)});
      }
    } else {
      const json base = resolve(config_path, overrides);
      auto axis = [&](const std::vector<std::string>& items, const char* section, const char* key) {
        std::vector<json> v;
        for (double x : parse_list(items)) v.push_back(x);
        if (v.empty()) v.push_back(base.at(section).at(key));
        return v;
      };
      const auto d_axis = axis(densities, "highway", "density_veh_per_km");
      const auto l_axis = axis(lambdas, "traffic", "arrival_rate_per_ms");
      const auto p_axis = axis(packet_sizes, "traffic", "packet_bits");
      const auto t_axis = axis(sched_slots, "simulation", "scheduling_slot_ms");
      std::vector<json> m_axis(methods.begin(), methods.end());
      if (m_axis.empty()) m_axis.push_back(base["simulation"]["method"]);
      std::vector<json> s_axis(sweep_seeds.begin(), sweep_seeds.end());
      if (s_axis.empty()) s_axis.push_back(base["simulation"]["seed"]);
      for (const auto& d : d_axis)
        for (const auto& l : l_axis)
          for (const auto& p : p_axis)
            for (const auto& t : t_axis)
              for (const auto& m : m_axis)
                for (const auto& s : s_axis) {
                  json cfg = base;
                  merge_config(cfg, {{"highway", {{"density_veh_per_km", d}}},
                                     {"traffic", {{"arrival_rate_per_ms", l}, {"packet_bits", p}}},
                                     {"simulation", {{"scheduling_slot_ms", t}, {"method", m}, {"seed", s}}}});
                  grid.push_back({cfg, root / run_name(cfg)});
                }
    }

    // Fail fast on config problems before any run starts.
    for (const auto& job : grid) to_sim_config(job.cfg).validate();

    return finish(execute_all(grid, traces, jobs), out, err);
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << '\n';
    return kConfigError;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kRuntimeError;
  }
}

}  // namespace v2v
