// switchlab: heavy-traffic experiments for c-weighted MaxWeight switches.

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "switchlab/analytics.hpp"
#include "switchlab/config.hpp"
#include "switchlab/experiment.hpp"
#include "switchlab/validate.hpp"

namespace fs = std::filesystem;
using namespace switchlab;
using nlohmann::json;

namespace {

struct Options {
  std::string config;
  std::optional<int> jobs;
  std::optional<std::uint64_t> seed;
  std::string trace;
  bool verbose = false;
  std::optional<double> epsilon;
  std::optional<std::int64_t> slots;
  bool inject_matcher_fault = false;
};

ExperimentConfig load(const Options& o) {
  if (o.config.empty()) throw ConfigError("--config is required");
  ExperimentConfig cfg = load_config(o.config);
  if (o.seed) cfg.seed = *o.seed;
  return cfg;
}

fs::path output_path(const ExperimentConfig& cfg, const char* name) {
  fs::path dir(cfg.output_dir);
  fs::create_directories(dir);
  return dir / name;
}

void write_json(const fs::path& p, const json& doc) {
  std::ofstream out(p, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write '" + p.string() + "'");
  out << doc.dump(2) << '\n';
}

void log(const Options& o, const std::string& msg) {
  if (o.verbose) std::cerr << msg << '\n';
}

int cmd_zeta(const Options& o) {
  const auto cfg = load(o);
  const AnalyticBlock a = compute_analytics(cfg, false);
  const fs::path p = output_path(cfg, "zeta.json");
  write_json(p, zeta_report(cfg, a));
  std::cout << "zeta (projection):\n";
  for (int i = 0; i < cfg.n; ++i) {
    for (int j = 0; j < cfg.n; ++j) std::cout << (j ? " " : "  ") << format_double(a.zeta.projection.zeta(i, j));
    std::cout << '\n';
  }
  std::cout << "cross_error " << format_double(a.zeta.cross_error) << "\nht_limit " << format_double(a.ht_limit)
            << '\n';
  if (a.remark_n2) {
    std::cout << "remark_n2 " << format_double(*a.remark_n2) << " (ht_limit / remark_n2 = "
              << format_double(a.ht_limit / *a.remark_n2) << ")\n";
  }
  std::cout << "wrote " << p.string() << '\n';
  if (a.zeta.cross_error > 1e-6) {
    std::cerr << "error: zeta methods disagree (cross_error " << a.zeta.cross_error << " > 1e-6)\n";
    return kExitCrossCheck;
  }
  return kExitOk;
}

int cmd_sweep(const Options& o) {
  const auto cfg = load(o);
  const int jobs = resolve_jobs(o.jobs);
  log(o, "sweep: " + std::to_string(cfg.epsilon_grid.size() * static_cast<std::size_t>(cfg.replications)) +
             " runs on " + std::to_string(jobs) + " worker(s)");
  const auto t0 = std::chrono::steady_clock::now();
  const SweepReport rep = run_sweep(cfg, jobs);
  log(o, "sweep: " + std::to_string(std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count()) +
             " s");

  const fs::path csv = output_path(cfg, "sweep.csv");
  {
    std::ofstream out(csv, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write '" + csv.string() + "'");
    write_sweep_csv(out, rep.rows);
  }
  const fs::path js = output_path(cfg, "sweep.json");
  write_json(js, to_json(rep));

  write_sweep_csv(std::cout, rep.rows);
  if (rep.analytic) std::cout << "ht_limit " << format_double(rep.analytic->ht_limit) << '\n';
  std::cout << "wrote " << csv.string() << " and " << js.string() << '\n';
  if (rep.analytic && rep.analytic->zeta.cross_error > 1e-6) {
    std::cerr << "error: zeta methods disagree (cross_error " << rep.analytic->zeta.cross_error << ")\n";
    return kExitCrossCheck;
  }
  return kExitOk;
}

int cmd_lower_bound(const Options& o) {
  const auto cfg = load(o);
  if (cfg.n > 3) {
    std::cerr << "error: the lower bound enumerates all (n!)! priority orderings; n = " << cfg.n
              << " would need (" << cfg.n << "!)! of them. Only n <= 3 is supported.\n";
    return kExitInfeasible;
  }
  const CostMatrix c = cfg.cost_matrix();
  json per_eps = json::array();
  std::int64_t clamped = 0;
  double qstar_limit = 0.0, qstar_limit_eps_form = 0.0;
  json orderings;
  for (double e : cfg.epsilon_grid) {
    const auto lb = universal_lower_bound(c, cfg.model(e));
    clamped += lb.clamped_classes;
    qstar_limit = lb.qstar_limit;
    qstar_limit_eps_form = lb.qstar_limit_eps_form;
    json entry = to_json(lb, true);
    if (orderings.is_null()) orderings = entry["schedules"];
    entry.erase("schedules");
    per_eps.push_back(std::move(entry));
    std::cout << "eps " << format_double(e) << "  Qstar_eps " << format_double(lb.qstar_eps) << "  ("
              << lb.per_ordering.size() << " orderings)\n";
  }
  std::cout << "Qstar_limit " << format_double(qstar_limit) << '\n';
  if (clamped > 0) {
    std::cerr << "warning: " << clamped << " per-class bound values were negative and clamped at 0\n";
  }
  const fs::path p = output_path(cfg, "lb.json");
  write_json(p, {{"n", cfg.n},
                 {"schedules", orderings},
                 {"per_epsilon", std::move(per_eps)},
                 {"Qstar_limit", qstar_limit},
                 {"Qstar_limit_eps_form", qstar_limit_eps_form},
                 {"config", to_json(cfg)},
                 {"config_hash", config_hash(cfg)},
                 {"version", kVersion}});
  std::cout << "wrote " << p.string() << '\n';
  return kExitOk;
}

int cmd_validate(const Options& o) {
  ValidateOptions vo;
  vo.inject_matcher_fault = o.inject_matcher_fault;
  if (o.seed) vo.seed = *o.seed;
  vo.jobs = resolve_jobs(o.jobs);
  const auto results = run_validation(vo);
  bool all = true;
  std::size_t width = 0;
  for (const auto& r : results) width = std::max(width, r.name.size());
  for (const auto& r : results) {
    all = all && r.passed;
    std::cout << (r.passed ? "PASS  " : "FAIL  ") << std::left << std::setw(static_cast<int>(width)) << r.name;
    if (o.verbose) std::cout << "  " << std::right << std::fixed << std::setprecision(3) << r.seconds << " s";
    std::cout.unsetf(std::ios::floatfield);
    if (!r.detail.empty() && (o.verbose || !r.passed)) std::cout << "  " << r.detail;
    std::cout << '\n';
  }
  std::cout << (all ? "all checks passed" : "some checks FAILED") << '\n';
  return all ? kExitOk : kExitCrossCheck;
}

int cmd_simulate(const Options& o) {
  auto cfg = load(o);
  if (o.slots) {
    if (*o.slots < cfg.batch_count) throw ConfigError("--slots must be >= batch_count");
    cfg.slots = *o.slots;
  }
  const double eps = o.epsilon.value_or(cfg.epsilon_grid.front());
  if (!(eps > 0.0 && eps < 1.0)) throw ConfigError("--epsilon must lie in (0, 1)");
  RunConfig rc = make_run_config(cfg, eps, 0);

  std::ofstream trace;
  if (!o.trace.empty()) {
    trace.open(o.trace, std::ios::binary);
    if (!trace) throw std::runtime_error("cannot write trace '" + o.trace + "'");
    trace << "t,i,j,Q,A,S,U\n";
    const int n = cfg.n;
    rc.observer = [&trace, n](const QueueState& before, const SlotRecord& r) {
      for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
          const auto k = static_cast<std::size_t>(i * n + j);
          trace << before.t << ',' << i << ',' << j << ',' << before.q[k] << ',' << r.a[k] << ',' << r.s[k] << ','
                << r.u[k] << '\n';
        }
      }
    };
  }
  log(o, "simulate: eps " + format_double(eps) + ", warmup " + std::to_string(rc.warmup) + ", measured " +
             std::to_string(rc.measured));
  const RunStats s = run(rc);
  json doc = to_json(s);
  doc["config"] = to_json(cfg);
  doc["config_hash"] = config_hash(cfg);
  doc["version"] = kVersion;
  const fs::path p = output_path(cfg, "stats.json");
  write_json(p, doc);
  std::cout << "eps " << format_double(eps) << "  eps*E[sum cQ] " << format_double(eps * s.weighted_qsum.mean)
            << " +- " << format_double(eps * s.weighted_qsum.std_error) << "\nE[sum U] "
            << format_double(s.unused_service_rate.mean) << " +- " << format_double(s.unused_service_rate.std_error)
            << "\ninvariant violations " << s.invariant_violations << "\nwrote " << p.string() << '\n';
  return s.invariant_violations == 0 ? kExitOk : kExitCrossCheck;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"switchlab: c-weighted MaxWeight heavy-traffic experiments"};
  app.require_subcommand(1);
  Options o;

  auto common = [&o](CLI::App* sub, bool needs_config) {
    auto* c = sub->add_option("--config", o.config, "experiment config (JSON)");
    if (needs_config) c->required();
    sub->add_option("--jobs", o.jobs, "worker threads (default: SWITCHLAB_JOBS, else all cores)");
    sub->add_option("--seed", o.seed, "master seed, overrides the config");
    sub->add_flag("--verbose,-v", o.verbose, "progress and timing on stderr");
  };

  auto* zeta = app.add_subcommand("zeta", "zeta by both methods and the heavy-traffic limit");
  common(zeta, true);
  auto* sweep = app.add_subcommand("sweep", "simulate every eps in the grid, pool replications");
  common(sweep, true);
  auto* lb = app.add_subcommand("lower-bound", "priority-ordering lower bound (n <= 3)");
  common(lb, true);
  auto* val = app.add_subcommand("validate", "run the invariant suite");
  common(val, false);
  val->add_flag("--inject-matcher-fault", o.inject_matcher_fault, "test hook: corrupt the matcher");
  auto* sim = app.add_subcommand("simulate", "single run with optional trace dump");
  common(sim, true);
  sim->add_option("--trace", o.trace, "per-slot CSV trace: t,i,j,Q,A,S,U");
  sim->add_option("--epsilon", o.epsilon, "eps for this run (default: first in grid)");
  sim->add_option("--slots", o.slots, "measured slots, overrides the config");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitConfig;
  }

  try {
    if (*zeta) return cmd_zeta(o);
    if (*sweep) return cmd_sweep(o);
    if (*lb) return cmd_lower_bound(o);
    if (*val) return cmd_validate(o);
    if (*sim) return cmd_simulate(o);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitConfig;
  }
  return kExitConfig;
}
