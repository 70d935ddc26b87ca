#include "switchlab/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <bit>
#include <charconv>
#include <cstdlib>
#include <exception>
#include <istream>
#include <ostream>
#include <set>
#include <stdexcept>
#include <thread>

#include "switchlab/random.hpp"

namespace switchlab {

using nlohmann::json;

int resolve_jobs(std::optional<int> flag) {
  if (flag) {
    if (*flag < 1) throw ConfigError("--jobs must be >= 1");
    return *flag;
  }
  if (const char* env = std::getenv("SWITCHLAB_JOBS"); env != nullptr && *env != '\0') {
    int v = 0;
    const char* end = env + std::char_traits<char>::length(env);
    const auto [p, ec] = std::from_chars(env, end, v);
    if (ec != std::errc() || p != end || v < 1) {
      throw ConfigError(std::string("SWITCHLAB_JOBS must be a positive integer; got '") + env + "'");
    }
    return v;
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

void parallel_for(std::size_t count, int jobs, const std::function<void(std::size_t)>& task) {
  if (count == 0) return;
  const auto workers = std::min<std::size_t>(count, static_cast<std::size_t>(std::max(1, jobs)));
  std::vector<std::exception_ptr> errors(count);
  if (workers == 1) {
    for (std::size_t k = 0; k < count; ++k) {
      try {
        task(k);
      } catch (...) {
        errors[k] = std::current_exception();
      }
    }
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::jthread> pool;
    pool.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) {
      pool.emplace_back([&] {
        for (std::size_t k = next.fetch_add(1); k < count; k = next.fetch_add(1)) {
          try {
            task(k);
          } catch (...) {
            errors[k] = std::current_exception();
          }
        }
      });
    }
  }
  // Lowest failing index wins, so the error reported is deterministic too.
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

std::uint64_t replication_seed(std::uint64_t master, double epsilon, int rep) {
  const std::uint64_t per_eps = derive_seed(master, std::bit_cast<std::uint64_t>(epsilon), "epsilon");
  return derive_seed(per_eps, static_cast<std::uint64_t>(rep), "replication");
}

RunConfig make_run_config(const ExperimentConfig& cfg, double epsilon, int rep) {
  RunConfig rc{.c = cfg.cost_matrix(), .model = cfg.model(epsilon)};
  rc.matcher = cfg.matcher;
  rc.warmup = cfg.warmup_for(epsilon);
  rc.measured = cfg.slots;
  rc.batch_count = cfg.batch_count;
  rc.seed = replication_seed(cfg.seed, epsilon, rep);
  rc.perp_stride = cfg.ssc_sampling_stride;
  return rc;
}

RunStats pool_runs(const std::vector<RunStats>& reps) {
  if (reps.empty()) throw std::invalid_argument("pool_runs: no replications");
  if (reps.size() == 1) return reps.front();
  RunStats out = reps.front();
  out.drift_trace.clear();
  auto gather = [&](auto field) {
    std::vector<Estimate> v;
    v.reserve(reps.size());
    for (const auto& r : reps) v.push_back(field(r));
    return pool(v);
  };
  out.weighted_qsum = gather([](const RunStats& r) { return r.weighted_qsum; });
  out.unused_service_rate = gather([](const RunStats& r) { return r.unused_service_rate; });
  out.parallel_norm = gather([](const RunStats& r) { return r.parallel_norm; });
  for (std::size_t k = 0; k < out.perp_norm_moment.size(); ++k) {
    out.perp_norm_moment[k] = gather([k](const RunStats& r) { return r.perp_norm_moment[k]; });
  }
  out.measured_slots = 0;
  out.perp_samples = 0;
  out.invariant_violations = 0;
  out.max_abs_drift = 0.0;
  std::fill(out.departure_rate.begin(), out.departure_rate.end(), 0.0);
  for (const auto& r : reps) {
    out.measured_slots += r.measured_slots;
    out.perp_samples += r.perp_samples;
    out.invariant_violations += r.invariant_violations;
    out.max_abs_drift = std::max(out.max_abs_drift, r.max_abs_drift);
    for (std::size_t k = 0; k < out.departure_rate.size(); ++k) {
      out.departure_rate[k] += r.departure_rate[k] / static_cast<double>(reps.size());
    }
  }
  return out;
}

AnalyticBlock compute_analytics(const ExperimentConfig& cfg, bool with_lower_bounds) {
  const CostMatrix c = cfg.cost_matrix();
  // The limit law's variance drives the heavy-traffic constant; every eps in
  // the grid shares it.
  const ArrivalModel m = cfg.model(cfg.epsilon_grid.front());
  AnalyticBlock a{.zeta = zeta_both(c), .sigma2 = m.limit_moments().var};
  a.ht_limit = ht_limit(a.zeta.projection.zeta, a.sigma2);
  a.ht_limit_c_weighted = ht_limit_c_weighted(c, a.sigma2);
  if (cfg.n == 2) a.remark_n2 = remark_n2_formula(c, a.sigma2);
  if (with_lower_bounds && cfg.n <= 3) {
    for (double e : cfg.epsilon_grid) a.lower_bounds.push_back(universal_lower_bound(c, cfg.model(e)));
  }
  return a;
}

SweepReport run_sweep(const ExperimentConfig& cfg, int jobs) {
  SweepReport rep;
  rep.config = cfg;
  rep.config_hash = config_hash(cfg);

  const std::size_t ne = cfg.epsilon_grid.size();
  const auto nr = static_cast<std::size_t>(cfg.replications);
  std::vector<RunStats> raw(ne * nr);
  parallel_for(raw.size(), jobs, [&](std::size_t k) {
    const double e = cfg.epsilon_grid[k / nr];
    raw[k] = run(make_run_config(cfg, e, static_cast<int>(k % nr)));
  });

  for (std::size_t ie = 0; ie < ne; ++ie) {
    const std::vector<RunStats> reps(raw.begin() + static_cast<std::ptrdiff_t>(ie * nr),
                                     raw.begin() + static_cast<std::ptrdiff_t>((ie + 1) * nr));
    RunStats p = pool_runs(reps);
    SweepRow row;
    row.epsilon = p.epsilon;
    row.scaled_weighted_qsum = {p.epsilon * p.weighted_qsum.mean, p.epsilon * p.weighted_qsum.std_error};
    row.perp_norm_mean = p.perp_norm_moment[0].mean;
    row.perp_norm2_mean = p.perp_norm_moment[1].mean;
    row.parallel_norm_mean = p.parallel_norm.mean;
    row.unused_service_rate = p.unused_service_rate;
    row.slots = cfg.slots;
    row.replications = cfg.replications;
    row.max_abs_drift = p.max_abs_drift;
    row.invariant_violations = p.invariant_violations;
    rep.rows.push_back(row);
    rep.pooled.push_back(std::move(p));
  }

  try {
    rep.analytic = compute_analytics(cfg, true);
  } catch (const std::exception&) {
    rep.analytic.reset();
  }
  std::set<double> distinct(cfg.epsilon_grid.begin(), cfg.epsilon_grid.end());
  const bool sampled = std::all_of(rep.pooled.begin(), rep.pooled.end(), [](const RunStats& s) { return s.perp_samples > 0; });
  if (distinct.size() >= 3 && sampled) rep.ssc = ssc_curve(rep.pooled);
  return rep;
}

namespace {

json matrix_json(const FlatVector& v) {
  json rows = json::array();
  for (int i = 0; i < v.n(); ++i) {
    json r = json::array();
    for (int j = 0; j < v.n(); ++j) r.push_back(v(i, j));
    rows.push_back(std::move(r));
  }
  return rows;
}

json estimate_json(const Estimate& e) { return {{"mean", e.mean}, {"stderr", e.std_error}}; }

}  // namespace

json to_json(const ZetaPair& z) {
  return {{"gmatrix", matrix_json(z.gmatrix.zeta)},
          {"projection", matrix_json(z.projection.zeta)},
          {"cross_error", z.cross_error}};
}

json to_json(const LowerBoundResult& lb, bool include_orderings) {
  json doc{{"n", lb.n},
           {"epsilon", lb.epsilon},
           {"orderings_enumerated", lb.per_ordering.size()},
           {"Qstar_eps", lb.qstar_eps},
           {"Qstar_limit", lb.qstar_limit},
           {"Qstar_limit_eps_form", lb.qstar_limit_eps_form},
           {"clamped_classes", lb.clamped_classes}};
  json sched = json::array();
  for (const auto& s : lb.schedules) sched.push_back(s.perm);
  doc["schedules"] = std::move(sched);
  if (include_orderings) {
    json ords = json::array();
    for (std::size_t k = 0; k < lb.per_ordering.size(); ++k) {
      const auto& o = lb.per_ordering[k];
      ords.push_back({{"id", k}, {"order", o.order}, {"value_eps", o.value_eps}, {"value_limit", o.value_limit}});
    }
    doc["per_ordering"] = std::move(ords);
  }
  return doc;
}

json to_json(const RunStats& s) {
  json perp = json::object();
  for (std::size_t k = 0; k < s.perp_norm_moment.size(); ++k) {
    perp["r" + std::to_string(RunStats::kPerpOrders[k])] = estimate_json(s.perp_norm_moment[k]);
  }
  return {{"epsilon", s.epsilon},
          {"seed", s.seed},
          {"warmup_slots", s.warmup_slots},
          {"measured_slots", s.measured_slots},
          {"batch_count", s.batch_count},
          {"weighted_qsum", estimate_json(s.weighted_qsum)},
          {"scaled_weighted_qsum", estimate_json({s.epsilon * s.weighted_qsum.mean, s.epsilon * s.weighted_qsum.std_error})},
          {"unused_service_rate", estimate_json(s.unused_service_rate)},
          {"perp_norm_moments", std::move(perp)},
          {"parallel_norm", estimate_json(s.parallel_norm)},
          {"perp_samples", s.perp_samples},
          {"max_abs_drift", s.max_abs_drift},
          {"invariant_violations", s.invariant_violations},
          {"departure_rate", s.departure_rate}};
}

json zeta_report(const ExperimentConfig& cfg, const AnalyticBlock& a) {
  json doc{{"n", cfg.n},
           {"zeta", to_json(a.zeta)},
           {"sigma2", matrix_json(a.sigma2)},
           {"ht_limit", a.ht_limit},
           {"ht_limit_c_weighted", a.ht_limit_c_weighted},
           {"config", to_json(cfg)},
           {"config_hash", config_hash(cfg)},
           {"version", kVersion}};
  if (a.remark_n2) {
    doc["remark_n2"] = *a.remark_n2;
    doc["ht_limit_over_remark"] = *a.remark_n2 != 0.0 ? json(a.ht_limit / *a.remark_n2) : json(nullptr);
  }
  return doc;
}

json to_json(const SweepReport& r) {
  json rows = json::array();
  for (const auto& row : r.rows) {
    rows.push_back({{"epsilon", row.epsilon},
                    {"scaled_weighted_qsum", row.scaled_weighted_qsum.mean},
                    {"stderr", row.scaled_weighted_qsum.std_error},
                    {"perp_norm_mean", row.perp_norm_mean},
                    {"perp_norm2_mean", row.perp_norm2_mean},
                    {"parallel_norm_mean", row.parallel_norm_mean},
                    {"unused_service_rate", estimate_json(row.unused_service_rate)},
                    {"slots", row.slots},
                    {"replications", row.replications},
                    {"max_abs_drift", row.max_abs_drift},
                    {"invariant_violations", row.invariant_violations}});
  }
  json runs = json::array();
  for (const auto& p : r.pooled) runs.push_back(to_json(p));
  json doc{{"rows", std::move(rows)},
           {"runs", std::move(runs)},
           {"metadata", {{"config_hash", r.config_hash}, {"seed", r.config.seed}, {"version", kVersion}}},
           {"config", to_json(r.config)}};
  if (r.analytic) {
    json a = zeta_report(r.config, *r.analytic);
    a.erase("config");
    a.erase("config_hash");
    a.erase("version");
    json lbs = json::array();
    for (const auto& lb : r.analytic->lower_bounds) lbs.push_back(to_json(lb, false));
    a["lower_bounds"] = std::move(lbs);
    doc["analytic"] = std::move(a);
  } else {
    doc["analytic"] = nullptr;
  }
  if (r.ssc) {
    json rows_ssc = json::array();
    for (const auto& s : r.ssc->rows) {
      rows_ssc.push_back({{"epsilon", s.epsilon},
                          {"perp_norm_mean", s.perp_norm_mean},
                          {"perp_norm2_mean", s.perp_norm2_mean},
                          {"parallel_norm_mean", s.parallel_norm_mean},
                          {"scaled_weighted_qsum", s.scaled_weighted_qsum}});
    }
    doc["ssc"] = {{"rows", std::move(rows_ssc)},
                  {"parallel_slope", r.ssc->parallel_slope},
                  {"perp_slope", r.ssc->perp_slope},
                  {"perp_ratio", r.ssc->perp_ratio}};
  }
  return doc;
}

std::string format_double(double v) {
  char buf[64];
  const auto [p, ec] = std::to_chars(buf, buf + sizeof buf, v);
  if (ec != std::errc()) throw std::runtime_error("format_double: conversion failed");
  return std::string(buf, p);
}

namespace {

constexpr const char* kSweepHeader =
    "epsilon,scaled_weighted_qsum,stderr,perp_norm_mean,perp_norm2_mean,unused_service_rate,slots,replications";

template <typename T>
T parse_field(std::string_view s, std::size_t line) {
  T v{};
  const auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || p != s.data() + s.size()) {
    throw std::runtime_error("sweep.csv line " + std::to_string(line) + ": bad field '" + std::string(s) + "'");
  }
  return v;
}

}  // namespace

void write_sweep_csv(std::ostream& out, const std::vector<SweepRow>& rows) {
  out << kSweepHeader << '\n';
  for (const auto& r : rows) {
    out << format_double(r.epsilon) << ',' << format_double(r.scaled_weighted_qsum.mean) << ','
        << format_double(r.scaled_weighted_qsum.std_error) << ',' << format_double(r.perp_norm_mean) << ','
        << format_double(r.perp_norm2_mean) << ',' << format_double(r.unused_service_rate.mean) << ',' << r.slots
        << ',' << r.replications << '\n';
  }
}

std::vector<SweepRow> read_sweep_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || line != kSweepHeader) throw std::runtime_error("sweep.csv: unexpected header");
  std::vector<SweepRow> rows;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::vector<std::string_view> f;
    std::string_view rest(line);
    for (;;) {
      const auto comma = rest.find(',');
      f.push_back(rest.substr(0, comma));
      if (comma == std::string_view::npos) break;
      rest.remove_prefix(comma + 1);
    }
    if (f.size() != 8) throw std::runtime_error("sweep.csv line " + std::to_string(lineno) + ": expected 8 fields");
    SweepRow r;
    r.epsilon = parse_field<double>(f[0], lineno);
    r.scaled_weighted_qsum = {parse_field<double>(f[1], lineno), parse_field<double>(f[2], lineno)};
    r.perp_norm_mean = parse_field<double>(f[3], lineno);
    r.perp_norm2_mean = parse_field<double>(f[4], lineno);
    r.unused_service_rate.mean = parse_field<double>(f[5], lineno);
    r.slots = parse_field<std::int64_t>(f[6], lineno);
    r.replications = parse_field<int>(f[7], lineno);
    rows.push_back(r);
  }
  return rows;
}

}  // namespace switchlab
