#include "switchlab/validate.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <exception>
#include <map>
#include <memory>
#include <numeric>
#include <sstream>

#include "switchlab/analytics.hpp"
#include "switchlab/config.hpp"
#include "switchlab/experiment.hpp"
#include "switchlab/random.hpp"
#include "switchlab/scheduling.hpp"
#include "switchlab/simulator.hpp"
#include "switchlab/stats.hpp"
#include "switchlab/traffic.hpp"
#include "switchlab/wlinalg.hpp"

namespace switchlab {

namespace {

struct Outcome {
  bool passed = true;
  std::ostringstream detail;

  void require(bool ok, const std::string& what) {
    if (!ok && passed) detail << what;
    passed = passed && ok;
  }
};

using CheckFn = std::function<void(Outcome&)>;

CostMatrix random_cost(int n, Rng& rng, double lo = 0.1, double hi = 10.0) {
  std::vector<double> v(static_cast<std::size_t>(n * n));
  for (double& x : v) x = lo + (hi - lo) * uniform01(rng);
  return CostMatrix(n, v);
}

FlatVector random_vector(int n, Rng& rng, double lo, double hi) {
  FlatVector x(n);
  for (std::size_t k = 0; k < x.size(); ++k) x[k] = lo + (hi - lo) * uniform01(rng);
  return x;
}

std::vector<std::int64_t> random_queues(int n, Rng& rng, std::uint64_t max_q) {
  std::vector<std::int64_t> q(static_cast<std::size_t>(n * n));
  for (auto& v : q) v = static_cast<std::int64_t>(uniform_index(rng, max_q + 1));
  return q;
}

// Shared desk-scale run: n = 2, non-uniform c, Bernoulli uniform arrivals.
struct DeskRun {
  CostMatrix c = CostMatrix::from_rows({{1.0, 2.0}, {2.0, 1.0}});
  double epsilon = 0.1;
  RunStats stats;

  explicit DeskRun(std::uint64_t seed) {
    RunConfig rc{.c = c, .model = ArrivalModel(ArrivalKind::bernoulli, uniform_nu(2), epsilon)};
    rc.warmup = default_warmup(epsilon);
    rc.measured = 1'000'000;
    rc.seed = seed;
    rc.keep_drift_trace = true;
    stats = run(rc);
  }
};

std::vector<std::pair<std::string, CheckFn>> build_checks(const ValidateOptions& opts,
                                                          std::shared_ptr<const DeskRun>& desk) {
  const std::uint64_t seed = opts.seed;
  std::vector<std::pair<std::string, CheckFn>> checks;

  checks.emplace_back("wlinalg.space_projection", [seed](Outcome& o) {
    Rng rng(derive_seed(seed, 1, "validate"));
    for (int trial = 0; trial < 100; ++trial) {
      const int n = 2 + static_cast<int>(uniform_index(rng, 5));
      const CostMatrix c = random_cost(n, rng);
      const ProjectionBasis basis(c);
      const FlatVector x = random_vector(n, rng, -5.0, 5.0);
      const auto p = project_space(x, basis, c);
      const double scale = std::max(1.0, cnorm2(x, c));
      for (int i = 0; i < n; ++i) {
        o.require(std::abs(cdot(p.perp, row_generator(c, i), c)) < 1e-9 * scale, "perp not orthogonal to a row generator");
        o.require(std::abs(cdot(p.perp, column_generator(c, i), c)) < 1e-9 * scale, "perp not orthogonal to a column generator");
      }
      const FlatVector sum = p.parallel + p.perp;
      for (std::size_t k = 0; k < x.size(); ++k) o.require(std::abs(sum[k] - x[k]) < 1e-9 * scale, "parallel + perp != x");
    }
  });

  checks.emplace_back("wlinalg.cone_projection_kkt", [seed](Outcome& o) {
    Rng rng(derive_seed(seed, 2, "validate"));
    for (int trial = 0; trial < 100; ++trial) {
      const int n = 2 + static_cast<int>(uniform_index(rng, 4));
      const CostMatrix c = random_cost(n, rng);
      const FlatVector x = random_vector(n, rng, -20.0, 50.0);
      const auto p = project_cone(x, c);
      const double scale = std::max(1.0, std::sqrt(cnorm2(x, c)));
      for (double w : p.w) o.require(w >= 0.0, "negative row weight");
      for (double w : p.wt) o.require(w >= 0.0, "negative column weight");
      o.require(std::abs(cdot(p.perp, p.parallel, c)) < 1e-6 * scale * scale, "perp not orthogonal to parallel");
      for (int i = 0; i < n; ++i) {
        o.require(cdot(p.perp, row_generator(c, i), c) < 1e-6 * scale, "positive pairing with a row generator");
        o.require(cdot(p.perp, column_generator(c, i), c) < 1e-6 * scale, "positive pairing with a column generator");
      }
    }
  });

  checks.emplace_back("analytics.zeta_cross_validation", [seed](Outcome& o) {
    Rng rng(derive_seed(seed, 3, "validate"));
    double worst = 0.0;
    for (int trial = 0; trial < 200; ++trial) {
      const int n = 2 + trial % 5;
      worst = std::max(worst, zeta_both(random_cost(n, rng)).cross_error);
    }
    o.detail << "max cross_error " << worst;
    o.require(worst <= 1e-9, "; exceeds 1e-9");
  });

  checks.emplace_back("analytics.zeta_unit_cost", [](Outcome& o) {
    double worst = 0.0;
    for (int n = 2; n <= 8; ++n) {
      const auto z = zeta_projection(CostMatrix::ones(n)).zeta;
      const double expect = (2.0 * n - 1.0) / (n * n);
      for (std::size_t k = 0; k < z.size(); ++k) worst = std::max(worst, std::abs(z[k] - expect));
    }
    o.detail << "max deviation from (2n-1)/n^2: " << worst;
    o.require(worst <= 1e-12, "; exceeds 1e-12");
  });

  checks.emplace_back("analytics.zeta_symmetries", [seed](Outcome& o) {
    Rng rng(derive_seed(seed, 4, "validate"));
    for (int trial = 0; trial < 30; ++trial) {
      const int n = 2 + trial % 4;
      const CostMatrix c = random_cost(n, rng);
      const auto z = zeta_projection(c).zeta;

      std::vector<double> scaled(c.values().begin(), c.values().end());
      for (double& v : scaled) v *= 3.7;
      const auto zs = zeta_projection(CostMatrix(n, scaled)).zeta;

      std::vector<int> rp(static_cast<std::size_t>(n)), cp(static_cast<std::size_t>(n));
      std::iota(rp.begin(), rp.end(), 0);
      std::iota(cp.begin(), cp.end(), 0);
      std::shuffle(rp.begin(), rp.end(), rng);
      std::shuffle(cp.begin(), cp.end(), rng);
      std::vector<double> permuted(c.values().size());
      for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
          permuted[static_cast<std::size_t>(i * n + j)] = c(rp[static_cast<std::size_t>(i)], cp[static_cast<std::size_t>(j)]);
        }
      }
      const auto zp = zeta_projection(CostMatrix(n, permuted)).zeta;
      for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
          o.require(std::abs(zs(i, j) - 3.7 * z(i, j)) < 1e-9 * zs(i, j) + 1e-12, "zeta not 1-homogeneous in c");
          o.require(std::abs(zp(i, j) - z(rp[static_cast<std::size_t>(i)], cp[static_cast<std::size_t>(j)])) < 1e-9,
                    "zeta not equivariant under row/column permutation");
          o.require(z(i, j) >= -1e-12 && z(i, j) <= c(i, j) + 1e-12, "zeta outside [0, c_ij]");
        }
      }
    }
  });

  checks.emplace_back("analytics.ht_limit_linearity", [](Outcome& o) {
    const CostMatrix c = CostMatrix::from_rows({{1.0, 2.0}, {2.0, 1.0}});
    const FlatVector s(2, 0.25);
    const double one = ht_limit(c, s);
    const double two = ht_limit(c, 2.0 * s);
    o.require(std::abs(two - 2.0 * one) < 1e-12, "doubling sigma2 does not double the limit");
    o.require(ht_limit(c, FlatVector(2, 0.0)) == 0.0, "zero variance gives a nonzero limit");
    o.require(std::abs(ht_limit(CostMatrix::ones(2), s) - 0.75) < 1e-12, "n = 2 unit-cost limit is not 3/4");
  });

  checks.emplace_back("analytics.lower_bound_enumeration", [](Outcome& o) {
    const auto nu3 = uniform_nu(3);
    const auto lb3 = universal_lower_bound(CostMatrix::ones(3), ArrivalModel(ArrivalKind::bernoulli, nu3, 0.1));
    const auto lb2 =
        universal_lower_bound(CostMatrix::ones(2), ArrivalModel(ArrivalKind::bernoulli, uniform_nu(2), 0.1));
    o.detail << "orderings n=2: " << lb2.per_ordering.size() << ", n=3: " << lb3.per_ordering.size();
    o.require(lb2.per_ordering.size() == 2 && lb3.per_ordering.size() == 720, "; wrong ordering count");
  });

  checks.emplace_back("scheduling.hungarian_vs_exact", [seed, fault = opts.inject_matcher_fault](Outcome& o) {
    Rng rng(derive_seed(seed, 5, "validate"));
    Rng ties(derive_seed(seed, 6, "validate"));
    MatcherConfig hung{MatcherMode::hungarian};
    MatcherConfig exact{MatcherMode::exact};
    hung.inject_fault = exact.inject_fault = fault;
    int mismatches = 0;
    for (int trial = 0; trial < 300; ++trial) {
      const int n = 2 + trial % 6;
      const CostMatrix c = trial % 2 == 0 ? random_cost(n, rng) : CostMatrix::ones(n);
      const auto q = random_queues(n, rng, trial % 3 == 0 ? 3 : 1000);
      const double best = schedule_weight(enumerate_argmax(q, c).front(), q, c);
      const Schedule sh = max_weight_schedule(q, c, hung, ties);
      const Schedule se = max_weight_schedule(q, c, exact, ties);
      if (schedule_weight(sh, q, c) != best || schedule_weight(se, q, c) != best) ++mismatches;
    }
    o.detail << mismatches << " of 300 instances below the maximum weight";
    o.require(mismatches == 0, "");
  });

  checks.emplace_back("scheduling.tie_uniformity", [seed, fault = opts.inject_matcher_fault](Outcome& o) {
    Rng ties(derive_seed(seed, 7, "validate"));
    MatcherConfig exact{MatcherMode::exact};
    exact.inject_fault = fault;
    const CostMatrix c = CostMatrix::from_rows({{1, 2, 3}, {3, 1, 2}, {2, 3, 1}});
    const std::vector<std::int64_t> q(9, 0);
    std::map<Schedule, std::int64_t> freq;
    for (int d = 0; d < 60'000; ++d) ++freq[max_weight_schedule(q, c, exact, ties)];
    std::vector<std::int64_t> counts;
    for (const auto& [s, k] : freq) counts.push_back(k);
    const double p = counts.size() == 6 ? chi_square_uniform_pvalue(counts) : 0.0;
    o.detail << freq.size() << " distinct schedules, chi-square p = " << p;
    o.require(freq.size() == 6 && p > 0.001, "");
  });

  checks.emplace_back("traffic.face_and_moments", [seed](Outcome& o) {
    const CostMatrix c = CostMatrix::ones(2);
    o.require(face_check(uniform_nu(2), c), "uniform nu fails face check");
    o.require(!face_check(FlatVector(2, std::vector<double>{0.6, 0.5, 0.4, 0.5}), c), "non-stochastic nu passes");
    Rng rng(derive_seed(seed, 8, "validate"));
    for (auto kind : {ArrivalKind::bernoulli, ArrivalKind::uniform_integer, ArrivalKind::truncated_poisson}) {
      const ArrivalModel m(kind, uniform_nu(2), 0.1, kind == ArrivalKind::bernoulli ? 1 : 4);
      const auto mom = m.moments();
      const int draws = 200'000;
      std::vector<double> s1(4, 0.0), s2(4, 0.0);
      std::vector<std::int64_t> a(4);
      for (int d = 0; d < draws; ++d) {
        m.sample_into(a, rng);
        for (std::size_t k = 0; k < 4; ++k) {
          s1[k] += static_cast<double>(a[k]);
          s2[k] += static_cast<double>(a[k] * a[k]);
        }
      }
      for (std::size_t k = 0; k < 4; ++k) {
        const double se = std::sqrt(mom.var[k] / draws);
        o.require(std::abs(s1[k] / draws - mom.mean[k]) < 5.0 * se, std::string(to_string(kind)) + " sample mean off");
        o.require(std::abs(mom.mean[k] - 0.45) < 1e-12, std::string(to_string(kind)) + " mean is not (1-eps) nu");
        o.require(std::abs(s2[k] / draws - mom.second_moment[k]) < 0.02 * mom.second_moment[k],
                  std::string(to_string(kind)) + " second moment off");
      }
    }
  });

  checks.emplace_back("simulator.exact_invariants", [&desk](Outcome& o) {
    o.detail << "violations " << desk->stats.invariant_violations;
    o.require(desk->stats.invariant_violations == 0, "");
  });

  checks.emplace_back("simulator.unused_service_identity", [&desk](Outcome& o) {
    const auto& u = desk->stats.unused_service_rate;
    const double target = 2.0 * desk->epsilon;
    o.detail << "E[sum U] = " << u.mean << " +- " << u.std_error << " vs n eps = " << target;
    o.require(std::abs(u.mean - target) <= 3.0 * u.std_error, "");
  });

  checks.emplace_back("simulator.drift_bound", [&desk](Outcome& o) {
    std::vector<double> norms;
    for (const auto& d : desk->stats.drift_trace) norms.push_back(d.perp_norm);
    const std::vector<double> kappa{quantile(norms, 0.9)};
    const auto table = drift_diagnostics(desk->stats.drift_trace, desk->c, 1, kappa);
    o.detail << "max |dW| " << table.max_abs_drift << " <= " << table.bound << ", E[dW | tail] "
             << table.rows.front().mean_drift.mean;
    o.require(table.bound_holds, "; bound violated");
    o.require(table.rows.front().mean_drift.mean < 0.0, "; tail drift not negative");
  });

  checks.emplace_back("simulator.rate_stability", [&desk](Outcome& o) {
    double worst = 0.0;
    for (double r : desk->stats.departure_rate) worst = std::max(worst, std::abs(r - 0.45));
    o.detail << "max |departure - lambda| " << worst;
    o.require(worst < 0.01, "");
  });

  checks.emplace_back("simulator.reproducibility", [seed](Outcome& o) {
    auto trace = [seed] {
      std::vector<std::int64_t> flat;
      RunConfig rc{.c = CostMatrix::ones(3), .model = ArrivalModel(ArrivalKind::bernoulli, uniform_nu(3), 0.2)};
      rc.warmup = 0;
      rc.measured = 2000;
      rc.seed = seed;
      rc.observer = [&flat](const QueueState& before, const SlotRecord& r) {
        flat.insert(flat.end(), before.q.begin(), before.q.end());
        flat.insert(flat.end(), r.a.begin(), r.a.end());
        flat.insert(flat.end(), r.s.begin(), r.s.end());
      };
      (void)run(rc);
      return flat;
    };
    o.require(trace() == trace(), "identical seeds produced different traces");
  });

  checks.emplace_back("analytics.lower_bound_vs_simulation", [seed](Outcome& o) {
    const ArrivalModel m(ArrivalKind::bernoulli, uniform_nu(2), 0.1);
    const auto lb = universal_lower_bound(CostMatrix::ones(2), m);
    RunConfig rc{.c = CostMatrix::ones(2), .model = m};
    rc.warmup = default_warmup(0.1);
    rc.measured = 500'000;
    rc.seed = derive_seed(seed, 9, "validate");
    rc.perp_stride = 0;
    const auto s = run(rc);
    o.detail << "Qstar_eps " << lb.qstar_eps << " vs simulated " << s.weighted_qsum.mean << " +- "
             << s.weighted_qsum.std_error;
    o.require(lb.qstar_eps <= s.weighted_qsum.mean + 3.0 * s.weighted_qsum.std_error, "");
  });

  checks.emplace_back("cli.config_round_trip", [](Outcome& o) {
    const auto cfg = parse_config(nlohmann::json::parse(R"({
      "n": 3, "cost": {"preset": "random", "seed": 5, "lo": 0.5, "hi": 4},
      "arrivals": {"kind": "truncated-poisson", "a_max": 6},
      "epsilon_grid": [0.2, 0.1], "slots": 5000, "seed": 99
    })"));
    o.require(parse_config(to_json(cfg)) == cfg, "parse(serialize(cfg)) != cfg");
  });

  checks.emplace_back("cli.sweep_csv_round_trip", [](Outcome& o) {
    std::vector<SweepRow> rows(2);
    rows[0].epsilon = 0.1;
    rows[0].scaled_weighted_qsum = {0.6731234567891234, 0.00123};
    rows[0].slots = 1000;
    rows[0].replications = 2;
    rows[1].epsilon = 0.05;
    rows[1].perp_norm_mean = 1.0 / 3.0;
    std::stringstream ss;
    write_sweep_csv(ss, rows);
    const auto back = read_sweep_csv(ss);
    o.require(back.size() == 2 && back[0].scaled_weighted_qsum.mean == rows[0].scaled_weighted_qsum.mean &&
                  back[1].perp_norm_mean == rows[1].perp_norm_mean && back[0].slots == 1000,
              "sweep.csv does not round-trip");
  });

  return checks;
}

}  // namespace

std::vector<CheckResult> run_validation(const ValidateOptions& opts) {
  using clock = std::chrono::steady_clock;
  std::shared_ptr<const DeskRun> desk;
  auto checks = build_checks(opts, desk);
  std::vector<CheckResult> results(checks.size());

  // The shared simulation is built once, up front, and timed as its own line.
  CheckResult setup{"simulator.desk_run", true, "n=2, c=[[1,2],[2,1]], eps=0.1, 1e6 slots"};
  const auto t0 = clock::now();
  try {
    desk = std::make_shared<const DeskRun>(derive_seed(opts.seed, 10, "validate"));
  } catch (const std::exception& e) {
    setup.passed = false;
    setup.detail = e.what();
  }
  setup.seconds = std::chrono::duration<double>(clock::now() - t0).count();

  parallel_for(checks.size(), opts.jobs, [&](std::size_t k) {
    CheckResult& r = results[k];
    r.name = checks[k].first;
    const auto start = clock::now();
    if (!desk && r.name.starts_with("simulator.")) {
      r.passed = false;
      r.detail = "desk run failed";
    } else {
      Outcome o;
      try {
        checks[k].second(o);
        r.passed = o.passed;
        r.detail = o.detail.str();
      } catch (const std::exception& e) {
        r.passed = false;
        r.detail = std::string("exception: ") + e.what();
      }
    }
    r.seconds = std::chrono::duration<double>(clock::now() - start).count();
  });
  results.insert(results.begin(), setup);
  return results;
}

}  // namespace switchlab
