#include "switchlab/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace switchlab {

namespace {

constexpr double kDriftSlack = 1e-9;

void advance(QueueState& state, SlotRecord& rec, const ArrivalModel& model, const CostMatrix& c,
             const MatcherConfig& matcher, Rng& arrivals, Rng& ties, bool& ok) {
  const Schedule s = max_weight_schedule(state.q, c, matcher, ties);
  model.sample_into(rec.a, arrivals);
  ok = apply_slot(state, rec.a, s, rec.u);
  std::fill(rec.s.begin(), rec.s.end(), 0);
  for (int i = 0; i < state.n; ++i) rec.s[static_cast<std::size_t>(i * state.n + s.perm[static_cast<std::size_t>(i)])] = 1;
  double wq = 0.0;
  for (std::size_t k = 0; k < state.q.size(); ++k) wq += c[k] * static_cast<double>(state.q[k]);
  rec.weighted_qsum = wq;
}

SlotRecord blank_record(int n) {
  const auto m = static_cast<std::size_t>(n) * static_cast<std::size_t>(n);
  SlotRecord r;
  r.a.assign(m, 0);
  r.s.assign(m, 0);
  r.u.assign(m, 0);
  return r;
}

}  // namespace

QueueState QueueState::empty(int n) {
  QueueState s;
  s.n = n;
  s.q.assign(static_cast<std::size_t>(n) * static_cast<std::size_t>(n), 0);
  return s;
}

FlatVector QueueState::as_flat() const {
  FlatVector x(n);
  for (std::size_t k = 0; k < q.size(); ++k) x[k] = static_cast<double>(q[k]);
  return x;
}

bool apply_slot(QueueState& state, std::span<const std::int64_t> a, const Schedule& s, std::span<std::int64_t> u) {
  const int n = state.n;
  const auto m = state.q.size();
  if (a.size() != m || u.size() != m || s.n() != n) throw DimensionError("apply_slot: dimension mismatch");
  bool ok = true;
  std::int64_t complementarity = 0;
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      const auto k = static_cast<std::size_t>(i * n + j);
      const std::int64_t served = s.serves(i, j) ? 1 : 0;
      const std::int64_t unused = std::max<std::int64_t>(0, served - state.q[k] - a[k]);
      u[k] = unused;
      state.q[k] += a[k] - served + unused;
      if (state.q[k] < 0 || unused > served || unused < 0 || unused > 1) ok = false;
      complementarity += state.q[k] * unused;
    }
  }
  ++state.t;
  return ok && complementarity == 0;
}

SlotRecord step(QueueState& state, const ArrivalModel& model, const CostMatrix& c, const MatcherConfig& matcher,
                Rng& arrivals, Rng& ties) {
  if (state.n != c.n() || model.n() != c.n()) throw DimensionError("step: dimension mismatch");
  SlotRecord rec = blank_record(state.n);
  bool ok = true;
  advance(state, rec, model, c, matcher, arrivals, ties, ok);
  if (!ok) throw std::logic_error("step: slot invariant violated");
  return rec;
}

double perp_norm(const FlatVector& x, const CostMatrix& c) {
  return std::sqrt(cnorm2(project_cone(x, c).perp, c));
}

std::int64_t default_warmup(double epsilon) {
  return std::max<std::int64_t>(100'000, static_cast<std::int64_t>(std::ceil(20.0 / (epsilon * epsilon))));
}

RunStats run(const RunConfig& cfg) {
  const int n = cfg.c.n();
  if (cfg.model.n() != n) throw DimensionError("run: arrival model and cost matrix sizes differ");
  if (cfg.warmup < 0) throw std::invalid_argument("run: warmup must be >= 0");
  if (cfg.batch_count < 20) throw std::invalid_argument("run: batch_count must be >= 20");
  if (cfg.measured < cfg.batch_count) throw std::invalid_argument("run: measured slots must be >= batch_count");
  if (cfg.perp_stride < 0) throw std::invalid_argument("run: perp_stride must be >= 0");
  cfg.matcher.validate();

  Rng arrivals(derive_seed(cfg.seed, 0, "arrivals"));
  Rng ties(derive_seed(cfg.seed, 0, "ties"));

  QueueState state = QueueState::empty(n);
  SlotRecord rec = blank_record(n);

  BatchMeans wq(cfg.measured, cfg.batch_count);
  BatchMeans unused(cfg.measured, cfg.batch_count);
  BatchMeans perp1(cfg.measured, cfg.batch_count);
  BatchMeans perp2(cfg.measured, cfg.batch_count);
  BatchMeans perp4(cfg.measured, cfg.batch_count);
  BatchMeans par(cfg.measured, cfg.batch_count);

  RunStats out;
  out.warmup_slots = cfg.warmup;
  out.measured_slots = cfg.measured;
  out.batch_count = cfg.batch_count;
  out.seed = cfg.seed;
  out.epsilon = cfg.model.epsilon();
  std::vector<std::int64_t> departures(state.q.size(), 0);

  const std::int64_t total = cfg.warmup + cfg.measured;
  for (std::int64_t t = 0; t < total; ++t) {
    const std::int64_t idx = t - cfg.warmup;
    const bool measuring = idx >= 0;
    const bool sample = measuring && cfg.perp_stride > 0 && idx % cfg.perp_stride == 0;

    double w_before = 0.0;
    if (sample) {
      const auto proj = project_cone(state.as_flat(), cfg.c);
      w_before = std::sqrt(cnorm2(proj.perp, cfg.c));
      par.add(idx, std::sqrt(cnorm2(proj.parallel, cfg.c)));
      perp1.add(idx, w_before);
      perp2.add(idx, w_before * w_before);
      perp4.add(idx, w_before * w_before * w_before * w_before);
      ++out.perp_samples;
    }

    QueueState before;
    if (cfg.observer) before = state;

    bool ok = true;
    advance(state, rec, cfg.model, cfg.c, cfg.matcher, arrivals, ties, ok);
    if (!ok) ++out.invariant_violations;

    rec.perp_norm.reset();
    rec.drift_w.reset();
    if (sample) {
      const double w_after = perp_norm(state.as_flat(), cfg.c);
      const double drift = w_after - w_before;
      rec.perp_norm = w_before;
      rec.drift_w = drift;
      out.max_abs_drift = std::max(out.max_abs_drift, std::abs(drift));
      if (cfg.keep_drift_trace) out.drift_trace.push_back({w_before, drift});
    }
    if (cfg.observer) cfg.observer(before, rec);

    if (measuring) {
      wq.add(idx, rec.weighted_qsum);
      std::int64_t usum = 0;
      for (std::size_t k = 0; k < rec.u.size(); ++k) {
        usum += rec.u[k];
        departures[k] += rec.s[k] - rec.u[k];
      }
      unused.add(idx, static_cast<double>(usum));
    }
  }

  out.weighted_qsum = wq.estimate();
  out.unused_service_rate = unused.estimate();
  out.perp_norm_moment = {perp1.estimate(), perp2.estimate(), perp4.estimate()};
  out.parallel_norm = par.estimate();
  out.departure_rate.resize(departures.size());
  for (std::size_t k = 0; k < departures.size(); ++k) {
    out.departure_rate[k] = static_cast<double>(departures[k]) / static_cast<double>(cfg.measured);
  }
  return out;
}

DriftTable drift_diagnostics(std::span<const DriftSample> trace, const CostMatrix& c, int a_max,
                             std::span<const double> kappa_grid) {
  if (trace.empty()) throw std::invalid_argument("drift_diagnostics: trace carries no drift samples");
  DriftTable table;
  table.bound = c.n() * std::sqrt(c.max()) * a_max;
  for (const auto& s : trace) table.max_abs_drift = std::max(table.max_abs_drift, std::abs(s.drift));
  table.bound_holds = table.max_abs_drift <= table.bound * (1.0 + kDriftSlack);

  for (double kappa : kappa_grid) {
    DriftRow row;
    row.kappa = kappa;
    double sum = 0.0, sum2 = 0.0;
    for (const auto& s : trace) {
      if (s.perp_norm < kappa) continue;
      ++row.count;
      sum += s.drift;
      sum2 += s.drift * s.drift;
    }
    if (row.count > 0) {
      const auto k = static_cast<double>(row.count);
      row.mean_drift.mean = sum / k;
      if (row.count > 1) {
        const double var = std::max(0.0, (sum2 - k * row.mean_drift.mean * row.mean_drift.mean) / (k - 1.0));
        row.mean_drift.std_error = std::sqrt(var / k);
      }
    }
    table.rows.push_back(row);
  }
  return table;
}

DriftTable drift_diagnostics(std::span<const SlotRecord> trace, const CostMatrix& c, int a_max,
                             std::span<const double> kappa_grid) {
  std::vector<DriftSample> samples;
  for (const auto& r : trace) {
    if (r.perp_norm && r.drift_w) samples.push_back({*r.perp_norm, *r.drift_w});
  }
  return drift_diagnostics(std::span<const DriftSample>(samples), c, a_max, kappa_grid);
}

}  // namespace switchlab
