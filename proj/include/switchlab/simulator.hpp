#pragma once

// Slotted dynamics Q(t+1) = Q(t) + A(t) - S(t) + U(t) under c-weighted
// MaxWeight, with steady-state estimation and Lyapunov drift sampling.
//
// Within a slot the schedule is chosen from Q(t) and arrivals of the same
// slot are servable, so U = (S - Q - A)^+ and <Q(t+1), U(t)> = 0 exactly.

#include <array>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "switchlab/random.hpp"
#include "switchlab/scheduling.hpp"
#include "switchlab/stats.hpp"
#include "switchlab/traffic.hpp"
#include "switchlab/wlinalg.hpp"

namespace switchlab {

struct QueueState {
  int n = 0;
  std::vector<std::int64_t> q;  // row-major, all >= 0
  std::int64_t t = 0;

  static QueueState empty(int n);
  std::int64_t operator()(int i, int j) const noexcept { return q[static_cast<std::size_t>(i * n + j)]; }
  FlatVector as_flat() const;
};

struct SlotRecord {
  std::vector<std::int64_t> a;
  std::vector<std::int64_t> s;
  std::vector<std::int64_t> u;
  double weighted_qsum = 0.0;            // sum c_ij Q_ij(t+1)
  std::optional<double> perp_norm;       // ||Q(t)_perp||_c w.r.t. the cone
  std::optional<double> drift_w;         // ||Q(t+1)_perp||_c - ||Q(t)_perp||_c
};

/// Applies one slot of the dynamics to `state` given arrivals and schedule;
/// writes the unused service into `u`. Returns false if an exact invariant
/// (Q >= 0, U in {0,1}, U <= S, <Q(t+1), U> = 0) failed.
bool apply_slot(QueueState& state, std::span<const std::int64_t> a, const Schedule& s,
                std::span<std::int64_t> u);

/// Samples A(t), picks S(t) = MaxWeight(Q(t)) and advances the state.
SlotRecord step(QueueState& state, const ArrivalModel& model, const CostMatrix& c, const MatcherConfig& matcher,
                Rng& arrivals, Rng& ties);

/// Cone-perpendicular c-norm ||x_perp K_c||_c.
double perp_norm(const FlatVector& x, const CostMatrix& c);

/// max(1e5, 20 / eps^2) slots.
std::int64_t default_warmup(double epsilon);

struct DriftSample {
  double perp_norm = 0.0;
  double drift = 0.0;
};

struct RunConfig {
  CostMatrix c;
  ArrivalModel model;
  MatcherConfig matcher{};
  std::int64_t warmup = 0;
  std::int64_t measured = 1'000'000;
  int batch_count = 30;
  std::uint64_t seed = 1;
  /// Cone projections every `perp_stride` measured slots; 0 disables.
  std::int64_t perp_stride = 100;
  bool keep_drift_trace = false;
  /// Optional per-slot hook (measured and warmup slots), called with the
  /// state before the slot and the slot's record.
  std::function<void(const QueueState& before, const SlotRecord&)> observer{};
};

struct RunStats {
  std::int64_t warmup_slots = 0;
  std::int64_t measured_slots = 0;
  int batch_count = 0;
  std::uint64_t seed = 0;
  double epsilon = 0.0;

  Estimate weighted_qsum;        // E[sum c Q]
  Estimate unused_service_rate;  // E[sum U]
  std::array<Estimate, 3> perp_norm_moment{};  // E[||Q_perp||^r], r = 1, 2, 4
  Estimate parallel_norm;                      // E[||Q_par||_c] w.r.t. the cone
  std::int64_t perp_samples = 0;

  double max_abs_drift = 0.0;    // over sampled (t, t+1) pairs
  std::int64_t invariant_violations = 0;
  std::vector<double> departure_rate;  // per queue, sum(S - U) / measured
  std::vector<DriftSample> drift_trace;

  static constexpr std::array<int, 3> kPerpOrders{1, 2, 4};
};

/// Runs warmup + measured slots from the empty state. Deterministic in seed.
RunStats run(const RunConfig& cfg);

struct DriftRow {
  double kappa = 0.0;
  std::int64_t count = 0;
  Estimate mean_drift;
};

struct DriftTable {
  double bound = 0.0;          // n sqrt(c_max) A_max
  double max_abs_drift = 0.0;
  bool bound_holds = false;
  std::vector<DriftRow> rows;
};

/// |drift| is compared against n sqrt(c_max) A_max with a relative slack of
/// 1e-9 for cone-projection round-off.
DriftTable drift_diagnostics(std::span<const DriftSample> trace, const CostMatrix& c, int a_max,
                             std::span<const double> kappa_grid);
DriftTable drift_diagnostics(std::span<const SlotRecord> trace, const CostMatrix& c, int a_max,
                             std::span<const double> kappa_grid);

}  // namespace switchlab
