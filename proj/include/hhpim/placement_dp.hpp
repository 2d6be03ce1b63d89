#pragma once

// Bottom-up DP for the weight-placement problem: minimize per-task energy
// subject to a per-cluster serial-time budget and an exact total count.
// Per-cluster tables are combined across the HP/LP split (clusters execute
// in parallel, memories within a cluster serialize), producing a lookup
// table from quantized t_constraint to a placement vector.
//
// Production LUTs place weights in equal-size blocks (the DP's unit) on a
// rounded-up time grid; both roundings are conservative on latency and
// lookups round down. Because standby power is a per-bank step cost the
// linear DP objective cannot express, each grid point additionally
// considers gated single-space and space-pair placements and keeps
// whichever candidate draws the least average power at that budget.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <future>
#include <limits>
#include <memory>
#include <numeric>
#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

#include "hhpim/config.hpp"
#include "hhpim/pim_model.hpp"

namespace hhpim {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

struct DpItem {
  int t_units = 1;             // quantized service time per placed unit
  double energy_pj = 0;        // energy per placed unit
  std::int64_t max_count = std::numeric_limits<std::int64_t>::max();
};

struct TimeGrid {
  double unit_ns = 1.0;
  int steps = 64;              // t index range is 0..steps
  std::int64_t block_weights = 1;  // weights per DP placement unit
  double budget_fraction = 0.01;
};

// dp[i][t][k]: minimum energy to place exactly k units in the first i items
// with serial time at most t units. count[i][t][k] is the number of copies
// of item i along the optimal path (the path trace for reconstruction).
class DpTable {
 public:
  DpTable() = default;
  DpTable(std::vector<DpItem> items, std::int64_t max_count, int steps)
      : items_(std::move(items)),
        n_(static_cast<int>(items_.size())),
        steps_(steps),
        max_count_(max_count),
        t_stride_(static_cast<std::size_t>(max_count + 1)),
        i_stride_(static_cast<std::size_t>(steps + 1) * t_stride_),
        dp_(std::make_unique_for_overwrite<double[]>(n_ * i_stride_)),
        count_(std::make_unique_for_overwrite<std::int32_t[]>(n_ * i_stride_)) {}

  int n() const { return n_; }
  int steps() const { return steps_; }
  std::int64_t max_count() const { return max_count_; }
  const std::vector<DpItem>& items() const { return items_; }

  // i in 1..n; i = 0 is the implicit base layer.
  double at(int i, int t, std::int64_t k) const {
    if (i == 0) return k == 0 ? 0.0 : kInf;
    return dp_[index(i, t, k)];
  }
  std::int32_t count_at(int i, int t, std::int64_t k) const {
    if (i == 0) return 0;
    return count_[index(i, t, k)];
  }

  double* layer_row(int i, int t) { return dp_.get() + index(i, t, 0); }
  std::int32_t* count_row(int i, int t) { return count_.get() + index(i, t, 0); }
  const double* layer_row(int i, int t) const { return dp_.get() + index(i, t, 0); }
  const std::int32_t* count_row(int i, int t) const {
    return count_.get() + index(i, t, 0);
  }

  // Walks the count trace back to the placement vector at (n, t, k).
  void reconstruct_into(int t, std::int64_t k, std::span<std::int64_t> x) const {
    if (!(at(n_, t, k) < kInf))
      throw std::logic_error("reconstruct: infeasible cell");
    for (int i = n_; i >= 1; --i) {
      std::int32_t c = count_at(i, t, k);
      x[i - 1] = c;
      t -= c * items_[i - 1].t_units;
      k -= c;
    }
    if (k != 0 || t < 0) throw std::logic_error("reconstruct: corrupt path trace");
  }

  std::vector<std::int64_t> reconstruct(int t, std::int64_t k) const {
    std::vector<std::int64_t> x(n_, 0);
    reconstruct_into(t, k, x);
    return x;
  }

 private:
  std::size_t index(int i, int t, std::int64_t k) const {
    return static_cast<std::size_t>(i - 1) * i_stride_ +
           static_cast<std::size_t>(t) * t_stride_ + static_cast<std::size_t>(k);
  }

  std::vector<DpItem> items_;
  int n_ = 0;
  int steps_ = 0;
  std::int64_t max_count_ = 0;
  std::size_t t_stride_ = 0;
  std::size_t i_stride_ = 0;
  std::unique_ptr<double[]> dp_;
  std::unique_ptr<std::int32_t[]> count_;
};

// Fills the table bottom-up. A take step is valid whenever one more unit of
// item i fits the remaining time (and its capacity); ties prefer the skip
// branch so reconstruction lands in the lowest-index item. Every cell is
// written, so the backing arrays start uninitialized.
inline DpTable build_dp_table(std::vector<DpItem> items, std::int64_t total_count,
                              int steps) {
  if (total_count < 0) throw std::invalid_argument("build_dp_table: K < 0");
  if (steps < 0) throw std::invalid_argument("build_dp_table: negative grid");
  if (items.empty()) throw std::invalid_argument("build_dp_table: no items");
  for (const auto& it : items) {
    if (it.t_units < 1) throw std::invalid_argument("build_dp_table: t_units < 1");
    if (it.max_count < 0) throw std::invalid_argument("build_dp_table: negative capacity");
  }
  if (static_cast<double>(steps + 1) * static_cast<double>(total_count + 1) *
          static_cast<double>(items.size()) > 4e9)
    throw std::invalid_argument("build_dp_table: grid overflow");

  DpTable table(std::move(items), total_count, steps);
  const auto& its = table.items();
  const int n = table.n();
  const std::int64_t K = total_count;
  for (int i = 1; i <= n; ++i) {
    const int ti = its[i - 1].t_units;
    const double ei = its[i - 1].energy_pj;
    const std::int64_t cap = its[i - 1].max_count;
    for (int t = 0; t <= steps; ++t) {
      double* row = table.layer_row(i, t);
      std::int32_t* cnt = table.count_row(i, t);
      const double* prev = i > 1 ? table.layer_row(i - 1, t) : nullptr;
      const bool can_take = ti <= t;
      const double* back = can_take ? table.layer_row(i, t - ti) : nullptr;
      const std::int32_t* back_cnt = can_take ? table.count_row(i, t - ti) : nullptr;
      row[0] = 0.0;
      cnt[0] = 0;
      for (std::int64_t k = 1; k <= K; ++k) {
        double best = prev ? prev[k] : kInf;  // base layer: only k == 0 is free
        std::int32_t c = 0;
        if (can_take && back_cnt[k - 1] < cap) {
          double take = back[k - 1] + ei;
          if (take < best) {
            best = take;
            c = back_cnt[k - 1] + 1;
          }
        }
        row[k] = best;
        cnt[k] = c;
      }
    }
  }
  return table;
}

// ---------------------------------------------------------------------------
// Cross-cluster combination and the allocation LUT.

struct LutEntry {
  bool feasible = false;
  double e_task_pj = kInf;     // minimized objective at this t index
  std::int64_t k_hp = 0, k_lp = 0;  // DP units per cluster
  std::vector<std::int64_t> x;      // per DP item, HP items then LP items
};

struct AllocationLut {
  TimeGrid grid;
  std::int64_t total_count = 0;  // K in DP units
  std::vector<LutEntry> entries; // size steps + 1
  int first_feasible = -1;       // -1: nowhere feasible

  int steps() const { return static_cast<int>(entries.size()) - 1; }
};

// Scans the (k_hp, K - k_hp) splits per t index. A split is feasible only if
// both cluster times fit within t (clusters run in parallel). Ties keep the
// smallest k_hp, i.e. prefer loading the low-power cluster.
inline AllocationLut combine_clusters(const DpTable& hp, const DpTable& lp,
                                      std::int64_t total_count) {
  if (hp.steps() != lp.steps())
    throw std::invalid_argument("combine_clusters: mismatched grids");
  if (hp.max_count() < total_count || lp.max_count() < total_count)
    throw std::invalid_argument("combine_clusters: tables too small for K");
  AllocationLut lut;
  lut.total_count = total_count;
  lut.entries.resize(hp.steps() + 1);
  for (int t = 0; t <= hp.steps(); ++t) {
    const double* hrow = hp.layer_row(hp.n(), t);
    const double* lrow = lp.layer_row(lp.n(), t);
    double best = kInf;
    std::int64_t best_khp = -1;
    for (std::int64_t k = 0; k <= total_count; ++k) {
      double e = hrow[k] + lrow[total_count - k];
      if (e < best) {
        best = e;
        best_khp = k;
      }
    }
    LutEntry& ent = lut.entries[t];
    if (best_khp >= 0 && best < kInf) {
      ent.feasible = true;
      ent.e_task_pj = best;
      ent.k_hp = best_khp;
      ent.k_lp = total_count - best_khp;
      ent.x.resize(hp.n() + lp.n());
      hp.reconstruct_into(t, ent.k_hp, std::span(ent.x).subspan(0, hp.n()));
      lp.reconstruct_into(t, ent.k_lp, std::span(ent.x).subspan(hp.n(), lp.n()));
      if (lut.first_feasible < 0) lut.first_feasible = t;
    }
  }
  return lut;
}

// Single-cluster architectures: the whole count sits in the one table.
inline AllocationLut single_cluster_lut(const DpTable& table, std::int64_t total_count,
                                        bool is_hp_cluster) {
  if (table.max_count() < total_count)
    throw std::invalid_argument("single_cluster_lut: table too small for K");
  AllocationLut lut;
  lut.total_count = total_count;
  lut.entries.resize(table.steps() + 1);
  for (int t = 0; t <= table.steps(); ++t) {
    double e = table.at(table.n(), t, total_count);
    LutEntry& ent = lut.entries[t];
    if (e < kInf) {
      ent.feasible = true;
      ent.e_task_pj = e;
      ent.k_hp = is_hp_cluster ? total_count : 0;
      ent.k_lp = is_hp_cluster ? 0 : total_count;
      ent.x = table.reconstruct(t, total_count);
      if (lut.first_feasible < 0) lut.first_feasible = t;
    }
  }
  return lut;
}

// ---------------------------------------------------------------------------
// Exhaustive oracle. Enumerates every nonnegative placement vector summing to
// K on the same quantized costs; feasibility is per-cluster serial time.

struct DpProblem {
  std::vector<DpItem> items;
  std::vector<int> cluster;  // per item: 0 = HP, 1 = LP
  std::int64_t total_count = 0;
  int steps = 0;
};

struct OracleResult {
  double e_task_pj = 0;
  std::vector<std::int64_t> x;
};

namespace detail {

inline double composition_count(std::int64_t k, int n) {
  double c = 1;  // C(k + n - 1, n - 1)
  for (int i = 1; i <= n - 1; ++i) c = c * (static_cast<double>(k) + i) / i;
  return c;
}

inline void enumerate_rec(const DpProblem& p, int idx, std::int64_t left,
                          std::vector<std::int64_t>& x, int t_limit,
                          double& best, std::vector<std::int64_t>& best_x) {
  if (idx == static_cast<int>(p.items.size()) - 1) {
    if (left > p.items[idx].max_count) return;
    x[idx] = left;
    std::int64_t time[2] = {0, 0};
    double e = 0;
    for (size_t i = 0; i < p.items.size(); ++i) {
      time[p.cluster[i]] += static_cast<std::int64_t>(p.items[i].t_units) * x[i];
      e += p.items[i].energy_pj * static_cast<double>(x[i]);
    }
    if (time[0] <= t_limit && time[1] <= t_limit && e < best) {
      best = e;
      best_x = x;
    }
    return;
  }
  std::int64_t hi = std::min<std::int64_t>(left, p.items[idx].max_count);
  for (std::int64_t c = 0; c <= hi; ++c) {
    x[idx] = c;
    enumerate_rec(p, idx + 1, left - c, x, t_limit, best, best_x);
  }
}

}  // namespace detail

inline std::optional<OracleResult> brute_force_optimal(const DpProblem& p,
                                                       int t_constraint_units) {
  if (p.items.empty() || p.items.size() != p.cluster.size())
    throw std::invalid_argument("brute_force_optimal: bad problem");
  if (detail::composition_count(p.total_count, static_cast<int>(p.items.size())) > 1e7)
    throw std::invalid_argument("brute_force_optimal: instance too large");
  double best = kInf;
  std::vector<std::int64_t> x(p.items.size(), 0), best_x;
  detail::enumerate_rec(p, 0, p.total_count, x, t_constraint_units, best, best_x);
  if (!(best < kInf)) return std::nullopt;
  return OracleResult{best, best_x};
}

// ---------------------------------------------------------------------------
// Lookup on the DP-level LUT.

struct LookupResult {
  bool feasible = false;
  int t_index = 0;
  const LutEntry* entry = nullptr;  // set when feasible
};

// Rounds the requested constraint down to the grid (never exceeds the true
// budget); beyond the last grid point clamps to the fully relaxed entry.
inline LookupResult lookup_allocation(const AllocationLut& lut, double t_constraint_ns) {
  int idx;
  if (std::isinf(t_constraint_ns) || t_constraint_ns >= lut.grid.unit_ns * lut.steps()) {
    idx = lut.steps();
  } else if (t_constraint_ns < 0) {
    idx = 0;
  } else {
    idx = static_cast<int>(std::floor(t_constraint_ns / lut.grid.unit_ns));
    idx = std::clamp(idx, 0, lut.steps());
  }
  const LutEntry& e = lut.entries[idx];
  return LookupResult{e.feasible, idx, e.feasible ? &e : nullptr};
}

// ---------------------------------------------------------------------------
// Resolution calibration. The grid request names the number of placement
// blocks and the time sub-steps per fastest block; the builder derives the
// concrete unit and step count from the actual space times.

struct Resolution {
  std::int64_t blocks = 96;
  int substeps = 12;
  double budget_fraction = 0.01;
  bool budget_met = true;  // false: floors were forced despite the budget
};

inline Resolution default_resolution() { return Resolution{}; }

namespace detail {

// Worst-case model constants for predicting LUT-build work from a block count.
inline constexpr double kTimeRatioBound = 2.1;   // max/min per-weight time, defaults
inline constexpr double kWorkFactor = 6.0;       // item layers + combine + selection
inline constexpr std::int64_t kResolutionBlockCap = 512;
inline constexpr std::int64_t kResolutionBlockFloor = 16;

inline double predicted_cells(std::int64_t blocks, int substeps) {
  double t_units_max = std::ceil(substeps * kTimeRatioBound);
  double steps = static_cast<double>(blocks) * t_units_max;
  return kWorkFactor * (steps + 1) * (static_cast<double>(blocks) + 1);
}

}  // namespace detail

// Measures the DP fill rate on this machine (ns per cell) on a grid shaped
// like a production build, memoized.
inline double measured_cell_ns() {
  static const double rate = [] {
    std::vector<DpItem> items{{13, 2.0, 1 << 30}, {25, 1.0, 1 << 30}};
    const std::int64_t K = 150;
    const int steps = 150 * 25;
    double best = kInf;
    for (int rep = 0; rep < 3; ++rep) {
      auto t0 = std::chrono::steady_clock::now();
      auto tb = build_dp_table(items, K, steps);
      auto t1 = std::chrono::steady_clock::now();
      if (tb.at(2, steps, 0) != 0.0) return 1.0;  // keep the build alive
      double cells = 2.0 * (steps + 1) * static_cast<double>(K + 1);
      best = std::min(best,
                      std::chrono::duration<double, std::nano>(t1 - t0).count() / cells);
    }
    return std::max(best, 0.05);
  }();
  return rate;
}

// Picks the largest resolution whose predicted LUT-build work fits within
// budget_fraction of one time slice, never dropping below the floor.
inline Resolution calibrate_resolution(std::int64_t total_weights, double slice_ns,
                                       double budget_fraction,
                                       double cell_ns = measured_cell_ns()) {
  if (total_weights <= 0 || slice_ns <= 0)
    throw std::invalid_argument("calibrate_resolution: K and T must be positive");
  if (budget_fraction <= 0 || budget_fraction > 1)
    throw std::invalid_argument("calibrate_resolution: bad budget fraction");
  Resolution r;
  r.budget_fraction = budget_fraction;
  double budget_cells = budget_fraction * slice_ns / (1.3 * cell_ns);
  std::int64_t b = static_cast<std::int64_t>(
      std::sqrt(std::max(0.0, budget_cells) /
                (detail::kWorkFactor *
                 std::ceil(r.substeps * detail::kTimeRatioBound))));
  std::int64_t hi = std::min<std::int64_t>(total_weights, detail::kResolutionBlockCap);
  r.blocks = std::clamp<std::int64_t>(b, detail::kResolutionBlockFloor, hi);
  r.budget_met = detail::predicted_cells(r.blocks, r.substeps) * cell_ns <=
                 budget_fraction * slice_ns;
  return r;
}

// ---------------------------------------------------------------------------
// Production LUT: task-level placement of K weights over the cost model's
// storage spaces under the per-task time budget.

struct PlacementProblem {
  const CostModel* model = nullptr;
  std::int64_t total_weights = 0;
  double touches_per_weight = 1.0;  // PIM MACs per resident weight per task
  double slice_ns = 0;              // slice length (standby accounting window)
};

// Effective per-weight costs for one task under the leakage-inclusive
// objective: every touch pays a read plus a MAC, and a resident weight owns
// its slot's leakage for the slice. Under the default tables this ranks
// LP-MRAM cheapest, matching the fully relaxed placement.
inline void effective_costs(const PlacementProblem& p, std::vector<double>& t_eff_ns,
                            std::vector<double>& e_eff_pj) {
  const CostModel& m = *p.model;
  t_eff_ns.clear();
  e_eff_pj.clear();
  for (const auto& s : m.spaces) {
    t_eff_ns.push_back(p.touches_per_weight * m.latency_scale() * s.t_per_weight_ns);
    e_eff_pj.push_back(p.touches_per_weight * s.e_per_weight_pj +
                       s.slot_leak_mw * p.slice_ns);
  }
}

struct PlacementEntry {
  bool feasible = false;
  double e_task_pj = kInf;  // slice energy at the implied saturating task rate
  std::vector<std::int64_t> x;  // weights per space (cost-model order)
};

struct PlacementLut {
  TimeGrid grid;
  std::vector<SpaceId> space_ids;
  std::int64_t total_weights = 0;
  std::vector<PlacementEntry> entries;  // per t index
  AllocationLut dp_lut;                 // the underlying block-level DP result

  int steps() const { return static_cast<int>(entries.size()) - 1; }
  int first_feasible() const {
    for (size_t t = 0; t < entries.size(); ++t)
      if (entries[t].feasible) return static_cast<int>(t);
    return -1;
  }
  bool feasible_at(int t) const { return entries[t].feasible; }
  double e_task_pj(int t) const { return entries[t].e_task_pj; }
  const std::vector<std::int64_t>& placement(int t) const { return entries[t].x; }
  const std::vector<std::int64_t>& relaxed_placement() const {
    return entries.back().x;
  }
};

struct PlacementLookup {
  bool feasible = false;
  int t_index = 0;
  const PlacementEntry* entry = nullptr;
};

inline PlacementLookup lookup_placement(const PlacementLut& lut,
                                        double t_constraint_ns) {
  int idx;
  if (std::isinf(t_constraint_ns) ||
      t_constraint_ns >= lut.grid.unit_ns * lut.steps()) {
    idx = lut.steps();
  } else if (t_constraint_ns < 0) {
    idx = 0;
  } else {
    idx = static_cast<int>(std::floor(t_constraint_ns / lut.grid.unit_ns));
    idx = std::clamp(idx, 0, lut.steps());
  }
  const PlacementEntry& e = lut.entries[idx];
  return PlacementLookup{e.feasible, idx, e.feasible ? &e : nullptr};
}

// Realized (unquantized) per-cluster serial time of a placement, per task.
inline double makespan_ns(const std::vector<std::int64_t>& x_weights,
                          const CostModel& m, double touches_per_weight) {
  double busy[2] = {0, 0};
  for (size_t i = 0; i < m.spaces.size(); ++i)
    busy[static_cast<int>(m.spaces[i].cluster)] +=
        m.spaces[i].t_per_weight_ns * static_cast<double>(x_weights[i]);
  return touches_per_weight * m.latency_scale() * std::max(busy[0], busy[1]);
}

// Per-task dynamic (access + MAC) energy of a placement.
inline double task_dynamic_pj(const std::vector<std::int64_t>& x_weights,
                              const CostModel& m, double touches_per_weight) {
  double e = 0;
  for (size_t i = 0; i < m.spaces.size(); ++i)
    e += m.spaces[i].e_per_weight_pj * static_cast<double>(x_weights[i]);
  return touches_per_weight * e;
}

// Average power drawn when tasks arrive as fast as the budget allows: the
// exact figure the per-slice accounting integrates, including bank gating.
inline double placement_score_mw(const std::vector<std::int64_t>& x,
                                 const CostModel& m, double touches_per_weight,
                                 double t_budget_ns) {
  return task_dynamic_pj(x, m, touches_per_weight) / t_budget_ns +
         static_power_mw(x, m);
}

namespace detail {

// Cheapest-dynamic placement of all K weights on exactly the pair (a, b),
// if the pair can meet the budget. Linear objective over one free variable,
// so the optimum sits at a boundary of the feasible interval.
inline std::optional<std::vector<std::int64_t>> pair_placement(
    const CostModel& m, const std::vector<double>& t_eff, size_t a, size_t b,
    std::int64_t K, double t_ns) {
  const auto& sa = m.spaces[a];
  const auto& sb = m.spaces[b];
  double lo = 0, hi = static_cast<double>(K);  // bounds on x_a
  hi = std::min(hi, static_cast<double>(sa.capacity_weights));
  lo = std::max(lo, static_cast<double>(K - sb.capacity_weights));
  if (sa.cluster == sb.cluster) {
    // serialized: t_a x_a + t_b (K - x_a) <= t
    double slack = t_ns - t_eff[b] * static_cast<double>(K);
    double diff = t_eff[a] - t_eff[b];
    if (diff > 0)
      hi = std::min(hi, slack / diff);
    else if (diff < 0)
      lo = std::max(lo, slack / diff);
    else if (slack < 0)
      return std::nullopt;
  } else {
    hi = std::min(hi, t_ns / t_eff[a]);
    lo = std::max(lo, static_cast<double>(K) - t_ns / t_eff[b]);
  }
  std::int64_t ilo = static_cast<std::int64_t>(std::ceil(lo));
  std::int64_t ihi = static_cast<std::int64_t>(std::floor(hi));
  if (ilo > ihi) return std::nullopt;
  std::int64_t xa = m.spaces[a].e_per_weight_pj <= m.spaces[b].e_per_weight_pj
                        ? ihi
                        : ilo;
  std::vector<std::int64_t> x(m.spaces.size(), 0);
  x[a] = xa;
  x[b] = K - xa;
  return x;
}

inline bool fits_budget(const std::vector<std::int64_t>& x, const CostModel& m,
                        double tau, double t_ns) {
  return makespan_ns(x, m, tau) <= t_ns * (1 + 1e-12);
}

}  // namespace detail

inline PlacementLut build_placement_lut(const PlacementProblem& p,
                                        const Resolution& res) {
  const CostModel& m = *p.model;
  const size_t n = m.spaces.size();
  if (p.total_weights <= 0)
    throw std::invalid_argument("build_placement_lut: no weights");
  if (p.total_weights > m.total_capacity_weights())
    throw std::invalid_argument("build_placement_lut: " + m.arch.name +
                                " cannot hold " + std::to_string(p.total_weights) +
                                " weights");
  const double tau = p.touches_per_weight;
  std::vector<double> t_eff(n), e_dyn(n);
  for (size_t i = 0; i < n; ++i) {
    t_eff[i] = tau * m.latency_scale() * m.spaces[i].t_per_weight_ns;
    e_dyn[i] = tau * m.spaces[i].e_per_weight_pj;
  }

  PlacementLut out;
  out.total_weights = p.total_weights;
  for (const auto& s : m.spaces) out.space_ids.push_back(s.id);

  // block granularity; refine if capacity rounding eats the slack
  std::int64_t blocks_target = std::min<std::int64_t>(
      std::max<std::int64_t>(1, res.blocks), p.total_weights);
  std::int64_t g, B;
  for (int attempt = 0;; ++attempt) {
    g = (p.total_weights + blocks_target - 1) / blocks_target;
    B = (p.total_weights + g - 1) / g;
    std::int64_t cap_blocks_sum = 0;
    for (const auto& s : m.spaces) cap_blocks_sum += s.capacity_weights / g;
    if (cap_blocks_sum >= B) break;
    if (attempt >= 4)
      throw std::invalid_argument("build_placement_lut: capacities too tight");
    blocks_target = std::min(p.total_weights, blocks_target * 2);
  }

  double t_min = *std::min_element(t_eff.begin(), t_eff.end());
  int substeps = std::max(1, res.substeps);
  double unit = 0;
  int steps = 0;
  std::vector<DpItem> hp_items, lp_items;
  std::vector<int> hp_pos, lp_pos;
  while (true) {
    unit = static_cast<double>(g) * t_min / substeps;
    hp_items.clear(); lp_items.clear(); hp_pos.clear(); lp_pos.clear();
    int t_units_max = 1;
    for (size_t i = 0; i < n; ++i) {
      DpItem it;
      it.t_units =
          static_cast<int>(std::ceil(static_cast<double>(g) * t_eff[i] / unit));
      it.energy_pj = static_cast<double>(g) * e_dyn[i];
      it.max_count = m.spaces[i].capacity_weights / g;
      t_units_max = std::max(t_units_max, it.t_units);
      if (m.spaces[i].cluster == ClusterKind::HP) {
        hp_items.push_back(it);
        hp_pos.push_back(static_cast<int>(i));
      } else {
        lp_items.push_back(it);
        lp_pos.push_back(static_cast<int>(i));
      }
    }
    steps = static_cast<int>(B * t_units_max);
    if (steps >= 64) break;
    substeps *= 2;  // tiny instances: refine until the 64-step floor holds
  }
  out.grid = TimeGrid{unit, steps, g, res.budget_fraction};

  // the Eq.-style DP over blocks, per cluster, clusters in parallel
  if (!hp_items.empty() && !lp_items.empty()) {
    auto lp_future = std::async(std::launch::async, [&] {
      return build_dp_table(lp_items, B, steps);
    });
    DpTable hp_table = build_dp_table(hp_items, B, steps);
    DpTable lp_table = lp_future.get();
    out.dp_lut = combine_clusters(hp_table, lp_table, B);
  } else if (!hp_items.empty()) {
    out.dp_lut = single_cluster_lut(build_dp_table(hp_items, B, steps), B, true);
  } else {
    out.dp_lut = single_cluster_lut(build_dp_table(lp_items, B, steps), B, false);
  }
  out.dp_lut.grid = out.grid;

  // item order -> space order, blocks -> weights; the one partial block is
  // trimmed from the highest-index occupied space
  std::vector<int> item_of_space(n);
  for (size_t j = 0; j < hp_pos.size(); ++j) item_of_space[hp_pos[j]] = static_cast<int>(j);
  for (size_t j = 0; j < lp_pos.size(); ++j)
    item_of_space[lp_pos[j]] = static_cast<int>(hp_pos.size() + j);
  const std::int64_t excess = B * g - p.total_weights;
  auto dp_weights = [&](const LutEntry& e) {
    std::vector<std::int64_t> w(n, 0);
    for (size_t i = 0; i < n; ++i) w[i] = e.x[item_of_space[i]] * g;
    for (size_t i = n; i-- > 0;) {
      if (w[i] > 0) {
        w[i] -= excess;
        break;
      }
    }
    return w;
  };

  // per grid point: choose the least average power among the DP placement,
  // gated single spaces, gated space pairs, and the previous point's choice
  out.entries.resize(steps + 1);
  std::vector<std::int64_t> prev;
  double prev_score = kInf;
  for (int t = 0; t <= steps; ++t) {
    const double t_ns = t * unit;
    PlacementEntry& ent = out.entries[t];
    std::vector<std::int64_t> best;
    double best_score = kInf;
    auto consider = [&](std::vector<std::int64_t>&& x) {
      double s = placement_score_mw(x, m, tau, t_ns);
      if (s < best_score) {
        best_score = s;
        best = std::move(x);
      }
    };
    if (!prev.empty()) {
      best = prev;
      best_score = placement_score_mw(best, m, tau, t_ns);
    }
    if (out.dp_lut.entries[t].feasible) consider(dp_weights(out.dp_lut.entries[t]));
    for (size_t i = 0; i < n; ++i) {
      if (m.spaces[i].capacity_weights < p.total_weights) continue;
      if (t_eff[i] * static_cast<double>(p.total_weights) > t_ns) continue;
      std::vector<std::int64_t> x(n, 0);
      x[i] = p.total_weights;
      consider(std::move(x));
    }
    for (size_t a = 0; a < n; ++a)
      for (size_t b = a + 1; b < n; ++b) {
        auto x = detail::pair_placement(m, t_eff, a, b, p.total_weights, t_ns);
        if (x && detail::fits_budget(*x, m, tau, t_ns)) consider(std::move(*x));
      }
    if (best.empty()) continue;  // infeasible prefix
    ent.feasible = true;
    ent.x = best;
    ent.e_task_pj = best_score * p.slice_ns;  // slice energy at saturating load
    prev = std::move(best);
    prev_score = best_score;
  }
  (void)prev_score;
  if (out.first_feasible() < 0)
    throw std::invalid_argument("build_placement_lut: no feasible placement");
  return out;
}

// Smallest per-task makespan the architecture can reach for K weights
// (capacity-aware, fastest spaces first). Used to size default time slices.
inline double peak_task_ns(const CostModel& m, std::int64_t total_weights,
                           double touches_per_weight) {
  if (total_weights > m.total_capacity_weights())
    throw std::invalid_argument("peak_task_ns: " + m.arch.name + " cannot hold " +
                                std::to_string(total_weights) + " weights");
  auto fits = [&](double t_ns) {
    double raw_budget = t_ns / (touches_per_weight * m.latency_scale());
    std::int64_t served = 0;
    for (int c = 0; c < 2; ++c) {
      std::vector<const StorageSpace*> sp;
      for (const auto& s : m.spaces)
        if (static_cast<int>(s.cluster) == c) sp.push_back(&s);
      std::sort(sp.begin(), sp.end(), [](auto* a, auto* b) {
        return a->t_per_weight_ns < b->t_per_weight_ns;
      });
      double left = raw_budget;
      for (const auto* s : sp) {
        std::int64_t can = static_cast<std::int64_t>(left / s->t_per_weight_ns);
        can = std::min(can, s->capacity_weights);
        served += can;
        left -= static_cast<double>(can) * s->t_per_weight_ns;
      }
    }
    return served >= total_weights;
  };
  double lo = 0, hi = 1.0;
  while (!fits(hi)) hi *= 2;
  for (int it = 0; it < 200; ++it) {
    double mid = 0.5 * (lo + hi);
    (fits(mid) ? hi : lo) = mid;
  }
  return hi;
}

}  // namespace hhpim
