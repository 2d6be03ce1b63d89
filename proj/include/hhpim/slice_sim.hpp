#pragma once

// Time-slice execution model. Tasks arriving in slice j are buffered and
// processed in slice j+1, so a task never waits longer than 2T. Each slice
// re-derives the per-task time budget from the buffered count minus the
// migration and solver overheads, looks the placement up in the LUT,
// migrates weights, and accounts migration + dynamic + standby energy.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "hhpim/pim_model.hpp"
#include "hhpim/placement_dp.hpp"
#include "hhpim/workload_gen.hpp"

namespace hhpim {

struct SliceConfig {
  double slice_ns = 0;        // 0: derive from peak task time
  int max_inferences = 10;    // per slice, at peak performance
  int slice_count = 50;
  double budget_fraction = 0.01;  // solver share of a slice
  double headroom = 1.05;     // slack over max_inferences peak tasks
};

// Time slice sized so max_inferences peak-speed tasks fit with headroom for
// migration, solver budget and grid quantization.
inline double derive_slice_ns(const CostModel& m, std::int64_t weights,
                              double touches_per_weight, const SliceConfig& cfg) {
  if (cfg.slice_ns > 0) return cfg.slice_ns;
  return cfg.headroom * cfg.max_inferences *
         peak_task_ns(m, weights, touches_per_weight);
}

inline double derive_t_constraint(int n_tasks, double slice_ns, double migration_ns,
                                  double solver_budget_ns) {
  if (n_tasks < 0) throw std::invalid_argument("derive_t_constraint: N < 0");
  if (migration_ns + solver_budget_ns >= slice_ns)
    throw std::runtime_error("derive_t_constraint: overheads exceed the slice");
  if (n_tasks == 0) return kInf;
  return (slice_ns - migration_ns - solver_budget_ns) / n_tasks;
}

struct MigrationPlan {
  // moves[src][dst]: weights moved between space indices of the cost model
  std::vector<std::vector<std::int64_t>> moves;
  double time_ns = 0;
  double energy_pj = 0;

  bool empty() const { return energy_pj == 0 && time_ns == 0; }
};

// Surpluses matched to deficits cheapest-pair first. Move costs are
// separable (source read + destination write), so any complete matching has
// the same totals; the greedy order just keeps the plan deterministic.
inline MigrationPlan plan_migration(const std::vector<std::int64_t>& old_x,
                                    const std::vector<std::int64_t>& new_x,
                                    const CostModel& m) {
  const size_t n = m.spaces.size();
  if (old_x.size() != n || new_x.size() != n)
    throw std::invalid_argument("plan_migration: placement size mismatch");
  std::int64_t sum_old = 0, sum_new = 0;
  for (size_t i = 0; i < n; ++i) {
    if (old_x[i] < 0 || new_x[i] < 0)
      throw std::invalid_argument("plan_migration: negative count");
    sum_old += old_x[i];
    sum_new += new_x[i];
  }
  if (sum_old != sum_new)
    throw std::invalid_argument("plan_migration: count mismatch");

  MigrationPlan plan;
  plan.moves.assign(n, std::vector<std::int64_t>(n, 0));
  std::vector<std::int64_t> surplus(n, 0), deficit(n, 0);
  for (size_t i = 0; i < n; ++i) {
    std::int64_t d = new_x[i] - old_x[i];
    if (d < 0) surplus[i] = -d;
    if (d > 0) deficit[i] = d;
  }

  struct Pair { double cost; size_t src, dst; };
  std::vector<Pair> pairs;
  for (size_t s = 0; s < n; ++s)
    for (size_t d = 0; d < n; ++d)
      if (s != d)
        pairs.push_back({m.spaces[s].move_read_pj + m.spaces[d].move_write_pj, s, d});
  std::sort(pairs.begin(), pairs.end(), [](const Pair& a, const Pair& b) {
    if (a.cost != b.cost) return a.cost < b.cost;
    if (a.src != b.src) return a.src < b.src;
    return a.dst < b.dst;
  });
  for (const auto& pr : pairs) {
    std::int64_t mv = std::min(surplus[pr.src], deficit[pr.dst]);
    if (mv <= 0) continue;
    plan.moves[pr.src][pr.dst] = mv;
    surplus[pr.src] -= mv;
    deficit[pr.dst] -= mv;
    plan.energy_pj += static_cast<double>(mv) * pr.cost;
  }

  // Each cluster's modules serialize their share of the reads and writes;
  // clusters transfer in parallel.
  double busy_ns[2] = {0, 0};
  for (size_t s = 0; s < n; ++s) {
    for (size_t d = 0; d < n; ++d) {
      std::int64_t mv = plan.moves[s][d];
      if (mv == 0) continue;
      busy_ns[static_cast<int>(m.spaces[s].cluster)] +=
          static_cast<double>(mv) * m.spaces[s].move_read_ns /
          m.module_count[static_cast<int>(m.spaces[s].cluster)];
      busy_ns[static_cast<int>(m.spaces[d].cluster)] +=
          static_cast<double>(mv) * m.spaces[d].move_write_ns /
          m.module_count[static_cast<int>(m.spaces[d].cluster)];
    }
  }
  plan.time_ns = m.latency_scale() * std::max(busy_ns[0], busy_ns[1]);
  return plan;
}

struct SliceTrace {
  int slice_idx = 0;
  int arrivals = 0;       // tasks arriving during this slice (run next slice)
  int executed = 0;       // buffered tasks processed this slice
  double t_constraint_ns = 0;
  std::vector<std::int64_t> x;  // chosen placement, weights per space
  double migration_ns = 0;
  double e_migration_pj = 0;
  double e_dynamic_pj = 0;
  double e_static_pj = 0;
  bool feasible = true;        // LUT had a placement within t_constraint
  bool deadline_met = true;    // realized work fit in the slice

  double e_total_pj() const { return e_migration_pj + e_dynamic_pj + e_static_pj; }
};

struct SimResult {
  std::string arch;
  std::string scenario;
  std::string model;
  double slice_ns = 0;
  std::vector<SliceTrace> traces;
  double total_migration_pj = 0;
  double total_dynamic_pj = 0;
  double total_static_pj = 0;
  int deadline_misses = 0;

  double total_pj() const {
    return total_migration_pj + total_dynamic_pj + total_static_pj;
  }
};

// Runs the stream against one architecture. Weights start at the fully
// relaxed placement. An infeasible t_constraint falls back to the peak
// (fastest feasible) placement and records the miss; the run continues.
inline SimResult simulate(const CostModel& m, const ModelProfile& model,
                          const PlacementLut& lut, const TaskStream& stream,
                          const SliceConfig& cfg) {
  SimResult res;
  res.arch = m.arch.name;
  res.scenario = stream.scenario;
  res.model = model.name;
  const double tau = model.touches_per_weight();
  const double T = derive_slice_ns(m, model.param_count, tau, cfg);
  res.slice_ns = T;
  const double solver_ns = cfg.budget_fraction * T;
  const int slices = static_cast<int>(stream.arrivals.size());

  std::vector<std::int64_t> alloc = lut.relaxed_placement();
  int buffered = 0;
  for (int s = 0; s < slices; ++s) {
    SliceTrace tr;
    tr.slice_idx = s;
    tr.arrivals = stream.arrivals[s];
    tr.executed = buffered;

    // pass 1: choose ignoring migration, then re-derive the budget with the
    // actual movement cost and re-check
    double t_c = derive_t_constraint(buffered, T, 0, solver_ns);
    auto r1 = lookup_placement(lut, t_c);
    int chosen_idx = r1.feasible ? r1.t_index : -1;
    MigrationPlan mig;
    if (chosen_idx >= 0) {
      mig = plan_migration(alloc, lut.entries[chosen_idx].x, m);
      double t_c2 = derive_t_constraint(buffered, T, mig.time_ns, solver_ns);
      if (t_c2 < t_c) {
        auto r2 = lookup_placement(lut, t_c2);
        if (r2.feasible) {
          if (r2.t_index != chosen_idx) {
            chosen_idx = r2.t_index;
            mig = plan_migration(alloc, lut.entries[chosen_idx].x, m);
          }
          t_c = t_c2;
        } else {
          chosen_idx = -1;
        }
      }
    }
    if (chosen_idx < 0) {
      // performance unattainable: run at peak and flag the miss
      tr.feasible = false;
      chosen_idx = lut.first_feasible();
      if (chosen_idx < 0)
        throw std::runtime_error("simulate: LUT has no feasible placement");
      mig = plan_migration(alloc, lut.entries[chosen_idx].x, m);
      t_c = derive_t_constraint(buffered, T, mig.time_ns, solver_ns);
    }
    tr.t_constraint_ns = t_c;
    tr.x = lut.entries[chosen_idx].x;

    tr.migration_ns = mig.time_ns;
    tr.e_migration_pj = mig.energy_pj;
    tr.e_dynamic_pj = buffered * task_dynamic_pj(tr.x, m, tau);
    tr.e_static_pj = static_power_mw(tr.x, m) * T;

    double task_ns = makespan_ns(tr.x, m, tau);
    tr.deadline_met = tr.feasible &&
                      mig.time_ns + solver_ns + buffered * task_ns <= T * (1 + 1e-9);
    if (!tr.deadline_met) ++res.deadline_misses;

    res.total_migration_pj += tr.e_migration_pj;
    res.total_dynamic_pj += tr.e_dynamic_pj;
    res.total_static_pj += tr.e_static_pj;

    alloc = tr.x;
    buffered = tr.arrivals;
    res.traces.push_back(std::move(tr));
  }
  return res;
}

// ---------------------------------------------------------------------------
// Architecture comparison.

struct ComparisonCell {
  std::string arch;
  std::string scenario;
  double total_pj = 0;
  int deadline_misses = 0;
};

struct ComparisonResult {
  std::string model;
  double slice_ns = 0;
  std::vector<ComparisonCell> cells;        // arch-major, scenario-minor
  std::vector<SimResult> runs;

  double total_of(const std::string& arch, const std::string& scenario) const {
    for (const auto& c : cells)
      if (c.arch == arch && c.scenario == scenario) return c.total_pj;
    throw std::out_of_range("no cell " + arch + "/" + scenario);
  }
};

inline double energy_savings(double e_test, double e_ref) {
  return 1.0 - e_test / e_ref;
}

// Simulates the same streams on every architecture. All runs share one slice
// length, sized for the slowest architecture in the set.
inline ComparisonResult compare_architectures(
    const std::vector<CostModel>& models_of_archs, const ModelProfile& model,
    const std::vector<TaskStream>& streams, SliceConfig cfg,
    const Resolution& res = default_resolution()) {
  if (models_of_archs.empty()) throw std::invalid_argument("compare: no architectures");
  const double tau = model.touches_per_weight();
  if (cfg.slice_ns <= 0) {
    double t = 0;
    for (const auto& m : models_of_archs)
      t = std::max(t, derive_slice_ns(m, model.param_count, tau, cfg));
    cfg.slice_ns = t;
  }
  ComparisonResult out;
  out.model = model.name;
  out.slice_ns = cfg.slice_ns;
  for (const auto& m : models_of_archs) {
    PlacementProblem prob{&m, model.param_count, tau, cfg.slice_ns};
    PlacementLut lut = build_placement_lut(prob, res);
    for (const auto& st : streams) {
      SimResult r = simulate(m, model, lut, st, cfg);
      out.cells.push_back({r.arch, r.scenario, r.total_pj(), r.deadline_misses});
      out.runs.push_back(std::move(r));
    }
  }
  return out;
}

}  // namespace hhpim
