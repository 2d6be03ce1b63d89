#pragma once

// Experiment orchestration: LUT sweeps, architecture comparison runs and the
// randomized verification harness. The CLI is a thin wrapper over these.

#include <filesystem>
#include <future>
#include <map>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"

#include "hhpim/config.hpp"
#include "hhpim/pim_model.hpp"
#include "hhpim/placement_dp.hpp"
#include "hhpim/report.hpp"
#include "hhpim/slice_sim.hpp"
#include "hhpim/workload_gen.hpp"

namespace hhpim {

struct ExperimentSpec {
  std::vector<ArchitectureSpec> archs;
  ModelProfile model;
  std::vector<TaskStream> streams;
  SliceConfig slice_cfg;
  Resolution resolution;
  std::uint64_t seed = 42;
  std::filesystem::path out_dir = "out";
};

inline std::string canonical(const ArchitectureSpec& a) {
  std::ostringstream o;
  o << "arch " << a.name << " wb=" << a.weight_bytes
    << " scale=" << fmt_g(a.latency_scale, 12) << "\n";
  for (const auto& c : a.clusters) {
    o << (c.name == ClusterKind::HP ? "hp" : "lp") << " vdd=" << fmt_g(c.vdd_volts)
      << " mods=" << c.module_count << " pe=" << fmt_g(c.pe.op_latency_ns) << ","
      << fmt_g(c.pe.dynamic_mw) << "," << fmt_g(c.pe.static_mw) << "\n";
    for (const auto* mem : {&c.mram, &c.sram}) {
      if (!*mem) continue;
      const MemoryTech& t = **mem;
      o << (t.kind == MemKind::MRAM ? " mram " : " sram ") << fmt_g(t.read_latency_ns)
        << "," << fmt_g(t.write_latency_ns) << "," << fmt_g(t.dynamic_read_mw) << ","
        << fmt_g(t.dynamic_write_mw) << "," << fmt_g(t.static_mw) << ","
        << t.capacity_bytes << "\n";
    }
  }
  for (SpaceId id : a.available_spaces) o << to_string(id) << " ";
  o << "\n";
  return o.str();
}

inline std::string config_hash(const ExperimentSpec& spec, double derived_slice_ns) {
  std::ostringstream o;
  for (const auto& a : spec.archs) o << canonical(a);
  o << "model " << spec.model.name << " " << spec.model.param_count << " "
    << spec.model.mac_count << " " << fmt_g(spec.model.pim_op_fraction, 12) << "\n";
  for (const auto& s : spec.streams) {
    o << "stream " << s.scenario << " " << s.seed << " " << s.max_per_slice << ":";
    for (int a : s.arrivals) o << " " << a;
    o << "\n";
  }
  o << "slice " << fmt_g(derived_slice_ns, 12) << " " << spec.slice_cfg.max_inferences
    << " " << spec.slice_cfg.slice_count << " "
    << fmt_g(spec.slice_cfg.budget_fraction, 12) << " "
    << fmt_g(spec.slice_cfg.headroom, 12) << "\n";
  o << "resolution " << spec.resolution.blocks << " " << spec.resolution.substeps
    << " " << fmt_g(spec.resolution.budget_fraction, 12) << "\n";
  o << "seed " << spec.seed << "\n";
  return hash_hex(fnv1a64(o.str()));
}

// ---------------------------------------------------------------------------
// LUT sweep (memory utilization and E_task across t_constraint).

struct LutSweepResult {
  CostModel cost_model;
  PlacementLut lut;
  double slice_ns = 0;
  int first_feasible = -1;
  double e_peak_pj = 0;    // objective at the first feasible grid point
  double e_min_pj = 0;     // objective at full relaxation
  double peak_ratio_hps_lps = 0;  // HP-SRAM : LP-SRAM weights at the peak point
  std::string hash;
  std::filesystem::path sweep_file;
};

inline LutSweepResult run_lut_sweep(const ExperimentSpec& spec) {
  if (spec.archs.size() != 1)
    throw std::invalid_argument("run_lut_sweep: exactly one architecture");
  LutSweepResult out;
  out.cost_model = derive_cost_model(spec.archs[0]);
  const double tau = spec.model.touches_per_weight();
  out.slice_ns = derive_slice_ns(out.cost_model, spec.model.param_count, tau,
                                 spec.slice_cfg);
  PlacementProblem prob{&out.cost_model, spec.model.param_count, tau, out.slice_ns};
  out.lut = build_placement_lut(prob, spec.resolution);
  out.first_feasible = out.lut.first_feasible();
  out.e_peak_pj = out.lut.e_task_pj(out.first_feasible);
  out.e_min_pj = out.lut.e_task_pj(out.lut.steps());
  out.hash = config_hash(spec, out.slice_ns);

  const auto& peak = out.lut.placement(out.first_feasible);
  std::int64_t hps = 0, lps = 0;
  for (size_t i = 0; i < out.lut.space_ids.size(); ++i) {
    if (out.lut.space_ids[i] == SpaceId::HpSram) hps = peak[i];
    if (out.lut.space_ids[i] == SpaceId::LpSram) lps = peak[i];
  }
  out.peak_ratio_hps_lps = lps > 0 ? static_cast<double>(hps) / lps : kInf;

  std::filesystem::create_directories(spec.out_dir);
  out.sweep_file = spec.out_dir /
                   ("lut_" + spec.archs[0].name + "_" + spec.model.name + ".tsv");
  TsvWriter w(out.sweep_file, out.hash, spec.seed);
  w.meta("arch", spec.archs[0].name);
  w.meta("model", spec.model.name);
  w.meta("slice_ns", fmt_g(out.slice_ns, 12));
  w.meta("grid_unit_ns", fmt_g(out.lut.grid.unit_ns, 12));
  w.meta("block_weights", std::to_string(out.lut.grid.block_weights));
  std::vector<std::string> head{"t_index", "t_constraint_ns", "feasible",
                                "e_task_pj", "e_task_norm"};
  for (int i = 0; i < kSpaceCount; ++i) {
    head.push_back(std::string("util_") + to_string(static_cast<SpaceId>(i)) + "_pct");
    head.push_back(std::string("x_") + to_string(static_cast<SpaceId>(i)));
  }
  w.row(head);
  for (int t = 0; t <= out.lut.steps(); ++t) {
    std::vector<std::string> row{std::to_string(t),
                                 fmt_g(t * out.lut.grid.unit_ns, 12)};
    if (!out.lut.feasible_at(t)) {
      row.push_back("0");
      row.push_back("inf");
      row.push_back("inf");
      for (int i = 0; i < kSpaceCount; ++i) {
        row.push_back("-");
        row.push_back("-");
      }
    } else {
      row.push_back("1");
      row.push_back(fmt_g(out.lut.e_task_pj(t), 12));
      row.push_back(fmt_g(out.lut.e_task_pj(t) / out.e_peak_pj, 12));
      const auto& x = out.lut.placement(t);
      for (int i = 0; i < kSpaceCount; ++i) {
        auto id = static_cast<SpaceId>(i);
        std::int64_t xi = 0;
        const StorageSpace* s = out.cost_model.find(id);
        for (size_t j = 0; j < out.lut.space_ids.size(); ++j)
          if (out.lut.space_ids[j] == id) xi = x[j];
        row.push_back(s ? fmt_f(100.0 * xi / s->capacity_weights, 3) : "0.000");
        row.push_back(std::to_string(xi));
      }
    }
    w.row(row);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Comparison run.

// Energy savings measured on the FPGA prototype the cost tables come from;
// printed beside simulated savings as a calibration reference.
struct ReferenceSavings {
  const char* scenario;
  double vs_baseline, vs_hetero, vs_hybrid;  // percent
};
inline constexpr ReferenceSavings kPrototypeSavingsPct[] = {
    {"case1", 86.23, 78.70, 66.50}, {"case2", 41.46, 3.72, 39.69},
    {"case3", 72.01, 55.78, 54.09}, {"case4", 61.46, 38.38, 47.60},
    {"case5", 48.94, 16.89, 42.10}, {"case6", 59.28, 34.14, 50.52},
};

inline double prototype_savings_pct(const std::string& scenario,
                                    const std::string& baseline) {
  for (const auto& r : kPrototypeSavingsPct) {
    if (scenario != r.scenario) continue;
    if (baseline == "baseline-pim") return r.vs_baseline;
    if (baseline == "hetero-pim") return r.vs_hetero;
    if (baseline == "hybrid-pim") return r.vs_hybrid;
  }
  return std::numeric_limits<double>::quiet_NaN();
}

struct SavingsRow {
  std::string scenario;
  std::string baseline;
  double savings_pct = 0;
  double reference_pct = std::numeric_limits<double>::quiet_NaN();
};

struct CompareRunResult {
  ComparisonResult comparison;
  std::vector<SavingsRow> savings;  // test arch vs every other arch
  std::string test_arch;            // the arch savings are computed for
  std::string hash;
  std::filesystem::path summary_tsv, savings_tsv, summary_json;
  std::vector<std::filesystem::path> trace_files;
};

inline CompareRunResult run_compare(const ExperimentSpec& spec) {
  if (spec.archs.empty()) throw std::invalid_argument("run_compare: no architectures");
  CompareRunResult out;

  std::vector<CostModel> models;
  for (const auto& a : spec.archs) {
    if (a.latency_scale != spec.archs[0].latency_scale)
      throw std::invalid_argument("run_compare: latency_scale differs across archs");
    models.push_back(derive_cost_model(a));
  }
  out.comparison = compare_architectures(models, spec.model, spec.streams,
                                         spec.slice_cfg, spec.resolution);
  out.hash = config_hash(spec, out.comparison.slice_ns);

  // savings of the heterogeneous-hybrid arch (or the first one) vs the rest
  out.test_arch = spec.archs[0].name;
  for (const auto& a : spec.archs)
    if (a.name == "hh-pim") out.test_arch = a.name;

  for (const auto& st : spec.streams) {
    for (const auto& a : spec.archs) {
      if (a.name == out.test_arch) continue;
      SavingsRow row;
      row.scenario = st.scenario;
      row.baseline = a.name;
      row.savings_pct = 100.0 * energy_savings(
          out.comparison.total_of(out.test_arch, st.scenario),
          out.comparison.total_of(a.name, st.scenario));
      row.reference_pct = prototype_savings_pct(st.scenario, a.name);
      out.savings.push_back(row);
    }
  }

  // trace files, one per run
  std::filesystem::create_directories(spec.out_dir);
  for (const auto& run : out.comparison.runs) {
    auto path = spec.out_dir / ("trace_" + run.arch + "_" + run.scenario + "_" +
                                run.model + ".tsv");
    TsvWriter w(path, out.hash, spec.seed);
    w.meta("slice_ns", fmt_g(run.slice_ns, 12));
    std::vector<std::string> head{"slice_idx", "arch",    "scenario",
                                  "n_tasks",   "t_constraint_ns"};
    for (int i = 0; i < kSpaceCount; ++i)
      head.push_back(std::string("x_") + to_string(static_cast<SpaceId>(i)));
    for (const char* c : {"e_mig_pj", "e_dyn_pj", "e_stat_pj", "miss_flag"})
      head.push_back(c);
    w.row(head);
    const CostModel* cm = nullptr;
    for (size_t i = 0; i < models.size(); ++i)
      if (models[i].arch.name == run.arch) cm = &models[i];
    for (const auto& tr : run.traces) {
      std::vector<std::string> row{std::to_string(tr.slice_idx), run.arch,
                                   run.scenario, std::to_string(tr.executed),
                                   std::isinf(tr.t_constraint_ns)
                                       ? "inf"
                                       : fmt_g(tr.t_constraint_ns, 12)};
      for (int i = 0; i < kSpaceCount; ++i) {
        std::int64_t xi = 0;
        for (size_t j = 0; j < cm->spaces.size(); ++j)
          if (cm->spaces[j].id == static_cast<SpaceId>(i)) xi = tr.x[j];
        row.push_back(std::to_string(xi));
      }
      row.push_back(fmt_g(tr.e_migration_pj, 12));
      row.push_back(fmt_g(tr.e_dynamic_pj, 12));
      row.push_back(fmt_g(tr.e_static_pj, 12));
      row.push_back(tr.deadline_met ? "0" : "1");
      w.row(row);
    }
    out.trace_files.push_back(path);
  }

  // totals
  out.summary_tsv = spec.out_dir / ("summary_" + spec.model.name + ".tsv");
  {
    TsvWriter w(out.summary_tsv, out.hash, spec.seed);
    w.meta("model", spec.model.name);
    w.meta("slice_ns", fmt_g(out.comparison.slice_ns, 12));
    w.row({"arch", "scenario", "total_pj", "total_mj", "deadline_misses"});
    for (const auto& c : out.comparison.cells)
      w.row({c.arch, c.scenario, fmt_g(c.total_pj, 12), fmt_g(c.total_pj * 1e-9, 9),
             std::to_string(c.deadline_misses)});
  }

  // savings matrix with the prototype reference beside it
  out.savings_tsv = spec.out_dir / ("savings_" + spec.model.name + ".tsv");
  {
    TsvWriter w(out.savings_tsv, out.hash, spec.seed);
    w.meta("test_arch", out.test_arch);
    w.row({"scenario", "baseline", "savings_pct", "prototype_pct"});
    for (const auto& r : out.savings)
      w.row({r.scenario, r.baseline, fmt_f(r.savings_pct, 3),
             std::isnan(r.reference_pct) ? "-" : fmt_f(r.reference_pct, 2)});
  }

  // machine-readable summary
  out.summary_json = spec.out_dir / ("summary_" + spec.model.name + ".json");
  {
    nlohmann::json j;
    j["config_hash"] = out.hash;
    j["seed"] = spec.seed;
    j["model"] = spec.model.name;
    j["slice_ns"] = out.comparison.slice_ns;
    j["resolution"] = {{"blocks", spec.resolution.blocks},
                       {"substeps", spec.resolution.substeps},
                       {"budget_fraction", spec.resolution.budget_fraction}};
    for (const auto& c : out.comparison.cells) {
      j["totals"][c.arch][c.scenario] = {{"pj", c.total_pj},
                                         {"mj", c.total_pj * 1e-9},
                                         {"deadline_misses", c.deadline_misses}};
    }
    for (const auto& r : out.savings)
      j["savings_pct"][r.scenario][r.baseline] = r.savings_pct;
    std::ofstream f(out.summary_json, std::ios::binary);
    f << j.dump(2) << "\n";
  }
  return out;
}

// ---------------------------------------------------------------------------
// Randomized verification harness (DP vs exhaustive oracle plus properties).

struct VerifyLimits {
  int max_n = 4;          // spaces, split evenly across two clusters
  std::int64_t max_k = 8;
  int max_steps = 40;
  int trials = 500;
  std::uint64_t seed = 1;
};

struct VerifyReport {
  int trials_run = 0;
  int failures = 0;
  std::vector<std::string> lines;

  bool ok() const { return failures == 0; }
  void check(bool pass, const std::string& what) {
    lines.push_back(std::string(pass ? "PASS " : "FAIL ") + what);
    if (!pass) ++failures;
  }
};

namespace detail {

struct RandomInstance {
  std::vector<DpItem> hp, lp;
  std::int64_t k = 0;
  int steps = 0;

  DpProblem problem() const {
    DpProblem p;
    for (const auto& it : hp) { p.items.push_back(it); p.cluster.push_back(0); }
    for (const auto& it : lp) { p.items.push_back(it); p.cluster.push_back(1); }
    p.total_count = k;
    p.steps = steps;
    return p;
  }
};

inline RandomInstance random_instance(std::mt19937_64& rng, const VerifyLimits& lim) {
  RandomInstance ri;
  int per_cluster = std::max(1, lim.max_n / 2);
  ri.k = static_cast<std::int64_t>(rng() % (lim.max_k + 1));
  ri.steps = 8 + static_cast<int>(rng() % std::max(1, lim.max_steps - 7));
  std::set<int> used_e;
  auto gen = [&](std::vector<DpItem>& v) {
    for (int i = 0; i < per_cluster; ++i) {
      DpItem it;
      it.t_units = 1 + static_cast<int>(rng() % 8);
      int e;
      do { e = 1 + static_cast<int>(rng() % 100); } while (used_e.count(e));
      used_e.insert(e);
      it.energy_pj = e;
      v.push_back(it);
    }
  };
  gen(ri.hp);
  gen(ri.lp);
  return ri;
}

// Compares DP+combine against the oracle over the full t grid. The optional
// perturbation bumps the globally cheapest item's cost in the DP input only,
// as a mutation control for the checker itself.
inline std::optional<std::string> check_instance(const RandomInstance& ri,
                                                 double e_perturbation = 0) {
  auto hp = ri.hp;
  auto lp = ri.lp;
  if (e_perturbation != 0) {
    DpItem* cheapest = &hp[0];
    for (auto* v : {&hp, &lp})
      for (auto& it : *v)
        if (it.energy_pj < cheapest->energy_pj) cheapest = &it;
    cheapest->energy_pj += e_perturbation;
  }
  DpTable t_hp = build_dp_table(hp, ri.k, ri.steps);
  DpTable t_lp = build_dp_table(lp, ri.k, ri.steps);
  AllocationLut lut = combine_clusters(t_hp, t_lp, ri.k);
  DpProblem prob = ri.problem();  // oracle always sees unperturbed costs
  double last_e = kInf;
  bool seen_feasible = false;
  for (int t = 0; t <= ri.steps; ++t) {
    auto oracle = brute_force_optimal(prob, t);
    const LutEntry& ent = lut.entries[t];
    if (oracle.has_value() != ent.feasible)
      return "feasibility mismatch at t=" + std::to_string(t);
    if (ent.feasible && seen_feasible == false) seen_feasible = true;
    if (!ent.feasible && seen_feasible)
      return "infeasible hole after feasible prefix at t=" + std::to_string(t);
    if (!ent.feasible) continue;
    double rel = std::abs(ent.e_task_pj - oracle->e_task_pj) /
                 std::max(1.0, std::abs(oracle->e_task_pj));
    if (rel > 1e-9)
      return "energy mismatch at t=" + std::to_string(t) + ": dp=" +
             fmt_g(ent.e_task_pj, 17) + " oracle=" + fmt_g(oracle->e_task_pj, 17);
    // placement consistency: sums to K, energy re-adds, times fit
    std::int64_t sum = 0, time_hp = 0, time_lp = 0;
    double e_re = 0;
    for (size_t i = 0; i < ent.x.size(); ++i) {
      sum += ent.x[i];
      e_re += ent.x[i] * prob.items[i].energy_pj;
      (prob.cluster[i] == 0 ? time_hp : time_lp) +=
          ent.x[i] * prob.items[i].t_units;
    }
    if (sum != ri.k) return "placement does not sum to K at t=" + std::to_string(t);
    if (time_hp > t || time_lp > t)
      return "placement exceeds time budget at t=" + std::to_string(t);
    if (std::abs(e_re - ent.e_task_pj) > 1e-9 * std::max(1.0, e_re))
      return "reconstruction energy differs at t=" + std::to_string(t);
    if (ent.e_task_pj > last_e + 1e-12)
      return "E_task increased with t at t=" + std::to_string(t);
    last_e = ent.e_task_pj;
  }
  return std::nullopt;
}

}  // namespace detail

inline VerifyReport run_verify(const VerifyLimits& lim) {
  VerifyReport rep;
  std::mt19937_64 rng(lim.seed);

  if (lim.trials == 0)
    rep.lines.push_back("WARN zero trials requested: equivalence vacuously passes");

  int mismatches = 0;
  std::string first_error;
  for (int i = 0; i < lim.trials; ++i) {
    auto ri = detail::random_instance(rng, lim);
    auto err = detail::check_instance(ri);
    if (err) {
      ++mismatches;
      if (first_error.empty())
        first_error = "trial " + std::to_string(i) + ": " + *err;
    }
    ++rep.trials_run;
  }
  rep.check(mismatches == 0,
            "dp-vs-oracle equivalence (" + std::to_string(lim.trials) + " trials)" +
                (first_error.empty() ? "" : " [" + first_error + "]"));

  // negative control: a perturbed DP cost must be caught
  {
    std::mt19937_64 rng2(lim.seed ^ 0xdeadbeefULL);
    bool caught = false;
    for (int i = 0; i < 20 && !caught; ++i) {
      auto ri = detail::random_instance(rng2, lim);
      if (ri.k == 0) continue;
      caught = detail::check_instance(ri, 0.5).has_value();
    }
    rep.check(caught, "negative control: perturbed e_i detected as mismatch");
  }

  // dp dominance and t monotonicity on a fixed instance
  {
    std::mt19937_64 rng3(lim.seed ^ 0x5151ULL);
    auto ri = detail::random_instance(rng3, lim);
    ri.k = std::max<std::int64_t>(ri.k, 2);
    DpTable tb = build_dp_table(ri.hp, ri.k, ri.steps);
    bool dominance = true, monotone = true;
    for (int i = 1; i <= tb.n(); ++i)
      for (int t = 0; t <= tb.steps(); ++t)
        for (std::int64_t k = 0; k <= ri.k; ++k) {
          if (tb.at(i, t, k) > tb.at(i - 1, t, k) + 1e-12) dominance = false;
          if (t > 0 && tb.at(i, t, k) > tb.at(i, t - 1, k) + 1e-12) monotone = false;
        }
    rep.check(dominance, "dp dominance: dp[i][t][k] <= dp[i-1][t][k]");
    rep.check(monotone, "dp monotone in t");
  }

  // migration conservation on random placements over the default HH model
  {
    CostModel m = derive_cost_model(hh_pim_arch());
    std::mt19937_64 rng4(lim.seed ^ 0xabcdULL);
    bool ok = true;
    for (int trial = 0; trial < 50 && ok; ++trial) {
      std::int64_t k = 1 + rng4() % 5000;
      auto rand_place = [&](std::int64_t total) {
        std::vector<std::int64_t> x(m.spaces.size(), 0);
        for (std::int64_t w = 0; w < total; ++w) ++x[rng4() % x.size()];
        return x;
      };
      auto a = rand_place(k), b = rand_place(k);
      MigrationPlan plan = plan_migration(a, b, m);
      std::vector<std::int64_t> net = a;
      for (size_t s = 0; s < net.size(); ++s)
        for (size_t d = 0; d < net.size(); ++d) {
          net[s] -= plan.moves[s][d];
          net[d] += plan.moves[s][d];
        }
      if (net != b) ok = false;
      if (plan.energy_pj < 0 || plan.time_ns < 0) ok = false;
    }
    rep.check(ok, "migration conservation: old + moves = new");
  }

  // workload determinism and bounds
  {
    bool ok = true;
    for (Scenario sc : all_scenarios()) {
      TaskStream a = generate(sc, 50, 10, lim.seed);
      TaskStream b = generate(sc, 50, 10, lim.seed);
      if (a.arrivals != b.arrivals) ok = false;
      for (int v : a.arrivals)
        if (v < 0 || v > 10) ok = false;
    }
    rep.check(ok, "workload streams deterministic and bounded");
  }

  return rep;
}

}  // namespace hhpim
