#include <catch2/catch_amalgamated.hpp>

#include <random>

#include "hhpim/config.hpp"
#include "hhpim/harness.hpp"
#include "hhpim/placement_dp.hpp"
#include "hhpim/slice_sim.hpp"

using namespace hhpim;
using Catch::Approx;

TEST_CASE("base case: zero weights cost nothing everywhere") {
  auto tb = build_dp_table({{2, 5.0}, {3, 7.0}}, 0, 12);
  for (int i = 1; i <= 2; ++i)
    for (int t = 0; t <= 12; ++t) CHECK(tb.at(i, t, 0) == 0.0);
}

TEST_CASE("single space forces the arithmetic") {
  auto tb = build_dp_table({{2, 5.0}}, 3, 6);
  CHECK(tb.at(1, 6, 3) == 15.0);       // 3 weights, 2 units each, exactly fits
  auto tb5 = build_dp_table({{2, 5.0}}, 3, 5);
  CHECK(tb5.at(1, 5, 3) == kInf);      // 6 units needed, 5 available
  CHECK(tb5.at(1, 5, 2) == 10.0);
  auto x = tb.reconstruct(6, 3);
  CHECK(x == std::vector<std::int64_t>{3});
}

TEST_CASE("mixed placements across slow and fast spaces are found") {
  // one of each: 1 unit @ e=10 and 10 units @ e=1; both fit in t=11
  auto tb = build_dp_table({{1, 10.0}, {10, 1.0}}, 2, 11);
  CHECK(tb.at(2, 11, 2) == Approx(11.0));
  auto x = tb.reconstruct(11, 2);
  CHECK(x == std::vector<std::int64_t>{1, 1});
}

TEST_CASE("dp dominance and monotonicity in t") {
  auto tb = build_dp_table({{3, 9.0}, {2, 11.0}, {5, 1.0}}, 6, 40);
  for (int i = 1; i <= 3; ++i)
    for (int t = 0; t <= 40; ++t)
      for (std::int64_t k = 0; k <= 6; ++k) {
        CHECK(tb.at(i, t, k) <= tb.at(i - 1, t, k));
        if (t > 0) CHECK(tb.at(i, t, k) <= tb.at(i, t - 1, k));
      }
}

TEST_CASE("ties prefer the lower-index space") {
  auto tb = build_dp_table({{1, 1.0}, {1, 1.0}}, 3, 10);
  auto x = tb.reconstruct(10, 3);
  CHECK(x == std::vector<std::int64_t>{3, 0});
}

TEST_CASE("capacity clamp keeps counts within each space") {
  std::vector<DpItem> items{{1, 1.0, 2}, {1, 2.0, 10}};
  auto tb = build_dp_table(items, 5, 20);
  auto x = tb.reconstruct(20, 5);
  CHECK(x[0] <= 2);
  CHECK(x[0] + x[1] == 5);
  CHECK(tb.at(2, 20, 5) == Approx(2 * 1.0 + 3 * 2.0));

  // all capacities exhausted: infeasible
  std::vector<DpItem> tight{{1, 1.0, 1}, {1, 2.0, 1}};
  CHECK(build_dp_table(tight, 3, 20).at(2, 20, 3) == kInf);
}

TEST_CASE("invalid dp inputs are rejected") {
  CHECK_THROWS_AS(build_dp_table({{1, 1.0}}, -1, 10), std::invalid_argument);
  CHECK_THROWS_AS(build_dp_table({{0, 1.0}}, 1, 10), std::invalid_argument);
  CHECK_THROWS_AS(build_dp_table({}, 1, 10), std::invalid_argument);
}

TEST_CASE("combine rejects mismatched grids") {
  auto a = build_dp_table({{1, 1.0}}, 2, 10);
  auto b = build_dp_table({{1, 1.0}}, 2, 12);
  CHECK_THROWS_AS(combine_clusters(a, b, 2), std::invalid_argument);
}

TEST_CASE("oracle: exhaustive enumeration basics") {
  DpProblem p;
  p.items = {{2, 5.0}};
  p.cluster = {0};
  p.total_count = 0;
  auto r = brute_force_optimal(p, 0);
  REQUIRE(r);
  CHECK(r->e_task_pj == 0.0);

  p.total_count = 4;
  auto r2 = brute_force_optimal(p, 8);
  REQUIRE(r2);
  CHECK(r2->e_task_pj == 20.0);
  CHECK_FALSE(brute_force_optimal(p, 7));

  DpProblem huge;
  huge.items.assign(8, DpItem{1, 1.0});
  huge.cluster.assign(8, 0);
  huge.total_count = 100000;
  CHECK_THROWS_AS(brute_force_optimal(huge, 10), std::invalid_argument);
}

TEST_CASE("randomized dp-vs-oracle equivalence, small instances") {
  VerifyLimits lim;
  lim.trials = 120;
  lim.seed = 20260810;
  auto rep = run_verify(lim);
  for (const auto& l : rep.lines) INFO(l);
  CHECK(rep.ok());
}

TEST_CASE("lookup rounds down, clamps the tail and flags the gray region") {
  // grid with an infeasible prefix: single space, t=4 units each, K=3
  auto tb = build_dp_table({{4, 2.0}}, 3, 20);
  AllocationLut lut = single_cluster_lut(tb, 3, true);
  lut.grid = TimeGrid{10.0, 20, 1, 0.01};
  CHECK(lut.first_feasible == 12);

  auto miss = lookup_allocation(lut, 115.0);  // floor -> index 11, infeasible
  CHECK_FALSE(miss.feasible);
  CHECK(miss.t_index == 11);

  auto hit = lookup_allocation(lut, 125.0);
  REQUIRE(hit.feasible);
  CHECK(hit.t_index == 12);

  auto clamped = lookup_allocation(lut, 1e12);
  REQUIRE(clamped.feasible);
  CHECK(clamped.t_index == 20);
  auto inf = lookup_allocation(lut, kInf);
  CHECK(inf.t_index == 20);
}

TEST_CASE("calibrate_resolution scales with the budget and respects floors") {
  double cell_ns = 1.0;
  auto r1 = calibrate_resolution(100000, 3e8, 0.01, cell_ns);
  auto r2 = calibrate_resolution(100000, 3e8, 0.02, cell_ns);
  CHECK(r2.blocks >= r1.blocks);

  // starved budget: floor blocks, flagged
  auto tiny = calibrate_resolution(100000, 1e4, 0.01, cell_ns);
  CHECK(tiny.blocks == 16);
  CHECK_FALSE(tiny.budget_met);

  // tiny K: block count capped by K itself
  auto small_k = calibrate_resolution(8, 3e8, 0.01, cell_ns);
  CHECK(small_k.blocks == 8);

  CHECK_THROWS_AS(calibrate_resolution(0, 1e8, 0.01, cell_ns), std::invalid_argument);
  CHECK_THROWS_AS(calibrate_resolution(10, 1e8, 0.0, cell_ns), std::invalid_argument);
}

TEST_CASE("effective per-weight energy ranks LP-MRAM cheapest at the default slice") {
  CostModel m = derive_cost_model(hh_pim_arch());
  ModelProfile eff = *builtin_model("efficientnet-b0");
  SliceConfig cfg;
  double T = derive_slice_ns(m, eff.param_count, eff.touches_per_weight(), cfg);
  PlacementProblem prob{&m, eff.param_count, eff.touches_per_weight(), T};
  std::vector<double> t_eff, e_eff;
  effective_costs(prob, t_eff, e_eff);
  REQUIRE(e_eff.size() == 4);
  // order: hp-mram, hp-sram, lp-mram, lp-sram
  CHECK(e_eff[2] < e_eff[0]);
  CHECK(e_eff[2] < e_eff[1]);
  CHECK(e_eff[2] < e_eff[3]);
  // LP stays cheaper than HP for the same memory kind
  CHECK(e_eff[2] < e_eff[0]);
  CHECK(e_eff[3] < e_eff[1]);
}

TEST_CASE("production lut: relaxed tail is pure LP-MRAM, peak uses both SRAMs") {
  CostModel m = derive_cost_model(hh_pim_arch());
  ModelProfile eff = *builtin_model("efficientnet-b0");
  SliceConfig cfg;
  double T = derive_slice_ns(m, eff.param_count, eff.touches_per_weight(), cfg);
  PlacementProblem prob{&m, eff.param_count, eff.touches_per_weight(), T};
  PlacementLut lut = build_placement_lut(prob, default_resolution());

  REQUIRE(lut.first_feasible() >= 1);  // a gray region exists

  const auto& relaxed = lut.relaxed_placement();
  std::int64_t sum = 0;
  for (size_t i = 0; i < relaxed.size(); ++i) {
    sum += relaxed[i];
    if (lut.space_ids[i] == SpaceId::LpMram)
      CHECK(relaxed[i] == eff.param_count);
    else
      CHECK(relaxed[i] == 0);
  }
  CHECK(sum == eff.param_count);

  const auto& peak = lut.placement(lut.first_feasible());
  std::int64_t hps = 0, lps = 0, total = 0;
  for (size_t i = 0; i < peak.size(); ++i) {
    total += peak[i];
    if (lut.space_ids[i] == SpaceId::HpSram) hps = peak[i];
    if (lut.space_ids[i] == SpaceId::LpSram) lps = peak[i];
  }
  CHECK(total == eff.param_count);
  CHECK(hps > 0);
  CHECK(lps > 0);

  SECTION("every feasible entry sums to K and E_task never increases") {
    double last = kInf;
    for (int t = 0; t <= lut.steps(); ++t) {
      if (t < lut.first_feasible()) {
        CHECK_FALSE(lut.feasible_at(t));
        continue;
      }
      REQUIRE(lut.feasible_at(t));
      std::int64_t s = 0;
      for (auto v : lut.placement(t)) s += v;
      CHECK(s == eff.param_count);
      CHECK(lut.e_task_pj(t) <= last + 1e-9);
      last = lut.e_task_pj(t);
    }
  }

  SECTION("rounding safety: realized makespan never exceeds the constraint") {
    std::mt19937_64 rng(7);
    double lo = lut.first_feasible() * lut.grid.unit_ns;
    double hi = lut.steps() * lut.grid.unit_ns * 1.2;
    for (int i = 0; i < 200; ++i) {
      double t_c = lo + (hi - lo) * (rng() % 10000) / 10000.0;
      auto r = lookup_placement(lut, t_c);
      if (!r.feasible) continue;
      double realized = makespan_ns(r.entry->x, m, eff.touches_per_weight());
      CHECK(realized <= t_c * (1 + 1e-12));
    }
  }
}

TEST_CASE("production lut rejects a model that cannot fit") {
  CostModel m = derive_cost_model(hh_pim_arch());
  PlacementProblem prob{&m, m.total_capacity_weights() + 1, 1.0, 1e9};
  CHECK_THROWS_AS(build_placement_lut(prob, default_resolution()),
                  std::invalid_argument);
}

TEST_CASE("adding a space never increases the relaxed optimum") {
  ModelProfile eff = *builtin_model("efficientnet-b0");
  SliceConfig cfg;

  CostModel hh = derive_cost_model(hh_pim_arch());
  double T = derive_slice_ns(hh, eff.param_count, eff.touches_per_weight(), cfg);

  CostModel het = derive_cost_model(hetero_pim_arch());
  PlacementProblem p_hh{&hh, eff.param_count, eff.touches_per_weight(), T};
  PlacementProblem p_het{&het, eff.param_count, eff.touches_per_weight(), T};
  auto lut_hh = build_placement_lut(p_hh, default_resolution());
  auto lut_het = build_placement_lut(p_het, default_resolution());
  // HH-PIM's space set is a superset of Hetero-PIM's with equal module counts
  CHECK(lut_hh.e_task_pj(lut_hh.steps()) <=
        lut_het.e_task_pj(lut_het.steps()) * (1 + 1e-9));
}
