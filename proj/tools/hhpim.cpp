// hhpim: builds cost models and allocation LUTs for MRAM-SRAM PIM
// architectures, sweeps placement against t_constraint, and simulates
// time-sliced inference workloads to compare architectures.
//
// Exit codes: 0 ok, 2 config error, 3 infeasible problem, 4 verification
// failure, 1 anything else.

#include <cstdio>
#include <iostream>

#include "CLI11.hpp"

#include "hhpim/hhpim.hpp"

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitInfeasible = 3;
constexpr int kExitVerify = 4;

hhpim::ArchitectureSpec resolve_arch(const std::string& name_or_path) {
  if (auto builtin = hhpim::builtin_architecture(name_or_path)) return *builtin;
  return hhpim::load_architecture(name_or_path);
}

hhpim::ModelProfile resolve_model(const std::string& name, const std::string& models_file) {
  if (!models_file.empty()) {
    for (const auto& m : hhpim::load_models(models_file))
      if (m.name == name) return m;
    throw hhpim::ConfigError(models_file, 0, "model `" + name + "` not found");
  }
  if (auto m = hhpim::builtin_model(name)) return *m;
  throw std::invalid_argument("unknown model `" + name + "` (builtins: efficientnet-b0, mobilenetv2, resnet-18)");
}

hhpim::Resolution resolve_resolution(const std::string& s, double budget_fraction,
                                     std::int64_t weights, double slice_hint_ns) {
  hhpim::Resolution r = hhpim::default_resolution();
  r.budget_fraction = budget_fraction;
  if (s.empty() || s == "default") return r;
  if (s == "auto") {
    if (slice_hint_ns <= 0)
      throw std::invalid_argument("--resolution auto needs a derivable slice length");
    r = hhpim::calibrate_resolution(weights, slice_hint_ns, budget_fraction);
    if (!r.budget_met)
      std::cerr << "warning: solver budget unreachable even at the floor "
                   "resolution; proceeding at the floor\n";
    return r;
  }
  // "blocks=N,substeps=M"
  for (const auto& part : hhpim::ConfigFile::parse("x=" + s).get_list("x")) {
    auto eq = part.find('=');
    if (eq == std::string::npos)
      throw std::invalid_argument("bad --resolution term `" + part + "`");
    std::string k = part.substr(0, eq), v = part.substr(eq + 1);
    if (k == "blocks") r.blocks = std::stoll(v);
    else if (k == "substeps") r.substeps = std::stoi(v);
    else throw std::invalid_argument("bad --resolution key `" + k + "`");
  }
  return r;
}

std::vector<hhpim::TaskStream> resolve_streams(const std::vector<std::string>& scenario_args,
                                               const std::string& workload_file,
                                               const hhpim::SliceConfig& cfg,
                                               std::uint64_t seed) {
  std::vector<hhpim::TaskStream> streams;
  if (!workload_file.empty()) {
    auto ts = hhpim::read_stream_file(workload_file);
    if (static_cast<int>(ts.arrivals.size()) != cfg.slice_count)
      ts.arrivals.resize(cfg.slice_count, 0);
    ts.seed = seed;
    streams.push_back(ts);
    return streams;
  }
  for (const auto& s : scenario_args) {
    if (s == "all") {
      for (auto sc : hhpim::all_scenarios())
        streams.push_back(hhpim::generate(sc, cfg.slice_count, cfg.max_inferences, seed));
      return streams;
    }
    auto sc = hhpim::scenario_from_string(s);
    if (!sc) throw std::invalid_argument("unknown scenario `" + s + "`");
    streams.push_back(hhpim::generate(*sc, cfg.slice_count, cfg.max_inferences, seed));
  }
  return streams;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"HH-PIM energy/latency simulator and placement optimizer"};
  app.require_subcommand(1);

  std::vector<std::string> arch_args{"hh-pim"};
  std::string model_name = "efficientnet-b0";
  std::string models_file;
  std::vector<std::string> scenario_args{"all"};
  std::string workload_file;
  std::string out_dir = "out";
  std::string resolution_arg = "default";
  std::uint64_t seed = 42;
  hhpim::SliceConfig slice_cfg;
  double slice_ms = 0;

  auto add_common = [&](CLI::App* cmd, bool with_arch = true) {
    if (with_arch)
      cmd->add_option("--arch", arch_args,
                      "architecture names (baseline-pim, hetero-pim, hybrid-pim, "
                      "hh-pim) or config file paths");
    cmd->add_option("--model", model_name, "model profile name");
    cmd->add_option("--models-file", models_file, "model profiles config file");
    cmd->add_option("--slices", slice_cfg.slice_count, "time slices per run");
    cmd->add_option("--max-per-slice", slice_cfg.max_inferences,
                    "peak inferences per time slice");
    cmd->add_option("--slice-ms", slice_ms, "time slice length in ms (0: derive)");
    cmd->add_option("--seed", seed, "workload seed");
    cmd->add_option("--out", out_dir, "output directory");
    cmd->add_option("--resolution", resolution_arg,
                    "`default`, `auto`, or `blocks=N,substeps=M`");
    cmd->add_option("--budget-fraction", slice_cfg.budget_fraction,
                    "solver share of one time slice");
  };

  CLI::App* lut = app.add_subcommand("lut", "sweep optimal placement across t_constraint");
  add_common(lut);

  CLI::App* compare = app.add_subcommand("compare", "simulate workloads across architectures");
  add_common(compare);
  compare->add_option("--scenario", scenario_args, "case1..case6 or `all`");
  compare->add_option("--workload-file", workload_file, "replay an exported stream");

  CLI::App* verify = app.add_subcommand("verify", "randomized solver verification");
  int v_trials = 500, v_max_steps = 40, v_max_n = 4;
  std::int64_t v_max_k = 8;
  std::uint64_t v_seed = 1;
  verify->add_option("--trials", v_trials);
  verify->add_option("--max-k", v_max_k);
  verify->add_option("--max-steps", v_max_steps);
  verify->add_option("--max-n", v_max_n);
  verify->add_option("--seed", v_seed);

  CLI::App* genw = app.add_subcommand("gen-workload", "emit a scenario arrival stream");
  std::string g_scenario = "case6";
  std::string g_out = "stream.tsv";
  genw->add_option("--scenario", g_scenario);
  genw->add_option("--slices", slice_cfg.slice_count);
  genw->add_option("--max-per-slice", slice_cfg.max_inferences);
  genw->add_option("--seed", seed);
  genw->add_option("--out", g_out);

  CLI11_PARSE(app, argc, argv);

  try {
    slice_cfg.slice_ns = slice_ms * 1e6;

    if (genw->parsed()) {
      auto sc = hhpim::scenario_from_string(g_scenario);
      if (!sc) throw std::invalid_argument("unknown scenario `" + g_scenario + "`");
      auto ts = hhpim::generate(*sc, slice_cfg.slice_count, slice_cfg.max_inferences, seed);
      std::ofstream f(g_out, std::ios::binary);
      if (!f) throw std::runtime_error("cannot write " + g_out);
      hhpim::write_stream(ts, f);
      std::cout << "wrote " << g_out << "\n";
      return 0;
    }

    if (verify->parsed()) {
      hhpim::VerifyLimits lim;
      lim.trials = v_trials;
      lim.max_k = v_max_k;
      lim.max_steps = v_max_steps;
      lim.max_n = v_max_n;
      lim.seed = v_seed;
      auto rep = hhpim::run_verify(lim);
      for (const auto& l : rep.lines) std::cout << l << "\n";
      std::cout << (rep.ok() ? "verification passed" : "verification FAILED")
                << " (" << rep.trials_run << " trials)\n";
      return rep.ok() ? 0 : kExitVerify;
    }

    hhpim::ExperimentSpec spec;
    for (const auto& a : arch_args) spec.archs.push_back(resolve_arch(a));
    spec.model = resolve_model(model_name, models_file);
    spec.slice_cfg = slice_cfg;
    spec.seed = seed;
    spec.out_dir = out_dir;

    double slice_hint = slice_cfg.slice_ns;
    if (slice_hint <= 0) {
      for (const auto& a : spec.archs) {
        auto m = hhpim::derive_cost_model(a);
        slice_hint = std::max(slice_hint,
                              hhpim::derive_slice_ns(m, spec.model.param_count,
                                                     spec.model.touches_per_weight(),
                                                     slice_cfg));
      }
    }
    spec.resolution = resolve_resolution(resolution_arg, slice_cfg.budget_fraction,
                                         spec.model.param_count, slice_hint);

    if (lut->parsed()) {
      if (spec.archs.size() != 1)
        throw std::invalid_argument("lut: exactly one --arch");
      auto res = hhpim::run_lut_sweep(spec);
      std::cout << "wrote " << res.sweep_file.string() << "\n"
                << "slice_ns=" << hhpim::fmt_g(res.slice_ns, 12)
                << " first_feasible_t_ns="
                << hhpim::fmt_g(res.first_feasible * res.lut.grid.unit_ns, 12) << "\n"
                << "peak hp-sram:lp-sram weight ratio = "
                << hhpim::fmt_f(res.peak_ratio_hps_lps, 4)
                << " (prototype reference 16:9 = 1.7778)\n"
                << "e_task peak=" << hhpim::fmt_g(res.e_peak_pj, 9)
                << " pJ, relaxed=" << hhpim::fmt_g(res.e_min_pj, 9) << " pJ\n";
      return 0;
    }

    // compare
    spec.streams = resolve_streams(scenario_args, workload_file, slice_cfg, seed);
    auto res = hhpim::run_compare(spec);
    std::cout << "model=" << spec.model.name
              << " slice_ns=" << hhpim::fmt_g(res.comparison.slice_ns, 12)
              << " config_hash=" << res.hash << "\n";
    std::printf("%-14s %-8s %16s %10s\n", "arch", "scenario", "total_mj", "misses");
    for (const auto& c : res.comparison.cells)
      std::printf("%-14s %-8s %16.6f %10d\n", c.arch.c_str(), c.scenario.c_str(),
                  c.total_pj * 1e-9, c.deadline_misses);
    if (!res.savings.empty()) {
      std::printf("\nsavings of %s (prototype reference in parentheses)\n",
                  res.test_arch.c_str());
      for (const auto& r : res.savings) {
        if (std::isnan(r.reference_pct))
          std::printf("%-8s vs %-14s %8.3f%%\n", r.scenario.c_str(),
                      r.baseline.c_str(), r.savings_pct);
        else
          std::printf("%-8s vs %-14s %8.3f%%  (%.2f%%)\n", r.scenario.c_str(),
                      r.baseline.c_str(), r.savings_pct, r.reference_pct);
      }
    }
    std::cout << "\nwrote " << res.summary_tsv.string() << ", "
              << res.savings_tsv.string() << ", " << res.summary_json.string()
              << " and " << res.trace_files.size() << " trace files\n";
    return 0;
  } catch (const hhpim::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    std::string what = e.what();
    return what.find("cannot hold") != std::string::npos ||
                   what.find("no feasible") != std::string::npos
               ? kExitInfeasible
               : kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
