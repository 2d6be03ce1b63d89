#pragma once

// Deterministic, seedable per-slice inference-arrival streams for the six
// benchmark scenarios. Shapes are fixed; levels and periods are parameters.

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <optional>
#include <random>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace hhpim {

enum class Scenario : int {
  Case1 = 1,  // constant low
  Case2,      // constant max
  Case3,      // periodic spike, sparse
  Case4,      // periodic spike, frequent
  Case5,      // high/low pulsing
  Case6,      // uniform random
};

inline const char* to_string(Scenario s) {
  switch (s) {
    case Scenario::Case1: return "case1";
    case Scenario::Case2: return "case2";
    case Scenario::Case3: return "case3";
    case Scenario::Case4: return "case4";
    case Scenario::Case5: return "case5";
    case Scenario::Case6: return "case6";
  }
  return "?";
}

inline std::optional<Scenario> scenario_from_string(std::string s) {
  for (auto& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  for (int i = 1; i <= 6; ++i)
    if (s == to_string(static_cast<Scenario>(i)) ||
        s == std::string("case") + " " + std::to_string(i) ||
        s == std::to_string(i))
      return static_cast<Scenario>(i);
  return std::nullopt;
}

inline std::vector<Scenario> all_scenarios() {
  return {Scenario::Case1, Scenario::Case2, Scenario::Case3,
          Scenario::Case4, Scenario::Case5, Scenario::Case6};
}

struct WorkloadParams {
  double low_fraction = 0.2;  // low level as a fraction of max
  int spike_period_sparse = 10;
  int spike_period_frequent = 4;
  int pulse_block = 5;
};

struct TaskStream {
  std::string scenario;
  std::uint64_t seed = 0;
  int max_per_slice = 0;
  std::vector<int> arrivals;  // one entry per slice
};

inline TaskStream generate(Scenario scenario, int slice_count, int max_per_slice,
                           std::uint64_t seed, const WorkloadParams& wp = {}) {
  if (slice_count < 1) throw std::invalid_argument("generate: slice_count < 1");
  if (max_per_slice < 1) throw std::invalid_argument("generate: max_per_slice < 1");
  TaskStream ts;
  ts.scenario = to_string(scenario);
  ts.seed = seed;
  ts.max_per_slice = max_per_slice;
  ts.arrivals.resize(slice_count);
  const int low = std::max(
      1, static_cast<int>(std::lround(wp.low_fraction * max_per_slice)));
  switch (scenario) {
    case Scenario::Case1:
      for (auto& a : ts.arrivals) a = low;
      break;
    case Scenario::Case2:
      for (auto& a : ts.arrivals) a = max_per_slice;
      break;
    case Scenario::Case3:
      for (int s = 0; s < slice_count; ++s)
        ts.arrivals[s] = (s % wp.spike_period_sparse == 0) ? max_per_slice : low;
      break;
    case Scenario::Case4:
      for (int s = 0; s < slice_count; ++s)
        ts.arrivals[s] = (s % wp.spike_period_frequent == 0) ? max_per_slice : low;
      break;
    case Scenario::Case5:
      for (int s = 0; s < slice_count; ++s)
        ts.arrivals[s] = ((s / wp.pulse_block) % 2 == 0) ? max_per_slice : low;
      break;
    case Scenario::Case6: {
      // seed mixed with the scenario id so cases differ under one seed
      std::mt19937_64 rng(seed * 0x9e3779b97f4a7c15ULL + 6);
      for (auto& a : ts.arrivals)
        a = static_cast<int>(rng() % static_cast<std::uint64_t>(max_per_slice + 1));
      break;
    }
    default:
      throw std::invalid_argument("generate: unknown scenario");
  }
  return ts;
}

inline void write_stream(const TaskStream& ts, std::ostream& out) {
  out << "# scenario=" << ts.scenario << " seed=" << ts.seed
      << " max_per_slice=" << ts.max_per_slice << "\n";
  out << "slice_idx\tarrivals\n";
  for (size_t i = 0; i < ts.arrivals.size(); ++i)
    out << i << "\t" << ts.arrivals[i] << "\n";
}

inline TaskStream read_stream(std::istream& in, const std::string& name = "<stream>") {
  TaskStream ts;
  ts.scenario = "custom";
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line[0] == '#') continue;
    if (line.rfind("slice_idx", 0) == 0) continue;
    std::istringstream row(line);
    long long idx, arr;
    if (!(row >> idx >> arr) || arr < 0)
      throw std::runtime_error(name + ":" + std::to_string(line_no) +
                               ": expected `slice_idx arrivals`");
    ts.arrivals.push_back(static_cast<int>(arr));
    ts.max_per_slice = std::max(ts.max_per_slice, static_cast<int>(arr));
  }
  if (ts.arrivals.empty())
    throw std::runtime_error(name + ": empty stream");
  return ts;
}

inline TaskStream read_stream_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error(path + ": cannot open stream file");
  return read_stream(in, path);
}

}  // namespace hhpim
