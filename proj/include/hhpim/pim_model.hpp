#pragma once

// Hardware description of MRAM/SRAM PIM clusters and the per-weight
// time/energy cost model derived from per-access latency and power tables.
//
// Units: time ns, power mW, energy pJ (1 mW * 1 ns = 1 pJ).

#include <array>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace hhpim {

enum class MemKind { MRAM, SRAM };
enum class ClusterKind : int { HP = 0, LP = 1 };

enum class SpaceId : int { HpMram = 0, HpSram = 1, LpMram = 2, LpSram = 3 };
inline constexpr int kSpaceCount = 4;

inline const char* to_string(SpaceId id) {
  switch (id) {
    case SpaceId::HpMram: return "hp-mram";
    case SpaceId::HpSram: return "hp-sram";
    case SpaceId::LpMram: return "lp-mram";
    case SpaceId::LpSram: return "lp-sram";
  }
  return "?";
}

inline std::optional<SpaceId> space_id_from_string(const std::string& s) {
  for (int i = 0; i < kSpaceCount; ++i) {
    auto id = static_cast<SpaceId>(i);
    if (s == to_string(id)) return id;
  }
  return std::nullopt;
}

inline ClusterKind cluster_of(SpaceId id) {
  return (id == SpaceId::HpMram || id == SpaceId::HpSram) ? ClusterKind::HP
                                                          : ClusterKind::LP;
}

inline MemKind mem_kind_of(SpaceId id) {
  return (id == SpaceId::HpMram || id == SpaceId::LpMram) ? MemKind::MRAM
                                                          : MemKind::SRAM;
}

struct MemoryTech {
  MemKind kind = MemKind::SRAM;
  double read_latency_ns = 0;
  double write_latency_ns = 0;
  double dynamic_read_mw = 0;
  double dynamic_write_mw = 0;
  double static_mw = 0;
  std::int64_t capacity_bytes = 0;
};

struct PeSpec {
  double op_latency_ns = 0;  // one MAC over one weight
  double dynamic_mw = 0;
  double static_mw = 0;
};

struct ClusterSpec {
  ClusterKind name = ClusterKind::HP;
  double vdd_volts = 0;
  int module_count = 0;
  std::optional<MemoryTech> mram;
  std::optional<MemoryTech> sram;
  PeSpec pe;
};

struct ArchitectureSpec {
  std::string name;
  std::vector<ClusterSpec> clusters;          // 1 or 2 entries
  std::vector<SpaceId> available_spaces;      // listed order is the x_i order
  std::int64_t weight_bytes = 1;              // INT8 default
  double latency_scale = 10.5;                // system-clock dilation of all latencies
  // Conventional designs stage input/output data through the module SRAM, so
  // a computing cluster cannot gate its SRAM banks. Controller-buffered
  // designs (the heterogeneous-hybrid ones) can.
  bool sram_io_buffer = false;
};

// One placeable storage target with its per-weight costs. Latencies and
// energies are kept at the raw table scale; latency_scale is applied by the
// layers that turn these into task-level times.
struct StorageSpace {
  SpaceId id = SpaceId::HpMram;
  ClusterKind cluster = ClusterKind::HP;
  double t_per_weight_ns = 0;   // (mem read + PE op) / module_count
  double e_per_weight_pj = 0;   // dynamic read + PE MAC energy, one touch
  double slot_leak_mw = 0;      // bank static power attributed to one occupied slot
  double static_mw_when_active = 0;  // whole-space leakage while it holds any data
  std::int64_t capacity_weights = 0;
  // migration unit costs (per weight moved)
  double move_read_ns = 0, move_read_pj = 0;    // this space as source
  double move_write_ns = 0, move_write_pj = 0;  // this space as destination
};

struct CostModel {
  ArchitectureSpec arch;
  std::vector<StorageSpace> spaces;             // one per available space, in order
  std::array<double, 2> pe_static_mw{0, 0};     // per cluster, all modules
  std::array<int, 2> module_count{0, 0};
  std::array<bool, 2> has_cluster{false, false};

  double latency_scale() const { return arch.latency_scale; }

  const StorageSpace* find(SpaceId id) const {
    for (const auto& s : spaces)
      if (s.id == id) return &s;
    return nullptr;
  }
  std::int64_t total_capacity_weights() const {
    std::int64_t c = 0;
    for (const auto& s : spaces) c += s.capacity_weights;
    return c;
  }
};

namespace detail {

inline void validate_mem(const MemoryTech& m, const std::string& where) {
  if (m.read_latency_ns <= 0 || m.write_latency_ns <= 0)
    throw std::invalid_argument(where + ": latencies must be > 0");
  if (m.dynamic_read_mw < 0 || m.dynamic_write_mw < 0 || m.static_mw < 0)
    throw std::invalid_argument(where + ": powers must be >= 0");
  if (m.capacity_bytes <= 0)
    throw std::invalid_argument(where + ": capacity must be > 0");
}

}  // namespace detail

inline void validate(const ArchitectureSpec& arch) {
  if (arch.clusters.empty() || arch.clusters.size() > 2)
    throw std::invalid_argument(arch.name + ": need 1 or 2 clusters");
  if (arch.available_spaces.empty())
    throw std::invalid_argument(arch.name + ": no storage spaces");
  if (arch.weight_bytes <= 0)
    throw std::invalid_argument(arch.name + ": weight_bytes must be > 0");
  if (arch.latency_scale <= 0)
    throw std::invalid_argument(arch.name + ": latency_scale must be > 0");
  for (const auto& c : arch.clusters) {
    std::string where = arch.name + "/" + (c.name == ClusterKind::HP ? "hp" : "lp");
    if (c.module_count < 1)
      throw std::invalid_argument(where + ": module_count must be >= 1");
    if (c.pe.op_latency_ns <= 0)
      throw std::invalid_argument(where + ": PE op latency must be > 0");
    if (c.pe.dynamic_mw < 0 || c.pe.static_mw < 0)
      throw std::invalid_argument(where + ": PE powers must be >= 0");
    if (c.mram) detail::validate_mem(*c.mram, where + "/mram");
    if (c.sram) detail::validate_mem(*c.sram, where + "/sram");
  }
  for (SpaceId id : arch.available_spaces) {
    const ClusterSpec* cl = nullptr;
    for (const auto& c : arch.clusters)
      if (c.name == cluster_of(id)) cl = &c;
    if (!cl)
      throw std::invalid_argument(arch.name + ": space " + to_string(id) +
                                  " references a missing cluster");
    const auto& mem = mem_kind_of(id) == MemKind::MRAM ? cl->mram : cl->sram;
    if (!mem)
      throw std::invalid_argument(arch.name + ": space " + to_string(id) +
                                  " has no memory tech configured");
  }
}

// Composes the latency and power tables into per-weight costs (one memory
// read plus one PE MAC, ideal linear parallelism across a cluster's modules).
inline CostModel derive_cost_model(const ArchitectureSpec& arch) {
  validate(arch);
  CostModel m;
  m.arch = arch;
  for (const auto& c : arch.clusters) {
    int ci = static_cast<int>(c.name);
    m.has_cluster[ci] = true;
    m.module_count[ci] = c.module_count;
    m.pe_static_mw[ci] = c.pe.static_mw * c.module_count;
  }
  for (SpaceId id : arch.available_spaces) {
    const ClusterSpec* cl = nullptr;
    for (const auto& c : arch.clusters)
      if (c.name == cluster_of(id)) cl = &c;
    const MemoryTech& mem =
        mem_kind_of(id) == MemKind::MRAM ? *cl->mram : *cl->sram;

    StorageSpace s;
    s.id = id;
    s.cluster = cl->name;
    s.t_per_weight_ns = (mem.read_latency_ns + cl->pe.op_latency_ns) / cl->module_count;
    s.e_per_weight_pj = mem.dynamic_read_mw * mem.read_latency_ns +
                        cl->pe.dynamic_mw * cl->pe.op_latency_ns;
    std::int64_t cap_per_module = mem.capacity_bytes / arch.weight_bytes;
    if (cap_per_module <= 0)
      throw std::invalid_argument(arch.name + ": capacity below one weight");
    s.capacity_weights = cap_per_module * cl->module_count;
    s.static_mw_when_active = mem.static_mw * cl->module_count;
    s.slot_leak_mw = mem.static_mw / static_cast<double>(cap_per_module);
    s.move_read_ns = mem.read_latency_ns;
    s.move_read_pj = mem.dynamic_read_mw * mem.read_latency_ns;
    s.move_write_ns = mem.write_latency_ns;
    s.move_write_pj = mem.dynamic_write_mw * mem.write_latency_ns;
    m.spaces.push_back(s);
  }
  return m;
}

// Standby power of an allocation: spaces holding data keep their banks
// powered, clusters holding data keep their PEs powered, everything else is
// power-gated to zero.
inline double static_power_mw(const std::vector<std::int64_t>& x,
                              const CostModel& m) {
  if (x.size() != m.spaces.size())
    throw std::invalid_argument("static_power: placement size mismatch");
  double total = 0;
  std::array<bool, 2> cluster_active{false, false};
  for (size_t i = 0; i < x.size(); ++i) {
    if (x[i] < 0) throw std::invalid_argument("static_power: negative count");
    if (x[i] > 0) {
      total += m.spaces[i].static_mw_when_active;
      cluster_active[static_cast<int>(m.spaces[i].cluster)] = true;
    }
  }
  for (int c = 0; c < 2; ++c)
    if (cluster_active[c]) total += m.pe_static_mw[c];
  return total;
}

}  // namespace hhpim
