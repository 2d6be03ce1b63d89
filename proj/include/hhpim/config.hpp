#pragma once

// Structured-text config files: `[section.subsection]` headers and
// `key = value` lines, `#` or `;` comments. Parse errors carry line numbers.
// Also holds the built-in architecture variants and TinyML model profiles
// the default configs mirror.

#include <cctype>
#include <cstdint>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "hhpim/pim_model.hpp"

namespace hhpim {

struct ConfigError : std::runtime_error {
  ConfigError(const std::string& file, int line, const std::string& msg)
      : std::runtime_error(file + ":" + std::to_string(line) + ": " + msg),
        line_no(line) {}
  int line_no;
};

class ConfigFile {
 public:
  static ConfigFile parse_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError(path, 0, "cannot open file");
    std::stringstream ss;
    ss << in.rdbuf();
    return parse(ss.str(), path);
  }

  static ConfigFile parse(const std::string& text, const std::string& name = "<string>") {
    ConfigFile cfg;
    cfg.name_ = name;
    std::string section;
    int line_no = 0;
    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line)) {
      ++line_no;
      std::string s = trim(line);
      if (s.empty() || s[0] == '#' || s[0] == ';') continue;
      if (s.front() == '[') {
        if (s.back() != ']')
          throw ConfigError(name, line_no, "unterminated section header");
        section = trim(s.substr(1, s.size() - 2));
        if (section.empty())
          throw ConfigError(name, line_no, "empty section name");
        cfg.sections_.push_back(section);
        continue;
      }
      auto eq = s.find('=');
      if (eq == std::string::npos)
        throw ConfigError(name, line_no, "expected `key = value`");
      std::string key = trim(s.substr(0, eq));
      std::string val = trim(s.substr(eq + 1));
      if (key.empty()) throw ConfigError(name, line_no, "empty key");
      std::string full = section.empty() ? key : section + "." + key;
      cfg.values_[full] = val;
      cfg.lines_[full] = line_no;
    }
    return cfg;
  }

  bool has(const std::string& key) const { return values_.count(key) > 0; }

  const std::string& get_str(const std::string& key) const {
    auto it = values_.find(key);
    if (it == values_.end())
      throw ConfigError(name_, 0, "missing key `" + key + "`");
    return it->second;
  }

  double get_num(const std::string& key) const {
    const std::string& v = get_str(key);
    try {
      size_t pos = 0;
      double d = std::stod(v, &pos);
      if (pos != v.size()) throw std::invalid_argument(v);
      return d;
    } catch (const std::exception&) {
      throw ConfigError(name_, line_of(key), "`" + key + "`: not a number: " + v);
    }
  }

  std::int64_t get_int(const std::string& key) const {
    const std::string& v = get_str(key);
    try {
      size_t pos = 0;
      long long d = std::stoll(v, &pos);
      if (pos != v.size()) throw std::invalid_argument(v);
      return d;
    } catch (const std::exception&) {
      throw ConfigError(name_, line_of(key), "`" + key + "`: not an integer: " + v);
    }
  }

  std::vector<std::string> get_list(const std::string& key) const {
    std::vector<std::string> out;
    std::string cur;
    for (char c : get_str(key)) {
      if (c == ',') {
        out.push_back(trim(cur));
        cur.clear();
      } else {
        cur += c;
      }
    }
    cur = trim(cur);
    if (!cur.empty()) out.push_back(cur);
    return out;
  }

  int line_of(const std::string& key) const {
    auto it = lines_.find(key);
    return it == lines_.end() ? 0 : it->second;
  }
  const std::string& name() const { return name_; }
  const std::vector<std::string>& sections() const { return sections_; }

  // Canonical serialization (sorted keys) used for config hashing.
  std::string canonical() const {
    std::string out;
    for (const auto& [k, v] : values_) out += k + "=" + v + "\n";
    return out;
  }

  static std::string trim(const std::string& s) {
    size_t a = 0, b = s.size();
    while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
    while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
    return s.substr(a, b - a);
  }

 private:
  std::string name_;
  std::map<std::string, std::string> values_;
  std::map<std::string, int> lines_;
  std::vector<std::string> sections_;
};

// ---------------------------------------------------------------------------
// Architecture files

namespace detail {

inline MemoryTech parse_mem(const ConfigFile& c, const std::string& prefix, MemKind kind) {
  MemoryTech m;
  m.kind = kind;
  m.read_latency_ns = c.get_num(prefix + ".read_latency_ns");
  m.write_latency_ns = c.get_num(prefix + ".write_latency_ns");
  m.dynamic_read_mw = c.get_num(prefix + ".dynamic_read_mw");
  m.dynamic_write_mw = c.get_num(prefix + ".dynamic_write_mw");
  m.static_mw = c.get_num(prefix + ".static_mw");
  m.capacity_bytes = c.get_int(prefix + ".capacity_kb") * 1024;
  return m;
}

inline ClusterSpec parse_cluster(const ConfigFile& c, ClusterKind kind) {
  std::string prefix = std::string("cluster.") + (kind == ClusterKind::HP ? "hp" : "lp");
  ClusterSpec cl;
  cl.name = kind;
  cl.vdd_volts = c.get_num(prefix + ".vdd_volts");
  cl.module_count = static_cast<int>(c.get_int(prefix + ".module_count"));
  cl.pe.op_latency_ns = c.get_num(prefix + ".pe.op_latency_ns");
  cl.pe.dynamic_mw = c.get_num(prefix + ".pe.dynamic_mw");
  cl.pe.static_mw = c.get_num(prefix + ".pe.static_mw");
  if (c.has(prefix + ".mram.read_latency_ns"))
    cl.mram = parse_mem(c, prefix + ".mram", MemKind::MRAM);
  if (c.has(prefix + ".sram.read_latency_ns"))
    cl.sram = parse_mem(c, prefix + ".sram", MemKind::SRAM);
  return cl;
}

}  // namespace detail

inline ArchitectureSpec architecture_from_config(const ConfigFile& c) {
  ArchitectureSpec a;
  a.name = c.get_str("arch.name");
  a.weight_bytes = c.has("arch.weight_bytes") ? c.get_int("arch.weight_bytes") : 1;
  a.latency_scale = c.has("timing.latency_scale") ? c.get_num("timing.latency_scale") : 10.5;
  for (const auto& s : c.get_list("arch.spaces")) {
    auto id = space_id_from_string(s);
    if (!id)
      throw ConfigError(c.name(), c.line_of("arch.spaces"),
                        "unknown storage space `" + s + "`");
    a.available_spaces.push_back(*id);
  }
  if (c.has("cluster.hp.module_count"))
    a.clusters.push_back(detail::parse_cluster(c, ClusterKind::HP));
  if (c.has("cluster.lp.module_count"))
    a.clusters.push_back(detail::parse_cluster(c, ClusterKind::LP));
  validate(a);
  return a;
}

inline ArchitectureSpec load_architecture(const std::string& path) {
  return architecture_from_config(ConfigFile::parse_file(path));
}

// ---------------------------------------------------------------------------
// TinyML model profiles

struct ModelProfile {
  std::string name;
  std::int64_t param_count = 0;  // weights to place
  std::int64_t mac_count = 0;
  double pim_op_fraction = 1.0;

  // PIM MACs per stored weight: how often each resident weight is touched
  // during one inference.
  double touches_per_weight() const {
    return pim_op_fraction * static_cast<double>(mac_count) /
           static_cast<double>(param_count);
  }
};

inline void validate(const ModelProfile& m) {
  if (m.param_count <= 0 || m.mac_count <= 0)
    throw std::invalid_argument(m.name + ": counts must be > 0");
  if (m.pim_op_fraction <= 0 || m.pim_op_fraction > 1)
    throw std::invalid_argument(m.name + ": pim_op_fraction must be in (0,1]");
}

inline std::vector<ModelProfile> models_from_config(const ConfigFile& c) {
  std::vector<ModelProfile> out;
  for (const auto& sec : c.sections()) {
    if (sec.rfind("model.", 0) != 0) continue;
    ModelProfile m;
    m.name = sec.substr(6);
    m.param_count = c.get_int(sec + ".params");
    m.mac_count = c.get_int(sec + ".macs");
    m.pim_op_fraction = c.get_num(sec + ".pim_op_fraction");
    validate(m);
    out.push_back(m);
  }
  if (out.empty()) throw ConfigError(c.name(), 0, "no [model.*] sections");
  return out;
}

inline std::vector<ModelProfile> load_models(const std::string& path) {
  return models_from_config(ConfigFile::parse_file(path));
}

// ---------------------------------------------------------------------------
// Built-in defaults. The shipped config files mirror these tables exactly.

namespace builtin {

inline MemoryTech hp_mram(std::int64_t kb) {
  return MemoryTech{MemKind::MRAM, 2.62, 11.81, 428.48, 133.78, 2.98, kb * 1024};
}
inline MemoryTech hp_sram(std::int64_t kb) {
  return MemoryTech{MemKind::SRAM, 1.12, 1.12, 508.93, 500.0, 23.29, kb * 1024};
}
inline MemoryTech lp_mram(std::int64_t kb) {
  return MemoryTech{MemKind::MRAM, 2.96, 14.65, 179.05, 47.78, 0.84, kb * 1024};
}
inline MemoryTech lp_sram(std::int64_t kb) {
  return MemoryTech{MemKind::SRAM, 1.41, 1.41, 177.3, 177.3, 5.45, kb * 1024};
}
inline PeSpec hp_pe() { return PeSpec{5.52, 0.9, 0.48}; }
inline PeSpec lp_pe() { return PeSpec{10.68, 0.51, 0.25}; }

inline ClusterSpec hp_cluster(int modules, std::optional<std::int64_t> mram_kb,
                              std::optional<std::int64_t> sram_kb) {
  ClusterSpec c;
  c.name = ClusterKind::HP;
  c.vdd_volts = 1.2;
  c.module_count = modules;
  if (mram_kb) c.mram = hp_mram(*mram_kb);
  if (sram_kb) c.sram = hp_sram(*sram_kb);
  c.pe = hp_pe();
  return c;
}

inline ClusterSpec lp_cluster(int modules, std::optional<std::int64_t> mram_kb,
                              std::optional<std::int64_t> sram_kb) {
  ClusterSpec c;
  c.name = ClusterKind::LP;
  c.vdd_volts = 0.8;
  c.module_count = modules;
  if (mram_kb) c.mram = lp_mram(*mram_kb);
  if (sram_kb) c.sram = lp_sram(*sram_kb);
  c.pe = lp_pe();
  return c;
}

}  // namespace builtin

// 8 HP modules, 128 kB SRAM each.
inline ArchitectureSpec baseline_pim_arch() {
  ArchitectureSpec a;
  a.name = "baseline-pim";
  a.clusters = {builtin::hp_cluster(8, std::nullopt, 128)};
  a.available_spaces = {SpaceId::HpSram};
  return a;
}

// 4 HP + 4 LP modules, 128 kB SRAM each.
inline ArchitectureSpec hetero_pim_arch() {
  ArchitectureSpec a;
  a.name = "hetero-pim";
  a.clusters = {builtin::hp_cluster(4, std::nullopt, 128),
                builtin::lp_cluster(4, std::nullopt, 128)};
  a.available_spaces = {SpaceId::HpSram, SpaceId::LpSram};
  return a;
}

// 8 HP modules, 64 kB MRAM + 64 kB SRAM each.
inline ArchitectureSpec hybrid_pim_arch() {
  ArchitectureSpec a;
  a.name = "hybrid-pim";
  a.clusters = {builtin::hp_cluster(8, 64, 64)};
  a.available_spaces = {SpaceId::HpMram, SpaceId::HpSram};
  return a;
}

// 4 HP + 4 LP modules, 64 kB MRAM + 64 kB SRAM each.
inline ArchitectureSpec hh_pim_arch() {
  ArchitectureSpec a;
  a.name = "hh-pim";
  a.clusters = {builtin::hp_cluster(4, 64, 64), builtin::lp_cluster(4, 64, 64)};
  a.available_spaces = {SpaceId::HpMram, SpaceId::HpSram, SpaceId::LpMram,
                        SpaceId::LpSram};
  return a;
}

inline std::optional<ArchitectureSpec> builtin_architecture(const std::string& name) {
  if (name == "baseline-pim") return baseline_pim_arch();
  if (name == "hetero-pim") return hetero_pim_arch();
  if (name == "hybrid-pim") return hybrid_pim_arch();
  if (name == "hh-pim") return hh_pim_arch();
  return std::nullopt;
}

inline std::vector<ModelProfile> builtin_models() {
  return {
      ModelProfile{"efficientnet-b0", 95000, 3245000, 0.85},
      ModelProfile{"mobilenetv2", 101000, 2528000, 0.80},
      ModelProfile{"resnet-18", 256000, 29580000, 0.75},
  };
}

inline std::optional<ModelProfile> builtin_model(const std::string& name) {
  for (auto& m : builtin_models())
    if (m.name == name) return m;
  return std::nullopt;
}

}  // namespace hhpim
