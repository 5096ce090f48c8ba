#pragma once

#include <cstdint>
#include <fstream>
#include <istream>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "circuit.hpp"
#include "experiments.hpp"
#include "simulator.hpp"
#include "trainer.hpp"

namespace tdqas {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// --- INI-style text files ---------------------------------------------------------------
//
//   [section]
//   key = value        # full-line comments start with # or ;

class IniFile {
 public:
  static IniFile parse(std::istream& is) {
    IniFile ini;
    std::string line, section;
    int lineno = 0;
    while (std::getline(is, line)) {
      ++lineno;
      std::string t = trim(line);
      if (t.empty() || t.front() == '#' || t.front() == ';') continue;
      if (t.front() == '[') {
        if (t.back() != ']') throw ConfigError("line " + std::to_string(lineno) +
                                               ": unterminated section header");
        section = trim(t.substr(1, t.size() - 2));
        if (section.empty()) throw ConfigError("line " + std::to_string(lineno) +
                                               ": empty section name");
        ini.data_[section];
        continue;
      }
      auto eq = t.find('=');
      if (eq == std::string::npos)
        throw ConfigError("line " + std::to_string(lineno) + ": expected key = value");
      if (section.empty())
        throw ConfigError("line " + std::to_string(lineno) + ": key outside any section");
      std::string key = trim(t.substr(0, eq));
      std::string value = trim(t.substr(eq + 1));
      if (key.empty()) throw ConfigError("line " + std::to_string(lineno) + ": empty key");
      ini.data_[section][key] = value;
    }
    return ini;
  }

  static IniFile load(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw ConfigError("cannot open config file: " + path);
    return parse(f);
  }

  bool has(const std::string& section, const std::string& key) const {
    auto s = data_.find(section);
    return s != data_.end() && s->second.count(key) > 0;
  }

  std::string get(const std::string& section, const std::string& key,
                  const std::string& fallback) const {
    auto s = data_.find(section);
    if (s == data_.end()) return fallback;
    auto k = s->second.find(key);
    return k == s->second.end() ? fallback : k->second;
  }

  std::string require(const std::string& section, const std::string& key) const {
    if (!has(section, key)) throw ConfigError("missing required key " + section + "." + key);
    return data_.at(section).at(key);
  }

  void set(const std::string& section, const std::string& key, const std::string& value) {
    data_[section][key] = value;
  }

  int get_int(const std::string& section, const std::string& key, int fallback) const {
    return has(section, key) ? to_int(section, key, get(section, key, "")) : fallback;
  }
  double get_double(const std::string& section, const std::string& key, double fallback) const {
    return has(section, key) ? to_double(section, key, get(section, key, "")) : fallback;
  }
  bool get_bool(const std::string& section, const std::string& key, bool fallback) const {
    return has(section, key) ? to_bool(section, key, get(section, key, "")) : fallback;
  }
  std::uint64_t get_u64(const std::string& section, const std::string& key,
                        std::uint64_t fallback) const {
    return has(section, key) ? to_u64(section, key, get(section, key, "")) : fallback;
  }

  static bool to_bool(const std::string& section, const std::string& key, const std::string& v) {
    if (v == "true" || v == "on" || v == "yes" || v == "1") return true;
    if (v == "false" || v == "off" || v == "no" || v == "0") return false;
    throw ConfigError("bad boolean for " + section + "." + key + ": " + v);
  }

 private:
  static std::string trim(const std::string& s) {
    auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return "";
    auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
  }
  static int to_int(const std::string& section, const std::string& key, const std::string& v) {
    try {
      std::size_t pos = 0;
      int x = std::stoi(v, &pos);
      if (pos != v.size()) throw std::invalid_argument(v);
      return x;
    } catch (const std::exception&) {
      throw ConfigError("bad integer for " + section + "." + key + ": " + v);
    }
  }
  static double to_double(const std::string& section, const std::string& key,
                          const std::string& v) {
    try {
      std::size_t pos = 0;
      double x = std::stod(v, &pos);
      if (pos != v.size()) throw std::invalid_argument(v);
      return x;
    } catch (const std::exception&) {
      throw ConfigError("bad number for " + section + "." + key + ": " + v);
    }
  }
  static std::uint64_t to_u64(const std::string& section, const std::string& key,
                              const std::string& v) {
    try {
      std::size_t pos = 0;
      std::uint64_t x = std::stoull(v, &pos);
      if (pos != v.size()) throw std::invalid_argument(v);
      return x;
    } catch (const std::exception&) {
      throw ConfigError("bad seed/unsigned for " + section + "." + key + ": " + v);
    }
  }

  std::map<std::string, std::map<std::string, std::string>> data_;
};

// --- gate list parsing ------------------------------------------------------------------

inline std::vector<std::string> split_list(const std::string& csv, char sep = ',') {
  std::vector<std::string> out;
  std::string item;
  std::istringstream is(csv);
  while (std::getline(is, item, sep)) {
    auto b = item.find_first_not_of(" \t");
    if (b == std::string::npos) continue;
    auto e = item.find_last_not_of(" \t");
    out.push_back(item.substr(b, e - b + 1));
  }
  return out;
}

inline GateSet parse_gateset(const std::string& csv) {
  GateSet gs;
  for (const auto& name : split_list(csv)) {
    GateKind k = kind_from_name(name);
    (is_single(k) ? gs.singles : gs.doubles).push_back(k);
  }
  if (gs.singles.empty() && gs.doubles.empty()) throw ConfigError("empty gate list: " + csv);
  return gs;
}

inline std::vector<GatePair> parse_instantiations(const std::string& csv) {
  std::vector<GatePair> out;
  for (const auto& pair : split_list(csv)) {
    auto parts = split_list(pair, ':');
    if (parts.size() != 2) throw ConfigError("instantiation must be single:double, got " + pair);
    out.push_back({kind_from_name(parts[0]), kind_from_name(parts[1])});
  }
  if (out.empty()) throw ConfigError("empty instantiation list");
  return out;
}

// --- typed run configuration -------------------------------------------------------------

enum class TaskKind { VqeH2, VqeHeisenberg, VqeTfim, MaxCut, Classify };
enum class EngineKind { Supernet, Dqas };
enum class ModeKind { Baseline, TdGt };

inline const char* task_name(TaskKind t) {
  switch (t) {
    case TaskKind::VqeH2: return "vqe_h2";
    case TaskKind::VqeHeisenberg: return "vqe_heisenberg";
    case TaskKind::VqeTfim: return "vqe_tfim";
    case TaskKind::MaxCut: return "maxcut";
    case TaskKind::Classify: return "classify";
  }
  throw std::invalid_argument("unknown task");
}

inline TaskKind task_from_name(const std::string& s) {
  if (s == "vqe_h2") return TaskKind::VqeH2;
  if (s == "vqe_heisenberg") return TaskKind::VqeHeisenberg;
  if (s == "vqe_tfim") return TaskKind::VqeTfim;
  if (s == "maxcut") return TaskKind::MaxCut;
  if (s == "classify") return TaskKind::Classify;
  throw ConfigError("unknown task: " + s);
}

inline const char* engine_name(EngineKind e) {
  return e == EngineKind::Supernet ? "supernet" : "dqas";
}

inline EngineKind engine_from_name(const std::string& s) {
  if (s == "supernet") return EngineKind::Supernet;
  if (s == "dqas") return EngineKind::Dqas;
  throw ConfigError("unknown engine: " + s);
}

inline const char* mode_name(ModeKind m) { return m == ModeKind::Baseline ? "baseline" : "tdgt"; }

inline ModeKind mode_from_name(const std::string& s) {
  if (s == "baseline") return ModeKind::Baseline;
  if (s == "tdgt") return ModeKind::TdGt;
  throw ConfigError("unknown mode: " + s);
}

inline int task_default_qubits(TaskKind t) {
  switch (t) {
    case TaskKind::VqeH2: return 4;
    case TaskKind::VqeHeisenberg: return 5;
    case TaskKind::VqeTfim: return 6;
    case TaskKind::MaxCut: return 10;
    case TaskKind::Classify: return 8;
  }
  throw std::invalid_argument("unknown task");
}

struct TaskSettings {
  int n_qubits = 0;  // 0 = task default
  // maxcut
  int n_graphs = 10;
  double edge_prob = 0.5;
  std::uint64_t graph_seed = 424242;  // problem instance fixed across run seeds
  bool plus_start = false;            // start from H^n |0^n>
  // classification
  int n_train = 100;
  int n_test = 50;
  int batch_size = 32;
  std::uint64_t dataset_seed = 99;
  double band_low_min = 0.10, band_low_max = 0.20;
  double band_high_min = 0.40, band_high_max = 0.50;
};

struct SupernetSettings {
  int n_layers = 3;
  GateSet gateset{{GateKind::I, GateKind::Ry, GateKind::Rz}, {GateKind::CNOT, GateKind::CI}};
  GateSet td_gateset{{GateKind::Ry, GateKind::I}, {GateKind::CNOT, GateKind::CI}};
  GateSet gt_gateset{{GateKind::Ry, GateKind::Rz}, {GateKind::CNOT}};
  int n_experts = 5;
  int t_total = 500;
  int t_warm = 200;
  int n_search = 500;
  int td_n_experts = 1;
  int td_t_total = 200;
  int td_t_warm = 100;
  int td_n_search = 500;
  int gt_n_search = 500;
  int gt_t_extra = 1;
};

struct DqasSettings {
  int n_gates = 36;
  GateSet gateset{{GateKind::Rx, GateKind::Ry, GateKind::Rz},
                  {GateKind::XX, GateKind::YY, GateKind::ZZ}};
  GateKind td_single = GateKind::Rx;
  GateKind td_double = GateKind::XX;
  GateSet gt_gateset{{GateKind::Rx, GateKind::Ry, GateKind::Rz},
                     {GateKind::XX, GateKind::YY, GateKind::ZZ}};
  int n_batch = 32;
  int n_train = 500;
  double lr_structure = 0.1;
  int td_n_batch = 8;
  int td_n_train = 150;
  int gt_n_batch = 8;
  int gt_n_train = 50;
};

struct RunConfig {
  TaskKind task = TaskKind::VqeH2;
  EngineKind engine = EngineKind::Supernet;
  ModeKind mode = ModeKind::TdGt;
  std::uint64_t seed = 0;
  std::string out;
  NoiseConfig noise;
  TrainConfig train;
  TaskSettings task_settings;
  SupernetSettings supernet;
  DqasSettings dqas;
  HypothesisConfig hypothesis;
  CorrelationConfig correlation;

  static RunConfig from_ini(const IniFile& ini) {
    RunConfig cfg;
    cfg.task = task_from_name(ini.require("run", "task"));
    cfg.engine = engine_from_name(ini.require("run", "engine"));
    cfg.mode = mode_from_name(ini.get("run", "mode", "tdgt"));
    cfg.seed = ini.get_u64("run", "seed", 0);
    if (!ini.has("run", "seed")) throw ConfigError("missing required key run.seed");
    cfg.out = ini.get("run", "out", "");

    cfg.noise.enabled = ini.get_bool("noise", "enabled", false);
    cfg.noise.p_single_depol = ini.get_double("noise", "p_single", cfg.noise.p_single_depol);
    cfg.noise.p_double_depol = ini.get_double("noise", "p_double", cfg.noise.p_double_depol);
    cfg.noise.p_bitflip = ini.get_double("noise", "p_bitflip", cfg.noise.p_bitflip);

    cfg.train.max_iters = ini.get_int("trainer", "max_iters", cfg.train.max_iters);
    cfg.train.learning_rate = ini.get_double("trainer", "learning_rate", cfg.train.learning_rate);
    if (ini.has("trainer", "optimizer")) {
      try {
        cfg.train.optimizer = optimizer_from_name(ini.get("trainer", "optimizer", "adam"));
      } catch (const std::invalid_argument& e) {
        throw ConfigError(e.what());
      }
    }
    cfg.train.restarts = ini.get_int("trainer", "restarts", cfg.train.restarts);
    cfg.train.init_scale = ini.get_double("trainer", "init_scale", cfg.train.init_scale);
    cfg.train.seed = cfg.seed;

    TaskSettings& t = cfg.task_settings;
    t.n_qubits = ini.get_int("task", "n_qubits", t.n_qubits);
    t.n_graphs = ini.get_int("task", "n_graphs", t.n_graphs);
    t.edge_prob = ini.get_double("task", "edge_prob", t.edge_prob);
    t.graph_seed = ini.get_u64("task", "graph_seed", t.graph_seed);
    t.plus_start = ini.get_bool("task", "plus_start", t.plus_start);
    t.n_train = ini.get_int("task", "n_train", t.n_train);
    t.n_test = ini.get_int("task", "n_test", t.n_test);
    t.batch_size = ini.get_int("task", "batch_size", t.batch_size);
    t.dataset_seed = ini.get_u64("task", "dataset_seed", t.dataset_seed);
    t.band_low_min = ini.get_double("task", "band_low_min", t.band_low_min);
    t.band_low_max = ini.get_double("task", "band_low_max", t.band_low_max);
    t.band_high_min = ini.get_double("task", "band_high_min", t.band_high_min);
    t.band_high_max = ini.get_double("task", "band_high_max", t.band_high_max);

    SupernetSettings& s = cfg.supernet;
    s.n_layers = ini.get_int("supernet", "n_layers", s.n_layers);
    if (ini.has("supernet", "gateset")) s.gateset = parse_gateset(ini.get("supernet", "gateset", ""));
    if (ini.has("supernet", "td_gateset"))
      s.td_gateset = parse_gateset(ini.get("supernet", "td_gateset", ""));
    if (ini.has("supernet", "gt_gateset"))
      s.gt_gateset = parse_gateset(ini.get("supernet", "gt_gateset", ""));
    s.n_experts = ini.get_int("supernet", "n_experts", s.n_experts);
    s.t_total = ini.get_int("supernet", "t_total", s.t_total);
    s.t_warm = ini.get_int("supernet", "t_warm", s.t_warm);
    s.n_search = ini.get_int("supernet", "n_search", s.n_search);
    s.td_n_experts = ini.get_int("supernet", "td_n_experts", s.td_n_experts);
    s.td_t_total = ini.get_int("supernet", "td_t_total", s.td_t_total);
    s.td_t_warm = ini.get_int("supernet", "td_t_warm", s.td_t_warm);
    s.td_n_search = ini.get_int("supernet", "td_n_search", s.td_n_search);
    s.gt_n_search = ini.get_int("supernet", "gt_n_search", s.gt_n_search);
    s.gt_t_extra = ini.get_int("supernet", "gt_t_extra", s.gt_t_extra);

    DqasSettings& d = cfg.dqas;
    d.n_gates = ini.get_int("dqas", "n_gates", d.n_gates);
    if (ini.has("dqas", "gateset")) d.gateset = parse_gateset(ini.get("dqas", "gateset", ""));
    if (ini.has("dqas", "td_single")) d.td_single = kind_from_name(ini.get("dqas", "td_single", ""));
    if (ini.has("dqas", "td_double")) d.td_double = kind_from_name(ini.get("dqas", "td_double", ""));
    if (ini.has("dqas", "gt_gateset"))
      d.gt_gateset = parse_gateset(ini.get("dqas", "gt_gateset", ""));
    d.n_batch = ini.get_int("dqas", "n_batch", d.n_batch);
    d.n_train = ini.get_int("dqas", "n_train", d.n_train);
    d.lr_structure = ini.get_double("dqas", "lr_structure", d.lr_structure);
    d.td_n_batch = ini.get_int("dqas", "td_n_batch", d.td_n_batch);
    d.td_n_train = ini.get_int("dqas", "td_n_train", d.td_n_train);
    d.gt_n_batch = ini.get_int("dqas", "gt_n_batch", d.gt_n_batch);
    d.gt_n_train = ini.get_int("dqas", "gt_n_train", d.gt_n_train);

    HypothesisConfig& h = cfg.hypothesis;
    h.n_originals = ini.get_int("hypothesis", "n_originals", h.n_originals);
    h.n_variants = ini.get_int("hypothesis", "n_variants", h.n_variants);
    h.n_gates = ini.get_int("hypothesis", "n_gates", h.n_gates);
    h.fraction = ini.get_double("hypothesis", "fraction", h.fraction);
    h.n_bins = ini.get_int("hypothesis", "n_bins", h.n_bins);
    if (ini.has("hypothesis", "gateset"))
      h.gateset = parse_gateset(ini.get("hypothesis", "gateset", ""));
    h.train = cfg.train;
    h.noise = cfg.noise;
    h.train.restarts = ini.get_int("hypothesis", "restarts", h.train.restarts);
    h.train.max_iters = ini.get_int("hypothesis", "max_iters", h.train.max_iters);

    CorrelationConfig& c = cfg.correlation;
    c.n_topologies = ini.get_int("correlation", "n_topologies", c.n_topologies);
    c.n_assignments = ini.get_int("correlation", "n_assignments", c.n_assignments);
    c.n_gates = ini.get_int("correlation", "n_gates", c.n_gates);
    if (ini.has("correlation", "gateset"))
      c.gateset = parse_gateset(ini.get("correlation", "gateset", ""));
    if (ini.has("correlation", "instantiations"))
      c.instantiations = parse_instantiations(ini.get("correlation", "instantiations", ""));
    c.train = cfg.train;
    c.noise = cfg.noise;
    c.train.restarts = ini.get_int("correlation", "restarts", c.train.restarts);
    c.train.max_iters = ini.get_int("correlation", "max_iters", c.train.max_iters);

    return cfg;
  }

  int n_qubits() const {
    return task_settings.n_qubits > 0 ? task_settings.n_qubits : task_default_qubits(task);
  }

  void validate() const {
    if (task == TaskKind::VqeH2 && n_qubits() != 4)
      throw ConfigError("the hydrogen task is fixed at 4 qubits");
    if (n_qubits() < 2) throw ConfigError("need at least 2 qubits");
    try {
      noise.validate();
      train.validate();
    } catch (const std::exception& e) {
      throw ConfigError(e.what());
    }
    if (task == TaskKind::MaxCut) {
      if (task_settings.n_graphs < 1) throw ConfigError("maxcut needs at least one graph");
      if (task_settings.edge_prob < 0.0 || task_settings.edge_prob > 1.0)
        throw ConfigError("edge_prob must be in [0, 1]");
    }
    if (task == TaskKind::Classify) {
      if (task_settings.n_train < 2 || task_settings.n_test < 2)
        throw ConfigError("classification needs train and test sets");
      if (task_settings.batch_size < 1) throw ConfigError("batch_size must be >= 1");
    }
  }
};

}  // namespace tdqas
