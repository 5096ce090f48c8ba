#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"
#include "tdqas/rng.hpp"

namespace tdqas {

enum class GateKind : std::uint8_t { Rx, Ry, Rz, I, XX, YY, ZZ, CNOT, CI };

inline bool is_single(GateKind k) {
  return k == GateKind::Rx || k == GateKind::Ry || k == GateKind::Rz || k == GateKind::I;
}

inline bool is_double(GateKind k) { return !is_single(k); }

inline bool is_parameterized(GateKind k) {
  switch (k) {
    case GateKind::Rx:
    case GateKind::Ry:
    case GateKind::Rz:
    case GateKind::XX:
    case GateKind::YY:
    case GateKind::ZZ:
      return true;
    default:
      return false;
  }
}

inline bool is_identity(GateKind k) { return k == GateKind::I || k == GateKind::CI; }

inline const char* kind_name(GateKind k) {
  switch (k) {
    case GateKind::Rx: return "Rx";
    case GateKind::Ry: return "Ry";
    case GateKind::Rz: return "Rz";
    case GateKind::I: return "I";
    case GateKind::XX: return "XX";
    case GateKind::YY: return "YY";
    case GateKind::ZZ: return "ZZ";
    case GateKind::CNOT: return "CNOT";
    case GateKind::CI: return "CI";
  }
  throw std::invalid_argument("unknown gate kind");
}

inline GateKind kind_from_name(const std::string& s) {
  if (s == "Rx") return GateKind::Rx;
  if (s == "Ry") return GateKind::Ry;
  if (s == "Rz") return GateKind::Rz;
  if (s == "I") return GateKind::I;
  if (s == "XX") return GateKind::XX;
  if (s == "YY") return GateKind::YY;
  if (s == "ZZ") return GateKind::ZZ;
  if (s == "CNOT") return GateKind::CNOT;
  if (s == "CI") return GateKind::CI;
  throw std::invalid_argument("unknown gate kind: " + s);
}

struct GateElement {
  GateKind kind;
  int position;  // ring index; single -> qubit p, double -> qubits (p, (p+1) mod n)
};

struct Circuit {
  int n_qubits = 0;
  std::vector<GateElement> elements;

  int n_params() const {
    int c = 0;
    for (const auto& e : elements) c += is_parameterized(e.kind) ? 1 : 0;
    return c;
  }

  int n_active_gates() const {
    int c = 0;
    for (const auto& e : elements) c += is_identity(e.kind) ? 0 : 1;
    return c;
  }

  void validate() const {
    if (n_qubits < 1) throw std::invalid_argument("circuit needs >= 1 qubit");
    for (const auto& e : elements) {
      if (e.position < 0 || e.position >= n_qubits)
        throw std::invalid_argument("gate position out of range");
      if (is_double(e.kind) && n_qubits < 2)
        throw std::invalid_argument("two-qubit gate on a 1-qubit circuit");
    }
  }
};

enum class SlotKind : std::uint8_t { Single, Double };

struct Placeholder {
  SlotKind slot;
  int position;
};

struct Topology {
  int n_qubits = 0;
  std::vector<Placeholder> slots;

  bool operator==(const Topology& o) const {
    if (n_qubits != o.n_qubits || slots.size() != o.slots.size()) return false;
    for (std::size_t i = 0; i < slots.size(); ++i)
      if (slots[i].slot != o.slots[i].slot || slots[i].position != o.slots[i].position)
        return false;
    return true;
  }
};

struct GateSet {
  std::vector<GateKind> singles;
  std::vector<GateKind> doubles;

  void validate() const {
    for (auto k : singles)
      if (!is_single(k)) throw std::invalid_argument("double-arity kind in singles");
    for (auto k : doubles)
      if (!is_double(k)) throw std::invalid_argument("single-arity kind in doubles");
  }

  std::size_t total_kinds() const { return singles.size() + doubles.size(); }
};

inline Topology topology_of(const Circuit& c) {
  Topology t;
  t.n_qubits = c.n_qubits;
  t.slots.reserve(c.elements.size());
  for (const auto& e : c.elements)
    t.slots.push_back({is_single(e.kind) ? SlotKind::Single : SlotKind::Double, e.position});
  return t;
}

inline Circuit instantiate(const Topology& t, GateKind single_gate, GateKind double_gate) {
  if (!is_single(single_gate)) throw std::invalid_argument("single_gate has double arity");
  if (!is_double(double_gate)) throw std::invalid_argument("double_gate has single arity");
  Circuit c;
  c.n_qubits = t.n_qubits;
  c.elements.reserve(t.slots.size());
  for (const auto& s : t.slots)
    c.elements.push_back({s.slot == SlotKind::Single ? single_gate : double_gate, s.position});
  return c;
}

// Replaces the kind of exactly ceil(fraction * n_elements) elements (chosen
// uniformly without replacement) by a uniformly random different kind of the
// same arity from `gateset`.  Positions, order, and topology are untouched.
inline Circuit mutate_gate_types(const Circuit& c, double fraction, const GateSet& gateset,
                                 Rng& rng) {
  if (!(fraction > 0.0) || fraction > 1.0)
    throw std::invalid_argument("mutation fraction must be in (0, 1]");
  Circuit out = c;
  if (out.elements.empty()) return out;
  std::size_t n = out.elements.size();
  auto n_mut = static_cast<std::size_t>(std::ceil(fraction * static_cast<double>(n)));
  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;
  rng.shuffle(order);
  for (std::size_t i = 0; i < n_mut; ++i) {
    GateElement& e = out.elements[order[i]];
    const auto& pool = is_single(e.kind) ? gateset.singles : gateset.doubles;
    std::vector<GateKind> others;
    for (auto k : pool)
      if (k != e.kind) others.push_back(k);
    if (others.empty())
      throw std::invalid_argument("gate set has no alternative kind of the required arity");
    e.kind = others[rng.uniform_index(others.size())];
  }
  return out;
}

inline Circuit random_circuit(const GateSet& gateset, int n_qubits, int n_gates, Rng& rng) {
  if (n_gates < 0) throw std::invalid_argument("negative gate count");
  if (gateset.singles.empty() && gateset.doubles.empty())
    throw std::invalid_argument("empty gate set");
  gateset.validate();
  Circuit c;
  c.n_qubits = n_qubits;
  c.elements.reserve(static_cast<std::size_t>(n_gates));
  std::size_t n_kinds = gateset.total_kinds();
  for (int g = 0; g < n_gates; ++g) {
    std::size_t k = rng.uniform_index(n_kinds);
    GateKind kind =
        k < gateset.singles.size() ? gateset.singles[k] : gateset.doubles[k - gateset.singles.size()];
    c.elements.push_back({kind, rng.uniform_int(n_qubits)});
  }
  c.validate();
  return c;
}

// --- JSON (schema shared by circuits and topologies) ------------------------

inline nlohmann::json circuit_to_json(const Circuit& c) {
  nlohmann::json j;
  j["n_qubits"] = c.n_qubits;
  j["elements"] = nlohmann::json::array();
  for (const auto& e : c.elements)
    j["elements"].push_back({{"kind", kind_name(e.kind)}, {"pos", e.position}});
  return j;
}

inline nlohmann::json topology_to_json(const Topology& t) {
  nlohmann::json j;
  j["n_qubits"] = t.n_qubits;
  j["elements"] = nlohmann::json::array();
  for (const auto& s : t.slots)
    j["elements"].push_back(
        {{"kind", s.slot == SlotKind::Single ? "single" : "double"}, {"pos", s.position}});
  return j;
}

inline Circuit circuit_from_json(const nlohmann::json& j) {
  Circuit c;
  c.n_qubits = j.at("n_qubits").get<int>();
  for (const auto& e : j.at("elements"))
    c.elements.push_back({kind_from_name(e.at("kind").get<std::string>()), e.at("pos").get<int>()});
  c.validate();
  return c;
}

inline Topology topology_from_json(const nlohmann::json& j) {
  Topology t;
  t.n_qubits = j.at("n_qubits").get<int>();
  for (const auto& e : j.at("elements")) {
    std::string kind = e.at("kind").get<std::string>();
    if (kind != "single" && kind != "double")
      throw std::invalid_argument("topology slot kind must be 'single' or 'double'");
    t.slots.push_back({kind == "single" ? SlotKind::Single : SlotKind::Double,
                       e.at("pos").get<int>()});
  }
  return t;
}

}  // namespace tdqas
