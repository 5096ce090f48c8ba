#pragma once

#include <boost/multiprecision/cpp_int.hpp>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <vector>

#include "tdqas/circuit.hpp"

namespace tdqas {

using BigInt = boost::multiprecision::cpp_int;
using BigRational = boost::multiprecision::cpp_rational;

struct SearchSpaceReport {
  BigInt joint_size;
  BigInt topo_size;
  BigInt gate_size_min;
  BigInt gate_size_max;
  std::optional<int> x;            // single-slot count when a topology is fixed
  BigRational R;                   // (topo + gate) / joint
  BigRational compression_factor;  // joint / (topo + gate)
};

inline BigInt ipow(const BigInt& base, int exp) {
  if (exp < 0) throw std::invalid_argument("negative exponent");
  BigInt r = 1, b = base;
  while (exp > 0) {
    if (exp & 1) r *= b;
    b *= b;
    exp >>= 1;
  }
  return r;
}

namespace detail {

inline SearchSpaceReport finish_report(SearchSpaceReport rep) {
  // decoupled phases run sequentially, so their costs add; without a fixed
  // topology the worst-case gate space is used
  BigInt proposed = rep.topo_size + rep.gate_size_max;
  rep.R = BigRational(proposed, rep.joint_size);
  rep.compression_factor = BigRational(rep.joint_size, proposed);
  return rep;
}

}  // namespace detail

// Sequence form: a circuit is n_gates elements, each (kind, ring position).
//   joint = (n_qubits * (|singles| + |doubles|))^n_gates
//   topo  = (2 * n_qubits)^n_gates
//   gate  = |singles|^x * |doubles|^(n_gates - x) for a topology with x single slots
inline SearchSpaceReport sequence_space_sizes(const GateSet& gateset, int n_qubits, int n_gates,
                                              const std::optional<Topology>& topology = {}) {
  gateset.validate();
  if (n_qubits < 1 || n_gates < 0) throw std::invalid_argument("bad dimensions");
  BigInt ns(gateset.singles.size()), nd(gateset.doubles.size());
  SearchSpaceReport rep;
  rep.joint_size = ipow(BigInt(n_qubits) * (ns + nd), n_gates);
  rep.topo_size = ipow(BigInt(2) * n_qubits, n_gates);
  if (topology) {
    if (static_cast<int>(topology->slots.size()) != n_gates)
      throw std::invalid_argument("topology slot count != n_gates");
    int x = 0;
    for (const auto& s : topology->slots) x += s.slot == SlotKind::Single ? 1 : 0;
    rep.x = x;
    BigInt gate = ipow(ns, x) * ipow(nd, n_gates - x);
    rep.gate_size_min = rep.gate_size_max = gate;
  } else {
    BigInt lo = ipow(ns, n_gates), hi = lo;
    for (int x = 0; x <= n_gates; ++x) {
      BigInt g = ipow(ns, x) * ipow(nd, n_gates - x);
      if (g < lo) lo = g;
      if (g > hi) hi = g;
    }
    rep.gate_size_min = lo;
    rep.gate_size_max = hi;
  }
  return detail::finish_report(rep);
}

// Layered grid topology: per layer and qubit, one single slot and one double
// slot, each either active (a gate goes there) or inactive (identity).
struct LayeredTopology {
  int n_qubits = 0;
  int n_layers = 0;
  std::vector<std::uint8_t> single_active;  // [layer * n_qubits + q]
  std::vector<std::uint8_t> double_active;

  int count_active_singles() const {
    int c = 0;
    for (auto v : single_active) c += v ? 1 : 0;
    return c;
  }
  int count_active_doubles() const {
    int c = 0;
    for (auto v : double_active) c += v ? 1 : 0;
    return c;
  }
};

// Layered form:
//   joint = (|singles|^Nq * |doubles|^Nq)^Nl  (identity kinds included in pools)
//   topo  = (2^Nq * 2^Nq)^Nl                  (each slot: active or not)
//   gate  = counts only active slots, over the non-identity kinds
inline SearchSpaceReport layered_space_sizes(const GateSet& gateset, int n_qubits, int n_layers,
                                             const std::optional<LayeredTopology>& topology = {}) {
  gateset.validate();
  if (n_qubits < 1 || n_layers < 0) throw std::invalid_argument("bad dimensions");
  BigInt ns(gateset.singles.size()), nd(gateset.doubles.size());
  int ns_act = 0, nd_act = 0;
  for (auto k : gateset.singles) ns_act += is_identity(k) ? 0 : 1;
  for (auto k : gateset.doubles) nd_act += is_identity(k) ? 0 : 1;

  SearchSpaceReport rep;
  rep.joint_size = ipow(ipow(ns, n_qubits) * ipow(nd, n_qubits), n_layers);
  rep.topo_size = ipow(ipow(BigInt(4), n_qubits), n_layers);
  if (topology) {
    if (topology->n_qubits != n_qubits || topology->n_layers != n_layers ||
        topology->single_active.size() != static_cast<std::size_t>(n_qubits * n_layers) ||
        topology->double_active.size() != static_cast<std::size_t>(n_qubits * n_layers))
      throw std::invalid_argument("layered topology shape mismatch");
    int as = topology->count_active_singles();
    int ad = topology->count_active_doubles();
    rep.x = as;
    BigInt gate = ipow(BigInt(ns_act), as) * ipow(BigInt(nd_act), ad);
    rep.gate_size_min = rep.gate_size_max = gate;
  } else {
    rep.gate_size_min = 1;  // all slots inactive
    rep.gate_size_max =
        ipow(ipow(BigInt(ns_act), n_qubits) * ipow(BigInt(nd_act), n_qubits), n_layers);
  }
  return detail::finish_report(rep);
}

}  // namespace tdqas
