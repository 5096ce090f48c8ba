#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <map>
#include <utility>
#include <vector>

#include "tdqas/circuit.hpp"
#include "tdqas/rng.hpp"

using namespace tdqas;

namespace {

const GateSet kFullParam{{GateKind::Rx, GateKind::Ry, GateKind::Rz},
                         {GateKind::XX, GateKind::YY, GateKind::ZZ}};

Topology random_topology(int n_qubits, int n_slots, Rng& rng) {
  Topology t;
  t.n_qubits = n_qubits;
  for (int i = 0; i < n_slots; ++i)
    t.slots.push_back({rng.uniform_int(2) ? SlotKind::Single : SlotKind::Double,
                       rng.uniform_int(n_qubits)});
  return t;
}

}  // namespace

TEST_CASE("kind predicates match the alphabet") {
  for (auto k : {GateKind::Rx, GateKind::Ry, GateKind::Rz, GateKind::I}) REQUIRE(is_single(k));
  for (auto k : {GateKind::XX, GateKind::YY, GateKind::ZZ, GateKind::CNOT, GateKind::CI})
    REQUIRE(is_double(k));
  for (auto k : {GateKind::Rx, GateKind::Ry, GateKind::Rz, GateKind::XX, GateKind::YY, GateKind::ZZ})
    REQUIRE(is_parameterized(k));
  for (auto k : {GateKind::I, GateKind::CNOT, GateKind::CI}) REQUIRE(!is_parameterized(k));
}

TEST_CASE("kind names round trip") {
  for (auto k : {GateKind::Rx, GateKind::Ry, GateKind::Rz, GateKind::I, GateKind::XX, GateKind::YY,
                 GateKind::ZZ, GateKind::CNOT, GateKind::CI})
    REQUIRE(kind_from_name(kind_name(k)) == k);
  REQUIRE_THROWS_AS(kind_from_name("Hadamard"), std::invalid_argument);
}

TEST_CASE("topology_of erases kinds to arity classes") {
  Circuit c{2, {{GateKind::Rx, 0}, {GateKind::ZZ, 1}}};
  Topology t = topology_of(c);
  REQUIRE(t.slots.size() == 2);
  REQUIRE(t.slots[0].slot == SlotKind::Single);
  REQUIRE(t.slots[0].position == 0);
  REQUIRE(t.slots[1].slot == SlotKind::Double);
  REQUIRE(t.slots[1].position == 1);
}

TEST_CASE("topology_of on the seven-element sequence") {
  Circuit c{3,
            {{GateKind::Rx, 0},
             {GateKind::Rz, 2},
             {GateKind::YY, 0},
             {GateKind::XX, 1},
             {GateKind::Ry, 1},
             {GateKind::ZZ, 0},
             {GateKind::Rz, 2}}};
  Topology t = topology_of(c);
  std::vector<std::pair<SlotKind, int>> expected{
      {SlotKind::Single, 0}, {SlotKind::Single, 2}, {SlotKind::Double, 0}, {SlotKind::Double, 1},
      {SlotKind::Single, 1}, {SlotKind::Double, 0}, {SlotKind::Single, 2}};
  REQUIRE(t.slots.size() == expected.size());
  for (std::size_t i = 0; i < expected.size(); ++i) {
    REQUIRE(t.slots[i].slot == expected[i].first);
    REQUIRE(t.slots[i].position == expected[i].second);
  }
}

TEST_CASE("identity kinds map to placeholders of their arity") {
  Circuit c{2, {{GateKind::I, 1}, {GateKind::CI, 0}}};
  Topology t = topology_of(c);
  REQUIRE(t.slots[0].slot == SlotKind::Single);
  REQUIRE(t.slots[1].slot == SlotKind::Double);
}

TEST_CASE("instantiate substitutes slot-wise") {
  Topology t{2, {{SlotKind::Single, 0}, {SlotKind::Double, 1}}};
  Circuit rx = instantiate(t, GateKind::Rx, GateKind::XX);
  REQUIRE(rx.elements[0].kind == GateKind::Rx);
  REQUIRE(rx.elements[0].position == 0);
  REQUIRE(rx.elements[1].kind == GateKind::XX);
  REQUIRE(rx.elements[1].position == 1);

  Circuit ry = instantiate(t, GateKind::Ry, GateKind::YY);
  REQUIRE(ry.elements[0].kind == GateKind::Ry);
  REQUIRE(ry.elements[1].kind == GateKind::YY);

  Circuit empty = instantiate(Topology{3, {}}, GateKind::Rx, GateKind::XX);
  REQUIRE(empty.elements.empty());

  REQUIRE_THROWS_AS(instantiate(t, GateKind::XX, GateKind::XX), std::invalid_argument);
  REQUIRE_THROWS_AS(instantiate(t, GateKind::Rx, GateKind::Ry), std::invalid_argument);
}

TEST_CASE("instantiation round trip recovers the topology") {
  Rng rng(2024);
  for (int trial = 0; trial < 1000; ++trial) {
    Topology t = random_topology(2 + rng.uniform_int(5), rng.uniform_int(12), rng);
    REQUIRE(topology_of(instantiate(t, GateKind::Rx, GateKind::XX)) == t);
  }
}

TEST_CASE("mutation changes exactly ceil(fraction*N) kinds") {
  Rng rng(1);
  Circuit c = random_circuit(kFullParam, 6, 35, rng);
  Circuit m = mutate_gate_types(c, 0.2, kFullParam, rng);
  int changed = 0;
  for (std::size_t i = 0; i < c.elements.size(); ++i) {
    REQUIRE(m.elements[i].position == c.elements[i].position);
    changed += m.elements[i].kind != c.elements[i].kind;
  }
  REQUIRE(changed == 7);  // ceil(0.2 * 35)
}

TEST_CASE("mutation with a two-kind pool forces the swap") {
  Rng rng(3);
  Circuit c{1, {{GateKind::Rx, 0}}};
  GateSet gs{{GateKind::Rx, GateKind::Ry}, {}};
  Circuit m = mutate_gate_types(c, 1.0, gs, rng);
  REQUIRE(m.elements[0].kind == GateKind::Ry);
}

TEST_CASE("mutation preserves topology") {
  Rng rng(17);
  for (int trial = 0; trial < 1000; ++trial) {
    Circuit c = random_circuit(kFullParam, 2 + rng.uniform_int(5), 1 + rng.uniform_int(20), rng);
    double fraction = 0.05 + 0.95 * rng.uniform();
    Circuit m = mutate_gate_types(c, fraction, kFullParam, rng);
    REQUIRE(topology_of(m) == topology_of(c));
    auto n_mut = static_cast<std::size_t>(
        std::ceil(fraction * static_cast<double>(c.elements.size())));
    std::size_t changed = 0;
    for (std::size_t i = 0; i < c.elements.size(); ++i)
      changed += m.elements[i].kind != c.elements[i].kind;
    REQUIRE(changed == n_mut);
  }
}

TEST_CASE("mutation errors") {
  Rng rng(4);
  Circuit c{1, {{GateKind::Rx, 0}}};
  REQUIRE_THROWS_AS(mutate_gate_types(c, 0.0, kFullParam, rng), std::invalid_argument);
  REQUIRE_THROWS_AS(mutate_gate_types(c, 1.5, kFullParam, rng), std::invalid_argument);
  GateSet singleton{{GateKind::Rx}, {GateKind::XX}};
  REQUIRE_THROWS_AS(mutate_gate_types(c, 1.0, singleton, rng), std::invalid_argument);
}

TEST_CASE("random_circuit basics") {
  Rng rng(5);
  REQUIRE(random_circuit(kFullParam, 4, 0, rng).elements.empty());

  GateSet only_rx{{GateKind::Rx}, {}};
  Circuit c = random_circuit(only_rx, 3, 50, rng);
  for (const auto& e : c.elements) {
    REQUIRE(e.kind == GateKind::Rx);
    REQUIRE(e.position >= 0);
    REQUIRE(e.position < 3);
  }

  REQUIRE_THROWS_AS(random_circuit(GateSet{{}, {}}, 3, 1, rng), std::invalid_argument);
}

TEST_CASE("random_circuit kind frequencies are uniform (chi-square)") {
  Rng rng(6);
  const int n = 100000;
  Circuit c = random_circuit(kFullParam, 4, n, rng);
  std::map<GateKind, int> counts;
  for (const auto& e : c.elements) ++counts[e.kind];
  REQUIRE(counts.size() == 6);
  double expected = n / 6.0, chi2 = 0.0;
  for (auto& [k, cnt] : counts) chi2 += (cnt - expected) * (cnt - expected) / expected;
  REQUIRE(chi2 < 25.0);  // 5 dof, far tail
}

TEST_CASE("parameter and active-gate counts") {
  Circuit c{4,
            {{GateKind::Rx, 0},
             {GateKind::I, 1},
             {GateKind::CNOT, 2},
             {GateKind::CI, 3},
             {GateKind::ZZ, 1}}};
  REQUIRE(c.n_params() == 2);
  REQUIRE(c.n_active_gates() == 3);
}

TEST_CASE("circuit json round trip") {
  Circuit c{3, {{GateKind::Rx, 0}, {GateKind::CNOT, 2}, {GateKind::ZZ, 1}}};
  auto j = circuit_to_json(c);
  REQUIRE(j["n_qubits"] == 3);
  REQUIRE(j["elements"][0]["kind"] == "Rx");
  REQUIRE(j["elements"][0]["pos"] == 0);
  REQUIRE(j["elements"][1]["kind"] == "CNOT");
  Circuit back = circuit_from_json(j);
  REQUIRE(back.n_qubits == 3);
  REQUIRE(back.elements.size() == 3);
  REQUIRE(back.elements[2].kind == GateKind::ZZ);
  REQUIRE(back.elements[2].position == 1);
}

TEST_CASE("topology json uses single/double kinds") {
  Topology t{2, {{SlotKind::Single, 0}, {SlotKind::Double, 1}}};
  auto j = topology_to_json(t);
  REQUIRE(j["elements"][0]["kind"] == "single");
  REQUIRE(j["elements"][1]["kind"] == "double");
  Topology back = topology_from_json(j);
  REQUIRE(back == t);
  REQUIRE_THROWS_AS(topology_from_json(circuit_to_json(Circuit{1, {{GateKind::Rx, 0}}})),
                    std::invalid_argument);
}
