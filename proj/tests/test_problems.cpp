#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <numbers>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "tdqas/problems.hpp"
#include "tdqas/rng.hpp"
#include "tdqas/simulator.hpp"

using namespace tdqas;

namespace {

constexpr double kPi = std::numbers::pi;

// cut size of the partition encoded by bitmask b
int cut_of(const Graph& g, unsigned b) {
  int c = 0;
  for (auto [i, j] : g.edges)
    if (((b >> i) & 1u) != ((b >> j) & 1u)) ++c;
  return c;
}

}  // namespace

TEST_CASE("transverse-field Ising chain has the expected terms and spectrum") {
  PauliSum h2 = tfim(2);
  CHECK(h2.terms().size() == 3);  // doubled ZZ bond merges, plus two X terms
  CHECK(exact_min_eigenvalue(h2).first == Catch::Approx(-2.0 * std::sqrt(2.0)).epsilon(1e-12));

  PauliSum h6 = tfim(6);
  CHECK(h6.terms().size() == 12);
  for (const auto& t : h6.terms()) CHECK(t.coeff < 0.0);
  CHECK(exact_min_eigenvalue(h6).first ==
        Catch::Approx(-7.727406610312544).epsilon(1e-12));

  CHECK_THROWS_AS(tfim(1), std::invalid_argument);
}

TEST_CASE("Heisenberg ring matches the known 5-qubit ground energy") {
  PauliSum h = heisenberg(5);
  CHECK(h.terms().size() == 20);  // 5 bonds x {XX,YY,ZZ} + 5 field terms
  CHECK(exact_min_eigenvalue(h).first == Catch::Approx(-8.472135955).margin(1e-6));
}

TEST_CASE("hydrogen Hamiltonian loads and reproduces its ground energy") {
  PauliSum h = hydrogen();
  CHECK(h.n_qubits() == 4);
  CHECK(exact_min_eigenvalue(h).first == Catch::Approx(-1.136180000090).margin(1e-6));
}

TEST_CASE("random graphs honor the edge probability extremes") {
  Rng rng(7);
  Graph none = er_graph(6, 0.0, rng);
  CHECK(none.edges.empty());
  Graph all = er_graph(6, 1.0, rng);
  CHECK(all.edges.size() == 15);

  double mean = 0.0;
  const int trials = 200;
  for (int t = 0; t < trials; ++t) mean += static_cast<double>(er_graph(8, 0.5, rng).edges.size());
  mean /= trials;
  CHECK(mean > 11.0);  // expectation 14, generous bounds
  CHECK(mean < 17.0);

  Rng a(42), b(42);
  CHECK(er_graph(9, 0.5, a).edges == er_graph(9, 0.5, b).edges);
}

TEST_CASE("graph text round-trips") {
  Rng rng(3);
  Graph g = er_graph(7, 0.4, rng);
  std::stringstream ss;
  g.write(ss);
  Graph back = Graph::parse(ss, g.n_nodes);
  CHECK(back.n_nodes == g.n_nodes);
  CHECK(back.edges == g.edges);
}

TEST_CASE("max-cut brute force matches hand counts") {
  Graph tri{3, {{0, 1}, {0, 2}, {1, 2}}};
  CHECK(maxcut_brute_force(tri) == 2);

  Graph cycle{4, {{0, 1}, {0, 3}, {1, 2}, {2, 3}}};
  CHECK(maxcut_brute_force(cycle) == 4);

  Rng rng(11);
  Graph k10 = er_graph(10, 1.0, rng);
  CHECK(maxcut_brute_force(k10) == 25);
}

TEST_CASE("cut Hamiltonian expectation equals the partition cut on basis states") {
  Rng rng(5);
  Graph g = er_graph(5, 0.6, rng);
  PauliSum hc = maxcut_hamiltonian(g);
  for (unsigned b : {0u, 1u, 9u, 21u, 30u, 31u}) {
    auto st = QuantumState::zero_state(5);
    for (int q = 0; q < 5; ++q)
      if ((b >> q) & 1u) apply_single_qubit(st, GateKind::Rx, q, kPi);
    CHECK(expectation(st, hc) == Catch::Approx(static_cast<double>(cut_of(g, b))).margin(1e-10));
  }

  Graph empty{4, {}};
  auto zero = QuantumState::zero_state(4);
  CHECK(expectation(zero, maxcut_hamiltonian(empty)) == Catch::Approx(0.0).margin(1e-12));
}

TEST_CASE("entanglement dataset is balanced, banded, and deterministic") {
  Band lo{0.10, 0.20}, hi{0.40, 0.50};
  Dataset ds = generate_entanglement_dataset(4, 40, 12, lo, hi, Rng(123));
  REQUIRE(ds.train.size() == 40);
  REQUIRE(ds.test.size() == 12);

  auto check_split = [&](const std::vector<LabeledSample>& split) {
    int ones = 0;
    for (const auto& s : split) {
      ones += s.label;
      REQUIRE(s.features.size() == 4);
      double q = meyer_wallach_q(entanglement_reference_state(s.features));
      CHECK(q == Catch::Approx(s.entanglement).margin(1e-12));
      CHECK((s.label == 1 ? hi : lo).contains(q));
    }
    CHECK(ones * 2 == static_cast<int>(split.size()));
  };
  check_split(ds.train);
  check_split(ds.test);

  Dataset same = generate_entanglement_dataset(4, 40, 12, lo, hi, Rng(123));
  CHECK(same.train[0].features == ds.train[0].features);
  Dataset other = generate_entanglement_dataset(4, 40, 12, lo, hi, Rng(124));
  CHECK(other.train[0].features != ds.train[0].features);

  CHECK_THROWS_AS(generate_entanglement_dataset(4, 41, 12, lo, hi, Rng(1)),
                  std::invalid_argument);
  CHECK_THROWS_AS(generate_entanglement_dataset(4, 40, 12, Band{0.3, 0.45}, Band{0.4, 0.5}, Rng(1)),
                  std::invalid_argument);

  std::stringstream ss;
  ds.write_csv(ss);
  std::string header;
  std::getline(ss, header);
  CHECK(header == "f1,f2,f3,f4,label,Q");
  int rows = 0;
  for (std::string line; std::getline(ss, line);)
    if (!line.empty()) ++rows;
  CHECK(rows == 52);
}

TEST_CASE("MLP head forward/backward agree with finite differences") {
  MlpHead zero = MlpHead::zeros(4);
  std::vector<double> z{0.3, -0.2, 0.9, -0.7};
  CHECK(zero.forward(z) == 0.5);

  Rng rng(17);
  MlpHead head = MlpHead::random_init(4, rng);
  std::vector<double> dparams, dz;
  for (int label : {0, 1}) {
    double loss = head.backward(z, label, dparams, dz);
    CHECK(loss == Catch::Approx(bce_loss(head.forward(z), label)).margin(1e-12));

    const double h = 1e-5;
    MlpHead probe = head;
    for (std::size_t i = 0; i < probe.p.size(); ++i) {
      double keep = probe.p[i];
      probe.p[i] = keep + h;
      double up = bce_loss(probe.forward(z), label);
      probe.p[i] = keep - h;
      double dn = bce_loss(probe.forward(z), label);
      probe.p[i] = keep;
      CHECK(dparams[i] == Catch::Approx((up - dn) / (2 * h)).margin(1e-6));
    }
    std::vector<double> zp = z;
    for (std::size_t q = 0; q < z.size(); ++q) {
      zp[q] = z[q] + h;
      double up = bce_loss(head.forward(zp), label);
      zp[q] = z[q] - h;
      double dn = bce_loss(head.forward(zp), label);
      zp[q] = z[q];
      CHECK(dz[q] == Catch::Approx((up - dn) / (2 * h)).margin(1e-6));
    }
  }
}

TEST_CASE("feature embedding measures cos(f) on the empty circuit") {
  std::vector<double> f{0.3, 1.1, 2.0, 4.2};
  Circuit empty;
  empty.n_qubits = 4;
  std::vector<double> z = qnn_z_features(f, empty, {}, NoiseConfig::off());
  REQUIRE(z.size() == 4);
  for (int q = 0; q < 4; ++q)
    CHECK(z[static_cast<std::size_t>(q)] ==
          Catch::Approx(std::cos(f[static_cast<std::size_t>(q)])).margin(1e-12));

  NoiseConfig zero_rates{0.0, 0.0, 0.0, true};
  std::vector<double> zm = qnn_z_features(f, empty, {}, zero_rates);
  for (int q = 0; q < 4; ++q)
    CHECK(zm[static_cast<std::size_t>(q)] ==
          Catch::Approx(z[static_cast<std::size_t>(q)]).margin(1e-12));

  MlpHead head = MlpHead::zeros(4);
  CHECK(qnn_forward(f, empty, {}, head, NoiseConfig::off()) == 0.5);
}
