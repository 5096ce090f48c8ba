#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <numbers>
#include <vector>

#include "tdqas/ledger.hpp"
#include "tdqas/problems.hpp"
#include "tdqas/rng.hpp"
#include "tdqas/simulator.hpp"
#include "tdqas/trainer.hpp"

using namespace tdqas;

namespace {

constexpr double kPi = std::numbers::pi;

Circuit small_vqe_circuit() {
  Circuit c;
  c.n_qubits = 3;
  c.elements = {{GateKind::Ry, 0}, {GateKind::Ry, 1}, {GateKind::XX, 0}, {GateKind::Rz, 2},
                {GateKind::Ry, 2}};
  return c;
}

// angles clustered near 0 (label 0) or pi (label 1): separable through cos()
Dataset separable_dataset(int n_qubits, int n_train, int n_test, Rng rng) {
  Dataset ds;
  ds.n_qubits = n_qubits;
  auto make = [&](int label) {
    LabeledSample s;
    s.label = label;
    for (int q = 0; q < n_qubits; ++q)
      s.features.push_back(label ? rng.uniform(kPi - 0.5, kPi) : rng.uniform(0.0, 0.5));
    return s;
  };
  for (int i = 0; i < n_train; ++i) ds.train.push_back(make(i % 2));
  for (int i = 0; i < n_test; ++i) ds.test.push_back(make(i % 2));
  return ds;
}

}  // namespace

TEST_CASE("ledger totals are exact sums of appended entries") {
  CostLedger led(true);
  led.add(PhaseTag::TD, 1.25);
  led.add(PhaseTag::TD, 2.5);
  led.add(PhaseTag::GT, 0.5);
  led.add(PhaseTag::Retrain, 4.0);

  CHECK(led.total(PhaseTag::TD) == 3.75);
  CHECK(led.count(PhaseTag::TD) == 2);
  CHECK(led.grand_total() == 8.25);
  CHECK(led.total_count() == 4);

  double td = 0.0;
  for (const auto& [tag, t] : led.entries())
    if (tag == PhaseTag::TD) td += t;
  CHECK(td == led.total(PhaseTag::TD));

  CostLedger other;
  other.add(PhaseTag::TD, 1.0);
  other.add(PhaseTag::Baseline, 2.0);
  led.merge(other);
  CHECK(led.total(PhaseTag::TD) == 4.75);
  CHECK(led.total(PhaseTag::Baseline) == 2.0);

  auto j = led.to_json();
  CHECK(j["TD"].get<double>() == 4.75);
  CHECK(j["baseline"].get<double>() == 2.0);
  CHECK(j["retrain"].get<double>() == 4.0);
  CHECK(j.contains("GT"));
  CHECK(j.contains("experiment"));
}

TEST_CASE("evaluate matches closed forms on trivial circuits") {
  PauliSum h(3);
  h.add(1.0, "ZII");
  h.add(1.0, "IZI");
  h.add(1.0, "IIZ");
  Circuit empty;
  empty.n_qubits = 3;

  CostLedger led;
  Objective obj = Objective::vqe(h);
  CHECK(evaluate(obj, empty, {}, NoiseConfig::off(), led, PhaseTag::Experiment) == 3.0);
  CHECK(led.count(PhaseTag::Experiment) == 1);

  Graph tri{3, {{0, 1}, {0, 2}, {1, 2}}};
  Objective mc = Objective::maxcut_ratio({tri});
  double ratio = evaluate(mc, empty, {}, NoiseConfig::off(), led, PhaseTag::Experiment);
  CHECK(ratio == Catch::Approx(0.0).margin(1e-12));

  // from the uniform superposition each edge is cut with probability 1/2; the
  // triangle has 3 edges and a max cut of 2
  Objective mcp = Objective::maxcut_ratio({tri}, true);
  double plus_ratio = evaluate(mcp, empty, {}, NoiseConfig::off(), led, PhaseTag::Experiment);
  CHECK(plus_ratio == Catch::Approx(1.5 / 2.0).margin(1e-12));
}

TEST_CASE("a gradient step appends exactly 1 + 2P ledger entries") {
  Objective obj = Objective::vqe(tfim(3));
  Circuit c = small_vqe_circuit();
  const std::size_t np = c.n_params();
  REQUIRE(np == 5);

  std::vector<double> params(np, 0.3);
  CostLedger led;
  auto lg = loss_and_gradient(obj, c, params, NoiseConfig::off(), led, PhaseTag::TD);
  CHECK(led.count(PhaseTag::TD) == 1 + 2 * np);
  CHECK(led.total(PhaseTag::TD) ==
        Catch::Approx(static_cast<double>(1 + 2 * np) * exec_time(c)).margin(1e-12));

  // the shift rule agrees with central finite differences
  const double h = 1e-5;
  for (std::size_t j = 0; j < np; ++j) {
    auto probe = params;
    probe[j] += h;
    double up = evaluate(obj, c, probe, NoiseConfig::off(), led, PhaseTag::TD);
    probe[j] -= 2 * h;
    double dn = evaluate(obj, c, probe, NoiseConfig::off(), led, PhaseTag::TD);
    CHECK(lg.grad[j] == Catch::Approx((up - dn) / (2 * h)).margin(1e-7));
  }
}

TEST_CASE("training a single Rx against Z reaches the ground state") {
  PauliSum h(1);
  h.add(1.0, "Z");
  Circuit c;
  c.n_qubits = 1;
  c.elements = {{GateKind::Rx, 0}};

  TrainConfig cfg;
  cfg.max_iters = 200;
  cfg.seed = 5;
  CostLedger led;
  auto res = train(Objective::vqe(h), c, cfg, NoiseConfig::off(), led, PhaseTag::Retrain);
  CHECK(res.value == Catch::Approx(-1.0).margin(1e-3));
  CHECK(led.count(PhaseTag::Retrain) == 200 * 3 + 1);
}

TEST_CASE("restarts reduce to the min over derived single-restart runs") {
  Objective obj = Objective::vqe(tfim(3));
  Circuit c = small_vqe_circuit();
  TrainConfig cfg;
  cfg.max_iters = 12;
  cfg.restarts = 5;
  cfg.seed = 99;

  CostLedger led;
  auto multi = train(obj, c, cfg, NoiseConfig::off(), led, PhaseTag::Baseline);

  TrainResult best;
  bool first = true;
  for (int r = 0; r < 5; ++r) {
    TrainConfig one = cfg;
    one.restarts = 1;
    one.seed = restart_seed(cfg.seed, r);
    auto res = train(obj, c, one, NoiseConfig::off(), led, PhaseTag::Baseline);
    if (first || res.loss < best.loss) best = res;
    first = false;
  }
  CHECK(multi.value == best.value);
  CHECK(multi.params == best.params);

  TrainConfig single = cfg;
  single.restarts = 1;
  auto one = train(obj, c, single, NoiseConfig::off(), led, PhaseTag::Baseline);
  CHECK(multi.loss <= one.loss);
}

TEST_CASE("trained energies respect the variational bound and determinism") {
  Objective obj = Objective::vqe(tfim(3));
  double lambda = exact_min_eigenvalue(obj.hamiltonian).first;
  Circuit c = small_vqe_circuit();

  TrainConfig cfg;
  cfg.max_iters = 40;
  cfg.seed = 3;
  CostLedger led;
  auto a = train(obj, c, cfg, NoiseConfig::off(), led, PhaseTag::Retrain);
  auto b = train(obj, c, cfg, NoiseConfig::off(), led, PhaseTag::Retrain);
  CHECK(a.value == b.value);
  CHECK(a.value >= lambda - 1e-8);

  for (std::uint64_t seed : {11ull, 12ull, 13ull}) {
    cfg.seed = seed;
    cfg.max_iters = 15;
    CHECK(train(obj, c, cfg, NoiseConfig::off(), led, PhaseTag::Retrain).value >=
          lambda - 1e-8);
  }
}

TEST_CASE("maxcut training improves the ratio and stays within [0,1]") {
  Rng rng(21);
  Graph g1 = er_graph(4, 0.8, rng);
  Graph g2 = er_graph(4, 0.8, rng);
  Objective obj = Objective::maxcut_ratio({g1, g2});

  Circuit c;
  c.n_qubits = 4;
  c.elements = {{GateKind::Ry, 0}, {GateKind::Ry, 1}, {GateKind::Ry, 2}, {GateKind::Ry, 3},
                {GateKind::XX, 0}, {GateKind::XX, 2}};

  CostLedger led;
  std::vector<double> zeros(c.n_params(), 0.0);
  double before = evaluate(obj, c, zeros, NoiseConfig::off(), led, PhaseTag::Baseline);

  TrainConfig cfg;
  cfg.max_iters = 60;
  cfg.seed = 2;
  auto res = train(obj, c, cfg, NoiseConfig::off(), led, PhaseTag::Baseline);
  CHECK(res.value > before);
  CHECK(res.value >= 0.0);
  CHECK(res.value <= 1.0 + 1e-12);
  CHECK(res.loss == -res.value);
}

TEST_CASE("qnn batch gradients match finite differences through the pipeline") {
  Rng rng(8);
  Dataset ds = separable_dataset(2, 6, 2, rng.child(0));
  Circuit c;
  c.n_qubits = 2;
  c.elements = {{GateKind::Ry, 0}, {GateKind::CNOT, 0}, {GateKind::Ry, 1}};
  std::vector<double> params{0.4, -0.9};
  MlpHead head = MlpHead::random_init(2, rng);
  std::vector<int> batch{0, 1, 2};

  CostLedger led;
  auto g = qnn_batch_gradient(ds, batch, c, params, head, NoiseConfig::off(), led,
                              PhaseTag::TD);
  CHECK(led.count(PhaseTag::TD) == batch.size() * (1 + 2 * params.size()));

  auto mean_bce = [&](const std::vector<double>& th, const MlpHead& hd) {
    double s = 0.0;
    for (int idx : batch) {
      const auto& smp = ds.train[static_cast<std::size_t>(idx)];
      s += bce_loss(qnn_forward(smp.features, c, th, hd, NoiseConfig::off()), smp.label);
    }
    return s / static_cast<double>(batch.size());
  };
  CHECK(g.loss == Catch::Approx(mean_bce(params, head)).margin(1e-12));

  const double h = 1e-5;
  for (std::size_t j = 0; j < params.size(); ++j) {
    auto probe = params;
    probe[j] += h;
    double up = mean_bce(probe, head);
    probe[j] -= 2 * h;
    double dn = mean_bce(probe, head);
    CHECK(g.circuit_grad[j] == Catch::Approx((up - dn) / (2 * h)).margin(1e-6));
  }
  MlpHead probe = head;
  for (std::size_t i = 0; i < probe.p.size(); ++i) {
    double keep = probe.p[i];
    probe.p[i] = keep + h;
    double up = mean_bce(params, probe);
    probe.p[i] = keep - h;
    double dn = mean_bce(params, probe);
    probe.p[i] = keep;
    CHECK(g.head_grad[i] == Catch::Approx((up - dn) / (2 * h)).margin(1e-6));
  }
}

TEST_CASE("the QNN head fits linearly separable data") {
  Dataset ds = separable_dataset(3, 60, 20, Rng(31));
  Circuit empty;
  empty.n_qubits = 3;

  TrainConfig cfg;
  cfg.max_iters = 40;
  cfg.learning_rate = 0.05;
  cfg.seed = 7;
  CostLedger led;
  Rng head_rng(1);
  auto res = train_qnn(ds, empty, MlpHead::random_init(3, head_rng), cfg,
                       NoiseConfig::off(), led, PhaseTag::Retrain, nullptr, 16);
  CHECK(res.value >= 0.95);
  CHECK(res.value <= 1.0);
}

TEST_CASE("zero-epoch training with a zero head scores at chance level") {
  Dataset ds = separable_dataset(3, 20, 10, Rng(9));
  Circuit empty;
  empty.n_qubits = 3;
  TrainConfig cfg;
  cfg.max_iters = 0;
  cfg.seed = 1;
  CostLedger led;
  auto res = train_qnn(ds, empty, MlpHead::zeros(3), cfg, NoiseConfig::off(), led,
                       PhaseTag::Experiment);
  CHECK(res.value == 0.5);  // constant prediction on a balanced test split
}

TEST_CASE("single-class datasets are rejected") {
  Dataset ds = separable_dataset(2, 10, 4, Rng(2));
  for (auto& s : ds.train) s.label = 1;
  Circuit empty;
  empty.n_qubits = 2;
  TrainConfig cfg;
  CostLedger led;
  CHECK_THROWS_AS(
      train_qnn(ds, empty, MlpHead::zeros(2), cfg, NoiseConfig::off(), led, PhaseTag::TD),
      std::invalid_argument);
  CHECK_THROWS_AS(Objective::classification(std::move(ds)), std::invalid_argument);
}

TEST_CASE("sparse Adam updates only the touched entries") {
  std::vector<double> params{1.0, 2.0, 3.0, 4.0};
  SparseAdam adam(4);
  std::vector<std::size_t> idx{1, 3};
  std::vector<double> grad{0.5, -0.5};
  adam.update(params, idx, grad, 0.1);
  CHECK(params[0] == 1.0);
  CHECK(params[2] == 3.0);
  CHECK(params[1] < 2.0);
  CHECK(params[3] > 4.0);

  // first Adam step has magnitude ~lr regardless of gradient scale
  CHECK(params[1] == Catch::Approx(2.0 - 0.1).margin(1e-6));
  CHECK(params[3] == Catch::Approx(4.0 + 0.1).margin(1e-6));

  Optimizer opt(OptimizerKind::Adam, 1, 0.05);
  std::vector<double> x{3.0};
  for (int i = 0; i < 400; ++i) {
    std::vector<double> g{2.0 * (x[0] - 1.25)};
    opt.step(x, g);
  }
  CHECK(x[0] == Catch::Approx(1.25).margin(1e-3));
}
