#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <sstream>
#include <vector>

#include "tdqas/experiments.hpp"
#include "tdqas/problems.hpp"

using namespace tdqas;

TEST_CASE("pearson correlation") {
  SECTION("hand-worked value") {
    std::vector<double> x = {1.0, 2.0, 3.0, 4.0};
    std::vector<double> y = {2.0, 1.0, 4.0, 3.0};
    // centered cross sum 3.0, squared sums 5.0 each
    REQUIRE(pearson(x, y) == Catch::Approx(0.6).margin(1e-12));
  }

  SECTION("identical series correlate perfectly") {
    std::vector<double> x = {0.3, -1.0, 2.5, 0.9};
    REQUIRE(pearson(x, x) == Catch::Approx(1.0).margin(1e-12));
    std::vector<double> neg;
    for (double v : x) neg.push_back(-v);
    REQUIRE(pearson(x, neg) == Catch::Approx(-1.0).margin(1e-12));
  }

  SECTION("invariant under positive affine maps and bounded") {
    Rng rng(6);
    std::vector<double> x, y, xa;
    for (int i = 0; i < 40; ++i) {
      x.push_back(rng.uniform(-2.0, 2.0));
      y.push_back(rng.uniform(-2.0, 2.0));
    }
    double r = pearson(x, y);
    REQUIRE(r >= -1.0);
    REQUIRE(r <= 1.0);
    for (double v : x) xa.push_back(3.7 * v + 11.0);
    REQUIRE(pearson(xa, y) == Catch::Approx(r).margin(1e-10));
  }

  SECTION("degenerate inputs throw") {
    std::vector<double> two = {1.0, 2.0};
    REQUIRE_THROWS_AS(pearson(two, two), std::invalid_argument);
    std::vector<double> flat = {1.0, 1.0, 1.0};
    std::vector<double> ok = {1.0, 2.0, 3.0};
    REQUIRE_THROWS_AS(pearson(flat, ok), std::runtime_error);
    REQUIRE_THROWS_AS(pearson(ok, std::vector<double>{1.0, 2.0}), std::invalid_argument);
  }
}

TEST_CASE("equal-width bin means") {
  SECTION("hand-worked bins") {
    std::vector<double> p = {0.0, 0.1, 0.9, 1.0, 0.55};
    std::vector<double> d = {1.0, 3.0, 10.0, 20.0, 7.0};
    BinCurve b = bin_means(p, d, 2);  // [0, 0.5) and [0.5, 1]
    REQUIRE(b.center.size() == 2);
    REQUIRE(b.center[0] == Catch::Approx(0.25));
    REQUIRE(b.mean[0] == Catch::Approx(2.0));
    REQUIRE(b.count[0] == 2);
    REQUIRE(b.mean[1] == Catch::Approx(37.0 / 3.0));
    REQUIRE(b.count[1] == 3);
  }

  SECTION("counts are conserved and empty bins dropped") {
    std::vector<double> p = {0.0, 0.01, 10.0};
    std::vector<double> d = {1.0, 2.0, 3.0};
    BinCurve b = bin_means(p, d, 100);
    int total = 0;
    for (int c : b.count) total += c;
    REQUIRE(total == 3);
    REQUIRE(b.center.size() == 2);  // one low bin, one top bin
  }

  SECTION("constant p collapses to one bin") {
    std::vector<double> p = {2.0, 2.0, 2.0};
    std::vector<double> d = {1.0, 2.0, 6.0};
    BinCurve b = bin_means(p, d, 10);
    REQUIRE(b.center.size() == 1);
    REQUIRE(b.mean[0] == Catch::Approx(3.0));
  }

  SECTION("empty input gives empty curve") {
    BinCurve b = bin_means({}, {}, 5);
    REQUIRE(b.center.empty());
  }
}

TEST_CASE("mean squared deviation") {
  std::vector<double> same = {1.5, 1.5, 1.5};
  REQUIRE(mean_squared_deviation(1.5, same) == 0.0);
  std::vector<double> v = {1.0, 3.0};
  REQUIRE(mean_squared_deviation(2.0, v) == Catch::Approx(1.0));
  REQUIRE_THROWS_AS(mean_squared_deviation(0.0, std::vector<double>{}), std::invalid_argument);
}

TEST_CASE("performance direction per task") {
  REQUIRE(performance_of(ObjectiveKind::Vqe, -3.25) == 3.25);
  REQUIRE(performance_of(ObjectiveKind::MaxCutRatio, 0.9) == 0.9);
  REQUIRE(performance_of(ObjectiveKind::Classification, 0.75) == 0.75);
}

TEST_CASE("outlier filter applies only to the noisy eigensolver curve") {
  HypothesisRecord low;
  low.p = -6.0;
  HypothesisRecord high;
  high.p = 2.0;
  REQUIRE_FALSE(keep_for_binning(low, ObjectiveKind::Vqe, true));
  REQUIRE(keep_for_binning(low, ObjectiveKind::Vqe, false));
  REQUIRE(keep_for_binning(low, ObjectiveKind::MaxCutRatio, true));
  REQUIRE(keep_for_binning(high, ObjectiveKind::Vqe, true));
}

TEST_CASE("quintile trend summary") {
  std::vector<HypothesisRecord> recs;
  for (int i = 0; i < 10; ++i) {
    HypothesisRecord r;
    r.p = static_cast<double>(i);
    r.d = i < 5 ? 4.0 : 1.0;  // low performers move more
    recs.push_back(r);
  }
  QuintileSummary q = quintile_trend(recs);
  REQUIRE(q.bottom_mean_d == Catch::Approx(4.0));
  REQUIRE(q.top_mean_d == Catch::Approx(1.0));
}

TEST_CASE("hypothesis experiment on a small chain") {
  Objective obj = Objective::vqe(tfim(3));

  HypothesisConfig cfg;
  cfg.n_originals = 4;
  cfg.n_variants = 2;
  cfg.n_gates = 5;
  cfg.fraction = 0.2;
  cfg.train.max_iters = 8;
  cfg.train.restarts = 1;
  cfg.train.seed = 2026;

  CostLedger ledger;
  HypothesisResult res = hypothesis_experiment(cfg, obj, ledger);

  SECTION("records are well formed") {
    REQUIRE(res.records.size() == 4);
    for (const auto& r : res.records) {
      REQUIRE(r.v.size() == 2);
      REQUIRE(r.d >= 0.0);
      REQUIRE(r.d == Catch::Approx(mean_squared_deviation(r.p, r.v)).margin(1e-15));
      REQUIRE(std::isfinite(r.p));
    }
    REQUIRE(res.n_excluded == 0);
    REQUIRE_FALSE(res.bins.center.empty());
  }

  SECTION("all cost lands in the experiment phase") {
    REQUIRE(ledger.count(PhaseTag::Experiment) > 0);
    REQUIRE(ledger.grand_total() == Catch::Approx(ledger.total(PhaseTag::Experiment)));
  }

  SECTION("repeat runs are bit-exact") {
    CostLedger ledger2;
    HypothesisResult rep = hypothesis_experiment(cfg, obj, ledger2);
    REQUIRE(rep.records.size() == res.records.size());
    for (std::size_t i = 0; i < rep.records.size(); ++i) {
      REQUIRE(rep.records[i].p == res.records[i].p);
      REQUIRE(rep.records[i].v == res.records[i].v);
      REQUIRE(rep.records[i].d == res.records[i].d);
    }
    REQUIRE(ledger2.grand_total() == ledger.grand_total());
  }
}

TEST_CASE("degenerate gate set makes every variant tie its original") {
  Objective obj = Objective::vqe(tfim(3));

  HypothesisConfig cfg;
  cfg.n_originals = 3;
  cfg.n_variants = 2;
  cfg.n_gates = 4;
  cfg.gateset = {{GateKind::Ry}, {GateKind::XX}};  // nothing to mutate into
  cfg.train.max_iters = 5;
  cfg.train.seed = 7;

  CostLedger ledger;
  HypothesisResult res = hypothesis_experiment(cfg, obj, ledger);
  for (const auto& r : res.records) {
    REQUIRE(r.d == 0.0);
    for (double v : r.v) REQUIRE(v == r.p);
  }
}

TEST_CASE("correlation experiment on a small chain") {
  Objective obj = Objective::vqe(tfim(3));

  CorrelationConfig cfg;
  cfg.n_topologies = 4;
  cfg.n_assignments = 3;
  cfg.n_gates = 5;
  cfg.instantiations = {{GateKind::Rx, GateKind::XX}, {GateKind::Ry, GateKind::XX}};
  cfg.train.max_iters = 8;
  cfg.train.seed = 515;

  CostLedger ledger;
  CorrelationResult res = correlation_experiment(cfg, obj, ledger);

  SECTION("series share topologies and proxy scores") {
    REQUIRE(res.topologies.size() == 4);
    REQUIRE(res.y_bar.size() == 4);
    REQUIRE(res.series.size() == 2);
    for (const auto& s : res.series) {
      REQUIRE(s.records.size() == 4);
      for (std::size_t t = 0; t < 4; ++t) {
        REQUIRE(s.records[t].topo_id == static_cast<int>(t));
        REQUIRE(s.records[t].y_bar == res.y_bar[t]);
        REQUIRE(std::isfinite(s.records[t].y_prime));
      }
      REQUIRE(s.pearson_r >= -1.0);
      REQUIRE(s.pearson_r <= 1.0);
    }
  }

  SECTION("experiment phase accounts for everything, repeats bit-exact") {
    REQUIRE(ledger.grand_total() == Catch::Approx(ledger.total(PhaseTag::Experiment)));
    CostLedger ledger2;
    CorrelationResult rep = correlation_experiment(cfg, obj, ledger2);
    REQUIRE(rep.y_bar == res.y_bar);
    for (std::size_t k = 0; k < rep.series.size(); ++k)
      REQUIRE(rep.series[k].pearson_r == res.series[k].pearson_r);
  }

  SECTION("too few topologies are rejected") {
    CorrelationConfig bad = cfg;
    bad.n_topologies = 2;
    CostLedger scratch;
    REQUIRE_THROWS_AS(correlation_experiment(bad, obj, scratch), std::invalid_argument);
  }
}

TEST_CASE("random topology and assignment sampling") {
  Rng rng(31);
  Topology t = random_topology(4, 30, rng);
  REQUIRE(t.slots.size() == 30);
  bool saw_single = false, saw_double = false;
  for (const auto& s : t.slots) {
    REQUIRE(s.position >= 0);
    REQUIRE(s.position < 4);
    (s.slot == SlotKind::Single ? saw_single : saw_double) = true;
  }
  REQUIRE(saw_single);
  REQUIRE(saw_double);

  GateSet gs{{GateKind::Rx, GateKind::Ry}, {GateKind::XX, GateKind::ZZ}};
  Circuit c = random_assignment(t, gs, rng);
  REQUIRE(topology_of(c) == t);
  for (const auto& e : c.elements) {
    const auto& pool = is_single(e.kind) ? gs.singles : gs.doubles;
    REQUIRE(std::find(pool.begin(), pool.end(), e.kind) != pool.end());
  }

  Rng r1(9), r2(9);
  Topology a = random_topology(3, 8, r1);
  Topology b = random_topology(3, 8, r2);
  REQUIRE(a == b);
}

TEST_CASE("csv writers emit the documented headers") {
  std::vector<HypothesisRecord> recs(1);
  recs[0].p = 1.5;
  recs[0].v = {1.0};
  recs[0].d = 0.25;
  std::ostringstream hyp;
  write_hypothesis_csv(hyp, recs);
  REQUIRE(hyp.str() == "p,d\n1.5,0.25\n");

  std::ostringstream cor;
  write_correlation_csv(cor, {{0, 0.5, 0.75}, {1, -1.0, -0.5}});
  REQUIRE(cor.str() == "topo_id,y_bar,y_prime\n0,0.5,0.75\n1,-1,-0.5\n");

  BinCurve bins;
  bins.center = {0.5};
  bins.mean = {2.0};
  bins.count = {3};
  std::ostringstream bs;
  write_bin_csv(bs, bins);
  REQUIRE(bs.str() == "p,d\n0.5,2\n");
}
