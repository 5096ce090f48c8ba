#pragma once

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <limits>
#include <numeric>
#include <ostream>
#include <span>
#include <stdexcept>
#include <vector>

#include "circuit.hpp"
#include "ledger.hpp"
#include "rng.hpp"
#include "trainer.hpp"

namespace tdqas {

// Experiments compare circuits on a "higher is better" axis: negated energy
// for eigensolving, approximation ratio and accuracy as-is.
inline double performance_of(ObjectiveKind kind, double metric) {
  return kind == ObjectiveKind::Vqe ? -metric : metric;
}

// --- statistics -----------------------------------------------------------------------

inline double pearson(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw std::invalid_argument("series length mismatch");
  if (x.size() < 3) throw std::invalid_argument("correlation needs at least 3 points");
  const double n = static_cast<double>(x.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
    syy += (y[i] - my) * (y[i] - my);
  }
  if (sxx == 0.0 || syy == 0.0) throw std::runtime_error("correlation undefined: zero variance");
  return sxy / std::sqrt(sxx * syy);
}

struct BinCurve {
  double lo = 0.0;
  double hi = 0.0;
  std::vector<double> center;
  std::vector<double> mean;
  std::vector<int> count;  // empty bins are dropped
};

// mean of d over equal-width bins of p
inline BinCurve bin_means(std::span<const double> p, std::span<const double> d, int n_bins) {
  if (p.size() != d.size()) throw std::invalid_argument("series length mismatch");
  if (n_bins < 1) throw std::invalid_argument("need at least one bin");
  BinCurve out;
  if (p.empty()) return out;
  out.lo = *std::min_element(p.begin(), p.end());
  out.hi = *std::max_element(p.begin(), p.end());
  double width = (out.hi - out.lo) / static_cast<double>(n_bins);
  std::vector<double> sum(static_cast<std::size_t>(n_bins), 0.0);
  std::vector<int> cnt(static_cast<std::size_t>(n_bins), 0);
  for (std::size_t i = 0; i < p.size(); ++i) {
    int b = width > 0.0 ? static_cast<int>((p[i] - out.lo) / width) : 0;
    b = std::clamp(b, 0, n_bins - 1);
    sum[static_cast<std::size_t>(b)] += d[i];
    cnt[static_cast<std::size_t>(b)] += 1;
  }
  for (int b = 0; b < n_bins; ++b) {
    if (cnt[static_cast<std::size_t>(b)] == 0) continue;
    out.center.push_back(out.lo + width * (static_cast<double>(b) + 0.5));
    out.mean.push_back(sum[static_cast<std::size_t>(b)] / cnt[static_cast<std::size_t>(b)]);
    out.count.push_back(cnt[static_cast<std::size_t>(b)]);
  }
  return out;
}

// --- gate-mutation hypothesis experiment ------------------------------------------------

struct HypothesisRecord {
  double p = 0.0;         // original circuit's best trained performance
  std::vector<double> v;  // variant performances
  double d = 0.0;         // mean squared deviation of the variants from p
};

inline double mean_squared_deviation(double p, std::span<const double> v) {
  if (v.empty()) throw std::invalid_argument("no variants");
  double acc = 0.0;
  for (double x : v) acc += (p - x) * (p - x);
  return acc / static_cast<double>(v.size());
}

struct HypothesisConfig {
  int n_originals = 60;
  int n_variants = 5;
  int n_gates = 35;
  double fraction = 0.2;
  GateSet gateset{{GateKind::Rx, GateKind::Ry, GateKind::Rz},
                  {GateKind::XX, GateKind::YY, GateKind::ZZ}};
  int n_bins = 0;  // 0 = automatic: 100 noiseless, 10 noisy
  TrainConfig train;
  NoiseConfig noise;

  void validate() const {
    if (n_originals < 1 || n_variants < 1) throw std::invalid_argument("counts must be >= 1");
    if (n_gates < 1) throw std::invalid_argument("n_gates must be >= 1");
    if (!(fraction > 0.0) || fraction > 1.0)
      throw std::invalid_argument("mutation fraction must be in (0, 1]");
    if (n_bins < 0) throw std::invalid_argument("n_bins must be >= 0");
    gateset.validate();
    if (gateset.singles.empty() || gateset.doubles.empty())
      throw std::invalid_argument("experiment gate set needs both arities");
    train.validate();
    noise.validate();
  }

  int effective_bins() const { return n_bins > 0 ? n_bins : (noise.enabled ? 10 : 100); }
};

// Under noise the eigensolver tail is unbounded below; records this far down
// are excluded from the binned curve (never from the raw records).
inline constexpr double kNoisyVqePerformanceFloor = -5.0;

inline bool keep_for_binning(const HypothesisRecord& rec, ObjectiveKind kind, bool noisy) {
  return !(noisy && kind == ObjectiveKind::Vqe && rec.p < kNoisyVqePerformanceFloor);
}

struct HypothesisResult {
  std::vector<HypothesisRecord> records;
  BinCurve bins;       // over records passing the outlier filter
  int n_excluded = 0;  // records dropped from the bins
};

struct QuintileSummary {
  double bottom_mean_d = 0.0;  // lowest-performance fifth
  double top_mean_d = 0.0;     // highest-performance fifth
};

inline QuintileSummary quintile_trend(const std::vector<HypothesisRecord>& records) {
  if (records.empty()) throw std::invalid_argument("no records");
  std::vector<std::size_t> order(records.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return records[a].p < records[b].p; });
  std::size_t nq = std::max<std::size_t>(1, records.size() / 5);
  QuintileSummary out;
  for (std::size_t i = 0; i < nq; ++i) {
    out.bottom_mean_d += records[order[i]].d;
    out.top_mean_d += records[order[records.size() - 1 - i]].d;
  }
  out.bottom_mean_d /= static_cast<double>(nq);
  out.top_mean_d /= static_cast<double>(nq);
  return out;
}

// Random circuits, each with gate-type-mutated variants, all trained
// best-of-restarts; d measures how much the variants move the score.  Mutation
// that cannot change any kind (no same-arity alternative anywhere) yields
// exact copies, which reuse the original's trained score.
inline HypothesisResult hypothesis_experiment(const HypothesisConfig& cfg, const Objective& obj,
                                              CostLedger& ledger) {
  cfg.validate();
  Rng root(cfg.train.seed);
  Rng circ_stream = root.child(1);
  Rng train_stream = root.child(2);
  Rng mutate_stream = root.child(3);
  Rng vtrain_stream = root.child(4);

  auto has_alternative = [&](GateKind k) {
    const auto& pool = is_single(k) ? cfg.gateset.singles : cfg.gateset.doubles;
    return std::any_of(pool.begin(), pool.end(), [&](GateKind o) { return o != k; });
  };
  auto same_circuit = [](const Circuit& a, const Circuit& b) {
    if (a.n_qubits != b.n_qubits || a.elements.size() != b.elements.size()) return false;
    for (std::size_t i = 0; i < a.elements.size(); ++i)
      if (a.elements[i].kind != b.elements[i].kind ||
          a.elements[i].position != b.elements[i].position)
        return false;
    return true;
  };

  HypothesisResult out;
  for (int i = 0; i < cfg.n_originals; ++i) {
    Rng crng = circ_stream.child(static_cast<std::uint64_t>(i));
    Circuit c = random_circuit(cfg.gateset, obj.n_qubits, cfg.n_gates, crng);

    TrainConfig tc = cfg.train;
    tc.seed = train_stream.child(static_cast<std::uint64_t>(i)).root_seed();
    HypothesisRecord rec;
    rec.p = performance_of(obj.kind,
                           train(obj, c, tc, cfg.noise, ledger, PhaseTag::Experiment).value);

    bool any_mutable = std::any_of(c.elements.begin(), c.elements.end(),
                                   [&](const GateElement& e) { return has_alternative(e.kind); });
    for (int j = 0; j < cfg.n_variants; ++j) {
      Circuit v = c;
      if (any_mutable) {
        Rng mrng = mutate_stream.child(static_cast<std::uint64_t>(i))
                       .child(static_cast<std::uint64_t>(j));
        v = mutate_gate_types(c, cfg.fraction, cfg.gateset, mrng);
      }
      if (same_circuit(v, c)) {
        rec.v.push_back(rec.p);
        continue;
      }
      TrainConfig vc = cfg.train;
      vc.seed = vtrain_stream.child(static_cast<std::uint64_t>(i))
                    .child(static_cast<std::uint64_t>(j))
                    .root_seed();
      rec.v.push_back(performance_of(
          obj.kind, train(obj, v, vc, cfg.noise, ledger, PhaseTag::Experiment).value));
    }
    rec.d = mean_squared_deviation(rec.p, rec.v);
    out.records.push_back(std::move(rec));
  }

  std::vector<double> ps, ds;
  for (const auto& rec : out.records) {
    if (!keep_for_binning(rec, obj.kind, cfg.noise.enabled)) {
      out.n_excluded += 1;
      continue;
    }
    ps.push_back(rec.p);
    ds.push_back(rec.d);
  }
  out.bins = bin_means(ps, ds, cfg.effective_bins());
  return out;
}

// --- topology instantiation correlation experiment --------------------------------------

struct GatePair {
  GateKind single_gate = GateKind::Rx;
  GateKind double_gate = GateKind::XX;
};

inline Topology random_topology(int n_qubits, int n_gates, Rng& rng) {
  if (n_qubits < 1 || n_gates < 1) throw std::invalid_argument("bad topology dimensions");
  Topology t;
  t.n_qubits = n_qubits;
  for (int g = 0; g < n_gates; ++g) {
    SlotKind s = rng.uniform_int(2) == 0 ? SlotKind::Single : SlotKind::Double;
    t.slots.push_back({s, rng.uniform_int(n_qubits)});
  }
  return t;
}

// uniform same-arity gate kind per placeholder
inline Circuit random_assignment(const Topology& t, const GateSet& gateset, Rng& rng) {
  gateset.validate();
  Circuit c;
  c.n_qubits = t.n_qubits;
  for (const auto& s : t.slots) {
    const auto& pool = s.slot == SlotKind::Single ? gateset.singles : gateset.doubles;
    if (pool.empty()) throw std::invalid_argument("gate set missing an arity the topology uses");
    c.elements.push_back({pool[rng.uniform_index(pool.size())], s.position});
  }
  return c;
}

struct CorrelationConfig {
  int n_topologies = 30;
  int n_assignments = 20;
  int n_gates = 25;
  GateSet gateset{{GateKind::Rx, GateKind::Ry, GateKind::Rz},
                  {GateKind::XX, GateKind::YY, GateKind::ZZ}};
  std::vector<GatePair> instantiations{{GateKind::Rx, GateKind::XX}};
  TrainConfig train;
  NoiseConfig noise;

  void validate() const {
    if (n_topologies < 3) throw std::invalid_argument("need at least 3 topologies");
    if (n_assignments < 1) throw std::invalid_argument("need at least 1 assignment");
    if (n_gates < 1) throw std::invalid_argument("n_gates must be >= 1");
    gateset.validate();
    if (gateset.singles.empty() || gateset.doubles.empty())
      throw std::invalid_argument("experiment gate set needs both arities");
    if (instantiations.empty()) throw std::invalid_argument("need at least one instantiation");
    for (const auto& g : instantiations)
      if (!is_single(g.single_gate) || !is_double(g.double_gate))
        throw std::invalid_argument("instantiation gates have the wrong arity");
    train.validate();
    noise.validate();
  }
};

struct CorrelationRecord {
  int topo_id = 0;
  double y_bar = 0.0;    // mean trained performance over random assignments
  double y_prime = 0.0;  // trained performance of the fixed-gate instantiation
};

struct CorrelationSeries {
  GatePair gates;
  std::vector<CorrelationRecord> records;
  double pearson_r = 0.0;
};

struct CorrelationResult {
  std::vector<Topology> topologies;
  std::vector<double> y_bar;  // shared across every instantiation series
  std::vector<CorrelationSeries> series;
};

// Sampled topologies scored two ways: the mean trained performance of random
// gate assignments (the expensive proxy ground truth) and a single fixed-gate
// instantiation.  Every instantiation pair reuses the same topologies, the
// same y_bar, and the same training seed, so series differ only in gates.
inline CorrelationResult correlation_experiment(const CorrelationConfig& cfg,
                                                const Objective& obj, CostLedger& ledger) {
  cfg.validate();
  Rng root(cfg.train.seed);
  Rng topo_stream = root.child(1);
  Rng assign_stream = root.child(2);
  Rng atrain_stream = root.child(3);
  Rng itrain_stream = root.child(4);

  CorrelationResult out;
  out.series.resize(cfg.instantiations.size());
  for (std::size_t k = 0; k < cfg.instantiations.size(); ++k)
    out.series[k].gates = cfg.instantiations[k];

  for (int t = 0; t < cfg.n_topologies; ++t) {
    Rng trng = topo_stream.child(static_cast<std::uint64_t>(t));
    Topology topo = random_topology(obj.n_qubits, cfg.n_gates, trng);

    double acc = 0.0;
    for (int j = 0; j < cfg.n_assignments; ++j) {
      Rng arng = assign_stream.child(static_cast<std::uint64_t>(t))
                     .child(static_cast<std::uint64_t>(j));
      Circuit c = random_assignment(topo, cfg.gateset, arng);
      TrainConfig tc = cfg.train;
      tc.seed = atrain_stream.child(static_cast<std::uint64_t>(t))
                    .child(static_cast<std::uint64_t>(j))
                    .root_seed();
      acc += performance_of(obj.kind,
                            train(obj, c, tc, cfg.noise, ledger, PhaseTag::Experiment).value);
    }
    double y_bar = acc / static_cast<double>(cfg.n_assignments);

    // one seed per topology: instantiation series differ only in their gates
    TrainConfig ic = cfg.train;
    ic.seed = itrain_stream.child(static_cast<std::uint64_t>(t)).root_seed();
    for (std::size_t k = 0; k < cfg.instantiations.size(); ++k) {
      Circuit inst =
          instantiate(topo, cfg.instantiations[k].single_gate, cfg.instantiations[k].double_gate);
      double y_prime = performance_of(
          obj.kind, train(obj, inst, ic, cfg.noise, ledger, PhaseTag::Experiment).value);
      out.series[k].records.push_back({t, y_bar, y_prime});
    }
    out.topologies.push_back(std::move(topo));
    out.y_bar.push_back(y_bar);
  }

  for (auto& s : out.series) {
    std::vector<double> yp;
    for (const auto& r : s.records) yp.push_back(r.y_prime);
    s.pearson_r = pearson(out.y_bar, yp);
  }
  return out;
}

// --- CSV emission -----------------------------------------------------------------------

inline void write_hypothesis_csv(std::ostream& os, const std::vector<HypothesisRecord>& records) {
  os << "p,d\n" << std::setprecision(17);
  for (const auto& r : records) os << r.p << ',' << r.d << '\n';
}

inline void write_bin_csv(std::ostream& os, const BinCurve& bins) {
  os << "p,d\n" << std::setprecision(17);
  for (std::size_t i = 0; i < bins.center.size(); ++i)
    os << bins.center[i] << ',' << bins.mean[i] << '\n';
}

inline void write_correlation_csv(std::ostream& os, const std::vector<CorrelationRecord>& records) {
  os << "topo_id,y_bar,y_prime\n" << std::setprecision(17);
  for (const auto& r : records) os << r.topo_id << ',' << r.y_bar << ',' << r.y_prime << '\n';
}

}  // namespace tdqas
