#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <stdexcept>
#include <unordered_map>
#include <utility>
#include <vector>

#include "circuit.hpp"
#include "ledger.hpp"
#include "problems.hpp"
#include "rng.hpp"
#include "searchspace.hpp"
#include "simulator.hpp"
#include "trainer.hpp"

namespace tdqas {

// --- configuration and samples --------------------------------------------------------

struct SupernetConfig {
  int n_qubits = 4;
  int n_layers = 3;
  GateSet gateset;
  int n_experts = 1;
  int t_total = 100;
  int t_warm = 50;
  int n_search = 100;
  int t_extra = 1;
  TrainConfig train;
  NoiseConfig noise;

  void validate() const {
    gateset.validate();
    if (gateset.singles.empty() || gateset.doubles.empty())
      throw std::invalid_argument("gateset needs both arities");
    if (n_qubits < 2 || n_layers < 1) throw std::invalid_argument("bad grid dimensions");
    if (n_experts < 1) throw std::invalid_argument("n_experts must be >= 1");
    if (t_warm < 0 || t_total < t_warm) throw std::invalid_argument("need 0 <= T_warm <= T_total");
    if (n_search < 0 || t_extra < 0) throw std::invalid_argument("counts must be >= 0");
    train.validate();
    noise.validate();
  }
};

// one gate-kind choice per (layer, qubit) single slot and double slot
struct SupernetSample {
  std::vector<int> single_choice;  // [layer * n_qubits + q] -> index into gateset.singles
  std::vector<int> double_choice;  // [layer * n_qubits + q] -> index into gateset.doubles
};

inline SupernetSample sample_uniform(const SupernetConfig& cfg, Rng& rng) {
  const std::size_t n = static_cast<std::size_t>(cfg.n_layers * cfg.n_qubits);
  SupernetSample s;
  s.single_choice.resize(n);
  s.double_choice.resize(n);
  for (auto& c : s.single_choice) c = static_cast<int>(rng.uniform_index(cfg.gateset.singles.size()));
  for (auto& c : s.double_choice) c = static_cast<int>(rng.uniform_index(cfg.gateset.doubles.size()));
  return s;
}

struct ActiveSlot {
  int layer = 0;
  SlotKind slot = SlotKind::Single;
  int qubit = 0;
  GateKind kind = GateKind::I;
  int table_index = -1;  // expert-relative shared-table entry of `kind`, -1 if fixed
};

// --- shared parameter table ----------------------------------------------------------

// Per expert, one angle per (layer, slot kind, qubit, parameterized gate kind).
// Entries exist for every parameterized kind in the pools, so lookups during
// evaluation always hit.
class SupernetSharedTable {
 public:
  SupernetSharedTable() = default;

  SupernetSharedTable(const SupernetConfig& cfg, Rng rng)
      : n_qubits_(cfg.n_qubits), n_layers_(cfg.n_layers), n_experts_(cfg.n_experts) {
    for (GateKind k : cfg.gateset.singles)
      if (is_parameterized(k)) kind_offset_[kind_slot(k)] = next_kind_++;
    for (GateKind k : cfg.gateset.doubles)
      if (is_parameterized(k)) kind_offset_[kind_slot(k)] = next_kind_++;
    values_.resize(static_cast<std::size_t>(n_experts_) * block_size());
    for (auto& v : values_) v = rng.uniform(-cfg.train.init_scale, cfg.train.init_scale);
  }

  int kinds_per_slot() const { return next_kind_; }
  std::size_t block_size() const {
    return static_cast<std::size_t>(n_layers_) * static_cast<std::size_t>(n_qubits_) *
           static_cast<std::size_t>(next_kind_);
  }
  int n_experts() const { return n_experts_; }

  // expert-relative entry index; -1 for non-parameterized kinds
  int index(int layer, int qubit, GateKind kind) const {
    auto it = kind_offset_.find(kind_slot(kind));
    if (it == kind_offset_.end()) return -1;
    return (layer * n_qubits_ + qubit) * next_kind_ + it->second;
  }

  std::size_t flat(int expert, int rel) const {
    return static_cast<std::size_t>(expert) * block_size() + static_cast<std::size_t>(rel);
  }

  double get(int expert, int rel) const { return values_.at(flat(expert, rel)); }
  std::vector<double>& values() { return values_; }
  const std::vector<double>& values() const { return values_; }

 private:
  static int kind_slot(GateKind k) { return static_cast<int>(k); }

  int n_qubits_ = 0;
  int n_layers_ = 0;
  int n_experts_ = 0;
  int next_kind_ = 0;
  std::unordered_map<int, int> kind_offset_;
  std::vector<double> values_;
};

// circuit induced by a sample: per layer, singles at qubits ascending, then
// doubles at ring positions ascending; identity choices emit nothing
struct InducedCircuit {
  Circuit circuit;
  std::vector<ActiveSlot> slots;            // one per element, element order
  std::vector<int> param_indices;           // expert-relative, one per parameterized element
};

inline InducedCircuit induced_circuit(const SupernetConfig& cfg, const SupernetSample& sample,
                                      const SupernetSharedTable& table) {
  const std::size_t n_slots = static_cast<std::size_t>(cfg.n_layers * cfg.n_qubits);
  if (sample.single_choice.size() != n_slots || sample.double_choice.size() != n_slots)
    throw std::invalid_argument("sample shape does not match the grid");
  InducedCircuit out;
  out.circuit.n_qubits = cfg.n_qubits;
  auto emit = [&](int layer, SlotKind slot, int q, GateKind kind) {
    if (is_identity(kind)) return;
    out.circuit.elements.push_back({kind, q});
    int rel = table.index(layer, q, kind);
    out.slots.push_back({layer, slot, q, kind, rel});
    if (is_parameterized(kind)) out.param_indices.push_back(rel);
  };
  for (int l = 0; l < cfg.n_layers; ++l) {
    for (int q = 0; q < cfg.n_qubits; ++q)
      emit(l, SlotKind::Single, q,
           cfg.gateset.singles.at(static_cast<std::size_t>(sample.single_choice[l * cfg.n_qubits + q])));
    for (int q = 0; q < cfg.n_qubits; ++q)
      emit(l, SlotKind::Double, q,
           cfg.gateset.doubles.at(static_cast<std::size_t>(sample.double_choice[l * cfg.n_qubits + q])));
  }
  return out;
}

inline LayeredTopology layered_topology_of(const SupernetConfig& cfg, const SupernetSample& sample) {
  LayeredTopology t;
  t.n_qubits = cfg.n_qubits;
  t.n_layers = cfg.n_layers;
  for (int c : sample.single_choice)
    t.single_active.push_back(
        is_identity(cfg.gateset.singles.at(static_cast<std::size_t>(c))) ? 0 : 1);
  for (int c : sample.double_choice)
    t.double_active.push_back(
        is_identity(cfg.gateset.doubles.at(static_cast<std::size_t>(c))) ? 0 : 1);
  return t;
}

// --- engine state ---------------------------------------------------------------------

struct SupernetState {
  SupernetSharedTable table;
  SparseAdam adam;
  std::vector<MlpHead> heads;           // per expert, classification only
  std::vector<Optimizer> head_opts;
};

inline SupernetState make_supernet_state(const SupernetConfig& cfg, const Objective& obj) {
  Rng root(cfg.train.seed);
  SupernetState st;
  Rng table_rng = root.child(1);
  st.table = SupernetSharedTable(cfg, table_rng);
  st.adam = SparseAdam(st.table.values().size());
  if (obj.kind == ObjectiveKind::Classification) {
    Rng head_rng = root.child(9);
    for (int e = 0; e < cfg.n_experts; ++e) {
      st.heads.push_back(MlpHead::random_init(cfg.n_qubits, head_rng));
      st.head_opts.emplace_back(cfg.train.optimizer, st.heads.back().p.size(),
                                cfg.train.learning_rate);
    }
  }
  return st;
}

namespace detail {

inline std::vector<double> gather_params(const SupernetState& st, const InducedCircuit& ind,
                                         int expert) {
  std::vector<double> theta;
  theta.reserve(ind.param_indices.size());
  for (int rel : ind.param_indices)
    theta.push_back(st.table.values()[st.table.flat(expert, rel)]);
  return theta;
}

inline std::vector<int> draw_batch(const Objective& obj, Rng& rng) {
  return draw_train_batch(obj, rng);
}

// loss-direction score of one sample under one expert's parameters
inline double score_sample(const SupernetConfig& cfg, const Objective& obj,
                           const SupernetState& st, const InducedCircuit& ind, int expert,
                           const std::vector<int>* batch, CostLedger& ledger, PhaseTag tag) {
  std::vector<double> theta = gather_params(st, ind, expert);
  EvalContext ctx;
  if (obj.kind == ObjectiveKind::Classification) {
    ctx.head = &st.heads.at(static_cast<std::size_t>(expert));
    ctx.batch = batch;
  }
  return to_loss(obj.kind, evaluate(obj, ind.circuit, theta, cfg.noise, ledger, tag, ctx));
}

// one gradient step on the expert's entries touched by the sample (and its
// head for classification); returns the pre-step loss
inline double step_sample(const SupernetConfig& cfg, const Objective& obj, SupernetState& st,
                          const InducedCircuit& ind, int expert, const std::vector<int>* batch,
                          CostLedger& ledger, PhaseTag tag) {
  std::vector<double> theta = gather_params(st, ind, expert);
  std::vector<std::size_t> flat_idx;
  flat_idx.reserve(ind.param_indices.size());
  for (int rel : ind.param_indices) flat_idx.push_back(st.table.flat(expert, rel));

  double loss;
  std::vector<double> grad;
  if (obj.kind == ObjectiveKind::Classification) {
    if (batch == nullptr) throw std::invalid_argument("classification step needs a batch");
    MlpHead& head = st.heads.at(static_cast<std::size_t>(expert));
    QnnBatchGrad g =
        qnn_batch_gradient(obj.dataset, *batch, ind.circuit, theta, head, cfg.noise, ledger, tag);
    loss = g.loss;
    grad = std::move(g.circuit_grad);
    st.head_opts.at(static_cast<std::size_t>(expert)).step(head.p, g.head_grad);
  } else {
    LossGrad g = loss_and_gradient(obj, ind.circuit, theta, cfg.noise, ledger, tag);
    loss = g.loss;
    grad = std::move(g.grad);
  }
  st.adam.update(st.table.values(), flat_idx, grad, cfg.train.learning_rate);
  return loss;
}

}  // namespace detail

// --- training, search, phases ---------------------------------------------------------

// Warm-up then best-expert training.  For t < T_warm a random expert takes one
// gradient step on the sampled circuit; afterwards every expert scores the
// sample first and only the best one steps.
inline SupernetState warmup_and_train(
    const SupernetConfig& cfg, const Objective& obj, CostLedger& ledger, PhaseTag tag,
    const std::function<void(int, const SupernetSample&, SupernetState&)>& on_iteration = {}) {
  cfg.validate();
  SupernetState st = make_supernet_state(cfg, obj);
  Rng root(cfg.train.seed);
  Rng train_stream = root.child(2);

  for (int t = 0; t < cfg.t_total; ++t) {
    Rng it = train_stream.child(static_cast<std::uint64_t>(t));
    SupernetSample sample = sample_uniform(cfg, it);
    InducedCircuit ind = induced_circuit(cfg, sample, st.table);
    std::vector<int> batch;
    const std::vector<int>* batch_ptr = nullptr;
    if (obj.kind == ObjectiveKind::Classification) {
      batch = detail::draw_batch(obj, it);
      batch_ptr = &batch;
    }
    if (t < cfg.t_warm) {
      int expert = static_cast<int>(it.uniform_index(static_cast<std::size_t>(cfg.n_experts)));
      detail::step_sample(cfg, obj, st, ind, expert, batch_ptr, ledger, tag);
    } else {
      int best = 0;
      double best_score = std::numeric_limits<double>::infinity();
      for (int e = 0; e < cfg.n_experts; ++e) {
        double s = detail::score_sample(cfg, obj, st, ind, e, batch_ptr, ledger, tag);
        if (s < best_score) {
          best_score = s;
          best = e;
        }
      }
      detail::step_sample(cfg, obj, st, ind, best, batch_ptr, ledger, tag);
    }
    if (on_iteration) on_iteration(t, sample, st);
  }
  return st;
}

struct SearchOutcome {
  SupernetSample sample;
  double score = 0.0;  // loss direction
  int index = 0;       // draw index of the winner
  int expert = 0;
};

// generic core: draw n_search samples, score each, argmin with earliest-draw
// tie-break; the scorer returns (loss-direction score, expert index)
template <typename ScoreFn>
SearchOutcome search_core(const SupernetConfig& cfg, Rng draw_rng, ScoreFn&& score) {
  if (cfg.n_search < 1) throw std::invalid_argument("N_search must be >= 1");
  SearchOutcome best;
  bool first = true;
  for (int i = 0; i < cfg.n_search; ++i) {
    Rng it = draw_rng.child(static_cast<std::uint64_t>(i));
    SupernetSample sample = sample_uniform(cfg, it);
    auto [s, expert] = score(sample, i);
    if (first || s < best.score) {
      best = {std::move(sample), s, i, expert};
      first = false;
    }
  }
  return best;
}

// scores each drawn sample with every expert's shared parameters and keeps the
// per-sample best expert
inline SearchOutcome search(const SupernetConfig& cfg, const Objective& obj, SupernetState& st,
                            CostLedger& ledger, PhaseTag tag) {
  Rng root(cfg.train.seed);
  std::vector<int> batch;
  const std::vector<int>* batch_ptr = nullptr;
  if (obj.kind == ObjectiveKind::Classification) {
    Rng batch_rng = root.child(4);
    batch = detail::draw_batch(obj, batch_rng);
    batch_ptr = &batch;
  }
  return search_core(cfg, root.child(3), [&](const SupernetSample& sample, int) {
    InducedCircuit ind = induced_circuit(cfg, sample, st.table);
    double best_score = std::numeric_limits<double>::infinity();
    int best_expert = 0;
    for (int e = 0; e < cfg.n_experts; ++e) {
      double s = detail::score_sample(cfg, obj, st, ind, e, batch_ptr, ledger, tag);
      if (s < best_score) {
        best_score = s;
        best_expert = e;
      }
    }
    return std::pair<double, int>(best_score, best_expert);
  });
}

// --- baseline pipeline ----------------------------------------------------------------

struct SupernetRunResult {
  SupernetSample best_sample;
  Circuit circuit;
  std::vector<double> params;
  double value = 0.0;         // task metric of the retrained circuit
  double shared_score = 0.0;  // loss-direction score under shared parameters
  int best_expert = 0;
  MlpHead head{0};
};

inline SupernetRunResult run_supernet_baseline(const SupernetConfig& cfg, const Objective& obj,
                                               CostLedger& ledger) {
  SupernetState st = warmup_and_train(cfg, obj, ledger, PhaseTag::Baseline);
  SearchOutcome best = search(cfg, obj, st, ledger, PhaseTag::Baseline);

  SupernetRunResult out;
  out.best_sample = best.sample;
  out.best_expert = best.expert;
  out.shared_score = best.score;
  InducedCircuit ind = induced_circuit(cfg, best.sample, st.table);
  out.circuit = ind.circuit;

  TrainConfig retrain = cfg.train;
  retrain.seed = Rng(cfg.train.seed).child(8).root_seed();
  TrainResult res = train(obj, out.circuit, retrain, cfg.noise, ledger, PhaseTag::Retrain);
  out.params = std::move(res.params);
  out.value = res.value;
  out.head = std::move(res.head);
  return out;
}

// --- TD phase -------------------------------------------------------------------------

// topology-decoupled pools: {one parameterized single, I} and {one double, CI}
inline void validate_td_gateset(const GateSet& gs) {
  gs.validate();
  auto count_id = [](const std::vector<GateKind>& v) {
    int c = 0;
    for (auto k : v) c += is_identity(k) ? 1 : 0;
    return c;
  };
  if (gs.singles.size() != 2 || count_id(gs.singles) != 1 ||
      gs.doubles.size() != 2 || count_id(gs.doubles) != 1)
    throw std::invalid_argument(
        "topology search needs pools {single, I} and {double, CI}");
  for (auto k : gs.singles)
    if (!is_identity(k) && !is_parameterized(k))
      throw std::invalid_argument("the non-identity single kind must be parameterized");
}

struct TdPhaseResult {
  Topology topology;
  LayeredTopology grid;
  SupernetSample best_sample;
  SupernetSharedTable table;
  int best_expert = 0;
  double score = 0.0;  // loss-direction shared-parameter score
  MlpHead head{0};     // best expert's co-trained head (classification)
};

inline TdPhaseResult run_td_phase(const SupernetConfig& cfg_td, const Objective& obj,
                                  CostLedger& ledger) {
  validate_td_gateset(cfg_td.gateset);
  SupernetState st = warmup_and_train(cfg_td, obj, ledger, PhaseTag::TD);
  SearchOutcome best = search(cfg_td, obj, st, ledger, PhaseTag::TD);

  TdPhaseResult out;
  InducedCircuit ind = induced_circuit(cfg_td, best.sample, st.table);
  out.topology = topology_of(ind.circuit);
  out.grid = layered_topology_of(cfg_td, best.sample);
  out.best_sample = std::move(best.sample);
  out.table = std::move(st.table);
  out.best_expert = best.expert;
  out.score = best.score;
  if (!st.heads.empty()) out.head = st.heads.at(static_cast<std::size_t>(best.expert));
  return out;
}

// --- GT phase -------------------------------------------------------------------------

struct GtPhaseResult {
  Circuit circuit;
  std::vector<double> params;
  double value = 0.0;          // task metric of the retrained winner
  double shared_score = 0.0;   // winner's refined score during exploration
  double inherited_td_score =
      std::numeric_limits<double>::quiet_NaN();  // pre-refinement score of the TD assignment
  MlpHead head{0};
  BigInt n_assignments;
  bool exhaustive = false;
};

inline GtPhaseResult run_gt_phase(const TdPhaseResult& td, const SupernetConfig& cfg_td,
                                  const SupernetConfig& cfg_gt, const Objective& obj,
                                  CostLedger& ledger) {
  cfg_gt.validate();
  if (cfg_gt.n_search < 1) throw std::invalid_argument("N_search must be >= 1");
  for (auto k : cfg_gt.gateset.singles)
    if (is_identity(k)) throw std::invalid_argument("gate-type pools must not contain identities");
  for (auto k : cfg_gt.gateset.doubles)
    if (is_identity(k)) throw std::invalid_argument("gate-type pools must not contain identities");

  InducedCircuit ind = induced_circuit(cfg_td, td.best_sample, td.table);
  const std::size_t n_active = ind.slots.size();
  if (n_active == 0) throw std::invalid_argument("empty topology has nothing to instantiate");

  // per-slot candidate pools, same arity as the slot
  std::vector<const std::vector<GateKind>*> pools(n_active);
  BigInt n_assign = 1;
  for (std::size_t i = 0; i < n_active; ++i) {
    pools[i] = ind.slots[i].slot == SlotKind::Single ? &cfg_gt.gateset.singles
                                                     : &cfg_gt.gateset.doubles;
    n_assign *= BigInt(pools[i]->size());
  }

  Rng root(cfg_gt.train.seed);
  Rng fresh_rng = root.child(6);

  // inheritance: every parameterized kind at an active slot starts from the TD
  // table's value at that slot; slots the TD phase never parameterized draw fresh
  std::vector<std::vector<double>> slot_values(n_active);
  for (std::size_t i = 0; i < n_active; ++i) {
    double inherited = ind.slots[i].table_index >= 0
                           ? td.table.get(td.best_expert, ind.slots[i].table_index)
                           : fresh_rng.uniform(-cfg_gt.train.init_scale, cfg_gt.train.init_scale);
    slot_values[i].assign(pools[i]->size(), inherited);
  }
  auto initial_params_of = [&](const std::vector<int>& assign) {
    std::vector<double> theta;
    for (std::size_t i = 0; i < n_active; ++i)
      if (is_parameterized(pools[i]->at(static_cast<std::size_t>(assign[i]))))
        theta.push_back(slot_values[i][static_cast<std::size_t>(assign[i])]);
    return theta;
  };
  auto circuit_of = [&](const std::vector<int>& assign) {
    Circuit c;
    c.n_qubits = cfg_td.n_qubits;
    for (std::size_t i = 0; i < n_active; ++i)
      c.elements.push_back(
          {pools[i]->at(static_cast<std::size_t>(assign[i])), ind.slots[i].qubit});
    return c;
  };

  // candidate list: exhaustive when small enough, otherwise uniform samples
  // with the TD assignment kept when the pools still contain it
  GtPhaseResult out;
  out.n_assignments = n_assign;
  out.exhaustive = n_assign <= BigInt(cfg_gt.n_search);
  std::vector<std::vector<int>> candidates;
  std::vector<int> td_assign(n_active, -1);
  bool td_representable = true;
  for (std::size_t i = 0; i < n_active; ++i) {
    auto it = std::find(pools[i]->begin(), pools[i]->end(), ind.slots[i].kind);
    if (it == pools[i]->end()) {
      td_representable = false;
      break;
    }
    td_assign[i] = static_cast<int>(it - pools[i]->begin());
  }
  if (out.exhaustive) {
    std::vector<int> cur(n_active, 0);
    for (BigInt c = 0; c < n_assign; ++c) {
      candidates.push_back(cur);
      for (std::size_t i = 0; i < n_active; ++i) {
        if (++cur[i] < static_cast<int>(pools[i]->size())) break;
        cur[i] = 0;
      }
    }
  } else {
    Rng pick = root.child(5);
    if (td_representable) candidates.push_back(td_assign);
    while (candidates.size() < static_cast<std::size_t>(cfg_gt.n_search)) {
      std::vector<int> a(n_active);
      for (std::size_t i = 0; i < n_active; ++i)
        a[i] = static_cast<int>(pick.uniform_index(pools[i]->size()));
      candidates.push_back(std::move(a));
    }
  }

  std::vector<int> batch;
  const std::vector<int>* batch_ptr = nullptr;
  if (obj.kind == ObjectiveKind::Classification) {
    Rng batch_rng = root.child(7);
    batch = detail::draw_batch(obj, batch_rng);
    batch_ptr = &batch;
  }

  // evaluate every candidate: inherited parameters, T_extra refinement steps,
  // then one scoring evaluation
  struct Best {
    double score = std::numeric_limits<double>::infinity();
    std::vector<int> assign;
    std::vector<double> params;
    MlpHead head{0};
  } best;
  for (const auto& assign : candidates) {
    Circuit c = circuit_of(assign);
    std::vector<double> theta = initial_params_of(assign);
    MlpHead head = td.head;
    Optimizer opt(cfg_gt.train.optimizer, theta.size(), cfg_gt.train.learning_rate);
    Optimizer head_opt(cfg_gt.train.optimizer, head.p.size(), cfg_gt.train.learning_rate);
    double pre = std::numeric_limits<double>::quiet_NaN();
    for (int s = 0; s < cfg_gt.t_extra; ++s) {
      double loss;
      if (obj.kind == ObjectiveKind::Classification) {
        QnnBatchGrad g = qnn_batch_gradient(obj.dataset, *batch_ptr, c, theta, head, cfg_gt.noise,
                                            ledger, PhaseTag::GT);
        loss = g.loss;
        if (!theta.empty()) opt.step(theta, g.circuit_grad);
        head_opt.step(head.p, g.head_grad);
      } else {
        LossGrad g = loss_and_gradient(obj, c, theta, cfg_gt.noise, ledger, PhaseTag::GT);
        loss = g.loss;
        if (!theta.empty()) opt.step(theta, g.grad);
      }
      if (s == 0) pre = loss;
    }
    EvalContext ctx;
    if (obj.kind == ObjectiveKind::Classification) {
      ctx.head = &head;
      ctx.batch = batch_ptr;
    }
    double score =
        to_loss(obj.kind, evaluate(obj, c, theta, cfg_gt.noise, ledger, PhaseTag::GT, ctx));
    if (cfg_gt.t_extra == 0) pre = score;
    if (td_representable && assign == td_assign) out.inherited_td_score = pre;
    if (score < best.score) best = {score, assign, std::move(theta), std::move(head)};
  }

  out.circuit = circuit_of(best.assign);
  out.shared_score = best.score;

  TrainConfig retrain = cfg_gt.train;
  retrain.seed = root.child(8).root_seed();
  TrainResult res = train(obj, out.circuit, retrain, cfg_gt.noise, ledger, PhaseTag::Retrain,
                          &best.params, &best.head);
  out.params = std::move(res.params);
  out.value = res.value;
  out.head = std::move(res.head);
  return out;
}

}  // namespace tdqas
