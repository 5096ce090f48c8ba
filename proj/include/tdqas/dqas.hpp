#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <stdexcept>
#include <utility>
#include <vector>

#include "circuit.hpp"
#include "ledger.hpp"
#include "problems.hpp"
#include "rng.hpp"
#include "trainer.hpp"

namespace tdqas {

// --- operation pools ------------------------------------------------------------------

struct DqasOp {
  GateKind kind = GateKind::I;
  int position = 0;

  bool operator==(const DqasOp& o) const { return kind == o.kind && position == o.position; }
};

// per circuit slot, the ordered list of candidate operations
using OpPool = std::vector<std::vector<DqasOp>>;

inline void validate_pools(const OpPool& pools, int n_qubits) {
  if (pools.empty()) throw std::invalid_argument("empty operation pool");
  for (const auto& slot : pools) {
    if (slot.empty()) throw std::invalid_argument("slot with no operations");
    for (const auto& op : slot)
      if (op.position < 0 || op.position >= n_qubits)
        throw std::invalid_argument("operation position out of range");
  }
}

// every (kind, ring position) combination, identical for each slot
inline OpPool joint_pool(const GateSet& gateset, int n_qubits, int n_gates) {
  gateset.validate();
  if (n_qubits < 2 || n_gates < 1) throw std::invalid_argument("bad pool dimensions");
  std::vector<DqasOp> ops;
  for (GateKind k : gateset.singles)
    for (int p = 0; p < n_qubits; ++p) ops.push_back({k, p});
  for (GateKind k : gateset.doubles)
    for (int p = 0; p < n_qubits; ++p) ops.push_back({k, p});
  return OpPool(static_cast<std::size_t>(n_gates), ops);
}

// restricted pool for topology search: one single kind and one double kind
inline OpPool td_pool(GateKind single_kind, GateKind double_kind, int n_qubits, int n_gates) {
  if (!is_single(single_kind) || !is_double(double_kind))
    throw std::invalid_argument("td pool needs one kind per arity");
  GateSet gs{{single_kind}, {double_kind}};
  return joint_pool(gs, n_qubits, n_gates);
}

// per-slot same-arity kinds at the positions fixed by a searched circuit
inline OpPool gt_pool(const Circuit& td_circuit, const GateSet& gate_kinds) {
  gate_kinds.validate();
  if (td_circuit.elements.empty()) throw std::invalid_argument("empty topology circuit");
  OpPool pools;
  for (const auto& el : td_circuit.elements) {
    std::vector<DqasOp> ops;
    for (GateKind k : is_single(el.kind) ? gate_kinds.singles : gate_kinds.doubles)
      ops.push_back({k, el.position});
    if (ops.empty()) throw std::invalid_argument("no same-arity kinds for a slot");
    pools.push_back(std::move(ops));
  }
  return pools;
}

inline Circuit circuit_of_arch(const OpPool& pools, const std::vector<int>& arch, int n_qubits) {
  if (arch.size() != pools.size()) throw std::invalid_argument("architecture/pool size mismatch");
  Circuit c;
  c.n_qubits = n_qubits;
  for (std::size_t s = 0; s < pools.size(); ++s) {
    const DqasOp& op = pools[s].at(static_cast<std::size_t>(arch[s]));
    c.elements.push_back({op.kind, op.position});
  }
  return c;
}

// --- probabilistic structure model ----------------------------------------------------

struct StructureModel {
  std::vector<std::vector<double>> logits;  // [slot][op]

  static StructureModel uniform(const OpPool& pools) {
    StructureModel m;
    for (const auto& slot : pools) m.logits.emplace_back(slot.size(), 0.0);
    return m;
  }

  std::vector<double> probs(std::size_t slot) const {
    const auto& a = logits.at(slot);
    double mx = *std::max_element(a.begin(), a.end());
    std::vector<double> p(a.size());
    double z = 0.0;
    for (std::size_t k = 0; k < a.size(); ++k) z += p[k] = std::exp(a[k] - mx);
    for (double& v : p) v /= z;
    return p;
  }

  std::vector<int> sample(Rng& rng) const {
    std::vector<int> arch(logits.size());
    for (std::size_t s = 0; s < logits.size(); ++s) {
      std::vector<double> p = probs(s);
      double u = rng.uniform();
      double acc = 0.0;
      int pick = static_cast<int>(p.size()) - 1;
      for (std::size_t k = 0; k < p.size(); ++k) {
        acc += p[k];
        if (u < acc) {
          pick = static_cast<int>(k);
          break;
        }
      }
      arch[s] = pick;
    }
    return arch;
  }

  double log_prob(const std::vector<int>& arch) const {
    double lp = 0.0;
    for (std::size_t s = 0; s < logits.size(); ++s)
      lp += std::log(probs(s).at(static_cast<std::size_t>(arch[s])));
    return lp;
  }

  // per-slot argmax; ties go to the lowest operation index
  std::vector<int> finalize() const {
    std::vector<int> arch(logits.size());
    for (std::size_t s = 0; s < logits.size(); ++s) {
      const auto& a = logits[s];
      int best = 0;
      for (std::size_t k = 1; k < a.size(); ++k)
        if (a[k] > a[static_cast<std::size_t>(best)]) best = static_cast<int>(k);
      arch[s] = best;
    }
    return arch;
  }
};

inline std::vector<std::vector<int>> sample_batch(const StructureModel& model, int n_batch,
                                                  Rng& rng) {
  if (n_batch < 1) throw std::invalid_argument("batch size must be >= 1");
  std::vector<std::vector<int>> batch;
  batch.reserve(static_cast<std::size_t>(n_batch));
  for (int i = 0; i < n_batch; ++i) batch.push_back(model.sample(rng));
  return batch;
}

// Score-function structure gradient with a leave-one-out baseline: exactly
// centered per batch and unbiased for the softmax-expected loss.  Returned
// flat, slot-major.
inline std::vector<double> structure_gradient(const StructureModel& model,
                                              const std::vector<std::vector<int>>& archs,
                                              const std::vector<double>& losses) {
  if (archs.empty() || archs.size() != losses.size())
    throw std::invalid_argument("architecture/loss batch mismatch");
  const double nb = static_cast<double>(archs.size());
  double total = 0.0;
  for (double l : losses) total += l;

  std::size_t flat_size = 0;
  for (const auto& a : model.logits) flat_size += a.size();
  std::vector<double> grad(flat_size, 0.0);

  for (std::size_t k = 0; k < archs.size(); ++k) {
    double baseline = archs.size() > 1 ? (total - losses[k]) / (nb - 1.0) : 0.0;
    double w = (losses[k] - baseline) / nb;
    std::size_t off = 0;
    for (std::size_t s = 0; s < model.logits.size(); ++s) {
      std::vector<double> p = model.probs(s);
      for (std::size_t j = 0; j < p.size(); ++j)
        grad[off + j] += w * ((static_cast<int>(j) == archs[k][s] ? 1.0 : 0.0) - p[j]);
      off += p.size();
    }
  }
  return grad;
}

// --- shared parameter table -----------------------------------------------------------

// one angle per (slot, parameterized operation)
class DqasSharedTable {
 public:
  DqasSharedTable() = default;

  DqasSharedTable(const OpPool& pools, double init_scale, Rng rng) {
    idx_.resize(pools.size());
    for (std::size_t s = 0; s < pools.size(); ++s) {
      idx_[s].assign(pools[s].size(), -1);
      for (std::size_t k = 0; k < pools[s].size(); ++k)
        if (is_parameterized(pools[s][k].kind)) {
          idx_[s][k] = static_cast<int>(values_.size());
          values_.push_back(rng.uniform(-init_scale, init_scale));
        }
    }
  }

  int index(std::size_t slot, int op) const {
    return idx_.at(slot).at(static_cast<std::size_t>(op));
  }
  double get(std::size_t slot, int op) const {
    int i = index(slot, op);
    if (i < 0) throw std::out_of_range("operation has no parameter");
    return values_[static_cast<std::size_t>(i)];
  }
  void set(std::size_t slot, int op, double v) {
    int i = index(slot, op);
    if (i < 0) throw std::out_of_range("operation has no parameter");
    values_[static_cast<std::size_t>(i)] = v;
  }

  std::vector<double> gather(const std::vector<int>& arch) const {
    std::vector<double> theta;
    for (std::size_t s = 0; s < arch.size(); ++s) {
      int i = index(s, arch[s]);
      if (i >= 0) theta.push_back(values_[static_cast<std::size_t>(i)]);
    }
    return theta;
  }

  std::vector<std::size_t> param_indices(const std::vector<int>& arch) const {
    std::vector<std::size_t> out;
    for (std::size_t s = 0; s < arch.size(); ++s) {
      int i = index(s, arch[s]);
      if (i >= 0) out.push_back(static_cast<std::size_t>(i));
    }
    return out;
  }

  std::vector<double>& values() { return values_; }
  const std::vector<double>& values() const { return values_; }

 private:
  std::vector<std::vector<int>> idx_;
  std::vector<double> values_;
};

// --- engine ---------------------------------------------------------------------------

struct DqasConfig {
  int n_qubits = 4;
  int n_gates = 8;
  OpPool pools;
  int n_batch = 8;
  int n_train = 100;
  double lr_structure = 0.1;
  TrainConfig train;
  NoiseConfig noise;

  void validate() const {
    if (n_qubits < 2) throw std::invalid_argument("need at least two qubits");
    validate_pools(pools, n_qubits);
    if (n_batch < 1 || n_train < 1) throw std::invalid_argument("batch/iteration counts >= 1");
    if (!(lr_structure > 0.0)) throw std::invalid_argument("lr_structure must be > 0");
    train.validate();
    noise.validate();
  }
};

struct DqasState {
  StructureModel model;
  Optimizer model_opt{OptimizerKind::Adam, 0, 0.1};
  DqasSharedTable table;
  SparseAdam table_adam;
  MlpHead head{0};
  Optimizer head_opt{OptimizerKind::Adam, 0, 0.05};
};

inline DqasState make_dqas_state(const DqasConfig& cfg, const Objective& obj,
                                 const DqasSharedTable* init_table = nullptr,
                                 const MlpHead* init_head = nullptr) {
  Rng root(cfg.train.seed);
  DqasState st;
  st.model = StructureModel::uniform(cfg.pools);
  std::size_t flat = 0;
  for (const auto& a : st.model.logits) flat += a.size();
  st.model_opt = Optimizer(cfg.train.optimizer, flat, cfg.lr_structure);
  Rng table_rng = root.child(1);
  st.table = init_table ? *init_table : DqasSharedTable(cfg.pools, cfg.train.init_scale, table_rng);
  st.table_adam = SparseAdam(st.table.values().size());
  if (obj.kind == ObjectiveKind::Classification) {
    Rng head_rng = root.child(4);
    st.head = init_head ? *init_head : MlpHead::random_init(cfg.n_qubits, head_rng);
    st.head_opt = Optimizer(cfg.train.optimizer, st.head.p.size(), cfg.train.learning_rate);
  }
  return st;
}

struct DqasStepInfo {
  std::vector<double> losses;  // per architecture in the batch
  double mean_loss = 0.0;
};

// One step: evaluate every sampled architecture with shared parameters, update
// the structure logits by the score-function estimator and the shared entries
// by batch-averaged parameter-shift gradients.
inline DqasStepInfo dqas_step(const DqasConfig& cfg, const Objective& obj, DqasState& st,
                              const std::vector<std::vector<int>>& batch,
                              const std::vector<int>* data_batch, CostLedger& ledger,
                              PhaseTag tag) {
  if (batch.empty()) throw std::invalid_argument("empty architecture batch");
  DqasStepInfo info;
  std::map<std::size_t, double> shared_grad;
  std::vector<double> head_grad;
  if (obj.kind == ObjectiveKind::Classification) head_grad.assign(st.head.p.size(), 0.0);

  for (const auto& arch : batch) {
    Circuit c = circuit_of_arch(cfg.pools, arch, cfg.n_qubits);
    std::vector<double> theta = st.table.gather(arch);
    std::vector<std::size_t> idx = st.table.param_indices(arch);

    double loss;
    std::vector<double> grad;
    if (obj.kind == ObjectiveKind::Classification) {
      if (data_batch == nullptr) throw std::invalid_argument("classification step needs a batch");
      QnnBatchGrad g = qnn_batch_gradient(obj.dataset, *data_batch, c, theta, st.head, cfg.noise,
                                          ledger, tag);
      loss = g.loss;
      grad = std::move(g.circuit_grad);
      for (std::size_t i = 0; i < head_grad.size(); ++i) head_grad[i] += g.head_grad[i];
    } else {
      LossGrad g = loss_and_gradient(obj, c, theta, cfg.noise, ledger, tag);
      loss = g.loss;
      grad = std::move(g.grad);
    }
    if (!std::isfinite(loss)) throw std::runtime_error("non-finite loss during search");
    info.losses.push_back(loss);
    for (std::size_t i = 0; i < idx.size(); ++i) shared_grad[idx[i]] += grad[i];
  }
  const double nb = static_cast<double>(batch.size());
  for (double l : info.losses) info.mean_loss += l;
  info.mean_loss /= nb;

  // structure update
  std::vector<double> sgrad = structure_gradient(st.model, batch, info.losses);
  std::vector<double> flat;
  for (const auto& a : st.model.logits) flat.insert(flat.end(), a.begin(), a.end());
  st.model_opt.step(flat, sgrad);
  std::size_t off = 0;
  for (auto& a : st.model.logits) {
    std::copy(flat.begin() + static_cast<std::ptrdiff_t>(off),
              flat.begin() + static_cast<std::ptrdiff_t>(off + a.size()), a.begin());
    off += a.size();
  }

  // shared-parameter update, batch-averaged, only entries used by the batch
  if (!shared_grad.empty()) {
    std::vector<std::size_t> idx;
    std::vector<double> grad;
    for (auto& [i, g] : shared_grad) {
      idx.push_back(i);
      grad.push_back(g / nb);
    }
    st.table_adam.update(st.table.values(), idx, grad, cfg.train.learning_rate);
  }
  if (obj.kind == ObjectiveKind::Classification) {
    for (double& g : head_grad) g /= nb;
    st.head_opt.step(st.head.p, head_grad);
  }
  return info;
}

struct DqasResult {
  Circuit circuit;
  std::vector<double> params;
  double value = 0.0;         // task metric of the retrained circuit
  double shared_value = 0.0;  // loss-direction score of the finalized architecture
  std::vector<int> final_arch;
  StructureModel model;
  DqasSharedTable table;
  MlpHead head{0};
};

// Full pipeline: N_train steps of sample + update, finalize, retrain.  The
// search phase is tagged `tag`; the retrain is tagged separately.
inline DqasResult run_dqas(const DqasConfig& cfg, const Objective& obj, CostLedger& ledger,
                           PhaseTag tag, const DqasSharedTable* init_table = nullptr,
                           const MlpHead* init_head = nullptr, bool warm_retrain = false) {
  cfg.validate();
  DqasState st = make_dqas_state(cfg, obj, init_table, init_head);
  Rng root(cfg.train.seed);
  Rng iter_stream = root.child(2);

  for (int t = 0; t < cfg.n_train; ++t) {
    Rng it = iter_stream.child(static_cast<std::uint64_t>(t));
    auto batch = sample_batch(st.model, cfg.n_batch, it);
    std::vector<int> data_batch;
    const std::vector<int>* data_ptr = nullptr;
    if (obj.kind == ObjectiveKind::Classification) {
      data_batch = draw_train_batch(obj, it);
      data_ptr = &data_batch;
    }
    dqas_step(cfg, obj, st, batch, data_ptr, ledger, tag);
  }

  DqasResult out;
  out.final_arch = st.model.finalize();
  out.circuit = circuit_of_arch(cfg.pools, out.final_arch, cfg.n_qubits);
  std::vector<double> shared_theta = st.table.gather(out.final_arch);

  EvalContext ctx;
  std::vector<int> score_batch;
  if (obj.kind == ObjectiveKind::Classification) {
    Rng batch_rng = root.child(5);
    score_batch = draw_train_batch(obj, batch_rng);
    ctx.head = &st.head;
    ctx.batch = &score_batch;
  }
  out.shared_value =
      to_loss(obj.kind, evaluate(obj, out.circuit, shared_theta, cfg.noise, ledger, tag, ctx));

  TrainConfig retrain = cfg.train;
  retrain.seed = root.child(3).root_seed();
  TrainResult res = train(obj, out.circuit, retrain, cfg.noise, ledger, PhaseTag::Retrain,
                          warm_retrain ? &shared_theta : nullptr,
                          warm_retrain && obj.kind == ObjectiveKind::Classification ? &st.head
                                                                                    : nullptr);
  out.params = std::move(res.params);
  out.value = res.value;
  out.head = std::move(res.head);
  out.model = std::move(st.model);
  out.table = std::move(st.table);
  return out;
}

// --- decoupled TD -> GT pipeline ------------------------------------------------------

struct DqasTdGtResult {
  DqasResult td;
  DqasResult gt;
  Topology topology;
  double gt_inherited_score = std::numeric_limits<double>::quiet_NaN();
};

// cfg_td.pools must be a topology-restricted pool (one kind per arity); the GT
// configuration supplies budgets and seeds while its pools are derived from
// the TD winner and `gate_kinds`
inline DqasTdGtResult run_td_gt(const DqasConfig& cfg_td, const DqasConfig& cfg_gt_base,
                                const GateSet& gate_kinds, const Objective& obj,
                                CostLedger& ledger) {
  DqasTdGtResult out;
  out.td = run_dqas(cfg_td, obj, ledger, PhaseTag::TD);
  out.topology = topology_of(out.td.circuit);

  DqasConfig cfg_gt = cfg_gt_base;
  cfg_gt.n_qubits = cfg_td.n_qubits;
  cfg_gt.n_gates = cfg_td.n_gates;
  cfg_gt.pools = gt_pool(out.td.circuit, gate_kinds);

  // inheritance: every same-arity kind at slot s starts from the TD winner's
  // trained value at s
  Rng fresh(Rng(cfg_gt.train.seed).child(6).root_seed());
  DqasSharedTable inherited(cfg_gt.pools, cfg_gt.train.init_scale, fresh);
  for (std::size_t s = 0; s < cfg_gt.pools.size(); ++s) {
    int td_idx = out.td.table.index(s, out.td.final_arch[s]);
    if (td_idx < 0) continue;
    double v = out.td.table.values()[static_cast<std::size_t>(td_idx)];
    for (std::size_t k = 0; k < cfg_gt.pools[s].size(); ++k)
      if (inherited.index(s, static_cast<int>(k)) >= 0)
        inherited.set(s, static_cast<int>(k), v);
  }

  // consistency probe: the TD winner's kinds under inherited parameters must
  // reproduce the TD score
  std::vector<int> td_in_gt(cfg_gt.pools.size(), -1);
  bool representable = true;
  for (std::size_t s = 0; s < cfg_gt.pools.size(); ++s) {
    DqasOp want{out.td.circuit.elements[s].kind, out.td.circuit.elements[s].position};
    auto it = std::find(cfg_gt.pools[s].begin(), cfg_gt.pools[s].end(), want);
    if (it == cfg_gt.pools[s].end()) {
      representable = false;
      break;
    }
    td_in_gt[s] = static_cast<int>(it - cfg_gt.pools[s].begin());
  }
  if (representable && obj.kind != ObjectiveKind::Classification) {
    Circuit c = circuit_of_arch(cfg_gt.pools, td_in_gt, cfg_gt.n_qubits);
    out.gt_inherited_score = to_loss(
        obj.kind, evaluate(obj, c, inherited.gather(td_in_gt), cfg_gt.noise, ledger, PhaseTag::GT));
  }

  out.gt = run_dqas(cfg_gt, obj, ledger, PhaseTag::GT, &inherited,
                    obj.kind == ObjectiveKind::Classification ? &out.td.head : nullptr,
                    /*warm_retrain=*/true);
  return out;
}

}  // namespace tdqas
