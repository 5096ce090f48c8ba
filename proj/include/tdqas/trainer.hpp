#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "circuit.hpp"
#include "ledger.hpp"
#include "pauli.hpp"
#include "problems.hpp"
#include "rng.hpp"
#include "simulator.hpp"

namespace tdqas {

// --- optimizers ---------------------------------------------------------------------

struct AdamParams {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

// Adam with per-entry step counts, usable on sparse index subsets of a larger
// parameter vector (shared tables update only the entries a sample touches).
class SparseAdam {
 public:
  SparseAdam() = default;
  explicit SparseAdam(std::size_t n) : m_(n, 0.0), v_(n, 0.0), t_(n, 0) {}

  std::size_t size() const { return m_.size(); }

  void update(std::vector<double>& params, std::span<const std::size_t> idx,
              std::span<const double> grad, double lr, const AdamParams& hp = {}) {
    if (idx.size() != grad.size()) throw std::invalid_argument("index/gradient size mismatch");
    for (std::size_t k = 0; k < idx.size(); ++k) {
      std::size_t i = idx[k];
      if (i >= m_.size()) throw std::out_of_range("optimizer entry out of range");
      m_[i] = hp.beta1 * m_[i] + (1.0 - hp.beta1) * grad[k];
      v_[i] = hp.beta2 * v_[i] + (1.0 - hp.beta2) * grad[k] * grad[k];
      t_[i] += 1;
      double mhat = m_[i] / (1.0 - std::pow(hp.beta1, static_cast<double>(t_[i])));
      double vhat = v_[i] / (1.0 - std::pow(hp.beta2, static_cast<double>(t_[i])));
      params.at(i) -= lr * mhat / (std::sqrt(vhat) + hp.eps);
    }
  }

 private:
  std::vector<double> m_, v_;
  std::vector<std::uint32_t> t_;
};

enum class OptimizerKind { Adam, Sgd };

inline const char* optimizer_name(OptimizerKind k) {
  return k == OptimizerKind::Adam ? "adam" : "sgd";
}

inline OptimizerKind optimizer_from_name(const std::string& s) {
  if (s == "adam") return OptimizerKind::Adam;
  if (s == "sgd") return OptimizerKind::Sgd;
  throw std::invalid_argument("unknown optimizer: " + s);
}

// dense convenience wrapper over a full parameter vector
class Optimizer {
 public:
  Optimizer(OptimizerKind kind, std::size_t n, double lr)
      : kind_(kind), lr_(lr), adam_(n), all_(n) {
    for (std::size_t i = 0; i < n; ++i) all_[i] = i;
  }

  void step(std::vector<double>& params, std::span<const double> grad) {
    if (params.size() != all_.size() || grad.size() != all_.size())
      throw std::invalid_argument("optimizer size mismatch");
    if (kind_ == OptimizerKind::Sgd) {
      for (std::size_t i = 0; i < params.size(); ++i) params[i] -= lr_ * grad[i];
      return;
    }
    adam_.update(params, all_, grad, lr_);
  }

 private:
  OptimizerKind kind_;
  double lr_;
  SparseAdam adam_;
  std::vector<std::size_t> all_;
};

// --- training configuration ---------------------------------------------------------

struct TrainConfig {
  int max_iters = 200;
  double learning_rate = 0.05;
  OptimizerKind optimizer = OptimizerKind::Adam;
  int restarts = 1;
  double init_scale = std::numbers::pi;
  std::uint64_t seed = 0;

  void validate() const {
    if (max_iters < 0) throw std::invalid_argument("max_iters must be >= 0");
    if (restarts < 1) throw std::invalid_argument("restarts must be >= 1");
    if (!(learning_rate > 0.0)) throw std::invalid_argument("learning_rate must be > 0");
    if (!(init_scale >= 0.0)) throw std::invalid_argument("init_scale must be >= 0");
  }
};

// Restart r of a run with seed s uses stream restart_seed(s, r); restart 0 is
// the seed itself, so a single-restart call with a derived seed replays that
// restart exactly.
inline std::uint64_t restart_seed(std::uint64_t seed, int r) {
  return r == 0 ? seed : splitmix64(seed + static_cast<std::uint64_t>(r));
}

// --- objectives ---------------------------------------------------------------------

enum class ObjectiveKind { Vqe, MaxCutRatio, Classification };

inline const char* objective_name(ObjectiveKind k) {
  switch (k) {
    case ObjectiveKind::Vqe: return "vqe";
    case ObjectiveKind::MaxCutRatio: return "maxcut_ratio";
    case ObjectiveKind::Classification: return "classification";
  }
  throw std::invalid_argument("unknown objective kind");
}

struct Objective {
  ObjectiveKind kind = ObjectiveKind::Vqe;
  int n_qubits = 0;
  PauliSum hamiltonian{1};
  std::vector<Graph> graphs;
  std::vector<PauliSum> cut_hamiltonians;
  std::vector<double> max_cuts;
  bool plus_start = false;  // maxcut only: start from H^n |0^n> instead of |0^n>
  Dataset dataset;
  int batch_size = 32;

  static Objective vqe(PauliSum h) {
    Objective o;
    o.kind = ObjectiveKind::Vqe;
    o.n_qubits = h.n_qubits();
    o.hamiltonian = std::move(h);
    return o;
  }

  static Objective maxcut_ratio(std::vector<Graph> gs, bool plus = false) {
    if (gs.empty()) throw std::invalid_argument("maxcut objective needs at least one graph");
    Objective o;
    o.kind = ObjectiveKind::MaxCutRatio;
    o.plus_start = plus;
    o.n_qubits = gs.front().n_nodes;
    for (const Graph& g : gs) {
      if (g.n_nodes != o.n_qubits) throw std::invalid_argument("graphs must share node count");
      int best = maxcut_brute_force(g);
      if (best == 0) throw std::invalid_argument("graph with zero max cut");
      o.cut_hamiltonians.push_back(maxcut_hamiltonian(g));
      o.max_cuts.push_back(static_cast<double>(best));
    }
    o.graphs = std::move(gs);
    return o;
  }

  static Objective classification(Dataset ds, int batch = 32) {
    if (ds.train.empty() || ds.test.empty()) throw std::invalid_argument("empty dataset");
    if (batch < 1) throw std::invalid_argument("batch size must be >= 1");
    bool has0 = false, has1 = false;
    for (const auto& s : ds.train) (s.label ? has1 : has0) = true;
    if (!has0 || !has1) throw std::invalid_argument("single-class training set");
    Objective o;
    o.kind = ObjectiveKind::Classification;
    o.n_qubits = ds.n_qubits;
    o.dataset = std::move(ds);
    o.batch_size = batch;
    return o;
  }
};

// loss is the minimized quantity; the approximation ratio is maximized, so it
// enters negated
inline double to_loss(ObjectiveKind kind, double value) {
  return kind == ObjectiveKind::MaxCutRatio ? -value : value;
}

inline double metric_from_loss(ObjectiveKind kind, double loss) {
  return kind == ObjectiveKind::MaxCutRatio ? -loss : loss;
}

// --- evaluation ---------------------------------------------------------------------

struct EvalContext {
  const MlpHead* head = nullptr;        // classification only
  const std::vector<int>* batch = nullptr;  // train-set indices; null = full train set
  bool on_test = false;
};

// Objective value at the given parameters.  Each quantum execution appends one
// exec_time entry to the ledger: one per circuit run for vqe and maxcut, one
// per sample for classification.
inline double evaluate(const Objective& obj, const Circuit& circuit,
                       std::span<const double> params, const NoiseConfig& noise,
                       CostLedger& ledger, PhaseTag tag, const EvalContext& ctx = {}) {
  if (circuit.n_qubits != obj.n_qubits)
    throw std::invalid_argument("circuit qubit count does not match objective");
  switch (obj.kind) {
    case ObjectiveKind::Vqe: {
      QuantumState st = run_circuit(circuit, params, noise);
      ledger.add(tag, exec_time(circuit));
      return expectation(st, obj.hamiltonian);
    }
    case ObjectiveKind::MaxCutRatio: {
      QuantumState st;
      if (obj.plus_start) {
        QuantumState plus = QuantumState::plus_state(circuit.n_qubits);
        st = run_circuit(circuit, params, noise, &plus);
      } else {
        st = run_circuit(circuit, params, noise);
      }
      ledger.add(tag, exec_time(circuit));
      double acc = 0.0;
      for (std::size_t i = 0; i < obj.cut_hamiltonians.size(); ++i)
        acc += expectation(st, obj.cut_hamiltonians[i]) / obj.max_cuts[i];
      return acc / static_cast<double>(obj.cut_hamiltonians.size());
    }
    case ObjectiveKind::Classification: {
      if (ctx.head == nullptr)
        throw std::invalid_argument("classification evaluation requires an MLP head");
      const auto& ds = obj.dataset;
      const std::vector<LabeledSample>& pool = ctx.on_test ? ds.test : ds.train;
      if (pool.empty()) throw std::invalid_argument("empty sample pool");
      double t_full = exec_time(embed_circuit(pool.front().features, circuit));
      double loss = 0.0;
      int count = 0;
      auto eval_one = [&](const LabeledSample& s) {
        std::vector<double> z = qnn_z_features(s.features, circuit, params, noise);
        ledger.add(tag, t_full);
        loss += bce_loss(ctx.head->forward(z), s.label);
        ++count;
      };
      if (!ctx.on_test && ctx.batch != nullptr) {
        for (int idx : *ctx.batch) eval_one(ds.train.at(static_cast<std::size_t>(idx)));
      } else {
        for (const auto& s : pool) eval_one(s);
      }
      return loss / static_cast<double>(count);
    }
  }
  throw std::invalid_argument("unknown objective kind");
}

// uniform-with-replacement minibatch of train-set indices
inline std::vector<int> draw_train_batch(const Objective& obj, Rng& rng) {
  if (obj.kind != ObjectiveKind::Classification)
    throw std::invalid_argument("minibatches only apply to classification");
  std::vector<int> batch(static_cast<std::size_t>(obj.batch_size));
  for (auto& i : batch) i = static_cast<int>(rng.uniform_index(obj.dataset.train.size()));
  return batch;
}

// --- gradients ----------------------------------------------------------------------

struct LossGrad {
  double loss = 0.0;
  std::vector<double> grad;
};

// Loss and its parameter-shift gradient; appends exactly 1 + 2*params.size()
// ledger entries for vqe/maxcut.
inline LossGrad loss_and_gradient(const Objective& obj, const Circuit& circuit,
                                  std::span<const double> params, const NoiseConfig& noise,
                                  CostLedger& ledger, PhaseTag tag, const EvalContext& ctx = {}) {
  if (obj.kind == ObjectiveKind::Classification)
    throw std::invalid_argument("use qnn_batch_gradient for classification");
  LossGrad out;
  out.loss = to_loss(obj.kind, evaluate(obj, circuit, params, noise, ledger, tag, ctx));
  if (!std::isfinite(out.loss)) throw std::runtime_error("non-finite loss during training");
  out.grad.resize(params.size());
  std::vector<double> shifted(params.begin(), params.end());
  constexpr double kShift = std::numbers::pi / 2.0;
  for (std::size_t j = 0; j < params.size(); ++j) {
    shifted[j] = params[j] + kShift;
    double lp = to_loss(obj.kind, evaluate(obj, circuit, shifted, noise, ledger, tag, ctx));
    shifted[j] = params[j] - kShift;
    double lm = to_loss(obj.kind, evaluate(obj, circuit, shifted, noise, ledger, tag, ctx));
    shifted[j] = params[j];
    out.grad[j] = 0.5 * (lp - lm);
  }
  return out;
}

struct QnnBatchGrad {
  double loss = 0.0;                 // mean BCE over the batch
  std::vector<double> circuit_grad;  // wrt circuit parameters (parameter shift)
  std::vector<double> head_grad;     // wrt head parameters (analytic)
};

// Joint gradient of the mean batch BCE: parameter shift through the measured
// <Z> vector chained with the head's analytic backward pass.  Appends
// batch*(1 + 2*params.size()) ledger entries.
inline QnnBatchGrad qnn_batch_gradient(const Dataset& ds, const std::vector<int>& batch,
                                       const Circuit& circuit, std::span<const double> params,
                                       const MlpHead& head, const NoiseConfig& noise,
                                       CostLedger& ledger, PhaseTag tag) {
  if (batch.empty()) throw std::invalid_argument("empty batch");
  const std::size_t np = params.size();
  const std::size_t nb = batch.size();
  QnnBatchGrad out;
  out.circuit_grad.assign(np, 0.0);
  out.head_grad.assign(head.p.size(), 0.0);

  double t_full = exec_time(embed_circuit(ds.train.at(0).features, circuit));
  std::vector<double> dparams, dz;
  std::vector<std::vector<double>> dldz(nb);
  for (std::size_t k = 0; k < nb; ++k) {
    const auto& s = ds.train.at(static_cast<std::size_t>(batch[k]));
    std::vector<double> z = qnn_z_features(s.features, circuit, params, noise);
    ledger.add(tag, t_full);
    out.loss += head.backward(z, s.label, dparams, dz);
    for (std::size_t i = 0; i < dparams.size(); ++i) out.head_grad[i] += dparams[i];
    dldz[k] = dz;
  }

  constexpr double kShift = std::numbers::pi / 2.0;
  std::vector<double> shifted(params.begin(), params.end());
  std::vector<std::vector<double>> zp(nb);
  for (std::size_t j = 0; j < np; ++j) {
    shifted[j] = params[j] + kShift;
    for (std::size_t k = 0; k < nb; ++k) {
      const auto& s = ds.train.at(static_cast<std::size_t>(batch[k]));
      zp[k] = qnn_z_features(s.features, circuit, shifted, noise);
      ledger.add(tag, t_full);
    }
    shifted[j] = params[j] - kShift;
    double gj = 0.0;
    for (std::size_t k = 0; k < nb; ++k) {
      const auto& s = ds.train.at(static_cast<std::size_t>(batch[k]));
      std::vector<double> zm = qnn_z_features(s.features, circuit, shifted, noise);
      ledger.add(tag, t_full);
      for (std::size_t q = 0; q < zm.size(); ++q)
        gj += dldz[k][q] * 0.5 * (zp[k][q] - zm[q]);
    }
    shifted[j] = params[j];
    out.circuit_grad[j] = gj / static_cast<double>(nb);
  }
  out.loss /= static_cast<double>(nb);
  for (double& g : out.head_grad) g /= static_cast<double>(nb);
  return out;
}

// --- training loops -----------------------------------------------------------------

struct TrainResult {
  std::vector<double> params;
  double value = 0.0;  // task metric: energy / approximation ratio / test accuracy
  double loss = 0.0;   // final training loss (the minimized quantity)
  MlpHead head{0};     // classification only
};

inline double qnn_accuracy(const Dataset& ds, const Circuit& circuit,
                           std::span<const double> params, const MlpHead& head,
                           const NoiseConfig& noise, CostLedger& ledger, PhaseTag tag) {
  if (ds.test.empty()) throw std::invalid_argument("empty test set");
  double t_full = exec_time(embed_circuit(ds.test.front().features, circuit));
  int hits = 0;
  for (const auto& s : ds.test) {
    double p = qnn_forward(s.features, circuit, params, head, noise);
    ledger.add(tag, t_full);
    if ((p >= 0.5 ? 1 : 0) == s.label) ++hits;
  }
  return static_cast<double>(hits) / static_cast<double>(ds.test.size());
}

// Joint circuit+head optimization on minibatches of the train split; reports
// test accuracy at threshold 0.5.
inline TrainResult train_qnn(const Dataset& ds, const Circuit& circuit, const MlpHead& head0,
                             const TrainConfig& config, const NoiseConfig& noise,
                             CostLedger& ledger, PhaseTag tag,
                             const std::vector<double>* warm_params = nullptr,
                             int batch_size = 32) {
  config.validate();
  if (ds.train.empty() || ds.test.empty()) throw std::invalid_argument("empty dataset");
  bool has0 = false, has1 = false;
  for (const auto& s : ds.train) (s.label ? has1 : has0) = true;
  if (!has0 || !has1) throw std::invalid_argument("single-class training set");

  const std::size_t np = circuit.n_params();
  Rng rng(config.seed);
  Rng init_rng = rng.child(0);

  TrainResult res;
  res.head = head0;
  if (warm_params != nullptr) {
    if (warm_params->size() != np) throw std::invalid_argument("warm-start size mismatch");
    res.params = *warm_params;
  } else {
    res.params.resize(np);
    for (double& t : res.params) t = init_rng.uniform(-config.init_scale, config.init_scale);
  }

  Optimizer circ_opt(config.optimizer, np, config.learning_rate);
  Optimizer head_opt(config.optimizer, res.head.p.size(), config.learning_rate);
  std::vector<int> order(ds.train.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = static_cast<int>(i);

  double last_loss = 0.0;
  for (int epoch = 0; epoch < config.max_iters; ++epoch) {
    Rng erng = rng.child(1 + static_cast<std::uint64_t>(epoch));
    erng.shuffle(order);
    for (std::size_t at = 0; at < order.size(); at += static_cast<std::size_t>(batch_size)) {
      std::size_t hi = std::min(order.size(), at + static_cast<std::size_t>(batch_size));
      std::vector<int> batch(order.begin() + static_cast<std::ptrdiff_t>(at),
                             order.begin() + static_cast<std::ptrdiff_t>(hi));
      QnnBatchGrad g =
          qnn_batch_gradient(ds, batch, circuit, res.params, res.head, noise, ledger, tag);
      if (!std::isfinite(g.loss)) throw std::runtime_error("non-finite loss during training");
      if (np > 0) circ_opt.step(res.params, g.circuit_grad);
      head_opt.step(res.head.p, g.head_grad);
      last_loss = g.loss;
    }
  }
  res.loss = last_loss;
  res.value = qnn_accuracy(ds, circuit, res.params, res.head, noise, ledger, tag);
  return res;
}

// Best-of-restarts gradient descent.  Restart r draws its initial parameters
// from stream restart_seed(seed, r); the best run is the one with the lowest
// final loss.  Classification runs the joint QNN loop once per restart.
inline TrainResult train(const Objective& obj, const Circuit& circuit, const TrainConfig& config,
                         const NoiseConfig& noise, CostLedger& ledger, PhaseTag tag,
                         const std::vector<double>* warm_params = nullptr,
                         const MlpHead* warm_head = nullptr) {
  config.validate();
  if (circuit.n_qubits != obj.n_qubits)
    throw std::invalid_argument("circuit qubit count does not match objective");
  const std::size_t np = circuit.n_params();

  TrainResult best;
  bool have_best = false;

  for (int r = 0; r < config.restarts; ++r) {
    TrainConfig run_cfg = config;
    run_cfg.seed = restart_seed(config.seed, r);
    run_cfg.restarts = 1;

    TrainResult cur;
    if (obj.kind == ObjectiveKind::Classification) {
      Rng head_rng = Rng(run_cfg.seed).child(99);
      MlpHead head = (r == 0 && warm_head != nullptr)
                         ? *warm_head
                         : MlpHead::random_init(obj.n_qubits, head_rng);
      cur = train_qnn(obj.dataset, circuit, head, run_cfg, noise, ledger, tag,
                      r == 0 ? warm_params : nullptr, obj.batch_size);
    } else {
      Rng rng(run_cfg.seed);
      Rng init_rng = rng.child(0);
      if (r == 0 && warm_params != nullptr) {
        if (warm_params->size() != np) throw std::invalid_argument("warm-start size mismatch");
        cur.params = *warm_params;
      } else {
        cur.params.resize(np);
        for (double& t : cur.params)
          t = init_rng.uniform(-config.init_scale, config.init_scale);
      }
      Optimizer opt(config.optimizer, np, config.learning_rate);
      for (int it = 0; it < config.max_iters; ++it) {
        LossGrad g = loss_and_gradient(obj, circuit, cur.params, noise, ledger, tag);
        if (np > 0) opt.step(cur.params, g.grad);
      }
      cur.loss = to_loss(obj.kind, evaluate(obj, circuit, cur.params, noise, ledger, tag));
      if (!std::isfinite(cur.loss)) throw std::runtime_error("non-finite loss during training");
      cur.value = metric_from_loss(obj.kind, cur.loss);
    }
    if (!have_best || cur.loss < best.loss) {
      best = std::move(cur);
      have_best = true;
    }
  }
  return best;
}

}  // namespace tdqas
