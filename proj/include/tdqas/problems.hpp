#pragma once

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <istream>
#include <numbers>
#include <ostream>
#include <span>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "tdqas/circuit.hpp"
#include "tdqas/pauli.hpp"
#include "tdqas/rng.hpp"
#include "tdqas/simulator.hpp"
#include "tdqas/state.hpp"

namespace tdqas {

// --- spin-chain Hamiltonians ---------------------------------------------------

// H = -sum_i Z_i Z_{i+1 mod n} - sum_i X_i
inline PauliSum tfim(int n) {
  if (n < 2) throw std::invalid_argument("tfim needs >= 2 qubits");
  PauliSum h(n);
  for (int i = 0; i < n; ++i) {
    std::string zz(static_cast<std::size_t>(n), 'I');
    zz[static_cast<std::size_t>(i)] = 'Z';
    zz[static_cast<std::size_t>((i + 1) % n)] = 'Z';
    h.add(-1.0, zz);
    std::string x(static_cast<std::size_t>(n), 'I');
    x[static_cast<std::size_t>(i)] = 'X';
    h.add(-1.0, x);
  }
  return h;
}

// H = sum_i (X_i X_{i+1} + Y_i Y_{i+1} + Z_i Z_{i+1}) + sum_i Z_i, periodic
inline PauliSum heisenberg(int n) {
  if (n < 2) throw std::invalid_argument("heisenberg needs >= 2 qubits");
  PauliSum h(n);
  for (int i = 0; i < n; ++i) {
    for (char p : {'X', 'Y', 'Z'}) {
      std::string pp(static_cast<std::size_t>(n), 'I');
      pp[static_cast<std::size_t>(i)] = p;
      pp[static_cast<std::size_t>((i + 1) % n)] = p;
      h.add(1.0, pp);
    }
    std::string z(static_cast<std::size_t>(n), 'I');
    z[static_cast<std::size_t>(i)] = 'Z';
    h.add(1.0, z);
  }
  return h;
}

// --- hydrogen (shipped coefficient file) -----------------------------------------

inline std::string default_h2_path() {
  if (const char* env = std::getenv("TDQAS_DATA_DIR"))
    return std::string(env) + "/h2_sto3g.txt";
#ifdef TDQAS_SOURCE_DATA_DIR
  return std::string(TDQAS_SOURCE_DATA_DIR) + "/h2_sto3g.txt";
#else
  return "data/h2_sto3g.txt";
#endif
}

inline PauliSum hydrogen(const std::string& path = default_h2_path()) {
  PauliSum h = PauliSum::load(path);
  if (h.n_qubits() != 4) throw std::runtime_error("hydrogen file must encode 4 qubits");
  double lambda = exact_min_eigenvalue(h).first;
  if (std::abs(lambda - (-1.13618)) > 1e-3)
    throw std::runtime_error("hydrogen coefficient file failed the ground-energy check");
  return h;
}

// --- MaxCut ------------------------------------------------------------------------

struct Graph {
  int n_nodes = 0;
  std::vector<std::pair<int, int>> edges;  // i < j, unique

  void validate() const {
    for (auto [i, j] : edges) {
      if (i < 0 || j < 0 || i >= n_nodes || j >= n_nodes)
        throw std::invalid_argument("edge endpoint out of range");
      if (i == j) throw std::invalid_argument("self-loop");
    }
    auto sorted = edges;
    std::sort(sorted.begin(), sorted.end());
    if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end())
      throw std::invalid_argument("duplicate edge");
  }

  // edge-list lines "i j"
  void write(std::ostream& out) const {
    for (auto [i, j] : edges) out << i << ' ' << j << '\n';
  }

  static Graph parse(std::istream& in, int n_nodes) {
    Graph g;
    g.n_nodes = n_nodes;
    int i, j;
    while (in >> i >> j) g.edges.emplace_back(std::min(i, j), std::max(i, j));
    g.validate();
    return g;
  }
};

inline Graph er_graph(int n, double p, Rng& rng) {
  if (!(p >= 0.0 && p <= 1.0)) throw std::invalid_argument("edge probability outside [0,1]");
  Graph g;
  g.n_nodes = n;
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j)
      if (rng.uniform() < p) g.edges.emplace_back(i, j);
  return g;
}

// H_C = (1/2) sum_{(i,j) in E} (I - Z_i Z_j); expectation equals the expected cut value
inline PauliSum maxcut_hamiltonian(const Graph& g) {
  g.validate();
  if (g.n_nodes < 1) throw std::invalid_argument("empty graph");
  PauliSum h(g.n_nodes);
  std::string identity(static_cast<std::size_t>(g.n_nodes), 'I');
  for (auto [i, j] : g.edges) {
    h.add(0.5, identity);
    std::string zz = identity;
    zz[static_cast<std::size_t>(i)] = 'Z';
    zz[static_cast<std::size_t>(j)] = 'Z';
    h.add(-0.5, zz);
  }
  if (g.edges.empty()) h.add(0.0, identity);
  return h;
}

inline int maxcut_brute_force(const Graph& g) {
  g.validate();
  if (g.n_nodes > 24) throw std::invalid_argument("brute force limited to 24 nodes");
  int best = 0;
  std::uint32_t lim = g.n_nodes >= 1 ? (1u << (g.n_nodes - 1)) : 1u;  // fix node 0's side
  for (std::uint32_t z = 0; z < lim; ++z) {
    int cut = 0;
    for (auto [i, j] : g.edges) cut += (((z >> i) ^ (z >> j)) & 1u) ? 1 : 0;
    best = std::max(best, cut);
  }
  return best;
}

// --- entanglement classification dataset -------------------------------------------

struct LabeledSample {
  std::vector<double> features;  // angles in [0, 2*pi)
  int label = 0;
  double entanglement = 0.0;  // Meyer-Wallach Q of the generator state
};

struct Dataset {
  int n_qubits = 0;
  std::vector<LabeledSample> train;
  std::vector<LabeledSample> test;

  void write_csv(std::ostream& out) const {
    out << std::setprecision(17);
    for (int q = 1; q <= n_qubits; ++q) out << 'f' << q << ',';
    out << "label,Q\n";
    auto row = [&](const LabeledSample& s) {
      for (double f : s.features) out << f << ',';
      out << s.label << ',' << s.entanglement << '\n';
    };
    for (const auto& s : train) row(s);
    for (const auto& s : test) row(s);
  }
};

// reference state: Ry(v_q) on every qubit, then CNOT(q, q+1 mod n) for every q
inline QuantumState entanglement_reference_state(std::span<const double> v) {
  int n = static_cast<int>(v.size());
  auto st = QuantumState::zero_state(n);
  for (int q = 0; q < n; ++q) apply_single_qubit(st, GateKind::Ry, q, v[static_cast<std::size_t>(q)]);
  for (int q = 0; q < n; ++q) apply_two_qubit(st, GateKind::CNOT, q, (q + 1) % n, std::nullopt);
  return st;
}

struct Band {
  double min = 0.0;
  double max = 0.0;
  bool contains(double q) const { return q >= min && q <= max; }
};

// Rejection sampling of feature vectors whose generator-state entanglement
// falls in one of two disjoint Meyer-Wallach bands.  Classes are exactly
// balanced; a band that goes 10^6 consecutive draws without an acceptance is
// reported unattainable.
inline Dataset generate_entanglement_dataset(int n_qubits, int n_train, int n_test,
                                             Band band_low = {0.10, 0.20},
                                             Band band_high = {0.40, 0.50},
                                             Rng rng = Rng(0)) {
  if (n_train < 2 || n_test < 2 || n_train % 2 || n_test % 2)
    throw std::invalid_argument("train/test sizes must be even and >= 2");
  if (!(0.0 <= band_low.min && band_low.min < band_low.max && band_low.max <= band_high.min &&
        band_high.min < band_high.max && band_high.max <= 1.0))
    throw std::invalid_argument("bands must be ordered and within [0,1]");

  const std::size_t need_low = static_cast<std::size_t>((n_train + n_test) / 2);
  const std::size_t need_high = need_low;
  std::vector<LabeledSample> low, high;
  low.reserve(need_low);
  high.reserve(need_high);

  constexpr std::uint64_t kRetryBudget = 1000000;
  std::uint64_t misses = 0;
  constexpr double kTwoPi = 2.0 * std::numbers::pi;
  std::vector<double> v(static_cast<std::size_t>(n_qubits));
  while (low.size() < need_low || high.size() < need_high) {
    for (auto& x : v) x = rng.uniform(0.0, kTwoPi);
    double q = meyer_wallach_q(entanglement_reference_state(v));
    if (band_low.contains(q) && low.size() < need_low) {
      low.push_back({v, 0, q});
      misses = 0;
    } else if (band_high.contains(q) && high.size() < need_high) {
      high.push_back({v, 1, q});
      misses = 0;
    } else if (++misses >= kRetryBudget) {
      throw std::runtime_error("entanglement bands unattainable within the retry budget");
    }
  }

  Dataset ds;
  ds.n_qubits = n_qubits;
  auto take = [](std::vector<LabeledSample>& src, int k) {
    std::vector<LabeledSample> out(src.end() - k, src.end());
    src.resize(src.size() - static_cast<std::size_t>(k));
    return out;
  };
  for (auto& s : take(low, n_train / 2)) ds.train.push_back(std::move(s));
  for (auto& s : take(high, n_train / 2)) ds.train.push_back(std::move(s));
  for (auto& s : take(low, n_test / 2)) ds.test.push_back(std::move(s));
  for (auto& s : take(high, n_test / 2)) ds.test.push_back(std::move(s));
  rng.shuffle(ds.train);
  rng.shuffle(ds.test);
  return ds;
}

// --- MLP head and QNN pipeline -------------------------------------------------------

// n_in -> 8 (tanh) -> 1 (sigmoid), parameters stored flat for the optimizer
struct MlpHead {
  static constexpr int kHidden = 8;
  int n_in = 0;
  std::vector<double> p;  // [w1 (kHidden x n_in), b1 (kHidden), w2 (kHidden), b2]

  static int param_count(int n_in) { return kHidden * n_in + kHidden + kHidden + 1; }

  static MlpHead zeros(int n_in) {
    MlpHead h;
    h.n_in = n_in;
    h.p.assign(static_cast<std::size_t>(param_count(n_in)), 0.0);
    return h;
  }

  static MlpHead random_init(int n_in, Rng& rng) {
    MlpHead h = zeros(n_in);
    double a1 = 1.0 / std::sqrt(static_cast<double>(n_in));
    double a2 = 1.0 / std::sqrt(static_cast<double>(kHidden));
    std::size_t idx = 0;
    for (int i = 0; i < kHidden * n_in; ++i) h.p[idx++] = rng.uniform(-a1, a1);
    for (int i = 0; i < kHidden; ++i) h.p[idx++] = 0.0;
    for (int i = 0; i < kHidden; ++i) h.p[idx++] = rng.uniform(-a2, a2);
    h.p[idx] = 0.0;
    return h;
  }

  double w1(int i, int j) const { return p[static_cast<std::size_t>(i * n_in + j)]; }
  double b1(int i) const { return p[static_cast<std::size_t>(kHidden * n_in + i)]; }
  double w2(int i) const { return p[static_cast<std::size_t>(kHidden * n_in + kHidden + i)]; }
  double b2() const { return p.back(); }

  double forward(std::span<const double> z) const {
    if (static_cast<int>(z.size()) != n_in) throw std::invalid_argument("feature size mismatch");
    double a2 = b2();
    for (int i = 0; i < kHidden; ++i) {
      double a = b1(i);
      for (int j = 0; j < n_in; ++j) a += w1(i, j) * z[static_cast<std::size_t>(j)];
      a2 += w2(i) * std::tanh(a);
    }
    return 1.0 / (1.0 + std::exp(-a2));
  }

  // BCE gradient for one sample: fills dparams (flat, same layout as p) and dz
  double backward(std::span<const double> z, int label, std::vector<double>& dparams,
                  std::vector<double>& dz) const {
    if (static_cast<int>(z.size()) != n_in) throw std::invalid_argument("feature size mismatch");
    std::array<double, kHidden> h{};
    double a2 = b2();
    for (int i = 0; i < kHidden; ++i) {
      double a = b1(i);
      for (int j = 0; j < n_in; ++j) a += w1(i, j) * z[static_cast<std::size_t>(j)];
      h[static_cast<std::size_t>(i)] = std::tanh(a);
      a2 += w2(i) * h[static_cast<std::size_t>(i)];
    }
    double o = 1.0 / (1.0 + std::exp(-a2));
    double oc = std::clamp(o, 1e-12, 1.0 - 1e-12);
    double loss = label ? -std::log(oc) : -std::log(1.0 - oc);

    dparams.assign(p.size(), 0.0);
    dz.assign(static_cast<std::size_t>(n_in), 0.0);
    double da2 = o - static_cast<double>(label);
    dparams[p.size() - 1] = da2;
    for (int i = 0; i < kHidden; ++i) {
      double hi = h[static_cast<std::size_t>(i)];
      dparams[static_cast<std::size_t>(kHidden * n_in + kHidden + i)] = da2 * hi;
      double da1 = da2 * w2(i) * (1.0 - hi * hi);
      dparams[static_cast<std::size_t>(kHidden * n_in + i)] = da1;
      for (int j = 0; j < n_in; ++j) {
        dparams[static_cast<std::size_t>(i * n_in + j)] = da1 * z[static_cast<std::size_t>(j)];
        dz[static_cast<std::size_t>(j)] += da1 * w1(i, j);
      }
    }
    return loss;
  }
};

inline double bce_loss(double prob, int label) {
  double oc = std::clamp(prob, 1e-12, 1.0 - 1e-12);
  return label ? -std::log(oc) : -std::log(1.0 - oc);
}

// single-qubit <Z_q> for every qubit
inline std::vector<double> z_expectations(const QuantumState& st) {
  std::size_t d = st.dim();
  std::vector<double> z(static_cast<std::size_t>(st.n_qubits), 0.0);
  if (st.mode == QuantumState::Mode::Pure) {
    for (std::size_t i = 0; i < d; ++i) {
      double w = std::norm(st.data[i]);
      for (int q = 0; q < st.n_qubits; ++q)
        z[static_cast<std::size_t>(q)] += (i >> q) & 1 ? -w : w;
    }
  } else {
    for (std::size_t i = 0; i < d; ++i) {
      double w = st.data[i + (i << st.n_qubits)].real();
      for (int q = 0; q < st.n_qubits; ++q)
        z[static_cast<std::size_t>(q)] += (i >> q) & 1 ? -w : w;
    }
  }
  return z;
}

// angle embedding [Rx(f_q) for all q] followed by the searched circuit
inline Circuit embed_circuit(std::span<const double> features, const Circuit& circuit) {
  if (static_cast<int>(features.size()) != circuit.n_qubits)
    throw std::invalid_argument("feature count != qubit count");
  Circuit full;
  full.n_qubits = circuit.n_qubits;
  full.elements.reserve(features.size() + circuit.elements.size());
  for (int q = 0; q < circuit.n_qubits; ++q) full.elements.push_back({GateKind::Rx, q});
  full.elements.insert(full.elements.end(), circuit.elements.begin(), circuit.elements.end());
  return full;
}

// one full quantum execution of the classifier pipeline: embedding + circuit + <Z> readout
inline std::vector<double> qnn_z_features(std::span<const double> features, const Circuit& circuit,
                                          std::span<const double> circuit_params,
                                          const NoiseConfig& noise) {
  Circuit full = embed_circuit(features, circuit);
  std::vector<double> all_params(features.begin(), features.end());
  all_params.insert(all_params.end(), circuit_params.begin(), circuit_params.end());
  return z_expectations(run_circuit(full, all_params, noise));
}

inline double qnn_forward(std::span<const double> features, const Circuit& circuit,
                          std::span<const double> circuit_params, const MlpHead& head,
                          const NoiseConfig& noise) {
  return head.forward(qnn_z_features(features, circuit, circuit_params, noise));
}

}  // namespace tdqas
