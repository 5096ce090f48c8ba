#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <complex>
#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

#include "tdqas/circuit.hpp"
#include "tdqas/pauli.hpp"
#include "tdqas/state.hpp"

namespace tdqas {

struct NoiseConfig {
  double p_single_depol = 0.01;
  double p_double_depol = 0.001;
  double p_bitflip = 0.01;
  bool enabled = false;

  void validate() const {
    for (double p : {p_single_depol, p_double_depol, p_bitflip})
      if (!(p >= 0.0 && p <= 1.0)) throw std::invalid_argument("noise probability outside [0,1]");
  }

  static NoiseConfig off() { return NoiseConfig{0.0, 0.0, 0.0, false}; }
};

struct ExecTimeModel {
  double t_prep_plus_measure = 1.0;  // microseconds
  double t_gate = 0.01;
};

namespace detail {

using Mat2 = std::array<cdouble, 4>;    // row-major u[r*2+c]
using Mat4 = std::array<cdouble, 16>;   // row-major, local basis index bit_a + 2*bit_b

inline Mat2 one_qubit_matrix(GateKind kind, double angle) {
  double c = std::cos(angle / 2.0), s = std::sin(angle / 2.0);
  switch (kind) {
    case GateKind::Rx:
      return {cdouble(c, 0), cdouble(0, -s), cdouble(0, -s), cdouble(c, 0)};
    case GateKind::Ry:
      return {cdouble(c, 0), cdouble(-s, 0), cdouble(s, 0), cdouble(c, 0)};
    case GateKind::Rz:
      return {cdouble(c, -s), cdouble(0, 0), cdouble(0, 0), cdouble(c, s)};
    default:
      throw std::invalid_argument("not a parameterized single-qubit kind");
  }
}

inline Mat4 two_qubit_matrix(GateKind kind, double angle) {
  Mat4 m{};
  double c = std::cos(angle / 2.0), s = std::sin(angle / 2.0);
  switch (kind) {
    case GateKind::XX:
      m[0 * 4 + 0] = m[1 * 4 + 1] = m[2 * 4 + 2] = m[3 * 4 + 3] = cdouble(c, 0);
      m[0 * 4 + 3] = m[1 * 4 + 2] = m[2 * 4 + 1] = m[3 * 4 + 0] = cdouble(0, -s);
      return m;
    case GateKind::YY:
      m[0 * 4 + 0] = m[1 * 4 + 1] = m[2 * 4 + 2] = m[3 * 4 + 3] = cdouble(c, 0);
      m[0 * 4 + 3] = m[3 * 4 + 0] = cdouble(0, s);
      m[1 * 4 + 2] = m[2 * 4 + 1] = cdouble(0, -s);
      return m;
    case GateKind::ZZ:
      m[0 * 4 + 0] = m[3 * 4 + 3] = cdouble(c, -s);
      m[1 * 4 + 1] = m[2 * 4 + 2] = cdouble(c, s);
      return m;
    case GateKind::CNOT:  // control = first qubit, target = second
      m[0 * 4 + 0] = m[2 * 4 + 2] = cdouble(1, 0);
      m[1 * 4 + 3] = m[3 * 4 + 1] = cdouble(1, 0);
      return m;
    default:
      throw std::invalid_argument("not a two-qubit kind with a matrix");
  }
}

// v <- U v on qubit q, pure statevector
inline void apply1_pure(std::vector<cdouble>& v, int q, const Mat2& u) {
  std::size_t mask = std::size_t(1) << q;
  std::size_t dim = v.size();
  for (std::size_t base = 0; base < dim; base += mask << 1) {
    for (std::size_t off = 0; off < mask; ++off) {
      std::size_t i = base + off, j = i + mask;
      cdouble a = v[i], b = v[j];
      v[i] = u[0] * a + u[1] * b;
      v[j] = u[2] * a + u[3] * b;
    }
  }
}

// v <- U v on qubit pair (a, b), local index bit_a + 2*bit_b
inline void apply2_pure(std::vector<cdouble>& v, int qa, int qb, const Mat4& m) {
  std::size_t ma = std::size_t(1) << qa, mb = std::size_t(1) << qb;
  std::size_t both = ma | mb;
  std::size_t dim = v.size();
  for (std::size_t i = 0; i < dim; ++i) {
    if (i & both) continue;
    std::size_t i0 = i, i1 = i | ma, i2 = i | mb, i3 = i | both;
    cdouble x0 = v[i0], x1 = v[i1], x2 = v[i2], x3 = v[i3];
    v[i0] = m[0] * x0 + m[1] * x1 + m[2] * x2 + m[3] * x3;
    v[i1] = m[4] * x0 + m[5] * x1 + m[6] * x2 + m[7] * x3;
    v[i2] = m[8] * x0 + m[9] * x1 + m[10] * x2 + m[11] * x3;
    v[i3] = m[12] * x0 + m[13] * x1 + m[14] * x2 + m[15] * x3;
  }
}

// rho <- U rho (left) then rho <- rho U^dagger (right), single qubit
inline void apply1_mixed(QuantumState& st, int q, const Mat2& u) {
  std::size_t d = st.dim();
  std::size_t mask = std::size_t(1) << q;
  auto* p = st.data.data();
  // left multiply: transform each column (contiguous)
  for (std::size_t c = 0; c < d; ++c) {
    auto* col = p + c * d;
    for (std::size_t base = 0; base < d; base += mask << 1)
      for (std::size_t off = 0; off < mask; ++off) {
        std::size_t i = base + off, j = i + mask;
        cdouble a = col[i], b = col[j];
        col[i] = u[0] * a + u[1] * b;
        col[j] = u[2] * a + u[3] * b;
      }
  }
  // right multiply by U^dagger: mix column pairs
  cdouble c00 = std::conj(u[0]), c01 = std::conj(u[1]);
  cdouble c10 = std::conj(u[2]), c11 = std::conj(u[3]);
  for (std::size_t cbase = 0; cbase < d; cbase += mask << 1)
    for (std::size_t coff = 0; coff < mask; ++coff) {
      std::size_t c0 = cbase + coff, c1 = c0 + mask;
      auto* colA = p + c0 * d;
      auto* colB = p + c1 * d;
      for (std::size_t r = 0; r < d; ++r) {
        cdouble a = colA[r], b = colB[r];
        colA[r] = a * c00 + b * c01;
        colB[r] = a * c10 + b * c11;
      }
    }
}

inline void apply2_mixed(QuantumState& st, int qa, int qb, const Mat4& m) {
  std::size_t d = st.dim();
  std::size_t ma = std::size_t(1) << qa, mb = std::size_t(1) << qb, both = ma | mb;
  auto* p = st.data.data();
  for (std::size_t c = 0; c < d; ++c) {
    auto* col = p + c * d;
    for (std::size_t i = 0; i < d; ++i) {
      if (i & both) continue;
      std::size_t i0 = i, i1 = i | ma, i2 = i | mb, i3 = i | both;
      cdouble x0 = col[i0], x1 = col[i1], x2 = col[i2], x3 = col[i3];
      col[i0] = m[0] * x0 + m[1] * x1 + m[2] * x2 + m[3] * x3;
      col[i1] = m[4] * x0 + m[5] * x1 + m[6] * x2 + m[7] * x3;
      col[i2] = m[8] * x0 + m[9] * x1 + m[10] * x2 + m[11] * x3;
      col[i3] = m[12] * x0 + m[13] * x1 + m[14] * x2 + m[15] * x3;
    }
  }
  Mat4 md;  // conj(m), indexed as m[c][k] for the right multiply
  for (int r = 0; r < 4; ++r)
    for (int c = 0; c < 4; ++c) md[r * 4 + c] = std::conj(m[r * 4 + c]);
  for (std::size_t c = 0; c < d; ++c) {
    if (c & both) continue;
    std::size_t c0 = c, c1 = c | ma, c2 = c | mb, c3 = c | both;
    auto* A = p + c0 * d;
    auto* B = p + c1 * d;
    auto* C = p + c2 * d;
    auto* D = p + c3 * d;
    for (std::size_t r = 0; r < d; ++r) {
      cdouble x0 = A[r], x1 = B[r], x2 = C[r], x3 = D[r];
      A[r] = x0 * md[0] + x1 * md[1] + x2 * md[2] + x3 * md[3];
      B[r] = x0 * md[4] + x1 * md[5] + x2 * md[6] + x3 * md[7];
      C[r] = x0 * md[8] + x1 * md[9] + x2 * md[10] + x3 * md[11];
      D[r] = x0 * md[12] + x1 * md[13] + x2 * md[14] + x3 * md[15];
    }
  }
}

}  // namespace detail

inline void apply_single_qubit(QuantumState& st, GateKind kind, int q,
                               std::optional<double> angle) {
  if (q < 0 || q >= st.n_qubits) throw std::out_of_range("qubit index out of range");
  if (kind == GateKind::I) {
    if (angle) throw std::invalid_argument("identity takes no angle");
    return;
  }
  if (!is_single(kind)) throw std::invalid_argument("kind is not single-qubit");
  if (!angle) throw std::invalid_argument("rotation needs an angle");
  auto u = detail::one_qubit_matrix(kind, *angle);
  if (st.mode == QuantumState::Mode::Pure)
    detail::apply1_pure(st.data, q, u);
  else
    detail::apply1_mixed(st, q, u);
}

inline void apply_two_qubit(QuantumState& st, GateKind kind, int qa, int qb,
                            std::optional<double> angle) {
  if (qa < 0 || qa >= st.n_qubits || qb < 0 || qb >= st.n_qubits || qa == qb)
    throw std::out_of_range("qubit pair out of range");
  if (kind == GateKind::CI) {
    if (angle) throw std::invalid_argument("identity takes no angle");
    return;
  }
  if (!is_double(kind)) throw std::invalid_argument("kind is not two-qubit");
  bool param = is_parameterized(kind);
  if (param && !angle) throw std::invalid_argument("rotation needs an angle");
  if (!param && angle) throw std::invalid_argument("fixed gate takes no angle");
  auto m = detail::two_qubit_matrix(kind, angle.value_or(0.0));
  if (st.mode == QuantumState::Mode::Pure)
    detail::apply2_pure(st.data, qa, qb, m);
  else
    detail::apply2_mixed(st, qa, qb, m);
}

// Ring-position element application: double gates act on (p, (p+1) mod n).
inline void apply_element(QuantumState& st, const GateElement& e, std::optional<double> angle) {
  if (is_single(e.kind)) {
    apply_single_qubit(st, e.kind, e.position, angle);
  } else {
    int a = e.position, b = (e.position + 1) % st.n_qubits;
    apply_two_qubit(st, e.kind, a, b, angle);
  }
}

inline QuantumState apply_gate(const QuantumState& st, GateKind kind, int qa,
                               std::optional<int> qb = std::nullopt,
                               std::optional<double> angle = std::nullopt) {
  QuantumState out = st;
  if (is_single(kind)) {
    if (qb) throw std::invalid_argument("single-qubit kind takes one qubit");
    apply_single_qubit(out, kind, qa, angle);
  } else {
    if (!qb) throw std::invalid_argument("two-qubit kind needs a qubit pair");
    apply_two_qubit(out, kind, qa, *qb, angle);
  }
  return out;
}

// --- noise channels (mixed mode) --------------------------------------------

enum class NoiseChannel { Depol1, Depol2, BitFlip };

namespace detail {

// single-qubit depolarizing: rho -> (1-p) rho + (p/3)(X rho X + Y rho Y + Z rho Z)
inline void depol1(QuantumState& st, int q, double p) {
  std::size_t d = st.dim();
  std::size_t m = std::size_t(1) << q;
  auto* dat = st.data.data();
  double w = 1.0 - p, w3 = p / 3.0;
  double off_keep = 1.0 - 4.0 * p / 3.0;
  for (std::size_t c = 0; c < d; ++c) {
    if (c & m) continue;
    std::size_t c1 = c | m;
    auto* colA = dat + c * d;   // column with c_q = 0
    auto* colB = dat + c1 * d;  // column with c_q = 1
    for (std::size_t r = 0; r < d; ++r) {
      if (r & m) continue;
      std::size_t r1 = r | m;
      cdouble A = colA[r], B = colA[r1], C = colB[r], D = colB[r1];
      colA[r] = w * A + w3 * (2.0 * D + A);
      colB[r1] = w * D + w3 * (2.0 * A + D);
      colA[r1] = off_keep * B;
      colB[r] = off_keep * C;
    }
  }
}

// two-qubit depolarizing via the twirl identity:
// (1/16) sum over all P(x)Q of (P(x)Q) rho (P(x)Q) = I_4/4 (x) tr_ab(rho),
// so rho -> (1 - 16p/15) rho + (4p/15) * delta(row bits, col bits) * tr_ab(rho)
inline void depol2(QuantumState& st, int qa, int qb, double p) {
  std::size_t d = st.dim();
  std::size_t ma = std::size_t(1) << qa, mb = std::size_t(1) << qb, both = ma | mb;
  auto* dat = st.data.data();
  double w0 = 1.0 - 16.0 * p / 15.0;
  double wt = 4.0 * p / 15.0;
  std::size_t offs[4] = {0, ma, mb, both};
  for (std::size_t c = 0; c < d; ++c) {
    if (c & both) continue;
    for (std::size_t r = 0; r < d; ++r) {
      if (r & both) continue;
      cdouble tr = 0.0;
      for (auto o : offs) tr += dat[(r | o) + (c | o) * d];
      for (auto orow : offs)
        for (auto ocol : offs) {
          cdouble& e = dat[(r | orow) + (c | ocol) * d];
          e = w0 * e + (orow == ocol ? wt * tr : cdouble(0.0));
        }
    }
  }
}

// rho -> (1-p) rho + p X rho X
inline void bitflip(QuantumState& st, int q, double p) {
  std::size_t d = st.dim();
  std::size_t m = std::size_t(1) << q;
  auto* dat = st.data.data();
  double w = 1.0 - p;
  for (std::size_t c = 0; c < d; ++c) {
    if (c & m) continue;
    std::size_t c1 = c | m;
    auto* colA = dat + c * d;
    auto* colB = dat + c1 * d;
    for (std::size_t r = 0; r < d; ++r) {
      if (r & m) continue;
      std::size_t r1 = r | m;
      cdouble A = colA[r], B = colA[r1], C = colB[r], D = colB[r1];
      colA[r] = w * A + p * D;
      colB[r1] = w * D + p * A;
      colA[r1] = w * B + p * C;
      colB[r] = w * C + p * B;
    }
  }
}

}  // namespace detail

inline QuantumState apply_noise_channel(const QuantumState& st, NoiseChannel channel, int qa,
                                        std::optional<int> qb, double p) {
  if (st.mode != QuantumState::Mode::Mixed)
    throw std::invalid_argument("noise channels need a mixed-mode state");
  if (!(p >= 0.0 && p <= 1.0)) throw std::invalid_argument("probability outside [0,1]");
  if (qa < 0 || qa >= st.n_qubits) throw std::out_of_range("qubit index out of range");
  QuantumState out = st;
  switch (channel) {
    case NoiseChannel::Depol1:
      detail::depol1(out, qa, p);
      break;
    case NoiseChannel::Depol2:
      if (!qb || *qb < 0 || *qb >= st.n_qubits || *qb == qa)
        throw std::out_of_range("depol2 needs a distinct qubit pair");
      detail::depol2(out, qa, *qb, p);
      break;
    case NoiseChannel::BitFlip:
      detail::bitflip(out, qa, p);
      break;
  }
  return out;
}

// --- circuit execution -------------------------------------------------------

// Noiseless: pure evolution from `initial` (default |0^n>).  Noisy: density
// evolution with depol1 after each single-qubit gate, depol2 after each
// two-qubit gate, and a bit flip on every qubit after the final gate.
inline QuantumState run_circuit(const Circuit& circuit, std::span<const double> params,
                                const NoiseConfig& noise,
                                const QuantumState* initial = nullptr) {
  circuit.validate();
  noise.validate();
  if (static_cast<int>(params.size()) != circuit.n_params())
    throw std::invalid_argument("parameter count mismatch");
  if (initial && initial->n_qubits != circuit.n_qubits)
    throw std::invalid_argument("initial state qubit count mismatch");

  QuantumState st;
  if (noise.enabled) {
    if (initial)
      st = initial->mode == QuantumState::Mode::Mixed ? *initial
                                                      : QuantumState::density_of(*initial);
    else
      st = QuantumState::density_of(QuantumState::zero_state(circuit.n_qubits));
  } else {
    st = initial ? *initial : QuantumState::zero_state(circuit.n_qubits);
  }

  std::size_t pi = 0;
  for (const auto& e : circuit.elements) {
    std::optional<double> angle;
    if (is_parameterized(e.kind)) angle = params[pi++];
    apply_element(st, e, angle);
    if (noise.enabled && !is_identity(e.kind)) {
      if (is_single(e.kind)) {
        detail::depol1(st, e.position, noise.p_single_depol);
      } else {
        int a = e.position, b = (e.position + 1) % st.n_qubits;
        detail::depol2(st, a, b, noise.p_double_depol);
      }
    }
  }
  if (noise.enabled)
    for (int q = 0; q < st.n_qubits; ++q) detail::bitflip(st, q, noise.p_bitflip);
  return st;
}

// --- expectations ------------------------------------------------------------

inline double expectation(const QuantumState& st, const PauliSum& obs) {
  if (st.n_qubits != obs.n_qubits()) throw std::invalid_argument("qubit count mismatch");
  std::size_t d = st.dim();
  cdouble total = 0.0;
  for (const auto& term : obs.terms()) {
    PauliMasks m = pauli_masks(term.ops);
    // overall factor i^{n_y}
    static const cdouble iphase[4] = {{1, 0}, {0, 1}, {-1, 0}, {0, -1}};
    cdouble base = iphase[m.n_y & 3];
    cdouble acc = 0.0;
    if (st.mode == QuantumState::Mode::Pure) {
      for (std::size_t i = 0; i < d; ++i) {
        double sign = (std::popcount(i & m.phase) & 1) ? -1.0 : 1.0;
        acc += std::conj(st.data[i ^ m.flip]) * (sign * st.data[i]);
      }
    } else {
      // Tr(rho P) = sum_i ph(i) rho(i, i ^ flip)
      for (std::size_t i = 0; i < d; ++i) {
        double sign = (std::popcount(i & m.phase) & 1) ? -1.0 : 1.0;
        acc += sign * st.data[i + ((i ^ m.flip) << st.n_qubits)];
      }
    }
    total += term.coeff * (base * acc);
  }
  if (std::abs(total.imag()) > 1e-8)
    throw std::runtime_error("expectation has non-negligible imaginary part");
  return total.real();
}

inline double run_and_expect(const Circuit& circuit, std::span<const double> params,
                             const PauliSum& obs, const NoiseConfig& noise) {
  return expectation(run_circuit(circuit, params, noise), obs);
}

// Exact analytic gradient for gates generated by +/-1-eigenvalue Paulis:
// component j = [f(theta_j + pi/2) - f(theta_j - pi/2)] / 2.
inline std::vector<double> parameter_shift_grad(const Circuit& circuit,
                                                std::span<const double> params,
                                                const PauliSum& obs, const NoiseConfig& noise) {
  std::vector<double> theta(params.begin(), params.end());
  std::vector<double> grad(theta.size());
  constexpr double shift = 1.5707963267948966;  // pi/2
  for (std::size_t j = 0; j < theta.size(); ++j) {
    double orig = theta[j];
    theta[j] = orig + shift;
    double fp = run_and_expect(circuit, theta, obs, noise);
    theta[j] = orig - shift;
    double fm = run_and_expect(circuit, theta, obs, noise);
    theta[j] = orig;
    grad[j] = 0.5 * (fp - fm);
  }
  return grad;
}

// --- exact diagonalization oracle ---------------------------------------------

inline Eigen::MatrixXcd pauli_sum_matrix(const PauliSum& obs) {
  std::size_t d = std::size_t(1) << obs.n_qubits();
  Eigen::MatrixXcd H = Eigen::MatrixXcd::Zero(static_cast<Eigen::Index>(d),
                                              static_cast<Eigen::Index>(d));
  static const cdouble iphase[4] = {{1, 0}, {0, 1}, {-1, 0}, {0, -1}};
  for (const auto& term : obs.terms()) {
    PauliMasks m = pauli_masks(term.ops);
    cdouble base = term.coeff * iphase[m.n_y & 3];
    for (std::size_t i = 0; i < d; ++i) {
      double sign = (std::popcount(i & m.phase) & 1) ? -1.0 : 1.0;
      H(static_cast<Eigen::Index>(i ^ m.flip), static_cast<Eigen::Index>(i)) += base * sign;
    }
  }
  return H;
}

inline std::pair<double, QuantumState> exact_min_eigenvalue(const PauliSum& obs) {
  if (obs.n_qubits() > 12) throw std::invalid_argument("dense eigensolve limited to 12 qubits");
  Eigen::MatrixXcd H = pauli_sum_matrix(obs);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> solver(H);
  if (solver.info() != Eigen::Success) throw std::runtime_error("eigensolver failed");
  double lambda = solver.eigenvalues()(0);
  Eigen::VectorXcd v = solver.eigenvectors().col(0);
  std::vector<cdouble> amps(v.data(), v.data() + v.size());
  return {lambda, QuantumState::pure(obs.n_qubits(), std::move(amps))};
}

// --- depth and execution time --------------------------------------------------

// ASAP layering; identity placeholders contribute nothing.
inline int circuit_depth(const Circuit& circuit) {
  std::vector<int> frontier(static_cast<std::size_t>(circuit.n_qubits), 0);
  int depth = 0;
  for (const auto& e : circuit.elements) {
    if (is_identity(e.kind)) continue;
    if (is_single(e.kind)) {
      int d = frontier[e.position] + 1;
      frontier[e.position] = d;
      depth = std::max(depth, d);
    } else {
      int a = e.position, b = (e.position + 1) % circuit.n_qubits;
      int d = std::max(frontier[a], frontier[b]) + 1;
      frontier[a] = frontier[b] = d;
      depth = std::max(depth, d);
    }
  }
  return depth;
}

inline double exec_time(const Circuit& circuit, const ExecTimeModel& model = {}) {
  return model.t_prep_plus_measure + model.t_gate * circuit_depth(circuit);
}

// --- state analysis -------------------------------------------------------------

// Meyer-Wallach entanglement: Q = 2 (1 - (1/n) sum_q Tr rho_q^2)
inline double meyer_wallach_q(const QuantumState& st) {
  if (st.mode != QuantumState::Mode::Pure)
    throw std::invalid_argument("meyer_wallach_q needs a pure state");
  std::size_t d = st.dim();
  double purity_sum = 0.0;
  for (int q = 0; q < st.n_qubits; ++q) {
    std::size_t m = std::size_t(1) << q;
    double r00 = 0.0, r11 = 0.0;
    cdouble r01 = 0.0;
    for (std::size_t i = 0; i < d; ++i) {
      if (i & m) {
        r11 += std::norm(st.data[i]);
      } else {
        r00 += std::norm(st.data[i]);
        r01 += st.data[i] * std::conj(st.data[i | m]);
      }
    }
    purity_sum += r00 * r00 + r11 * r11 + 2.0 * std::norm(r01);
  }
  return 2.0 * (1.0 - purity_sum / st.n_qubits);
}

}  // namespace tdqas
