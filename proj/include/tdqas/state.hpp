#pragma once

#include <cmath>
#include <complex>
#include <cstddef>
#include <stdexcept>
#include <vector>

namespace tdqas {

using cdouble = std::complex<double>;

// Pure states hold 2^n amplitudes; mixed states hold a 2^n x 2^n density
// matrix, column-major (element (r, c) at r + c * 2^n).
struct QuantumState {
  enum class Mode { Pure, Mixed };

  int n_qubits = 0;
  Mode mode = Mode::Pure;
  std::vector<cdouble> data;

  std::size_t dim() const { return std::size_t(1) << n_qubits; }

  cdouble& rho(std::size_t r, std::size_t c) { return data[r + (c << n_qubits)]; }
  const cdouble& rho(std::size_t r, std::size_t c) const { return data[r + (c << n_qubits)]; }

  static QuantumState zero_state(int n_qubits) {
    if (n_qubits < 1 || n_qubits > 20) throw std::invalid_argument("bad qubit count");
    QuantumState s;
    s.n_qubits = n_qubits;
    s.mode = Mode::Pure;
    s.data.assign(std::size_t(1) << n_qubits, cdouble(0.0, 0.0));
    s.data[0] = cdouble(1.0, 0.0);
    return s;
  }

  // uniform superposition H^n |0^n>
  static QuantumState plus_state(int n_qubits) {
    QuantumState s = zero_state(n_qubits);
    cdouble amp(1.0 / std::sqrt(static_cast<double>(s.dim())), 0.0);
    for (auto& a : s.data) a = amp;
    return s;
  }

  static QuantumState pure(int n_qubits, std::vector<cdouble> amplitudes) {
    QuantumState s;
    s.n_qubits = n_qubits;
    s.mode = Mode::Pure;
    if (amplitudes.size() != (std::size_t(1) << n_qubits))
      throw std::invalid_argument("amplitude count != 2^n");
    s.data = std::move(amplitudes);
    return s;
  }

  // |psi><psi| of a pure state
  static QuantumState density_of(const QuantumState& psi) {
    if (psi.mode != Mode::Pure) throw std::invalid_argument("density_of needs a pure state");
    QuantumState s;
    s.n_qubits = psi.n_qubits;
    s.mode = Mode::Mixed;
    std::size_t d = psi.dim();
    s.data.assign(d * d, cdouble(0.0, 0.0));
    for (std::size_t c = 0; c < d; ++c) {
      cdouble cc = std::conj(psi.data[c]);
      for (std::size_t r = 0; r < d; ++r) s.data[r + c * d] = psi.data[r] * cc;
    }
    return s;
  }

  double norm_squared() const {
    if (mode != Mode::Pure) throw std::logic_error("norm_squared is pure-mode only");
    double n = 0.0;
    for (const auto& a : data) n += std::norm(a);
    return n;
  }

  cdouble trace() const {
    if (mode != Mode::Mixed) throw std::logic_error("trace is mixed-mode only");
    cdouble t = 0.0;
    std::size_t d = dim();
    for (std::size_t i = 0; i < d; ++i) t += data[i + i * d];
    return t;
  }
};

}  // namespace tdqas
