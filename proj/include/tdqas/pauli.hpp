#pragma once

#include <cmath>
#include <cstdint>
#include <fstream>
#include <iomanip>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace tdqas {

struct PauliTerm {
  double coeff;
  std::string ops;  // ops[q] is the Pauli on qubit q, one of 'IXYZ'
};

// Bit masks describing how a Pauli string acts on basis indices:
// P|i> = i^{n_y} * (-1)^{popcount(i & phase)} |i ^ flip>
struct PauliMasks {
  std::uint64_t flip = 0;   // X and Y qubits
  std::uint64_t phase = 0;  // Y and Z qubits
  int n_y = 0;
};

inline PauliMasks pauli_masks(const std::string& ops) {
  PauliMasks m;
  for (std::size_t q = 0; q < ops.size(); ++q) {
    switch (ops[q]) {
      case 'I':
        break;
      case 'X':
        m.flip |= 1ull << q;
        break;
      case 'Y':
        m.flip |= 1ull << q;
        m.phase |= 1ull << q;
        ++m.n_y;
        break;
      case 'Z':
        m.phase |= 1ull << q;
        break;
      default:
        throw std::invalid_argument("invalid pauli character");
    }
  }
  return m;
}

class PauliSum {
 public:
  explicit PauliSum(int n_qubits) : n_qubits_(n_qubits) {
    if (n_qubits < 1) throw std::invalid_argument("PauliSum needs >= 1 qubit");
  }

  int n_qubits() const { return n_qubits_; }
  const std::vector<PauliTerm>& terms() const { return terms_; }
  std::size_t size() const { return terms_.size(); }

  // merges coefficients of identical strings
  void add(double coeff, std::string_view ops) {
    if (!std::isfinite(coeff)) throw std::invalid_argument("non-finite coefficient");
    if (static_cast<int>(ops.size()) != n_qubits_)
      throw std::invalid_argument("pauli string length != n_qubits");
    for (char c : ops)
      if (c != 'I' && c != 'X' && c != 'Y' && c != 'Z')
        throw std::invalid_argument("invalid pauli character");
    std::string key(ops);
    auto it = index_.find(key);
    if (it != index_.end()) {
      terms_[it->second].coeff += coeff;
    } else {
      index_.emplace(key, terms_.size());
      terms_.push_back({coeff, std::move(key)});
    }
  }

  // text format: one term per line, "<coefficient> <pauli_string>";
  // '#' starts a comment line, blank lines ignored
  static PauliSum parse(std::istream& in) {
    std::vector<std::pair<double, std::string>> raw;
    std::string line;
    while (std::getline(in, line)) {
      std::size_t start = line.find_first_not_of(" \t\r");
      if (start == std::string::npos) continue;
      if (line[start] == '#') continue;
      std::istringstream ls(line.substr(start));
      double c;
      std::string ops;
      if (!(ls >> c >> ops)) throw std::invalid_argument("malformed pauli term: " + line);
      raw.emplace_back(c, ops);
    }
    if (raw.empty()) throw std::invalid_argument("pauli sum text has no terms");
    PauliSum sum(static_cast<int>(raw.front().second.size()));
    for (auto& [c, ops] : raw) sum.add(c, ops);
    return sum;
  }

  static PauliSum parse_text(const std::string& text) {
    std::istringstream in(text);
    return parse(in);
  }

  static PauliSum load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open pauli sum file: " + path);
    return parse(in);
  }

  void write(std::ostream& out) const {
    out << std::setprecision(17);
    for (const auto& t : terms_) out << t.coeff << ' ' << t.ops << '\n';
  }

  std::string to_text() const {
    std::ostringstream out;
    write(out);
    return out.str();
  }

 private:
  int n_qubits_;
  std::vector<PauliTerm> terms_;
  std::unordered_map<std::string, std::size_t> index_;
};

}  // namespace tdqas
