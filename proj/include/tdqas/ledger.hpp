#pragma once

#include <array>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"

namespace tdqas {

enum class PhaseTag : std::uint8_t { Baseline = 0, TD, GT, Retrain, Experiment };

inline const char* phase_tag_name(PhaseTag t) {
  switch (t) {
    case PhaseTag::Baseline: return "baseline";
    case PhaseTag::TD: return "TD";
    case PhaseTag::GT: return "GT";
    case PhaseTag::Retrain: return "retrain";
    case PhaseTag::Experiment: return "experiment";
  }
  throw std::invalid_argument("unknown phase tag");
}

// Accumulates per-circuit execution times, split by phase.  Entry recording is
// optional (totals are always maintained, in append order, so a kept entry
// list re-sums to the totals bit-exactly).
class CostLedger {
 public:
  explicit CostLedger(bool keep_entries = false) : keep_entries_(keep_entries) {}

  void add(PhaseTag tag, double microseconds) {
    auto& t = totals_[static_cast<std::size_t>(tag)];
    t.time += microseconds;
    t.n += 1;
    if (keep_entries_) entries_.emplace_back(tag, microseconds);
  }

  double total(PhaseTag tag) const { return totals_[static_cast<std::size_t>(tag)].time; }
  std::uint64_t count(PhaseTag tag) const { return totals_[static_cast<std::size_t>(tag)].n; }

  double grand_total() const {
    double s = 0.0;
    for (const auto& t : totals_) s += t.time;
    return s;
  }

  std::uint64_t total_count() const {
    std::uint64_t s = 0;
    for (const auto& t : totals_) s += t.n;
    return s;
  }

  const std::vector<std::pair<PhaseTag, double>>& entries() const { return entries_; }

  // appends the other ledger's per-tag totals (entry lists are not carried)
  void merge(const CostLedger& other) {
    for (std::size_t i = 0; i < totals_.size(); ++i) {
      totals_[i].time += other.totals_[i].time;
      totals_[i].n += other.totals_[i].n;
    }
  }

  nlohmann::json to_json() const {
    nlohmann::json j;
    for (auto tag : {PhaseTag::Baseline, PhaseTag::TD, PhaseTag::GT, PhaseTag::Retrain,
                     PhaseTag::Experiment})
      j[phase_tag_name(tag)] = total(tag);
    return j;
  }

 private:
  struct Totals {
    double time = 0.0;
    std::uint64_t n = 0;
  };
  std::array<Totals, 5> totals_{};
  bool keep_entries_;
  std::vector<std::pair<PhaseTag, double>> entries_;
};

}  // namespace tdqas
