#pragma once

#include <cstdint>
#include <iomanip>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"

#include "config.hpp"
#include "dqas.hpp"
#include "experiments.hpp"
#include "ledger.hpp"
#include "problems.hpp"
#include "searchspace.hpp"
#include "simulator.hpp"
#include "supernet.hpp"
#include "trainer.hpp"

namespace tdqas {

inline Objective build_objective(const RunConfig& cfg) {
  const TaskSettings& t = cfg.task_settings;
  switch (cfg.task) {
    case TaskKind::VqeH2: return Objective::vqe(hydrogen());
    case TaskKind::VqeHeisenberg: return Objective::vqe(heisenberg(cfg.n_qubits()));
    case TaskKind::VqeTfim: return Objective::vqe(tfim(cfg.n_qubits()));
    case TaskKind::MaxCut: {
      Rng groot(t.graph_seed);
      std::vector<Graph> graphs;
      for (int g = 0; g < t.n_graphs; ++g) {
        Rng grng = groot.child(static_cast<std::uint64_t>(g));
        Graph gg = er_graph(cfg.n_qubits(), t.edge_prob, grng);
        while (gg.edges.empty()) gg = er_graph(cfg.n_qubits(), t.edge_prob, grng);
        graphs.push_back(std::move(gg));
      }
      return Objective::maxcut_ratio(std::move(graphs), t.plus_start);
    }
    case TaskKind::Classify: {
      Dataset ds = generate_entanglement_dataset(
          cfg.n_qubits(), t.n_train, t.n_test, {t.band_low_min, t.band_low_max},
          {t.band_high_min, t.band_high_max}, Rng(t.dataset_seed));
      return Objective::classification(std::move(ds), t.batch_size);
    }
  }
  throw std::invalid_argument("unknown task");
}

struct CircuitProperties {
  int depth = 0;
  int n_param = 0;
  int n_gates = 0;  // non-identity elements
};

inline CircuitProperties circuit_properties(const Circuit& c) {
  CircuitProperties p;
  p.depth = circuit_depth(c);
  for (const auto& e : c.elements) {
    p.n_param += is_parameterized(e.kind) ? 1 : 0;
    p.n_gates += is_identity(e.kind) ? 0 : 1;
  }
  return p;
}

struct RunArtifacts {
  nlohmann::json report;
  CostLedger ledger;
  Circuit circuit;
  std::vector<double> params;
  double metric = 0.0;
};

namespace detail {

inline nlohmann::json space_json(const SearchSpaceReport& rep) {
  return {{"joint", rep.joint_size.str()},
          {"topo", rep.topo_size.str()},
          {"gate_min", rep.gate_size_min.str()},
          {"gate_max", rep.gate_size_max.str()},
          {"compression", rep.compression_factor.convert_to<double>()}};
}

inline nlohmann::json qcc_json(const CostLedger& ledger) {
  return {{"TD", ledger.total(PhaseTag::TD)},
          {"GT", ledger.total(PhaseTag::GT)},
          {"baseline", ledger.total(PhaseTag::Baseline)},
          {"retrain", ledger.total(PhaseTag::Retrain)}};
}

}  // namespace detail

// Executes the configured engine and mode; the report carries the metric, the
// circuit, its properties, per-phase cost totals, and the space accounting.
inline RunArtifacts run_with_artifacts(const RunConfig& cfg) {
  cfg.validate();
  Objective obj = build_objective(cfg);

  RunArtifacts out;
  SearchSpaceReport space;

  if (cfg.engine == EngineKind::Supernet) {
    const SupernetSettings& s = cfg.supernet;
    SupernetConfig base;
    base.n_qubits = obj.n_qubits;
    base.n_layers = s.n_layers;
    base.train = cfg.train;
    base.noise = cfg.noise;

    if (cfg.mode == ModeKind::Baseline) {
      base.gateset = s.gateset;
      base.n_experts = s.n_experts;
      base.t_total = s.t_total;
      base.t_warm = s.t_warm;
      base.n_search = s.n_search;
      SupernetRunResult res = run_supernet_baseline(base, obj, out.ledger);
      out.circuit = std::move(res.circuit);
      out.params = std::move(res.params);
      out.metric = res.value;
      space = layered_space_sizes(s.gateset, base.n_qubits, base.n_layers);
    } else {
      SupernetConfig td = base;
      td.gateset = s.td_gateset;
      td.n_experts = s.td_n_experts;
      td.t_total = s.td_t_total;
      td.t_warm = s.td_t_warm;
      td.n_search = s.td_n_search;
      SupernetConfig gt = base;
      gt.gateset = s.gt_gateset;
      gt.n_search = s.gt_n_search;
      gt.t_extra = s.gt_t_extra;

      TdPhaseResult tdres = run_td_phase(td, obj, out.ledger);
      GtPhaseResult gtres = run_gt_phase(tdres, td, gt, obj, out.ledger);
      out.circuit = std::move(gtres.circuit);
      out.params = std::move(gtres.params);
      out.metric = gtres.value;
      space = layered_space_sizes(s.gateset, base.n_qubits, base.n_layers, tdres.grid);
    }
  } else {
    const DqasSettings& d = cfg.dqas;
    DqasConfig base;
    base.n_qubits = obj.n_qubits;
    base.n_gates = d.n_gates;
    base.lr_structure = d.lr_structure;
    base.train = cfg.train;
    base.noise = cfg.noise;

    if (cfg.mode == ModeKind::Baseline) {
      base.pools = joint_pool(d.gateset, base.n_qubits, base.n_gates);
      base.n_batch = d.n_batch;
      base.n_train = d.n_train;
      DqasResult res = run_dqas(base, obj, out.ledger, PhaseTag::Baseline);
      out.circuit = std::move(res.circuit);
      out.params = std::move(res.params);
      out.metric = res.value;
      space = sequence_space_sizes(d.gateset, base.n_qubits, base.n_gates);
    } else {
      DqasConfig td = base;
      td.pools = td_pool(d.td_single, d.td_double, base.n_qubits, base.n_gates);
      td.n_batch = d.td_n_batch;
      td.n_train = d.td_n_train;
      DqasConfig gt = base;
      gt.n_batch = d.gt_n_batch;
      gt.n_train = d.gt_n_train;

      DqasTdGtResult res = run_td_gt(td, gt, d.gt_gateset, obj, out.ledger);
      out.circuit = std::move(res.gt.circuit);
      out.params = std::move(res.gt.params);
      out.metric = res.gt.value;
      space = sequence_space_sizes(d.gateset, base.n_qubits, base.n_gates, res.topology);
    }
  }

  CircuitProperties props = circuit_properties(out.circuit);
  out.report = {{"task", task_name(cfg.task)},
                {"engine", engine_name(cfg.engine)},
                {"mode", mode_name(cfg.mode)},
                {"seed", cfg.seed},
                {"metric", out.metric},
                {"properties",
                 {{"depth", props.depth}, {"n_param", props.n_param}, {"n_gates", props.n_gates}}},
                {"qcc", detail::qcc_json(out.ledger)},
                {"search_space", detail::space_json(space)},
                {"circuit", circuit_to_json(out.circuit)}};
  return out;
}

inline nlohmann::json run(const RunConfig& cfg) { return run_with_artifacts(cfg).report; }

// one row per report, the shape of the comparison tables
inline std::string report_summary_csv(const std::vector<nlohmann::json>& reports) {
  if (reports.empty()) throw std::invalid_argument("no reports");
  std::ostringstream os;
  os << "task,engine,mode,seed,metric,depth,n_param,n_gates,"
        "qcc_TD,qcc_GT,qcc_baseline,qcc_retrain,qcc_total\n";
  os << std::setprecision(17);
  for (const auto& r : reports) {
    try {
      const auto& p = r.at("properties");
      const auto& q = r.at("qcc");
      double td = q.at("TD").get<double>();
      double gt = q.at("GT").get<double>();
      double bl = q.at("baseline").get<double>();
      double rt = q.at("retrain").get<double>();
      os << r.at("task").get<std::string>() << ',' << r.at("engine").get<std::string>() << ','
         << r.at("mode").get<std::string>() << ',' << r.at("seed").get<std::uint64_t>() << ','
         << r.at("metric").get<double>() << ',' << p.at("depth").get<int>() << ','
         << p.at("n_param").get<int>() << ',' << p.at("n_gates").get<int>() << ',' << td << ','
         << gt << ',' << bl << ',' << rt << ',' << td + gt + bl + rt << '\n';
    } catch (const nlohmann::json::exception& e) {
      throw std::runtime_error(std::string("report schema mismatch: ") + e.what());
    }
  }
  return os.str();
}

}  // namespace tdqas
