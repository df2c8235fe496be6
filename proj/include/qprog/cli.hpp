// Copyright 2026 The qprog Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Command-line layer: JSON run configurations, single-point optimization,
// parameter sweeps written as CSV, program-state files and the verification
// suite. The executable in tools/ is a thin argument parser around this.

#ifndef QPROG_CLI_HPP
#define QPROG_CLI_HPP

#include <atomic>
#include <chrono>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <functional>
#include <iomanip>
#include <iostream>
#include <map>
#include <memory>
#include <mutex>
#include <numbers>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "json.hpp"
#include "qprog/optim.hpp"
#include "qprog/processors.hpp"
#include "qprog/random.hpp"
#include "qprog/sdp.hpp"

namespace qprog::cli {

using json = nlohmann::json;

enum ExitCode : int {
  kExitOk = 0,
  kExitValidation = 1,
  kExitNumerical = 2,
  kExitVerifyFailure = 3,
};

inline const std::vector<std::string>& method_names() {
  static const std::vector<std::string> names{
      "subgradient",  "frank_wolfe", "sdp_diamond",         "sdp_trace",
      "sdp_fidelity", "choi_sdp",    "closed_form_unitary", "choi_baseline"};
  return names;
}

/// Cost reported in a result row: any channels cost plus the diamond distance.
struct ReportCost {
  bool diamond = false;
  CostSpec cost;

  std::string name() const {
    if (diamond) {
      return "Cdiamond";
    }
    std::ostringstream s;
    s << cost_name(cost.kind);
    if (cost.kind == CostKind::Cmu || cost.kind == CostKind::Cp) {
      s << "(" << std::setprecision(12) << cost.param << ")";
    }
    return s.str();
  }

  bool operator==(const ReportCost& o) const {
    return diamond == o.diamond &&
           (diamond || (cost.kind == o.cost.kind && cost.param == o.cost.param));
  }
};

struct ProcessorSpec {
  std::string kind = "teleportation";
  int n = 1;
  int d = 2;
  PbtMeasurement measurement = PbtMeasurement::kMaxEntangled;
  PqcHamiltonians hamiltonians = default_pqc_hamiltonians();
};

struct RunConfig {
  ProcessorSpec processor;
  json channel;  // kind + parameters
  std::string grid_param;  // channel parameter swept, empty if none
  std::vector<double> param_grid;
  std::vector<int> n_grid;
  std::vector<std::string> methods;
  CostSpec cost{CostKind::C1, 0.0};
  std::vector<ReportCost> report;
  OptimConfig optimizer;
  SdpOptions sdp;
  std::uint64_t seed = 0;
  std::string canonical;  // canonical JSON text of the input document
};

struct ResultRow {
  std::string processor;
  int n = 0;
  std::optional<double> param;
  std::string method;
  std::string cost_kind;
  double cost = std::numeric_limits<double>::quiet_NaN();
  int iterations = 0;
  double wall_seconds = 0.0;
  std::string status = "ok";
};

// ---------------------------------------------------------------------------
// Config parsing

namespace detail {

[[noreturn]] inline void field_error(const std::string& field,
                                     const std::string& what) {
  throw ValidationError("config field '" + field + "': " + what);
}

inline const json& require(const json& obj, const std::string& key,
                           const std::string& path) {
  if (!obj.is_object() || !obj.contains(key)) {
    field_error(path + key, "missing");
  }
  return obj.at(key);
}

inline double get_number(const json& v, const std::string& field) {
  if (!v.is_number()) {
    field_error(field, "expected a number");
  }
  return v.get<double>();
}

inline int get_int(const json& v, const std::string& field, int lo) {
  if (!v.is_number_integer()) {
    field_error(field, "expected an integer");
  }
  int x = v.get<int>();
  if (x < lo) {
    field_error(field, "must be at least " + std::to_string(lo));
  }
  return x;
}

inline std::string get_string(const json& v, const std::string& field) {
  if (!v.is_string()) {
    field_error(field, "expected a string");
  }
  return v.get<std::string>();
}

/// Matrix given as rows of [re, im] pairs.
inline CMatrix parse_matrix(const json& v, const std::string& field) {
  if (!v.is_array() || v.empty()) {
    field_error(field, "expected a non-empty array of rows");
  }
  const auto rows = static_cast<Eigen::Index>(v.size());
  Eigen::Index cols = -1;
  CMatrix m;
  for (Eigen::Index r = 0; r < rows; ++r) {
    const json& row = v[static_cast<std::size_t>(r)];
    if (!row.is_array()) {
      field_error(field, "row " + std::to_string(r) + " is not an array");
    }
    if (cols < 0) {
      cols = static_cast<Eigen::Index>(row.size());
      m.resize(rows, cols);
    } else if (static_cast<Eigen::Index>(row.size()) != cols) {
      field_error(field, "ragged rows");
    }
    for (Eigen::Index c = 0; c < cols; ++c) {
      const json& e = row[static_cast<std::size_t>(c)];
      if (e.is_number()) {
        m(r, c) = e.get<double>();
      } else if (e.is_array() && e.size() == 2 && e[0].is_number() &&
                 e[1].is_number()) {
        m(r, c) = Complex(e[0].get<double>(), e[1].get<double>());
      } else {
        field_error(field, "entries must be numbers or [re, im] pairs");
      }
    }
  }
  return m;
}

inline ReportCost parse_report_cost(const json& v, const std::string& field) {
  ReportCost rc;
  std::string kind;
  if (v.is_string()) {
    kind = v.get<std::string>();
  } else if (v.is_object()) {
    kind = get_string(require(v, "kind", field + "."), field + ".kind");
  } else {
    field_error(field, "expected a cost name or object");
  }
  if (kind == "Cdiamond") {
    rc.diamond = true;
    return rc;
  }
  try {
    rc.cost.kind = parse_cost_kind(kind);
  } catch (const ValidationError& e) {
    field_error(field, e.what());
  }
  if (rc.cost.kind == CostKind::Cmu) {
    if (!v.is_object() || !v.contains("mu")) {
      field_error(field, "Cmu needs a 'mu' parameter");
    }
    rc.cost.param = get_number(v.at("mu"), field + ".mu");
    if (!(rc.cost.param > 0)) {
      field_error(field + ".mu", "must be positive");
    }
  } else if (rc.cost.kind == CostKind::Cp) {
    if (!v.is_object() || !v.contains("p")) {
      field_error(field, "Cp needs a 'p' parameter");
    }
    rc.cost.param = get_number(v.at("p"), field + ".p");
    if (!(rc.cost.param >= 1)) {
      field_error(field + ".p", "must be at least 1");
    }
  }
  return rc;
}

inline const std::vector<std::string>& channel_kinds() {
  static const std::vector<std::string> k{"identity", "amplitude_damping",
                                          "depolarizing", "dephasing",
                                          "pauli", "unitary", "rotation"};
  return k;
}

inline const std::vector<std::string>& processor_kinds() {
  static const std::vector<std::string> k{"teleportation", "pbt",
                                          "pbt_reduced", "pqc", "mpqc"};
  return k;
}

template <class T>
bool contains(const std::vector<T>& v, const T& x) {
  return std::find(v.begin(), v.end(), x) != v.end();
}

}  // namespace detail

/// Target channel for a channel spec with an optional overridden parameter.
inline KrausChannel build_channel(const json& spec, const std::string& grid_param,
                                  std::optional<double> value, int d_hint) {
  json s = spec;
  if (value && !grid_param.empty()) {
    s[grid_param] = *value;
  }
  const std::string kind = detail::get_string(detail::require(s, "kind", "channel."),
                                              "channel.kind");
  auto num = [&](const char* key) {
    return detail::get_number(detail::require(s, key, "channel."),
                              std::string("channel.") + key);
  };
  int d = s.contains("d") ? detail::get_int(s.at("d"), "channel.d", 2) : d_hint;
  if (kind == "identity") return identity_channel(d);
  if (kind == "amplitude_damping") return amplitude_damping(num("p"));
  if (kind == "depolarizing") return depolarizing(num("p"), d);
  if (kind == "dephasing") return dephasing(num("p"));
  if (kind == "rotation") return rotation(num("theta"));
  if (kind == "pauli") {
    const json& pr = detail::require(s, "probs", "channel.");
    if (!pr.is_array()) detail::field_error("channel.probs", "expected an array");
    std::vector<double> probs;
    for (std::size_t i = 0; i < pr.size(); ++i) {
      probs.push_back(detail::get_number(pr[i], "channel.probs[" + std::to_string(i) + "]"));
    }
    return pauli_channel(probs);
  }
  if (kind == "unitary") {
    return unitary_channel(detail::parse_matrix(detail::require(s, "U", "channel."), "channel.U"));
  }
  detail::field_error("channel.kind", "unknown channel '" + kind + "'");
}

/// Target unitary for channels that are unitary (unitary, rotation, identity).
inline std::optional<CMatrix> channel_unitary(const KrausChannel& ch) {
  if (ch.kraus_ops().size() == 1 && is_unitary(ch.kraus_ops()[0], 1e-9)) {
    return ch.kraus_ops()[0];
  }
  return std::nullopt;
}

/// Parses and validates a configuration document.
inline RunConfig parse_config(const json& doc) {
  using namespace detail;
  if (!doc.is_object()) {
    throw ValidationError("config: top level must be an object");
  }
  RunConfig cfg;
  cfg.canonical = doc.dump();

  const json& proc = require(doc, "processor", "");
  cfg.processor.kind = get_string(require(proc, "kind", "processor."), "processor.kind");
  if (!contains(processor_kinds(), cfg.processor.kind)) {
    field_error("processor.kind", "unknown processor '" + cfg.processor.kind + "'");
  }
  if (proc.contains("N")) cfg.processor.n = get_int(proc.at("N"), "processor.N", 1);
  if (proc.contains("d")) cfg.processor.d = get_int(proc.at("d"), "processor.d", 2);
  if (proc.contains("measurement")) {
    std::string m = get_string(proc.at("measurement"), "processor.measurement");
    if (m == "max_entangled") {
      cfg.processor.measurement = PbtMeasurement::kMaxEntangled;
    } else if (m == "singlet") {
      cfg.processor.measurement = PbtMeasurement::kSinglet;
    } else {
      field_error("processor.measurement", "expected 'max_entangled' or 'singlet'");
    }
  }
  if (proc.contains("H0")) cfg.processor.hamiltonians.h0 = parse_matrix(proc.at("H0"), "processor.H0");
  if (proc.contains("H1")) cfg.processor.hamiltonians.h1 = parse_matrix(proc.at("H1"), "processor.H1");
  if (proc.contains("H0_ad")) {
    cfg.processor.hamiltonians.h0 = ad_hamiltonian(get_number(proc.at("H0_ad"), "processor.H0_ad"));
  }

  cfg.channel = require(doc, "channel", "");
  if (!cfg.channel.is_object()) field_error("channel", "expected an object");
  const std::string ck = get_string(require(cfg.channel, "kind", "channel."), "channel.kind");
  if (!contains(channel_kinds(), ck)) field_error("channel.kind", "unknown channel '" + ck + "'");

  if (doc.contains("method") && doc.contains("methods")) {
    field_error("methods", "give either 'method' or 'methods', not both");
  }
  if (doc.contains("method")) {
    cfg.methods.push_back(get_string(doc.at("method"), "method"));
  } else {
    const json& ms = require(doc, "methods", "");
    if (!ms.is_array() || ms.empty()) field_error("methods", "expected a non-empty array");
    for (std::size_t i = 0; i < ms.size(); ++i) {
      cfg.methods.push_back(get_string(ms[i], "methods[" + std::to_string(i) + "]"));
    }
  }
  for (const std::string& m : cfg.methods) {
    if (!contains(method_names(), m)) field_error("method", "unknown method '" + m + "'");
  }

  if (doc.contains("cost")) {
    ReportCost rc = parse_report_cost(doc.at("cost"), "cost");
    if (rc.diamond) field_error("cost", "Cdiamond is only available through SDP methods");
    cfg.cost = rc.cost;
  }
  if (doc.contains("report")) {
    const json& r = doc.at("report");
    if (!r.is_array() || r.empty()) field_error("report", "expected a non-empty array");
    for (std::size_t i = 0; i < r.size(); ++i) {
      cfg.report.push_back(parse_report_cost(r[i], "report[" + std::to_string(i) + "]"));
    }
  }

  cfg.optimizer.cost = cfg.cost;
  if (doc.contains("optimizer")) {
    const json& o = doc.at("optimizer");
    if (!o.is_object()) field_error("optimizer", "expected an object");
    if (o.contains("max_iters")) cfg.optimizer.max_iters = get_int(o.at("max_iters"), "optimizer.max_iters", 1);
    if (o.contains("tolerance")) cfg.optimizer.tolerance = get_number(o.at("tolerance"), "optimizer.tolerance");
    if (o.contains("window")) cfg.optimizer.window = get_int(o.at("window"), "optimizer.window", 1);
    if (o.contains("initial")) {
      std::string init = get_string(o.at("initial"), "optimizer.initial");
      if (init == "maximally_mixed") {
        cfg.optimizer.initial = InitialProgram::kMaximallyMixed;
      } else if (init == "random") {
        cfg.optimizer.initial = InitialProgram::kRandom;
      } else {
        field_error("optimizer.initial", "expected 'maximally_mixed' or 'random'");
      }
    }
    if (o.contains("learning_rate")) {
      const json& lr = o.at("learning_rate");
      std::string kind = get_string(require(lr, "kind", "optimizer.learning_rate."),
                                    "optimizer.learning_rate.kind");
      if (kind == "inv_sqrt") {
        cfg.optimizer.learning_rate.kind = LearningRateKind::kInvSqrt;
      } else if (kind == "harmonic") {
        cfg.optimizer.learning_rate.kind = LearningRateKind::kHarmonic;
      } else {
        field_error("optimizer.learning_rate.kind", "expected 'inv_sqrt' or 'harmonic'");
      }
      if (lr.contains("a")) cfg.optimizer.learning_rate.a = get_number(lr.at("a"), "optimizer.learning_rate.a");
      if (lr.contains("b")) cfg.optimizer.learning_rate.b = get_number(lr.at("b"), "optimizer.learning_rate.b");
    }
  }
  if (doc.contains("sdp")) {
    const json& s = doc.at("sdp");
    if (s.contains("tol")) cfg.sdp.tol = get_number(s.at("tol"), "sdp.tol");
    if (s.contains("max_iters")) cfg.sdp.max_iters = get_int(s.at("max_iters"), "sdp.max_iters", 1);
  }
  if (doc.contains("seed")) {
    const json& sv = doc.at("seed");
    if (!sv.is_number_integer() || (!sv.is_number_unsigned() && sv.get<std::int64_t>() < 0)) {
      field_error("seed", "expected a non-negative integer");
    }
    cfg.seed = doc.at("seed").get<std::uint64_t>();
  } else if (cfg.optimizer.initial == InitialProgram::kRandom) {
    field_error("seed", "required when optimizer.initial is 'random'");
  }
  cfg.optimizer.seed = cfg.seed;
  bool uses_optimizer = contains(cfg.methods, std::string("subgradient")) ||
                        contains(cfg.methods, std::string("frank_wolfe"));
  if (uses_optimizer) {
    try {
      cfg.optimizer.validate();
    } catch (const ValidationError& e) {
      field_error("optimizer", e.what());
    }
  }

  if (doc.contains("grid")) {
    const json& g = doc.at("grid");
    if (!g.is_object() || g.empty()) field_error("grid", "expected a non-empty object");
    for (auto it = g.begin(); it != g.end(); ++it) {
      const std::string key = it.key();
      const json& vals = it.value();
      if (!vals.is_array() || vals.empty()) field_error("grid." + key, "grid is empty");
      if (key == "N") {
        for (std::size_t i = 0; i < vals.size(); ++i) {
          cfg.n_grid.push_back(get_int(vals[i], "grid.N[" + std::to_string(i) + "]", 1));
        }
      } else {
        if (!cfg.grid_param.empty()) field_error("grid." + key, "only one channel parameter may be swept");
        cfg.grid_param = key;
        for (std::size_t i = 0; i < vals.size(); ++i) {
          cfg.param_grid.push_back(get_number(vals[i], "grid." + key + "[" + std::to_string(i) + "]"));
        }
      }
    }
  }
  return cfg;
}

inline RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw ValidationError("cannot open config file '" + path + "'");
  }
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ValidationError("config '" + path + "': " + e.what());
  }
  return parse_config(doc);
}

// ---------------------------------------------------------------------------
// Running

inline ProcessorMap build_processor(const ProcessorSpec& s, int n) {
  if (s.kind == "teleportation") return teleportation_processor(s.d);
  if (s.kind == "pbt") return pbt_processor(n, s.d, s.measurement);
  if (s.kind == "pbt_reduced") return pbt_reduced_map(n, s.d, s.measurement);
  if (s.kind == "pqc") return pqc_processor(n, s.hamiltonians);
  if (s.kind == "mpqc") return mpqc_processor(n, s.hamiltonians);
  throw ValidationError("unknown processor '" + s.kind + "'");
}

/// 64-bit FNV-1a.
inline std::uint64_t fnv1a64(const std::string& s) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

inline std::string hex64(std::uint64_t v) {
  std::ostringstream s;
  s << std::hex << std::setw(16) << std::setfill('0') << v;
  return s.str();
}

/// Writes a program state: three header lines, then one matrix row per line
/// as alternating real and imaginary parts.
inline void write_program(std::ostream& os, const ProgramState& p,
                          const std::string& config_hash) {
  const CMatrix& m = p.matrix();
  os << "# dims " << m.rows() << " " << m.cols() << "\n";
  os << "# structure " << structure_name(p.structure) << "\n";
  os << "# config_hash " << config_hash << "\n";
  os << std::setprecision(17);
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    for (Eigen::Index c = 0; c < m.cols(); ++c) {
      os << (c ? " " : "") << m(r, c).real() << " " << m(r, c).imag();
    }
    os << "\n";
  }
}

inline ProgramState read_program(std::istream& is) {
  std::string line, tag;
  Eigen::Index rows = 0, cols = 0;
  std::string structure = "generic";
  for (int h = 0; h < 3; ++h) {
    if (!std::getline(is, line) || line.rfind("# ", 0) != 0) {
      throw ValidationError("program file: malformed header");
    }
    std::istringstream hs(line.substr(2));
    hs >> tag;
    if (tag == "dims") {
      hs >> rows >> cols;
    } else if (tag == "structure") {
      hs >> structure;
    }
  }
  if (rows <= 0 || rows != cols) {
    throw ValidationError("program file: invalid dims");
  }
  CMatrix m(rows, cols);
  for (Eigen::Index r = 0; r < rows; ++r) {
    for (Eigen::Index c = 0; c < cols; ++c) {
      double re, im;
      if (!(is >> re >> im)) {
        throw ValidationError("program file: truncated matrix");
      }
      m(r, c) = Complex(re, im);
    }
  }
  ProgramStructure s = ProgramStructure::kGeneric;
  if (structure == "port-symmetric") s = ProgramStructure::kPortSymmetric;
  if (structure == "choi-power") s = ProgramStructure::kChoiPower;
  return ProgramState{DensityMatrix(m, 1e-8), s};
}

/// Outcome of one method at one grid point.
struct MethodOutcome {
  std::string method;
  ProgramState program;
  const ProcessorMap* processor = nullptr;  // map the program belongs to
  ReportCost native;
  double native_value = 0.0;
  int iterations = 0;
};

namespace detail {

inline std::string sanitize(std::string s) {
  for (char& c : s) {
    if (c == ',' || c == '\n' || c == '"') c = ';';
  }
  return s;
}

inline double evaluate(const ReportCost& rc, const ProcessorMap& p,
                       const CMatrix& chi_e, const CMatrix& pi,
                       const SdpOptions& sdp) {
  if (rc.diamond) {
    return program_diamond_cost(p, chi_e, pi, sdp);
  }
  return program_cost(p, chi_e, pi, rc.cost);
}

}  // namespace detail

/// Runs every configured method at one (N, parameter) grid point.
inline std::vector<ResultRow> run_point(const RunConfig& cfg, int n,
                                        std::optional<double> param,
                                        std::vector<MethodOutcome>* outcomes = nullptr,
                                        std::ostream* warn = nullptr) {
  std::vector<ResultRow> rows;
  KrausChannel ch = build_channel(cfg.channel, cfg.grid_param, param, cfg.processor.d);
  const CMatrix chi_e = choi_of_channel(ch).matrix();
  std::optional<double> shown = param;
  if (!shown) {
    for (const char* key : {"p", "theta"}) {
      if (cfg.channel.contains(key) && cfg.channel.at(key).is_number()) {
        shown = cfg.channel.at(key).get<double>();
      }
    }
  }
  std::unique_ptr<ProcessorMap> proc;
  std::unique_ptr<ProcessorMap> reduced;
  std::string proc_error;
  try {
    proc = std::make_unique<ProcessorMap>(build_processor(cfg.processor, n));
  } catch (const Error& e) {
    proc_error = e.what();
  }

  for (const std::string& method : cfg.methods) {
    auto t0 = std::chrono::steady_clock::now();
    std::vector<ReportCost> report = cfg.report;
    std::optional<MethodOutcome> out;
    std::string error;
    try {
      if (!proc) throw ValidationError(proc_error);
      MethodOutcome o;
      o.method = method;
      o.processor = proc.get();
      if (method == "subgradient" || method == "frank_wolfe") {
        if (method == "frank_wolfe" && cfg.cost.kind == CostKind::C1 && warn) {
          *warn << "warning: Frank-Wolfe on the nonsmooth C1 cost has no "
                   "convergence guarantee; consider Cmu\n";
        }
        OptimResult r = method == "subgradient"
                            ? projected_subgradient(*proc, chi_e, cfg.optimizer)
                            : frank_wolfe(*proc, chi_e, cfg.optimizer);
        o.program = r.program;
        o.native = ReportCost{false, cfg.cost};
        o.native_value = r.final_cost;
        o.iterations = r.iterations;
      } else if (method == "sdp_diamond") {
        ProgramOptimum r = optimize_program_diamond(*proc, chi_e, cfg.sdp);
        o.program = r.program;
        o.native = ReportCost{true, {}};
        o.native_value = r.value;
        o.iterations = r.solution.iterations;
      } else if (method == "sdp_trace") {
        ProgramOptimum r = optimize_program_trace(*proc, chi_e, cfg.sdp);
        o.program = r.program;
        o.native = ReportCost{false, {CostKind::C1, 0.0}};
        o.native_value = r.value;
        o.iterations = r.solution.iterations;
      } else if (method == "sdp_fidelity") {
        ProgramOptimum r = optimize_program_fidelity(*proc, chi_e, cfg.sdp);
        o.program = r.program;
        o.native = ReportCost{false, {CostKind::F, 0.0}};
        o.native_value = r.value;
        o.iterations = r.solution.iterations;
      } else if (method == "choi_sdp") {
        if (cfg.processor.kind != "pbt" && cfg.processor.kind != "pbt_reduced") {
          throw ValidationError("choi_sdp requires a pbt or pbt_reduced processor");
        }
        if (!reduced) {
          reduced = std::make_unique<ProcessorMap>(
              pbt_reduced_map(n, cfg.processor.d, cfg.processor.measurement));
        }
        ProgramOptimum r = optimize_program_diamond(*reduced, chi_e, cfg.sdp);
        o.program = r.program;
        o.processor = reduced.get();
        o.native = ReportCost{true, {}};
        o.native_value = r.value;
        o.iterations = r.solution.iterations;
      } else if (method == "closed_form_unitary") {
        auto u = channel_unitary(ch);
        if (!u) throw ValidationError("closed_form_unitary requires a unitary target channel");
        UnitaryProgram r = learn_unitary_program(*proc, *u);
        if (r.degenerate && warn) {
          *warn << "warning: top eigenvalue is degenerate; returning one maximizer\n";
        }
        o.program = r.program;
        o.native = ReportCost{false, {CostKind::F, 0.0}};
        o.native_value = std::sqrt(std::max(r.fidelity_sq, 0.0));
      } else if (method == "choi_baseline") {
        const std::string& k = cfg.processor.kind;
        if (k == "teleportation" || k == "pbt_reduced") {
          o.program = make_program(chi_e, ProgramStructure::kChoiPower);
        } else if (k == "pbt") {
          o.program = choi_power_program(chi_e, n);
        } else {
          throw ValidationError("choi_baseline is not defined for processor '" + k + "'");
        }
        o.native = ReportCost{false, cfg.cost};
        o.native_value = program_cost(*proc, chi_e, o.program.matrix(), cfg.cost);
      }
      out = std::move(o);
    } catch (const Error& e) {
      error = e.what();
    }
    if (report.empty()) {
      report.push_back(out ? out->native : ReportCost{false, cfg.cost});
    }
    double elapsed_method = std::chrono::duration<double>(
        std::chrono::steady_clock::now() - t0).count();
    for (const ReportCost& rc : report) {
      ResultRow row;
      row.processor = cfg.processor.kind;
      row.n = n;
      row.param = shown;
      row.method = method;
      row.cost_kind = rc.name();
      if (out) {
        auto t1 = std::chrono::steady_clock::now();
        try {
          row.cost = rc == out->native
                         ? out->native_value
                         : detail::evaluate(rc, *out->processor, chi_e,
                                            out->program.matrix(), cfg.sdp);
          row.iterations = out->iterations;
        } catch (const Error& e) {
          row.status = "error: " + detail::sanitize(e.what());
        }
        row.wall_seconds = elapsed_method +
            std::chrono::duration<double>(std::chrono::steady_clock::now() - t1).count();
      } else {
        row.status = "error: " + detail::sanitize(error);
        row.wall_seconds = elapsed_method;
      }
      rows.push_back(std::move(row));
    }
    if (out && outcomes) {
      outcomes->push_back(std::move(*out));
    }
  }
  return rows;
}

// ---------------------------------------------------------------------------
// CSV

inline std::string csv_header() {
  return "processor,N,param,method,cost_kind,cost,iterations,status";
}

inline std::string format_number(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.12g", v);
  return buf;
}

inline std::string csv_line(const ResultRow& r) {
  std::ostringstream s;
  s << r.processor << "," << r.n << ","
    << (r.param ? format_number(*r.param) : std::string()) << "," << r.method
    << "," << r.cost_kind << "," << format_number(r.cost) << "," << r.iterations
    << "," << r.status;
  return s.str();
}

inline void write_csv(std::ostream& os, const std::vector<ResultRow>& rows) {
  os << csv_header() << "\n";
  for (const ResultRow& r : rows) {
    os << csv_line(r) << "\n";
  }
}

inline void write_timing(std::ostream& os, const std::vector<ResultRow>& rows) {
  os << "row,wall_seconds\n";
  for (std::size_t i = 0; i < rows.size(); ++i) {
    os << i << "," << format_number(rows[i].wall_seconds) << "\n";
  }
}

/// Two-column "param cost" blocks, one per (processor, N, method, cost kind),
/// separated by two blank lines so gnuplot can address them with `index`.
inline void write_gnuplot(std::ostream& os, const std::vector<ResultRow>& rows) {
  std::vector<std::string> keys;
  std::map<std::string, std::vector<const ResultRow*>> blocks;
  for (const ResultRow& r : rows) {
    std::string key = r.processor + " N=" + std::to_string(r.n) + " " + r.method +
                      " " + r.cost_kind;
    if (!blocks.count(key)) keys.push_back(key);
    blocks[key].push_back(&r);
  }
  for (std::size_t b = 0; b < keys.size(); ++b) {
    if (b) os << "\n\n";
    os << "# " << keys[b] << "\n";
    for (const ResultRow* r : blocks[keys[b]]) {
      os << (r->param ? format_number(*r->param) : std::string("0")) << " "
         << format_number(r->cost) << "\n";
    }
  }
}

// ---------------------------------------------------------------------------
// Commands

struct CommandOptions {
  std::string config_path;
  std::string out_path;
  std::optional<std::uint64_t> seed;
  std::optional<double> tol;
  int jobs = 1;
  std::string gnuplot_path;
  std::string program_path;
};

/// Applies --seed/--tol and records them in the canonical config, so the
/// program-file hash reflects the effective settings.
inline void apply_overrides(RunConfig& cfg, const CommandOptions& o) {
  if (!o.seed && !o.tol) return;
  json doc = cfg.canonical.empty() ? json::object() : json::parse(cfg.canonical);
  if (o.seed) {
    cfg.seed = *o.seed;
    cfg.optimizer.seed = *o.seed;
    doc["seed"] = *o.seed;
  }
  if (o.tol) {
    if (!(*o.tol > 0)) throw ValidationError("--tol must be positive");
    cfg.sdp.tol = *o.tol;
    cfg.optimizer.tolerance = *o.tol;
    doc["sdp"]["tol"] = *o.tol;
    doc["optimizer"]["tolerance"] = *o.tol;
  }
  cfg.canonical = doc.dump();
}

namespace detail {

inline void write_file(const std::string& path,
                       const std::function<void(std::ostream&)>& fn) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw ValidationError("cannot write '" + path + "'");
  fn(f);
}

inline std::string strip_extension(const std::string& path) {
  auto slash = path.find_last_of('/');
  auto dot = path.find_last_of('.');
  if (dot != std::string::npos && (slash == std::string::npos || dot > slash)) {
    return path.substr(0, dot);
  }
  return path;
}

inline int exit_code_for(const std::vector<ResultRow>& rows) {
  for (const ResultRow& r : rows) {
    if (r.status != "ok") return kExitNumerical;
  }
  return kExitOk;
}

}  // namespace detail

/// Single-point optimization. Writes the CSV to `out_path` (stdout when
/// empty) and each method's program to `<out stem>.<method>.program`, or to
/// `program_path` when exactly one method is configured.
inline int cmd_optimize(RunConfig cfg, const CommandOptions& o,
                        std::ostream& log = std::cerr) {
  apply_overrides(cfg, o);
  const int n = cfg.n_grid.empty() ? cfg.processor.n : cfg.n_grid.front();
  std::optional<double> param;
  if (!cfg.param_grid.empty()) param = cfg.param_grid.front();
  if (cfg.n_grid.size() > 1 || cfg.param_grid.size() > 1) {
    log << "warning: optimize runs a single point; using the first grid values\n";
  }
  std::vector<MethodOutcome> outcomes;
  std::vector<ResultRow> rows = run_point(cfg, n, param, &outcomes, &log);
  if (o.out_path.empty()) {
    write_csv(std::cout, rows);
  } else {
    detail::write_file(o.out_path, [&](std::ostream& f) { write_csv(f, rows); });
    detail::write_file(o.out_path + ".timing.csv",
                       [&](std::ostream& f) { write_timing(f, rows); });
  }
  const std::string hash = hex64(fnv1a64(cfg.canonical));
  for (const MethodOutcome& m : outcomes) {
    std::string path;
    if (!o.program_path.empty() && cfg.methods.size() == 1) {
      path = o.program_path;
    } else if (!o.out_path.empty()) {
      path = detail::strip_extension(o.out_path) + "." + m.method + ".program";
    }
    if (!path.empty()) {
      detail::write_file(path, [&](std::ostream& f) { write_program(f, m.program, hash); });
    }
  }
  return detail::exit_code_for(rows);
}

/// Sweep over the grid in row-major order (N outer, parameter inner); grid
/// points are dispatched to `jobs` workers and merged in grid order.
inline std::vector<ResultRow> run_benchmark(const RunConfig& cfg, int jobs,
                                            std::ostream* warn = nullptr) {
  std::vector<int> ns = cfg.n_grid.empty() ? std::vector<int>{cfg.processor.n} : cfg.n_grid;
  std::vector<std::optional<double>> ps;
  if (cfg.param_grid.empty()) {
    ps.push_back(std::nullopt);
  } else {
    for (double v : cfg.param_grid) ps.push_back(v);
  }
  struct Point {
    int n;
    std::optional<double> p;
  };
  std::vector<Point> points;
  for (int n : ns) {
    for (const auto& p : ps) points.push_back({n, p});
  }
  std::vector<std::vector<ResultRow>> results(points.size());
  std::atomic<std::size_t> next{0};
  std::mutex warn_mutex;
  auto worker = [&]() {
    for (std::size_t i = next++; i < points.size(); i = next++) {
      std::ostringstream local;
      results[i] = run_point(cfg, points[i].n, points[i].p, nullptr, &local);
      if (warn && !local.str().empty()) {
        std::lock_guard<std::mutex> lock(warn_mutex);
        *warn << local.str();
      }
    }
  };
  const int workers = std::max(1, std::min<int>(jobs, static_cast<int>(points.size())));
  std::vector<std::thread> pool;
  for (int w = 1; w < workers; ++w) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();
  std::vector<ResultRow> rows;
  for (auto& r : results) {
    for (auto& row : r) rows.push_back(std::move(row));
  }
  return rows;
}

inline int cmd_benchmark(RunConfig cfg, const CommandOptions& o,
                         std::ostream& log = std::cerr) {
  apply_overrides(cfg, o);
  if (cfg.n_grid.empty() && cfg.param_grid.empty()) {
    throw ValidationError("config field 'grid': benchmark needs a non-empty grid");
  }
  if (o.jobs < 1) throw ValidationError("--jobs must be at least 1");
  std::vector<ResultRow> rows = run_benchmark(cfg, o.jobs, &log);
  if (o.out_path.empty()) {
    write_csv(std::cout, rows);
  } else {
    detail::write_file(o.out_path, [&](std::ostream& f) { write_csv(f, rows); });
    detail::write_file(o.out_path + ".timing.csv",
                       [&](std::ostream& f) { write_timing(f, rows); });
  }
  if (!o.gnuplot_path.empty()) {
    detail::write_file(o.gnuplot_path, [&](std::ostream& f) { write_gnuplot(f, rows); });
  }
  std::size_t failed = 0;
  for (const ResultRow& r : rows) failed += r.status != "ok";
  if (failed) log << "warning: " << failed << " of " << rows.size() << " rows failed\n";
  return kExitOk;
}

// ---------------------------------------------------------------------------
// Verification suite

struct CheckResult {
  std::string name;
  bool passed = false;
  double residual = 0.0;
  double tolerance = 0.0;
  double seconds = 0.0;
  std::string note;
};

namespace detail {

struct Check {
  std::string name;
  double tolerance;
  std::function<double()> residual;
};

// Largest relative mismatch between the directional derivative of the cost
// and <∇C, Δ> over random traceless Hermitian directions around a full-rank
// random program.
inline double gradient_check(const ProcessorMap& p, const CMatrix& chi_e,
                             const CostSpec& cost, int trials, Rng& rng) {
  const int n = p.d_prog();
  double worst = 0.0;
  for (int t = 0; t < trials; ++t) {
    CMatrix pi = 0.8 * random_density(n, rng).matrix() +
                 0.2 * identity(n) / static_cast<double>(n);
    CMatrix dir = random_hermitian(n, rng);
    dir -= identity(n) * (dir.trace() / static_cast<double>(n));
    dir /= frobenius_norm(dir);
    const double h = 1e-6;
    double fd = (program_cost(p, chi_e, pi + h * dir, cost) -
                 program_cost(p, chi_e, pi - h * dir, cost)) / (2 * h);
    double an = (cost_gradient(p, chi_e, pi, cost).adjoint() * dir).trace().real();
    worst = std::max(worst, std::abs(fd - an) / std::max(1.0, std::abs(fd)));
  }
  return worst;
}

inline std::vector<Check> fast_checks() {
  std::vector<Check> c;
  c.push_back({"hermlin.eig_reconstruct", 1e-10, [] {
                 Rng rng(11);
                 double worst = 0.0;
                 for (int d : {2, 5, 16}) {
                   CMatrix h = random_hermitian(d, rng);
                   worst = std::max(worst, max_abs(herm_eig(h).reconstruct() - h));
                 }
                 return worst;
               }});
  c.push_back({"hermlin.partial_trace_product", 1e-12, [] {
                 Rng rng(12);
                 CMatrix a = random_density(2, rng).matrix();
                 CMatrix b = random_density(3, rng).matrix();
                 SubsystemShape sh{{2, 3}};
                 return std::max(max_abs(partial_trace(kron(a, b), sh, {0}) - a),
                                 max_abs(partial_trace(kron(a, b), sh, {1}) - b));
               }});
  c.push_back({"hermlin.sqrt_psd", 1e-10, [] {
                 Rng rng(13);
                 CMatrix r = random_density(6, rng).matrix();
                 CMatrix s = sqrt_psd(r);
                 return max_abs(s * s - r);
               }});
  c.push_back({"channels.choi_marginal", 1e-12, [] {
                 Rng rng(14);
                 double worst = 0.0;
                 for (int i = 0; i < 5; ++i) {
                   CMatrix chi = choi_of_channel(random_channel(2, 3, 3, rng)).matrix();
                   CMatrix m = partial_trace(chi, SubsystemShape{2, 3}, {0});
                   worst = std::max(worst, max_abs(m - identity(2) / 2.0));
                 }
                 return worst;
               }});
  c.push_back({"channels.apply_via_choi", 1e-12, [] {
                 Rng rng(15);
                 KrausChannel ch = random_channel(2, 2, 4, rng);
                 CMatrix rho = random_density(2, rng).matrix();
                 return max_abs(apply_via_choi(choi_of_channel(ch).matrix(), 2, 2, rho) -
                                ch.apply(rho));
               }});
  c.push_back({"optim.simplex_projection", 1e-12, [] {
                 RVector x(4);
                 x << 0.9, 0.4, -0.2, 0.1;
                 RVector y = project_to_simplex(x);
                 RVector expect(4);
                 expect << 0.75, 0.25, 0.0, 0.0;
                 return (y - expect).cwiseAbs().maxCoeff();
               }});
  c.push_back({"processors.teleportation_pauli", 1e-12, [] {
                 ProcessorMap t = teleportation_processor(2);
                 KrausChannel ch = pauli_channel({0.7, 0.1, 0.1, 0.1});
                 CMatrix chi = choi_of_channel(ch).matrix();
                 return max_abs(t.apply(chi) - chi);
               }});
  c.push_back({"processors.pqc_ad_special_point", 1e-10, [] {
                 double worst = 0.0;
                 for (double p : {0.25, 0.5, 0.9}) {
                   ProcessorMap q = pqc_processor(1, PqcHamiltonians{ad_hamiltonian(p),
                                                                     default_pqc_hamiltonians().h1});
                   CMatrix pi = CMatrix::Zero(4, 4);
                   pi(0, 0) = 1.0;
                   worst = std::max(worst, trace_distance_cost(
                                               choi_of_channel(amplitude_damping(p)).matrix(),
                                               q.apply(pi)));
                 }
                 return worst;
               }});
  for (CostKind k : {CostKind::C1, CostKind::CF, CostKind::Cmu}) {
    CostSpec cost{k, k == CostKind::Cmu ? 0.1 : 0.0};
    c.push_back({"optim.gradient_" + cost_name(k) + "_teleportation", 1e-5, [cost] {
                   Rng rng(16);
                   ProcessorMap t = teleportation_processor(2);
                   CMatrix chi = choi_of_channel(random_channel(2, 2, 2, rng)).matrix();
                   return gradient_check(t, chi, cost, 5, rng);
                 }});
  }
  c.push_back({"optim.frank_wolfe_weights", 1e-12, [] {
                 ProcessorMap t = teleportation_processor(2);
                 CMatrix chi = choi_of_channel(rotation(0.3)).matrix();
                 OptimConfig cfg;
                 cfg.max_iters = 10;
                 cfg.window = 1000;
                 std::vector<CMatrix> it;
                 frank_wolfe(t, chi, cfg, &it);
                 // π_k − k/(k+2) π_{k−1} is the new vertex with weight 2/(k+2).
                 double worst = 0.0;
                 for (std::size_t k = 1; k < it.size(); ++k) {
                   double w0 = (it[k] - it[k - 1] * (static_cast<double>(k) / (k + 2.0)))
                                   .trace().real();
                   worst = std::max(worst, std::abs(w0 - 2.0 / (k + 2.0)));
                 }
                 return worst;
               }});
  return c;
}

inline std::vector<Check> full_checks() {
  std::vector<Check> c;
  c.push_back({"processors.pbt3_full_vs_reduced", 1e-10, [] {
                 Rng rng(21);
                 ProcessorMap full = pbt_processor(3, 2);
                 ProcessorMap red = pbt_reduced_map(3, 2);
                 double worst = 0.0;
                 for (int i = 0; i < 3; ++i) {
                   CMatrix chi = choi_of_channel(random_channel(2, 2, 2, rng)).matrix();
                   worst = std::max(worst, max_abs(full.apply(choi_power_program(chi, 3).matrix()) -
                                                   red.apply(chi)));
                 }
                 return worst;
               }});
  c.push_back({"processors.pbt3_symmetrize", 1e-10, [] {
                 Rng rng(22);
                 ProcessorMap full = pbt_processor(3, 2);
                 CMatrix pi = random_density(64, rng).matrix();
                 return max_abs(full.apply(pi) -
                                full.apply(symmetrize_program(pi, 3, 2).matrix()));
               }});
  c.push_back({"sdp.diamond_ad_extremes", 1e-6, [] {
                 double v = diamond_distance(choi_of_channel(amplitude_damping(0.0)),
                                             choi_of_channel(amplitude_damping(1.0)));
                 return std::abs(v - 2.0);
               }});
  c.push_back({"sdp.pauli_exact", 1e-6, [] {
                 ProcessorMap t = teleportation_processor(2);
                 CMatrix chi = choi_of_channel(pauli_channel({0.4, 0.3, 0.2, 0.1})).matrix();
                 return std::max(optimize_program_trace(t, chi).value,
                                 optimize_program_diamond(t, chi).value);
               }});
  c.push_back({"sdp.diamond_trace_sandwich", 1e-7, [] {
                 Rng rng(23);
                 double worst = 0.0;
                 for (int i = 0; i < 3; ++i) {
                   ChoiMatrix a = choi_of_channel(random_channel(2, 2, 2, rng));
                   ChoiMatrix b = choi_of_channel(random_channel(2, 2, 2, rng));
                   double c1 = trace_distance_cost(a.matrix(), b.matrix());
                   double dia = diamond_distance(a, b);
                   worst = std::max({worst, c1 - dia, dia - 2.0 * c1});
                 }
                 return std::max(worst, 0.0);
               }});
  c.push_back({"sdp.pbt3_depolarizing_threshold", 1e-6, [] {
                 ProcessorMap red = pbt_reduced_map(3, 2);
                 CMatrix chi = choi_of_channel(depolarizing(0.6)).matrix();
                 return optimize_program_diamond(red, chi).value;
               }});
  c.push_back({"sdp.fidelity_matches_closed_form", 1e-6, [] {
                 ProcessorMap t = teleportation_processor(2);
                 CMatrix u = rotation_unitary(std::numbers::pi / 4);
                 CMatrix chi = choi_of_channel(unitary_channel(u)).matrix();
                 double f = optimize_program_fidelity(t, chi).value;
                 double cf = std::sqrt(learn_unitary_program(t, u).fidelity_sq);
                 return std::abs(f - cf);
               }});
  return c;
}

}  // namespace detail

/// Runs the verification suite. `level` is "fast" or "full".
inline std::vector<CheckResult> run_verify(const std::string& level) {
  if (level != "fast" && level != "full") {
    throw ValidationError("unknown verify level '" + level + "' (expected fast or full)");
  }
  std::vector<detail::Check> checks = detail::fast_checks();
  if (level == "full") {
    for (auto& c : detail::full_checks()) checks.push_back(std::move(c));
  }
  std::vector<CheckResult> out;
  for (const detail::Check& c : checks) {
    CheckResult r;
    r.name = c.name;
    r.tolerance = c.tolerance;
    auto t0 = std::chrono::steady_clock::now();
    try {
      r.residual = c.residual();
      r.passed = std::isfinite(r.residual) && r.residual <= c.tolerance;
    } catch (const Error& e) {
      r.residual = std::numeric_limits<double>::quiet_NaN();
      r.note = e.what();
    }
    r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    out.push_back(std::move(r));
  }
  return out;
}

inline int cmd_verify(const std::string& level, std::ostream& os) {
  std::vector<CheckResult> results = run_verify(level);
  int failed = 0;
  for (const CheckResult& r : results) {
    failed += !r.passed;
    os << (r.passed ? "PASS " : "FAIL ") << std::left << std::setw(40) << r.name
       << " residual=" << format_number(r.residual)
       << " tol=" << format_number(r.tolerance) << " time="
       << std::fixed << std::setprecision(2) << r.seconds << "s"
       << std::defaultfloat;
    if (!r.note.empty()) os << " (" << r.note << ")";
    os << "\n";
  }
  os << (results.size() - failed) << "/" << results.size() << " checks passed\n";
  return failed ? kExitVerifyFailure : kExitOk;
}

inline void cmd_channels(std::ostream& os) {
  os << "kind               parameters\n"
     << "identity           d (default: processor d)\n"
     << "amplitude_damping  p in [0,1]\n"
     << "depolarizing       p in [0,1], d\n"
     << "dephasing          p in [0,1]\n"
     << "pauli              probs: d^2 probabilities over X^a Z^b ({I,X,Y,Z} for d=2)\n"
     << "unitary            U: matrix of [re, im] pairs\n"
     << "rotation           theta (exp(i theta X))\n";
}

inline void cmd_processors(std::ostream& os) {
  os << "kind           program dimension  cap\n"
     << "teleportation  d^2                none\n"
     << "pbt            d^(2N)             program dimension <= " << kMaxPbtProgramDim << " (N <= 3 at d = 2)\n"
     << "pbt_reduced    d^2 (Choi set)     POVM dimension d^(N+1) <= " << kMaxPbtPovmDim << " (N <= 8 at d = 2)\n"
     << "pqc            2^(N+1)            N <= " << kMaxPqcRegisters << "\n"
     << "mpqc           2*3^N              N <= " << kMaxMpqcRegisters << "\n";
}

}  // namespace qprog::cli

#endif  // QPROG_CLI_HPP
