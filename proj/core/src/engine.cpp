#include "tnqsim/engine.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <stdexcept>

#include <fmt/format.h>

#include "tnqsim/dense.hpp"
#include "tnqsim/errors.hpp"
#include "tnqsim/mps.hpp"
#include "tnqsim/rng.hpp"
#include "tnqsim/tensornet.hpp"

namespace tnqsim {

Backend backend_from_string(const std::string& s) {
  if (s == "mps") return Backend::Mps;
  if (s == "net") return Backend::Net;
  if (s == "dense") return Backend::Dense;
  throw std::invalid_argument(fmt::format("unknown backend '{}'", s));
}

std::string to_string(Backend b) {
  switch (b) {
    case Backend::Mps: return "mps";
    case Backend::Net: return "net";
    case Backend::Dense: return "dense";
  }
  return "dense";
}

Family family_from_string(const std::string& s) {
  if (s == "ladder") return Family::Ladder;
  if (s == "crossing") return Family::CrossingLayer;
  if (s == "cluster") return Family::Cluster;
  if (s == "random") return Family::Random;
  throw std::invalid_argument(fmt::format("unknown family '{}'", s));
}

std::string to_string(Family f) {
  switch (f) {
    case Family::Ladder: return "ladder";
    case Family::CrossingLayer: return "crossing";
    case Family::Cluster: return "cluster";
    case Family::Random: return "random";
  }
  return "ladder";
}

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

struct CircuitShape {
  std::vector<std::pair<int, std::string>> measures;  // (line, register), program order
  bool terminal_only = true;  // no gate follows any measurement
  bool has_conditions = false;
};

CircuitShape shape_of(const Circuit& c) {
  CircuitShape s;
  bool seen_measure = false;
  for (const Instruction& instr : c.instructions) {
    if (instr.kind == InstructionKind::Measure) {
      s.measures.emplace_back(instr.line, instr.register_id);
      seen_measure = true;
    } else if (instr.is_gate()) {
      if (seen_measure) s.terminal_only = false;
      if (instr.condition) s.has_conditions = true;
    }
  }
  return s;
}

std::vector<std::pair<Complex, Complex>> input_pairs(const Circuit& c) {
  std::vector<std::pair<Complex, Complex>> amps(c.n_qubits, {Complex{1.0}, Complex{0.0}});
  for (const Instruction& instr : c.instructions) {
    if (instr.kind == InstructionKind::InputState) {
      amps[instr.line] = {instr.amp0, instr.amp1};
    }
  }
  return amps;
}

Circuit without_measures(const Circuit& c) {
  Circuit out;
  out.n_qubits = c.n_qubits;
  out.linear = c.linear;
  for (const Instruction& instr : c.instructions) {
    if (instr.kind != InstructionKind::Measure) out.instructions.push_back(instr);
  }
  return out;
}

std::map<std::string, double> table_from_amplitudes(const ComplexVector& amps, int n,
                                                    const std::vector<int>& lines) {
  std::map<std::string, double> table;
  for (std::size_t idx = 0; idx < amps.dim; ++idx) {
    const double w = std::norm(amps.entries[idx]);
    if (w == 0.0) continue;
    std::string key(lines.size(), '0');
    for (std::size_t q = 0; q < lines.size(); ++q) {
      key[q] = ((idx >> (n - 1 - lines[q])) & 1u) ? '1' : '0';
    }
    table[key] += w;
  }
  return table;
}

void check_table_normalization(const std::map<std::string, double>& table) {
  double sum = 0.0;
  for (const auto& [key, p] : table) sum += p;
  if (std::abs(sum - 1.0) > 1e-9) {
    throw NumericalError(fmt::format("exact probability table sums to {:.12g}", sum));
  }
}

// Evolve an MPS through the gate instructions of a lowered circuit, sampling
// measurements from their exact local probabilities. Registers resolve
// classical controls. Optionally records the max bond after each instruction.
struct MpsRunResult {
  std::vector<std::pair<std::string, int>> registers;
  int peak_chi = 1;
  MpsState state;
};

MpsRunResult evolve_mps(const Circuit& lowered, Rng* rng,
                        const std::vector<int>* forced, int max_chi,
                        std::vector<int>* trace) {
  MpsRunResult r{.registers = {}, .peak_chi = 1,
                 .state = MpsState::from_product(input_pairs(lowered), max_chi)};
  std::map<std::string, int> regs;
  std::size_t measure_index = 0;
  for (const Instruction& instr : lowered.instructions) {
    switch (instr.kind) {
      case InstructionKind::InputState:
        break;
      case InstructionKind::OneQubitGate:
      case InstructionKind::TwoQubitGate: {
        if (instr.condition) {
          auto it = regs.find(instr.condition->register_id);
          if (it == regs.end()) {
            throw ValidationError(fmt::format("condition references unwritten register '{}'",
                                              instr.condition->register_id));
          }
          if (it->second != instr.condition->required_bit) break;
        }
        if (instr.kind == InstructionKind::OneQubitGate) {
          r.state.apply_1q(instr.line, instr.matrix);
        } else {
          r.state.apply_2q(instr.line, instr.line2, instr.matrix);
        }
        break;
      }
      case InstructionKind::Measure: {
        MeasurementOutcome m;
        if (forced != nullptr) {
          if (measure_index >= forced->size()) {
            throw std::invalid_argument("not enough forced outcomes");
          }
          m = r.state.measure_forced(instr.line, (*forced)[measure_index]);
        } else {
          m = r.state.measure(instr.line, *rng);
        }
        ++measure_index;
        regs[instr.register_id] = m.outcome;
        r.registers.emplace_back(instr.register_id, m.outcome);
        break;
      }
    }
    r.peak_chi = std::max(r.peak_chi, r.state.max_bond());
    if (trace != nullptr) trace->push_back(r.state.max_bond());
  }
  return r;
}

std::string sample_index_bits(const ComplexVector& amps, int n, Rng& rng) {
  double u = rng.next_unit();
  std::size_t chosen = amps.dim - 1;
  double acc = 0.0;
  for (std::size_t i = 0; i < amps.dim; ++i) {
    acc += std::norm(amps.entries[i]);
    if (u < acc) {
      chosen = i;
      break;
    }
  }
  std::string bits(static_cast<std::size_t>(n), '0');
  for (int l = 0; l < n; ++l) {
    bits[static_cast<std::size_t>(l)] = ((chosen >> (n - 1 - l)) & 1u) ? '1' : '0';
  }
  return bits;
}

}  // namespace

RunReport run(const Circuit& c, const RunConfig& cfg) {
  {
    const auto diags = validate(c);
    if (!diags.empty()) {
      std::string joined;
      for (const auto& d : diags) joined += d + "; ";
      throw ValidationError(fmt::format("invalid circuit: {}", joined));
    }
  }

  RunReport report;
  report.backend = to_string(cfg.backend);
  report.shots = cfg.shots;
  report.seed = cfg.seed;
  report.rng_algorithm = Rng::kAlgorithmId;

  const CircuitShape shape = shape_of(c);
  const bool exactable = shape.terminal_only && !shape.has_conditions && !c.linear;
  std::vector<int> measured_lines;
  for (const auto& [line, reg] : shape.measures) {
    measured_lines.push_back(line);
    report.register_order.push_back(reg);
  }
  if (shape.measures.empty()) {
    for (int l = 0; l < c.n_qubits; ++l) {
      measured_lines.push_back(l);
      report.register_order.push_back(fmt::format("q{}", l));
    }
  }

  if (cfg.report.d_profile) {
    report.d_profile_raw = d_profile(c, CircuitStage::Raw);
    report.d_profile_reduced = d_profile(reduce(c), CircuitStage::Reduced);
  }

  const auto t_start = Clock::now();
  Circuit lowered;
  if (cfg.backend != Backend::Dense) {
    const auto t0 = Clock::now();
    lowered = lower_to_adjacent(reduce(c));
    report.timings_seconds["transform"] = seconds_since(t0);
  }

  switch (cfg.backend) {
    case Backend::Dense: {
      if (c.n_qubits > cfg.caps.max_dense_qubits) {
        throw CapExceeded("dense_qubits", static_cast<std::size_t>(c.n_qubits),
                          static_cast<std::size_t>(cfg.caps.max_dense_qubits));
      }
      if (c.linear && (cfg.shots > 0 || cfg.exact)) {
        throw ValidationError("the dense backend samples only unitary circuits");
      }
      if (cfg.exact) {
        if (!exactable) {
          throw ValidationError(
              "exact tables require terminal measurements and no classical control");
        }
        const auto t0 = Clock::now();
        auto table = full_distribution(c, measured_lines, cfg.caps.max_dense_qubits);
        check_table_normalization(table);
        report.exact_probs = std::move(table);
        report.timings_seconds["exact"] = seconds_since(t0);
      }
      if (cfg.shots > 0) {
        const auto t0 = Clock::now();
        for (int s = 0; s < cfg.shots; ++s) {
          Rng rng(Rng::stream_seed(cfg.seed, static_cast<std::uint64_t>(s)));
          DenseTrajectory traj = sample_trajectory(c, rng, cfg.caps.max_dense_qubits);
          if (!shape.measures.empty()) {
            std::string bits;
            for (const auto& [reg, bit] : traj.registers) bits.push_back(bit ? '1' : '0');
            report.samples.push_back(std::move(bits));
          } else {
            report.samples.push_back(
                sample_index_bits(traj.final_state.amplitudes, c.n_qubits, rng));
          }
        }
        report.timings_seconds["sampling"] = seconds_since(t0);
      } else if (!cfg.exact) {
        const auto t0 = Clock::now();
        Rng rng(cfg.seed);
        sample_trajectory(c, rng, cfg.caps.max_dense_qubits);
        report.timings_seconds["evolve"] = seconds_since(t0);
      }
      break;
    }

    case Backend::Mps: {
      if (c.linear) {
        throw ValidationError("the MPS backend rejects circuits with the 'linear' flag");
      }
      if (cfg.exact) {
        if (!exactable) {
          throw ValidationError(
              "exact tables require terminal measurements and no classical control");
        }
        if (c.n_qubits > cfg.caps.max_dense_qubits) {
          throw CapExceeded("dense_qubits", static_cast<std::size_t>(c.n_qubits),
                            static_cast<std::size_t>(cfg.caps.max_dense_qubits),
                            "exact table");
        }
        const auto t0 = Clock::now();
        const Circuit gates_only = without_measures(lowered);
        std::vector<int> trace;
        MpsRunResult r = evolve_mps(gates_only, nullptr, nullptr, cfg.caps.max_chi,
                                    cfg.report.chi_trace ? &trace : nullptr);
        report.peak_chi = std::max(report.peak_chi, r.peak_chi);
        if (cfg.report.chi_trace) report.chi_trace = std::move(trace);
        auto table = table_from_amplitudes(
            r.state.to_statevector(cfg.caps.max_dense_qubits), c.n_qubits, measured_lines);
        check_table_normalization(table);
        report.exact_probs = std::move(table);
        report.timings_seconds["exact"] = seconds_since(t0);
      }
      if (cfg.shots > 0) {
        const auto t0 = Clock::now();
        for (int s = 0; s < cfg.shots; ++s) {
          Rng rng(Rng::stream_seed(cfg.seed, static_cast<std::uint64_t>(s)));
          std::vector<int> trace;
          const bool want_trace = cfg.report.chi_trace && s == 0 && !report.chi_trace;
          MpsRunResult r = evolve_mps(lowered, &rng, nullptr, cfg.caps.max_chi,
                                      want_trace ? &trace : nullptr);
          if (want_trace) report.chi_trace = std::move(trace);
          report.peak_chi = std::max(report.peak_chi, r.peak_chi);
          if (!shape.measures.empty()) {
            std::string bits;
            for (const auto& [reg, bit] : r.registers) bits.push_back(bit ? '1' : '0');
            report.samples.push_back(std::move(bits));
          } else {
            std::string bits;
            for (int l = 0; l < c.n_qubits; ++l) {
              bits.push_back(r.state.measure(l, rng).outcome ? '1' : '0');
            }
            report.samples.push_back(std::move(bits));
          }
        }
        report.timings_seconds["sampling"] = seconds_since(t0);
      }
      if (cfg.shots == 0 && !cfg.exact) {
        // Evolution-only run: one seeded trajectory, so caps and traces still
        // fire and adaptive circuits resolve their conditions.
        const auto t0 = Clock::now();
        Rng rng(cfg.seed);
        std::vector<int> trace;
        MpsRunResult r = evolve_mps(lowered, &rng, nullptr, cfg.caps.max_chi,
                                    cfg.report.chi_trace ? &trace : nullptr);
        report.peak_chi = std::max(report.peak_chi, r.peak_chi);
        if (cfg.report.chi_trace) report.chi_trace = std::move(trace);
        report.timings_seconds["evolve"] = seconds_since(t0);
      }
      break;
    }

    case Backend::Net: {
      NetConfig net_cfg;
      net_cfg.max_frontier = cfg.caps.max_frontier;
      ContractionStats stats;
      if (c.linear) {
        if (cfg.shots > 0 || cfg.exact) {
          throw ValidationError(
              "linear circuits support contraction-value queries only (no sampling)");
        }
        const auto t0 = Clock::now();
        const Complex value =
            contract_line_by_line(build_doubled_network(lowered, {}), net_cfg, &stats);
        if (std::abs(value.imag()) > 1e-10) {
          throw NumericalError(
              fmt::format("norm contraction has imaginary residue {:.3e}", value.imag()));
        }
        report.norm_squared = std::max(value.real(), 0.0);
        report.timings_seconds["contract"] = seconds_since(t0);
      } else {
        if (cfg.exact) {
          if (!exactable) {
            throw ValidationError(
                "exact tables require terminal measurements and no classical control");
          }
          if (c.n_qubits > cfg.caps.max_dense_qubits) {
            throw CapExceeded("dense_qubits", static_cast<std::size_t>(c.n_qubits),
                              static_cast<std::size_t>(cfg.caps.max_dense_qubits),
                              "exact table");
          }
          const auto t0 = Clock::now();
          const ComplexVector amps =
              final_amplitudes(without_measures(lowered), net_cfg, &stats);
          auto table = table_from_amplitudes(amps, c.n_qubits, measured_lines);
          check_table_normalization(table);
          report.exact_probs = std::move(table);
          report.timings_seconds["exact"] = seconds_since(t0);
        }
        if (cfg.shots > 0) {
          const auto t0 = Clock::now();
          const bool adaptive = !shape.terminal_only || shape.has_conditions;
          for (int s = 0; s < cfg.shots; ++s) {
            const std::uint64_t shot_seed =
                Rng::stream_seed(cfg.seed, static_cast<std::uint64_t>(s));
            if (adaptive || !shape.measures.empty()) {
              AdaptiveRun r = run_adaptive(lowered, shot_seed, net_cfg);
              std::string bits;
              for (const AdaptiveStep& step : r.transcript()) {
                bits.push_back(step.outcome ? '1' : '0');
              }
              report.samples.push_back(std::move(bits));
              stats.peak_open_indices =
                  std::max(stats.peak_open_indices, r.stats().peak_open_indices);
              stats.peak_elements = std::max(stats.peak_elements, r.stats().peak_elements);
            } else {
              JointSample js =
                  sample_joint(lowered, measured_lines, shot_seed, net_cfg, &stats);
              report.samples.push_back(js.bits);
            }
          }
          report.timings_seconds["sampling"] = seconds_since(t0);
        }
        if (cfg.shots == 0 && !cfg.exact) {
          const auto t0 = Clock::now();
          if (!shape.measures.empty() || shape.has_conditions) {
            const AdaptiveRun r = run_adaptive(lowered, cfg.seed, net_cfg);
            stats.peak_open_indices =
                std::max(stats.peak_open_indices, r.stats().peak_open_indices);
            stats.peak_elements = std::max(stats.peak_elements, r.stats().peak_elements);
          } else {
            const Complex value =
                contract_line_by_line(build_doubled_network(lowered, {}), net_cfg, &stats);
            report.norm_squared = std::max(value.real(), 0.0);
          }
          report.timings_seconds["contract"] = seconds_since(t0);
        }
      }
      report.peak_frontier_indices = stats.peak_open_indices;
      break;
    }
  }

  if (cfg.report.timing) report.timings_seconds["total"] = seconds_since(t_start);
  return report;
}

Circuit generate_family(const FamilySpec& spec) {
  Rng rng(spec.seed);
  Circuit c;
  switch (spec.family) {
    case Family::Ladder: {
      if (spec.n < 2) throw std::invalid_argument("ladder requires n >= 2");
      c.n_qubits = spec.n;
      for (int i = 0; i + 1 < spec.n; ++i) {
        c.instructions.push_back(Instruction::two_qubit(i, i + 1, random_unitary(4, rng)));
      }
      break;
    }
    case Family::CrossingLayer: {
      if (spec.n < 2 || spec.n % 2 != 0) {
        throw std::invalid_argument("crossing layer requires even n >= 2");
      }
      c.n_qubits = spec.n;
      const int half = spec.n / 2;
      for (int i = 0; i < half; ++i) {
        c.instructions.push_back(
            Instruction::two_qubit(i, i + half, random_unitary(4, rng)));
      }
      break;
    }
    case Family::Cluster: {
      const int rows = spec.m;
      const int cols = spec.n;
      if (rows < 1 || cols < 1 || rows * cols < 2) {
        throw std::invalid_argument("cluster requires M, N >= 1 and at least two qubits");
      }
      c.n_qubits = rows * cols;
      for (int l = 0; l < c.n_qubits; ++l) {
        c.instructions.push_back(Instruction::one_qubit(l, gatelib::h()));
      }
      // Column-major grid labelling: line = row*N + col, so every edge has
      // range 1 (row neighbour) or N (column neighbour).
      for (int r = 0; r < rows; ++r) {
        for (int col = 0; col < cols; ++col) {
          const int line = r * cols + col;
          if (col + 1 < cols) {
            c.instructions.push_back(Instruction::two_qubit(line, line + 1, gatelib::cz()));
          }
          if (r + 1 < rows) {
            c.instructions.push_back(
                Instruction::two_qubit(line, line + cols, gatelib::cz()));
          }
        }
      }
      break;
    }
    case Family::Random: {
      if (spec.n < 2) throw std::invalid_argument("random family requires n >= 2");
      if (spec.gate_count < 0) throw std::invalid_argument("gate count must be >= 0");
      c.n_qubits = spec.n;
      for (int g = 0; g < spec.gate_count; ++g) {
        const int j = static_cast<int>(rng.next_unit() * spec.n);
        int k = static_cast<int>(rng.next_unit() * (spec.n - 1));
        if (k >= j) ++k;
        c.instructions.push_back(Instruction::two_qubit(j, k, random_unitary(4, rng)));
      }
      break;
    }
  }
  return c;
}

std::vector<BenchEntry> bench(const std::vector<FamilySpec>& specs, const RunConfig& cfg,
                              int repeats) {
  std::vector<BenchEntry> entries;
  for (const FamilySpec& spec : specs) {
    BenchEntry e;
    e.family = to_string(spec.family);
    try {
      const Circuit c = generate_family(spec);
      e.n_qubits = c.n_qubits;
      e.gate_count = two_qubit_gate_count(c);
      const Circuit reduced = reduce(c);
      e.d_reduced = d_profile(reduced, CircuitStage::Reduced).d_max;
      const Circuit lowered = lower_to_adjacent(reduced);

      std::vector<double> times;
      for (int rep = 0; rep < std::max(repeats, 1); ++rep) {
        const auto t0 = Clock::now();
        switch (cfg.backend) {
          case Backend::Mps: {
            MpsRunResult r =
                evolve_mps(without_measures(lowered), nullptr, nullptr, cfg.caps.max_chi,
                           nullptr);
            e.peak_chi = std::max(e.peak_chi, r.peak_chi);
            break;
          }
          case Backend::Net: {
            NetConfig net_cfg;
            net_cfg.max_frontier = cfg.caps.max_frontier;
            ContractionStats stats;
            contract_line_by_line(build_doubled_network(without_measures(lowered), {}),
                                  net_cfg, &stats);
            e.peak_frontier_indices =
                std::max(e.peak_frontier_indices, stats.peak_open_indices);
            break;
          }
          case Backend::Dense: {
            if (c.n_qubits > cfg.caps.max_dense_qubits) {
              throw CapExceeded("dense_qubits", static_cast<std::size_t>(c.n_qubits),
                                static_cast<std::size_t>(cfg.caps.max_dense_qubits));
            }
            StateVector s = StateVector::initial_state(c);
            for (const Instruction& instr : c.instructions) {
              if (instr.is_gate()) s = apply_gate(s, instr);
            }
            break;
          }
        }
        times.push_back(seconds_since(t0));
      }
      std::sort(times.begin(), times.end());
      e.wall_seconds = times[times.size() / 2];
      e.status = "ok";
    } catch (const CapExceeded& ex) {
      e.status = "cap_exceeded";
      e.message = ex.what();
    }
    entries.push_back(std::move(e));
  }
  return entries;
}

namespace {

nlohmann::ordered_json profile_json(const DProfile& p) {
  nlohmann::ordered_json j;
  j["computed_on"] = to_string(p.computed_on);
  j["per_line"] = p.per_line;
  j["d"] = p.d_max;
  return j;
}

}  // namespace

nlohmann::ordered_json RunReport::to_json() const {
  nlohmann::ordered_json j;
  j["schema_version"] = kSchemaVersion;
  j["rng_algorithm"] = rng_algorithm;
  j["backend"] = backend;
  j["seed"] = seed;
  j["shots"] = shots;
  j["register_order"] = register_order;
  j["samples"] = samples;
  if (exact_probs) j["exact_probs"] = *exact_probs;
  if (d_profile_raw) j["d_profile_raw"] = profile_json(*d_profile_raw);
  if (d_profile_reduced) j["d_profile_reduced"] = profile_json(*d_profile_reduced);
  if (chi_trace) j["chi_trace"] = *chi_trace;
  j["peak_chi"] = peak_chi;
  j["peak_frontier_indices"] = peak_frontier_indices;
  if (norm_squared) j["norm_squared"] = *norm_squared;
  j["timings_seconds"] = timings_seconds;
  return j;
}

nlohmann::ordered_json bench_to_json(const std::vector<BenchEntry>& entries) {
  nlohmann::ordered_json j;
  j["schema_version"] = kSchemaVersion;
  j["rng_algorithm"] = Rng::kAlgorithmId;
  nlohmann::ordered_json list = nlohmann::ordered_json::array();
  for (const BenchEntry& e : entries) {
    nlohmann::ordered_json je;
    je["family"] = e.family;
    je["n_qubits"] = e.n_qubits;
    je["gate_count"] = e.gate_count;
    je["d_reduced"] = e.d_reduced;
    je["wall_seconds"] = e.wall_seconds;
    je["peak_chi"] = e.peak_chi;
    je["peak_frontier_indices"] = e.peak_frontier_indices;
    je["status"] = e.status;
    je["message"] = e.message;
    list.push_back(std::move(je));
  }
  j["entries"] = std::move(list);
  return j;
}

nlohmann::ordered_json analyze_to_json(const Circuit& c, CircuitStage stage) {
  Circuit staged = c;
  if (stage == CircuitStage::Reduced) {
    staged = reduce(c);
  } else if (stage == CircuitStage::Lowered) {
    staged = lower_to_adjacent(reduce(c));
  }
  const DProfile profile = d_profile(staged, stage);
  const CostEstimate cost = cost_estimate(profile);

  nlohmann::ordered_json j;
  j["schema_version"] = kSchemaVersion;
  j["rng_algorithm"] = Rng::kAlgorithmId;
  j["stage"] = to_string(stage);
  j["n"] = staged.n_qubits;
  j["per_line"] = profile.per_line;
  j["d"] = profile.d_max;
  j["gate_count"] = two_qubit_gate_count(staged);
  nlohmann::ordered_json jc;
  jc["n"] = cost.n;
  jc["d"] = cost.d;
  jc["bound_exponent"] = cost.bound_exponent;
  jc["log2_estimate"] = cost.log2_estimate;
  jc["note"] = cost.note;
  j["cost_estimate"] = std::move(jc);
  return j;
}

}  // namespace tnqsim
