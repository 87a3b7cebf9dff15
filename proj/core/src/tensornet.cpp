#include "tnqsim/tensornet.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <stdexcept>

#include <fmt/format.h>

#include "tnqsim/errors.hpp"
#include "tnqsim/transform.hpp"

namespace tnqsim {

namespace {

constexpr double kImagResidueTol = 1e-10;
constexpr double kProbSumTol = 1e-9;
constexpr double kZeroProbTol = 1e-14;

struct NetEvent {
  enum Kind { Op1, Gate2 } kind = Op1;
  int line = 0;
  int line2 = -1;  // Gate2 second line; first listed line is the basis MSB
  ComplexMatrix m;
};

struct NetBuild {
  int n = 0;
  std::vector<std::pair<Complex, Complex>> inputs;
  std::vector<NetEvent> events;  // forward pass, including trailing insertions
  bool doubled = true;
};

ComplexMatrix scaled_projector(int bit, double scale) {
  ComplexMatrix m = gatelib::projector(bit);
  for (Complex& e : m.entries) e *= scale;
  return m;
}

/// Gate payload data for node legs [out_j, out_k, in_j, in_k].
std::vector<Complex> gate4_data(const ComplexMatrix& m, bool adjoint_side) {
  std::vector<Complex> d(16);
  for (int oj = 0; oj < 2; ++oj) {
    for (int ok = 0; ok < 2; ++ok) {
      for (int ij = 0; ij < 2; ++ij) {
        for (int ik = 0; ik < 2; ++ik) {
          const Complex v = adjoint_side ? std::conj(m.at(ij * 2 + ik, oj * 2 + ok))
                                         : m.at(oj * 2 + ok, ij * 2 + ik);
          d[static_cast<std::size_t>(((oj * 2 + ok) * 2 + ij) * 2 + ik)] = v;
        }
      }
    }
  }
  return d;
}

std::vector<Complex> op2_data(const ComplexMatrix& m, bool adjoint_side) {
  std::vector<Complex> d(4);
  for (int o = 0; o < 2; ++o) {
    for (int i = 0; i < 2; ++i) {
      d[static_cast<std::size_t>(o * 2 + i)] =
          adjoint_side ? std::conj(m.at(i, o)) : m.at(o, i);
    }
  }
  return d;
}

TensorNetwork build_network(const NetBuild& b) {
  TensorNetwork net;
  net.n_lines = b.n;
  net.doubled = b.doubled;
  net.line_chain.assign(b.n, {});

  std::vector<int> ordinal(b.n, 0);
  const auto add_node = [&](TensorNode node, std::initializer_list<int> lines) {
    const int id = static_cast<int>(net.nodes.size());
    net.nodes.push_back(std::move(node));
    for (int l : lines) net.line_chain[l].push_back(id);
  };

  // Input vectors b.
  for (int l = 0; l < b.n; ++l) {
    TensorNode node;
    node.legs = {IndexId{l, 0, NetSide::Forward}};
    node.leg_is_out = {1};
    node.data = {b.inputs[l].first, b.inputs[l].second};
    add_node(std::move(node), {l});
  }

  // Forward pass; remember consumed ordinals for the mirrored pass.
  struct Placed {
    const NetEvent* ev;
    int ord_line;   // in-ordinal on ev->line
    int ord_line2;  // in-ordinal on ev->line2 (Gate2)
  };
  std::vector<Placed> placed;
  placed.reserve(b.events.size());
  for (const NetEvent& ev : b.events) {
    if (ev.kind == NetEvent::Op1) {
      const int o = ordinal[ev.line];
      TensorNode node;
      node.legs = {IndexId{ev.line, o + 1, NetSide::Forward},
                   IndexId{ev.line, o, NetSide::Forward}};
      node.leg_is_out = {1, 0};
      node.data = op2_data(ev.m, false);
      add_node(std::move(node), {ev.line});
      placed.push_back({&ev, o, -1});
      ordinal[ev.line] = o + 1;
    } else {
      if (std::abs(ev.line - ev.line2) != 1) {
        throw ValidationError(
            fmt::format("2-qubit gate on lines ({}, {}) is not adjacent; run "
                        "lower_to_adjacent first",
                        ev.line, ev.line2));
      }
      const int oj = ordinal[ev.line];
      const int ok = ordinal[ev.line2];
      TensorNode node;
      node.legs = {IndexId{ev.line, oj + 1, NetSide::Forward},
                   IndexId{ev.line2, ok + 1, NetSide::Forward},
                   IndexId{ev.line, oj, NetSide::Forward},
                   IndexId{ev.line2, ok, NetSide::Forward}};
      node.leg_is_out = {1, 1, 0, 0};
      node.data = gate4_data(ev.m, false);
      add_node(std::move(node), {std::min(ev.line, ev.line2), std::max(ev.line, ev.line2)});
      placed.push_back({&ev, oj, ok});
      ordinal[ev.line] = oj + 1;
      ordinal[ev.line2] = ok + 1;
    }
  }

  if (!b.doubled) {
    // Amplitude network: each line's final segment stays open.
    return net;
  }

  // Centre stitches: forward segment T_l and adjoint segment T_l are the same
  // wire; a 2-leg identity joins them so both halves keep their own ordinal
  // spaces. Appended here so it follows every forward node in the chain.
  for (int l = 0; l < b.n; ++l) {
    TensorNode node;
    node.legs = {IndexId{l, ordinal[l], NetSide::Adjoint},
                 IndexId{l, ordinal[l], NetSide::Forward}};
    node.leg_is_out = {1, 0};
    node.data = {1.0, 0.0, 0.0, 1.0};
    add_node(std::move(node), {l});
  }

  // Reflected adjoint copy: reversed order, conjugate-transposed data.
  for (auto it = placed.rbegin(); it != placed.rend(); ++it) {
    const NetEvent& ev = *it->ev;
    if (ev.kind == NetEvent::Op1) {
      const int o = it->ord_line;
      TensorNode node;
      node.legs = {IndexId{ev.line, o, NetSide::Adjoint},
                   IndexId{ev.line, o + 1, NetSide::Adjoint}};
      node.leg_is_out = {1, 0};
      node.data = op2_data(ev.m, true);
      add_node(std::move(node), {ev.line});
    } else {
      const int oj = it->ord_line;
      const int ok = it->ord_line2;
      TensorNode node;
      node.legs = {IndexId{ev.line, oj, NetSide::Adjoint},
                   IndexId{ev.line2, ok, NetSide::Adjoint},
                   IndexId{ev.line, oj + 1, NetSide::Adjoint},
                   IndexId{ev.line2, ok + 1, NetSide::Adjoint}};
      node.leg_is_out = {1, 1, 0, 0};
      node.data = gate4_data(ev.m, true);
      add_node(std::move(node), {std::min(ev.line, ev.line2), std::max(ev.line, ev.line2)});
    }
  }

  // Adjoint input vectors b-dagger.
  for (int l = 0; l < b.n; ++l) {
    TensorNode node;
    node.legs = {IndexId{l, 0, NetSide::Adjoint}};
    node.leg_is_out = {0};
    node.data = {std::conj(b.inputs[l].first), std::conj(b.inputs[l].second)};
    add_node(std::move(node), {l});
  }
  return net;
}

/// Extract inputs and forward gate events from a circuit. Measurements are
/// skipped (queries place their own operators); conditioned instructions are
/// rejected (resolve them with run_adaptive).
NetBuild events_from_circuit(const Circuit& c) {
  NetBuild b;
  b.n = c.n_qubits;
  b.inputs.assign(c.n_qubits, {Complex{1.0}, Complex{0.0}});
  for (const Instruction& instr : c.instructions) {
    switch (instr.kind) {
      case InstructionKind::InputState:
        b.inputs[instr.line] = {instr.amp0, instr.amp1};
        break;
      case InstructionKind::Measure:
        break;
      case InstructionKind::OneQubitGate:
      case InstructionKind::TwoQubitGate:
        if (instr.condition) {
          throw ValidationError(
              "conditioned instructions must be resolved via run_adaptive");
        }
        if (instr.kind == InstructionKind::OneQubitGate) {
          b.events.push_back({NetEvent::Op1, instr.line, -1, instr.matrix});
        } else {
          b.events.push_back({NetEvent::Gate2, instr.line, instr.line2, instr.matrix});
        }
        break;
    }
  }
  return b;
}

bool needs_lowering(const Circuit& c) {
  for (const Instruction& instr : c.instructions) {
    if (instr.kind == InstructionKind::TwoQubitGate &&
        std::abs(instr.line - instr.line2) != 1) {
      return true;
    }
  }
  return false;
}

Circuit ensure_adjacent(const Circuit& c) {
  return needs_lowering(c) ? lower_to_adjacent(c) : c;
}

struct Frontier {
  std::vector<IndexId> open;
  std::vector<Complex> data = {Complex{1.0}};
};

void contract_node(Frontier& f, const TensorNode& node, const NetConfig& cfg,
                   int current_line, ContractionStats* stats) {
  const int kf = static_cast<int>(f.open.size());
  const int kn = static_cast<int>(node.legs.size());

  std::vector<int> shared_f_pos;
  std::vector<int> shared_n_leg;
  std::vector<int> new_n_legs;
  std::vector<char> f_is_shared(kf, 0);
  for (int q = 0; q < kn; ++q) {
    auto it = std::find(f.open.begin(), f.open.end(), node.legs[q]);
    if (it == f.open.end()) {
      new_n_legs.push_back(q);
    } else {
      const int p = static_cast<int>(it - f.open.begin());
      shared_f_pos.push_back(p);
      shared_n_leg.push_back(q);
      f_is_shared[p] = 1;
    }
  }
  const int k_new = static_cast<int>(new_n_legs.size());

  std::vector<IndexId> result_open;
  for (int p = 0; p < kf; ++p) {
    if (!f_is_shared[p]) result_open.push_back(f.open[p]);
  }
  for (int q : new_n_legs) result_open.push_back(node.legs[q]);
  std::sort(result_open.begin(), result_open.end());
  const int kr = static_cast<int>(result_open.size());

  const std::size_t result_size = std::size_t{1} << kr;
  if (result_size > cfg.max_frontier) {
    throw CapExceeded("frontier", result_size, cfg.max_frontier,
                      fmt::format("line {}: {} open indices", current_line, kr));
  }
  if (stats != nullptr) {
    stats->peak_open_indices = std::max(stats->peak_open_indices, kr);
    stats->peak_elements = std::max(stats->peak_elements, result_size);
  }

  const auto result_pos = [&](const IndexId& id) {
    return static_cast<int>(std::lower_bound(result_open.begin(), result_open.end(), id) -
                            result_open.begin());
  };

  std::vector<std::size_t> dst_w(kf, 0), node_w(kf, 0);
  for (int p = 0; p < kf; ++p) {
    if (f_is_shared[p]) continue;
    dst_w[p] = std::size_t{1} << (kr - 1 - result_pos(f.open[p]));
  }
  for (std::size_t s = 0; s < shared_f_pos.size(); ++s) {
    node_w[shared_f_pos[s]] = std::size_t{1} << (kn - 1 - shared_n_leg[s]);
  }
  const std::size_t new_count = std::size_t{1} << k_new;
  std::vector<std::size_t> n_from_new(new_count, 0), dst_from_new(new_count, 0);
  for (std::size_t nn = 0; nn < new_count; ++nn) {
    std::size_t nw = 0, dw = 0;
    for (int r = 0; r < k_new; ++r) {
      if ((nn >> (k_new - 1 - r)) & 1u) {
        nw |= std::size_t{1} << (kn - 1 - new_n_legs[r]);
        dw |= std::size_t{1} << (kr - 1 - result_pos(node.legs[new_n_legs[r]]));
      }
    }
    n_from_new[nn] = nw;
    dst_from_new[nn] = dw;
  }

  std::vector<Complex> result(result_size, Complex{0.0});
  const std::size_t f_size = f.data.size();
  for (std::size_t src = 0; src < f_size; ++src) {
    const Complex fv = f.data[src];
    if (fv == Complex{0.0}) continue;
    std::size_t dst_base = 0, n_base = 0;
    for (int p = 0; p < kf; ++p) {
      if ((src >> (kf - 1 - p)) & 1u) {
        dst_base += dst_w[p];
        n_base += node_w[p];
      }
    }
    for (std::size_t nn = 0; nn < new_count; ++nn) {
      result[dst_base + dst_from_new[nn]] += fv * node.data[n_base + n_from_new[nn]];
    }
  }
  f.open = std::move(result_open);
  f.data = std::move(result);
}

Frontier contract_network(const TensorNetwork& net, const NetConfig& cfg,
                          ContractionStats* stats) {
  Frontier f;
  std::vector<char> absorbed(net.nodes.size(), 0);
  for (int l = 0; l < net.n_lines; ++l) {
    for (int id : net.line_chain[l]) {
      if (absorbed[static_cast<std::size_t>(id)]) continue;
      contract_node(f, net.nodes[static_cast<std::size_t>(id)], cfg, l, stats);
      absorbed[static_cast<std::size_t>(id)] = 1;
    }
    if (net.doubled) {
      for (const IndexId& id : f.open) {
        if (id.line == l) {
          throw NumericalError(
              fmt::format("internal contraction error: line {} left an open index", l));
        }
      }
    }
  }
  return f;
}

double real_probability(Complex value, const char* what) {
  if (std::abs(value.imag()) > kImagResidueTol) {
    throw NumericalError(fmt::format("{} has imaginary residue {:.3e}", what, value.imag()));
  }
  return std::clamp(value.real(), 0.0, 1.0);
}

double query_outcome(const NetBuild& base, int line, int bit, const NetConfig& cfg,
                     ContractionStats* stats) {
  NetBuild b = base;
  b.events.push_back({NetEvent::Op1, line, -1, gatelib::projector(bit)});
  const TensorNetwork net = build_network(b);
  const Frontier f = contract_network(net, cfg, stats);
  return real_probability(f.data[0], "outcome probability");
}

}  // namespace

DoubledNetwork build_doubled_network(const Circuit& c,
                                     const std::map<int, ComplexMatrix>& insertions) {
  NetBuild b = events_from_circuit(c);
  for (const NetEvent& ev : b.events) {
    if (ev.kind == NetEvent::Gate2 && std::abs(ev.line - ev.line2) != 1) {
      throw ValidationError(
          fmt::format("2-qubit gate on lines ({}, {}) is not adjacent; run "
                      "lower_to_adjacent first",
                      ev.line, ev.line2));
    }
  }
  for (int l = 0; l < c.n_qubits; ++l) {
    auto it = insertions.find(l);
    ComplexMatrix op = it != insertions.end() ? it->second : ComplexMatrix::identity(2);
    if (op.rows != 2 || op.cols != 2) {
      throw std::invalid_argument("insertions must be 2x2 operators");
    }
    b.events.push_back({NetEvent::Op1, l, -1, std::move(op)});
  }
  b.doubled = true;
  return build_network(b);
}

Complex contract_line_by_line(const TensorNetwork& net, const NetConfig& cfg,
                              ContractionStats* stats) {
  Frontier f = contract_network(net, cfg, stats);
  if (!f.open.empty()) {
    throw NumericalError(
        fmt::format("network is not fully contractible: {} open indices remain",
                    f.open.size()));
  }
  return f.data[0];
}

int estimate_peak_open_indices(const TensorNetwork& net) {
  std::set<IndexId> open;
  std::vector<char> absorbed(net.nodes.size(), 0);
  int peak = 0;
  for (int l = 0; l < net.n_lines; ++l) {
    for (int id : net.line_chain[l]) {
      if (absorbed[static_cast<std::size_t>(id)]) continue;
      absorbed[static_cast<std::size_t>(id)] = 1;
      for (const IndexId& leg : net.nodes[static_cast<std::size_t>(id)].legs) {
        auto it = open.find(leg);
        if (it != open.end()) {
          open.erase(it);
        } else {
          open.insert(leg);
        }
      }
      peak = std::max(peak, static_cast<int>(open.size()));
    }
  }
  return peak;
}

double prob_outcome(const Circuit& c, int line, int bit,
                    const std::vector<FixedOutcome>& fixed, const NetConfig& cfg,
                    ContractionStats* stats) {
  if (line < 0 || line >= c.n_qubits) {
    throw std::out_of_range(fmt::format("line {} out of range", line));
  }
  NetBuild b = events_from_circuit(ensure_adjacent(c));
  for (const FixedOutcome& fo : fixed) {
    if (fo.line < 0 || fo.line >= c.n_qubits) {
      throw std::out_of_range(fmt::format("fixed line {} out of range", fo.line));
    }
    if (fo.prob < kZeroProbTol) {
      throw NumericalError(
          fmt::format("conditioning on a zero-probability outcome on line {}", fo.line));
    }
    b.events.push_back(
        {NetEvent::Op1, fo.line, -1, scaled_projector(fo.bit, 1.0 / std::sqrt(fo.prob))});
  }
  return query_outcome(b, line, bit, cfg, stats);
}

JointSample sample_joint(const Circuit& c, const std::vector<int>& lines,
                         std::uint64_t seed, const NetConfig& cfg,
                         ContractionStats* stats) {
  {
    std::set<int> distinct(lines.begin(), lines.end());
    if (distinct.size() != lines.size()) {
      throw std::invalid_argument("sample_joint lines must be distinct");
    }
  }
  NetBuild base = events_from_circuit(ensure_adjacent(c));
  Rng rng(seed);
  JointSample out;
  out.bits.reserve(lines.size());
  for (int line : lines) {
    const double p0 = query_outcome(base, line, 0, cfg, stats);
    const double p1 = query_outcome(base, line, 1, cfg, stats);
    if (std::abs(p0 + p1 - 1.0) > kProbSumTol) {
      throw NumericalError(
          fmt::format("outcome probabilities on line {} sum to {:.12g}", line, p0 + p1));
    }
    const int bit = rng.draw_bit(p0);
    const double p = bit == 0 ? p0 : p1;
    if (p < kZeroProbTol) {
      throw NumericalError(fmt::format("sampled a vanishing-probability branch on line {}",
                                       line));
    }
    out.bits.push_back(bit ? '1' : '0');
    out.probability *= p;
    base.events.push_back(
        {NetEvent::Op1, line, -1, scaled_projector(bit, 1.0 / std::sqrt(p))});
  }
  return out;
}

double AdaptiveRun::query(int line, int bit) const {
  NetBuild b;
  b.n = lowered_.n_qubits;
  b.inputs = inputs_;
  b.events.reserve(events_.size() + 1);
  for (const Event& ev : events_) {
    b.events.push_back(
        {ev.kind == Event::Op1 ? NetEvent::Op1 : NetEvent::Gate2, ev.line, ev.line2, ev.m});
  }
  return query_outcome(b, line, bit, cfg_, &stats_);
}

double AdaptiveRun::line_probability(int line, int bit) const { return query(line, bit); }

AdaptiveRun run_adaptive_impl(const Circuit& c, Rng* rng, const std::vector<int>* forced,
                              const NetConfig& cfg) {
  const Circuit lowered = ensure_adjacent(c);
  AdaptiveRun run;
  run.cfg_ = cfg;
  run.lowered_ = lowered;
  run.inputs_.assign(lowered.n_qubits, {Complex{1.0}, Complex{0.0}});

  std::map<std::string, int> registers;
  std::size_t measure_index = 0;

  for (const Instruction& instr : lowered.instructions) {
    switch (instr.kind) {
      case InstructionKind::InputState:
        run.inputs_[instr.line] = {instr.amp0, instr.amp1};
        break;
      case InstructionKind::OneQubitGate:
      case InstructionKind::TwoQubitGate: {
        if (instr.condition) {
          auto it = registers.find(instr.condition->register_id);
          if (it == registers.end()) {
            throw ValidationError(fmt::format("condition references unwritten register '{}'",
                                              instr.condition->register_id));
          }
          if (it->second != instr.condition->required_bit) break;
        }
        if (instr.kind == InstructionKind::OneQubitGate) {
          run.events_.push_back({AdaptiveRun::Event::Op1, instr.line, -1, instr.matrix});
        } else {
          run.events_.push_back(
              {AdaptiveRun::Event::Gate2, instr.line, instr.line2, instr.matrix});
        }
        break;
      }
      case InstructionKind::Measure: {
        const double p0 = run.query(instr.line, 0);
        const double p1 = run.query(instr.line, 1);
        if (std::abs(p0 + p1 - 1.0) > kProbSumTol) {
          throw NumericalError(fmt::format(
              "outcome probabilities on line {} sum to {:.12g}", instr.line, p0 + p1));
        }
        int bit;
        if (forced != nullptr) {
          if (measure_index >= forced->size()) {
            throw std::invalid_argument("not enough forced outcomes for the circuit");
          }
          bit = (*forced)[measure_index];
        } else {
          bit = rng->draw_bit(p0);
        }
        ++measure_index;
        const double p = bit == 0 ? p0 : p1;
        if (p < kZeroProbTol) {
          throw NumericalError(fmt::format(
              "outcome {} on line {} has vanishing probability", bit, instr.line));
        }
        run.events_.push_back({AdaptiveRun::Event::Op1, instr.line, -1,
                               scaled_projector(bit, 1.0 / std::sqrt(p))});
        registers[instr.register_id] = bit;
        run.transcript_.push_back({instr.register_id, instr.line, bit, p});
        break;
      }
    }
  }
  if (forced != nullptr && measure_index != forced->size()) {
    throw std::invalid_argument("more forced outcomes than measurements");
  }
  return run;
}

AdaptiveRun run_adaptive(const Circuit& c, std::uint64_t seed, const NetConfig& cfg) {
  Rng rng(seed);
  return run_adaptive_impl(c, &rng, nullptr, cfg);
}

AdaptiveRun run_adaptive_forced(const Circuit& c, const std::vector<int>& outcomes,
                                const NetConfig& cfg) {
  return run_adaptive_impl(c, nullptr, &outcomes, cfg);
}

ComplexVector final_amplitudes(const Circuit& c, const NetConfig& cfg,
                               ContractionStats* stats) {
  for (const Instruction& instr : c.instructions) {
    if (instr.kind == InstructionKind::Measure) {
      throw std::invalid_argument("final_amplitudes requires a measurement-free circuit");
    }
  }
  NetBuild b = events_from_circuit(ensure_adjacent(c));
  b.doubled = false;
  const TensorNetwork net = build_network(b);
  Frontier f = contract_network(net, cfg, stats);
  if (f.open.size() != static_cast<std::size_t>(c.n_qubits)) {
    throw NumericalError("amplitude network left an unexpected open-index set");
  }
  // Canonical order sorts the held-open final segments by line, so the data
  // already has line 0 as the most significant bit.
  const std::size_t dim = f.data.size();
  return ComplexVector(dim, std::move(f.data));
}

}  // namespace tnqsim
