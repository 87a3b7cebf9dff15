#include "tnqsim/transform.hpp"

#include <algorithm>
#include <cmath>

#include "tnqsim/errors.hpp"

namespace tnqsim {

std::string to_string(CircuitStage stage) {
  switch (stage) {
    case CircuitStage::Raw: return "raw";
    case CircuitStage::Reduced: return "reduced";
    case CircuitStage::Lowered: return "lowered";
  }
  return "raw";
}

namespace {

// Gate matrix in the (min(j,k), max(j,k)) orientation.
ComplexMatrix oriented_low_high(const Instruction& g) {
  return g.line < g.line2 ? g.matrix : swap_qubit_basis(g.matrix);
}

// Embed a 1-qubit gate into a 2-qubit gate's 4x4 basis |q_j q_k>.
ComplexMatrix embed_into_pair(const ComplexMatrix& u, bool on_first_listed) {
  const ComplexMatrix eye = ComplexMatrix::identity(2);
  return on_first_listed ? kron(u, eye) : kron(eye, u);
}

// An instruction that blocks commuting another across it on a given line:
// measurements and conditioned instructions are hard barriers.
bool is_barrier(const Instruction& instr) {
  return instr.kind == InstructionKind::Measure ||
         instr.kind == InstructionKind::InputState || instr.condition.has_value();
}

// Fold all unconditioned 1-qubit gates into a neighbouring 2-qubit gate on
// their line (following preferred, preceding as fallback), within the segment
// delimited by barriers. Returns true if anything changed.
bool absorb_one_qubit_gates(std::vector<Instruction>& instrs) {
  bool changed = false;
  for (std::size_t i = 0; i < instrs.size(); ++i) {
    Instruction& g = instrs[i];
    if (g.kind != InstructionKind::OneQubitGate || g.condition) continue;
    const int line = g.line;

    // Forward scan for the next instruction touching this line.
    std::size_t next = instrs.size();
    for (std::size_t j = i + 1; j < instrs.size(); ++j) {
      if (instrs[j].touches(line)) {
        next = j;
        break;
      }
    }
    if (next < instrs.size()) {
      Instruction& target = instrs[next];
      if (!is_barrier(target)) {
        if (target.kind == InstructionKind::OneQubitGate) {
          target.matrix = matmul(target.matrix, g.matrix);  // g acts first
          instrs.erase(instrs.begin() + static_cast<std::ptrdiff_t>(i));
          --i;
          changed = true;
          continue;
        }
        if (target.kind == InstructionKind::TwoQubitGate) {
          target.matrix =
              matmul(target.matrix, embed_into_pair(g.matrix, target.line == line));
          instrs.erase(instrs.begin() + static_cast<std::ptrdiff_t>(i));
          --i;
          changed = true;
          continue;
        }
      }
    }

    // Backward scan: fold into the preceding 2-qubit gate at end of line.
    std::size_t prev = instrs.size();
    for (std::size_t j = i; j-- > 0;) {
      if (instrs[j].touches(line)) {
        prev = j;
        break;
      }
    }
    if (prev < instrs.size()) {
      Instruction& target = instrs[prev];
      if (!is_barrier(target) && target.kind == InstructionKind::TwoQubitGate) {
        target.matrix = matmul(embed_into_pair(g.matrix, target.line == line),
                               target.matrix);  // g acts after target
        instrs.erase(instrs.begin() + static_cast<std::ptrdiff_t>(i));
        --i;
        changed = true;
      }
    }
    // Otherwise the line carries no reachable 2-qubit gate; the gate stays.
  }
  return changed;
}

// Fuse runs of consecutive 2-qubit gates on the same unordered pair with no
// interposed instruction touching either line.
bool fuse_two_qubit_runs(std::vector<Instruction>& instrs) {
  bool changed = false;
  for (std::size_t i = 0; i < instrs.size(); ++i) {
    Instruction& g = instrs[i];
    if (g.kind != InstructionKind::TwoQubitGate || g.condition) continue;

    std::size_t next = instrs.size();
    for (std::size_t j = i + 1; j < instrs.size(); ++j) {
      if (instrs[j].touches(g.line) || instrs[j].touches(g.line2)) {
        next = j;
        break;
      }
    }
    if (next == instrs.size()) continue;
    Instruction& other = instrs[next];
    if (other.kind != InstructionKind::TwoQubitGate || other.condition) continue;
    const bool same_pair = (std::minmax(g.line, g.line2) ==
                            std::minmax(other.line, other.line2));
    if (!same_pair) continue;

    const int low = std::min(g.line, g.line2);
    const int high = std::max(g.line, g.line2);
    ComplexMatrix fused = matmul(oriented_low_high(other), oriented_low_high(g));
    g = Instruction::two_qubit(low, high, std::move(fused));
    instrs.erase(instrs.begin() + static_cast<std::ptrdiff_t>(next));
    --i;  // revisit: the fused gate may have a new same-pair successor
    changed = true;
  }
  return changed;
}

}  // namespace

Circuit reduce(const Circuit& c) {
  Circuit out = c;
  bool changed = true;
  while (changed) {
    changed = absorb_one_qubit_gates(out.instructions);
    changed = fuse_two_qubit_runs(out.instructions) || changed;
  }
  return out;
}

DProfile d_profile(const Circuit& c, CircuitStage stage) {
  DProfile p;
  p.computed_on = stage;
  p.per_line.assign(std::max(c.n_qubits, 0), 0);
  for (const Instruction& instr : c.instructions) {
    if (instr.kind != InstructionKind::TwoQubitGate) continue;
    const int lo = std::min(instr.line, instr.line2);
    const int hi = std::max(instr.line, instr.line2);
    for (int i = lo; i <= hi; ++i) p.per_line[i] += 1;
  }
  p.d_max = p.per_line.empty() ? 0 : *std::max_element(p.per_line.begin(), p.per_line.end());
  return p;
}

Circuit lower_to_adjacent(const Circuit& c) {
  Circuit out;
  out.n_qubits = c.n_qubits;
  out.linear = c.linear;
  for (const Instruction& instr : c.instructions) {
    if (instr.kind != InstructionKind::TwoQubitGate ||
        std::abs(instr.line - instr.line2) == 1) {
      out.instructions.push_back(instr);
      continue;
    }
    const int lo = std::min(instr.line, instr.line2);
    const int hi = std::max(instr.line, instr.line2);
    // r-1 swaps bring the high line's content down next to the low line.
    for (int m = hi - 1; m > lo; --m) {
      out.instructions.push_back(Instruction::two_qubit(m, m + 1, gatelib::swap()));
    }
    if (instr.line == lo) {
      out.instructions.push_back(
          Instruction::two_qubit(lo, lo + 1, instr.matrix, instr.condition));
    } else {
      // First listed line (the most significant basis bit) now sits at lo+1.
      out.instructions.push_back(
          Instruction::two_qubit(lo + 1, lo, instr.matrix, instr.condition));
    }
    for (int m = lo + 1; m < hi; ++m) {
      out.instructions.push_back(Instruction::two_qubit(m, m + 1, gatelib::swap()));
    }
  }
  return out;
}

CostEstimate cost_estimate(const DProfile& p) {
  CostEstimate e;
  e.n = static_cast<int>(p.per_line.size());
  e.d = p.d_max;
  // n * c1 * (2^(c2 D))^c3 with c1 = 1, c2 = 2 (Schmidt growth 4^D = 2^(2D)),
  // c3 = 3 (cubic local update).
  e.bound_exponent = 6.0 * static_cast<double>(p.d_max);
  e.log2_estimate = (e.n > 0 ? std::log2(static_cast<double>(e.n)) : 0.0) + e.bound_exponent;
  e.note = "advisory: n * 2^(6*D) elementary operations";
  return e;
}

int two_qubit_gate_count(const Circuit& c) {
  int count = 0;
  for (const Instruction& instr : c.instructions) {
    if (instr.kind == InstructionKind::TwoQubitGate) ++count;
  }
  return count;
}

}  // namespace tnqsim
