#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "tnqsim/numerics.hpp"

namespace tnqsim {

enum class InstructionKind { OneQubitGate, TwoQubitGate, Measure, InputState };

/// Classical control: the instruction executes iff the named register holds
/// required_bit. At most one condition per instruction.
struct Condition {
  std::string register_id;
  int required_bit = 0;
  bool operator==(const Condition&) const = default;
};

struct Instruction {
  InstructionKind kind = InstructionKind::OneQubitGate;
  int line = 0;    // target line; for TwoQubitGate the first listed line (j)
  int line2 = -1;  // second line (k) of a TwoQubitGate
  // Gate payload. 2x2 for OneQubitGate; 4x4 for TwoQubitGate in the basis
  // |q_j q_k> with q_j (the first listed line) as the most significant bit.
  ComplexMatrix matrix;
  std::string register_id;  // Measure destination
  Complex amp0, amp1;       // InputState amplitudes
  std::optional<Condition> condition;

  static Instruction one_qubit(int line, ComplexMatrix m,
                               std::optional<Condition> cond = std::nullopt);
  static Instruction two_qubit(int j, int k, ComplexMatrix m,
                               std::optional<Condition> cond = std::nullopt);
  static Instruction measure(int line, std::string register_id);
  static Instruction input_state(int line, Complex amp0, Complex amp1);

  bool is_gate() const {
    return kind == InstructionKind::OneQubitGate || kind == InstructionKind::TwoQubitGate;
  }
  bool touches(int l) const {
    return line == l || (kind == InstructionKind::TwoQubitGate && line2 == l);
  }

  bool operator==(const Instruction&) const = default;
};

/// Ordered instruction list over n qubit lines. Instruction order is the
/// execution order; there is no layer structure. The `linear` flag permits
/// non-unitary gate payloads (contraction backend only).
struct Circuit {
  int n_qubits = 0;
  std::vector<Instruction> instructions;
  bool linear = false;

  bool operator==(const Circuit&) const = default;
};

/// Named-gate library. All matrices are unitary to 1e-12.
namespace gatelib {
const ComplexMatrix& h();
const ComplexMatrix& x();
const ComplexMatrix& y();
const ComplexMatrix& z();
const ComplexMatrix& s();
const ComplexMatrix& t();
const ComplexMatrix& cnot();
const ComplexMatrix& cz();
const ComplexMatrix& swap();
const ComplexMatrix& projector(int bit);  // |bit><bit|

/// Library name whose matrix equals m entrywise exactly, if any.
std::optional<std::string> name_of(const ComplexMatrix& m);
/// Matrix for a library name ("h", "cnot", ...), if known.
std::optional<ComplexMatrix> by_name(std::string_view name);
}  // namespace gatelib

/// Parse the `.qc` text format. Throws ParseError with a 1-based line number
/// on syntax errors, out-of-range lines, non-unitary gates without the
/// `linear` flag, or conditions referencing unknown registers.
Circuit parse_circuit(std::string_view text);

/// Emit `.qc` text that parses back to an equal circuit. Floats are printed
/// with 17 significant digits; named gates are used where the matrix matches
/// a library gate exactly.
std::string emit_circuit(const Circuit& c);

/// Structural diagnostics; empty iff all Instruction/Circuit invariants hold.
std::vector<std::string> validate(const Circuit& c);

}  // namespace tnqsim
