#pragma once

#include <map>
#include <string>
#include <vector>

#include "tnqsim/circuit.hpp"
#include "tnqsim/rng.hpp"

namespace tnqsim {

/// Brute-force statevector. Line 0 is the most significant bit of the
/// amplitude index.
struct StateVector {
  int n = 0;
  ComplexVector amplitudes;

  static StateVector zero_state(int n);
  /// Product state from per-line amplitude pairs.
  static StateVector product_state(const std::vector<std::pair<Complex, Complex>>& amps);
  /// Initial state of a circuit: |0...0> with InputState instructions applied.
  static StateVector initial_state(const Circuit& c);
};

/// Exact linear action of a gate instruction on the amplitudes. The condition,
/// if any, is ignored (callers resolve conditions). Throws on Measure or
/// InputState instructions and out-of-range lines.
StateVector apply_gate(const StateVector& s, const Instruction& instr);

/// 2^n x 2^n ordered product of the embedded gates. Requires a measurement-free,
/// condition-free circuit and n <= 10.
ComplexMatrix overall_unitary(const Circuit& c);

/// Exact joint Born distribution over the listed lines after running the
/// circuit, with interior measurements (and the conditions they feed) branch
/// enumerated exhaustively. Keys are bitstrings in the order of `lines`.
std::map<std::string, double> full_distribution(const Circuit& c,
                                                const std::vector<int>& lines,
                                                int max_qubits = 14);

/// One seeded trajectory: interior measurements are sampled, conditions are
/// resolved, and the register values plus final state are returned.
struct DenseTrajectory {
  std::vector<std::pair<std::string, int>> registers;  // in write order
  StateVector final_state;
};
DenseTrajectory sample_trajectory(const Circuit& c, Rng& rng, int max_qubits = 14);

}  // namespace tnqsim
