#pragma once

#include <string>
#include <vector>

#include "tnqsim/circuit.hpp"

namespace tnqsim {

enum class CircuitStage { Raw, Reduced, Lowered };

std::string to_string(CircuitStage stage);

/// Per-line counts of 2-qubit gates touching or crossing each line:
/// per_line[i] counts gates on lines (j,k) with min(j,k) <= i <= max(j,k).
struct DProfile {
  std::vector<int> per_line;
  int d_max = 0;
  CircuitStage computed_on = CircuitStage::Raw;
};

/// Deterministic advisory cost model n * c1 * (2^(c2*D))^c3 with c1 = 1,
/// c2 = 2, c3 = 3, kept in log2 form so large D cannot overflow.
struct CostEstimate {
  int n = 0;
  int d = 0;
  double bound_exponent = 0.0;  // c2 * c3 * D
  double log2_estimate = 0.0;   // log2(n) + bound_exponent
  std::string note;
};

/// Reduced form: 1-qubit gates are folded into the following 2-qubit gate on
/// their line (preceding at end of line; retained when the line carries no
/// 2-qubit gate), and maximal runs of same-pair 2-qubit gates are fused,
/// iterated to a fixpoint. Nothing commutes past a Measure or a conditioned
/// instruction; adaptive circuits reduce segment-wise.
Circuit reduce(const Circuit& c);

DProfile d_profile(const Circuit& c, CircuitStage stage);

/// Replace every 2-qubit gate of range r > 1 by r-1 adjacent swaps, the gate
/// on adjacent lines, and r-1 restoring swaps (2r-1 gates total). The overall
/// linear map is unchanged and d_max grows by at most a factor of 4.
Circuit lower_to_adjacent(const Circuit& c);

CostEstimate cost_estimate(const DProfile& p);

/// Number of TwoQubitGate instructions.
int two_qubit_gate_count(const Circuit& c);

}  // namespace tnqsim
