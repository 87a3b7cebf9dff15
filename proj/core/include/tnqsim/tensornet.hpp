#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "tnqsim/circuit.hpp"
#include "tnqsim/rng.hpp"

namespace tnqsim {

enum class NetSide : std::uint8_t { Forward = 0, Adjoint = 1 };

/// Label of one wire segment: the ordinal-th segment along a line, on the
/// forward or the reflected-adjoint half of the network.
struct IndexId {
  int line = 0;
  int ordinal = 0;
  NetSide side = NetSide::Forward;

  // Canonical frontier order: by line, then ascending ordinal, forward side
  // before adjoint side.
  friend bool operator<(const IndexId& a, const IndexId& b) {
    if (a.line != b.line) return a.line < b.line;
    if (a.ordinal != b.ordinal) return a.ordinal < b.ordinal;
    return a.side < b.side;
  }
  friend bool operator==(const IndexId& a, const IndexId& b) {
    return a.line == b.line && a.ordinal == b.ordinal && a.side == b.side;
  }
};

/// One tensor of the network. Every leg has dimension 2; `data` holds 2^legs
/// amplitudes with the first listed leg as the most significant bit.
struct TensorNode {
  std::vector<IndexId> legs;
  std::vector<std::uint8_t> leg_is_out;  // parallel to legs
  std::vector<Complex> data;
};

/// Indexed tensor graph of circuit (+ optionally reflected adjoint copy and
/// centre insertions). Every IndexId appears exactly twice unless it is a
/// deliberately open output leg. `line_chain[l]` lists node ids in the
/// temporal order they sit along line l.
struct TensorNetwork {
  int n_lines = 0;
  std::vector<TensorNode> nodes;
  std::vector<std::vector<int>> line_chain;
  bool doubled = false;
};
using DoubledNetwork = TensorNetwork;

struct ContractionStats {
  int peak_open_indices = 0;
  std::size_t peak_elements = 1;
};

struct NetConfig {
  std::size_t max_frontier = std::size_t{1} << 22;  // elements
};

/// The network of the circuit, a reflected adjoint copy, and one 2x2 operator
/// inserted per line in the centre (identity where `insertions` has no entry).
/// Its full contraction is <psi| M'M |psi> for M the inserted operator product
/// applied to the circuit output. Requires all 2-qubit gates adjacent; throws
/// ValidationError directing the caller to lower_to_adjacent otherwise.
DoubledNetwork build_doubled_network(const Circuit& c,
                                     const std::map<int, ComplexMatrix>& insertions);

/// Exact value of the full contraction, processing lines in order 0..n-1 and
/// absorbing each line's nodes in temporal order so that all of the line's
/// indices are summed before moving on. Peak frontier memory is 2^O(D).
/// Throws CapExceeded (with the offending line and required size) when a
/// frontier would exceed cfg.max_frontier elements.
Complex contract_line_by_line(const TensorNetwork& net, const NetConfig& cfg = {},
                              ContractionStats* stats = nullptr);

/// Open-index peak of the line-by-line sweep, computed symbolically without
/// touching tensor data (cheap feasibility probe).
int estimate_peak_open_indices(const TensorNetwork& net);

/// A previously sampled outcome: projector Pi(bit)/sqrt(prob) goes on `line`.
struct FixedOutcome {
  int line = 0;
  int bit = 0;
  double prob = 1.0;
};

/// Conditional probability of measuring `bit` on `line` given earlier fixed
/// outcomes, by contracting the doubled network with Pi(bit) on the query line
/// and Pi(k_a)/sqrt(p_a) on each fixed line. The result must be real to within
/// 1e-10 imaginary residue and is clamped to [0, 1].
double prob_outcome(const Circuit& c, int line, int bit,
                    const std::vector<FixedOutcome>& fixed, const NetConfig& cfg = {},
                    ContractionStats* stats = nullptr);

struct JointSample {
  std::string bits;  // one char per requested line, in request order
  double probability = 1.0;
};

/// Chain-rule sampling of the joint outcome distribution on the given lines.
/// Both branch probabilities are contracted at every step and their sum is
/// checked against 1. Deterministic given the seed.
JointSample sample_joint(const Circuit& c, const std::vector<int>& lines,
                         std::uint64_t seed, const NetConfig& cfg = {},
                         ContractionStats* stats = nullptr);

struct AdaptiveStep {
  std::string register_id;
  int line = 0;
  int outcome = 0;
  double probability = 0.0;  // conditional probability of this outcome
};

/// Measurement-by-measurement simulation of an adaptive circuit: truncate at
/// the next measurement, contract its outcome distribution, sample, insert
/// Pi/sqrt(p) at that point, resolve dependent conditions, continue. The
/// returned value keeps the resolved network so callers can query conditional
/// line distributions after the transcript.
class AdaptiveRun {
 public:
  const std::vector<AdaptiveStep>& transcript() const { return transcript_; }
  /// Probability of measuring `bit` on `line` now, conditioned on the transcript.
  double line_probability(int line, int bit) const;
  const ContractionStats& stats() const { return stats_; }

 private:
  friend AdaptiveRun run_adaptive_impl(const Circuit&, Rng*, const std::vector<int>*,
                                       const NetConfig&);
  struct Event {  // resolved forward-pass event
    enum Kind { Op1, Gate2 } kind;
    int line = 0, line2 = -1;
    ComplexMatrix m;
  };
  Circuit lowered_;
  std::vector<Event> events_;
  std::vector<std::pair<Complex, Complex>> inputs_;
  std::vector<AdaptiveStep> transcript_;
  NetConfig cfg_;
  mutable ContractionStats stats_;

  double query(int line, int bit) const;
};

/// Adaptive simulation with outcomes drawn from a seeded generator.
AdaptiveRun run_adaptive(const Circuit& c, std::uint64_t seed, const NetConfig& cfg = {});

/// Adaptive simulation with forced outcomes, in measurement order (for
/// deterministic transcript enumeration). Throws NumericalError if a forced
/// branch has vanishing probability.
AdaptiveRun run_adaptive_forced(const Circuit& c, const std::vector<int>& outcomes,
                                const NetConfig& cfg = {});

/// Output-state amplitudes of a measurement-free circuit by the same
/// line-by-line sweep on the single (undoubled) network, leaving each line's
/// final segment open. Line 0 is the most significant bit.
ComplexVector final_amplitudes(const Circuit& c, const NetConfig& cfg = {},
                               ContractionStats* stats = nullptr);

}  // namespace tnqsim
