#pragma once

#include <utility>
#include <vector>

#include "tnqsim/numerics.hpp"
#include "tnqsim/rng.hpp"

namespace tnqsim {

/// Outcome of a standard-basis measurement: Born probabilities and the
/// realized bit. The measured state itself is collapsed in place.
struct MeasurementOutcome {
  double p0 = 0.0;
  double p1 = 0.0;
  int outcome = 0;
};

/// Matrix product state in cut-weighted canonical form: per-site tensors
/// (left bond, physical index, right bond) plus one descending vector of
/// Schmidt coefficients per internal cut. Boundary bonds have dimension 1,
/// every cut's squared coefficients sum to 1, and contracting the sites on
/// either side of a cut with their conjugates yields the identity on the cut
/// bond. Site updates are local: a 1-qubit gate costs O(chi^2), an adjacent
/// 2-qubit gate O(chi^3) with the canonical form restored by one SVD at the
/// affected cut.
class MpsState {
 public:
  static constexpr int kDefaultMaxChi = 4096;
  // Schmidt coefficients below this fraction of the cut's largest are
  // round-off rank inflation and are discarded; this is not approximate
  // truncation.
  static constexpr double kRankTol = 1e-12;

  /// Product state from per-site amplitude pairs (each normalized to 1e-10).
  static MpsState from_product(const std::vector<std::pair<Complex, Complex>>& amps,
                               int max_chi = kDefaultMaxChi);

  /// Canonical MPS of an arbitrary normalized statevector (dim = 2^n) via
  /// iterated SVD. Bond dimensions equal the Schmidt ranks of the cuts.
  static MpsState from_statevector(const ComplexVector& v, int max_chi = kDefaultMaxChi);

  /// Amplitudes c_{i1..in} by contracting the matrix product; line 0 is the
  /// most significant bit. Guarded by `cap` against exponential blowup.
  ComplexVector to_statevector(int cap = 20) const;

  /// Apply a 2x2 unitary to one site. No bond dimension changes.
  void apply_1q(int line, const ComplexMatrix& u);

  /// Apply a 4x4 unitary to sites (left_line, left_line+1); basis |q_left q_right>
  /// with the left site as most significant bit. Only the cut between the two
  /// sites changes, by at most a factor of 4.
  void apply_2q_adjacent(int left_line, const ComplexMatrix& u);

  /// Apply a 4x4 unitary to arbitrary distinct lines (j, k), basis |q_j q_k>,
  /// realized as r-1 adjacent swaps, the adjacent gate, and r-1 restoring swaps.
  void apply_2q(int j, int k, const ComplexMatrix& u);

  /// Standard-basis measurement with the outcome drawn from rng; collapses
  /// and renormalizes in place (division by sqrt(p) of the realized outcome).
  MeasurementOutcome measure(int line, Rng& rng);

  /// Measurement with a forced outcome (for transcript enumeration). Throws
  /// NumericalError when the forced branch has vanishing probability.
  MeasurementOutcome measure_forced(int line, int outcome);

  /// Born probabilities (p0, p1) of a standard-basis measurement, no collapse.
  std::pair<double, double> outcome_probabilities(int line) const;

  /// Schmidt rank across cut | sites 0..cut | cut+1..n-1 |.
  int schmidt_rank(int cut) const;

  /// All internal cut ranks, left to right (size n-1).
  std::vector<int> bond_dims() const;

  /// Descending Schmidt coefficients at a cut (squares sum to 1).
  const std::vector<double>& bond_weights(int cut) const;

  int n() const { return n_; }
  int max_bond() const;
  int max_chi_cap() const { return max_chi_; }

  /// Max over cuts of the deviation of the canonical-form identity
  /// contractions (both sides) from the identity.
  double canonical_form_deviation() const;
  /// Max over cuts of |sum of squared bond weights - 1|.
  double norm_deviation() const;

 private:
  struct Site {
    int chi_l = 1;
    int chi_r = 1;
    std::vector<Complex> a;  // [l*2*chi_r + s*chi_r + r]
    Complex& at(int l, int s, int r) { return a[(l * 2 + s) * chi_r + r]; }
    const Complex& at(int l, int s, int r) const { return a[(l * 2 + s) * chi_r + r]; }
  };

  MpsState() = default;

  void two_site_update(int left, const ComplexMatrix& u4);
  void recanonicalize();
  void check_line(int line) const;

  int n_ = 0;
  int max_chi_ = kDefaultMaxChi;
  std::vector<Site> site_;                     // n tensors
  std::vector<std::vector<double>> weights_;   // n-1 cuts
};

}  // namespace tnqsim
