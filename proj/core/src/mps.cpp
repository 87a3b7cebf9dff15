#include "tnqsim/mps.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include <fmt/format.h>

#include "tnqsim/circuit.hpp"
#include "tnqsim/errors.hpp"

namespace tnqsim {

namespace {

constexpr double kNormTol = 1e-10;
constexpr double kUnitaryTol = 1e-8;
constexpr double kZeroProbTol = 1e-14;

const std::vector<double> kBoundaryWeights = {1.0};

ComplexMatrix first_cols(const ComplexMatrix& m, std::size_t r) {
  ComplexMatrix out(m.rows, r);
  for (std::size_t i = 0; i < m.rows; ++i) {
    for (std::size_t j = 0; j < r; ++j) out.at(i, j) = m.at(i, j);
  }
  return out;
}

ComplexMatrix first_rows(const ComplexMatrix& m, std::size_t r) {
  ComplexMatrix out(r, m.cols);
  for (std::size_t i = 0; i < r; ++i) {
    for (std::size_t j = 0; j < m.cols; ++j) out.at(i, j) = m.at(i, j);
  }
  return out;
}

struct TruncatedSvd {
  ComplexMatrix u;        // rows x r
  std::vector<double> s;  // r, descending, unnormalized
  ComplexMatrix v_dagger; // r x cols
  double norm = 0.0;      // two-norm of the retained singular values
};

TruncatedSvd truncated_svd(const ComplexMatrix& m, double rel_tol) {
  SvdResult full = svd(m);
  if (full.singular_values.empty() || full.singular_values.front() <= 0.0) {
    throw NumericalError("zero matrix in MPS canonical update");
  }
  const double cutoff = rel_tol * full.singular_values.front();
  std::size_t r = 0;
  double nsq = 0.0;
  for (double s : full.singular_values) {
    if (s > cutoff) {
      nsq += s * s;
      ++r;
    }
  }
  TruncatedSvd out;
  out.u = first_cols(full.u, r);
  out.v_dagger = first_rows(full.v_dagger, r);
  out.s.assign(full.singular_values.begin(),
               full.singular_values.begin() + static_cast<std::ptrdiff_t>(r));
  out.norm = std::sqrt(nsq);
  return out;
}

}  // namespace

void MpsState::check_line(int line) const {
  if (line < 0 || line >= n_) {
    throw std::out_of_range(fmt::format("line {} out of range for {} sites", line, n_));
  }
}

MpsState MpsState::from_product(const std::vector<std::pair<Complex, Complex>>& amps,
                                int max_chi) {
  if (amps.empty()) throw std::invalid_argument("from_product requires at least one site");
  MpsState s;
  s.n_ = static_cast<int>(amps.size());
  s.max_chi_ = max_chi;
  s.site_.resize(s.n_);
  s.weights_.assign(s.n_ - 1, {1.0});
  for (int i = 0; i < s.n_; ++i) {
    const double nrm = std::norm(amps[i].first) + std::norm(amps[i].second);
    if (std::abs(nrm - 1.0) > kNormTol) {
      throw std::invalid_argument(
          fmt::format("site {} amplitudes have norm^2 {:.17g} (expected 1)", i, nrm));
    }
    Site& t = s.site_[i];
    t.chi_l = t.chi_r = 1;
    t.a = {amps[i].first, amps[i].second};
  }
  return s;
}

MpsState MpsState::from_statevector(const ComplexVector& v, int max_chi) {
  if (v.dim == 0 || (v.dim & (v.dim - 1)) != 0) {
    throw std::invalid_argument(fmt::format("dim {} is not a power of two", v.dim));
  }
  const double nsq = norm_squared(v);
  if (std::abs(nsq - 1.0) > kNormTol) {
    throw std::invalid_argument(fmt::format("statevector norm^2 {:.17g} (expected 1)", nsq));
  }
  int n = 0;
  while ((std::size_t{1} << n) < v.dim) ++n;
  if (n == 0) throw std::invalid_argument("from_statevector requires at least one qubit");

  MpsState out;
  out.n_ = n;
  out.max_chi_ = max_chi;
  out.site_.resize(n);
  out.weights_.assign(n - 1, {});
  if (n == 1) {
    out.site_[0].chi_l = out.site_[0].chi_r = 1;
    out.site_[0].a = {v.entries[0], v.entries[1]};
    return out;
  }

  // Iterated Schmidt splitting, left to right. carry_tilde holds the right
  // factor with the current cut's weights divided out, so every site tensor
  // is recovered with divisions only by retained singular values.
  ComplexMatrix carry_tilde(1, v.dim, v.entries);  // rows x cols, row-major
  std::vector<double> prev_sigma = {1.0};
  double prev_scale = 1.0;

  for (int i = 0; i < n - 1; ++i) {
    const std::size_t rows = carry_tilde.rows;      // bond entering site i
    const std::size_t cols = carry_tilde.cols / 2;  // remaining qubits after site i
    // Row-major reshape (rows x 2cols) -> (2rows x cols) is index bookkeeping only.
    ComplexMatrix m(rows * 2, cols, carry_tilde.entries);
    ComplexMatrix weighted = m;
    for (std::size_t a = 0; a < rows; ++a) {
      for (std::size_t s = 0; s < 2; ++s) {
        for (std::size_t c = 0; c < cols; ++c) {
          weighted.at(a * 2 + s, c) *= prev_sigma[a];
        }
      }
    }
    TruncatedSvd f = truncated_svd(weighted, kRankTol);
    const std::size_t r = f.s.size();
    if (r > static_cast<std::size_t>(max_chi)) {
      throw CapExceeded("chi", r, static_cast<std::size_t>(max_chi), "from_statevector");
    }

    // Gamma_i = prev_scale * carry_tilde_reshaped * V * Sigma^-1
    ComplexMatrix v_thin(cols, r);
    for (std::size_t a = 0; a < cols; ++a) {
      for (std::size_t b = 0; b < r; ++b) v_thin.at(a, b) = std::conj(f.v_dagger.at(b, a));
    }
    ComplexMatrix g = matmul(m, v_thin);  // (2 rows) x r
    Site& site = out.site_[i];
    site.chi_l = static_cast<int>(rows);
    site.chi_r = static_cast<int>(r);
    site.a.assign(rows * 2 * r, Complex{});
    for (std::size_t a = 0; a < rows; ++a) {
      for (std::size_t s = 0; s < 2; ++s) {
        for (std::size_t b = 0; b < r; ++b) {
          site.at(static_cast<int>(a), static_cast<int>(s), static_cast<int>(b)) =
              prev_scale * g.at(a * 2 + s, b) / f.s[b];
        }
      }
    }
    out.weights_[i].resize(r);
    for (std::size_t b = 0; b < r; ++b) out.weights_[i][b] = f.s[b] / f.norm;

    carry_tilde = std::move(f.v_dagger);
    prev_sigma = std::move(f.s);
    prev_scale = f.norm;
  }

  // Last site: Gamma_{n-1} = prev_scale * carry_tilde / ||diag(prev_sigma) carry_tilde||
  const std::size_t rows = carry_tilde.rows;
  double total_sq = 0.0;
  for (std::size_t a = 0; a < rows; ++a) {
    for (std::size_t s = 0; s < 2; ++s) {
      total_sq += std::norm(prev_sigma[a] * carry_tilde.at(a, s));
    }
  }
  const double total = std::sqrt(total_sq);
  Site& last = out.site_[n - 1];
  last.chi_l = static_cast<int>(rows);
  last.chi_r = 1;
  last.a.assign(rows * 2, Complex{});
  for (std::size_t a = 0; a < rows; ++a) {
    for (std::size_t s = 0; s < 2; ++s) {
      last.at(static_cast<int>(a), static_cast<int>(s), 0) =
          prev_scale * carry_tilde.at(a, s) / total;
    }
  }
  return out;
}

ComplexVector MpsState::to_statevector(int cap) const {
  if (n_ > cap) {
    throw CapExceeded("statevector_qubits", static_cast<std::size_t>(n_),
                      static_cast<std::size_t>(cap), "to_statevector");
  }
  // Accumulate amplitudes left to right with the cut weights folded into the
  // right bond of each site.
  std::vector<Complex> acc = {1.0};
  std::size_t acc_rows = 1;  // = 2^i
  for (int i = 0; i < n_; ++i) {
    const Site& t = site_[i];
    const std::vector<double>& lam = i < n_ - 1 ? weights_[i] : kBoundaryWeights;
    std::vector<Complex> next(acc_rows * 2 * t.chi_r);
    for (std::size_t p = 0; p < acc_rows; ++p) {
      for (int s = 0; s < 2; ++s) {
        for (int b = 0; b < t.chi_r; ++b) {
          Complex sum = 0.0;
          for (int a = 0; a < t.chi_l; ++a) {
            sum += acc[p * t.chi_l + a] * t.at(a, s, b);
          }
          next[(p * 2 + s) * t.chi_r + b] = sum * lam[b];
        }
      }
    }
    acc = std::move(next);
    acc_rows *= 2;
  }
  return ComplexVector(acc_rows, std::move(acc));
}

void MpsState::apply_1q(int line, const ComplexMatrix& u) {
  check_line(line);
  if (u.rows != 2 || u.cols != 2) throw std::invalid_argument("apply_1q expects a 2x2 gate");
  if (!is_unitary(u, kUnitaryTol)) {
    throw ValidationError("non-unitary gate rejected by the MPS backend");
  }
  Site& t = site_[line];
  for (int a = 0; a < t.chi_l; ++a) {
    for (int b = 0; b < t.chi_r; ++b) {
      const Complex x0 = t.at(a, 0, b), x1 = t.at(a, 1, b);
      t.at(a, 0, b) = u.at(0, 0) * x0 + u.at(0, 1) * x1;
      t.at(a, 1, b) = u.at(1, 0) * x0 + u.at(1, 1) * x1;
    }
  }
}

void MpsState::two_site_update(int left, const ComplexMatrix& u4) {
  const Site& ti = site_[left];
  const Site& tj = site_[left + 1];
  const int chi_l = ti.chi_l;
  const int chi_c = ti.chi_r;
  const int chi_r = tj.chi_r;
  const std::vector<double>& lam_l = left > 0 ? weights_[left - 1] : kBoundaryWeights;
  const std::vector<double>& lam_c = weights_[left];
  const std::vector<double>& lam_r = left + 1 < n_ - 1 ? weights_[left + 1] : kBoundaryWeights;

  const std::size_t work = std::min(2 * chi_l, 2 * chi_r);
  if (work > static_cast<std::size_t>(max_chi_)) {
    throw CapExceeded("chi", work, static_cast<std::size_t>(max_chi_),
                      fmt::format("working bond at cut {}", left));
  }

  // theta[a,(s,t),b] with the central weights folded in and the gate applied;
  // outer weights are multiplied on demand so no stored weight is divided out.
  std::vector<Complex> theta(static_cast<std::size_t>(chi_l) * 4 * chi_r);
  const auto th = [&](int a, int st, int b) -> Complex& {
    return theta[(static_cast<std::size_t>(a) * 4 + st) * chi_r + b];
  };
  for (int a = 0; a < chi_l; ++a) {
    for (int c = 0; c < chi_c; ++c) {
      const double w = lam_c[c];
      for (int s = 0; s < 2; ++s) {
        const Complex left_amp = ti.at(a, s, c) * w;
        if (left_amp == Complex{0.0}) continue;
        for (int t = 0; t < 2; ++t) {
          for (int b = 0; b < chi_r; ++b) {
            th(a, s * 2 + t, b) += left_amp * tj.at(c, t, b);
          }
        }
      }
    }
  }
  std::vector<Complex> rotated(theta.size());
  for (int a = 0; a < chi_l; ++a) {
    for (int b = 0; b < chi_r; ++b) {
      Complex in[4];
      for (int uv = 0; uv < 4; ++uv) in[uv] = th(a, uv, b);
      for (int st = 0; st < 4; ++st) {
        Complex sum = 0.0;
        for (int uv = 0; uv < 4; ++uv) sum += u4.at(st, uv) * in[uv];
        rotated[(static_cast<std::size_t>(a) * 4 + st) * chi_r + b] = sum;
      }
    }
  }

  // Full two-site matrix rows (a,s), cols (t,b), outer weights applied.
  ComplexMatrix full(2 * chi_l, 2 * chi_r);
  for (int a = 0; a < chi_l; ++a) {
    for (int s = 0; s < 2; ++s) {
      for (int t = 0; t < 2; ++t) {
        for (int b = 0; b < chi_r; ++b) {
          full.at(a * 2 + s, t * chi_r + b) =
              lam_l[a] * rotated[(static_cast<std::size_t>(a) * 4 + s * 2 + t) * chi_r + b] *
              lam_r[b];
        }
      }
    }
  }
  TruncatedSvd f = truncated_svd(full, kRankTol);
  const std::size_t r = f.s.size();
  if (r > static_cast<std::size_t>(max_chi_)) {
    throw CapExceeded("chi", r, static_cast<std::size_t>(max_chi_),
                      fmt::format("bond at cut {}", left));
  }

  // Gamma'_left = (rotated . lam_r) V Sigma^-1   (no division by outer weights)
  ComplexMatrix x(2 * chi_l, 2 * chi_r);
  for (int a = 0; a < chi_l; ++a) {
    for (int s = 0; s < 2; ++s) {
      for (int t = 0; t < 2; ++t) {
        for (int b = 0; b < chi_r; ++b) {
          x.at(a * 2 + s, t * chi_r + b) =
              rotated[(static_cast<std::size_t>(a) * 4 + s * 2 + t) * chi_r + b] * lam_r[b];
        }
      }
    }
  }
  ComplexMatrix v_thin(2 * chi_r, r);
  for (std::size_t p = 0; p < static_cast<std::size_t>(2 * chi_r); ++p) {
    for (std::size_t q = 0; q < r; ++q) v_thin.at(p, q) = std::conj(f.v_dagger.at(q, p));
  }
  ComplexMatrix gl = matmul(x, v_thin);  // (2 chi_l) x r

  // Gamma'_right = Sigma^-1 U' (lam_l . rotated)
  ComplexMatrix y(2 * chi_l, 2 * chi_r);
  for (int a = 0; a < chi_l; ++a) {
    for (int s = 0; s < 2; ++s) {
      for (int t = 0; t < 2; ++t) {
        for (int b = 0; b < chi_r; ++b) {
          y.at(a * 2 + s, t * chi_r + b) =
              lam_l[a] * rotated[(static_cast<std::size_t>(a) * 4 + s * 2 + t) * chi_r + b];
        }
      }
    }
  }
  ComplexMatrix gr = matmul(adjoint(f.u), y);  // r x (2 chi_r)

  Site& si = site_[left];
  si.chi_l = chi_l;
  si.chi_r = static_cast<int>(r);
  si.a.assign(static_cast<std::size_t>(chi_l) * 2 * r, Complex{});
  for (int a = 0; a < chi_l; ++a) {
    for (int s = 0; s < 2; ++s) {
      for (std::size_t c = 0; c < r; ++c) {
        si.at(a, s, static_cast<int>(c)) = gl.at(a * 2 + s, c) / f.s[c];
      }
    }
  }
  Site& sj = site_[left + 1];
  sj.chi_l = static_cast<int>(r);
  sj.chi_r = chi_r;
  sj.a.assign(r * 2 * chi_r, Complex{});
  for (std::size_t c = 0; c < r; ++c) {
    for (int t = 0; t < 2; ++t) {
      for (int b = 0; b < chi_r; ++b) {
        sj.at(static_cast<int>(c), t, b) = gr.at(c, t * chi_r + b) / f.s[c];
      }
    }
  }
  weights_[left].resize(r);
  for (std::size_t c = 0; c < r; ++c) weights_[left][c] = f.s[c] / f.norm;
}

void MpsState::apply_2q_adjacent(int left_line, const ComplexMatrix& u) {
  check_line(left_line);
  check_line(left_line + 1);
  if (u.rows != 4 || u.cols != 4) {
    throw std::invalid_argument("apply_2q_adjacent expects a 4x4 gate");
  }
  if (!is_unitary(u, kUnitaryTol)) {
    throw ValidationError("non-unitary gate rejected by the MPS backend");
  }
  two_site_update(left_line, u);
}

void MpsState::apply_2q(int j, int k, const ComplexMatrix& u) {
  check_line(j);
  check_line(k);
  if (j == k) throw std::invalid_argument("apply_2q lines must differ");
  if (k == j + 1) {
    apply_2q_adjacent(j, u);
    return;
  }
  if (j == k + 1) {
    apply_2q_adjacent(k, swap_qubit_basis(u));
    return;
  }
  const int lo = std::min(j, k);
  const int hi = std::max(j, k);
  for (int m = hi - 1; m > lo; --m) apply_2q_adjacent(m, gatelib::swap());
  if (j == lo) {
    apply_2q_adjacent(lo, u);
  } else {
    apply_2q_adjacent(lo, swap_qubit_basis(u));
  }
  for (int m = lo + 1; m < hi; ++m) apply_2q_adjacent(m, gatelib::swap());
}

std::pair<double, double> MpsState::outcome_probabilities(int line) const {
  check_line(line);
  const Site& t = site_[line];
  const std::vector<double>& lam_l = line > 0 ? weights_[line - 1] : kBoundaryWeights;
  const std::vector<double>& lam_r = line < n_ - 1 ? weights_[line] : kBoundaryWeights;
  double p[2] = {0.0, 0.0};
  for (int a = 0; a < t.chi_l; ++a) {
    for (int b = 0; b < t.chi_r; ++b) {
      const double w = lam_l[a] * lam_l[a] * lam_r[b] * lam_r[b];
      p[0] += w * std::norm(t.at(a, 0, b));
      p[1] += w * std::norm(t.at(a, 1, b));
    }
  }
  if (std::abs(p[0] + p[1] - 1.0) > 1e-9) {
    throw NumericalError(fmt::format("measurement probabilities sum to {:.17g}", p[0] + p[1]));
  }
  return {std::clamp(p[0], 0.0, 1.0), std::clamp(p[1], 0.0, 1.0)};
}

MeasurementOutcome MpsState::measure(int line, Rng& rng) {
  const auto [p0, p1] = outcome_probabilities(line);
  if (p0 < kZeroProbTol && p1 < kZeroProbTol) {
    throw NumericalError("both measurement outcomes have vanishing probability");
  }
  return measure_forced(line, rng.draw_bit(p0));
}

MeasurementOutcome MpsState::measure_forced(int line, int outcome) {
  const auto [p0, p1] = outcome_probabilities(line);
  const double p = outcome == 0 ? p0 : p1;
  if (p < kZeroProbTol) {
    throw NumericalError(
        fmt::format("forced outcome {} on line {} has probability {:.3e}", outcome, line, p));
  }
  Site& t = site_[line];
  const double inv = 1.0 / std::sqrt(p);
  for (int a = 0; a < t.chi_l; ++a) {
    for (int b = 0; b < t.chi_r; ++b) {
      t.at(a, outcome, b) *= inv;
      t.at(a, 1 - outcome, b) = 0.0;
    }
  }
  recanonicalize();
  MeasurementOutcome m;
  m.p0 = p0;
  m.p1 = p1;
  m.outcome = outcome;
  return m;
}

void MpsState::recanonicalize() {
  if (n_ == 1) {
    double nsq = 0.0;
    for (const Complex& c : site_[0].a) nsq += std::norm(c);
    const double inv = 1.0 / std::sqrt(nsq);
    for (Complex& c : site_[0].a) c *= inv;
    return;
  }

  // Fold cut weights into the right bonds, making a plain tensor train.
  std::vector<Site> t = site_;
  for (int i = 0; i < n_ - 1; ++i) {
    for (int a = 0; a < t[i].chi_l; ++a) {
      for (int s = 0; s < 2; ++s) {
        for (int b = 0; b < t[i].chi_r; ++b) {
          t[i].at(a, s, b) *= weights_[i][b];
        }
      }
    }
  }

  // Right-to-left: make every site but the first right-isometric.
  for (int i = n_ - 1; i > 0; --i) {
    ComplexMatrix m(t[i].chi_l, 2 * t[i].chi_r, t[i].a);
    TruncatedSvd f = truncated_svd(m, kRankTol);
    const std::size_t r = f.s.size();
    t[i].chi_l = static_cast<int>(r);
    t[i].a = f.v_dagger.entries;
    // carry = U Sigma folds into the left neighbour's right bond
    ComplexMatrix carry(f.u.rows, r);
    for (std::size_t p = 0; p < f.u.rows; ++p) {
      for (std::size_t q = 0; q < r; ++q) carry.at(p, q) = f.u.at(p, q) * f.s[q];
    }
    ComplexMatrix left(static_cast<std::size_t>(t[i - 1].chi_l) * 2, t[i - 1].chi_r,
                       t[i - 1].a);
    ComplexMatrix folded = matmul(left, carry);
    t[i - 1].chi_r = static_cast<int>(r);
    t[i - 1].a = folded.entries;
  }

  // Left-to-right: extract weights and site tensors, dividing only by the
  // retained singular values of the current cut.
  ComplexMatrix carry_tilde(static_cast<std::size_t>(t[0].chi_l) * 2, t[0].chi_r, t[0].a);
  std::vector<double> prev_sigma(static_cast<std::size_t>(t[0].chi_l), 1.0);
  double prev_scale = 1.0;
  int chi_in = t[0].chi_l;  // = 1

  for (int i = 0; i < n_ - 1; ++i) {
    ComplexMatrix weighted = carry_tilde;  // rows (a,s) = 2*chi_in, cols = chi_out
    for (int a = 0; a < chi_in; ++a) {
      for (int s = 0; s < 2; ++s) {
        for (std::size_t c = 0; c < weighted.cols; ++c) {
          weighted.at(static_cast<std::size_t>(a) * 2 + s, c) *= prev_sigma[a];
        }
      }
    }
    TruncatedSvd f = truncated_svd(weighted, kRankTol);
    const std::size_t r = f.s.size();
    if (r > static_cast<std::size_t>(max_chi_)) {
      throw CapExceeded("chi", r, static_cast<std::size_t>(max_chi_), "recanonicalize");
    }
    ComplexMatrix v_thin(weighted.cols, r);
    for (std::size_t p = 0; p < weighted.cols; ++p) {
      for (std::size_t q = 0; q < r; ++q) v_thin.at(p, q) = std::conj(f.v_dagger.at(q, p));
    }
    ComplexMatrix g = matmul(carry_tilde, v_thin);  // (2 chi_in) x r
    Site& site = site_[i];
    site.chi_l = chi_in;
    site.chi_r = static_cast<int>(r);
    site.a.assign(static_cast<std::size_t>(chi_in) * 2 * r, Complex{});
    for (int a = 0; a < chi_in; ++a) {
      for (int s = 0; s < 2; ++s) {
        for (std::size_t c = 0; c < r; ++c) {
          site.at(a, s, static_cast<int>(c)) =
              prev_scale * g.at(static_cast<std::size_t>(a) * 2 + s, c) / f.s[c];
        }
      }
    }
    weights_[i].resize(r);
    for (std::size_t c = 0; c < r; ++c) weights_[i][c] = f.s[c] / f.norm;

    // carry_tilde <- V' B_{i+1}
    ComplexMatrix next_site(t[i + 1].chi_l, static_cast<std::size_t>(2) * t[i + 1].chi_r,
                            t[i + 1].a);
    carry_tilde = matmul(f.v_dagger, next_site);  // r x (2 chi_r)
    // reshape to rows (a,s): r*2 x chi_r
    carry_tilde.rows = r * 2;
    carry_tilde.cols = static_cast<std::size_t>(t[i + 1].chi_r);
    prev_sigma = f.s;
    prev_scale = f.norm;
    chi_in = static_cast<int>(r);
  }

  // Last site, normalized exactly.
  double total_sq = 0.0;
  for (int a = 0; a < chi_in; ++a) {
    for (int s = 0; s < 2; ++s) {
      total_sq += std::norm(prev_sigma[a] *
                            carry_tilde.at(static_cast<std::size_t>(a) * 2 + s, 0));
    }
  }
  const double total = std::sqrt(total_sq);
  Site& last = site_[n_ - 1];
  last.chi_l = chi_in;
  last.chi_r = 1;
  last.a.assign(static_cast<std::size_t>(chi_in) * 2, Complex{});
  for (int a = 0; a < chi_in; ++a) {
    for (int s = 0; s < 2; ++s) {
      last.at(a, s, 0) =
          prev_scale * carry_tilde.at(static_cast<std::size_t>(a) * 2 + s, 0) / total;
    }
  }
}

int MpsState::schmidt_rank(int cut) const {
  if (cut < 0 || cut >= n_ - 1) {
    throw std::out_of_range(fmt::format("cut {} out of range for {} sites", cut, n_));
  }
  return static_cast<int>(weights_[cut].size());
}

std::vector<int> MpsState::bond_dims() const {
  std::vector<int> dims(weights_.size());
  for (std::size_t i = 0; i < weights_.size(); ++i) dims[i] = static_cast<int>(weights_[i].size());
  return dims;
}

const std::vector<double>& MpsState::bond_weights(int cut) const {
  if (cut < 0 || cut >= n_ - 1) {
    throw std::out_of_range(fmt::format("cut {} out of range for {} sites", cut, n_));
  }
  return weights_[cut];
}

int MpsState::max_bond() const {
  int m = 1;
  for (const auto& w : weights_) m = std::max(m, static_cast<int>(w.size()));
  return m;
}

double MpsState::norm_deviation() const {
  double dev = 0.0;
  for (const auto& w : weights_) {
    double s = 0.0;
    for (double x : w) s += x * x;
    dev = std::max(dev, std::abs(s - 1.0));
  }
  if (weights_.empty()) {
    double s = 0.0;
    for (const Complex& c : site_[0].a) s += std::norm(c);
    dev = std::abs(s - 1.0);
  }
  return dev;
}

double MpsState::canonical_form_deviation() const {
  double dev = 0.0;

  // Right condition: contracting sites right of any cut (with the cut weights
  // folded) against their conjugates gives the identity on the cut bond.
  std::vector<Complex> r = {Complex{1.0}};
  int r_dim = 1;
  for (int i = n_ - 1; i >= 1; --i) {
    const Site& t = site_[i];
    const std::vector<double>& lam = i < n_ - 1 ? weights_[i] : kBoundaryWeights;
    std::vector<Complex> next(static_cast<std::size_t>(t.chi_l) * t.chi_l, Complex{});
    for (int a = 0; a < t.chi_l; ++a) {
      for (int a2 = 0; a2 < t.chi_l; ++a2) {
        Complex sum = 0.0;
        for (int s = 0; s < 2; ++s) {
          for (int b = 0; b < t.chi_r; ++b) {
            for (int b2 = 0; b2 < t.chi_r; ++b2) {
              sum += t.at(a, s, b) * lam[b] * std::conj(t.at(a2, s, b2)) * lam[b2] *
                     r[static_cast<std::size_t>(b) * r_dim + b2];
            }
          }
        }
        next[static_cast<std::size_t>(a) * t.chi_l + a2] = sum;
      }
    }
    r = std::move(next);
    r_dim = t.chi_l;
    for (int a = 0; a < r_dim; ++a) {
      for (int a2 = 0; a2 < r_dim; ++a2) {
        const Complex expected = a == a2 ? Complex{1.0} : Complex{0.0};
        dev = std::max(dev, std::abs(r[static_cast<std::size_t>(a) * r_dim + a2] - expected));
      }
    }
  }

  // Left condition: the weighted left blocks are orthogonal with squared
  // norms given by the cut weights, i.e. lam Gamma is a left isometry.
  std::vector<Complex> l = {Complex{1.0}};
  int l_dim = 1;
  for (int i = 0; i < n_ - 1; ++i) {
    const Site& t = site_[i];
    const std::vector<double>& lam = i > 0 ? weights_[i - 1] : kBoundaryWeights;
    std::vector<Complex> next(static_cast<std::size_t>(t.chi_r) * t.chi_r, Complex{});
    for (int b = 0; b < t.chi_r; ++b) {
      for (int b2 = 0; b2 < t.chi_r; ++b2) {
        Complex sum = 0.0;
        for (int s = 0; s < 2; ++s) {
          for (int a = 0; a < t.chi_l; ++a) {
            for (int a2 = 0; a2 < t.chi_l; ++a2) {
              sum += std::conj(t.at(a, s, b)) * lam[a] * t.at(a2, s, b2) * lam[a2] *
                     l[static_cast<std::size_t>(a) * l_dim + a2];
            }
          }
        }
        next[static_cast<std::size_t>(b) * t.chi_r + b2] = sum;
      }
    }
    l = std::move(next);
    l_dim = t.chi_r;
    for (int b = 0; b < l_dim; ++b) {
      for (int b2 = 0; b2 < l_dim; ++b2) {
        const Complex expected = b == b2 ? Complex{1.0} : Complex{0.0};
        dev = std::max(dev, std::abs(l[static_cast<std::size_t>(b) * l_dim + b2] - expected));
      }
    }
  }
  return dev;
}

}  // namespace tnqsim
