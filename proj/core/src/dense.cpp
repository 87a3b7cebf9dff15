#include "tnqsim/dense.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <stdexcept>

#include <fmt/format.h>

#include "tnqsim/errors.hpp"

namespace tnqsim {

namespace {

constexpr double kBranchCutoff = 1e-15;

std::size_t dim_of(int n) { return std::size_t{1} << n; }

int bit_of(std::size_t index, int line, int n) {
  return static_cast<int>((index >> (n - 1 - line)) & 1u);
}

void apply_1q_inplace(std::vector<Complex>& amps, int n, int line, const ComplexMatrix& u) {
  const std::size_t stride = std::size_t{1} << (n - 1 - line);
  const std::size_t dim = amps.size();
  for (std::size_t base = 0; base < dim; base += 2 * stride) {
    for (std::size_t off = 0; off < stride; ++off) {
      const std::size_t i0 = base + off;
      const std::size_t i1 = i0 + stride;
      const Complex a0 = amps[i0], a1 = amps[i1];
      amps[i0] = u.at(0, 0) * a0 + u.at(0, 1) * a1;
      amps[i1] = u.at(1, 0) * a0 + u.at(1, 1) * a1;
    }
  }
}

void apply_2q_inplace(std::vector<Complex>& amps, int n, int j, int k,
                      const ComplexMatrix& u) {
  const std::size_t sj = std::size_t{1} << (n - 1 - j);
  const std::size_t sk = std::size_t{1} << (n - 1 - k);
  const std::size_t dim = amps.size();
  for (std::size_t i = 0; i < dim; ++i) {
    if ((i & sj) || (i & sk)) continue;  // enumerate each 4-group once
    const std::size_t i00 = i, i01 = i | sk, i10 = i | sj, i11 = i | sj | sk;
    const Complex a00 = amps[i00], a01 = amps[i01], a10 = amps[i10], a11 = amps[i11];
    const Complex in[4] = {a00, a01, a10, a11};
    Complex out[4];
    for (int r = 0; r < 4; ++r) {
      out[r] = u.at(r, 0) * in[0] + u.at(r, 1) * in[1] + u.at(r, 2) * in[2] +
               u.at(r, 3) * in[3];
    }
    amps[i00] = out[0];
    amps[i01] = out[1];
    amps[i10] = out[2];
    amps[i11] = out[3];
  }
}

void check_line_range(int line, int n) {
  if (line < 0 || line >= n) {
    throw std::out_of_range(fmt::format("line {} out of range for {} qubits", line, n));
  }
}

struct Branch {
  std::vector<Complex> amps;
  double weight = 1.0;
  std::vector<std::pair<std::string, int>> registers;
};

int register_value(const std::vector<std::pair<std::string, int>>& regs,
                   const std::string& id) {
  for (const auto& [name, value] : regs) {
    if (name == id) return value;
  }
  throw ValidationError(fmt::format("condition references unwritten register '{}'", id));
}

// p0 of a standard-basis measurement, and in-place collapse helpers.
double prob_zero(const std::vector<Complex>& amps, int n, int line) {
  double p0 = 0.0;
  for (std::size_t i = 0; i < amps.size(); ++i) {
    if (bit_of(i, line, n) == 0) p0 += std::norm(amps[i]);
  }
  return p0;
}

void collapse(std::vector<Complex>& amps, int n, int line, int bit, double p) {
  const double inv = 1.0 / std::sqrt(p);
  for (std::size_t i = 0; i < amps.size(); ++i) {
    if (bit_of(i, line, n) == bit) {
      amps[i] *= inv;
    } else {
      amps[i] = 0.0;
    }
  }
}

}  // namespace

StateVector StateVector::zero_state(int n) {
  StateVector s;
  s.n = n;
  s.amplitudes = ComplexVector(dim_of(n));
  s.amplitudes.entries[0] = 1.0;
  return s;
}

StateVector StateVector::product_state(
    const std::vector<std::pair<Complex, Complex>>& amps) {
  const int n = static_cast<int>(amps.size());
  StateVector s;
  s.n = n;
  s.amplitudes = ComplexVector(dim_of(n));
  for (std::size_t i = 0; i < s.amplitudes.dim; ++i) {
    Complex a = 1.0;
    for (int l = 0; l < n; ++l) {
      a *= bit_of(i, l, n) == 0 ? amps[l].first : amps[l].second;
    }
    s.amplitudes.entries[i] = a;
  }
  return s;
}

StateVector StateVector::initial_state(const Circuit& c) {
  std::vector<std::pair<Complex, Complex>> amps(c.n_qubits, {Complex{1.0}, Complex{0.0}});
  for (const Instruction& instr : c.instructions) {
    if (instr.kind == InstructionKind::InputState) {
      amps[instr.line] = {instr.amp0, instr.amp1};
    }
  }
  return product_state(amps);
}

StateVector apply_gate(const StateVector& s, const Instruction& instr) {
  StateVector out = s;
  switch (instr.kind) {
    case InstructionKind::OneQubitGate:
      check_line_range(instr.line, s.n);
      apply_1q_inplace(out.amplitudes.entries, s.n, instr.line, instr.matrix);
      break;
    case InstructionKind::TwoQubitGate:
      check_line_range(instr.line, s.n);
      check_line_range(instr.line2, s.n);
      apply_2q_inplace(out.amplitudes.entries, s.n, instr.line, instr.line2, instr.matrix);
      break;
    default:
      throw std::invalid_argument("apply_gate expects a gate instruction");
  }
  return out;
}

ComplexMatrix overall_unitary(const Circuit& c) {
  if (c.n_qubits > 10) {
    throw CapExceeded("dense_qubits", static_cast<std::size_t>(c.n_qubits), 10,
                      "overall_unitary");
  }
  for (const Instruction& instr : c.instructions) {
    if (instr.kind == InstructionKind::Measure) {
      throw std::invalid_argument("overall_unitary requires a measurement-free circuit");
    }
    if (instr.condition) {
      throw std::invalid_argument("overall_unitary requires a condition-free circuit");
    }
  }
  const std::size_t dim = dim_of(c.n_qubits);
  ComplexMatrix u(dim, dim);
  std::vector<Complex> col(dim);
  for (std::size_t b = 0; b < dim; ++b) {
    std::fill(col.begin(), col.end(), Complex{0.0});
    col[b] = 1.0;
    for (const Instruction& instr : c.instructions) {
      if (instr.kind == InstructionKind::InputState) continue;
      if (instr.kind == InstructionKind::OneQubitGate) {
        apply_1q_inplace(col, c.n_qubits, instr.line, instr.matrix);
      } else {
        apply_2q_inplace(col, c.n_qubits, instr.line, instr.line2, instr.matrix);
      }
    }
    for (std::size_t r = 0; r < dim; ++r) u.at(r, b) = col[r];
  }
  return u;
}

std::map<std::string, double> full_distribution(const Circuit& c,
                                                const std::vector<int>& lines,
                                                int max_qubits) {
  if (c.n_qubits > max_qubits) {
    throw CapExceeded("dense_qubits", static_cast<std::size_t>(c.n_qubits),
                      static_cast<std::size_t>(max_qubits), "full_distribution");
  }
  for (int l : lines) check_line_range(l, c.n_qubits);

  std::map<std::string, double> table;
  std::vector<Branch> stack;
  stack.push_back(Branch{StateVector::initial_state(c).amplitudes.entries, 1.0, {}});

  // Each branch replays the instruction list; measurements fork the branch.
  std::function<void(Branch, std::size_t)> walk = [&](Branch b, std::size_t pc) {
    for (std::size_t i = pc; i < c.instructions.size(); ++i) {
      const Instruction& instr = c.instructions[i];
      if (instr.kind == InstructionKind::InputState) continue;
      if (instr.kind == InstructionKind::Measure) {
        const double p0 = prob_zero(b.amps, c.n_qubits, instr.line);
        const double p1 = 1.0 - p0;
        for (int bit : {0, 1}) {
          const double p = bit == 0 ? p0 : p1;
          if (p < kBranchCutoff) continue;
          Branch fork;
          fork.amps = b.amps;
          collapse(fork.amps, c.n_qubits, instr.line, bit, p);
          fork.weight = b.weight * p;
          fork.registers = b.registers;
          fork.registers.emplace_back(instr.register_id, bit);
          walk(std::move(fork), i + 1);
        }
        return;
      }
      if (instr.condition &&
          register_value(b.registers, instr.condition->register_id) !=
              instr.condition->required_bit) {
        continue;
      }
      if (instr.kind == InstructionKind::OneQubitGate) {
        apply_1q_inplace(b.amps, c.n_qubits, instr.line, instr.matrix);
      } else {
        apply_2q_inplace(b.amps, c.n_qubits, instr.line, instr.line2, instr.matrix);
      }
    }
    // Terminal: accumulate the Born weights over the requested lines.
    for (std::size_t idx = 0; idx < b.amps.size(); ++idx) {
      const double w = b.weight * std::norm(b.amps[idx]);
      if (w == 0.0) continue;
      std::string key(lines.size(), '0');
      for (std::size_t q = 0; q < lines.size(); ++q) {
        key[q] = bit_of(idx, lines[q], c.n_qubits) ? '1' : '0';
      }
      table[key] += w;
    }
  };
  walk(std::move(stack.back()), 0);
  return table;
}

DenseTrajectory sample_trajectory(const Circuit& c, Rng& rng, int max_qubits) {
  if (c.n_qubits > max_qubits) {
    throw CapExceeded("dense_qubits", static_cast<std::size_t>(c.n_qubits),
                      static_cast<std::size_t>(max_qubits), "sample_trajectory");
  }
  DenseTrajectory t;
  t.final_state = StateVector::initial_state(c);
  auto& amps = t.final_state.amplitudes.entries;
  for (const Instruction& instr : c.instructions) {
    switch (instr.kind) {
      case InstructionKind::InputState:
        break;
      case InstructionKind::Measure: {
        const double p0 = prob_zero(amps, c.n_qubits, instr.line);
        const int bit = rng.draw_bit(p0);
        const double p = bit == 0 ? p0 : 1.0 - p0;
        if (p < kBranchCutoff) {
          throw NumericalError("sampled a vanishing-probability branch");
        }
        collapse(amps, c.n_qubits, instr.line, bit, p);
        t.registers.emplace_back(instr.register_id, bit);
        break;
      }
      default: {
        if (instr.condition &&
            register_value(t.registers, instr.condition->register_id) !=
                instr.condition->required_bit) {
          break;
        }
        if (instr.kind == InstructionKind::OneQubitGate) {
          apply_1q_inplace(amps, c.n_qubits, instr.line, instr.matrix);
        } else {
          apply_2q_inplace(amps, c.n_qubits, instr.line, instr.line2, instr.matrix);
        }
        break;
      }
    }
  }
  return t;
}

}  // namespace tnqsim
