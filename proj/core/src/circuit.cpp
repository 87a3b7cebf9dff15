#include "tnqsim/circuit.hpp"

#include <cctype>
#include <cmath>
#include <cstdlib>
#include <map>
#include <set>
#include <sstream>

#include <fmt/format.h>

#include "tnqsim/errors.hpp"

namespace tnqsim {

Instruction Instruction::one_qubit(int line, ComplexMatrix m, std::optional<Condition> cond) {
  Instruction i;
  i.kind = InstructionKind::OneQubitGate;
  i.line = line;
  i.matrix = std::move(m);
  i.condition = std::move(cond);
  return i;
}

Instruction Instruction::two_qubit(int j, int k, ComplexMatrix m, std::optional<Condition> cond) {
  Instruction i;
  i.kind = InstructionKind::TwoQubitGate;
  i.line = j;
  i.line2 = k;
  i.matrix = std::move(m);
  i.condition = std::move(cond);
  return i;
}

Instruction Instruction::measure(int line, std::string register_id) {
  Instruction i;
  i.kind = InstructionKind::Measure;
  i.line = line;
  i.register_id = std::move(register_id);
  return i;
}

Instruction Instruction::input_state(int line, Complex amp0, Complex amp1) {
  Instruction i;
  i.kind = InstructionKind::InputState;
  i.line = line;
  i.amp0 = amp0;
  i.amp1 = amp1;
  return i;
}

namespace gatelib {

namespace {
const double kInvSqrt2 = 0.70710678118654752440;

ComplexMatrix make2(std::initializer_list<Complex> e) { return ComplexMatrix(2, 2, e); }
ComplexMatrix make4(std::initializer_list<Complex> e) { return ComplexMatrix(4, 4, e); }
}  // namespace

const ComplexMatrix& h() {
  static const ComplexMatrix m =
      make2({kInvSqrt2, kInvSqrt2, kInvSqrt2, -kInvSqrt2});
  return m;
}
const ComplexMatrix& x() {
  static const ComplexMatrix m = make2({0, 1, 1, 0});
  return m;
}
const ComplexMatrix& y() {
  static const ComplexMatrix m = make2({0, Complex{0, -1}, Complex{0, 1}, 0});
  return m;
}
const ComplexMatrix& z() {
  static const ComplexMatrix m = make2({1, 0, 0, -1});
  return m;
}
const ComplexMatrix& s() {
  static const ComplexMatrix m = make2({1, 0, 0, Complex{0, 1}});
  return m;
}
const ComplexMatrix& t() {
  static const ComplexMatrix m = make2({1, 0, 0, Complex{kInvSqrt2, kInvSqrt2}});
  return m;
}
const ComplexMatrix& cnot() {
  static const ComplexMatrix m = make4({1, 0, 0, 0,  //
                                        0, 1, 0, 0,  //
                                        0, 0, 0, 1,  //
                                        0, 0, 1, 0});
  return m;
}
const ComplexMatrix& cz() {
  static const ComplexMatrix m = make4({1, 0, 0, 0,  //
                                        0, 1, 0, 0,  //
                                        0, 0, 1, 0,  //
                                        0, 0, 0, -1});
  return m;
}
const ComplexMatrix& swap() {
  static const ComplexMatrix m = make4({1, 0, 0, 0,  //
                                        0, 0, 1, 0,  //
                                        0, 1, 0, 0,  //
                                        0, 0, 0, 1});
  return m;
}
const ComplexMatrix& projector(int bit) {
  static const ComplexMatrix p0 = make2({1, 0, 0, 0});
  static const ComplexMatrix p1 = make2({0, 0, 0, 1});
  return bit == 0 ? p0 : p1;
}

std::optional<std::string> name_of(const ComplexMatrix& m) {
  static const std::vector<std::pair<std::string, const ComplexMatrix*>> table = {
      {"h", &h()},       {"x", &x()},   {"y", &y()},       {"z", &z()},
      {"s", &s()},       {"t", &t()},   {"cnot", &cnot()}, {"cz", &cz()},
      {"swap", &swap()},
  };
  for (const auto& [name, gate] : table) {
    if (m == *gate) return name;
  }
  return std::nullopt;
}

std::optional<ComplexMatrix> by_name(std::string_view name) {
  if (name == "h") return h();
  if (name == "x") return x();
  if (name == "y") return y();
  if (name == "z") return z();
  if (name == "s") return s();
  if (name == "t") return t();
  if (name == "cnot") return cnot();
  if (name == "cz") return cz();
  if (name == "swap") return swap();
  return std::nullopt;
}

}  // namespace gatelib

namespace {

constexpr double kGateUnitarityTol = 1e-8;

std::vector<std::string> tokenize(std::string_view line) {
  std::vector<std::string> tokens;
  std::string current;
  for (char ch : line) {
    if (ch == '#') break;
    if (std::isspace(static_cast<unsigned char>(ch))) {
      if (!current.empty()) {
        tokens.push_back(std::move(current));
        current.clear();
      }
    } else {
      current.push_back(ch);
    }
  }
  if (!current.empty()) tokens.push_back(std::move(current));
  return tokens;
}

int parse_int(const std::string& tok, int line_no, const char* what) {
  std::size_t pos = 0;
  int value = 0;
  try {
    value = std::stoi(tok, &pos);
  } catch (const std::exception&) {
    throw ParseError(line_no, fmt::format("expected {} but got '{}'", what, tok));
  }
  if (pos != tok.size()) {
    throw ParseError(line_no, fmt::format("expected {} but got '{}'", what, tok));
  }
  return value;
}

double parse_float(const std::string& tok, int line_no) {
  const char* begin = tok.c_str();
  char* end = nullptr;
  double value = std::strtod(begin, &end);
  if (end != begin + tok.size()) {
    throw ParseError(line_no, fmt::format("expected a number but got '{}'", tok));
  }
  return value;
}

int parse_line_index(const std::string& tok, int n_qubits, int line_no) {
  const int l = parse_int(tok, line_no, "a line index");
  if (l < 0 || l >= n_qubits) {
    throw ParseError(line_no,
                     fmt::format("line index {} out of range for {} qubits", l, n_qubits));
  }
  return l;
}

ComplexMatrix parse_matrix(const std::vector<std::string>& tokens, std::size_t offset,
                           std::size_t dim, int line_no) {
  const std::size_t need = 2 * dim * dim;
  if (tokens.size() != offset + need) {
    throw ParseError(line_no, fmt::format("expected {} matrix floats, got {}", need,
                                          tokens.size() - offset));
  }
  ComplexMatrix m(dim, dim);
  for (std::size_t i = 0; i < dim * dim; ++i) {
    const double re = parse_float(tokens[offset + 2 * i], line_no);
    const double im = parse_float(tokens[offset + 2 * i + 1], line_no);
    m.entries[i] = Complex{re, im};
  }
  return m;
}

std::string fmt_float(double x) {
  // 17 significant digits round-trips an IEEE double exactly.
  std::string s = fmt::format("{:.17g}", x);
  return s;
}

bool matrix_finite(const ComplexMatrix& m) {
  for (const Complex& e : m.entries) {
    if (!std::isfinite(e.real()) || !std::isfinite(e.imag())) return false;
  }
  return true;
}

}  // namespace

Circuit parse_circuit(std::string_view text) {
  Circuit c;
  bool saw_header = false;
  std::set<std::string> known_registers;

  std::istringstream stream{std::string(text)};
  std::string raw_line;
  int line_no = 0;
  while (std::getline(stream, raw_line)) {
    ++line_no;
    auto tokens = tokenize(raw_line);
    if (tokens.empty()) continue;

    if (!saw_header) {
      if (tokens[0] != "qubits" || tokens.size() != 2) {
        throw ParseError(line_no, "expected 'qubits N' header");
      }
      c.n_qubits = parse_int(tokens[1], line_no, "a qubit count");
      if (c.n_qubits < 1) throw ParseError(line_no, "qubit count must be positive");
      saw_header = true;
      continue;
    }

    // Optional classical-control prefix: cif mID BIT:
    std::optional<Condition> condition;
    if (tokens[0] == "cif") {
      if (tokens.size() < 4) {
        throw ParseError(line_no, "expected 'cif mID BIT: <gate>'");
      }
      Condition cond;
      cond.register_id = tokens[1];
      std::string bit_tok = tokens[2];
      bool colon_attached = !bit_tok.empty() && bit_tok.back() == ':';
      if (colon_attached) bit_tok.pop_back();
      cond.required_bit = parse_int(bit_tok, line_no, "a condition bit");
      if (cond.required_bit != 0 && cond.required_bit != 1) {
        throw ParseError(line_no, "condition bit must be 0 or 1");
      }
      std::size_t rest = 3;
      if (!colon_attached) {
        if (tokens[3] != ":") throw ParseError(line_no, "expected ':' after condition bit");
        rest = 4;
      }
      if (!known_registers.count(cond.register_id)) {
        throw ParseError(line_no, fmt::format("condition references unknown register '{}'",
                                              cond.register_id));
      }
      condition = std::move(cond);
      tokens.erase(tokens.begin(), tokens.begin() + static_cast<std::ptrdiff_t>(rest));
      if (tokens.empty()) throw ParseError(line_no, "missing gate after 'cif' prefix");
    }

    const std::string& op = tokens[0];

    if (op == "linear") {
      if (condition) throw ParseError(line_no, "'linear' cannot be conditioned");
      if (tokens.size() != 1) throw ParseError(line_no, "unexpected tokens after 'linear'");
      c.linear = true;
      continue;
    }

    if (op == "input") {
      if (condition) throw ParseError(line_no, "'input' cannot be conditioned");
      if (tokens.size() != 6) {
        throw ParseError(line_no, "expected 'input L a_re a_im b_re b_im'");
      }
      const int l = parse_line_index(tokens[1], c.n_qubits, line_no);
      const Complex a{parse_float(tokens[2], line_no), parse_float(tokens[3], line_no)};
      const Complex b{parse_float(tokens[4], line_no), parse_float(tokens[5], line_no)};
      c.instructions.push_back(Instruction::input_state(l, a, b));
      continue;
    }

    if (op == "measure") {
      if (condition) throw ParseError(line_no, "a measurement cannot be conditioned");
      if (tokens.size() != 4 || tokens[2] != "->") {
        throw ParseError(line_no, "expected 'measure L -> mID'");
      }
      const int l = parse_line_index(tokens[1], c.n_qubits, line_no);
      c.instructions.push_back(Instruction::measure(l, tokens[3]));
      known_registers.insert(tokens[3]);
      continue;
    }

    if (auto named = gatelib::by_name(op)) {
      if (named->rows == 2) {
        if (tokens.size() != 2) throw ParseError(line_no, fmt::format("expected '{} L'", op));
        const int l = parse_line_index(tokens[1], c.n_qubits, line_no);
        c.instructions.push_back(Instruction::one_qubit(l, *named, condition));
      } else {
        if (tokens.size() != 3) throw ParseError(line_no, fmt::format("expected '{} A B'", op));
        const int j = parse_line_index(tokens[1], c.n_qubits, line_no);
        const int k = parse_line_index(tokens[2], c.n_qubits, line_no);
        if (j == k) throw ParseError(line_no, "2-qubit gate lines must differ");
        c.instructions.push_back(Instruction::two_qubit(j, k, *named, condition));
      }
      continue;
    }

    if (op == "u") {
      if (tokens.size() != 10) {
        throw ParseError(line_no, "expected 'u L' followed by 8 floats");
      }
      const int l = parse_line_index(tokens[1], c.n_qubits, line_no);
      ComplexMatrix m = parse_matrix(tokens, 2, 2, line_no);
      if (!c.linear && !is_unitary(m, kGateUnitarityTol)) {
        throw ParseError(line_no, "non-unitary gate in a circuit without the 'linear' flag");
      }
      c.instructions.push_back(Instruction::one_qubit(l, std::move(m), condition));
      continue;
    }

    if (op == "u2") {
      if (tokens.size() != 35) {
        throw ParseError(line_no, "expected 'u2 J K' followed by 32 floats");
      }
      const int j = parse_line_index(tokens[1], c.n_qubits, line_no);
      const int k = parse_line_index(tokens[2], c.n_qubits, line_no);
      if (j == k) throw ParseError(line_no, "2-qubit gate lines must differ");
      ComplexMatrix m = parse_matrix(tokens, 3, 4, line_no);
      if (!c.linear && !is_unitary(m, kGateUnitarityTol)) {
        throw ParseError(line_no, "non-unitary gate in a circuit without the 'linear' flag");
      }
      c.instructions.push_back(Instruction::two_qubit(j, k, std::move(m), condition));
      continue;
    }

    throw ParseError(line_no, fmt::format("unknown directive '{}'", op));
  }

  if (!saw_header) throw ParseError(line_no == 0 ? 1 : line_no, "missing 'qubits N' header");
  return c;
}

std::string emit_circuit(const Circuit& c) {
  std::string out = fmt::format("qubits {}\n", c.n_qubits);
  if (c.linear) out += "linear\n";
  for (const Instruction& instr : c.instructions) {
    if (instr.condition) {
      out += fmt::format("cif {} {}: ", instr.condition->register_id,
                         instr.condition->required_bit);
    }
    switch (instr.kind) {
      case InstructionKind::InputState:
        out += fmt::format("input {} {} {} {} {}\n", instr.line, fmt_float(instr.amp0.real()),
                           fmt_float(instr.amp0.imag()), fmt_float(instr.amp1.real()),
                           fmt_float(instr.amp1.imag()));
        break;
      case InstructionKind::Measure:
        out += fmt::format("measure {} -> {}\n", instr.line, instr.register_id);
        break;
      case InstructionKind::OneQubitGate: {
        if (auto name = gatelib::name_of(instr.matrix)) {
          out += fmt::format("{} {}\n", *name, instr.line);
        } else {
          out += fmt::format("u {}", instr.line);
          for (const Complex& e : instr.matrix.entries) {
            out += fmt::format(" {} {}", fmt_float(e.real()), fmt_float(e.imag()));
          }
          out += "\n";
        }
        break;
      }
      case InstructionKind::TwoQubitGate: {
        if (auto name = gatelib::name_of(instr.matrix)) {
          out += fmt::format("{} {} {}\n", *name, instr.line, instr.line2);
        } else {
          out += fmt::format("u2 {} {}", instr.line, instr.line2);
          for (const Complex& e : instr.matrix.entries) {
            out += fmt::format(" {} {}", fmt_float(e.real()), fmt_float(e.imag()));
          }
          out += "\n";
        }
        break;
      }
    }
  }
  return out;
}

std::vector<std::string> validate(const Circuit& c) {
  std::vector<std::string> diags;
  if (c.n_qubits < 1) diags.push_back("circuit must have at least one qubit line");

  std::set<std::string> written;
  std::map<std::string, int> write_counts;
  std::vector<bool> line_saw_operation(std::max(c.n_qubits, 0), false);

  for (std::size_t idx = 0; idx < c.instructions.size(); ++idx) {
    const Instruction& instr = c.instructions[idx];
    const auto tag = [&](const std::string& msg) {
      diags.push_back(fmt::format("instruction {}: {}", idx, msg));
    };

    const bool line_ok = instr.line >= 0 && instr.line < c.n_qubits;
    if (!line_ok) tag(fmt::format("line {} out of range", instr.line));

    switch (instr.kind) {
      case InstructionKind::OneQubitGate:
        if (instr.matrix.rows != 2 || instr.matrix.cols != 2) {
          tag("1-qubit gate payload must be 2x2");
          break;
        }
        if (!matrix_finite(instr.matrix)) tag("gate matrix has non-finite entries");
        else if (!c.linear && !is_unitary(instr.matrix, kGateUnitarityTol)) {
          tag("non-unitary gate without the 'linear' flag");
        }
        break;
      case InstructionKind::TwoQubitGate: {
        const bool line2_ok = instr.line2 >= 0 && instr.line2 < c.n_qubits;
        if (!line2_ok) tag(fmt::format("line {} out of range", instr.line2));
        if (instr.line == instr.line2) tag("2-qubit gate lines must differ");
        if (instr.matrix.rows != 4 || instr.matrix.cols != 4) {
          tag("2-qubit gate payload must be 4x4");
          break;
        }
        if (!matrix_finite(instr.matrix)) tag("gate matrix has non-finite entries");
        else if (!c.linear && !is_unitary(instr.matrix, kGateUnitarityTol)) {
          tag("non-unitary gate without the 'linear' flag");
        }
        break;
      }
      case InstructionKind::Measure:
        if (instr.register_id.empty()) tag("measurement must name a register");
        write_counts[instr.register_id] += 1;
        if (instr.condition) tag("a measurement cannot be conditioned");
        break;
      case InstructionKind::InputState: {
        if (line_ok && line_saw_operation[instr.line]) {
          tag("input state must precede all gates and measurements on its line");
        }
        const double nrm = std::norm(instr.amp0) + std::norm(instr.amp1);
        if (!std::isfinite(nrm)) {
          tag("input amplitudes have non-finite entries");
        } else if (!c.linear && std::abs(nrm - 1.0) > 1e-8) {
          tag(fmt::format("input amplitudes have norm^2 {} (expected 1)", nrm));
        }
        if (instr.condition) tag("an input state cannot be conditioned");
        break;
      }
    }

    if (instr.condition) {
      if (!instr.is_gate()) {
        // already tagged above
      } else if (!written.count(instr.condition->register_id)) {
        tag(fmt::format("condition references register '{}' not written by an earlier measure",
                        instr.condition->register_id));
      }
      if (instr.condition->required_bit != 0 && instr.condition->required_bit != 1) {
        tag("condition bit must be 0 or 1");
      }
    }

    if (instr.kind == InstructionKind::Measure) written.insert(instr.register_id);
    if (instr.kind != InstructionKind::InputState) {
      if (line_ok) line_saw_operation[instr.line] = true;
      if (instr.kind == InstructionKind::TwoQubitGate && instr.line2 >= 0 &&
          instr.line2 < c.n_qubits) {
        line_saw_operation[instr.line2] = true;
      }
    }
  }

  for (const auto& [reg, count] : write_counts) {
    if (count > 1) {
      diags.push_back(fmt::format("register '{}' written {} times (at most once allowed)",
                                  reg, count));
    }
  }
  return diags;
}

}  // namespace tnqsim
