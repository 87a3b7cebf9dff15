#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "tnqsim/circuit.hpp"
#include "tnqsim/errors.hpp"
#include "test_util.hpp"

using namespace tnqsim;

TEST_CASE("gate library is unitary to 1e-12") {
  for (const ComplexMatrix* m : {&gatelib::h(), &gatelib::x(), &gatelib::y(), &gatelib::z(),
                                 &gatelib::s(), &gatelib::t()}) {
    CHECK(is_unitary(*m, 1e-12));
  }
  for (const ComplexMatrix* m : {&gatelib::cnot(), &gatelib::cz(), &gatelib::swap()}) {
    CHECK(is_unitary(*m, 1e-12));
  }
}

TEST_CASE("parse the canonical Bell listing") {
  const Circuit c = parse_circuit(
      "qubits 2\nh 0\ncnot 0 1\nmeasure 0 -> m0\nmeasure 1 -> m1");
  CHECK(c.n_qubits == 2);
  REQUIRE(c.instructions.size() == 4);
  CHECK(c.instructions[0].kind == InstructionKind::OneQubitGate);
  CHECK(c.instructions[0].matrix == gatelib::h());
  CHECK(c.instructions[1].kind == InstructionKind::TwoQubitGate);
  CHECK(c.instructions[1].line == 0);
  CHECK(c.instructions[1].line2 == 1);
  CHECK(c.instructions[2].kind == InstructionKind::Measure);
  CHECK(c.instructions[2].register_id == "m0");
  CHECK(validate(c).empty());
}

TEST_CASE("parse an empty circuit") {
  const Circuit c = parse_circuit("qubits 1");
  CHECK(c.n_qubits == 1);
  CHECK(c.instructions.empty());
}

TEST_CASE("comments and blank lines are ignored") {
  const Circuit c = parse_circuit("# header comment\n\nqubits 2  # trailing\n h 1 # gate\n");
  CHECK(c.n_qubits == 2);
  REQUIRE(c.instructions.size() == 1);
  CHECK(c.instructions[0].line == 1);
}

TEST_CASE("emit of an empty 3-qubit circuit") {
  Circuit c;
  c.n_qubits = 3;
  CHECK(emit_circuit(c) == "qubits 3\n");
}

TEST_CASE("emit keeps named gates named") {
  const Circuit c = testutil::bell_circuit();
  const std::string text = emit_circuit(c);
  CHECK(text == "qubits 2\nh 0\ncnot 0 1\nmeasure 0 -> m0\nmeasure 1 -> m1\n");
}

TEST_CASE("parse errors carry line numbers") {
  CHECK_THROWS_WITH_AS(parse_circuit("qubits 2\nh 5"),
                       "line 2: line index 5 out of range for 2 qubits", ParseError);
  CHECK_THROWS_AS(parse_circuit("h 0\n"), ParseError);             // missing header
  CHECK_THROWS_AS(parse_circuit("qubits 2\nfrobnicate 0"), ParseError);
  CHECK_THROWS_AS(parse_circuit("qubits 2\ncnot 1 1"), ParseError);
  CHECK_THROWS_AS(parse_circuit("qubits 1\nu 0 1 0 0 0 0 0 2 0"), ParseError);  // non-unitary
  CHECK_THROWS_AS(parse_circuit("qubits 2\ncif m9 1: x 0"), ParseError);  // unknown register
}

TEST_CASE("linear flag admits non-unitary gates") {
  const Circuit c = parse_circuit("qubits 1\nlinear\nu 0 1 0 0 0 0 0 2 0");
  CHECK(c.linear);
  CHECK(validate(c).empty());
}

TEST_CASE("classical control round trip") {
  const std::string text =
      "qubits 2\nmeasure 0 -> m0\ncif m0 1: x 1\n";
  const Circuit c = parse_circuit(text);
  REQUIRE(c.instructions.size() == 2);
  REQUIRE(c.instructions[1].condition.has_value());
  CHECK(c.instructions[1].condition->register_id == "m0");
  CHECK(c.instructions[1].condition->required_bit == 1);
  CHECK(emit_circuit(c) == text);
  CHECK(validate(c).empty());
}

TEST_CASE("input states round trip with 17 significant digits") {
  Circuit c;
  c.n_qubits = 1;
  const Complex a{0.12345678901234567, -0.3};
  const double bn = std::sqrt(1.0 - std::norm(a));
  c.instructions.push_back(Instruction::input_state(0, a, Complex{bn, 0.0}));
  const Circuit back = parse_circuit(emit_circuit(c));
  CHECK(back == c);
}

TEST_CASE("validate flags out-of-range lines") {
  Circuit c;
  c.n_qubits = 3;
  c.instructions.push_back(Instruction::one_qubit(5, gatelib::h()));
  const auto diags = validate(c);
  REQUIRE(diags.size() == 1);
  CHECK(diags[0].find("out of range") != std::string::npos);
}

TEST_CASE("validate flags non-unitary gates unless linear") {
  Circuit c;
  c.n_qubits = 1;
  c.instructions.push_back(Instruction::one_qubit(0, ComplexMatrix(2, 2, {1, 0, 0, 2})));
  CHECK(validate(c).size() == 1);
  c.linear = true;
  CHECK(validate(c).empty());
}

TEST_CASE("validate flags duplicate register writes and bad conditions") {
  Circuit c;
  c.n_qubits = 2;
  c.instructions.push_back(Instruction::measure(0, "m"));
  c.instructions.push_back(Instruction::measure(1, "m"));
  CHECK(validate(c).size() == 1);

  Circuit c2;
  c2.n_qubits = 2;
  c2.instructions.push_back(Instruction::one_qubit(0, gatelib::x(), Condition{"m", 1}));
  c2.instructions.push_back(Instruction::measure(0, "m"));
  CHECK(validate(c2).size() == 1);  // condition precedes the write
}

TEST_CASE("validate enforces input-before-gates") {
  Circuit c;
  c.n_qubits = 1;
  c.instructions.push_back(Instruction::one_qubit(0, gatelib::h()));
  c.instructions.push_back(Instruction::input_state(0, 1.0, 0.0));
  CHECK(validate(c).size() == 1);
}

TEST_CASE("parse/emit round trip is a fixpoint on random circuits") {
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    const int n = 2 + static_cast<int>(seed % 7);
    const Circuit c = testutil::random_gate_circuit(n, 50, seed);
    const std::string text = emit_circuit(c);
    const Circuit once = parse_circuit(text);
    CHECK(once == c);
    const Circuit twice = parse_circuit(emit_circuit(once));
    CHECK(twice == once);
  }
}
