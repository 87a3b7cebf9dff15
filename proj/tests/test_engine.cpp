#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <set>

#include "tnqsim/dense.hpp"
#include "tnqsim/engine.hpp"
#include "tnqsim/errors.hpp"
#include "tnqsim/tensornet.hpp"
#include "test_util.hpp"

using namespace tnqsim;

namespace {

Circuit with_full_measurement(Circuit c) {
  for (int l = 0; l < c.n_qubits; ++l) {
    c.instructions.push_back(Instruction::measure(l, "m" + std::to_string(l)));
  }
  return c;
}

RunConfig config(Backend b, int shots = 0, std::uint64_t seed = 0, bool exact = false) {
  RunConfig cfg;
  cfg.backend = b;
  cfg.shots = shots;
  cfg.seed = seed;
  cfg.exact = exact;
  return cfg;
}

nlohmann::ordered_json strip_timings(nlohmann::ordered_json j) {
  j.erase("timings_seconds");
  return j;
}

}  // namespace

TEST_CASE("Bell exact tables agree across all backends") {
  const Circuit bell = testutil::bell_circuit();
  for (Backend b : {Backend::Dense, Backend::Mps, Backend::Net}) {
    const RunReport r = run(bell, config(b, 0, 0, true));
    REQUIRE(r.exact_probs.has_value());
    CHECK(r.exact_probs->at("00") == doctest::Approx(0.5).epsilon(1e-9));
    CHECK(r.exact_probs->at("11") == doctest::Approx(0.5).epsilon(1e-9));
    CHECK(r.exact_probs->size() == 2);
    CHECK(r.rng_algorithm == std::string(Rng::kAlgorithmId));
  }
}

TEST_CASE("cross-backend exact tables agree on bounded random circuits") {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const int n = 2 + static_cast<int>(seed % 7);
    const Circuit c =
        with_full_measurement(testutil::random_bounded_circuit(n, 16, 2200 + seed));
    const RunReport rd = run(c, config(Backend::Dense, 0, 0, true));
    const RunReport rm = run(c, config(Backend::Mps, 0, 0, true));
    const RunReport rn = run(c, config(Backend::Net, 0, 0, true));
    REQUIRE(rd.exact_probs.has_value());
    REQUIRE(rm.exact_probs.has_value());
    REQUIRE(rn.exact_probs.has_value());
    std::set<std::string> keys;
    for (const auto& [k, p] : *rd.exact_probs) keys.insert(k);
    for (const auto& [k, p] : *rm.exact_probs) keys.insert(k);
    for (const auto& [k, p] : *rn.exact_probs) keys.insert(k);
    for (const std::string& k : keys) {
      const double pd = rd.exact_probs->count(k) ? rd.exact_probs->at(k) : 0.0;
      const double pm = rm.exact_probs->count(k) ? rm.exact_probs->at(k) : 0.0;
      const double pn = rn.exact_probs->count(k) ? rn.exact_probs->at(k) : 0.0;
      CHECK(std::abs(pd - pm) < 1e-9);
      CHECK(std::abs(pd - pn) < 1e-9);
    }
  }
}

TEST_CASE("seeded runs are byte-identical apart from timings") {
  const Circuit c = with_full_measurement(testutil::random_bounded_circuit(4, 10, 31));
  for (Backend b : {Backend::Dense, Backend::Mps, Backend::Net}) {
    const RunReport r1 = run(c, config(b, 20, 99, true));
    const RunReport r2 = run(c, config(b, 20, 99, true));
    CHECK(strip_timings(r1.to_json()).dump() == strip_timings(r2.to_json()).dump());
  }
}

TEST_CASE("sampled registers follow the measure order") {
  const Circuit c = testutil::bell_circuit();
  const RunReport r = run(c, config(Backend::Dense, 5, 7));
  CHECK(r.register_order == std::vector<std::string>{"m0", "m1"});
  for (const std::string& s : r.samples) {
    CHECK(s.size() == 2);
    CHECK((s == "00" || s == "11"));
  }
}

TEST_CASE("adaptive circuits sample on mps and net") {
  const Circuit c = testutil::teleport_circuit(Complex{0.6}, Complex{0.8});
  for (Backend b : {Backend::Mps, Backend::Net, Backend::Dense}) {
    const RunReport r = run(c, config(b, 12, 5));
    CHECK(r.samples.size() == 12);
    for (const std::string& s : r.samples) CHECK(s.size() == 2);
  }
}

TEST_CASE("exact tables reject adaptive circuits uniformly") {
  const Circuit c = testutil::teleport_circuit(Complex{0.6}, Complex{0.8});
  for (Backend b : {Backend::Dense, Backend::Mps, Backend::Net}) {
    CHECK_THROWS_AS(run(c, config(b, 0, 0, true)), ValidationError);
  }
}

TEST_CASE("mps backend rejects linear circuits; net reports their norm") {
  Circuit c;
  c.n_qubits = 2;
  c.linear = true;
  ComplexMatrix half = ComplexMatrix::identity(2);
  half.at(1, 1) = 0.5;
  c.instructions.push_back(Instruction::one_qubit(0, half));
  CHECK_THROWS_AS(run(c, config(Backend::Mps)), ValidationError);

  const RunReport r = run(c, config(Backend::Net));
  REQUIRE(r.norm_squared.has_value());
  CHECK(*r.norm_squared == doctest::Approx(1.0).epsilon(1e-10));  // acts on |0>
}

TEST_CASE("invalid circuits are rejected before simulation") {
  Circuit c;
  c.n_qubits = 2;
  c.instructions.push_back(Instruction::one_qubit(7, gatelib::h()));
  CHECK_THROWS_AS(run(c, config(Backend::Dense)), ValidationError);
}

TEST_CASE("dense qubit cap surfaces the offending quantity") {
  Circuit c;
  c.n_qubits = 15;
  try {
    run(c, config(Backend::Dense, 0, 0, true));
    FAIL("expected CapExceeded");
  } catch (const CapExceeded& e) {
    CHECK(e.quantity == "dense_qubits");
    CHECK(e.required == 15);
  }
}

TEST_CASE("ladder family: D = 2 and chi stays at 4 even at n = 256") {
  const Circuit c = generate_family({Family::Ladder, 256, 0, 0, 11});
  CHECK(validate(c).empty());
  CHECK(d_profile(c, CircuitStage::Raw).d_max == 2);
  RunConfig cfg = config(Backend::Mps);
  cfg.report.chi_trace = true;
  const RunReport r = run(c, cfg);
  CHECK(r.peak_chi <= 4);
  REQUIRE(r.chi_trace.has_value());
  CHECK(r.chi_trace->size() == c.instructions.size());
}

TEST_CASE("ladder(5) has 4 gates and D = 2") {
  const Circuit c = generate_family({Family::Ladder, 5, 0, 0, 3});
  CHECK(two_qubit_gate_count(c) == 4);
  CHECK(d_profile(c, CircuitStage::Raw).d_max == 2);
}

TEST_CASE("crossing layer profile: D_3 = 4 at n = 8") {
  const Circuit c = generate_family({Family::CrossingLayer, 8, 0, 0, 3});
  CHECK(validate(c).empty());
  const DProfile p = d_profile(c, CircuitStage::Raw);
  CHECK(p.per_line[3] == 4);
  CHECK_THROWS_AS(generate_family({Family::CrossingLayer, 7, 0, 0, 3}),
                  std::invalid_argument);
}

TEST_CASE("cluster family: ranges in {1, N} and D = O(N)") {
  const FamilySpec spec{Family::Cluster, 2, 4, 0, 0};  // N = 2 columns, M = 4 rows
  const Circuit c = generate_family(spec);
  CHECK(validate(c).empty());
  CHECK(c.n_qubits == 8);
  for (const Instruction& instr : c.instructions) {
    if (instr.kind == InstructionKind::TwoQubitGate) {
      const int range = std::abs(instr.line - instr.line2);
      CHECK((range == 1 || range == 2));
    }
  }
  const DProfile p = d_profile(reduce(c), CircuitStage::Reduced);
  CHECK(p.d_max <= 3 * 2 + 2);
}

TEST_CASE("random family circuits validate and honor the gate count") {
  const Circuit c = generate_family({Family::Random, 6, 0, 17, 9});
  CHECK(validate(c).empty());
  CHECK(two_qubit_gate_count(c) == 17);
}

TEST_CASE("cross-backend sampled distributions agree on GHZ3") {
  const Circuit ghz = testutil::ghz_circuit(3);
  const int shots = 4000;
  for (Backend b : {Backend::Dense, Backend::Mps, Backend::Net}) {
    const RunReport r = run(ghz, config(b, shots, 123));
    int zeros = 0, ones = 0;
    for (const std::string& s : r.samples) {
      REQUIRE((s == "000" || s == "111"));
      (s == "000" ? zeros : ones) += 1;
    }
    CHECK(std::abs(zeros - shots / 2) < 250);  // ~5 sigma
    CHECK(zeros + ones == shots);
  }
}

TEST_CASE("mps chi never exceeds 4^(lowered D)") {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const Circuit c = testutil::random_gate_circuit(6, 10, 3300 + seed);
    const Circuit lowered = lower_to_adjacent(reduce(c));
    const int d_low = d_profile(lowered, CircuitStage::Lowered).d_max;
    RunConfig cfg = config(Backend::Mps);
    const RunReport r = run(c, cfg);
    CHECK(std::log2(static_cast<double>(r.peak_chi)) <= 2.0 * d_low + 1e-9);
  }
}

TEST_CASE("bench reports per-entry results and cap trips") {
  RunConfig cfg = config(Backend::Mps);
  cfg.caps.max_chi = 16;
  const std::vector<FamilySpec> specs = {
      {Family::Ladder, 16, 0, 0, 1},
      {Family::CrossingLayer, 12, 0, 0, 1},  // chi would reach 2^6 = 64 > 16
  };
  const auto entries = bench(specs, cfg, 2);
  REQUIRE(entries.size() == 2);
  CHECK(entries[0].status == "ok");
  CHECK(entries[0].peak_chi <= 4);
  CHECK(entries[1].status == "cap_exceeded");
  CHECK(entries[1].message.find("chi") != std::string::npos);

  const auto j = bench_to_json(entries);
  CHECK(j["entries"].size() == 2);
  CHECK(j["schema_version"] == std::string(kSchemaVersion));
}

TEST_CASE("empty circuit bench entry is near-zero cost with D = 0") {
  Circuit empty;
  empty.n_qubits = 4;
  // analyze path: D and the cost estimate
  const auto j = analyze_to_json(empty, CircuitStage::Raw);
  CHECK(j["d"] == 0);
  CHECK(j["gate_count"] == 0);
  CHECK(j["cost_estimate"]["bound_exponent"] == 0.0);
}

TEST_CASE("analyze stages report raw vs reduced vs lowered profiles") {
  Circuit c = testutil::bell_circuit(false);
  c.instructions.push_back(Instruction::two_qubit(0, 1, gatelib::cnot()));
  const auto raw = analyze_to_json(c, CircuitStage::Raw);
  const auto red = analyze_to_json(c, CircuitStage::Reduced);
  CHECK(raw["stage"] == "raw");
  CHECK(raw["d"] == 2);       // two CNOTs before fusion
  CHECK(red["d"] == 1);       // fused to one gate
  CHECK(red["gate_count"] == 1);
}

TEST_CASE("run report JSON carries the schema version and rng id") {
  const RunReport r = run(testutil::bell_circuit(), config(Backend::Dense, 3, 1, true));
  const auto j = r.to_json();
  CHECK(j["schema_version"] == std::string(kSchemaVersion));
  CHECK(j["rng_algorithm"] == std::string(Rng::kAlgorithmId));
  CHECK(j["backend"] == "dense");
  CHECK(j["samples"].size() == 3);
}
