// Acceptance suite: one criterion per run entry, one pass/fail line each.
// Every tolerance is pinned here; a red line means the property failed as
// stated, not that a threshold needs tuning.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include "tnqsim/dense.hpp"
#include "tnqsim/engine.hpp"
#include "tnqsim/mps.hpp"
#include "tnqsim/tensornet.hpp"
#include "tnqsim/transform.hpp"
#include "test_util.hpp"

using namespace tnqsim;
using Clock = std::chrono::steady_clock;

namespace {

struct Check {
  bool ok = true;
  std::string first_failure;
  int checks = 0;

  void expect(bool condition, const std::string& message) {
    ++checks;
    if (!condition && ok) {
      ok = false;
      first_failure = message;
    }
  }
  void expect_close(double actual, double expected, double tol, const std::string& what) {
    expect(std::abs(actual - expected) <= tol,
           what + ": got " + std::to_string(actual) + ", want " + std::to_string(expected) +
               " within " + std::to_string(tol));
  }
};

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

// ---------------------------------------------------------------------------
// 1. Backend equivalence on 100 seeded random circuits with full measurement.
void criterion_backend_equivalence(Check& ck) {
  const auto t0 = Clock::now();
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    const int n = 2 + static_cast<int>(seed % 9);  // n in [2, 10]
    const int gate_target = 8 + static_cast<int>((seed * 7) % 33);  // <= 40
    const Circuit c = with_full_measurement(
        testutil::random_bounded_circuit(n, gate_target, 90000 + seed));
    const RunReport rd = run(c, config(Backend::Dense, 0, 0, true));
    const RunReport rm = run(c, config(Backend::Mps, 0, 0, true));
    const RunReport rn = run(c, config(Backend::Net, 0, 0, true));
    for (const auto& [key, pd] : *rd.exact_probs) {
      const double pm = rm.exact_probs->count(key) ? rm.exact_probs->at(key) : 0.0;
      const double pn = rn.exact_probs->count(key) ? rn.exact_probs->at(key) : 0.0;
      ck.expect(std::abs(pd - pm) < 1e-9,
                "mps deviates on outcome " + key + " of circuit " + std::to_string(seed));
      ck.expect(std::abs(pd - pn) < 1e-9,
                "net deviates on outcome " + key + " of circuit " + std::to_string(seed));
    }
    for (const auto& [key, pm] : *rm.exact_probs) {
      ck.expect(rd.exact_probs->count(key) || pm < 1e-9,
                "mps reports an outcome the oracle lacks: " + key);
    }
    for (const auto& [key, pn] : *rn.exact_probs) {
      ck.expect(rd.exact_probs->count(key) || pn < 1e-9,
                "net reports an outcome the oracle lacks: " + key);
    }
  }
  const double elapsed = std::chrono::duration<double>(Clock::now() - t0).count();
  ck.expect(elapsed < 60.0,
            "runtime " + std::to_string(elapsed) + " s exceeds the 60 s budget");
}

// ---------------------------------------------------------------------------
// 2. Reduction and lowering soundness on 50 seeded random circuits.
void criterion_reduction_lowering(Check& ck) {
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    const int n = 2 + static_cast<int>(seed % 5);  // n <= 6
    const Circuit c = testutil::random_gate_circuit(n, 20, 70000 + seed);
    const ComplexMatrix u = overall_unitary(c);

    const Circuit red = reduce(c);
    ck.expect(max_abs_diff(u, overall_unitary(red)) < 1e-10,
              "reduce changed the unitary at seed " + std::to_string(seed));
    ck.expect(reduce(red) == red, "reduce not idempotent at seed " + std::to_string(seed));

    const Circuit low = lower_to_adjacent(c);
    ck.expect(max_abs_diff(u, overall_unitary(low)) < 1e-10,
              "lowering changed the unitary at seed " + std::to_string(seed));

    int expected = 0;
    for (const auto& instr : c.instructions) {
      if (instr.kind == InstructionKind::TwoQubitGate) {
        expected += 2 * std::abs(instr.line - instr.line2) - 1;
      } else {
        expected += 1;
      }
    }
    ck.expect(static_cast<int>(low.instructions.size()) == expected,
              "lowered gate count is not sum of 2r-1 at seed " + std::to_string(seed));
    for (const auto& instr : low.instructions) {
      if (instr.kind == InstructionKind::TwoQubitGate) {
        ck.expect(std::abs(instr.line - instr.line2) == 1, "non-adjacent gate survived");
      }
    }
    const int d = d_profile(c, CircuitStage::Raw).d_max;
    const int d_low = d_profile(low, CircuitStage::Lowered).d_max;
    ck.expect(d_low <= 4 * d, "D' > 4D at seed " + std::to_string(seed));
  }
}

// ---------------------------------------------------------------------------
// 3. Bond-rank laws for gates and measurements, including the tight case.
void criterion_rank_laws(Check& ck) {
  // (a) 1-qubit gates never change any bond dimension.
  for (int trial = 0; trial < 10; ++trial) {
    Rng rng(500 + trial);
    const ComplexVector v = [&] {
      ComplexVector x(64);
      double nsq = 0.0;
      for (auto& e : x.entries) {
        e = Complex{rng.next_gaussian(), rng.next_gaussian()};
        nsq += std::norm(e);
      }
      for (auto& e : x.entries) e /= std::sqrt(nsq);
      return x;
    }();
    MpsState s = MpsState::from_statevector(v);
    const auto before = s.bond_dims();
    s.apply_1q(static_cast<int>(rng.next_unit() * 6), random_unitary(2, rng));
    ck.expect(s.bond_dims() == before, "1-qubit gate changed a bond dimension");
  }

  // (b) adjacent 2-qubit gates change only their own cut, at most 4x.
  for (int trial = 0; trial < 10; ++trial) {
    Rng rng(600 + trial);
    MpsState s = MpsState::from_product(
        std::vector<std::pair<Complex, Complex>>(6, {Complex{1.0}, Complex{0.0}}));
    for (int step = 0; step < 10; ++step) {
      const int left = static_cast<int>(rng.next_unit() * 5);
      const auto before = s.bond_dims();
      s.apply_2q_adjacent(left, random_unitary(4, rng));
      const auto after = s.bond_dims();
      for (int cut = 0; cut < 5; ++cut) {
        if (cut == left) {
          ck.expect(after[cut] <= 4 * before[cut], "adjacent gate grew chi beyond 4x");
        } else {
          ck.expect(after[cut] == before[cut], "adjacent gate changed a spectator cut");
        }
      }
    }
  }

  // (c) measurements never increase any bond dimension.
  for (int trial = 0; trial < 10; ++trial) {
    Rng rng(700 + trial);
    const Circuit c = testutil::random_gate_circuit(6, 14, 71000 + trial);
    MpsState s = MpsState::from_product(
        std::vector<std::pair<Complex, Complex>>(6, {Complex{1.0}, Complex{0.0}}));
    for (const auto& instr : c.instructions) {
      if (instr.kind == InstructionKind::OneQubitGate) {
        s.apply_1q(instr.line, instr.matrix);
      } else {
        s.apply_2q(instr.line, instr.line2, instr.matrix);
      }
    }
    const auto before = s.bond_dims();
    s.measure(static_cast<int>(rng.next_unit() * 6), rng);
    const auto after = s.bond_dims();
    for (int cut = 0; cut < 5; ++cut) {
      ck.expect(after[cut] <= before[cut], "measurement increased a bond dimension");
    }
  }

  // (d) the tight case: swap across the middle of two Bell pairs, 1 -> 4.
  MpsState s = MpsState::from_product(
      std::vector<std::pair<Complex, Complex>>(4, {Complex{1.0}, Complex{0.0}}));
  s.apply_1q(0, gatelib::h());
  s.apply_2q_adjacent(0, gatelib::cnot());
  s.apply_1q(2, gatelib::h());
  s.apply_2q_adjacent(2, gatelib::cnot());
  ck.expect(s.schmidt_rank(1) == 1, "pre-swap middle cut rank is not exactly 1");
  s.apply_2q_adjacent(1, gatelib::swap());
  ck.expect(s.schmidt_rank(1) == 4, "post-swap middle cut rank is not exactly 4");
}

// ---------------------------------------------------------------------------
// 4. Observed chi never exceeds 4^(adjacent gates across the cut).
void criterion_rank_bound(Check& ck) {
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    const int n = 3 + static_cast<int>(seed % 5);  // up to 7 lines
    const Circuit lowered =
        lower_to_adjacent(reduce(testutil::random_gate_circuit(n, 12, 72000 + seed)));
    MpsState s = MpsState::from_product(
        std::vector<std::pair<Complex, Complex>>(n, {Complex{1.0}, Complex{0.0}}));
    std::vector<int> gates_at_cut(n - 1, 0);
    for (const auto& instr : lowered.instructions) {
      if (instr.kind == InstructionKind::OneQubitGate) {
        s.apply_1q(instr.line, instr.matrix);
      } else {
        const int cut = std::min(instr.line, instr.line2);
        gates_at_cut[cut] += 1;
        s.apply_2q(instr.line, instr.line2, instr.matrix);
      }
      const auto dims = s.bond_dims();
      for (int cut = 0; cut < n - 1; ++cut) {
        ck.expect(std::log2(static_cast<double>(dims[cut])) <=
                      2.0 * gates_at_cut[cut] + 1e-12,
                  "chi exceeded 4^G at seed " + std::to_string(seed));
      }
    }
  }
}

// ---------------------------------------------------------------------------
// 5. Ladder scaling: chi <= 4, subquadratic wall-clock, n = 1024 under 10 s.
void criterion_ladder_scaling(Check& ck) {
  const std::vector<int> sizes = {8, 32, 128, 512, 1024};
  const std::vector<int> repeats = {201, 51, 15, 5, 3};
  std::vector<double> times;
  for (std::size_t i = 0; i < sizes.size(); ++i) {
    RunConfig cfg = config(Backend::Mps);
    const auto entries = bench({{Family::Ladder, sizes[i], 0, 0, 4242}}, cfg, repeats[i]);
    ck.expect(entries[0].status == "ok", "ladder bench failed at n=" +
                                             std::to_string(sizes[i]));
    ck.expect(entries[0].peak_chi <= 4,
              "ladder chi " + std::to_string(entries[0].peak_chi) + " exceeds 4");
    times.push_back(entries[0].wall_seconds);
  }
  // n = 1024 completes well under 10 s (measured as the median run).
  ck.expect(times.back() < 10.0, "ladder n=1024 took " + std::to_string(times.back()) +
                                     " s (budget 10 s)");
  // Least-squares slope of log t against log n.
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  const double m = static_cast<double>(sizes.size());
  for (std::size_t i = 0; i < sizes.size(); ++i) {
    const double x = std::log(static_cast<double>(sizes[i]));
    const double y = std::log(std::max(times[i], 1e-9));
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  const double slope = (m * sxy - sx * sy) / (m * sxx - sx * sx);
  ck.expect(slope <= 1.3, "ladder log-log slope " + std::to_string(slope) + " > 1.3");
}

// ---------------------------------------------------------------------------
// 6. Sampling statistics: TVD to the oracle under 0.01 at 2e5 shots.
void criterion_sampling_statistics(Check& ck) {
  const int shots = 200000;
  const std::vector<std::pair<std::string, Circuit>> cases = {
      {"bell", testutil::bell_circuit()},
      {"ghz3", testutil::ghz_circuit(3)},
  };
  for (const auto& [name, circuit] : cases) {
    Circuit gates_only = circuit;
    gates_only.instructions.erase(
        std::remove_if(gates_only.instructions.begin(), gates_only.instructions.end(),
                       [](const Instruction& i) { return i.kind == InstructionKind::Measure; }),
        gates_only.instructions.end());
    std::vector<int> lines;
    for (int l = 0; l < circuit.n_qubits; ++l) lines.push_back(l);
    const auto oracle = full_distribution(gates_only, lines);

    for (Backend b : {Backend::Dense, Backend::Mps, Backend::Net}) {
      const RunReport r = run(circuit, config(b, shots, 20240807));
      std::map<std::string, double> freq;
      for (const std::string& s : r.samples) freq[s] += 1.0 / shots;
      double tvd = 0.0;
      for (const auto& [key, p] : oracle) {
        const double f = freq.count(key) ? freq.at(key) : 0.0;
        tvd += std::abs(p - f);
      }
      for (const auto& [key, f] : freq) {
        if (!oracle.count(key)) tvd += f;
      }
      tvd *= 0.5;
      ck.expect(tvd < 0.01, name + " on " + to_string(b) + ": TVD " + std::to_string(tvd));
    }
  }
}

// ---------------------------------------------------------------------------
// 7. Adaptive teleportation on both backends, every transcript.
void criterion_adaptive_teleportation(Check& ck) {
  Rng rng(777);
  for (int trial = 0; trial < 20; ++trial) {
    Complex alpha{rng.next_gaussian(), rng.next_gaussian()};
    Complex beta{rng.next_gaussian(), rng.next_gaussian()};
    const double inv = 1.0 / std::sqrt(std::norm(alpha) + std::norm(beta));
    alpha *= inv;
    beta *= inv;
    const Circuit c = testutil::teleport_circuit(alpha, beta);
    const Circuit lowered = lower_to_adjacent(reduce(c));
    for (int m0 : {0, 1}) {
      for (int m1 : {0, 1}) {
        // Contraction backend.
        const AdaptiveRun r = run_adaptive_forced(c, {m0, m1});
        ck.expect_close(r.line_probability(2, 0), std::norm(alpha), 1e-9,
                        "net teleport p(0)");
        ck.expect_close(r.line_probability(2, 1), std::norm(beta), 1e-9,
                        "net teleport p(1)");

        // MPS backend, same forced transcript.
        MpsState s = MpsState::from_product({{alpha, beta},
                                             {Complex{1.0}, Complex{0.0}},
                                             {Complex{1.0}, Complex{0.0}}});
        std::map<std::string, int> regs;
        const std::vector<int> forced = {m0, m1};
        std::size_t next_forced = 0;
        for (const auto& instr : lowered.instructions) {
          switch (instr.kind) {
            case InstructionKind::InputState:
              break;
            case InstructionKind::Measure:
              regs[instr.register_id] =
                  s.measure_forced(instr.line, forced[next_forced++]).outcome;
              break;
            default:
              if (instr.condition &&
                  regs[instr.condition->register_id] != instr.condition->required_bit) {
                break;
              }
              if (instr.kind == InstructionKind::OneQubitGate) {
                s.apply_1q(instr.line, instr.matrix);
              } else {
                s.apply_2q(instr.line, instr.line2, instr.matrix);
              }
          }
        }
        const auto [p0, p1] = s.outcome_probabilities(2);
        ck.expect_close(p0, std::norm(alpha), 1e-9, "mps teleport p(0)");
        ck.expect_close(p1, std::norm(beta), 1e-9, "mps teleport p(1)");
      }
    }
  }
}

// ---------------------------------------------------------------------------
// 8. The contraction backend never uses unitarity.
void criterion_linear_contraction(Check& ck) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    Rng rng(73000 + seed);
    const int n = 2 + static_cast<int>(seed % 5);
    Circuit c;
    c.n_qubits = n;
    c.linear = true;
    for (int g = 0; g < 8; ++g) {
      if (rng.next_unit() < 0.4) {
        ComplexMatrix m = testutil::random_matrix(2, 2, rng);
        if (g % 3 == 0) {  // include genuinely singular operators
          m.at(1, 0) = m.at(0, 0);
          m.at(1, 1) = m.at(0, 1);
        }
        c.instructions.push_back(
            Instruction::one_qubit(static_cast<int>(rng.next_unit() * n), m));
      } else {
        const int j = static_cast<int>(rng.next_unit() * n);
        int k = static_cast<int>(rng.next_unit() * (n - 1));
        if (k >= j) ++k;
        c.instructions.push_back(
            Instruction::two_qubit(j, k, testutil::random_matrix(4, 4, rng)));
      }
      for (Complex& e : c.instructions.back().matrix.entries) e *= 0.5;
    }
    std::map<int, ComplexMatrix> insertions;
    if (seed % 2 == 0) insertions.emplace(0, gatelib::projector(static_cast<int>(seed) % 2));

    const Complex v =
        contract_line_by_line(build_doubled_network(lower_to_adjacent(c), insertions));

    StateVector sv = StateVector::initial_state(c);
    for (const auto& instr : c.instructions) sv = apply_gate(sv, instr);
    for (const auto& [line, op] : insertions) {
      sv = apply_gate(sv, Instruction::one_qubit(line, op));
    }
    const double expected = norm_squared(sv.amplitudes);
    ck.expect(std::abs(v.imag()) < 1e-9, "linear contraction imaginary residue");
    ck.expect_close(v.real(), expected, 1e-9 * std::max(1.0, expected),
                    "linear contraction value at seed " + std::to_string(seed));
  }
}

// ---------------------------------------------------------------------------
// 9. Line-by-line contraction equals the exhaustive assignment sum.
void criterion_contraction_oracle(Check& ck) {
  std::vector<Circuit> circuits;
  {
    Circuit c;
    c.n_qubits = 1;
    circuits.push_back(c);
  }
  circuits.push_back(reduce(testutil::bell_circuit(false)));
  {
    Rng rng(81);
    Circuit c;
    c.n_qubits = 2;
    c.instructions.push_back(Instruction::two_qubit(0, 1, random_unitary(4, rng)));
    circuits.push_back(c);
    Circuit c2;
    c2.n_qubits = 3;
    c2.instructions.push_back(Instruction::two_qubit(1, 2, random_unitary(4, rng)));
    circuits.push_back(c2);
    Circuit c3;
    c3.n_qubits = 3;
    c3.instructions.push_back(Instruction::one_qubit(0, random_unitary(2, rng)));
    c3.instructions.push_back(Instruction::two_qubit(0, 1, random_unitary(4, rng)));
    circuits.push_back(c3);
  }
  int verified = 0;
  for (const Circuit& c : circuits) {
    for (int bit : {0, 1}) {
      const DoubledNetwork net =
          build_doubled_network(reduce(c), {{0, gatelib::projector(bit)}});
      if (testutil::total_index_count(net) > 16) continue;
      const Complex fast = contract_line_by_line(net);
      const Complex slow = testutil::exhaustive_contraction(net);
      ck.expect(std::abs(fast - slow) < 1e-10, "contraction deviates from exhaustive sum");
      ++verified;
    }
  }
  ck.expect(verified >= 8, "too few sub-16-index networks were exercised");
}

// ---------------------------------------------------------------------------
// 10. MPS construction fidelity on 50 random states.
void criterion_mps_construction(Check& ck) {
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    Rng rng(74000 + seed);
    const int n = 2 + static_cast<int>(seed % 7);  // n <= 8
    ComplexVector v(std::size_t{1} << n);
    double nsq = 0.0;
    for (auto& e : v.entries) {
      e = Complex{rng.next_gaussian(), rng.next_gaussian()};
      nsq += std::norm(e);
    }
    for (auto& e : v.entries) e /= std::sqrt(nsq);

    const MpsState s = MpsState::from_statevector(v);
    ck.expect(testutil::phase_aligned_diff(v, s.to_statevector()) < 1e-10,
              "round trip deviates at seed " + std::to_string(seed));
    for (int cut = 0; cut < n - 1; ++cut) {
      ck.expect(static_cast<std::size_t>(s.schmidt_rank(cut)) ==
                    testutil::reshape_svd_rank(v, n, cut),
                "bond dimension disagrees with the reshape-SVD rank");
    }
  }
}

struct Criterion {
  int id;
  std::string title;
  std::function<void(Check&)> fn;
};

}  // namespace

int main() {
  const std::vector<Criterion> criteria = {
      {1, "backend equivalence on 100 random circuits (1e-9, < 60 s)",
       criterion_backend_equivalence},
      {2, "reduction/lowering soundness, idempotence, 2r-1, D' <= 4D",
       criterion_reduction_lowering},
      {3, "bond-rank laws for gates and measurements incl. the tight 1 -> 4 case",
       criterion_rank_laws},
      {4, "observed chi bounded by 4^(gates across each cut)", criterion_rank_bound},
      {5, "ladder scaling: chi <= 4, slope <= 1.3, n=1024 < 10 s",
       criterion_ladder_scaling},
      {6, "sampling statistics: TVD < 0.01 at 2e5 shots per backend",
       criterion_sampling_statistics},
      {7, "adaptive teleportation on mps and net backends (1e-9)",
       criterion_adaptive_teleportation},
      {8, "contraction backend on non-unitary circuits (1e-9)",
       criterion_linear_contraction},
      {9, "line-by-line equals the exhaustive sum on <= 16-index networks (1e-10)",
       criterion_contraction_oracle},
      {10, "MPS construction fidelity and Schmidt ranks on 50 states (1e-10)",
       criterion_mps_construction},
  };

  int failures = 0;
  for (const Criterion& c : criteria) {
    Check ck;
    const auto t0 = Clock::now();
    try {
      c.fn(ck);
    } catch (const std::exception& e) {
      ck.expect(false, std::string("unexpected exception: ") + e.what());
    }
    const double secs = std::chrono::duration<double>(Clock::now() - t0).count();
    if (ck.ok) {
      std::printf("[PASS] criterion %2d: %s (%d checks, %.2f s)\n", c.id, c.title.c_str(),
                  ck.checks, secs);
    } else {
      ++failures;
      std::printf("[FAIL] criterion %2d: %s -- %s\n", c.id, c.title.c_str(),
                  ck.first_failure.c_str());
    }
    std::fflush(stdout);
  }
  if (failures > 0) {
    std::printf("%d of %zu criteria failed\n", failures, criteria.size());
    return 1;
  }
  std::printf("all %zu criteria passed\n", criteria.size());
  return 0;
}
