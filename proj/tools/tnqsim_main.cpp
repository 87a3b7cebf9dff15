// tnqsim command line: analyze / reduce / lower / run / bench over .qc files.
// Exit codes: 0 success, 2 parse or validation error, 3 cap exceeded,
// 4 internal numerical error.

#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "tnqsim/circuit.hpp"
#include "tnqsim/engine.hpp"
#include "tnqsim/errors.hpp"
#include "tnqsim/transform.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitParse = 2;
constexpr int kExitCap = 3;
constexpr int kExitNumerical = 4;

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw tnqsim::ValidationError("cannot open file: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw tnqsim::ValidationError("cannot write file: " + path);
  out << text;
}

tnqsim::Circuit load_circuit(const std::string& path) {
  tnqsim::Circuit c = tnqsim::parse_circuit(read_file(path));
  const auto diags = tnqsim::validate(c);
  if (!diags.empty()) {
    std::string joined;
    for (const auto& d : diags) joined += d + "; ";
    throw tnqsim::ValidationError("invalid circuit: " + joined);
  }
  return c;
}

tnqsim::CircuitStage stage_from_string(const std::string& s) {
  if (s == "raw") return tnqsim::CircuitStage::Raw;
  if (s == "reduced") return tnqsim::CircuitStage::Reduced;
  if (s == "lowered") return tnqsim::CircuitStage::Lowered;
  throw CLI::ValidationError("--stage", "expected raw|reduced|lowered");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Exact quantum circuit simulator with cost governed by the circuit's "
               "per-line 2-qubit gate profile"};
  app.require_subcommand(1);

  // analyze
  std::string analyze_file;
  std::string analyze_stage = "raw";
  auto* analyze = app.add_subcommand("analyze", "Report the D profile and cost estimate");
  analyze->add_option("file", analyze_file, "Input .qc file")->required();
  analyze->add_option("--stage", analyze_stage, "raw|reduced|lowered")
      ->default_val("raw");

  // reduce / lower
  std::string transform_file, transform_out;
  auto* reduce_cmd = app.add_subcommand("reduce", "Write the reduced form of a circuit");
  reduce_cmd->add_option("file", transform_file, "Input .qc file")->required();
  reduce_cmd->add_option("-o,--output", transform_out, "Output .qc file")->required();
  auto* lower_cmd =
      app.add_subcommand("lower", "Rewrite all 2-qubit gates onto adjacent lines");
  lower_cmd->add_option("file", transform_file, "Input .qc file")->required();
  lower_cmd->add_option("-o,--output", transform_out, "Output .qc file")->required();

  // run
  std::string run_file, run_backend = "dense";
  int run_shots = 0;
  std::uint64_t run_seed = 0;
  bool run_exact = false, run_chi_trace = false;
  int cap_chi = tnqsim::Caps{}.max_chi;
  std::size_t cap_frontier = tnqsim::Caps{}.max_frontier;
  int cap_dense = tnqsim::Caps{}.max_dense_qubits;
  auto* run_cmd = app.add_subcommand("run", "Simulate a circuit and emit a JSON report");
  run_cmd->add_option("file", run_file, "Input .qc file")->required();
  run_cmd->add_option("--backend", run_backend, "mps|net|dense")->required();
  run_cmd->add_option("--shots", run_shots, "Number of samples");
  run_cmd->add_option("--seed", run_seed, "RNG seed");
  run_cmd->add_flag("--exact", run_exact, "Emit the exact outcome table");
  run_cmd->add_flag("--chi-trace", run_chi_trace, "Record max bond after each instruction");
  run_cmd->add_option("--max-chi", cap_chi, "Bond dimension cap");
  run_cmd->add_option("--max-frontier", cap_frontier, "Frontier element cap");
  run_cmd->add_option("--max-dense-qubits", cap_dense, "Dense/exact-table qubit cap");

  // bench
  std::string bench_family = "ladder", bench_backend = "mps";
  int bench_n = 8, bench_m = 0, bench_count = 0, bench_repeats = 3;
  std::uint64_t bench_seed = 0;
  auto* bench_cmd = app.add_subcommand("bench", "Time a benchmark family circuit");
  bench_cmd->add_option("--family", bench_family, "ladder|crossing|cluster|random")
      ->required();
  bench_cmd->add_option("--n", bench_n, "Qubit count (cluster: columns N)")->required();
  bench_cmd->add_option("--m", bench_m, "Cluster rows M");
  bench_cmd->add_option("--count", bench_count, "Random family gate count");
  bench_cmd->add_option("--seed", bench_seed, "Family RNG seed");
  bench_cmd->add_option("--backend", bench_backend, "mps|net|dense");
  bench_cmd->add_option("--repeats", bench_repeats, "Timing repetitions (median)");

  CLI11_PARSE(app, argc, argv);

  try {
    if (analyze->parsed()) {
      const tnqsim::Circuit c = load_circuit(analyze_file);
      std::cout << tnqsim::analyze_to_json(c, stage_from_string(analyze_stage)).dump(2)
                << "\n";
      return kExitOk;
    }
    if (reduce_cmd->parsed()) {
      const tnqsim::Circuit c = load_circuit(transform_file);
      write_file(transform_out, tnqsim::emit_circuit(tnqsim::reduce(c)));
      return kExitOk;
    }
    if (lower_cmd->parsed()) {
      const tnqsim::Circuit c = load_circuit(transform_file);
      write_file(transform_out, tnqsim::emit_circuit(tnqsim::lower_to_adjacent(c)));
      return kExitOk;
    }
    if (run_cmd->parsed()) {
      const tnqsim::Circuit c = load_circuit(run_file);
      tnqsim::RunConfig cfg;
      cfg.backend = tnqsim::backend_from_string(run_backend);
      cfg.shots = run_shots;
      cfg.seed = run_seed;
      cfg.exact = run_exact;
      cfg.caps.max_chi = cap_chi;
      cfg.caps.max_frontier = cap_frontier;
      cfg.caps.max_dense_qubits = cap_dense;
      cfg.report.chi_trace = run_chi_trace;
      cfg.report.d_profile = true;
      cfg.report.timing = true;
      std::cout << tnqsim::run(c, cfg).to_json().dump(2) << "\n";
      return kExitOk;
    }
    if (bench_cmd->parsed()) {
      tnqsim::FamilySpec spec;
      spec.family = tnqsim::family_from_string(bench_family);
      spec.n = bench_n;
      spec.m = bench_m;
      spec.gate_count = bench_count;
      spec.seed = bench_seed;
      tnqsim::RunConfig cfg;
      cfg.backend = tnqsim::backend_from_string(bench_backend);
      const auto entries = tnqsim::bench({spec}, cfg, bench_repeats);
      std::cout << tnqsim::bench_to_json(entries).dump(2) << "\n";
      return kExitOk;
    }
  } catch (const tnqsim::ParseError& e) {
    std::cerr << "parse error: " << e.what() << "\n";
    return kExitParse;
  } catch (const tnqsim::ValidationError& e) {
    std::cerr << "validation error: " << e.what() << "\n";
    return kExitParse;
  } catch (const tnqsim::CapExceeded& e) {
    std::cerr << "cap exceeded: " << e.what() << "\n";
    return kExitCap;
  } catch (const tnqsim::NumericalError& e) {
    std::cerr << "numerical error: " << e.what() << "\n";
    return kExitNumerical;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitNumerical;
  }
  return kExitUsage;
}
