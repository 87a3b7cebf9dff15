#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "tnqsim/circuit.hpp"
#include "tnqsim/transform.hpp"

namespace tnqsim {

inline constexpr const char* kSchemaVersion = "1.0";

enum class Backend { Mps, Net, Dense };

Backend backend_from_string(const std::string& s);
std::string to_string(Backend b);

struct Caps {
  int max_chi = 4096;
  std::size_t max_frontier = std::size_t{1} << 22;
  int max_dense_qubits = 14;
};

struct ReportFlags {
  bool d_profile = false;
  bool chi_trace = false;
  bool timing = false;
};

struct RunConfig {
  Backend backend = Backend::Dense;
  int shots = 0;
  std::uint64_t seed = 0;
  bool exact = false;
  Caps caps;
  ReportFlags report;
};

struct RunReport {
  std::string backend;
  int shots = 0;
  std::uint64_t seed = 0;
  std::string rng_algorithm;
  std::vector<std::string> register_order;
  std::vector<std::string> samples;  // one bitstring per shot, register order
  std::optional<std::map<std::string, double>> exact_probs;
  std::optional<DProfile> d_profile_raw;      // raw circuit (adaptive convention)
  std::optional<DProfile> d_profile_reduced;  // reduced circuit
  std::optional<std::vector<int>> chi_trace;  // mps: max bond after each instruction
  int peak_chi = 0;
  int peak_frontier_indices = 0;
  std::optional<double> norm_squared;  // net backend on `linear` circuits
  std::map<std::string, double> timings_seconds;

  /// Deterministic apart from the timings block.
  nlohmann::ordered_json to_json() const;
};

/// Unified driver: validates, applies the reduce -> lower pipeline where the
/// backend requires it, then simulates. All backends agree in distribution.
RunReport run(const Circuit& c, const RunConfig& cfg);

enum class Family { Ladder, CrossingLayer, Cluster, Random };

Family family_from_string(const std::string& s);
std::string to_string(Family f);

/// Built-in benchmark families. `n` is the qubit count (for Cluster, the
/// column count N with `m` rows, giving m*n qubits). Random uses gate_count
/// seeded gates on uniform line pairs.
struct FamilySpec {
  Family family = Family::Ladder;
  int n = 0;
  int m = 0;           // Cluster rows M
  int gate_count = 0;  // Random
  std::uint64_t seed = 0;
};

Circuit generate_family(const FamilySpec& spec);

struct BenchEntry {
  std::string family;
  int n_qubits = 0;
  int gate_count = 0;
  int d_reduced = 0;
  double wall_seconds = 0.0;
  int peak_chi = 0;
  int peak_frontier_indices = 0;
  std::string status;  // "ok" or "cap_exceeded"
  std::string message;
};

/// Evolution-only timing table for the scaling measurements. Each spec's
/// circuit is generated, transformed, and simulated `repeats` times on the
/// configured backend; the median wall time is reported. Cap violations are
/// reported per entry instead of aborting.
std::vector<BenchEntry> bench(const std::vector<FamilySpec>& specs, const RunConfig& cfg,
                              int repeats = 1);

nlohmann::ordered_json bench_to_json(const std::vector<BenchEntry>& entries);
nlohmann::ordered_json analyze_to_json(const Circuit& c, CircuitStage stage);

}  // namespace tnqsim
