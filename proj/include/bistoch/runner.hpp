#ifndef BISTOCH_RUNNER_HPP
#define BISTOCH_RUNNER_HPP

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "bistoch/json_io.hpp"

namespace bistoch {

inline constexpr const char* kArtifactVersion = "bistoch 0.1.0";

enum class Mode { Exact, Float };

inline std::string to_string(Mode m) { return m == Mode::Exact ? "exact" : "float"; }

// Exit codes shared by the runner and the CLI.
inline constexpr int kExitOk = 0;          // all contracts hold
inline constexpr int kExitContract = 1;    // an asserted identity failed
inline constexpr int kExitInfeasible = 2;  // infeasible or invalid input
inline constexpr int kExitIo = 3;          // file system trouble

struct ExperimentConfig {
  std::string command;  // axioms | coupling | scan-prime | scan-isometry | mixing |
                        // limits | intertwine | corollary1 | chain
  Mode mode = Mode::Exact;
  std::uint64_t seed = 0;

  std::string kernel_path;               // kernel commands; empty -> bundled default
  std::vector<std::string> p;            // coupling marginals, rational/decimal literals

  std::vector<std::string> weights = {"2/5", "3/10", "1/5", "1/10"};  // site weights
  int r = 1;
  int min_block = 4;
  std::string residual_cap = "1/64";
  bool symbolic_mixing = false;  // mixing command: pi-pairing decay scan
                                 // instead of the kernel power report

  int sweep_w = 2;    // W: test-function windows live in [-W, W]
  int sweep_n = 20;   // N: product length / power sweep bound
  int window = 1;     // tail probe half-width
  int size_limit = 12;
  int chain_length = 20000;
  int block = 2;      // entropy block length
  double tol = 1e-9;  // mixing threshold
};

struct ValidationResult {
  std::optional<ExperimentConfig> config;
  std::vector<std::string> errors;

  bool ok() const { return config.has_value() && errors.empty(); }
};

// Fills defaults and checks every guard, naming the offending field.
ValidationResult validate(const Json& raw);

struct ReportDocument {
  Json body;
  int exit_code = kExitOk;
  // (file name, csv text) series referenced from the body
  std::vector<std::pair<std::string, std::string>> series;

  std::string to_string() const { return body.dump(2) + "\n"; }
};

ReportDocument run(const ExperimentConfig& config);

}  // namespace bistoch

#endif  // BISTOCH_RUNNER_HPP
