#ifndef RMS_CLI_HPP
#define RMS_CLI_HPP

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

namespace rms {

// Exit codes shared by all subcommands.
//   0 success, 2 validation failure, 3 non-convergence,
//   4 theorem violation / proof-trace violation / route disagreement.
inline constexpr int kExitOk = 0;
inline constexpr int kExitValidation = 2;
inline constexpr int kExitNotConverged = 3;
inline constexpr int kExitTheoremViolated = 4;

struct CliOptions {
  std::optional<std::int64_t> n;
  std::optional<std::int64_t> num_paths;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> mode;  // vector | matrix
  std::optional<std::string> norm;  // frobenius | operator2
  std::vector<double> epsilons;     // empty: scenario defaults
  std::optional<std::int64_t> budget;
  std::optional<std::int64_t> depth;
  std::string out;  // bundle JSON path; empty writes to stdout
  std::string csv;  // optional CSV path
  int jobs = 1;
};

// Each command returns its exit code; diagnostics go to `err`, the result
// bundle to --out (or stdout) and optionally to *bundle_out for in-process
// callers (tests).
int cmd_estimate(const std::string& scenario_file, const CliOptions& opt, std::ostream& err,
                 nlohmann::json* bundle_out = nullptr);
int cmd_theorem(const std::string& scenario_file, const CliOptions& opt, std::ostream& err,
                nlohmann::json* bundle_out = nullptr);
int cmd_proof_trace(const std::string& scenario_file, const CliOptions& opt, std::ostream& err,
                    nlohmann::json* bundle_out = nullptr);
int cmd_suite(const std::string& scenario_dir, const CliOptions& opt, std::ostream& err,
              std::string* csv_out = nullptr);

}  // namespace rms

#endif  // RMS_CLI_HPP
