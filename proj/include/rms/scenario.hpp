#ifndef RMS_SCENARIO_HPP
#define RMS_SCENARIO_HPP

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "rms/averaging.hpp"
#include "rms/cocycle.hpp"
#include "rms/principal.hpp"

namespace rms {

// Tunables bundled with a scenario file; command-line flags override them.
struct ScenarioDefaults {
  std::int64_t n = 100000;
  std::int64_t num_paths = 64;
  std::int64_t proof_trace_n = 10000;
  std::vector<double> epsilons = {1e-1, 1e-2, 1e-3, 1e-4};
  std::optional<std::uint64_t> seed;
  double tol_invariance = 1e-8;
};

// A fully validated experiment description: dispersal matrix, per-state
// fitness table, driver, defaults. Loading re-runs every module-level
// validation and reports the failed invariant by name.
struct Scenario {
  std::string name;
  NonnegMatrix a{1};
  std::vector<std::vector<double>> d_table;
  std::shared_ptr<const EnvironmentDriver> driver;
  ScenarioDefaults defaults;
  std::optional<std::uint64_t> driver_seed;
  nlohmann::json echo;  // the document as loaded, for result bundles
};

Scenario parse_scenario(const nlohmann::json& doc);
Scenario load_scenario(const std::string& file);
RandomMatrixSystem make_system(const Scenario& sc);

// Seed precedence: explicit flag, scenario defaults, driver-level seed,
// RMS_LYAP_DEFAULT_SEED, and finally 0.
std::uint64_t resolve_seed(const Scenario& sc, std::optional<std::uint64_t> flag_seed);

// JSON renderings of result types (schema consumed by tests and tools).
nlohmann::json to_json(const LyapunovEstimate& e);
nlohmann::json to_json(const SpectralBracket& b);
nlohmann::json to_json(const AveragedSystem& a);
nlohmann::json to_json(const TheoremReport& r);
nlohmann::json to_json(const EpsilonLadder& l);
nlohmann::json to_json(const GeneralTheoremReport& r);
nlohmann::json trace_summary_json(const CesaroTrace& t);

// 17-significant-digit decimal rendering used by every CSV emitter.
std::string format_g17(double x);

// Write-to-temp-then-rename so failures cannot leave partial files.
void atomic_write_file(const std::string& path, const std::string& contents);

std::string trace_csv(const CesaroTrace& t);

}  // namespace rms

#endif  // RMS_SCENARIO_HPP
