#include "rms/scenario.hpp"

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <limits>

namespace rms {

namespace {

using nlohmann::json;

std::vector<double> as_double_vector(const json& j, const std::string& what) {
  if (!j.is_array()) throw ValidationError(what + ": expected an array of numbers");
  std::vector<double> out;
  out.reserve(j.size());
  for (const auto& x : j) {
    if (!x.is_number()) throw ValidationError(what + ": expected an array of numbers");
    out.push_back(x.get<double>());
  }
  return out;
}

std::vector<std::vector<double>> as_matrix(const json& j, const std::string& what) {
  if (!j.is_array() || j.empty()) throw ValidationError(what + ": expected an array of rows");
  std::vector<std::vector<double>> rows;
  rows.reserve(j.size());
  for (const auto& r : j) rows.push_back(as_double_vector(r, what + " row"));
  return rows;
}

std::shared_ptr<const EnvironmentDriver> parse_driver(const json& j) {
  if (!j.is_object() || !j.contains("kind"))
    throw ValidationError("driver: object with a \"kind\" field required");
  std::string kind = j.at("kind").get<std::string>();
  if (kind == "iid") {
    return std::make_shared<EnvironmentDriver>(
        EnvironmentDriver::iid_finite(as_double_vector(j.at("p"), "driver.p")));
  }
  if (kind == "markov") {
    auto P = as_matrix(j.at("P"), "driver.P");
    if (j.contains("pi"))
      return std::make_shared<EnvironmentDriver>(
          EnvironmentDriver::markov_finite(std::move(P), as_double_vector(j.at("pi"), "driver.pi")));
    return std::make_shared<EnvironmentDriver>(EnvironmentDriver::markov_finite(std::move(P)));
  }
  if (kind == "rotation") {
    return std::make_shared<EnvironmentDriver>(EnvironmentDriver::rotation(
        j.at("alpha").get<double>(), j.value("x0", 0.0),
        as_double_vector(j.at("boundaries"), "driver.boundaries")));
  }
  throw ValidationError("driver: kind must be one of iid, markov, rotation");
}

}  // namespace

Scenario parse_scenario(const nlohmann::json& doc) {
  Scenario sc;
  sc.echo = doc;
  sc.name = doc.value("name", std::string("unnamed"));
  if (!doc.contains("A")) throw ValidationError("scenario: missing dispersal matrix \"A\"");
  sc.a = NonnegMatrix::from_rows(as_matrix(doc.at("A"), "A"));
  if (!doc.contains("driver")) throw ValidationError("scenario: missing \"driver\"");
  sc.driver = parse_driver(doc.at("driver"));
  if (doc.at("driver").contains("seed"))
    sc.driver_seed = doc.at("driver").at("seed").get<std::uint64_t>();

  if (!doc.contains("d_table")) throw ValidationError("scenario: missing \"d_table\"");
  sc.d_table = as_matrix(doc.at("d_table"), "d_table");
  if (sc.d_table.size() != sc.driver->state_count())
    throw ValidationError("scenario: d_table must have one row per driver state");
  for (const auto& row : sc.d_table) {
    if (row.size() != sc.a.dim())
      throw ValidationError("scenario: d_table rows must match the matrix dimension");
    DiagonalVector check(row);  // enforces the positive fitness diagonal
  }

  if (doc.contains("defaults")) {
    const json& d = doc.at("defaults");
    sc.defaults.n = d.value("n", sc.defaults.n);
    sc.defaults.num_paths = d.value("num_paths", sc.defaults.num_paths);
    sc.defaults.proof_trace_n = d.value("proof_trace_n", sc.defaults.proof_trace_n);
    sc.defaults.tol_invariance = d.value("tol_invariance", sc.defaults.tol_invariance);
    if (d.contains("epsilons")) sc.defaults.epsilons = as_double_vector(d.at("epsilons"), "epsilons");
    if (d.contains("seed")) sc.defaults.seed = d.at("seed").get<std::uint64_t>();
  }
  if (sc.defaults.n < 1) throw ValidationError("scenario: defaults.n must be >= 1");
  if (sc.defaults.num_paths < 1) throw ValidationError("scenario: defaults.num_paths must be >= 1");
  return sc;
}

Scenario load_scenario(const std::string& file) {
  std::ifstream in(file);
  if (!in) throw ValidationError("scenario: cannot open file " + file);
  json doc;
  try {
    in >> doc;
  } catch (const json::exception& e) {
    throw ValidationError("scenario: invalid JSON in " + file + ": " + e.what());
  }
  try {
    return parse_scenario(doc);
  } catch (const ValidationError& e) {
    throw ValidationError(file + ": " + e.what());
  }
}

RandomMatrixSystem make_system(const Scenario& sc) {
  std::vector<DiagonalVector> table;
  table.reserve(sc.d_table.size());
  for (const auto& row : sc.d_table) table.emplace_back(row);
  return RandomMatrixSystem(sc.a, DiagonalProcess(std::move(table)), sc.driver);
}

std::uint64_t resolve_seed(const Scenario& sc, std::optional<std::uint64_t> flag_seed) {
  if (flag_seed) return *flag_seed;
  if (sc.defaults.seed) return *sc.defaults.seed;
  if (sc.driver_seed) return *sc.driver_seed;
  if (const char* env = std::getenv("RMS_LYAP_DEFAULT_SEED")) {
    char* end = nullptr;
    unsigned long long v = std::strtoull(env, &end, 10);
    if (end && *end == '\0') return static_cast<std::uint64_t>(v);
    throw ValidationError("RMS_LYAP_DEFAULT_SEED: not an integer");
  }
  return 0;
}

namespace {
const char* method_name(EstimatorMethod m) {
  switch (m) {
    case EstimatorMethod::TrajectoryVector:
      return "trajectory-vector";
    case EstimatorMethod::TrajectoryMatrix:
      return "trajectory-matrix";
    case EstimatorMethod::Kingman:
      return "kingman";
  }
  return "unknown";
}
const char* norm_name(MatrixNorm n) {
  return n == MatrixNorm::Frobenius ? "frobenius" : "operator2";
}
}  // namespace

nlohmann::json to_json(const LyapunovEstimate& e) {
  return json{{"value", e.value},   {"method", method_name(e.method)},
              {"n", e.n},           {"samples", e.samples},
              {"stderr", e.stderr_est}, {"seed", e.seed},
              {"norm", norm_name(e.norm)}};
}

nlohmann::json to_json(const SpectralBracket& b) {
  return json{{"lower", b.lower},
              {"upper", b.upper},
              {"iterations", b.iterations},
              {"converged", b.converged}};
}

nlohmann::json to_json(const AveragedSystem& a) {
  return json{{"dbar", a.dbar},
              {"rho_bracket", to_json(a.rho_bracket)},
              {"log_rho", a.log_rho},
              {"log_rho_halfwidth", a.log_rho_halfwidth},
              {"exact", a.exact},
              {"dbar_log_stderr", a.dbar_log_stderr}};
}

nlohmann::json to_json(const TheoremReport& r) {
  return json{{"lambda", to_json(r.lambda)},
              {"averaged", to_json(r.averaged)},
              {"margin", r.margin},
              {"tolerance", r.tolerance},
              {"verdict", verdict_name(r.verdict)},
              {"zero_rho_short_circuit", r.short_circuit_zero_rho}};
}

nlohmann::json to_json(const EpsilonLadder& l) {
  json lambdas = json::array();
  for (const auto& e : l.lambdas) lambdas.push_back(to_json(e));
  return json{{"epsilons", l.epsilons},
              {"lambdas", lambdas},
              {"base", to_json(l.base)},
              {"extrapolated_limit", l.extrapolated_limit},
              {"bracket", json::array({l.bracket_low, l.bracket_high})},
              {"chains_ok", l.chains_ok},
              {"worst_chain_violation", l.worst_chain_violation}};
}

nlohmann::json to_json(const GeneralTheoremReport& r) {
  json per_eps = json::array();
  for (const auto& t : r.per_epsilon) per_eps.push_back(to_json(t));
  return json{{"direct", to_json(r.direct)},
              {"ladder", to_json(r.ladder)},
              {"per_epsilon", per_eps},
              {"routes_agree", r.routes_agree},
              {"diagnostic", r.diagnostic}};
}

nlohmann::json trace_summary_json(const CesaroTrace& t) {
  return json{{"n", t.n},
              {"dim", t.dim},
              {"rho_tilde", t.rho_tilde},
              {"w_tilde", t.w_tilde},
              {"w_hat", t.w_hat},
              {"d_tilde", t.d_tilde},
              {"max_step_identity_error", t.max_step_identity_error},
              {"min_prefix_margin", t.min_prefix_margin},
              {"max_mean_identity_error", t.max_mean_identity_error},
              {"subinvariance_holds", t.subinvariance.holds},
              {"subinvariance_margin", t.subinvariance.margin},
              {"ok", t.ok},
              {"failure", t.failure}};
}

std::string format_g17(double x) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", x);
  return buf;
}

void atomic_write_file(const std::string& path, const std::string& contents) {
  namespace fs = std::filesystem;
  fs::path target(path);
  fs::path tmp = target;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw ValidationError("cannot open for writing: " + tmp.string());
    out << contents;
    if (!out.good()) throw ValidationError("write failed: " + tmp.string());
  }
  fs::rename(tmp, target);
}

std::string trace_csv(const CesaroTrace& t) {
  std::string out = "k,i,w_i,rho,d_i\n";
  for (std::int64_t k = 0; k < t.n; ++k) {
    for (std::size_t i = 0; i < t.dim; ++i) {
      std::size_t uk = static_cast<std::size_t>(k);
      out += std::to_string(k);
      out += ',';
      out += std::to_string(i + 1);
      out += ',';
      out += format_g17(t.w[uk * t.dim + i]);
      out += ',';
      out += format_g17(t.rho[uk]);
      out += ',';
      out += format_g17(t.d[uk * t.dim + i]);
      out += '\n';
    }
  }
  return out;
}

}  // namespace rms
