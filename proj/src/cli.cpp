#include "rms/cli.hpp"

#include <algorithm>
#include <chrono>
#include <ctime>
#include <filesystem>
#include <iostream>
#include <sstream>

#include "rms/parallel.hpp"
#include "rms/scenario.hpp"

namespace rms {

namespace {

using nlohmann::json;

std::string iso_timestamp() {
  auto now = std::chrono::system_clock::now();
  std::time_t t = std::chrono::system_clock::to_time_t(now);
  char buf[32];
  std::tm tm{};
  gmtime_r(&t, &tm);
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

MatrixNorm parse_norm(const std::optional<std::string>& s) {
  if (!s || *s == "frobenius") return MatrixNorm::Frobenius;
  if (*s == "operator2") return MatrixNorm::Operator2;
  throw ValidationError("--norm must be frobenius or operator2");
}

TrajectoryMode parse_mode(const std::optional<std::string>& s) {
  if (!s || *s == "matrix") return TrajectoryMode::Matrix;
  if (*s == "vector") return TrajectoryMode::Vector;
  throw ValidationError("--mode must be vector or matrix");
}

json bundle_skeleton(const char* command, const Scenario& sc, std::uint64_t seed) {
  return json{{"artifact_version", "0.1.0"},
              {"command", command},
              {"scenario", sc.echo},
              {"seed", seed},
              {"params", json::object()},
              {"results", json::object()}};
}

void finish_bundle(json& bundle, double wall_sec, const std::string& out_path,
                   json* bundle_out) {
  // Both fields that vary run-to-run live under "timing" so byte-level
  // reproducibility is checkable by dropping that one key.
  bundle["timing"] = json{{"timestamp", iso_timestamp()}, {"wall_clock_sec", wall_sec}};
  if (bundle_out) *bundle_out = bundle;
  std::string text = bundle.dump(2);
  text += '\n';
  if (out_path.empty())
    std::cout << text;
  else
    atomic_write_file(out_path, text);
}

const char* driver_kind_name(DriverKind k) {
  switch (k) {
    case DriverKind::IidFinite:
      return "iid";
    case DriverKind::MarkovFinite:
      return "markov";
    case DriverKind::Rotation:
      return "rotation";
  }
  return "unknown";
}

struct Timer {
  std::chrono::steady_clock::time_point start = std::chrono::steady_clock::now();
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  }
};

}  // namespace

int cmd_estimate(const std::string& scenario_file, const CliOptions& opt, std::ostream& err,
                 json* bundle_out) {
  Timer timer;
  try {
    Scenario sc = load_scenario(scenario_file);
    RandomMatrixSystem sys = make_system(sc);
    std::uint64_t seed = resolve_seed(sc, opt.seed);
    std::int64_t n = opt.n.value_or(sc.defaults.n);
    std::int64_t num_paths = opt.num_paths.value_or(sc.defaults.num_paths);
    MatrixNorm norm = parse_norm(opt.norm);
    TrajectoryMode mode = parse_mode(opt.mode);

    LyapunovEstimate est = estimate_lyapunov_trajectory(sys, n, seed, mode, norm);

    // Kingman upper bounds for cross-checking: exact where enumeration is
    // feasible, otherwise sampled.
    json kingman = json::array();
    bool consistent = true;
    for (std::int64_t kn : {1, 2, 4, 8}) {
      if (kingman_exact_feasible(sys, kn)) {
        LyapunovEstimate kb = kingman_exact(sys, kn, norm);
        if (est.value > kb.value + 3.0 * est.stderr_est) consistent = false;
        kingman.push_back(to_json(kb));
      }
    }
    if (kingman.empty()) {
      LyapunovEstimate kb = estimate_kingman_bound(sys, std::min<std::int64_t>(n, 32), num_paths,
                                                   seed, norm);
      if (est.value > kb.value + 3.0 * (est.stderr_est + kb.stderr_est)) consistent = false;
      kingman.push_back(to_json(kb));
    }

    json bundle = bundle_skeleton("estimate", sc, seed);
    bundle["params"] = json{{"n", n},
                            {"num_paths", num_paths},
                            {"mode", mode == TrajectoryMode::Matrix ? "matrix" : "vector"},
                            {"norm", norm == MatrixNorm::Frobenius ? "frobenius" : "operator2"}};
    bundle["results"] = json{{"lyapunov", to_json(est)},
                             {"kingman", kingman},
                             {"kingman_consistent", consistent}};

    if (!opt.csv.empty()) {
      TrajectorySeries series = trajectory_series(sys, n, seed, mode, norm);
      std::string csv = "n,lambda_running\n";
      for (std::size_t i = 0; i < series.ns.size(); ++i) {
        csv += std::to_string(series.ns[i]);
        csv += ',';
        csv += format_g17(series.running[i]);
        csv += '\n';
      }
      atomic_write_file(opt.csv, csv);
    }

    finish_bundle(bundle, timer.seconds(), opt.out, bundle_out);
    return kExitOk;
  } catch (const NotConvergedError& e) {
    err << "estimate: " << e.what() << "\n";
    return kExitNotConverged;
  } catch (const ValidationError& e) {
    err << "estimate: " << e.what() << "\n";
    return kExitValidation;
  }
}

int cmd_theorem(const std::string& scenario_file, const CliOptions& opt, std::ostream& err,
                json* bundle_out) {
  Timer timer;
  try {
    Scenario sc = load_scenario(scenario_file);
    RandomMatrixSystem sys = make_system(sc);
    std::uint64_t seed = resolve_seed(sc, opt.seed);
    std::int64_t n = opt.n.value_or(opt.budget.value_or(sc.defaults.n));
    std::vector<double> epsilons = opt.epsilons.empty() ? sc.defaults.epsilons : opt.epsilons;

    json bundle = bundle_skeleton("theorem", sc, seed);
    bundle["params"] = json{{"n", n}, {"epsilons", epsilons}};

    bool violated = false;
    if (classify(sys.a()) == MatrixClass::Positive) {
      TheoremReport rep = check_main_theorem(sys, n, seed);
      bundle["results"] = json{{"theorem", to_json(rep)}};
      violated = rep.verdict == Verdict::ViolatedBeyondTolerance;
      err << "margin " << rep.margin << " (tolerance " << rep.tolerance << "): "
          << verdict_name(rep.verdict) << "\n";
    } else {
      GeneralTheoremReport rep = check_main_theorem_general(sys, epsilons, n, seed);
      bundle["results"] = json{{"theorem_general", to_json(rep)}};
      violated = rep.direct.verdict == Verdict::ViolatedBeyondTolerance || !rep.routes_agree;
      err << "margin " << rep.direct.margin << " (tolerance " << rep.direct.tolerance
          << "): " << verdict_name(rep.direct.verdict)
          << (rep.routes_agree ? "" : " [route disagreement]") << "\n";
    }

    finish_bundle(bundle, timer.seconds(), opt.out, bundle_out);
    return violated ? kExitTheoremViolated : kExitOk;
  } catch (const NotConvergedError& e) {
    err << "theorem: " << e.what() << "\n";
    return kExitNotConverged;
  } catch (const ValidationError& e) {
    err << "theorem: " << e.what() << "\n";
    return kExitValidation;
  }
}

int cmd_proof_trace(const std::string& scenario_file, const CliOptions& opt, std::ostream& err,
                    json* bundle_out) {
  Timer timer;
  try {
    Scenario sc = load_scenario(scenario_file);
    RandomMatrixSystem sys = make_system(sc);
    std::uint64_t seed = resolve_seed(sc, opt.seed);
    std::int64_t n = opt.n.value_or(sc.defaults.proof_trace_n);

    PrincipalOptions popts;
    popts.tol = sc.defaults.tol_invariance;
    if (opt.depth) popts.min_depth = *opt.depth;

    EnvPath path = sys.path(seed);
    CesaroTrace trace = cesaro_proof_trace(sys, path, n, popts);

    json bundle = bundle_skeleton("proof-trace", sc, seed);
    bundle["params"] = json{{"n", n}, {"tol_invariance", popts.tol}};
    bundle["results"] = json{{"trace", trace_summary_json(trace)}};
    if (!opt.csv.empty()) atomic_write_file(opt.csv, trace_csv(trace));
    finish_bundle(bundle, timer.seconds(), opt.out, bundle_out);
    if (!trace.ok) {
      err << "proof-trace: " << trace.failure << "\n";
      return kExitTheoremViolated;
    }
    return kExitOk;
  } catch (const NotConvergedError& e) {
    err << "proof-trace: " << e.what() << "\n";
    return kExitNotConverged;
  } catch (const ValidationError& e) {
    err << "proof-trace: " << e.what() << "\n";
    return kExitValidation;
  }
}

int cmd_suite(const std::string& scenario_dir, const CliOptions& opt, std::ostream& err,
              std::string* csv_out) {
  namespace fs = std::filesystem;
  Timer timer;
  std::vector<std::string> files;
  try {
    for (const auto& entry : fs::directory_iterator(scenario_dir))
      if (entry.is_regular_file() && entry.path().extension() == ".json")
        files.push_back(entry.path().string());
  } catch (const fs::filesystem_error& e) {
    err << "suite: " << e.what() << "\n";
    return kExitValidation;
  }
  std::sort(files.begin(), files.end());
  if (files.empty()) {
    err << "suite: no scenario files in " << scenario_dir << "\n";
    return kExitValidation;
  }

  struct Row {
    std::string csv;
    std::string error;
    bool violated = false;
  };
  std::vector<Row> rows(files.size());

  parallel_for(static_cast<std::int64_t>(files.size()), opt.jobs, [&](std::int64_t idx) {
    Row& row = rows[static_cast<std::size_t>(idx)];
    const std::string& file = files[static_cast<std::size_t>(idx)];
    try {
      Scenario sc = load_scenario(file);
      RandomMatrixSystem sys = make_system(sc);
      std::uint64_t seed = resolve_seed(sc, opt.seed);
      std::int64_t n = opt.n.value_or(sc.defaults.n);
      TheoremReport rep = check_main_theorem(sys, n, seed);

      std::string id = fs::path(file).stem().string();
      std::ostringstream line;
      line << id << ',' << sys.dim() << ',' << driver_kind_name(sys.driver().kind()) << ','
           << format_g17(rep.lambda.value) << ',' << format_g17(rep.lambda.stderr_est) << ','
           << format_g17(rep.averaged.log_rho) << ',' << format_g17(rep.margin) << ','
           << verdict_name(rep.verdict) << ',' << seed << '\n';
      row.csv = line.str();
      row.violated = rep.verdict == Verdict::ViolatedBeyondTolerance;
    } catch (const std::exception& e) {
      row.error = std::string(fs::path(file).stem().string()) + ": " + e.what();
    }
  });

  std::string csv = "scenario_id,N,driver_kind,lambda,stderr,log_rho_avg,margin,verdict,seed\n";
  bool any_violation = false;
  bool any_error = false;
  for (const auto& row : rows) {
    if (!row.error.empty()) {
      any_error = true;
      err << "suite: " << row.error << "\n";
      continue;
    }
    csv += row.csv;
    any_violation = any_violation || row.violated;
  }
  if (csv_out) *csv_out = csv;
  if (!opt.csv.empty())
    atomic_write_file(opt.csv, csv);
  else if (!csv_out)
    std::cout << csv;
  err << "suite: " << files.size() << " scenarios in " << format_g17(timer.seconds()) << "s\n";

  if (any_violation) return kExitTheoremViolated;
  if (any_error) return kExitValidation;
  return kExitOk;
}

}  // namespace rms
