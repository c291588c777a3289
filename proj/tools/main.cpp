// tdoacal command line: solve TDOA self-calibration instances, generate
// synthetic networks, and run the benchmark studies. JSON in, JSON/CSV out.
//
// Exit codes: 0 success, 1 solver produced no candidate, 2 input error.

#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "tdoacal/bench.hpp"
#include "tdoacal/solvers.hpp"

namespace {

using nlohmann::ordered_json;

class InputError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

tdoacal::PseudorangeMatrix read_pseudoranges(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open input file: " + path);
  ordered_json j;
  try {
    in >> j;
  } catch (const std::exception& e) {
    throw InputError("malformed JSON in " + path + ": " + e.what());
  }
  if (!j.contains("m") || !j.contains("n") || !j.contains("pseudoranges"))
    throw InputError(path + ": expected fields m, n, pseudoranges");
  const int m = j["m"].get<int>();
  const int n = j["n"].get<int>();
  if (m < 1 || n < 1) throw InputError(path + ": m and n must be positive");
  const auto& rows = j["pseudoranges"];
  if (!rows.is_array() || static_cast<int>(rows.size()) != m)
    throw InputError(path + ": pseudoranges must hold m rows");
  Eigen::MatrixXd f(m, n);
  for (int i = 0; i < m; ++i) {
    const auto& row = rows[i];
    if (!row.is_array() || static_cast<int>(row.size()) != n)
      throw InputError(path + ": pseudorange row " + std::to_string(i) +
                       " must hold n values");
    for (int k = 0; k < n; ++k) {
      f(i, k) = row[k].get<double>();
      if (!std::isfinite(f(i, k)))
        throw InputError(path + ": pseudoranges must be finite");
    }
  }
  return tdoacal::PseudorangeMatrix(std::move(f));
}

ordered_json points_json(const Eigen::MatrixX2d& pts) {
  ordered_json arr = ordered_json::array();
  for (int i = 0; i < pts.rows(); ++i) arr.push_back({pts(i, 0), pts(i, 1)});
  return arr;
}

ordered_json offsets_json(const Eigen::VectorXd& o) {
  ordered_json arr = ordered_json::array();
  for (int j = 0; j < o.size(); ++j) arr.push_back(o[j]);
  return arr;
}

ordered_json calibration_json(const tdoacal::Calibration& c) {
  ordered_json j;
  j["receivers"] = points_json(c.receivers);
  j["transmitters"] = points_json(c.transmitters);
  j["offsets"] = offsets_json(c.offsets);
  j["residual"] = c.primal_residual;
  return j;
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path);
  if (!out) throw InputError("cannot open output file: " + path);
  out << content;
}

tdoacal::SolverKind parse_kind(const std::string& name) {
  const auto kind = tdoacal::solver_kind_from_name(name);
  if (!kind)
    throw InputError("unknown solver config '" + name +
                     "' (expected one of 6r3s, 7r3s, 6r4s, 5r4s, 5r5s)");
  return *kind;
}

void write_report(const tdoacal::BenchReport& report, const std::vector<std::string>& outs) {
  for (const std::string& path : outs) {
    if (path.ends_with(".csv")) {
      write_file(path, report.to_csv());
    } else if (path.ends_with(".json")) {
      write_file(path, report.to_json());
    } else {
      throw InputError("output path must end in .json or .csv: " + path);
    }
  }
}

int run_solve(const std::string& config, const std::string& in_path,
              const std::string& out_path, double threshold, std::uint64_t seed,
              bool all_candidates) {
  const tdoacal::SolverKind kind = parse_kind(config);
  const tdoacal::PseudorangeMatrix pr = read_pseudoranges(in_path);
  const auto [m, n] = tdoacal::solver_dimensions(kind);
  if (pr.m() != m || pr.n() != n)
    throw InputError("config " + config + " expects a " + std::to_string(m) + "x" +
                     std::to_string(n) + " matrix, got " + std::to_string(pr.m()) + "x" +
                     std::to_string(pr.n()));

  tdoacal::SolverConfig cfg;
  cfg.kind = kind;
  cfg.residual_threshold = threshold;
  cfg.track_options.seed = seed;
  const tdoacal::SolveOutcome outcome = tdoacal::solve(pr, cfg);

  if (!outcome.best) {
    std::cerr << "no feasible candidate (paths=" << outcome.diagnostics.paths_tracked
              << " converged=" << outcome.diagnostics.converged
              << " real=" << outcome.diagnostics.real << ")\n";
    return 1;
  }

  ordered_json j = calibration_json(*outcome.best);
  j["candidates_considered"] = outcome.diagnostics.real;
  if (all_candidates) {
    ordered_json arr = ordered_json::array();
    for (const tdoacal::Calibration& c : outcome.candidates) arr.push_back(calibration_json(c));
    j["candidates"] = std::move(arr);
  }
  write_file(out_path, j.dump(2) + "\n");
  return 0;
}

int run_generate(int m, int n, std::uint64_t seed, const std::string& out_path,
                 const std::string& truth_path, double noise_sigma, std::uint64_t noise_seed,
                 double position_sigma, double offset_sigma) {
  tdoacal::InstanceSpec spec;
  spec.m = m;
  spec.n = n;
  spec.seed = seed;
  spec.position_sigma = position_sigma;
  spec.offset_sigma = offset_sigma;
  auto [gt, pr] = tdoacal::generate_instance(spec);
  if (noise_sigma > 0.0) pr = tdoacal::add_noise(pr, {noise_sigma, noise_seed});

  ordered_json j;
  j["m"] = m;
  j["n"] = n;
  ordered_json rows = ordered_json::array();
  for (int i = 0; i < m; ++i) {
    ordered_json row = ordered_json::array();
    for (int k = 0; k < n; ++k) row.push_back(pr.f(i, k));
    rows.push_back(std::move(row));
  }
  j["pseudoranges"] = std::move(rows);
  write_file(out_path, j.dump(2) + "\n");

  if (!truth_path.empty()) {
    ordered_json t;
    t["receivers"] = points_json(gt.receivers);
    t["transmitters"] = points_json(gt.transmitters);
    t["offsets"] = offsets_json(gt.offsets);
    write_file(truth_path, t.dump(2) + "\n");
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"2D TDOA sensor-network self-calibration via homotopy continuation"};
  app.require_subcommand(1);

  // solve
  auto* solve_cmd = app.add_subcommand("solve", "solve a pseudorange instance");
  std::string solve_config, solve_in, solve_out;
  double solve_threshold = 1e-10;
  std::uint64_t solve_seed = 0;
  bool all_candidates = false;
  solve_cmd->add_option("--config", solve_config, "solver configuration (e.g. 6r3s)")
      ->required();
  solve_cmd->add_option("--in", solve_in, "pseudorange JSON input")->required();
  solve_cmd->add_option("--out", solve_out, "calibration JSON output")->required();
  solve_cmd->add_option("--threshold", solve_threshold, "primal residual threshold");
  solve_cmd->add_option("--seed", solve_seed, "path-tracking seed");
  solve_cmd->add_flag("--all-candidates", all_candidates,
                      "include every feasible candidate in the output");

  // generate
  auto* gen_cmd = app.add_subcommand("generate", "generate a synthetic instance");
  int gen_m = 6, gen_n = 3;
  std::uint64_t gen_seed = 0, gen_noise_seed = 0;
  std::string gen_out, gen_truth;
  double gen_noise_sigma = 0.0, gen_pos_sigma = 1.0, gen_off_sigma = 1.0;
  gen_cmd->add_option("--m", gen_m, "number of receivers")->required();
  gen_cmd->add_option("--n", gen_n, "number of transmitters")->required();
  gen_cmd->add_option("--seed", gen_seed, "instance seed");
  gen_cmd->add_option("--out", gen_out, "pseudorange JSON output")->required();
  gen_cmd->add_option("--truth", gen_truth, "optional ground-truth JSON output");
  gen_cmd->add_option("--noise-sigma", gen_noise_sigma, "additive Gaussian noise std");
  gen_cmd->add_option("--noise-seed", gen_noise_seed, "noise seed");
  gen_cmd->add_option("--position-sigma", gen_pos_sigma, "node position std");
  gen_cmd->add_option("--offset-sigma", gen_off_sigma, "offset std");

  // count-study
  auto* count_cmd = app.add_subcommand("count-study", "6r3s solution-count study");
  int count_trials = 100;
  std::uint64_t count_seed = 0;
  std::vector<std::string> count_outs;
  count_cmd->add_option("--trials", count_trials, "number of random instances")->required();
  count_cmd->add_option("--seed", count_seed, "study seed");
  count_cmd->add_option("--out", count_outs, "report path(s), .json and/or .csv")
      ->required()
      ->expected(-1);

  // noise-sweep
  auto* sweep_cmd = app.add_subcommand("noise-sweep", "median error vs noise level");
  std::string sweep_config;
  std::vector<double> sweep_sigmas = {1e-6, 1e-5, 1e-4, 1e-3, 1e-2};
  int sweep_trials = 100;
  std::uint64_t sweep_seed = 0;
  std::vector<std::string> sweep_outs;
  sweep_cmd->add_option("--config", sweep_config, "solver configuration")->required();
  sweep_cmd->add_option("--sigmas", sweep_sigmas, "comma-separated noise levels")
      ->delimiter(',');
  sweep_cmd->add_option("--trials", sweep_trials, "trials per noise level")->required();
  sweep_cmd->add_option("--seed", sweep_seed, "study seed");
  sweep_cmd->add_option("--out", sweep_outs, "report path(s), .json and/or .csv")
      ->required()
      ->expected(-1);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 2;
  }

  try {
    if (solve_cmd->parsed()) {
      return run_solve(solve_config, solve_in, solve_out, solve_threshold, solve_seed,
                       all_candidates);
    }
    if (gen_cmd->parsed()) {
      return run_generate(gen_m, gen_n, gen_seed, gen_out, gen_truth, gen_noise_sigma,
                          gen_noise_seed, gen_pos_sigma, gen_off_sigma);
    }
    if (count_cmd->parsed()) {
      write_report(tdoacal::run_solution_count_study(count_trials, count_seed), count_outs);
      return 0;
    }
    if (sweep_cmd->parsed()) {
      write_report(tdoacal::run_noise_sweep(parse_kind(sweep_config), sweep_sigmas,
                                            sweep_trials, sweep_seed),
                   sweep_outs);
      return 0;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 2;
}
