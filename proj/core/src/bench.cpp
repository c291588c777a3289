#include "tdoacal/bench.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include <Eigen/SVD>

#include <json.hpp>

namespace tdoacal {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

std::uint64_t derive_seed(std::uint64_t base, std::uint64_t stream, std::uint64_t index) {
  return splitmix64(splitmix64(splitmix64(base) ^ stream) ^ index);
}

double median(std::vector<double> values) {
  if (values.empty()) return std::numeric_limits<double>::quiet_NaN();
  std::sort(values.begin(), values.end());
  const std::size_t k = values.size() / 2;
  if (values.size() % 2 == 1) return values[k];
  return 0.5 * (values[k - 1] + values[k]);
}

std::pair<double, double> mean_std(const std::vector<int>& values) {
  if (values.empty()) return {0.0, 0.0};
  double mean = 0.0;
  for (int v : values) mean += v;
  mean /= static_cast<double>(values.size());
  double var = 0.0;
  for (int v : values) var += (v - mean) * (v - mean);
  var /= static_cast<double>(values.size());
  return {mean, std::sqrt(var)};
}

Eigen::MatrixX2d stack_nodes(const Eigen::MatrixX2d& receivers,
                             const Eigen::MatrixX2d& transmitters) {
  Eigen::MatrixX2d out(receivers.rows() + transmitters.rows(), 2);
  out.topRows(receivers.rows()) = receivers;
  out.bottomRows(transmitters.rows()) = transmitters;
  return out;
}

std::string distribution_label(const InstanceSpec& spec) {
  return "gaussian(position_sigma=" + std::to_string(spec.position_sigma) +
         ", offset_sigma=" + std::to_string(spec.offset_sigma) + ")";
}

}  // namespace

std::pair<NetworkGroundTruth, PseudorangeMatrix> generate_instance(const InstanceSpec& spec) {
  if (spec.m < 1 || spec.n < 1)
    throw std::invalid_argument("generate_instance: m, n must be >= 1");
  if (!(spec.position_sigma > 0.0) || !(spec.offset_sigma > 0.0))
    throw std::invalid_argument("generate_instance: sigmas must be positive");

  std::mt19937_64 rng(spec.seed);
  std::normal_distribution<double> pos(0.0, spec.position_sigma);
  std::normal_distribution<double> off(0.0, spec.offset_sigma);

  NetworkGroundTruth gt;
  gt.receivers.resize(spec.m, 2);
  for (int i = 0; i < spec.m; ++i) {
    gt.receivers(i, 0) = pos(rng);
    gt.receivers(i, 1) = pos(rng);
  }
  gt.transmitters.resize(spec.n, 2);
  for (int j = 0; j < spec.n; ++j) {
    gt.transmitters(j, 0) = pos(rng);
    gt.transmitters(j, 1) = pos(rng);
  }
  gt.offsets.resize(spec.n);
  for (int j = 0; j < spec.n; ++j) gt.offsets[j] = off(rng);

  PseudorangeMatrix pr = gt.pseudoranges();
  return {std::move(gt), std::move(pr)};
}

PseudorangeMatrix add_noise(const PseudorangeMatrix& pr, const NoiseSpec& ns) {
  if (ns.sigma < 0.0) throw std::invalid_argument("add_noise: sigma must be >= 0");
  PseudorangeMatrix out = pr;
  if (ns.sigma == 0.0) return out;
  std::mt19937_64 rng(ns.seed);
  std::normal_distribution<double> noise(0.0, ns.sigma);
  for (int i = 0; i < out.m(); ++i)
    for (int j = 0; j < out.n(); ++j) out.f(i, j) += noise(rng);
  return out;
}

Calibration align(const Calibration& est, const NetworkGroundTruth& gt) {
  if (est.m() != gt.m() || est.n() != gt.n())
    throw std::invalid_argument("align: calibration and ground truth disagree on size");

  const Eigen::MatrixX2d P = stack_nodes(est.receivers, est.transmitters);
  const Eigen::MatrixX2d Q = stack_nodes(gt.receivers, gt.transmitters);
  const Eigen::RowVector2d p_bar = P.colwise().mean();
  const Eigen::RowVector2d q_bar = Q.colwise().mean();

  const Mat2 M = (Q.rowwise() - q_bar).transpose() * (P.rowwise() - p_bar);
  Eigen::JacobiSVD<Mat2> svd(M, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const Mat2 R = svd.matrixU() * svd.matrixV().transpose();
  const Eigen::RowVector2d t = q_bar - p_bar * R.transpose();

  Calibration out = est;
  out.receivers = (est.receivers * R.transpose()).rowwise() + t;
  out.transmitters = (est.transmitters * R.transpose()).rowwise() + t;
  return out;
}

RelativeErrors relative_errors(const Calibration& aligned, const NetworkGroundTruth& gt) {
  const Eigen::MatrixX2d P = stack_nodes(aligned.receivers, aligned.transmitters);
  const Eigen::MatrixX2d Q = stack_nodes(gt.receivers, gt.transmitters);
  const Eigen::RowVector2d q_bar = Q.colwise().mean();

  RelativeErrors out;
  const double denom = (Q.rowwise() - q_bar).norm();
  out.pos_err = (P - Q).norm() / std::max(denom, std::numeric_limits<double>::epsilon());
  const double offset_denom =
      std::max(gt.offsets.norm(), std::numeric_limits<double>::epsilon());
  out.offset_err = (aligned.offsets - gt.offsets).norm() / offset_denom;
  return out;
}

BenchReport run_solution_count_study(int trials, std::uint64_t seed) {
  if (trials < 1) throw std::invalid_argument("run_solution_count_study: trials must be >= 1");

  BenchReport report;
  report.study = "count-study";
  report.solver = solver_kind_name(SolverKind::s6r3s);
  report.seed = seed;
  report.trials = trials;
  report.instance_distribution = distribution_label(InstanceSpec{});

  std::vector<int> reals, feasibles;
  for (int trial = 0; trial < trials; ++trial) {
    InstanceSpec ispec;
    ispec.m = 6;
    ispec.n = 3;
    ispec.seed = derive_seed(seed, 1, trial);
    auto [gt, pr] = generate_instance(ispec);

    SolverConfig cfg;
    cfg.kind = SolverKind::s6r3s;
    cfg.residual_threshold = 1e-10;
    cfg.track_options.seed = derive_seed(seed, 2, trial);
    const SolveOutcome out = solve_6r3s(pr, cfg);

    BenchReport::CountRecord rec;
    rec.trial = trial;
    rec.real_count = static_cast<int>(out.diagnostics.real);
    rec.feasible_count = static_cast<int>(out.diagnostics.feasible);
    rec.converged_paths = out.diagnostics.converged;
    report.count_records.push_back(rec);
    reals.push_back(rec.real_count);
    feasibles.push_back(rec.feasible_count);
  }

  BenchReport::CountAggregates agg;
  agg.real_min = *std::min_element(reals.begin(), reals.end());
  agg.real_max = *std::max_element(reals.begin(), reals.end());
  std::tie(agg.real_mean, agg.real_std) = mean_std(reals);
  agg.feasible_min = *std::min_element(feasibles.begin(), feasibles.end());
  agg.feasible_max = *std::max_element(feasibles.begin(), feasibles.end());
  std::tie(agg.feasible_mean, agg.feasible_std) = mean_std(feasibles);
  report.count_aggregates = agg;
  return report;
}

BenchReport run_noise_sweep(SolverKind kind, const std::vector<double>& sigmas, int trials,
                            std::uint64_t seed) {
  if (trials < 1) throw std::invalid_argument("run_noise_sweep: trials must be >= 1");
  const auto [m, n] = solver_dimensions(kind);

  BenchReport report;
  report.study = "noise-sweep";
  report.solver = solver_kind_name(kind);
  report.seed = seed;
  report.trials = trials;
  report.instance_distribution = distribution_label(InstanceSpec{});

  for (std::size_t si = 0; si < sigmas.size(); ++si) {
    const double sigma = sigmas[si];
    std::vector<double> pos_errs, offset_errs;
    int failures = 0;
    for (int trial = 0; trial < trials; ++trial) {
      InstanceSpec ispec;
      ispec.m = m;
      ispec.n = n;
      ispec.seed = derive_seed(seed, 1, trial);  // shared across sigmas
      auto [gt, pr] = generate_instance(ispec);

      NoiseSpec nspec;
      nspec.sigma = sigma;
      nspec.seed = derive_seed(seed, 100 + si, trial);
      const PseudorangeMatrix noisy = add_noise(pr, nspec);

      SolverConfig cfg;
      cfg.kind = kind;
      cfg.residual_threshold = 1e-10;
      cfg.track_options.seed = derive_seed(seed, 200 + si, trial);
      const SolveOutcome out = solve(noisy, cfg);

      BenchReport::SweepRecord rec;
      rec.trial = trial;
      rec.sigma = sigma;
      if (out.best) {
        const Calibration aligned = align(*out.best, gt);
        const RelativeErrors errs = relative_errors(aligned, gt);
        rec.success = true;
        rec.pos_err = errs.pos_err;
        rec.offset_err = errs.offset_err;
        rec.residual = out.best->primal_residual;
        pos_errs.push_back(errs.pos_err);
        offset_errs.push_back(errs.offset_err);
      } else {
        rec.success = false;
        rec.pos_err = rec.offset_err = rec.residual =
            std::numeric_limits<double>::quiet_NaN();
        ++failures;
      }
      report.sweep_records.push_back(rec);
    }

    BenchReport::SweepAggregate agg;
    agg.sigma = sigma;
    agg.trials = trials;
    agg.failures = failures;
    agg.median_pos_err = median(pos_errs);
    agg.median_offset_err = median(offset_errs);
    report.sweep_aggregates.push_back(agg);
  }
  return report;
}

std::string BenchReport::to_json() const {
  nlohmann::ordered_json j;
  j["study"] = study;
  j["solver"] = solver;
  j["seed"] = seed;
  j["trials"] = trials;
  j["instance_distribution"] = instance_distribution;

  if (!count_records.empty()) {
    nlohmann::ordered_json records = nlohmann::ordered_json::array();
    for (const CountRecord& r : count_records) {
      records.push_back({{"trial", r.trial},
                         {"real_count", r.real_count},
                         {"feasible_count", r.feasible_count},
                         {"converged_paths", r.converged_paths}});
    }
    j["records"] = std::move(records);
  }
  if (count_aggregates) {
    const CountAggregates& a = *count_aggregates;
    j["aggregates"] = {{"real", {{"min", a.real_min},
                                 {"max", a.real_max},
                                 {"mean", a.real_mean},
                                 {"std", a.real_std}}},
                       {"feasible", {{"min", a.feasible_min},
                                     {"max", a.feasible_max},
                                     {"mean", a.feasible_mean},
                                     {"std", a.feasible_std}}}};
  }
  if (!sweep_records.empty()) {
    nlohmann::ordered_json records = nlohmann::ordered_json::array();
    for (const SweepRecord& r : sweep_records) {
      nlohmann::ordered_json rec = {{"trial", r.trial}, {"sigma", r.sigma},
                                    {"success", r.success}};
      if (r.success) {
        rec["pos_err"] = r.pos_err;
        rec["offset_err"] = r.offset_err;
        rec["residual"] = r.residual;
      }
      records.push_back(std::move(rec));
    }
    j["records"] = std::move(records);
  }
  if (!sweep_aggregates.empty()) {
    nlohmann::ordered_json aggs = nlohmann::ordered_json::array();
    for (const SweepAggregate& a : sweep_aggregates) {
      aggs.push_back({{"sigma", a.sigma},
                      {"trials", a.trials},
                      {"failures", a.failures},
                      {"median_pos_err", a.median_pos_err},
                      {"median_offset_err", a.median_offset_err}});
    }
    j["aggregates"] = std::move(aggs);
  }
  return j.dump(2) + "\n";
}

std::string BenchReport::to_csv() const {
  std::string csv;
  if (study == "count-study") {
    csv = "trial,real_count,feasible_count\n";
    for (const CountRecord& r : count_records) {
      csv += std::to_string(r.trial) + "," + std::to_string(r.real_count) + "," +
             std::to_string(r.feasible_count) + "\n";
    }
    return csv;
  }
  csv = "sigma,trials,failures,median_pos_err,median_offset_err\n";
  char buf[128];
  for (const SweepAggregate& a : sweep_aggregates) {
    std::snprintf(buf, sizeof(buf), "%.17g,%d,%d,%.17g,%.17g\n", a.sigma, a.trials, a.failures,
                  a.median_pos_err, a.median_offset_err);
    csv += buf;
  }
  return csv;
}

std::string solver_kind_name(SolverKind kind) {
  switch (kind) {
    case SolverKind::s6r3s: return "6r3s";
    case SolverKind::s7r3s: return "7r3s";
    case SolverKind::s6r4s: return "6r4s";
    case SolverKind::s5r4s: return "5r4s";
    case SolverKind::s5r5s: return "5r5s";
  }
  return "unknown";
}

std::optional<SolverKind> solver_kind_from_name(const std::string& name) {
  if (name == "6r3s") return SolverKind::s6r3s;
  if (name == "7r3s") return SolverKind::s7r3s;
  if (name == "6r4s") return SolverKind::s6r4s;
  if (name == "5r4s") return SolverKind::s5r4s;
  if (name == "5r5s") return SolverKind::s5r5s;
  return std::nullopt;
}

}  // namespace tdoacal
