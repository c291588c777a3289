#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "tdoacal/solvers.hpp"
#include "tdoacal/tdoa.hpp"

namespace tdoacal {

struct InstanceSpec {
  int m = 6;
  int n = 3;
  std::uint64_t seed = 0;
  double position_sigma = 1.0;
  double offset_sigma = 1.0;
};

struct NoiseSpec {
  double sigma = 0.0;  // additive Gaussian std per pseudorange
  std::uint64_t seed = 0;
};

/// Receivers, transmitters and offsets drawn i.i.d. from zero-mean
/// Gaussians; pseudoranges computed exactly from the ground truth.
std::pair<NetworkGroundTruth, PseudorangeMatrix> generate_instance(const InstanceSpec& spec);

PseudorangeMatrix add_noise(const PseudorangeMatrix& pr, const NoiseSpec& ns);

/// Closed-form orthogonal Procrustes over the stacked receiver and
/// transmitter sets, reflection permitted; offsets pass through
/// (they are invariant under rigid motions).
Calibration align(const Calibration& est, const NetworkGroundTruth& gt);

struct RelativeErrors {
  double pos_err = 0.0;
  double offset_err = 0.0;
};

/// pos_err = ||P_est - P_gt||_F / ||P_gt - centroid||_F over the stacked
/// nodes; offset_err = ||o_est - o_gt||_2 / max(||o_gt||_2, eps).
RelativeErrors relative_errors(const Calibration& aligned, const NetworkGroundTruth& gt);

struct BenchReport {
  struct CountRecord {
    int trial = 0;
    int real_count = 0;
    int feasible_count = 0;
    std::size_t converged_paths = 0;
  };
  struct CountAggregates {
    int real_min = 0, real_max = 0;
    double real_mean = 0.0, real_std = 0.0;
    int feasible_min = 0, feasible_max = 0;
    double feasible_mean = 0.0, feasible_std = 0.0;
  };
  struct SweepRecord {
    int trial = 0;
    double sigma = 0.0;
    bool success = false;
    double pos_err = 0.0;
    double offset_err = 0.0;
    double residual = 0.0;
  };
  struct SweepAggregate {
    double sigma = 0.0;
    int trials = 0;
    int failures = 0;
    double median_pos_err = 0.0;
    double median_offset_err = 0.0;
  };

  std::string study;   // "count-study" or "noise-sweep"
  std::string solver;  // e.g. "6r3s"
  std::uint64_t seed = 0;
  int trials = 0;
  std::string instance_distribution;

  std::vector<CountRecord> count_records;
  std::optional<CountAggregates> count_aggregates;
  std::vector<SweepRecord> sweep_records;
  std::vector<SweepAggregate> sweep_aggregates;

  /// Full records plus aggregates, stable field order.
  std::string to_json() const;
  /// Aggregate CSV: "sigma,trials,failures,median_pos_err,median_offset_err"
  /// for sweeps, "trial,real_count,feasible_count" for count studies.
  std::string to_csv() const;
};

/// Real/feasible solution counts of the 6r/3s solver over seeded random
/// clean instances (threshold 1e-10).
BenchReport run_solution_count_study(int trials, std::uint64_t seed);

/// Median aligned relative errors per noise level. Instance seeds are
/// shared across sigmas; failed trials are recorded and excluded from the
/// medians.
BenchReport run_noise_sweep(SolverKind kind, const std::vector<double>& sigmas, int trials,
                            std::uint64_t seed);

std::string solver_kind_name(SolverKind kind);
std::optional<SolverKind> solver_kind_from_name(const std::string& name);

}  // namespace tdoacal
