#pragma once

#include <optional>
#include <vector>

#include "tdoacal/homotopy.hpp"
#include "tdoacal/tdoa.hpp"

namespace tdoacal {

enum class SolverKind { s6r3s, s7r3s, s6r4s, s5r4s, s5r5s };

/// Receiver/transmitter counts expected by a solver kind.
std::pair<int, int> solver_dimensions(SolverKind kind);

struct SolverConfig {
  SolverKind kind = SolverKind::s6r3s;
  double residual_threshold = 1e-10;
  TrackOptions track_options{};
};

struct SolveDiagnostics {
  std::size_t paths_tracked = 0;
  std::size_t converged = 0;  // converged paths
  std::size_t real = 0;       // distinct real dual solutions with positive definite H
  std::size_t feasible = 0;   // candidates below the primal residual threshold
};

/// candidates: residual-filtered calibrations in deterministic order.
/// best: for the minimal solver, the min-residual candidate (absent when
/// none pass the threshold); for subminimal solvers, the min-residual
/// calibration over all scored candidates, threshold or not.
struct SolveOutcome {
  std::vector<Calibration> candidates;
  std::optional<Calibration> best;
  SolveDiagnostics diagnostics;
};

SolveOutcome solve_6r3s(const PseudorangeMatrix& pr, const SolverConfig& cfg);
SolveOutcome solve_7r3s(const PseudorangeMatrix& pr, const SolverConfig& cfg);
SolveOutcome solve_6r4s(const PseudorangeMatrix& pr, const SolverConfig& cfg);
SolveOutcome solve_5r4s(const PseudorangeMatrix& pr, const SolverConfig& cfg);
SolveOutcome solve_5r5s(const PseudorangeMatrix& pr, const SolverConfig& cfg);

/// Dispatch on cfg.kind; pr dimensions must match the kind.
SolveOutcome solve(const PseudorangeMatrix& pr, const SolverConfig& cfg);

/// Point from distances to >= 3 known anchors, via the linearized
/// difference system solved in least squares. Exact on consistent data.
/// Throws on collinear (rank-deficient) anchors.
Vec2 trilaterate_point(const Eigen::MatrixX2d& anchors, const Eigen::VectorXd& dists);

struct PointWithOffset {
  Vec2 point = Vec2::Zero();
  double offset = 0.0;
  /// Max absolute residual of the full quadratic equations at the linear
  /// solution; ~0 on consistent data (validation tolerance 1e-8).
  double quad_residual = 0.0;
};

/// Point and shared offset from pseudoranges to >= 4 known anchors;
/// differencing cancels both ||x||^2 and o^2, leaving a linear system in
/// (x, y, o). Throws on a rank-deficient system.
PointWithOffset trilaterate_point_offset(const Eigen::MatrixX2d& anchors,
                                         const Eigen::VectorXd& pseudoranges);

/// Minimum primal residual against pr; ties broken by lexicographic
/// comparison of the serialized positions and offsets.
std::optional<Calibration> select_best(const std::vector<Calibration>& candidates,
                                       const PseudorangeMatrix& pr);

}  // namespace tdoacal
