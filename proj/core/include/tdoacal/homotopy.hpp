#pragma once

#include <cstdint>
#include <limits>
#include <utility>
#include <vector>

#include "tdoacal/poly.hpp"

namespace tdoacal {

/// Gamma-trick homotopy H(x,t) = (1-t)*F(x) + gamma*t*G(x), tracked
/// from t=1 (start system G) to t=0 (target system F).
struct Homotopy {
  PolySystem target;  // F
  PolySystem start;   // G
  Complex gamma{1.0, 0.0};

  /// Validates squareness and matching variable counts; gamma is
  /// normalized to unit modulus (zero gamma is rejected).
  Homotopy(PolySystem target_sys, PolySystem start_sys, Complex gamma_value);

  CVector eval(const CVector& x, double t) const;
};

enum class PathStatus { converged, diverged, singular, max_steps };

struct PathResult {
  PathStatus status = PathStatus::singular;
  CVector endpoint;  // valid iff status == converged
  int steps_taken = 0;
  double final_residual = std::numeric_limits<double>::infinity();
};

struct TrackOptions {
  double initial_step = 0.05;
  double min_step = 1e-7;
  double newton_tol = 1e-10;
  int newton_max_iters = 3;
  double endpoint_tol = 1e-8;
  double divergence_norm = 1e8;
  int max_steps = 10000;
  std::uint64_t seed = 0;
};

/// Total-degree start system G_i = x_i^{d_i} - a_i with seeded random
/// unit-modulus a_i, plus the full product set of its roots. Every root
/// satisfies ||G(root)||_inf < 1e-12.
std::pair<PolySystem, std::vector<CVector>> start_system(const std::vector<int>& degrees,
                                                         std::uint64_t seed);

/// Same with caller-chosen constants a_i (all nonzero).
std::pair<PolySystem, std::vector<CVector>> start_system_with_constants(
    const std::vector<int>& degrees, const std::vector<Complex>& constants);

/// Tracks one path from a start-system root x0. Euler predictor on the
/// Davidenko ODE plus a Newton corrector; the step halves on corrector
/// failure and doubles after consecutive successes. A violated
/// precondition (x0 not a root of G) is reported as singular with
/// steps_taken == 0.
PathResult track_path(const Homotopy& h, const CVector& x0, const TrackOptions& opts);

/// Full total-degree homotopy solve of a square system: builds the start
/// system from total degrees, draws one gamma from opts.seed, tracks all
/// paths (optionally on num_threads workers; 0 = hardware default),
/// polishes converged endpoints with Newton on f, deduplicates, and
/// returns distinct solutions sorted lexicographically by (real, imag)
/// coordinate pairs. Output does not depend on num_threads.
std::vector<CVector> solve_system(const PolySystem& f, const TrackOptions& opts,
                                  int num_threads = 0);

/// Path-level tallies of a solve_system run, for diagnostics.
struct SolveStats {
  std::size_t paths_tracked = 0;
  std::size_t paths_converged = 0;
  std::size_t paths_diverged = 0;
  std::size_t paths_singular = 0;
  std::size_t paths_max_steps = 0;
  std::size_t total_steps = 0;
};

std::vector<CVector> solve_system(const PolySystem& f, const TrackOptions& opts,
                                  int num_threads, SolveStats& stats);

/// Damped Newton until ||f(x)||_inf < tol or max_iters. Returns the last
/// iterate with a convergence flag; a singular Jacobian yields
/// converged == false.
std::pair<CVector, bool> newton_refine(const PolySystem& f, const CVector& x, double tol,
                                       int max_iters);

/// Keeps one representative per cluster under infinity-norm distance
/// < tol (first in input order). Idempotent.
std::vector<CVector> deduplicate(const std::vector<CVector>& solutions, double tol);

}  // namespace tdoacal
