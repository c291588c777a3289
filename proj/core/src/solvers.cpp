#include "tdoacal/solvers.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/Dense>

namespace tdoacal {

namespace {

constexpr double kRankTol = 1e-10;  // relative singular-value cutoff

// Unfiltered pool of upgraded calibrations plus path/real tallies. The
// residual threshold is applied by the callers: as a hard filter for the
// minimal solver's candidate list, and only for reporting in the
// subminimal solvers (their best is the min-residual candidate
// regardless, which keeps them usable on noisy data).
struct CandidatePool {
  std::vector<Calibration> pool;
  SolveDiagnostics diagnostics;
};

bool lex_less_calibration(const Calibration& a, const Calibration& b) {
  auto cmp_mat = [](const Eigen::MatrixX2d& x, const Eigen::MatrixX2d& y) -> int {
    for (int i = 0; i < x.rows(); ++i)
      for (int j = 0; j < 2; ++j) {
        if (x(i, j) < y(i, j)) return -1;
        if (x(i, j) > y(i, j)) return 1;
      }
    return 0;
  };
  if (int c = cmp_mat(a.receivers, b.receivers); c != 0) return c < 0;
  if (int c = cmp_mat(a.transmitters, b.transmitters); c != 0) return c < 0;
  for (int j = 0; j < a.offsets.size(); ++j) {
    if (a.offsets[j] < b.offsets[j]) return true;
    if (a.offsets[j] > b.offsets[j]) return false;
  }
  return false;
}

CandidatePool solve_6r3s_pool(const PseudorangeMatrix& pr, const SolverConfig& cfg) {
  const PolySystem dual = build_dual_system(pr, DualSystemKind::k6r3s);
  SolveStats stats;
  const std::vector<CVector> roots = solve_system(dual, cfg.track_options, 0, stats);

  CandidatePool out;
  out.diagnostics.paths_tracked = stats.paths_tracked;
  out.diagnostics.converged = stats.paths_converged;
  for (const CVector& root : roots) {
    const auto ds = is_feasible(root, DualSystemKind::k6r3s);
    if (!ds) continue;
    ++out.diagnostics.real;
    out.pool.push_back(upgrade_solution(*ds, pr));
  }
  return out;
}

CandidatePool solve_5r4s_pool(const PseudorangeMatrix& pr, const SolverConfig& cfg) {
  const PolySystem dual = build_dual_system(pr, DualSystemKind::k5r4s);
  SolveStats stats;
  const std::vector<CVector> roots = solve_system(dual, cfg.track_options, 0, stats);
  const PseudorangeMatrix pr3 = pr.left_cols(3);

  CandidatePool out;
  out.diagnostics.paths_tracked = stats.paths_tracked;
  out.diagnostics.converged = stats.paths_converged;
  for (const CVector& root : roots) {
    const auto ds = is_feasible(root, DualSystemKind::k5r4s);
    if (!ds) continue;
    ++out.diagnostics.real;

    DualSolution head = *ds;
    head.offsets = ds->offsets.head(3);
    Calibration base = upgrade_solution(head, pr3);

    // Transmitter 4: its offset is already solved, so plain trilateration
    // from the five receivers.
    const double o4 = ds->offsets[3];
    const Eigen::VectorXd dists = (pr.f.col(3).array() - o4).matrix();
    Vec2 s4;
    try {
      s4 = trilaterate_point(base.receivers, dists);
    } catch (const std::invalid_argument&) {
      continue;  // degenerate receiver geometry for this candidate
    }
    Calibration full;
    full.receivers = base.receivers;
    full.transmitters.resize(4, 2);
    full.transmitters.topRows(3) = base.transmitters;
    full.transmitters.row(3) = s4.transpose();
    full.offsets = ds->offsets;
    full.primal_residual = primal_residual(full, pr);
    out.pool.push_back(std::move(full));
  }
  return out;
}

SolveOutcome finish_minimal(CandidatePool&& pool, const SolverConfig& cfg) {
  SolveOutcome out;
  out.diagnostics = pool.diagnostics;
  for (Calibration& c : pool.pool) {
    if (c.primal_residual < cfg.residual_threshold) out.candidates.push_back(std::move(c));
  }
  out.diagnostics.feasible = out.candidates.size();
  if (!out.candidates.empty()) {
    out.best = *std::min_element(
        out.candidates.begin(), out.candidates.end(), [](const Calibration& a, const Calibration& b) {
          if (a.primal_residual != b.primal_residual)
            return a.primal_residual < b.primal_residual;
          return lex_less_calibration(a, b);
        });
  }
  return out;
}

SolveOutcome finish_subminimal(std::vector<Calibration>&& scored, SolveDiagnostics diag,
                               const SolverConfig& cfg) {
  SolveOutcome out;
  out.diagnostics = diag;
  std::optional<Calibration> best;
  for (Calibration& c : scored) {
    if (!best || c.primal_residual < best->primal_residual ||
        (c.primal_residual == best->primal_residual && lex_less_calibration(c, *best)))
      best = c;
    if (c.primal_residual < cfg.residual_threshold) out.candidates.push_back(std::move(c));
  }
  out.diagnostics.feasible = out.candidates.size();
  out.best = std::move(best);
  return out;
}

void require_dims(const PseudorangeMatrix& pr, SolverKind kind) {
  const auto [m, n] = solver_dimensions(kind);
  if (pr.m() != m || pr.n() != n)
    throw std::invalid_argument("solve: pseudorange matrix dimensions do not match the solver");
}

}  // namespace

std::pair<int, int> solver_dimensions(SolverKind kind) {
  switch (kind) {
    case SolverKind::s6r3s: return {6, 3};
    case SolverKind::s7r3s: return {7, 3};
    case SolverKind::s6r4s: return {6, 4};
    case SolverKind::s5r4s: return {5, 4};
    case SolverKind::s5r5s: return {5, 5};
  }
  throw std::invalid_argument("solver_dimensions: unknown kind");
}

SolveOutcome solve_6r3s(const PseudorangeMatrix& pr, const SolverConfig& cfg) {
  require_dims(pr, SolverKind::s6r3s);
  return finish_minimal(solve_6r3s_pool(pr, cfg), cfg);
}

SolveOutcome solve_7r3s(const PseudorangeMatrix& pr, const SolverConfig& cfg) {
  require_dims(pr, SolverKind::s7r3s);
  CandidatePool inner = solve_6r3s_pool(pr.top_rows(6), cfg);

  std::vector<Calibration> scored;
  for (const Calibration& c : inner.pool) {
    Vec2 r7;
    try {
      r7 = trilaterate_point(c.transmitters, pr.f.row(6).transpose() - c.offsets);
    } catch (const std::invalid_argument&) {
      continue;  // collinear transmitters: no trilateration, candidate dropped
    }
    Calibration full;
    full.receivers.resize(7, 2);
    full.receivers.topRows(6) = c.receivers;
    full.receivers.row(6) = r7.transpose();
    full.transmitters = c.transmitters;
    full.offsets = c.offsets;
    full.primal_residual = primal_residual(full, pr);
    scored.push_back(std::move(full));
  }
  return finish_subminimal(std::move(scored), inner.diagnostics, cfg);
}

SolveOutcome solve_6r4s(const PseudorangeMatrix& pr, const SolverConfig& cfg) {
  require_dims(pr, SolverKind::s6r4s);
  CandidatePool inner = solve_6r3s_pool(pr.left_cols(3), cfg);

  std::vector<Calibration> scored;
  for (const Calibration& c : inner.pool) {
    PointWithOffset t4;
    try {
      t4 = trilaterate_point_offset(c.receivers, pr.f.col(3));
    } catch (const std::invalid_argument&) {
      continue;
    }
    Calibration full;
    full.receivers = c.receivers;
    full.transmitters.resize(4, 2);
    full.transmitters.topRows(3) = c.transmitters;
    full.transmitters.row(3) = t4.point.transpose();
    full.offsets.resize(4);
    full.offsets.head(3) = c.offsets;
    full.offsets[3] = t4.offset;
    full.primal_residual = primal_residual(full, pr);
    scored.push_back(std::move(full));
  }
  return finish_subminimal(std::move(scored), inner.diagnostics, cfg);
}

SolveOutcome solve_5r4s(const PseudorangeMatrix& pr, const SolverConfig& cfg) {
  require_dims(pr, SolverKind::s5r4s);
  CandidatePool pool = solve_5r4s_pool(pr, cfg);
  return finish_subminimal(std::move(pool.pool), pool.diagnostics, cfg);
}

SolveOutcome solve_5r5s(const PseudorangeMatrix& pr, const SolverConfig& cfg) {
  require_dims(pr, SolverKind::s5r5s);
  CandidatePool inner = solve_5r4s_pool(pr.left_cols(4), cfg);

  std::vector<Calibration> scored;
  for (const Calibration& c : inner.pool) {
    PointWithOffset t5;
    try {
      t5 = trilaterate_point_offset(c.receivers, pr.f.col(4));
    } catch (const std::invalid_argument&) {
      continue;
    }
    Calibration full;
    full.receivers = c.receivers;
    full.transmitters.resize(5, 2);
    full.transmitters.topRows(4) = c.transmitters;
    full.transmitters.row(4) = t5.point.transpose();
    full.offsets.resize(5);
    full.offsets.head(4) = c.offsets;
    full.offsets[4] = t5.offset;
    full.primal_residual = primal_residual(full, pr);
    scored.push_back(std::move(full));
  }
  return finish_subminimal(std::move(scored), inner.diagnostics, cfg);
}

SolveOutcome solve(const PseudorangeMatrix& pr, const SolverConfig& cfg) {
  switch (cfg.kind) {
    case SolverKind::s6r3s: return solve_6r3s(pr, cfg);
    case SolverKind::s7r3s: return solve_7r3s(pr, cfg);
    case SolverKind::s6r4s: return solve_6r4s(pr, cfg);
    case SolverKind::s5r4s: return solve_5r4s(pr, cfg);
    case SolverKind::s5r5s: return solve_5r5s(pr, cfg);
  }
  throw std::invalid_argument("solve: unknown solver kind");
}

Vec2 trilaterate_point(const Eigen::MatrixX2d& anchors, const Eigen::VectorXd& dists) {
  const int k = static_cast<int>(anchors.rows());
  if (k < 3 || dists.size() != k)
    throw std::invalid_argument("trilaterate_point: need >= 3 anchors with matching distances");

  Eigen::MatrixXd A(k - 1, 2);
  Eigen::VectorXd rhs(k - 1);
  const double d0sq = dists[0] * dists[0];
  const double a0sq = anchors.row(0).squaredNorm();
  for (int i = 1; i < k; ++i) {
    A.row(i - 1) = 2.0 * (anchors.row(i) - anchors.row(0));
    rhs[i - 1] = d0sq - dists[i] * dists[i] + anchors.row(i).squaredNorm() - a0sq;
  }

  Eigen::JacobiSVD<Eigen::MatrixXd> svd(A, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const auto& sv = svd.singularValues();
  if (sv[1] <= kRankTol * sv[0])
    throw std::invalid_argument("trilaterate_point: collinear anchors");
  return svd.solve(rhs);
}

PointWithOffset trilaterate_point_offset(const Eigen::MatrixX2d& anchors,
                                         const Eigen::VectorXd& pseudoranges) {
  const int k = static_cast<int>(anchors.rows());
  if (k < 4 || pseudoranges.size() != k)
    throw std::invalid_argument(
        "trilaterate_point_offset: need >= 4 anchors with matching pseudoranges");

  // || x - r_i ||^2 = (f_i - o)^2; subtracting the first equation cancels
  // ||x||^2 and o^2:
  //   2 (r_i - r_1)^T x - 2 (f_i - f_1) o = ||r_i||^2 - ||r_1||^2 - f_i^2 + f_1^2
  Eigen::MatrixXd A(k - 1, 3);
  Eigen::VectorXd rhs(k - 1);
  for (int i = 1; i < k; ++i) {
    A(i - 1, 0) = 2.0 * (anchors(i, 0) - anchors(0, 0));
    A(i - 1, 1) = 2.0 * (anchors(i, 1) - anchors(0, 1));
    A(i - 1, 2) = -2.0 * (pseudoranges[i] - pseudoranges[0]);
    rhs[i - 1] = anchors.row(i).squaredNorm() - anchors.row(0).squaredNorm() -
                 pseudoranges[i] * pseudoranges[i] + pseudoranges[0] * pseudoranges[0];
  }

  Eigen::JacobiSVD<Eigen::MatrixXd> svd(A, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const auto& sv = svd.singularValues();
  if (sv[2] <= kRankTol * sv[0])
    throw std::invalid_argument("trilaterate_point_offset: rank-deficient anchor geometry");
  const Eigen::Vector3d sol = svd.solve(rhs);

  PointWithOffset out;
  out.point = sol.head<2>();
  out.offset = sol[2];
  for (int i = 0; i < k; ++i) {
    const double lhs = (out.point.transpose() - anchors.row(i)).squaredNorm();
    const double r = pseudoranges[i] - out.offset;
    out.quad_residual = std::max(out.quad_residual, std::abs(lhs - r * r));
  }
  return out;
}

std::optional<Calibration> select_best(const std::vector<Calibration>& candidates,
                                       const PseudorangeMatrix& pr) {
  std::optional<Calibration> best;
  double best_res = std::numeric_limits<double>::infinity();
  for (const Calibration& c : candidates) {
    const double res = primal_residual(c, pr);
    if (!best || res < best_res ||
        (res == best_res && lex_less_calibration(c, *best))) {
      best = c;
      best_res = res;
    }
  }
  return best;
}

}  // namespace tdoacal
