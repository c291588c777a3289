#pragma once

#include <optional>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>

#include "tdoacal/poly.hpp"

namespace tdoacal {

using Vec2 = Eigen::Vector2d;
using Mat2 = Eigen::Matrix2d;

/// m receivers by n transmitters of measured pseudoranges
/// f_ij = ||r_i - s_j|| + o_j.
struct PseudorangeMatrix {
  Eigen::MatrixXd f;

  PseudorangeMatrix() = default;
  explicit PseudorangeMatrix(Eigen::MatrixXd values) : f(std::move(values)) {}

  int m() const { return static_cast<int>(f.rows()); }
  int n() const { return static_cast<int>(f.cols()); }

  PseudorangeMatrix top_rows(int rows) const { return PseudorangeMatrix(f.topRows(rows)); }
  PseudorangeMatrix left_cols(int cols) const { return PseudorangeMatrix(f.leftCols(cols)); }
};

struct NetworkGroundTruth {
  Eigen::MatrixX2d receivers;     // m x 2
  Eigen::MatrixX2d transmitters;  // n x 2
  Eigen::VectorXd offsets;        // n

  int m() const { return static_cast<int>(receivers.rows()); }
  int n() const { return static_cast<int>(transmitters.rows()); }

  PseudorangeMatrix pseudoranges() const;
};

/// Unknowns of the dual formulation: symmetric 2x2 H, 2-vector b, and the
/// transmitter offsets.
struct DualSolution {
  double h11 = 0.0, h12 = 0.0, h22 = 0.0;
  Vec2 b = Vec2::Zero();
  Eigen::VectorXd offsets;

  Mat2 H() const {
    Mat2 out;
    out << h11, h12, h12, h22;
    return out;
  }
  double det_H() const { return h11 * h22 - h12 * h12; }
  bool positive_definite() const { return h11 > 0.0 && det_H() > 0.0; }
};

/// Recovered network in the gauge receivers[0] == (0,0),
/// receivers[1].y == 0.
struct Calibration {
  Eigen::MatrixX2d receivers;
  Eigen::MatrixX2d transmitters;
  Eigen::VectorXd offsets;
  double primal_residual = std::numeric_limits<double>::infinity();

  int m() const { return static_cast<int>(receivers.rows()); }
  int n() const { return static_cast<int>(transmitters.rows()); }
};

enum class ProblemClass { underdetermined, minimal, subminimal };

/// Constraint surplus mn - 2m - 3n + 3 of the m-receiver n-transmitter
/// configuration; negative = underdetermined, zero = minimal,
/// positive = subminimal.
int excess_constraint(int m, int n);
ProblemClass classify_configuration(int m, int n);

/// Which dual polynomial system to build.
enum class DualSystemKind {
  k6r3s,  // 8 equations (A, 2xB, 5xC) in 8 unknowns
  k5r4s,  // 7 equations over transmitters 1-3 plus 2 rank minors, 9 unknowns
};

/// Number of dual variables: (h11, h12, h22, b1, b2, o_1..o_k).
int dual_variable_count(DualSystemKind kind);

/// (f_ij - o_j)^2 as a polynomial in the offset variable offset_var,
/// embedded in an nvars-dimensional variable space.
Poly squared_distance_poly(double f_ij, int offset_var, int nvars);

using PolyMatrix = std::vector<std::vector<Poly>>;

/// Symbolic compaction matrix (Eq. entries
/// d2[i+1][j+1] - d2[0][j+1] - d2[i+1][0] + d2[0][0] in 1-based paper
/// indexing): an (m-1) x (n-1) matrix of polynomials in the offsets,
/// embedded in the (5+n)-variable dual space. Every entry is affine in
/// the offsets; the quadratic offset terms cancel pairwise.
PolyMatrix compaction_matrix(const PseudorangeMatrix& pr);

/// Numeric compaction matrix from an m x n matrix of squared distances.
Eigen::MatrixXd numeric_compaction(const Eigen::MatrixXd& squared_distances);

/// The (m-3)(n-3) independent 3x3 minors of the symbolic compaction
/// matrix: rows {1,2,k} for k = 3..m-1 crossed with columns {1,2,l} for
/// l = 3..n-1 (1-based). Requires m >= 4 and n >= 4.
std::vector<Poly> rank_minor_constraints(const PolyMatrix& compaction, int m, int n);

/// Dual polynomial system with denominators cleared by det(H).
/// Variable order (h11, h12, h22, b1, b2, o1, ..., o_k).
PolySystem build_dual_system(const PseudorangeMatrix& pr, DualSystemKind kind);

class InfeasibleDualError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Position upgrade of a feasible dual solution for an m x 3 pseudorange
/// matrix: H = (L^T L)^{-1} with L upper triangular, receivers from the
/// compaction rows, transmitters from (L, b), then a rotation about the
/// origin that puts receiver 2 on the positive x-axis so the gauge fields
/// of Calibration hold exactly. Throws InfeasibleDualError when H is not
/// positive definite.
Calibration upgrade_solution(const DualSolution& ds, const PseudorangeMatrix& pr);

/// max over (i,j) of | ||r_i - s_j||^2 - (f_ij - o_j)^2 |.
double primal_residual(const Calibration& c, const PseudorangeMatrix& pr);

/// Accepts a complex dual-system root when every imaginary part is below
/// reality_tol and the real H is positive definite (h11 > 0, det H > 0).
std::optional<DualSolution> is_feasible(const CVector& x, DualSystemKind kind,
                                        double reality_tol = 1e-6);

}  // namespace tdoacal
