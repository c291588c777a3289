#include "tdoacal/tdoa.hpp"

#include <cmath>

namespace tdoacal {

namespace {

// Dual variable layout.
constexpr int kH11 = 0;
constexpr int kH12 = 1;
constexpr int kH22 = 2;
constexpr int kB1 = 3;
constexpr int kB2 = 4;
constexpr int kOffsetBase = 5;

Poly det_H_poly(int nvars) {
  const Poly h11 = Poly::variable(nvars, kH11);
  const Poly h12 = Poly::variable(nvars, kH12);
  const Poly h22 = Poly::variable(nvars, kH22);
  return h11 * h22 - h12 * h12;
}

// Entries of adj(H) = [[h22, -h12], [-h12, h11]].
PolyMatrix adj_H_poly(int nvars) {
  const Poly h11 = Poly::variable(nvars, kH11);
  const Poly h12 = Poly::variable(nvars, kH12);
  const Poly h22 = Poly::variable(nvars, kH22);
  return {{h22, -h12}, {-h12, h11}};
}

PolyMatrix h_poly(int nvars) {
  const Poly h11 = Poly::variable(nvars, kH11);
  const Poly h12 = Poly::variable(nvars, kH12);
  const Poly h22 = Poly::variable(nvars, kH22);
  return {{h11, h12}, {h12, h22}};
}

// Symbolic compaction of an arbitrary pseudorange block, with column j
// mapped to offset variable offset_var(j) in an nvars-dimensional space.
PolyMatrix compaction_sym(const Eigen::MatrixXd& f, int nvars,
                          const std::vector<int>& offset_var) {
  const int m = static_cast<int>(f.rows());
  const int n = static_cast<int>(f.cols());
  auto dsq = [&](int i, int j) { return squared_distance_poly(f(i, j), offset_var[j], nvars); };
  PolyMatrix out(m - 1, std::vector<Poly>(n - 1, Poly(nvars)));
  for (int i = 0; i < m - 1; ++i)
    for (int j = 0; j < n - 1; ++j)
      out[i][j] = dsq(i + 1, j + 1) - dsq(0, j + 1) - dsq(i + 1, 0) + dsq(0, 0);
  return out;
}

Poly det3(const PolyMatrix& c, const std::array<int, 3>& rows, const std::array<int, 3>& cols) {
  auto e = [&](int i, int j) -> const Poly& { return c[rows[i]][cols[j]]; };
  return e(0, 0) * (e(1, 1) * e(2, 2) - e(1, 2) * e(2, 1)) -
         e(0, 1) * (e(1, 0) * e(2, 2) - e(1, 2) * e(2, 0)) +
         e(0, 2) * (e(1, 0) * e(2, 1) - e(1, 1) * e(2, 0));
}

// The m + 2 dual equations (A), (B) j=2,3, (C) i=2..m over the first
// three transmitters of f, embedded in an nvars-dimensional space.
std::vector<Poly> dual_equations(const Eigen::MatrixXd& f, int nvars) {
  const int m = static_cast<int>(f.rows());
  const Poly det = det_H_poly(nvars);
  const PolyMatrix adj = adj_H_poly(nvars);
  const PolyMatrix H = h_poly(nvars);
  const Poly b1 = Poly::variable(nvars, kB1);
  const Poly b2 = Poly::variable(nvars, kB2);
  auto dsq = [&](int i, int j) { return squared_distance_poly(f(i, j), kOffsetBase + j, nvars); };

  std::vector<Poly> eqs;
  eqs.reserve(m + 2);

  // (A) d11^2 det(H) - b^T adj(H) b = 0
  const Poly b_adj_b = b1 * b1 * adj[0][0] + Complex{2.0, 0.0} * (b1 * b2 * adj[0][1]) +
                       b2 * b2 * adj[1][1];
  eqs.push_back(dsq(0, 0) * det - b_adj_b);

  // (B) (d1j^2 - d11^2) det(H) - 1/4 e^T adj(H) e + b^T adj(H) e = 0, j = 2,3
  for (int j = 1; j <= 2; ++j) {
    const int a = j - 1;  // basis index of e_{j-1}
    const Poly b_adj_e = b1 * adj[0][a] + b2 * adj[1][a];
    eqs.push_back((dsq(0, j) - dsq(0, 0)) * det - Complex{0.25, 0.0} * adj[a][a] + b_adj_e);
  }

  // (C) (di1^2 - d11^2) - Dt_i H Dt_i^T + 2 b^T Dt_i^T = 0, i = 2..m
  const PolyMatrix Dt = compaction_sym(f.leftCols(3), nvars, {kOffsetBase, kOffsetBase + 1,
                                                              kOffsetBase + 2});
  for (int i = 1; i < m; ++i) {
    const Poly& d1 = Dt[i - 1][0];
    const Poly& d2 = Dt[i - 1][1];
    const Poly quad = d1 * d1 * H[0][0] + Complex{2.0, 0.0} * (d1 * d2 * H[0][1]) +
                      d2 * d2 * H[1][1];
    const Poly lin = Complex{2.0, 0.0} * (b1 * d1 + b2 * d2);
    eqs.push_back((dsq(i, 0) - dsq(0, 0)) - quad + lin);
  }
  return eqs;
}

}  // namespace

PseudorangeMatrix NetworkGroundTruth::pseudoranges() const {
  Eigen::MatrixXd f(m(), n());
  for (int i = 0; i < m(); ++i)
    for (int j = 0; j < n(); ++j)
      f(i, j) = (receivers.row(i) - transmitters.row(j)).norm() + offsets[j];
  return PseudorangeMatrix(std::move(f));
}

int excess_constraint(int m, int n) {
  if (m < 1 || n < 1) throw std::invalid_argument("excess_constraint: m, n must be >= 1");
  return m * n - 2 * m - 3 * n + 3;
}

ProblemClass classify_configuration(int m, int n) {
  const int e = excess_constraint(m, n);
  if (e < 0) return ProblemClass::underdetermined;
  if (e == 0) return ProblemClass::minimal;
  return ProblemClass::subminimal;
}

int dual_variable_count(DualSystemKind kind) {
  return kind == DualSystemKind::k6r3s ? 8 : 9;
}

Poly squared_distance_poly(double f_ij, int offset_var, int nvars) {
  if (offset_var < 0 || offset_var >= nvars)
    throw std::out_of_range("squared_distance_poly: offset variable out of range");
  std::vector<int> e1(nvars, 0), e2(nvars, 0);
  e1[offset_var] = 1;
  e2[offset_var] = 2;
  return Poly(nvars, {Term{{f_ij * f_ij, 0.0}, std::vector<int>(nvars, 0)},
                      Term{{-2.0 * f_ij, 0.0}, std::move(e1)},
                      Term{{1.0, 0.0}, std::move(e2)}});
}

PolyMatrix compaction_matrix(const PseudorangeMatrix& pr) {
  if (pr.m() < 2 || pr.n() < 2)
    throw std::invalid_argument("compaction_matrix: need at least 2 receivers and 2 transmitters");
  const int nvars = kOffsetBase + pr.n();
  std::vector<int> offset_var(pr.n());
  for (int j = 0; j < pr.n(); ++j) offset_var[j] = kOffsetBase + j;
  return compaction_sym(pr.f, nvars, offset_var);
}

Eigen::MatrixXd numeric_compaction(const Eigen::MatrixXd& d2) {
  const int m = static_cast<int>(d2.rows());
  const int n = static_cast<int>(d2.cols());
  Eigen::MatrixXd out(m - 1, n - 1);
  for (int i = 0; i < m - 1; ++i)
    for (int j = 0; j < n - 1; ++j)
      out(i, j) = d2(i + 1, j + 1) - d2(0, j + 1) - d2(i + 1, 0) + d2(0, 0);
  return out;
}

std::vector<Poly> rank_minor_constraints(const PolyMatrix& compaction, int m, int n) {
  if (m < 4 || n < 4)
    throw std::invalid_argument("rank_minor_constraints: requires m >= 4 and n >= 4");
  if (static_cast<int>(compaction.size()) != m - 1 ||
      static_cast<int>(compaction.front().size()) != n - 1)
    throw std::invalid_argument("rank_minor_constraints: compaction has wrong dimensions");
  std::vector<Poly> minors;
  minors.reserve(static_cast<std::size_t>(m - 3) * (n - 3));
  for (int k = 2; k < m - 1; ++k)
    for (int l = 2; l < n - 1; ++l)
      minors.push_back(det3(compaction, {0, 1, k}, {0, 1, l}));
  return minors;
}

PolySystem build_dual_system(const PseudorangeMatrix& pr, DualSystemKind kind) {
  const int nvars = dual_variable_count(kind);
  if (kind == DualSystemKind::k6r3s) {
    if (pr.m() != 6 || pr.n() != 3)
      throw std::invalid_argument("build_dual_system: 6r3s requires a 6x3 pseudorange matrix");
    PolySystem sys(dual_equations(pr.f, nvars));
    return sys;
  }
  if (pr.m() != 5 || pr.n() != 4)
    throw std::invalid_argument("build_dual_system: 5r4s requires a 5x4 pseudorange matrix");
  std::vector<Poly> eqs = dual_equations(pr.f.leftCols(3), nvars);
  const PolyMatrix full = compaction_matrix(pr);
  for (Poly& minor : rank_minor_constraints(full, pr.m(), pr.n())) eqs.push_back(std::move(minor));
  return PolySystem(std::move(eqs));
}

Calibration upgrade_solution(const DualSolution& ds, const PseudorangeMatrix& pr) {
  if (pr.n() != 3)
    throw std::invalid_argument("upgrade_solution: pseudorange matrix must have 3 transmitters");
  if (ds.offsets.size() != 3)
    throw std::invalid_argument("upgrade_solution: dual solution must carry 3 offsets");
  if (!ds.positive_definite())
    throw InfeasibleDualError("upgrade_solution: H is not positive definite");

  const int m = pr.m();

  // C = H^{-1} factored as C = L^T L with L upper triangular, positive
  // diagonal, so that H = (L^T L)^{-1}.
  const double det = ds.det_H();
  const double c11 = ds.h22 / det;
  const double c12 = -ds.h12 / det;
  const double c22 = ds.h11 / det;
  if (!(c11 > 0.0)) throw InfeasibleDualError("upgrade_solution: Cholesky failed");
  const double u11 = std::sqrt(c11);
  const double u12 = c12 / u11;
  const double schur = c22 - u12 * u12;
  if (!(schur > 0.0)) throw InfeasibleDualError("upgrade_solution: Cholesky failed");
  const double u22 = std::sqrt(schur);

  // Squared distances at the recovered offsets, then the compaction rows.
  Eigen::MatrixXd d2(m, 3);
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < 3; ++j) {
      const double d = pr.f(i, j) - ds.offsets[j];
      d2(i, j) = d * d;
    }
  const Eigen::MatrixXd Dt = numeric_compaction(d2);  // (m-1) x 2

  Calibration cal;
  cal.receivers.resize(m, 2);
  cal.transmitters.resize(3, 2);
  cal.offsets = ds.offsets;

  cal.receivers.row(0).setZero();
  // r_i solves L^T r = Dt_{i-1}^T (L^T is lower triangular).
  for (int i = 1; i < m; ++i) {
    const double rx = Dt(i - 1, 0) / u11;
    const double ry = (Dt(i - 1, 1) - u12 * rx) / u22;
    cal.receivers.row(i) << rx, ry;
  }
  // s_1 = L b, s_{j+1} = L(-e_j/2 + b).
  auto apply_L = [&](const Vec2& v) { return Vec2(u11 * v[0] + u12 * v[1], u22 * v[1]); };
  cal.transmitters.row(0) = apply_L(ds.b).transpose();
  cal.transmitters.row(1) = apply_L(Vec2(ds.b[0] - 0.5, ds.b[1])).transpose();
  cal.transmitters.row(2) = apply_L(Vec2(ds.b[0], ds.b[1] - 0.5)).transpose();

  // Rotate about the origin so receiver 2 lands on the positive x-axis;
  // distances are unchanged and the gauge fields become exact.
  const Vec2 r2 = cal.receivers.row(1).transpose();
  const double r2n = r2.norm();
  if (r2n > 0.0) {
    const double c = r2[0] / r2n;
    const double s = r2[1] / r2n;
    Mat2 rot;
    rot << c, s, -s, c;
    cal.receivers = (cal.receivers * rot.transpose()).eval();
    cal.transmitters = (cal.transmitters * rot.transpose()).eval();
    cal.receivers.row(0).setZero();
    cal.receivers.row(1) << r2n, 0.0;
  }

  cal.primal_residual = primal_residual(cal, pr);
  return cal;
}

double primal_residual(const Calibration& c, const PseudorangeMatrix& pr) {
  if (c.m() != pr.m() || c.n() != pr.n())
    throw std::invalid_argument("primal_residual: calibration and pseudoranges disagree on size");
  double worst = 0.0;
  for (int i = 0; i < pr.m(); ++i)
    for (int j = 0; j < pr.n(); ++j) {
      const double dist2 = (c.receivers.row(i) - c.transmitters.row(j)).squaredNorm();
      const double rhs = pr.f(i, j) - c.offsets[j];
      worst = std::max(worst, std::abs(dist2 - rhs * rhs));
    }
  return worst;
}

std::optional<DualSolution> is_feasible(const CVector& x, DualSystemKind kind,
                                        double reality_tol) {
  const int nvars = dual_variable_count(kind);
  if (x.size() != nvars) throw std::invalid_argument("is_feasible: wrong dual variable layout");
  for (int i = 0; i < nvars; ++i)
    if (std::abs(x[i].imag()) >= reality_tol) return std::nullopt;

  DualSolution ds;
  ds.h11 = x[kH11].real();
  ds.h12 = x[kH12].real();
  ds.h22 = x[kH22].real();
  ds.b = Vec2(x[kB1].real(), x[kB2].real());
  ds.offsets.resize(nvars - kOffsetBase);
  for (int j = 0; j < ds.offsets.size(); ++j) ds.offsets[j] = x[kOffsetBase + j].real();

  if (!ds.positive_definite()) return std::nullopt;
  return ds;
}

}  // namespace tdoacal
