#pragma once

#include <complex>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

namespace tdoacal {

using Complex = std::complex<double>;
using CVector = Eigen::VectorXcd;
using CMatrix = Eigen::MatrixXcd;

/// One monomial term: coeff * prod_i x_i^exponents[i].
struct Term {
  Complex coeff;
  std::vector<int> exponents;  // length == nvars of the owning Poly

  int degree() const;
  bool operator==(const Term&) const = default;
};

/// Sparse multivariate polynomial over complex coefficients.
///
/// Always kept in canonical form: terms sorted in descending graded
/// lexicographic order, no duplicate exponent vectors, no zero
/// coefficients. Immutable value semantics; all operations return new
/// polynomials.
class Poly {
 public:
  Poly() = default;  // zero polynomial in zero variables
  explicit Poly(int nvars);
  Poly(int nvars, std::vector<Term> terms);

  static Poly constant(int nvars, Complex value);
  static Poly variable(int nvars, int index);
  static Poly monomial(int nvars, Complex coeff, std::vector<int> exponents);

  int nvars() const { return nvars_; }
  bool is_zero() const { return terms_.empty(); }
  const std::vector<Term>& terms() const { return terms_; }

  /// Max over terms of the sum of exponents; 0 for the zero polynomial.
  int total_degree() const;

  Complex eval(std::span<const Complex> point) const;

  /// Formal partial derivative with respect to variable var_index.
  Poly derivative(int var_index) const;

  Poly operator-() const;
  Poly& operator+=(const Poly& rhs);
  Poly& operator-=(const Poly& rhs);
  friend Poly operator+(Poly lhs, const Poly& rhs) { return lhs += rhs; }
  friend Poly operator-(Poly lhs, const Poly& rhs) { return lhs -= rhs; }
  friend Poly operator*(const Poly& lhs, const Poly& rhs);
  friend Poly operator*(Complex scalar, const Poly& p);

  bool operator==(const Poly&) const = default;

  /// Human-readable form, e.g. "3*x0^2*x1 + (0-1i)*x2". Stable across
  /// runs: canonical term order plus fixed number formatting.
  std::string to_string() const;

 private:
  int nvars_ = 0;
  std::vector<Term> terms_;

  void canonicalize();
};

/// A list of polynomials sharing one variable set.
struct PolySystem {
  std::vector<Poly> polys;
  int nvars = 0;

  PolySystem() = default;
  PolySystem(std::vector<Poly> ps);  // deduces and checks nvars

  int size() const { return static_cast<int>(polys.size()); }
  bool is_square() const { return size() == nvars && nvars > 0; }

  CVector eval(std::span<const Complex> point) const;
  CVector eval(const CVector& point) const;
};

/// Jacobian matrix J(i,j) = d poly_i / d x_j evaluated at point.
/// The system must be square.
CMatrix jacobian(const PolySystem& sys, const CVector& point);

/// Graded-lexicographic term comparison used for the canonical order
/// (true when a precedes b, i.e. a is "larger").
bool graded_lex_greater(const Term& a, const Term& b);

inline int total_degree(const Poly& p) { return p.total_degree(); }

}  // namespace tdoacal
