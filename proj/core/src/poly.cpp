#include "tdoacal/poly.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <numeric>
#include <stdexcept>

namespace tdoacal {

namespace {

Complex pow_int(Complex base, int exp) {
  Complex result{1.0, 0.0};
  while (exp > 0) {
    if (exp & 1) result *= base;
    base *= base;
    exp >>= 1;
  }
  return result;
}

// Integer-valued doubles print without a fractional part; everything else
// round-trips with %.17g. Keeps serialized polynomials byte-stable.
std::string format_double(double x) {
  if (x == 0.0) return "0";
  if (std::abs(x) < 9.007199254740992e15 && x == std::floor(x)) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.0f", x);
    return buf;
  }
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", x);
  return buf;
}

std::string format_coeff(const Complex& c) {
  if (c.imag() == 0.0) return format_double(c.real());
  std::string s = "(" + format_double(c.real());
  s += (c.imag() < 0.0 || std::signbit(c.imag())) ? "-" : "+";
  s += format_double(std::abs(c.imag()));
  s += "i)";
  return s;
}

}  // namespace

int Term::degree() const {
  return std::accumulate(exponents.begin(), exponents.end(), 0);
}

bool graded_lex_greater(const Term& a, const Term& b) {
  const int da = a.degree();
  const int db = b.degree();
  if (da != db) return da > db;
  return a.exponents > b.exponents;
}

Poly::Poly(int nvars) : nvars_(nvars) {
  if (nvars < 0) throw std::invalid_argument("Poly: nvars must be >= 0");
}

Poly::Poly(int nvars, std::vector<Term> terms) : nvars_(nvars), terms_(std::move(terms)) {
  if (nvars < 0) throw std::invalid_argument("Poly: nvars must be >= 0");
  for (const Term& t : terms_) {
    if (static_cast<int>(t.exponents.size()) != nvars_)
      throw std::invalid_argument("Poly: exponent vector length != nvars");
    for (int e : t.exponents)
      if (e < 0) throw std::invalid_argument("Poly: negative exponent");
  }
  canonicalize();
}

Poly Poly::constant(int nvars, Complex value) {
  return Poly(nvars, {Term{value, std::vector<int>(nvars, 0)}});
}

Poly Poly::variable(int nvars, int index) {
  if (index < 0 || index >= nvars) throw std::out_of_range("Poly::variable: index out of range");
  std::vector<int> e(nvars, 0);
  e[index] = 1;
  return Poly(nvars, {Term{Complex{1.0, 0.0}, std::move(e)}});
}

Poly Poly::monomial(int nvars, Complex coeff, std::vector<int> exponents) {
  return Poly(nvars, {Term{coeff, std::move(exponents)}});
}

void Poly::canonicalize() {
  std::sort(terms_.begin(), terms_.end(), graded_lex_greater);
  std::vector<Term> merged;
  merged.reserve(terms_.size());
  for (Term& t : terms_) {
    if (!merged.empty() && merged.back().exponents == t.exponents) {
      merged.back().coeff += t.coeff;
    } else {
      merged.push_back(std::move(t));
    }
  }
  std::erase_if(merged, [](const Term& t) { return t.coeff == Complex{0.0, 0.0}; });
  terms_ = std::move(merged);
}

int Poly::total_degree() const {
  int d = 0;
  for (const Term& t : terms_) d = std::max(d, t.degree());
  return d;
}

Complex Poly::eval(std::span<const Complex> point) const {
  if (static_cast<int>(point.size()) != nvars_)
    throw std::invalid_argument("Poly::eval: point dimension != nvars");
  Complex sum{0.0, 0.0};
  for (const Term& t : terms_) {
    Complex prod = t.coeff;
    for (int v = 0; v < nvars_; ++v) {
      if (t.exponents[v] != 0) prod *= pow_int(point[v], t.exponents[v]);
    }
    sum += prod;
  }
  return sum;
}

Poly Poly::derivative(int var_index) const {
  if (var_index < 0 || var_index >= nvars_)
    throw std::out_of_range("Poly::derivative: variable index out of range");
  std::vector<Term> out;
  out.reserve(terms_.size());
  for (const Term& t : terms_) {
    const int e = t.exponents[var_index];
    if (e == 0) continue;
    Term d = t;
    d.coeff *= static_cast<double>(e);
    d.exponents[var_index] = e - 1;
    out.push_back(std::move(d));
  }
  return Poly(nvars_, std::move(out));
}

Poly Poly::operator-() const {
  Poly out = *this;
  for (Term& t : out.terms_) t.coeff = -t.coeff;
  return out;
}

Poly& Poly::operator+=(const Poly& rhs) {
  if (nvars_ != rhs.nvars_) throw std::invalid_argument("Poly: variable-count mismatch");
  terms_.insert(terms_.end(), rhs.terms_.begin(), rhs.terms_.end());
  canonicalize();
  return *this;
}

Poly& Poly::operator-=(const Poly& rhs) {
  return *this += -rhs;
}

Poly operator*(const Poly& lhs, const Poly& rhs) {
  if (lhs.nvars_ != rhs.nvars_) throw std::invalid_argument("Poly: variable-count mismatch");
  std::vector<Term> prod;
  prod.reserve(lhs.terms_.size() * rhs.terms_.size());
  for (const Term& a : lhs.terms_) {
    for (const Term& b : rhs.terms_) {
      Term t;
      t.coeff = a.coeff * b.coeff;
      t.exponents.resize(a.exponents.size());
      for (std::size_t v = 0; v < a.exponents.size(); ++v)
        t.exponents[v] = a.exponents[v] + b.exponents[v];
      prod.push_back(std::move(t));
    }
  }
  return Poly(lhs.nvars_, std::move(prod));
}

Poly operator*(Complex scalar, const Poly& p) {
  Poly out = p;
  for (Term& t : out.terms_) t.coeff *= scalar;
  out.canonicalize();
  return out;
}

std::string Poly::to_string() const {
  if (terms_.empty()) return "0";
  std::string s;
  bool first = true;
  for (const Term& t : terms_) {
    std::string mono;
    for (int v = 0; v < nvars_; ++v) {
      const int e = t.exponents[v];
      if (e == 0) continue;
      if (!mono.empty()) mono += "*";
      mono += "x" + std::to_string(v);
      if (e > 1) mono += "^" + std::to_string(e);
    }
    const bool real_coeff = (t.coeff.imag() == 0.0);
    std::string coeff_str;
    bool negative = false;
    if (real_coeff) {
      double re = t.coeff.real();
      negative = re < 0.0;
      const double mag = std::abs(re);
      if (mono.empty()) {
        coeff_str = format_double(mag);
      } else if (mag == 1.0) {
        coeff_str = mono;
      } else {
        coeff_str = format_double(mag) + "*" + mono;
      }
    } else {
      coeff_str = format_coeff(t.coeff);
      if (!mono.empty()) coeff_str += "*" + mono;
    }
    if (first) {
      s += negative ? "-" : "";
      s += coeff_str;
      first = false;
    } else {
      s += negative ? " - " : " + ";
      s += coeff_str;
    }
  }
  return s;
}

PolySystem::PolySystem(std::vector<Poly> ps) : polys(std::move(ps)) {
  if (!polys.empty()) {
    nvars = polys.front().nvars();
    for (const Poly& p : polys)
      if (p.nvars() != nvars)
        throw std::invalid_argument("PolySystem: member polynomials disagree on nvars");
  }
}

CVector PolySystem::eval(std::span<const Complex> point) const {
  CVector out(size());
  for (int i = 0; i < size(); ++i) out[i] = polys[i].eval(point);
  return out;
}

CVector PolySystem::eval(const CVector& point) const {
  return eval(std::span<const Complex>(point.data(), point.size()));
}

CMatrix jacobian(const PolySystem& sys, const CVector& point) {
  if (!sys.is_square()) throw std::invalid_argument("jacobian: system must be square");
  const int n = sys.nvars;
  CMatrix J(n, n);
  const std::span<const Complex> pt(point.data(), point.size());
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) J(i, j) = sys.polys[i].derivative(j).eval(pt);
  return J;
}

}  // namespace tdoacal
