#include "tdoacal/homotopy.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <numbers>
#include <random>
#include <stdexcept>
#include <thread>

namespace tdoacal {

namespace {

constexpr double kDedupTol = 1e-8;
constexpr int kSuccessesBeforeGrowth = 3;
constexpr double kStepGrowth = 2.0;
constexpr double kMaxStep = 0.25;
constexpr double kPivotFloor = 1e-280;

double inf_norm(const CVector& v) {
  double m = 0.0;
  for (Eigen::Index i = 0; i < v.size(); ++i) m = std::max(m, std::abs(v[i]));
  return m;
}

// In-place partial-pivot LU solve of A x = b for small dense complex
// systems; A is n*n row-major and is destroyed. Returns false on a
// (numerically) singular pivot.
bool lu_solve(Complex* A, Complex* b, int n) {
  for (int k = 0; k < n; ++k) {
    int piv = k;
    double best = std::norm(A[k * n + k]);
    for (int i = k + 1; i < n; ++i) {
      const double mag = std::norm(A[i * n + k]);
      if (mag > best) {
        best = mag;
        piv = i;
      }
    }
    if (!(best > kPivotFloor)) return false;
    if (piv != k) {
      for (int j = k; j < n; ++j) std::swap(A[k * n + j], A[piv * n + j]);
      std::swap(b[k], b[piv]);
    }
    const Complex inv = Complex{1.0, 0.0} / A[k * n + k];
    for (int i = k + 1; i < n; ++i) {
      const Complex m = A[i * n + k] * inv;
      if (m == Complex{0.0, 0.0}) continue;
      for (int j = k + 1; j < n; ++j) A[i * n + j] -= m * A[k * n + j];
      b[i] -= m * b[k];
    }
  }
  for (int i = n - 1; i >= 0; --i) {
    Complex s = b[i];
    for (int j = i + 1; j < n; ++j) s -= A[i * n + j] * b[j];
    b[i] = s / A[i * n + i];
  }
  return true;
}

// Homogenization of p to total degree target_degree with the extra
// variable appended last.
Poly homogenize(const Poly& p, int target_degree) {
  const int n = p.nvars();
  std::vector<Term> terms;
  terms.reserve(p.terms().size());
  for (const Term& t : p.terms()) {
    Term ht;
    ht.coeff = t.coeff;
    ht.exponents = t.exponents;
    ht.exponents.push_back(target_degree - t.degree());
    terms.push_back(std::move(ht));
  }
  return Poly(n + 1, std::move(terms));
}

// Flattened evaluator of the homotopy rows. Each merged term carries the
// target coefficient cf and the gamma-premultiplied start coefficient cg,
// so one pass over the support accumulates the F and gamma*G parts; any
// t-slice H = (1-t)F + t(gamma G) and the t-derivative gamma G - F then
// cost a couple of flops per entry.
//
// Tracking runs either on the affine system itself or on its
// homogenization with a generic linear patch c.z = 1 appended (one extra
// variable): the projective chart keeps paths to infinity bounded, which
// is what solve_system uses. The patch row stores identical cf and cg so
// it is t-independent.
struct CompiledHomotopy {
  struct Slice {
    std::uint32_t begin = 0;
    std::uint32_t end = 0;
  };

  int n = 0;         // tracked dimension (affine nvars, or nvars+1)
  int affine_n = 0;  // original variable count
  bool projective = false;
  int max_exp = 0;
  std::vector<Slice> eq;    // n value slices
  std::vector<Slice> jac;   // n*n slices, row-major (equation, variable)
  std::vector<Complex> cf, cg;
  std::vector<Slice> factors;  // per term
  std::vector<std::uint8_t> fac_var;
  std::vector<std::uint8_t> fac_exp;

  static CompiledHomotopy affine(const Homotopy& h) {
    CompiledHomotopy c;
    c.n = h.target.nvars;
    c.affine_n = c.n;
    c.projective = false;
    std::vector<Poly> f_rows, g_rows;
    for (int i = 0; i < c.n; ++i) {
      f_rows.push_back(h.target.polys[i]);
      g_rows.push_back(h.gamma * h.start.polys[i]);
    }
    c.build(f_rows, g_rows);
    return c;
  }

  static CompiledHomotopy projective_chart(const Homotopy& h, const CVector& patch) {
    CompiledHomotopy c;
    c.affine_n = h.target.nvars;
    c.n = c.affine_n + 1;
    c.projective = true;
    std::vector<Poly> f_rows, g_rows;
    for (int i = 0; i < c.affine_n; ++i) {
      const int d = std::max(h.target.polys[i].total_degree(),
                             h.start.polys[i].total_degree());
      f_rows.push_back(homogenize(h.target.polys[i], d));
      g_rows.push_back(homogenize(h.gamma * h.start.polys[i], d));
    }
    std::vector<Term> patch_terms;
    for (int v = 0; v < c.n; ++v) {
      std::vector<int> e(c.n, 0);
      e[v] = 1;
      patch_terms.push_back(Term{patch[v], std::move(e)});
    }
    patch_terms.push_back(Term{{-1.0, 0.0}, std::vector<int>(c.n, 0)});
    const Poly patch_poly(c.n, std::move(patch_terms));
    f_rows.push_back(patch_poly);
    g_rows.push_back(patch_poly);  // identical parts make the row t-independent
    c.build(f_rows, g_rows);
    return c;
  }

  void build(const std::vector<Poly>& f_rows, const std::vector<Poly>& g_rows) {
    struct PairTerm {
      std::vector<int> exps;
      Complex cf{0.0, 0.0}, cg{0.0, 0.0};
    };
    auto merge = [](const Poly& f, const Poly& g) {
      std::vector<PairTerm> merged;
      auto slot = [&merged](const std::vector<int>& e) -> PairTerm& {
        for (PairTerm& pt : merged)
          if (pt.exps == e) return pt;
        merged.push_back(PairTerm{e, {0.0, 0.0}, {0.0, 0.0}});
        return merged.back();
      };
      for (const Term& t : f.terms()) slot(t.exponents).cf = t.coeff;
      for (const Term& t : g.terms()) slot(t.exponents).cg = t.coeff;
      return merged;
    };
    auto push = [this](const std::vector<PairTerm>& merged) {
      Slice s;
      s.begin = static_cast<std::uint32_t>(cf.size());
      for (const PairTerm& pt : merged) {
        cf.push_back(pt.cf);
        cg.push_back(pt.cg);
        Slice fs;
        fs.begin = static_cast<std::uint32_t>(fac_var.size());
        for (int v = 0; v < n; ++v) {
          if (pt.exps[v] == 0) continue;
          fac_var.push_back(static_cast<std::uint8_t>(v));
          fac_exp.push_back(static_cast<std::uint8_t>(pt.exps[v]));
          max_exp = std::max(max_exp, pt.exps[v]);
        }
        fs.end = static_cast<std::uint32_t>(fac_var.size());
        factors.push_back(fs);
      }
      s.end = static_cast<std::uint32_t>(cf.size());
      return s;
    };

    for (int i = 0; i < n; ++i) eq.push_back(push(merge(f_rows[i], g_rows[i])));
    for (int i = 0; i < n; ++i)
      for (int v = 0; v < n; ++v)
        jac.push_back(push(merge(f_rows[i].derivative(v), g_rows[i].derivative(v))));
  }

  struct Workspace {
    std::vector<Complex> powers;
    std::vector<Complex> hval, htval;  // per equation at current (x, t)
    std::vector<Complex> jh;           // n*n fused Jacobian (kept intact)
    std::vector<Complex> lu;           // scratch the LU factorization destroys
    std::vector<Complex> rhs;
    std::vector<Complex> x, x_saved;
    bool jac_valid = false;  // jh approximates J at the accepted (x, t)
  };

  Workspace make_workspace() const {
    Workspace w;
    w.powers.resize(static_cast<std::size_t>(n) * (max_exp + 1));
    w.hval.resize(n);
    w.htval.resize(n);
    w.jh.resize(static_cast<std::size_t>(n) * n);
    w.lu.resize(static_cast<std::size_t>(n) * n);
    w.rhs.resize(n);
    w.x.resize(n);
    w.x_saved.resize(n);
    return w;
  }

  void fill_powers(const Complex* x, Workspace& w) const {
    const int stride = max_exp + 1;
    for (int v = 0; v < n; ++v) {
      Complex* p = w.powers.data() + static_cast<std::size_t>(v) * stride;
      p[0] = Complex{1.0, 0.0};
      for (int e = 1; e <= max_exp; ++e) p[e] = p[e - 1] * x[v];
    }
  }

  void eval_slice(const Slice& s, const Workspace& w, Complex& f_out, Complex& g_out) const {
    const int stride = max_exp + 1;
    Complex fa{0.0, 0.0}, ga{0.0, 0.0};
    for (std::uint32_t t = s.begin; t < s.end; ++t) {
      Complex prod{1.0, 0.0};
      for (std::uint32_t f = factors[t].begin; f < factors[t].end; ++f)
        prod *= w.powers[static_cast<std::size_t>(fac_var[f]) * stride + fac_exp[f]];
      fa += cf[t] * prod;
      ga += cg[t] * prod;
    }
    f_out = fa;
    g_out = ga;
  }

  // H and Ht at the filled powers and slice time t.
  void eval_values(double t, Workspace& w) const {
    const double omt = 1.0 - t;
    for (int i = 0; i < n; ++i) {
      Complex fa, ga;
      eval_slice(eq[i], w, fa, ga);
      w.hval[i] = omt * fa + t * ga;
      w.htval[i] = ga - fa;
    }
  }

  void eval_jacobian(double t, Workspace& w) const {
    const double omt = 1.0 - t;
    for (int i = 0; i < n * n; ++i) {
      Complex fa, ga;
      eval_slice(jac[i], w, fa, ga);
      w.jh[i] = omt * fa + t * ga;
    }
  }

  // Target system (t = 0) value and Jacobian, for endpoint polishing.
  void eval_target(Workspace& w) const {
    for (int i = 0; i < n; ++i) {
      Complex fa, ga;
      eval_slice(eq[i], w, fa, ga);
      w.hval[i] = fa;
    }
  }
  void eval_target_jacobian(Workspace& w) const {
    for (int i = 0; i < n * n; ++i) {
      Complex fa, ga;
      eval_slice(jac[i], w, fa, ga);
      w.jh[i] = fa;
    }
  }

  double value_norm(const Workspace& w) const {
    double m = 0.0;
    for (int i = 0; i < n; ++i) m = std::max(m, std::abs(w.hval[i]));
    return m;
  }

  // Infinity norm of the affine point represented by w.x.
  double affine_norm(const Workspace& w) const {
    double num = 0.0;
    for (int i = 0; i < affine_n; ++i) num = std::max(num, std::abs(w.x[i]));
    if (!projective) return num;
    const double denom = std::abs(w.x[affine_n]);
    if (denom == 0.0) return std::numeric_limits<double>::infinity();
    return num / denom;
  }
};

// Predictor-corrector loop shared by track_path (affine chart) and
// solve_system (projective chart). polish_target supplies the affine
// target system used for endpoint refinement.
struct TrackerCore {
  const CompiledHomotopy& sys;
  const CompiledHomotopy& polish_target;  // affine chart of the same homotopy
  const TrackOptions& opts;
  CVector patch;  // projective chart only

  Complex patch_coeff(int i) const { return patch[i]; }

  // One Newton correction sweep at fixed t. Success is a step-size test:
  // the last correction must be small relative to the iterate. On success
  // w.jh still holds the Jacobian at (second-to-last iterate, t), close
  // enough for the next Euler prediction.
  bool correct(double t, CompiledHomotopy::Workspace& w) const {
    const int n = sys.n;
    for (int it = 0; it < opts.newton_max_iters; ++it) {
      sys.fill_powers(w.x.data(), w);
      sys.eval_values(t, w);
      sys.eval_jacobian(t, w);
      std::copy(w.jh.begin(), w.jh.end(), w.lu.begin());
      for (int i = 0; i < n; ++i) w.rhs[i] = w.hval[i];
      if (!lu_solve(w.lu.data(), w.rhs.data(), n)) return false;
      double delta = 0.0, xmag = 0.0;
      for (int i = 0; i < n; ++i) {
        w.x[i] -= w.rhs[i];
        delta = std::max(delta, std::abs(w.rhs[i]));
        xmag = std::max(xmag, std::abs(w.x[i]));
      }
      if (!std::isfinite(delta) || !std::isfinite(xmag)) return false;
      if (delta <= opts.newton_tol * std::max(1.0, xmag)) {
        w.jac_valid = true;
        return true;
      }
    }
    return false;
  }

  // Newton polish of the affine target system; keeps the best iterate.
  bool polish(std::vector<Complex>& x, double& residual_out) const {
    const CompiledHomotopy& tgt = polish_target;
    CompiledHomotopy::Workspace w = tgt.make_workspace();
    w.x = x;
    tgt.fill_powers(w.x.data(), w);
    tgt.eval_target(w);
    double best_r = tgt.value_norm(w);
    std::vector<Complex> best = w.x;
    for (int it = 0; it < 12 && best_r >= 1e-14; ++it) {
      tgt.eval_target_jacobian(w);
      std::copy(w.jh.begin(), w.jh.end(), w.lu.begin());
      for (int i = 0; i < tgt.n; ++i) w.rhs[i] = w.hval[i];
      if (!lu_solve(w.lu.data(), w.rhs.data(), tgt.n)) break;
      for (int i = 0; i < tgt.n; ++i) w.x[i] -= w.rhs[i];
      tgt.fill_powers(w.x.data(), w);
      tgt.eval_target(w);
      const double r = tgt.value_norm(w);
      if (!(r < best_r)) break;
      best_r = r;
      best = w.x;
    }
    x = best;
    residual_out = best_r;
    return best_r <= opts.endpoint_tol;
  }

  PathResult track(const CVector& x0, CompiledHomotopy::Workspace& w) const {
    const int n = sys.n;
    PathResult res;
    res.endpoint = x0;

    if (sys.projective) {
      // Lift onto the patch: z = (x, 1) / (c . (x, 1)).
      Complex denom{0.0, 0.0};
      for (int i = 0; i < sys.affine_n; ++i) denom += patch_coeff(i) * x0[i];
      denom += patch_coeff(sys.affine_n);
      if (std::abs(denom) < 1e-12) {
        res.status = PathStatus::singular;
        return res;
      }
      const Complex s = Complex{1.0, 0.0} / denom;
      for (int i = 0; i < sys.affine_n; ++i) w.x[i] = s * x0[i];
      w.x[sys.affine_n] = s;
    } else {
      for (int i = 0; i < n; ++i) w.x[i] = x0[i];
    }
    w.jac_valid = false;

    // Precondition: x0 must solve the start system. H(., 1) is gamma*G
    // plus (in the projective chart) the exactly-satisfied patch row.
    sys.fill_powers(w.x.data(), w);
    sys.eval_values(1.0, w);
    {
      const double g0 = sys.value_norm(w);
      if (!(g0 < opts.newton_tol)) {
        res.status = PathStatus::singular;
        res.steps_taken = 0;
        res.final_residual = g0;
        return res;
      }
    }

    double t = 1.0;
    double dt = opts.initial_step;
    const double dt_cap = std::max(opts.initial_step, kMaxStep);
    int successes = 0;

    while (t > 0.0) {
      if (res.steps_taken >= opts.max_steps) {
        res.status = PathStatus::max_steps;
        return res;
      }
      ++res.steps_taken;
      const double step = std::min(dt, t);
      const double t_next = (step >= t) ? 0.0 : t - step;
      for (int i = 0; i < n; ++i) w.x_saved[i] = w.x[i];

      // Euler predictor on J dx/dt = -Ht. The Jacobian left over from the
      // accepting corrector sweep is reused when available (same x up to
      // the converged correction, same t).
      sys.fill_powers(w.x.data(), w);
      sys.eval_values(t, w);
      if (!w.jac_valid) sys.eval_jacobian(t, w);
      std::copy(w.jh.begin(), w.jh.end(), w.lu.begin());
      for (int i = 0; i < n; ++i) w.rhs[i] = w.htval[i];
      bool ok = lu_solve(w.lu.data(), w.rhs.data(), n);
      if (ok) {
        for (int i = 0; i < n; ++i) w.x[i] += step * w.rhs[i];
        w.jac_valid = false;
        ok = correct(t_next, w);
      } else {
        w.jac_valid = false;
      }

      if (ok) {
        t = t_next;
        if (sys.affine_norm(w) > opts.divergence_norm) {
          res.status = PathStatus::diverged;
          return res;
        }
        if (++successes >= kSuccessesBeforeGrowth) {
          dt = std::min(dt * kStepGrowth, dt_cap);
          successes = 0;
        }
      } else {
        for (int i = 0; i < n; ++i) w.x[i] = w.x_saved[i];
        w.jac_valid = false;
        successes = 0;
        dt *= 0.5;
        if (dt < opts.min_step) {
          res.status = PathStatus::singular;
          return res;
        }
      }
    }

    // Dehomogenize and polish on the affine target system.
    std::vector<Complex> x(sys.affine_n);
    if (sys.projective) {
      if (sys.affine_norm(w) > opts.divergence_norm) {
        res.status = PathStatus::diverged;
        return res;
      }
      const Complex z0 = w.x[sys.affine_n];
      for (int i = 0; i < sys.affine_n; ++i) x[i] = w.x[i] / z0;
    } else {
      for (int i = 0; i < n; ++i) x[i] = w.x[i];
    }

    double residual = std::numeric_limits<double>::infinity();
    if (polish(x, residual)) {
      res.status = PathStatus::converged;
      res.endpoint.resize(sys.affine_n);
      for (int i = 0; i < sys.affine_n; ++i) res.endpoint[i] = x[i];
      res.final_residual = residual;
    } else {
      res.status = PathStatus::singular;
      res.final_residual = residual;
    }
    return res;
  }
};

Complex unit_circle_draw(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> angle(0.0, 2.0 * std::numbers::pi);
  const double a = angle(rng);
  return Complex{std::cos(a), std::sin(a)};
}

bool lex_less(const CVector& a, const CVector& b) {
  for (Eigen::Index i = 0; i < a.size(); ++i) {
    if (a[i].real() != b[i].real()) return a[i].real() < b[i].real();
    if (a[i].imag() != b[i].imag()) return a[i].imag() < b[i].imag();
  }
  return false;
}

}  // namespace

Homotopy::Homotopy(PolySystem target_sys, PolySystem start_sys, Complex gamma_value)
    : target(std::move(target_sys)), start(std::move(start_sys)), gamma(gamma_value) {
  if (!target.is_square()) throw std::invalid_argument("Homotopy: target system must be square");
  if (!start.is_square()) throw std::invalid_argument("Homotopy: start system must be square");
  if (target.nvars != start.nvars)
    throw std::invalid_argument("Homotopy: target and start must share nvars");
  const double mag = std::abs(gamma);
  if (!(mag > 0.0) || !std::isfinite(mag))
    throw std::invalid_argument("Homotopy: gamma must be nonzero and finite");
  gamma /= mag;
}

CVector Homotopy::eval(const CVector& x, double t) const {
  return (1.0 - t) * target.eval(x) + (gamma * t) * start.eval(x);
}

std::pair<PolySystem, std::vector<CVector>> start_system_with_constants(
    const std::vector<int>& degrees, const std::vector<Complex>& constants) {
  const int n = static_cast<int>(degrees.size());
  if (constants.size() != degrees.size())
    throw std::invalid_argument("start_system: one constant per degree required");
  std::size_t total = 1;
  for (int d : degrees) {
    if (d < 1) throw std::invalid_argument("start_system: degrees must be >= 1");
    total *= static_cast<std::size_t>(d);
    if (total > 10'000'000) throw std::invalid_argument("start_system: path count too large");
  }

  std::vector<Poly> polys;
  polys.reserve(n);
  std::vector<std::vector<Complex>> var_roots(n);
  for (int i = 0; i < n; ++i) {
    const Complex a = constants[i];
    if (a == Complex{0.0, 0.0})
      throw std::invalid_argument("start_system: constants must be nonzero");
    std::vector<int> e(n, 0);
    e[i] = degrees[i];
    polys.push_back(Poly(n, {Term{{1.0, 0.0}, std::move(e)},
                             Term{-a, std::vector<int>(n, 0)}}));
    const double rho = std::pow(std::abs(a), 1.0 / degrees[i]);
    const double theta = std::arg(a);
    for (int k = 0; k < degrees[i]; ++k) {
      const double ang = (theta + 2.0 * std::numbers::pi * k) / degrees[i];
      var_roots[i].push_back(Complex{rho * std::cos(ang), rho * std::sin(ang)});
    }
  }

  std::vector<CVector> roots;
  roots.reserve(total);
  std::vector<int> idx(n, 0);
  for (std::size_t r = 0; r < total; ++r) {
    CVector x(n);
    for (int i = 0; i < n; ++i) x[i] = var_roots[i][idx[i]];
    roots.push_back(std::move(x));
    for (int i = n - 1; i >= 0; --i) {
      if (++idx[i] < degrees[i]) break;
      idx[i] = 0;
    }
  }
  return {PolySystem(std::move(polys)), std::move(roots)};
}

std::pair<PolySystem, std::vector<CVector>> start_system(const std::vector<int>& degrees,
                                                         std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::vector<Complex> constants;
  constants.reserve(degrees.size());
  for (std::size_t i = 0; i < degrees.size(); ++i) constants.push_back(unit_circle_draw(rng));
  return start_system_with_constants(degrees, constants);
}

PathResult track_path(const Homotopy& h, const CVector& x0, const TrackOptions& opts) {
  if (x0.size() != h.target.nvars)
    throw std::invalid_argument("track_path: start point dimension mismatch");
  const CompiledHomotopy compiled = CompiledHomotopy::affine(h);
  TrackerCore core{compiled, compiled, opts};
  CompiledHomotopy::Workspace w = compiled.make_workspace();
  return core.track(x0, w);
}

std::vector<CVector> solve_system(const PolySystem& f, const TrackOptions& opts,
                                  int num_threads) {
  SolveStats stats;
  return solve_system(f, opts, num_threads, stats);
}

std::vector<CVector> solve_system(const PolySystem& f, const TrackOptions& opts, int num_threads,
                                  SolveStats& stats) {
  if (!f.is_square()) throw std::invalid_argument("solve_system: system must be square");
  const int n = f.nvars;

  std::vector<int> degrees(n);
  for (int i = 0; i < n; ++i) degrees[i] = f.polys[i].total_degree();

  // Seeded draws, in order: gamma, start constants, projective patch.
  std::mt19937_64 rng(opts.seed);
  const Complex gamma = unit_circle_draw(rng);
  std::vector<Complex> constants;
  constants.reserve(n);
  for (int i = 0; i < n; ++i) constants.push_back(unit_circle_draw(rng));
  CVector patch(n + 1);
  for (int i = 0; i <= n; ++i) patch[i] = unit_circle_draw(rng);

  auto [start, roots] = start_system_with_constants(degrees, constants);
  const Homotopy h(f, std::move(start), gamma);
  const CompiledHomotopy tracked = CompiledHomotopy::projective_chart(h, patch);
  const CompiledHomotopy affine = CompiledHomotopy::affine(h);
  TrackerCore core{tracked, affine, opts};
  core.patch = patch;

  const std::size_t npaths = roots.size();
  stats.paths_tracked = npaths;
  std::vector<PathResult> results(npaths);

  int workers = num_threads > 0 ? num_threads
                                : static_cast<int>(std::thread::hardware_concurrency());
  if (workers < 1) workers = 1;
  workers = static_cast<int>(std::min<std::size_t>(workers, npaths));

  if (workers <= 1) {
    CompiledHomotopy::Workspace w = tracked.make_workspace();
    for (std::size_t k = 0; k < npaths; ++k) results[k] = core.track(roots[k], w);
  } else {
    std::atomic<std::size_t> next{0};
    auto worker = [&]() {
      CompiledHomotopy::Workspace w = tracked.make_workspace();
      for (;;) {
        const std::size_t k = next.fetch_add(1);
        if (k >= npaths) break;
        results[k] = core.track(roots[k], w);
      }
    };
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (int i = 0; i < workers; ++i) pool.emplace_back(worker);
    for (std::thread& th : pool) th.join();
  }

  std::vector<CVector> endpoints;
  for (const PathResult& r : results) {
    stats.total_steps += static_cast<std::size_t>(r.steps_taken);
    switch (r.status) {
      case PathStatus::converged: endpoints.push_back(r.endpoint); break;
      case PathStatus::diverged: ++stats.paths_diverged; break;
      case PathStatus::singular: ++stats.paths_singular; break;
      case PathStatus::max_steps: ++stats.paths_max_steps; break;
    }
  }
  stats.paths_converged = endpoints.size();

  std::sort(endpoints.begin(), endpoints.end(), lex_less);
  return deduplicate(endpoints, kDedupTol);
}

std::pair<CVector, bool> newton_refine(const PolySystem& f, const CVector& x, double tol,
                                       int max_iters) {
  if (!f.is_square()) throw std::invalid_argument("newton_refine: system must be square");
  const int n = f.nvars;
  CVector cur = x;
  CVector val = f.eval(cur);
  double r = inf_norm(val);
  for (int it = 0; it < max_iters; ++it) {
    if (r < tol) return {cur, true};
    CMatrix J = jacobian(f, cur);
    std::vector<Complex> A(J.size());
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) A[static_cast<std::size_t>(i) * n + j] = J(i, j);
    std::vector<Complex> rhs(val.data(), val.data() + n);
    if (!lu_solve(A.data(), rhs.data(), n)) return {cur, false};

    // Damping: halve the step while the residual would increase.
    double scale = 1.0;
    for (int attempt = 0; attempt < 5; ++attempt) {
      CVector trial = cur;
      for (int i = 0; i < n; ++i) trial[i] -= scale * rhs[i];
      CVector tval = f.eval(trial);
      const double tr = inf_norm(tval);
      if (tr < r || attempt == 4) {
        cur = trial;
        val = tval;
        r = tr;
        break;
      }
      scale *= 0.5;
    }
  }
  return {cur, r < tol};
}

std::vector<CVector> deduplicate(const std::vector<CVector>& solutions, double tol) {
  if (!(tol > 0.0)) throw std::invalid_argument("deduplicate: tol must be positive");
  std::vector<CVector> kept;
  for (const CVector& v : solutions) {
    bool dup = false;
    for (const CVector& u : kept) {
      if (u.size() != v.size()) continue;
      double d = 0.0;
      for (Eigen::Index i = 0; i < v.size(); ++i) d = std::max(d, std::abs(u[i] - v[i]));
      if (d < tol) {
        dup = true;
        break;
      }
    }
    if (!dup) kept.push_back(v);
  }
  return kept;
}

}  // namespace tdoacal
