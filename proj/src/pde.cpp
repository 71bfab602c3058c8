#include "natgrad/pde.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <limits>
#include <ostream>
#include <random>
#include <sstream>

#include "natgrad/errors.hpp"
#include "natgrad/quadrature.hpp"

namespace natgrad {

namespace {

constexpr double kEps = std::numeric_limits<double>::epsilon();

double signed_pow(double d, double e) { return std::copysign(std::pow(std::abs(d), e), d); }

double dot(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

// Scale of the individual terms entering the gradient; residuals below a
// small multiple of it are at roundoff level.
double residual_floor(const DiscreteProblem& prob, const std::vector<double>& v) {
  const Mesh& m = *prob.mesh;
  const auto phi = cell_fluxes(m, v);
  std::vector<double> scale(m.size(), 0.0);
  for (std::size_t i = m.first_free(); i <= m.last_free(); ++i) {
    double s = std::abs(phi[i]) + prob.lambda * m.volume(i) * std::abs(prob.h_at(m.node(i), v[i]));
    if (i > 0) s += std::abs(phi[i - 1]);
    scale[i] = s;
  }
  return 64.0 * kEps * dual_norm(m, scale);
}

void apply_step(const Mesh& mesh, const std::vector<double>& v, const std::vector<double>& d, double t,
                std::vector<double>& out) {
  out = v;
  for (std::size_t k = 0; k < d.size(); ++k) out[mesh.first_free() + k] += t * d[k];
}

std::vector<double> free_part(const Mesh& mesh, const std::vector<double>& full) {
  return std::vector<double>(full.begin() + static_cast<std::ptrdiff_t>(mesh.first_free()),
                             full.begin() + static_cast<std::ptrdiff_t>(mesh.last_free() + 1));
}

// Without the zero-order term the discrete equation integrates exactly: the
// cell fluxes are partial sums of the load, and the differences follow by
// inverting |D|^(p-2) D. On the interval the flux constant is fixed by the
// second boundary condition.
std::vector<double> integrate_fluxes(const Mesh& m, const std::vector<double>& load) {
  const double p = m.p();
  const std::size_t n = m.size();
  std::vector<double> partial(n - 1, 0.0);
  double acc = 0.0;
  for (std::size_t c = 0; c + 1 < n; ++c) {
    if (c >= m.first_free()) acc += load[c];
    partial[c] = acc;
  }
  auto slope = [&](double sigma, std::size_t c) { return signed_pow(sigma / m.flux_weight(c), 1.0 / (p - 1.0)); };
  double sigma0 = 0.0;
  if (m.kind() == DomainKind::interval) {
    // sigma_c = sigma0 - partial[c] with c = 0 carrying no load.
    auto mismatch = [&](double s0) {
      double sum = 0.0;
      for (std::size_t c = 0; c + 1 < n; ++c) sum += m.spacing(c) * slope(s0 - partial[c], c);
      return sum;
    };
    double lo = *std::min_element(partial.begin(), partial.end());
    double hi = *std::max_element(partial.begin(), partial.end());
    for (int k = 0; k < 200 && lo < hi; ++k) {
      const double mid = 0.5 * (lo + hi);
      if (mid <= lo || mid >= hi) break;
      (mismatch(mid) < 0.0 ? lo : hi) = mid;
    }
    sigma0 = 0.5 * (lo + hi);
  }
  std::vector<double> v(n, 0.0);
  if (m.kind() == DomainKind::interval) {
    for (std::size_t i = 1; i + 1 < n; ++i) v[i] = v[i - 1] + m.spacing(i - 1) * slope(sigma0 - partial[i - 1], i - 1);
  } else {
    for (std::size_t i = n - 1; i-- > 0;) v[i] = v[i + 1] - m.spacing(i) * slope(-partial[i], i);
  }
  return v;
}

}  // namespace

double DiscreteProblem::dh_at(double x, double v) const {
  if (v <= 0.0) return 0.0;
  if (dh) return dh(x, v);
  const double e = 1e-6 * std::max(v, 1e-3);
  const double lo = std::max(v - e, 0.0);
  return (h(x, v + e) - h(x, lo)) / (v + e - lo);
}

DiscreteProblem DiscreteProblem::from_transformed(MeshPtr mesh, std::shared_ptr<const TransformedProblem> tp,
                                                  double lambda) {
  if (std::abs(mesh->p() - tp->p()) > 1e-14) throw ParameterError("mesh and transform use different p");
  DiscreteProblem out;
  out.mesh = std::move(mesh);
  out.h = [tp](double x, double v) { return tp->h(x, v); };
  out.dh = [tp](double x, double v) { return tp->dh(x, v); };
  out.big_h = [tp](double x, double v) { return tp->big_h(x, v); };
  out.lambda = lambda;
  out.label = "transformed(g=" + tp->g().label + ", f=" + tp->f().label + ")";
  return out;
}

DiscreteProblem DiscreteProblem::direct(MeshPtr mesh, const SourceF& f, double lambda) {
  DiscreteProblem out;
  out.mesh = std::move(mesh);
  out.h = f.eval;
  if (f.has_deriv()) out.dh = [f](double x, double s) { return f.derivative(x, s); };
  if (f.primitive) {
    out.big_h = f.primitive;
  } else {
    out.big_h = [f](double x, double v) {
    QuadratureOptions q;
    q.abs_tol = 1e-15;
    q.rel_tol = 1e-13;
    return adaptive_simpson([&](double s) { return f(x, s); }, 0.0, v, q).value;
    };
  }
  out.lambda = lambda;
  out.label = "direct(f=" + f.label + ")";
  return out;
}

std::vector<double> solve_tridiagonal(const Tridiagonal& a, const std::vector<double>& rhs) {
  const std::size_t n = a.size();
  if (rhs.size() != n) throw ParameterError("tridiagonal size mismatch");
  std::vector<double> c(n, 0.0), d(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    const double pivot = a.diag[i] - (i > 0 ? a.lower[i] * c[i - 1] : 0.0);
    if (pivot == 0.0 || !std::isfinite(pivot)) {
      throw ConvergenceError("singular tridiagonal system", NAN);
    }
    c[i] = a.upper[i] / pivot;
    d[i] = (rhs[i] - (i > 0 ? a.lower[i] * d[i - 1] : 0.0)) / pivot;
  }
  for (std::size_t i = n - 1; i-- > 0;) d[i] -= c[i] * d[i + 1];
  return d;
}

std::vector<double> cell_fluxes(const Mesh& mesh, const std::vector<double>& v) {
  const double p = mesh.p();
  std::vector<double> phi(mesh.size() - 1);
  for (std::size_t c = 0; c + 1 < mesh.size(); ++c) {
    const double d = (v[c + 1] - v[c]) / mesh.spacing(c);
    phi[c] = mesh.flux_weight(c) * signed_pow(d, p - 1.0);
  }
  return phi;
}

double gradient_energy(const Mesh& mesh, const std::vector<double>& v) {
  const double p = mesh.p();
  double s = 0.0;
  for (std::size_t c = 0; c + 1 < mesh.size(); ++c) {
    const double hc = mesh.spacing(c);
    s += mesh.flux_weight(c) * hc * std::pow(std::abs((v[c + 1] - v[c]) / hc), p);
  }
  return s / p;
}

double mass_p(const Mesh& mesh, const std::vector<double>& v) {
  double s = 0.0;
  for (std::size_t i = 0; i < mesh.size(); ++i) s += mesh.volume(i) * std::pow(std::abs(v[i]), mesh.p());
  return s;
}

double functional_eval(const DiscreteProblem& prob, const Field& v) {
  const Mesh& m = *prob.mesh;
  double pot = 0.0;
  for (std::size_t i = 0; i < m.size(); ++i) pot += m.volume(i) * prob.big_h_at(m.node(i), v[i]);
  return gradient_energy(m, v.values) - prob.lambda * pot;
}

Field functional_gradient(const DiscreteProblem& prob, const Field& v) {
  const Mesh& m = *prob.mesh;
  const auto phi = cell_fluxes(m, v.values);
  Field g = Field::zeros(prob.mesh);
  for (std::size_t i = m.first_free(); i <= m.last_free(); ++i) {
    double gi = -phi[i] - prob.lambda * m.volume(i) * prob.h_at(m.node(i), v[i]);
    if (i > 0) gi += phi[i - 1];
    g[i] = gi;
  }
  return g;
}

double dual_norm(const Mesh& mesh, const std::vector<double>& grad) {
  double s = 0.0;
  for (std::size_t i = mesh.first_free(); i <= mesh.last_free(); ++i) s += grad[i] * grad[i] / mesh.volume(i);
  return std::sqrt(s);
}

double residual(const DiscreteProblem& prob, const Field& v) {
  return dual_norm(*prob.mesh, functional_gradient(prob, v).values);
}

Tridiagonal functional_hessian(const DiscreteProblem& prob, const Field& v, double delta) {
  const Mesh& m = *prob.mesh;
  const double p = m.p();
  const std::size_t f0 = m.first_free(), nf = m.last_free() - f0 + 1;
  std::vector<double> k(m.size() - 1);
  for (std::size_t c = 0; c + 1 < m.size(); ++c) {
    const double hc = m.spacing(c);
    const double d = (v[c + 1] - v[c]) / hc;
    k[c] = m.flux_weight(c) * (p - 1.0) * std::pow(d * d + delta * delta, 0.5 * (p - 2.0)) / hc;
  }
  Tridiagonal a(nf);
  for (std::size_t r = 0; r < nf; ++r) {
    const std::size_t i = f0 + r;
    double diag = k[i] - prob.lambda * m.volume(i) * prob.dh_at(m.node(i), v[i]);
    if (i > 0) diag += k[i - 1];
    a.diag[r] = diag;
    if (r > 0) a.lower[r] = -k[i - 1];
    if (r + 1 < nf) a.upper[r] = -k[i];
  }
  return a;
}

Tridiagonal stiffness_matrix(const Mesh& mesh, double shift) {
  const std::size_t f0 = mesh.first_free(), nf = mesh.last_free() - f0 + 1;
  Tridiagonal a(nf);
  for (std::size_t r = 0; r < nf; ++r) {
    const std::size_t i = f0 + r;
    const double kr = mesh.flux_weight(i) / mesh.spacing(i);
    double diag = kr + shift * mesh.volume(i);
    if (i > 0) diag += mesh.flux_weight(i - 1) / mesh.spacing(i - 1);
    a.diag[r] = diag;
    if (r > 0) a.lower[r] = -mesh.flux_weight(i - 1) / mesh.spacing(i - 1);
    if (r + 1 < nf) a.upper[r] = -kr;
  }
  return a;
}

Field newton_polish(const DiscreteProblem& prob, const Field& start, const NewtonOptions& opt) {
  const Mesh& m = *prob.mesh;
  Field v = start;
  double r = residual(prob, v);
  std::vector<double> trial;
  for (int it = 0; it <= opt.max_iter; ++it) {
    if (!std::isfinite(r)) throw ConvergenceError("Newton iterate left the finite range", r);
    if (r <= opt.tol || r <= residual_floor(prob, v.values)) return v;
    if (it == opt.max_iter) break;
    const Field g = functional_gradient(prob, v);
    auto rhs = free_part(m, g.values);
    for (double& x : rhs) x = -x;
    std::vector<double> d;
    try {
      d = solve_tridiagonal(functional_hessian(prob, v, opt.delta), rhs);
    } catch (const ConvergenceError&) {
      throw ConvergenceError("singular Newton system", r);
    }
    double t = 1.0;
    bool moved = false;
    for (int ls = 0; ls < 40; ++ls, t *= 0.5) {
      apply_step(m, v.values, d, t, trial);
      Field cand(prob.mesh, trial);
      const double rc = residual(prob, cand);
      if (std::isfinite(rc) && rc < (1.0 - 1e-4 * t) * r) {
        v = std::move(cand);
        r = rc;
        moved = true;
        break;
      }
    }
    if (!moved) break;
  }
  std::ostringstream os;
  os << "Newton iteration stalled at residual " << r;
  throw ConvergenceError(os.str(), r);
}

Field solve_p_poisson(const MeshPtr& mesh_ptr, const std::vector<double>& rhs, double shift, const Field* start,
                      const ConvexSolveOptions& opt) {
  const Mesh& m = *mesh_ptr;
  const double p = m.p();
  if (rhs.size() != m.size()) throw ParameterError("rhs size does not match mesh");
  if (shift < 0.0) throw ParameterError("shift must be nonnegative");
  const std::size_t f0 = m.first_free(), nf = m.last_free() - f0 + 1;

  std::vector<double> load(m.size(), 0.0);
  for (std::size_t i = f0; i <= m.last_free(); ++i) load[i] = m.volume(i) * rhs[i];
  const double load_norm = dual_norm(m, load);
  if (load_norm == 0.0) return Field::zeros(mesh_ptr);

  if (shift == 0.0) return Field(mesh_ptr, integrate_fluxes(m, load));

  auto energy = [&](const std::vector<double>& w) {
    return gradient_energy(m, w) + shift / p * mass_p(m, w) - dot(load, w);
  };
  auto gradient = [&](const std::vector<double>& w) {
    const auto phi = cell_fluxes(m, w);
    std::vector<double> g(m.size(), 0.0);
    for (std::size_t i = f0; i <= m.last_free(); ++i) {
      double gi = -phi[i] + shift * m.volume(i) * signed_pow(w[i], p - 1.0) - load[i];
      if (i > 0) gi += phi[i - 1];
      g[i] = gi;
    }
    return g;
  };

  std::vector<double> w(m.size(), 0.0);
  if (start) {
    w = start->values;
  } else {
    auto lin = solve_tridiagonal(stiffness_matrix(m, shift), free_part(m, load));
    for (std::size_t k = 0; k < nf; ++k) w[f0 + k] = lin[k];
  }
  // Best multiple of the initial guess.
  {
    const double a = p * gradient_energy(m, w) + shift * mass_p(m, w);
    const double l = dot(load, w);
    if (a > 0.0 && l != 0.0) {
      const double c = std::copysign(std::pow(std::abs(l) / a, 1.0 / (p - 1.0)), l);
      for (double& x : w) x *= c;
    }
  }

  const double delta = 1e-10;
  DiscreteProblem stiff_only;
  stiff_only.mesh = mesh_ptr;
  stiff_only.h = [](double, double) { return 0.0; };
  stiff_only.lambda = 0.0;
  std::vector<double> trial;
  double res = NAN;
  for (int it = 0; it < opt.max_iter; ++it) {
    const auto g = gradient(w);
    res = dual_norm(m, g);
    if (res <= opt.tol * load_norm) return Field(mesh_ptr, w);

    Tridiagonal hess = functional_hessian(stiff_only, Field(mesh_ptr, w), delta);
    for (std::size_t k = 0; k < nf; ++k) {
      const double x = w[f0 + k];
      hess.diag[k] += shift * m.volume(f0 + k) * (p - 1.0) * std::pow(x * x + delta * delta, 0.5 * (p - 2.0));
    }
    auto rhs_n = free_part(m, g);
    for (double& x : rhs_n) x = -x;
    const auto d = solve_tridiagonal(hess, rhs_n);
    const double slope = -dot(rhs_n, d);
    const double e0 = energy(w);
    double t = 1.0;
    bool moved = false;
    for (int ls = 0; ls < 60; ++ls, t *= 0.5) {
      apply_step(m, w, d, t, trial);
      const double e1 = energy(trial);
      if (e1 <= e0 + 1e-4 * t * slope + 8.0 * kEps * std::abs(e0)) {
        moved = true;
        break;
      }
    }
    if (!moved) {
      // Energy differences are at roundoff; fall back to the gradient norm.
      apply_step(m, w, d, 1.0, trial);
      if (!(dual_norm(m, gradient(trial)) < res)) break;
    }
    w.swap(trial);
  }
  res = dual_norm(m, gradient(w));
  if (res <= std::max(opt.tol, 1e-13) * load_norm * 1e3) return Field(mesh_ptr, w);
  std::ostringstream os;
  os << "p-Poisson solve did not converge (residual " << res << ")";
  throw ConvergenceError(os.str(), res);
}

double rayleigh_quotient(const Mesh& mesh, const std::vector<double>& v) {
  return mesh.p() * gradient_energy(mesh, v) / mass_p(mesh, v);
}

EigenResult lambda1_estimate(const MeshPtr& mesh, const EigenOptions& opt) {
  const Mesh& m = *mesh;
  const double p = m.p();
  Field v = solve_p_poisson(mesh, std::vector<double>(m.size(), 1.0));
  for (double& x : v.values) x /= v.sup_norm();
  double lam = rayleigh_quotient(m, v.values);
  for (int it = 1; it <= opt.max_iter; ++it) {
    std::vector<double> rhs(m.size());
    for (std::size_t i = 0; i < m.size(); ++i) rhs[i] = signed_pow(v[i], p - 1.0);
    Field guess = v;
    const double scale = std::pow(lam, -1.0 / (p - 1.0));
    for (double& x : guess.values) x *= scale;
    Field w = solve_p_poisson(mesh, rhs, 0.0, &guess);
    const double sup = w.sup_norm();
    for (double& x : w.values) x /= sup;
    const double next = rayleigh_quotient(m, w.values);
    v = std::move(w);
    const bool done = std::abs(next - lam) <= opt.tol * next;
    lam = next;
    if (done) return {lam, v, it};
  }
  std::ostringstream os;
  os << "inverse iteration did not converge; last Rayleigh quotient " << lam;
  throw ConvergenceError(os.str(), lam);
}

GradientCheckReport gradient_check(const DiscreteProblem& prob, const Field& v, const std::vector<double>& eps,
                                   int directions, std::uint64_t seed) {
  const Mesh& m = *prob.mesh;
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  GradientCheckReport rep;
  rep.eps = eps;
  rep.max_rel_err.assign(eps.size(), 0.0);
  rep.directions = directions;
  const Field g = functional_gradient(prob, v);
  // Near a critical point <grad, w> cancels; errors are measured against the
  // size of the individual terms of the gradient instead.
  const auto phi = cell_fluxes(m, v.values);
  std::vector<double> scale(m.size(), 0.0);
  for (std::size_t i = m.first_free(); i <= m.last_free(); ++i) {
    scale[i] = std::abs(phi[i]) + prob.lambda * m.volume(i) * std::abs(prob.h_at(m.node(i), v[i]));
    if (i > 0) scale[i] += std::abs(phi[i - 1]);
  }
  for (int d = 0; d < directions; ++d) {
    Field w = Field::zeros(prob.mesh);
    for (std::size_t i = m.first_free(); i <= m.last_free(); ++i) w[i] = normal(rng);
    const double an = dot(g.values, w.values);
    double size = 0.0;
    for (std::size_t i = 0; i < m.size(); ++i) size += scale[i] * std::abs(w[i]);
    for (std::size_t k = 0; k < eps.size(); ++k) {
      Field plus = v, minus = v;
      for (std::size_t i = 0; i < m.size(); ++i) {
        plus[i] += eps[k] * w[i];
        minus[i] -= eps[k] * w[i];
      }
      const double fd = (functional_eval(prob, plus) - functional_eval(prob, minus)) / (2.0 * eps[k]);
      const double err = std::abs(fd - an) / std::max({std::abs(an), size, 1e-300});
      rep.max_rel_err[k] = std::max(rep.max_rel_err[k], err);
    }
  }
  return rep;
}

double quasilinear_residual(const NonlinearityG& g, const SourceF& f, double lambda, const Field& u) {
  const Mesh& m = *u.mesh;
  const double p = m.p();
  const std::size_t n = m.size();
  std::vector<double> big(n);
  for (std::size_t i = 0; i < n; ++i) big[i] = big_g(g, std::max(u[i], 0.0));

  QuadratureOptions q;
  q.abs_tol = 0.0;
  q.rel_tol = 1e-13;
  std::vector<double> psi(n - 1);
  for (std::size_t c = 0; c + 1 < n; ++c) {
    const double a = std::max(u[c], 0.0), b = std::max(u[c + 1], 0.0);
    const double du = b - a;
    double avg;
    if (std::abs(du) <= 1e-12 * (1.0 + a)) {
      avg = std::exp((big[c] + 0.5 * du * g(a)) / (p - 1.0));
    } else {
      // e^(G(s)/(p-1)) with G(s) = G(a) + int_a^s g.
      QuadratureOptions inner;
      inner.abs_tol = 1e-16;
      inner.rel_tol = 1e-14;
      const double ga = big[c];
      auto integrand = [&](double s) {
        return std::exp((ga + adaptive_simpson([&](double t) { return g(t); }, a, s, inner).value) / (p - 1.0));
      };
      q.abs_tol = 1e-300;
      avg = adaptive_simpson(integrand, a, b, q).value / du;
    }
    const double d = (u[c + 1] - u[c]) / m.spacing(c);
    psi[c] = m.flux_weight(c) * std::pow(avg, p - 1.0) * signed_pow(d, p - 1.0);
  }
  double s = 0.0;
  for (std::size_t i = m.first_free(); i <= m.last_free(); ++i) {
    const double x = m.node(i);
    const double fu = u[i] > 0.0 ? f(x, u[i]) : 0.0;
    double r = -psi[i] - lambda * m.volume(i) * std::exp(big[i]) * fu;
    if (i > 0) r += psi[i - 1];
    r *= std::exp(-big[i]);
    s += r * r / m.volume(i);
  }
  return std::sqrt(s);
}

double boundary_slope(const Field& v) {
  const Mesh& m = *v.mesh;
  const std::size_t n = m.size();
  return (v[n - 1] - v[n - 2]) / m.spacing(n - 2);
}

bool is_positive(const Field& v) {
  const Mesh& m = *v.mesh;
  for (std::size_t i = m.first_free(); i <= m.last_free(); ++i) {
    if (!(v[i] > 0.0)) return false;
  }
  return true;
}

void write_field_csv(std::ostream& os, const Field& v) {
  const auto old = os.precision(17);
  os << "node,value\n";
  for (std::size_t i = 0; i < v.size(); ++i) os << v.mesh->node(i) << ',' << v[i] << '\n';
  os.precision(old);
}

}  // namespace natgrad
