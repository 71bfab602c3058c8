#include "natgrad/solvers.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>
#include <sstream>

#include <boost/math/tools/minima.hpp>

#include "natgrad/errors.hpp"

namespace natgrad {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

Field combine(const Field& a, double t, const Field& w) {
  Field out = a;
  for (std::size_t i = 0; i < out.size(); ++i) out[i] += t * w[i];
  return out;
}

// Out-of-range evaluations only occur at large amplitude, where the
// superlinear energy is very negative.
double safe_energy(const DiscreteProblem& prob, const Field& v) {
  try {
    const double j = functional_eval(prob, v);
    return std::isnan(j) ? -kInf : j;
  } catch (const RangeError&) {
    return -kInf;
  }
}

// Per-node magnitude of the terms in dJ/dv.
std::vector<double> term_scale(const DiscreteProblem& prob, const Field& v) {
  const Mesh& m = *prob.mesh;
  const auto phi = cell_fluxes(m, v.values);
  std::vector<double> s(m.size(), 0.0);
  for (std::size_t i = m.first_free(); i <= m.last_free(); ++i) {
    s[i] = std::abs(phi[i]) + prob.lambda * m.volume(i) * std::abs(prob.h_at(m.node(i), v[i]));
    if (i > 0) s[i] += std::abs(phi[i - 1]);
  }
  return s;
}

double signed_defect(const DiscreteProblem& prob, const Field& v, double sign) {
  const Mesh& m = *prob.mesh;
  const Field g = functional_gradient(prob, v);
  const auto scale = term_scale(prob, v);
  double worst = -kInf;
  for (std::size_t i = m.first_free(); i <= m.last_free(); ++i) {
    const double s = scale[i] > 0.0 ? scale[i] : 1.0;
    worst = std::max(worst, sign * g[i] / s);
  }
  return worst;
}

// Number of negative pivots of the LDL^T factorization (Sylvester inertia).
int negative_pivots(const Tridiagonal& a) {
  int neg = 0;
  double prev = 1.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    double d = a.diag[i];
    if (i > 0) d -= a.lower[i] * a.upper[i - 1] / prev;
    if (d == 0.0) d = 1e-300;
    if (d < 0.0) ++neg;
    prev = d;
  }
  return neg;
}

double monotone_shift(const DiscreteProblem& prob, double hi) {
  const double p = prob.p();
  if (!(hi > 0.0)) return 0.0;
  double worst = 0.0;
  const int samples = 64;
  for (const double x : {0.0, 0.5 * prob.mesh->extent()}) {
    for (int k = 1; k <= samples; ++k) {
      const double s = hi * std::pow(1e-6, 1.0 - static_cast<double>(k) / samples);
      double d;
      try {
        d = prob.dh_at(x, s);
      } catch (const RangeError&) {
        break;
      }
      if (!std::isfinite(d)) continue;
      worst = std::max(worst, -prob.lambda * d / ((p - 1.0) * std::pow(s, p - 2.0)));
    }
  }
  return 2.0 * worst;
}

struct Ray {
  double t = 0.0;
  double value = -kInf;
  double t_max = 0.0;
};

// Maximum of J(base + t w) over t in (0, t_max], extending t_max while the
// maximum sits at the end of the sampled range.
Ray ray_max(const DiscreteProblem& prob, const Field& base, const Field& w, double t_max, int samples) {
  for (int grow = 0; grow < 60; ++grow) {
    int best = 0;
    double best_val = -kInf;
    std::vector<double> vals(samples + 1);
    vals[0] = safe_energy(prob, base);
    for (int j = 1; j <= samples; ++j) {
      vals[j] = safe_energy(prob, combine(base, t_max * j / samples, w));
      if (vals[j] > best_val) {
        best_val = vals[j];
        best = j;
      }
    }
    if (best == samples) {
      t_max *= 2.0;
      continue;
    }
    const double lo = t_max * (best - 1) / samples, hi = t_max * (best + 1) / samples;
    auto neg = [&](double t) { return -safe_energy(prob, combine(base, t, w)); };
    const auto r = boost::math::tools::brent_find_minima(neg, lo, hi, std::numeric_limits<double>::digits / 2);
    Ray out;
    out.t = r.first;
    out.value = -r.second;
    if (best_val > out.value) {
      out.t = t_max * best / samples;
      out.value = best_val;
    }
    out.t_max = t_max;
    return out;
  }
  throw ConvergenceError("energy unbounded along the mountain-pass ray", NAN);
}

}  // namespace

double subsolution_defect(const DiscreteProblem& prob, const Field& v) { return signed_defect(prob, v, 1.0); }
double supersolution_defect(const DiscreteProblem& prob, const Field& v) { return signed_defect(prob, v, -1.0); }

std::string to_string(Branch b) { return b == Branch::minimal ? "minimal" : "mountain_pass"; }

MPResult solve_mountain_pass(const DiscreteProblem& prob, const MPParams& params) {
  const MeshPtr& mesh = prob.mesh;
  const Mesh& m = *mesh;
  if (params.path_points < 3) throw ParameterError("path_points must be at least 3");
  const Field base = params.base ? *params.base : Field::zeros(mesh);
  if (!params.base) {
    for (std::size_t i = m.first_free(); i <= m.last_free(); ++i) {
      if (prob.h(m.node(i), 0.0) != 0.0) throw ParameterError("mountain pass from 0 needs h(x, 0) = 0");
    }
  }
  const double j0 = functional_eval(prob, base);

  MPResult out;
  Field w;
  double t_max;
  if (params.endpoint) {
    w = combine(*params.endpoint, -1.0, base);
    t_max = 1.0;
    out.endpoint_energy = safe_energy(prob, *params.endpoint);
    if (!(out.endpoint_energy < j0)) throw NoDescentDirection("endpoint energy is not below the base energy", NAN);
  } else {
    w = params.direction ? *params.direction : lambda1_estimate(mesh).phi;
    const double scale = w.sup_norm();
    if (!(scale > 0.0)) throw ParameterError("mountain-pass direction vanishes");
    for (double& x : w.values) x /= scale;
    t_max = 1.0;
    bool found = false;
    for (int k = 0; k < 80; ++k, t_max *= 2.0) {
      try {
        const double j = functional_eval(prob, combine(base, t_max, w));
        if (j < j0) {
          out.endpoint_energy = j;
          found = true;
          break;
        }
      } catch (const RangeError&) {
        break;
      }
      if (!std::isfinite(t_max) || t_max > 1e12) break;
    }
    if (!found) throw NoDescentDirection("no descent direction: energy stays above the base along the ray", NAN);
  }

  const Tridiagonal sobolev = stiffness_matrix(m);
  Ray ray = ray_max(prob, base, w, t_max, params.path_points);
  double step = params.descent_step;
  double r0 = -1.0, trigger = 0.0;
  for (int it = 0; it < params.max_outer; ++it) {
    out.iterations = it;
    Field z = combine(base, ray.t, w);
    const Field g = functional_gradient(prob, z);
    const double r = dual_norm(m, g.values);
    if (r0 < 0.0) {
      r0 = r;
      trigger = params.polish_after * r0;
    }
    if (r <= params.tol) {
      out.v = std::move(z);
      out.residual = r;
      out.energy = ray.value;
      out.path_max = ray.value;
      if (!is_positive(out.v)) throw ConvergenceError("mountain-pass critical point is not positive", r);
      return out;
    }
    if (params.polish && r <= trigger) {
      trigger *= 1e-2;
      try {
        NewtonOptions nopt;
        nopt.tol = params.tol;
        Field u = newton_polish(prob, z, nopt);
        const double ju = functional_eval(prob, u);
        Field diff = combine(u, -1.0, base);
        if (ju > j0 && diff.sup_norm() > 1e-6 * (1.0 + base.sup_norm()) && is_positive(u)) {
          out.v = std::move(u);
          out.residual = residual(prob, out.v);
          out.energy = ju;
          out.path_max = ray.value;
          out.polished = true;
          return out;
        }
      } catch (const ConvergenceError&) {
      } catch (const RangeError&) {
      }
    }

    std::vector<double> gf(g.values.begin() + static_cast<std::ptrdiff_t>(m.first_free()),
                           g.values.begin() + static_cast<std::ptrdiff_t>(m.last_free() + 1));
    const auto df = solve_tridiagonal(sobolev, gf);
    Field d = Field::zeros(mesh);
    double dd = 0.0;
    for (std::size_t k = 0; k < df.size(); ++k) {
      d[m.first_free() + k] = df[k];
      dd += df[k] * gf[k];
    }
    bool accepted = false;
    for (int ls = 0; ls < 60; ++ls) {
      Field wn = combine(combine(z, -step, d), -1.0, base);
      const Ray cand = ray_max(prob, base, wn, std::max(2.0, ray.t_max / std::max(ray.t, 1e-300)),
                               params.path_points);
      if (cand.value <= ray.value - 1e-4 * step * dd) {
        w = std::move(wn);
        ray = cand;
        step = std::min(2.0 * step, 1e3 * params.descent_step);
        accepted = true;
        break;
      }
      step *= 0.5;
    }
    if (!accepted) {
      // No sufficient decrease left: the remaining residual is at the noise
      // level of the ray maximization. Hand over to Newton.
      if (params.polish && trigger < r) {
        trigger = r;
        continue;
      }
      throw ConvergenceError("mountain-pass line search failed", r);
    }
  }
  Field z = combine(base, ray.t, w);
  throw ConvergenceError("mountain pass exceeded max_outer", residual(prob, z));
}

SubSuperResult solve_sub_super(const DiscreteProblem& prob, const Field& sub, const Field* super,
                               const SubSuperOptions& opt) {
  const MeshPtr& mesh = prob.mesh;
  const Mesh& m = *mesh;
  const double p = prob.p();
  if (!sub.satisfies_dirichlet()) throw ParameterError("subsolution violates the boundary condition");
  if (subsolution_defect(prob, sub) > opt.probe_tol) throw ParameterError("sub is not a discrete subsolution");
  if (super) {
    if (supersolution_defect(prob, *super) > opt.probe_tol) {
      throw ParameterError("super is not a discrete supersolution");
    }
    for (std::size_t i = 0; i < m.size(); ++i) {
      if (sub[i] > (*super)[i]) throw ParameterError("sub and super are not ordered");
    }
  }

  SubSuperResult out;
  Field v = sub;
  double next_polish = 1e-4;
  for (int it = 1; it <= opt.max_iter; ++it) {
    const double top = super ? super->sup_norm() : 2.0 * std::max(v.sup_norm(), 1e-12);
    const double b = monotone_shift(prob, top);
    out.shift = std::max(out.shift, b);
    std::vector<double> rhs(m.size(), 0.0);
    try {
      for (std::size_t i = m.first_free(); i <= m.last_free(); ++i) {
        rhs[i] = prob.lambda * prob.h_at(m.node(i), v[i]) + b * std::pow(std::max(v[i], 0.0), p - 1.0);
      }
    } catch (const RangeError& e) {
      throw ConvergenceError(std::string("monotone iterates left the working range: ") + e.what(), NAN);
    }
    Field w = solve_p_poisson(mesh, rhs, b, &v);
    const double slack = 1e-8 * std::max(1.0, w.sup_norm());
    for (std::size_t i = 0; i < m.size(); ++i) {
      if (w[i] < v[i] - slack) throw ConvergenceError("monotone iteration lost its ordering", NAN);
      if (super && w[i] > (*super)[i] + slack) throw ConvergenceError("iterate crossed the supersolution", NAN);
    }
    const double sup = w.sup_norm();
    if (!std::isfinite(sup) || sup > opt.blowup) {
      std::ostringstream os;
      os << "monotone iteration blew up (sup norm " << sup << " after " << it << " iterations)";
      throw ConvergenceError(os.str(), NAN);
    }
    double change = 0.0;
    for (std::size_t i = 0; i < m.size(); ++i) change = std::max(change, w[i] - v[i]);
    v = std::move(w);
    double r;
    try {
      r = residual(prob, v);
    } catch (const RangeError& e) {
      throw ConvergenceError(std::string("monotone iterates left the working range: ") + e.what(), NAN);
    }
    out.iterations = it;
    if (r <= opt.tol) {
      out.v = v;
      out.residual = r;
      return out;
    }
    if (opt.polish && change <= next_polish * std::max(sup, 1e-300)) {
      next_polish = change / std::max(sup, 1e-300) * 1e-1;
      try {
        NewtonOptions nopt;
        nopt.tol = opt.tol;
        Field u = newton_polish(prob, v, nopt);
        // The minimal solution is stable; an index-one point above it is not.
        bool ok = negative_pivots(functional_hessian(prob, u)) == 0;
        const double sl = 1e-8 * std::max(1.0, u.sup_norm());
        for (std::size_t i = 0; ok && i < m.size(); ++i) {
          if (u[i] < v[i] - sl) ok = false;
          if (super && u[i] > (*super)[i] + sl) ok = false;
        }
        if (ok) {
          out.v = std::move(u);
          out.residual = residual(prob, out.v);
          out.polished = true;
          return out;
        }
      } catch (const ConvergenceError&) {
      } catch (const RangeError&) {
      }
    }
  }
  throw ConvergenceError("monotone iteration reached max_iter", residual(prob, v));
}

namespace {

// Largest 2^-k multiple of phi that passes the subsolution probe.
std::optional<Field> scaled_subsolution(const DiscreteProblem& prob, const Field& phi, double probe_tol) {
  double eps = 1.0;
  for (int k = 0; k < 80; ++k, eps *= 0.5) {
    Field s = phi;
    for (double& x : s.values) x *= eps;
    if (subsolution_defect(prob, s) <= probe_tol) return s;
  }
  return std::nullopt;
}

std::optional<SubSuperResult> minimal_solution(const DiscreteProblem& prob, const Field* warm, const Field& phi,
                                               const SubSuperOptions& opt) {
  std::vector<Field> starts;
  if (warm) starts.push_back(*warm);
  if (auto s = scaled_subsolution(prob, phi, opt.probe_tol)) {
    starts.push_back(*s);
    Field smaller = *s;
    for (double& x : smaller.values) x /= 16.0;
    starts.push_back(std::move(smaller));
  }
  for (const Field& start : starts) {
    try {
      return solve_sub_super(prob, start, nullptr, opt);
    } catch (const ConvergenceError&) {
    } catch (const ParameterError&) {
    }
  }
  return std::nullopt;
}

}  // namespace

SubSuperResult solve_minimal(const DiscreteProblem& prob, const SubSuperOptions& opt) {
  const Field phi = lambda1_estimate(prob.mesh).phi;
  if (auto sol = minimal_solution(prob, nullptr, phi, opt)) return *sol;
  throw ConvergenceError("monotone iteration found no minimal solution", std::nan(""));
}

BifurcationDiagram continuation_lambda(const DiscreteProblem& family, double lambda_min, double lambda_max,
                                       int steps, Verdict sublinear_at_zero, const ContinuationParams& params) {
  if (sublinear_at_zero != Verdict::holds) {
    throw ParameterError("continuation needs a source that is p-sublinear at zero ((H_1) must hold)");
  }
  if (!(lambda_min > 0.0) || !(lambda_max > lambda_min) || steps < 2) {
    throw ParameterError("continuation needs 0 < lambda_min < lambda_max and at least 2 steps");
  }
  const Field phi = lambda1_estimate(family.mesh).phi;
  auto at = [&](double lambda) {
    DiscreteProblem p = family;
    p.lambda = lambda;
    return p;
  };

  struct Solved {
    double lambda;
    std::optional<SubSuperResult> sol;
  };
  std::vector<Solved> solved;
  std::optional<Field> last;
  for (int k = 0; k < steps; ++k) {
    const double lambda = lambda_min + (lambda_max - lambda_min) * k / (steps - 1);
    auto sol = minimal_solution(at(lambda), last ? &*last : nullptr, phi, params.monotone);
    if (sol) last = sol->v;
    solved.push_back({lambda, std::move(sol)});
  }

  BifurcationDiagram d;
  int last_ok = -1;
  for (int k = 0; k < steps; ++k) {
    if (solved[k].sol) last_ok = k;
  }
  if (last_ok >= 0 && last_ok + 1 < steps) {
    double lo = solved[last_ok].lambda, hi = solved[last_ok + 1].lambda;
    Field base = solved[last_ok].sol->v;
    const double min_step = params.min_step_fraction * (lambda_max - lambda_min);
    while (hi - lo > min_step) {
      const double mid = 0.5 * (lo + hi);
      auto sol = minimal_solution(at(mid), &base, phi, params.monotone);
      if (sol) {
        lo = mid;
        base = sol->v;
      } else {
        hi = mid;
      }
      solved.push_back({mid, std::move(sol)});
    }
    d.lambda_lo = lo;
    d.lambda_hi = hi;
  } else if (last_ok + 1 == steps) {
    d.lambda_lo = solved.back().lambda;
  }
  std::sort(solved.begin(), solved.end(), [](const Solved& a, const Solved& b) { return a.lambda < b.lambda; });

  for (const Solved& s : solved) {
    d.lambda_grid.push_back(s.lambda);
    d.minimal_found.push_back(static_cast<bool>(s.sol));
    if (!s.sol) continue;
    const DiscreteProblem prob = at(s.lambda);
    d.points.push_back({s.lambda, Branch::minimal, s.sol->v.sup_norm(), functional_eval(prob, s.sol->v),
                        s.sol->residual});
    d.minimal_solutions.push_back(s.sol->v);
    std::optional<Field> second;
    if (params.second_branch) {
      MPParams mp = params.mountain_pass;
      mp.base = s.sol->v;
      mp.direction = phi;
      try {
        MPResult r = solve_mountain_pass(prob, mp);
        d.points.push_back({s.lambda, Branch::mountain_pass, r.v.sup_norm(), r.energy, r.residual});
        second = std::move(r.v);
      } catch (const ConvergenceError&) {
      } catch (const RangeError&) {
      }
    }
    d.mp_solutions.push_back(std::move(second));
  }
  return d;
}

void write_diagram_csv(std::ostream& os, const BifurcationDiagram& d) {
  const auto old = os.precision(17);
  os << "lambda,branch,sup_norm,energy\n";
  for (const BranchPoint& b : d.points) {
    os << b.lambda << ',' << to_string(b.branch) << ',' << b.sup_norm << ',' << b.energy << '\n';
  }
  os.precision(old);
}

}  // namespace natgrad
