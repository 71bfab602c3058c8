#include "natgrad/hypotheses.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <sstream>

#include "natgrad/errors.hpp"
#include "natgrad/quadrature.hpp"

namespace natgrad {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kNoise = 1e-8;
constexpr double kGeometric = 0.9;
constexpr double kDiverging = 0.97;
constexpr double kResolution = 1e-9;
constexpr double kQuadTol = 1e-10;

std::string fmt(double v) {
  std::ostringstream os;
  os << v;
  return os.str();
}

std::vector<double> grid_up(const TrendOptions& opt) {
  std::vector<double> s;
  double v = opt.s_base;
  for (int k = 0; k <= opt.k_max; ++k, v *= opt.rho) s.push_back(v);
  return s;
}

std::vector<double> grid_down(const TrendOptions& opt) {
  std::vector<double> s;
  double v = opt.s_base;
  for (int k = 0; k <= opt.k_max; ++k, v /= opt.rho) s.push_back(v);
  return s;
}

void validate(const TrendOptions& opt) {
  if (!(opt.s_base > 0.0) || !(opt.rho > 1.0) || opt.k_max < 1 || opt.tail < 3 ||
      !(opt.margin >= 0.0) || !(opt.eps_zero > 0.0)) {
    throw ParameterError("invalid trend options");
  }
}

void validate_p(double p) {
  if (!(p > 1.0) || !std::isfinite(p)) throw ParameterError("p must exceed 1");
}

/// G, log I2 = log(A e^{-G/(p-1)}) and the (H_m)' denominator on a grid.
struct Profile {
  std::vector<double> s;
  std::vector<double> big_g;
  std::vector<double> log_i2;
  std::vector<double> d_tilde;
  std::string note;
};

double decay_scale(const NonlinearityG& g, double p, double s) {
  return (p - 1.0) / std::max(g(s), 1e-300);
}

Profile build_profile(const NonlinearityG& g, double p, const std::vector<double>& grid,
                      bool with_i2, bool with_d) {
  Profile pr;
  QuadratureOptions qo;
  qo.abs_tol = 1e-300;
  qo.rel_tol = 1e-12;
  double big_g = 0.0;
  double prev = 0.0;
  for (double s : grid) {
    try {
      if (s > prev) {
        big_g += prev == 0.0 ? integrate_dyadic(g.eval, 0.0, s, qo).value
                             : adaptive_simpson(g.eval, prev, s, qo).value;
      } else {
        big_g = integrate_dyadic(g.eval, 0.0, s, qo).value;
      }
      if (!std::isfinite(big_g)) {
        pr.note = "G(s) left the double range at s = " + fmt(s);
        break;
      }
      double li2 = 0.0;
      double dt = 0.0;
      if (with_i2 || with_d) {
        if (decay_scale(g, p, s) < kResolution * s) {
          pr.note = "sampling stopped at s = " + fmt(s) + ": kernel scale below double resolution";
          break;
        }
        const double fw = std::min(s, decay_scale(g, p, s));
        const auto i2 = integrate_below(
            g.eval, s, [p](double, double tail) { return std::exp(-tail / (p - 1.0)); }, fw,
            kQuadTol);
        li2 = std::log(i2.value);
        if (with_d) {
          const double gs = g(s);
          const double direct = (p - 1.0) - gs * i2.value;
          if (direct >= 0.1 * (p - 1.0)) {
            dt = direct;
          } else {
            const auto ig = integrate_below(
                g.eval, s,
                [&g, gs, p](double t, double tail) {
                  return (g(t) - gs) * std::exp(-tail / (p - 1.0));
                },
                fw, kQuadTol);
            dt = (p - 1.0) * std::exp(-big_g / (p - 1.0)) + ig.value;
          }
        }
      }
      pr.s.push_back(s);
      pr.big_g.push_back(big_g);
      pr.log_i2.push_back(li2);
      pr.d_tilde.push_back(dt);
      prev = s;
    } catch (const Error& e) {
      pr.note = std::string("sampling stopped at s = ") + fmt(s) + ": " + e.what();
      break;
    }
  }
  return pr;
}

/// Samples a quotient over the profile grid, worst case over x.
struct Sampled {
  Trend trend;
  std::string note;
};

using QuotientFn = std::function<double(double x, std::size_t k)>;

Sampled sample_quotient(const std::vector<double>& grid, const std::vector<double>& xs, bool take_min,
               const QuotientFn& q, const TrendOptions& opt) {
  std::vector<double> s_out;
  std::vector<double> q_out;
  bool overflow = false;
  std::string note;
  for (std::size_t k = 0; k < grid.size(); ++k) {
    double worst = take_min ? kInf : -kInf;
    bool bad = false;
    try {
      for (double x : xs) {
        const double v = q(x, k);
        if (std::isnan(v)) {
          bad = true;
          break;
        }
        worst = take_min ? std::min(worst, v) : std::max(worst, v);
      }
    } catch (const Error& e) {
      note = std::string("evaluation failed at s = ") + fmt(grid[k]) + ": " + e.what();
      break;
    }
    if (bad) {
      note = "quotient undefined at s = " + fmt(grid[k]);
      break;
    }
    if (worst == kInf) {
      overflow = true;
      note = "quotient unbounded from s = " + fmt(grid[k]);
      break;
    }
    if (worst == -kInf) {
      note = "quotient tends to -inf at s = " + fmt(grid[k]);
      break;
    }
    s_out.push_back(grid[k]);
    q_out.push_back(worst);
  }
  return {analyze_trend(std::move(s_out), std::move(q_out), overflow, opt), note};
}

HypothesisReport make_report(const std::string& condition, const Trend& t, Verdict v) {
  HypothesisReport r;
  r.condition = condition;
  r.verdict = v;
  for (std::size_t i = 0; i < t.s.size(); ++i) r.witness.emplace_back(t.s[i], t.q[i]);
  return r;
}

void add_note(HypothesisReport& r, const std::string& note) {
  if (note.empty()) return;
  if (!r.notes.empty()) r.notes += "; ";
  r.notes += note;
}

void describe_trend(HypothesisReport& r, const Trend& t) {
  std::string d = "trend " + to_string(t.kind);
  if (t.kind == TrendKind::stationary || t.kind == TrendKind::geometric) {
    d += ", limit ~ " + fmt(t.limit);
  }
  if (t.overflow) d += ", unbounded";
  add_note(r, d);
}

HypothesisReport finish(const std::string& condition, const Sampled& sm, Verdict v,
                        const std::string& profile_note) {
  auto r = make_report(condition, sm.trend, v);
  describe_trend(r, sm.trend);
  add_note(r, profile_note);
  add_note(r, sm.note);
  return r;
}

double log_f(const SourceF& f, double x, double s) { return f.log_value(x, s); }

Verdict combine(Verdict a, Verdict b) {
  if (a == Verdict::fails || b == Verdict::fails) return Verdict::fails;
  if (a == Verdict::inconclusive || b == Verdict::inconclusive) return Verdict::inconclusive;
  return Verdict::holds;
}

void validate_r(double p, int dim, double r) {
  const double ps = compute_pstar(p, dim);
  if (!(r > p) || !(r < ps)) {
    throw ParameterError("exponent r = " + fmt(r) + " must satisfy p < r < p* = " + fmt(ps));
  }
}

}  // namespace

std::string to_string(TrendKind k) {
  switch (k) {
    case TrendKind::stationary: return "stationary";
    case TrendKind::geometric: return "geometric";
    case TrendKind::diverging: return "diverging";
    case TrendKind::unresolved: return "unresolved";
    default: return "insufficient";
  }
}

Trend analyze_trend(std::vector<double> s, std::vector<double> q, bool overflow,
                    const TrendOptions& opt) {
  Trend t;
  t.s = std::move(s);
  t.q = std::move(q);
  t.overflow = overflow;
  const std::size_t n = t.q.size();
  const std::size_t m = static_cast<std::size_t>(opt.tail);
  if (n < m) {
    if (overflow) {
      t.kind = TrendKind::diverging;
      t.direction = 1;
    }
    return t;
  }
  const std::size_t first = n - m;
  double scale = 0.0;
  for (std::size_t i = first; i < n; ++i) scale = std::max(scale, std::abs(t.q[i]));
  const double noise = kNoise * scale;
  std::vector<double> d;
  for (std::size_t i = first; i + 1 < n; ++i) d.push_back(t.q[i + 1] - t.q[i]);
  t.nondecreasing = std::all_of(d.begin(), d.end(), [&](double v) { return v >= -noise; });
  t.nonincreasing = std::all_of(d.begin(), d.end(), [&](double v) { return v <= noise; });
  if (t.nondecreasing && !t.nonincreasing) t.direction = 1;
  if (t.nonincreasing && !t.nondecreasing) t.direction = -1;

  if (overflow) {
    t.kind = TrendKind::diverging;
    t.direction = 1;
    return t;
  }
  const std::size_t nd = d.size();
  const bool settled = std::abs(d[nd - 1]) <= noise && std::abs(d[nd - 2]) <= noise &&
                       std::abs(d[nd - 3]) <= noise;
  if (settled) {
    t.kind = TrendKind::stationary;
    t.limit = t.q.back();
    return t;
  }
  std::vector<double> ratios;
  for (std::size_t i = 0; i + 1 < nd; ++i) {
    if (std::abs(d[i]) > noise && std::abs(d[i + 1]) > noise) ratios.push_back(d[i + 1] / d[i]);
  }
  if (ratios.size() < 2 || t.direction == 0) {
    t.kind = TrendKind::unresolved;
    return t;
  }
  const double lo = *std::min_element(ratios.begin(), ratios.end());
  double mean = 0.0;
  for (double r : ratios) mean += r;
  mean /= static_cast<double>(ratios.size());
  if (lo >= kDiverging) {
    t.kind = TrendKind::diverging;
  } else if (lo >= 0.0 && mean <= kGeometric) {
    t.kind = TrendKind::geometric;
    t.limit = t.q.back() + d.back() * mean / (1.0 - mean);
  } else {
    t.kind = TrendKind::unresolved;
  }
  return t;
}

Verdict limit_above(const Trend& t, double bound, const TrendOptions& opt) {
  const double thr = bound > 0.0 ? bound * (1.0 + opt.margin)
                                 : (bound == 0.0 ? opt.margin : bound * (1.0 - opt.margin));
  if (t.overflow) return Verdict::holds;
  if (t.kind == TrendKind::insufficient) return Verdict::inconclusive;
  if (t.kind == TrendKind::stationary || t.kind == TrendKind::geometric) {
    return t.limit > thr ? Verdict::holds : Verdict::fails;
  }
  if (t.kind == TrendKind::diverging) return t.direction > 0 ? Verdict::holds : Verdict::fails;
  const std::size_t first = t.q.size() - std::min<std::size_t>(opt.tail, t.q.size());
  double mn = kInf;
  for (std::size_t i = first; i < t.q.size(); ++i) mn = std::min(mn, t.q[i]);
  if ((t.nondecreasing || t.nonincreasing) && mn > thr) return Verdict::holds;
  if (t.nonincreasing && t.q.back() <= thr) return Verdict::fails;
  return Verdict::inconclusive;
}

Verdict limit_below(const Trend& t, double bound, const TrendOptions& opt) {
  const double thr = bound * (1.0 - opt.margin);
  if (t.overflow) return Verdict::fails;
  if (t.kind == TrendKind::insufficient) return Verdict::inconclusive;
  if (t.kind == TrendKind::stationary || t.kind == TrendKind::geometric) {
    return t.limit < thr ? Verdict::holds : Verdict::fails;
  }
  if (t.kind == TrendKind::diverging) return t.direction > 0 ? Verdict::fails : Verdict::holds;
  const std::size_t first = t.q.size() - std::min<std::size_t>(opt.tail, t.q.size());
  double mx = -kInf;
  for (std::size_t i = first; i < t.q.size(); ++i) mx = std::max(mx, t.q[i]);
  if ((t.nondecreasing || t.nonincreasing) && mx < thr) return Verdict::holds;
  if (t.nondecreasing && t.q.back() >= thr) return Verdict::fails;
  return Verdict::inconclusive;
}

Verdict limit_zero(const Trend& t, const TrendOptions& opt) {
  if (t.overflow) return Verdict::fails;
  if (t.kind == TrendKind::insufficient) return Verdict::inconclusive;
  if (t.nonincreasing && std::abs(t.q.back()) < opt.eps_zero) return Verdict::holds;
  if (t.kind == TrendKind::stationary || t.kind == TrendKind::geometric) {
    return std::abs(t.limit) < opt.eps_zero ? Verdict::holds : Verdict::fails;
  }
  if (t.kind == TrendKind::diverging) {
    if (t.direction > 0) return Verdict::fails;
    return Verdict::inconclusive;
  }
  if (t.nondecreasing && t.q.back() > opt.eps_zero) return Verdict::fails;
  return Verdict::inconclusive;
}

Verdict limit_infinite(const Trend& t) {
  if (t.overflow) return Verdict::holds;
  if (t.kind == TrendKind::insufficient) return Verdict::inconclusive;
  if (t.kind == TrendKind::diverging) return t.direction > 0 ? Verdict::holds : Verdict::fails;
  if (t.kind == TrendKind::stationary || t.kind == TrendKind::geometric) return Verdict::fails;
  if (t.nonincreasing) return Verdict::fails;
  return Verdict::inconclusive;
}

Verdict eventually_nondecreasing(const Trend& t, double* s0) {
  const std::size_t n = t.q.size();
  if (n == 0) return Verdict::inconclusive;
  std::size_t k0 = n - 1;
  while (k0 > 0) {
    const double noise = kNoise * std::max(std::abs(t.q[k0]), std::abs(t.q[k0 - 1]));
    if (t.q[k0] - t.q[k0 - 1] < -noise) break;
    --k0;
  }
  if (s0) *s0 = t.s[k0];
  if (t.kind == TrendKind::insufficient && !t.overflow) return Verdict::inconclusive;
  if (t.nondecreasing || (t.overflow && n - k0 >= 2)) return Verdict::holds;
  if (t.nonincreasing) return Verdict::fails;
  return Verdict::inconclusive;
}

void to_json(nlohmann::json& j, const HypothesisReport& r) {
  nlohmann::json w = nlohmann::json::array();
  for (const auto& [s, q] : r.witness) w.push_back({s, q});
  nlohmann::json params = nlohmann::json::object();
  for (const auto& [k, v] : r.parameters) {
    if (std::isfinite(v)) {
      params[k] = v;
    } else {
      params[k] = v > 0 ? "inf" : (v < 0 ? "-inf" : "nan");
    }
  }
  j = {{"condition", r.condition},
       {"verdict", to_string(r.verdict)},
       {"witness", w},
       {"parameters", params},
       {"notes", r.notes}};
}

std::string to_string(RegimeKind k) {
  switch (k) {
    case RegimeKind::g_inf_positive: return "g_inf_positive";
    case RegimeKind::g_to_zero_sg_to_inf: return "g_to_zero_sg_to_inf";
    case RegimeKind::g_to_zero_sg_to_c: return "g_to_zero_sg_to_c";
    case RegimeKind::g_to_inf_log_deriv_bounded: return "g_to_inf_log_deriv_bounded";
    default: return "unclassified";
  }
}

void to_json(nlohmann::json& j, const RegimeTag& t) {
  j = {{"regime", to_string(t.kind)}, {"value", t.value}, {"notes", t.note}};
}

std::string to_string(ZeroClass c) {
  switch (c) {
    case ZeroClass::sub_lambda1: return "sub_lambda1";
    case ZeroClass::sublinear: return "p_sublinear";
    default: return "neither";
  }
}

double compute_pstar(double p, int dim) {
  validate_p(p);
  if (dim < 1) throw ParameterError("dimension must be a positive integer");
  const double n = static_cast<double>(dim);
  return p < n ? n * p / (n - p) : kInf;
}

double default_r(double p, int dim) {
  const double ps = compute_pstar(p, dim);
  return std::isfinite(ps) ? p + 0.9 * (ps - p) : p + 10.0;
}

HypothesisReport check_subcritical(const NonlinearityG& g, const SourceF& f, double p, int dim,
                                   double r, const TrendOptions& opt) {
  validate(opt);
  validate_r(p, dim, r);
  const auto pr = build_profile(g, p, grid_up(opt), true, false);
  const auto sm = sample_quotient(pr.s, f.sample_points(), false,
                         [&](double x, std::size_t k) {
                           const double la = pr.big_g[k] / (p - 1.0) + pr.log_i2[k];
                           return std::exp(log_f(f, x, pr.s[k]) + pr.big_g[k] - (r - 1.0) * la);
                         },
                         opt);
  auto rep = finish("H_SC", sm, limit_zero(sm.trend, opt), pr.note);
  rep.parameters = {{"p", p}, {"N", dim}, {"r", r}, {"pstar", compute_pstar(p, dim)}};
  return rep;
}

HypothesisReport check_ar_prime(const NonlinearityG& g, const SourceF& f, double p,
                                const TrendOptions& opt) {
  validate(opt);
  validate_p(p);
  if (!f.has_deriv()) throw ParameterError("(H_AR)' needs the s-derivative of f");
  const auto pr = build_profile(g, p, grid_up(opt), true, false);
  const auto sm = sample_quotient(pr.s, f.sample_points(), true,
                         [&](double x, std::size_t k) {
                           const double s = pr.s[k];
                           if (!(f(x, s) > 0.0)) return std::nan("");
                           return std::exp(pr.log_i2[k]) * (g(s) + f.log_derivative(x, s));
                         },
                         opt);
  auto rep = finish("H_AR_prime", sm, limit_above(sm.trend, p - 1.0, opt), pr.note);
  rep.parameters = {{"p", p}, {"bound", p - 1.0}};
  return rep;
}

ArIntegralReports check_ar_integral(const NonlinearityG& g, const SourceF& f, double p,
                                    double theta, std::vector<double> probes,
                                    const TrendOptions& opt) {
  validate(opt);
  validate_p(p);
  if (!(theta > p)) throw ParameterError("(H_AR)_1 needs theta > p");
  if (probes.empty()) probes = grid_up(opt);
  std::sort(probes.begin(), probes.end());
  if (probes.front() <= 0.0) throw ParameterError("probe points must be positive");
  const auto pr = build_profile(g, p, probes, true, false);
  const auto xs = f.sample_points();

  ArIntegralReports out;
  auto& ar1 = out.ar1;
  ar1.condition = "H_AR_1";
  std::vector<bool> sat;
  std::vector<double> log_phi;
  std::string note = pr.note;
  for (std::size_t k = 0; k < pr.s.size(); ++k) {
    const double s = pr.s[k];
    double worst = kInf;
    double worst_log_phi = kInf;
    bool ok = true;
    try {
      for (double x : xs) {
        const double lfs = log_f(f, x, s);
        if (!std::isfinite(lfs)) {
          ok = false;
          break;
        }
        double scale = decay_scale(g, p, s);
        if (f.has_deriv()) {
          const double ld = std::abs(f.log_derivative(x, s));
          if (ld > 0.0) scale = std::min(scale, 1.0 / ld);
        }
        if (scale < kResolution * s) {
          ok = false;
          break;
        }
        const auto i1 = integrate_below(
            g.eval, s,
            [&, x, lfs](double t, double tail) {
              if (t <= 0.0) return 0.0;
              return std::exp(-p * tail / (p - 1.0) + log_f(f, x, t) - lfs);
            },
            std::min(s, scale), kQuadTol);
        const double ratio = std::exp(pr.log_i2[k]) / (theta * i1.value);
        worst = std::min(worst, ratio);
        worst_log_phi =
            std::min(worst_log_phi, p * pr.big_g[k] / (p - 1.0) + lfs + std::log(i1.value));
      }
    } catch (const Error& e) {
      note = std::string("quadrature stopped at s = ") + fmt(s) + ": " + e.what();
      break;
    }
    if (!ok || std::isnan(worst)) {
      if (note.empty()) note = "probes stopped at s = " + fmt(s);
      break;
    }
    ar1.witness.emplace_back(s, worst);
    sat.push_back(worst >= 1.0 - 1e-9);
    log_phi.push_back(worst_log_phi);
  }
  const std::size_t n = sat.size();
  std::size_t run = 0;
  while (run < n && sat[n - 1 - run]) ++run;
  const std::size_t need = std::min<std::size_t>(static_cast<std::size_t>(opt.tail), probes.size());
  if (n == 0) {
    ar1.verdict = Verdict::inconclusive;
  } else if (!sat.back()) {
    ar1.verdict = Verdict::fails;
  } else if (run >= need) {
    ar1.verdict = Verdict::holds;
  } else {
    ar1.verdict = Verdict::inconclusive;
  }
  ar1.parameters = {{"p", p}, {"theta", theta}};
  add_note(ar1, "witness is A e^{-G/(p-1)} / (theta int_0^s e^{p(G(t)-G(s))/(p-1)} f(t)/f(s) dt); >= 1 satisfies the inequality");
  add_note(ar1, note);

  auto& ar2 = out.ar2;
  ar2.condition = "H_AR_2";
  ar2.parameters = {{"p", p}};
  add_note(ar2, "tested on all of Omega (worst case over x samples), stronger than the existential subdomain");
  if (ar1.verdict == Verdict::holds) {
    const std::size_t k0 = n - run;
    ar1.parameters["s0"] = pr.s[k0];
    const double delta = std::exp(log_phi[k0]);
    ar2.parameters["s0"] = pr.s[k0];
    ar2.parameters["delta"] = delta;
    ar2.witness.emplace_back(pr.s[k0], delta);
    ar2.verdict = delta > 0.0 ? Verdict::holds : Verdict::fails;
  } else {
    ar2.verdict = Verdict::inconclusive;
    add_note(ar2, "no s0 available from (H_AR)_1");
  }
  return out;
}

ZeroBehavior check_behavior_at_zero(const SourceF& f, double p, double lambda1,
                                    const TrendOptions& opt) {
  validate(opt);
  validate_p(p);
  if (!(lambda1 > 0.0)) throw ParameterError("lambda1 must be positive");
  const auto grid = grid_down(opt);
  const auto xs = f.sample_points();
  auto quotient = [&](double x, std::size_t k) {
    return std::exp(log_f(f, x, grid[k]) - (p - 1.0) * std::log(grid[k]));
  };
  const auto upper = sample_quotient(grid, xs, false, quotient, opt);
  const auto lower = sample_quotient(grid, xs, true, quotient, opt);
  ZeroBehavior out;
  out.h_lambda1 = finish("H_lambda1", upper, limit_below(upper.trend, lambda1, opt), "");
  out.h_lambda1.parameters = {{"p", p}, {"lambda1", lambda1}};
  out.h1 = finish("H_1", lower, limit_infinite(lower.trend), "");
  out.h1.parameters = {{"p", p}};
  if (out.h_lambda1.verdict == Verdict::holds) {
    out.cls = ZeroClass::sub_lambda1;
  } else if (out.h1.verdict == Verdict::holds) {
    out.cls = ZeroClass::sublinear;
  }
  return out;
}

MonotoneReports check_monotone_and_superlinear(const NonlinearityG& g, const SourceF& f,
                                               double p, const TrendOptions& opt) {
  validate(opt);
  validate_p(p);
  const bool deriv = f.has_deriv();
  const auto pr = build_profile(g, p, grid_up(opt), true, deriv);
  const auto xs = f.sample_points();
  auto r_quot = [&](double x, std::size_t k) {
    return std::exp(log_f(f, x, pr.s[k]) - (p - 1.0) * pr.log_i2[k]);
  };

  MonotoneReports out;
  Verdict vm = Verdict::holds;
  double s0 = 0.0;
  Sampled first;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const auto sm = sample_quotient(pr.s, {xs[i]}, true, r_quot, opt);
    double s0x = 0.0;
    vm = combine(vm, eventually_nondecreasing(sm.trend, &s0x));
    s0 = std::max(s0, s0x);
    if (i == 0) first = sm;
  }
  out.h_m = finish("H_m", first, vm, pr.note);
  out.h_m.parameters = {{"p", p}};
  if (vm == Verdict::holds) out.h_m.parameters["s0"] = s0;

  const auto lower = sample_quotient(pr.s, xs, true, r_quot, opt);
  out.h_inf = finish("H_inf", lower, limit_infinite(lower.trend), pr.note);
  out.h_inf.parameters = {{"p", p}};

  if (!deriv) {
    out.h_m_prime.condition = "H_m_prime";
    out.h_m_prime.verdict = Verdict::inconclusive;
    out.h_m_prime.notes = "f has no s-derivative";
    return out;
  }
  const auto mp = sample_quotient(pr.s, xs, true,
                         [&](double x, std::size_t k) {
                           const double s = pr.s[k];
                           if (!(f(x, s) > 0.0)) return std::nan("");
                           const double ld = f.log_derivative(x, s);
                           const double den = pr.d_tilde[k];
                           if (den <= 0.0) return ld >= 0.0 ? kInf : -kInf;
                           return ld * std::exp(pr.log_i2[k]) / den;
                         },
                         opt);
  out.h_m_prime = finish("H_m_prime", mp, limit_above(mp.trend, 1.0, opt), pr.note);
  out.h_m_prime.parameters = {{"p", p}, {"bound", 1.0}};
  if (mp.trend.overflow) {
    add_note(out.h_m_prime, "a denominator that underflows or turns nonpositive while f' >= 0 counts as +inf");
  }
  return out;
}

HypothesisReport check_h2(const SourceF& f, double p, double lambda1_laplace,
                          double lambda1_plaplace, const TrendOptions& opt) {
  validate(opt);
  validate_p(p);
  const auto xs = f.sample_points();
  HypothesisReport best;
  best.verdict = Verdict::fails;
  double best_inf = 0.0;
  for (double x : xs) {
    auto quotient = [&](double xx, std::size_t, double s) {
      return std::exp(log_f(f, xx, s) - (p - 1.0) * std::log(s));
    };
    const auto down = grid_down(opt);
    const auto up = grid_up(opt);
    const auto at_zero = sample_quotient(down, {x}, true,
                                [&](double xx, std::size_t k) { return quotient(xx, k, down[k]); }, opt);
    const auto at_inf = sample_quotient(up, {x}, true,
                               [&](double xx, std::size_t k) { return quotient(xx, k, up[k]); }, opt);
    double inf = kInf;
    for (double v : at_zero.trend.q) inf = std::min(inf, v);
    for (double v : at_inf.trend.q) inf = std::min(inf, v);
    Verdict v = Verdict::inconclusive;
    if (limit_zero(at_zero.trend, opt) == Verdict::holds ||
        limit_zero(at_inf.trend, opt) == Verdict::holds || !(inf > 0.0)) {
      v = Verdict::fails;
    } else if (limit_zero(at_zero.trend, opt) == Verdict::fails &&
               limit_zero(at_inf.trend, opt) == Verdict::fails) {
      v = Verdict::holds;
    }
    if (v == Verdict::holds || (v == Verdict::inconclusive && best.verdict == Verdict::fails)) {
      best.verdict = v;
      best.witness.clear();
      for (std::size_t i = at_zero.trend.s.size(); i-- > 0;) {
        best.witness.emplace_back(at_zero.trend.s[i], at_zero.trend.q[i]);
      }
      for (std::size_t i = 1; i < at_inf.trend.s.size(); ++i) {
        best.witness.emplace_back(at_inf.trend.s[i], at_inf.trend.q[i]);
      }
      best_inf = inf;
    }
    if (best.verdict == Verdict::holds) break;
  }
  best.condition = "H_2";
  best.parameters = {{"p", p},
                     {"inf_quotient", best_inf},
                     {"lambda1_laplace", lambda1_laplace},
                     {"lambda1_plaplace", lambda1_plaplace}};
  best.notes = "sampled assertion on f/s^(p-1) over the trend grids toward 0 and infinity";
  return best;
}

HypothesisReport check_h3(const SourceF& f, double p, double s0, const TrendOptions& opt) {
  validate(opt);
  validate_p(p);
  if (!(s0 > 0.0)) throw ParameterError("s0 must be positive");
  HypothesisReport rep;
  rep.condition = "H_3";
  if (!f.has_deriv()) {
    rep.verdict = Verdict::inconclusive;
    rep.notes = "f has no s-derivative";
    return rep;
  }
  TrendOptions o = opt;
  o.s_base = s0;
  const auto grid = grid_down(o);
  const auto sm = sample_quotient(grid, f.sample_points(), false,
                         [&](double x, std::size_t k) {
                           const double s = grid[k];
                           return std::max(0.0, -f.derivative(x, s) /
                                                    ((p - 1.0) * std::pow(s, p - 2.0)));
                         },
                         o);
  double b = 0.0;
  for (double v : sm.trend.q) b = std::max(b, v);
  const Verdict unbounded = limit_infinite(sm.trend);
  Verdict v = Verdict::inconclusive;
  if (unbounded == Verdict::holds) {
    v = Verdict::fails;
  } else if (sm.trend.kind != TrendKind::insufficient &&
             (unbounded == Verdict::fails || sm.trend.nonincreasing)) {
    v = Verdict::holds;
  }
  rep = finish("H_3", sm, v, "");
  rep.parameters = {{"p", p}, {"s0", s0}, {"B", b}};
  add_note(rep, "sampled assertion on (0, s0]");
  return rep;
}

HypothesisReport check_h4(const SourceF& f, const TrendOptions& opt) {
  validate(opt);
  HypothesisReport rep;
  rep.condition = "H_4";
  rep.verdict = Verdict::holds;
  auto grid = grid_down(opt);
  const auto up = grid_up(opt);
  std::reverse(grid.begin(), grid.end());
  grid.insert(grid.end(), up.begin() + 1, up.end());
  for (double x : f.sample_points()) {
    for (double s : grid) {
      const double v = f(x, s);
      if (!(v > 0.0) && !(std::isinf(v) && v > 0.0)) {
        rep.verdict = Verdict::fails;
        rep.witness.emplace_back(s, v);
        rep.notes = "f vanishes at x = " + fmt(x) + ", s = " + fmt(s);
        return rep;
      }
    }
  }
  rep.notes = "sampled positivity on s in [" + fmt(grid.front()) + ", " + fmt(grid.back()) + "]";
  return rep;
}

RegimeTag classify_regime(const NonlinearityG& g, const TrendOptions& opt) {
  validate(opt);
  const auto grid = grid_up(opt);
  const std::vector<double> x0{0.0};
  auto run = [&](const QuotientFn& q) { return sample_quotient(grid, x0, true, q, opt).trend; };
  const auto tg = run([&](double, std::size_t k) { return g(grid[k]); });
  RegimeTag tag;
  if (limit_zero(tg, opt) == Verdict::holds) {
    const auto tsg = run([&](double, std::size_t k) { return grid[k] * g(grid[k]); });
    if (limit_infinite(tsg) == Verdict::holds) {
      if (!g.has_deriv()) {
        tag.note = "g' needed to test g'/g^2 -> 0";
        return tag;
      }
      const auto tq = run([&](double, std::size_t k) {
        const double v = g(grid[k]);
        return std::abs(g.deriv(grid[k])) / (v * v);
      });
      if (limit_zero(tq, opt) == Verdict::holds) {
        tag.kind = RegimeKind::g_to_zero_sg_to_inf;
      } else {
        tag.note = "s g(s) -> inf but g'/g^2 does not tend to 0";
      }
      return tag;
    }
    if (limit_zero(tsg, opt) == Verdict::holds) {
      tag.kind = RegimeKind::g_to_zero_sg_to_c;
      tag.value = 0.0;
      return tag;
    }
    if (tsg.kind == TrendKind::stationary || tsg.kind == TrendKind::geometric) {
      tag.kind = RegimeKind::g_to_zero_sg_to_c;
      tag.value = std::max(0.0, tsg.limit);
      return tag;
    }
    tag.note = "g -> 0 but s g(s) has no resolved limit";
    return tag;
  }
  if ((tg.kind == TrendKind::stationary || tg.kind == TrendKind::geometric) &&
      tg.limit > opt.eps_zero) {
    tag.kind = RegimeKind::g_inf_positive;
    tag.value = tg.limit;
    return tag;
  }
  if (limit_infinite(tg) == Verdict::holds) {
    if (!g.has_deriv()) {
      tag.note = "g' needed to test boundedness of g'/g";
      return tag;
    }
    const auto tq = run([&](double, std::size_t k) {
      return std::abs(g.deriv(grid[k]) / g(grid[k]));
    });
    if (limit_infinite(tq) == Verdict::fails) {
      tag.kind = RegimeKind::g_to_inf_log_deriv_bounded;
    } else {
      tag.note = "g -> inf but g'/g is not resolved as bounded";
    }
    return tag;
  }
  tag.note = "no regime matched; g trend " + to_string(tg.kind);
  return tag;
}

RegimeReports check_regime_conditions(const NonlinearityG& g, const SourceF& f, double p,
                                      int dim, const RegimeTag& tag, double r,
                                      const TrendOptions& opt) {
  validate(opt);
  validate_r(p, dim, r);
  if (tag.kind == RegimeKind::unclassified) {
    throw ParameterError("regime conditions need a classified g");
  }
  if (!f.has_deriv()) throw ParameterError("regime conditions need the s-derivative of f");
  const auto pr = build_profile(g, p, grid_up(opt), false, false);
  const auto xs = f.sample_points();
  const double e = (r - p) / (p - 1.0);
  QuotientFn sc;
  QuotientFn ar;
  double bound = 0.0;
  std::string sc_text;
  std::string ar_text;
  switch (tag.kind) {
    case RegimeKind::g_inf_positive:
      sc = [&](double x, std::size_t k) { return std::exp(log_f(f, x, pr.s[k]) - e * pr.big_g[k]); };
      ar = [&](double x, std::size_t k) { return f.log_derivative(x, pr.s[k]); };
      sc_text = "f / e^{(r-p)G/(p-1)} -> 0";
      ar_text = "f'/f -> limit > 0";
      break;
    case RegimeKind::g_to_zero_sg_to_inf:
      sc = [&](double x, std::size_t k) {
        const double s = pr.s[k];
        return std::exp(log_f(f, x, s) + (r - 1.0) * std::log(g(s)) - e * pr.big_g[k]);
      };
      ar = [&](double x, std::size_t k) {
        const double s = pr.s[k];
        return f.log_derivative(x, s) / g(s);
      };
      sc_text = "f g^{r-1} / e^{(r-p)G/(p-1)} -> 0";
      ar_text = "f'/(f g) -> limit > 0";
      break;
    case RegimeKind::g_to_zero_sg_to_c:
      sc = [&](double x, std::size_t k) {
        const double s = pr.s[k];
        return std::exp(log_f(f, x, s) - (r - 1.0) * std::log(s));
      };
      ar = [&](double x, std::size_t k) {
        const double s = pr.s[k];
        return s * f.log_derivative(x, s);
      };
      bound = p - 1.0 + tag.value;
      sc_text = "f / s^{r-1} -> 0";
      ar_text = "s f'/f -> limit > p - 1 + c";
      break;
    default:
      sc = [&](double x, std::size_t k) { return std::exp(log_f(f, x, pr.s[k]) - e * pr.big_g[k]); };
      ar = [&](double x, std::size_t k) {
        const double s = pr.s[k];
        return f.log_derivative(x, s) / g(s);
      };
      sc_text = "f / e^{(r-p)G/(p-1)} -> 0";
      ar_text = "f'/(f g) -> limit > 0";
      break;
  }
  const auto ssc = sample_quotient(pr.s, xs, false, sc, opt);
  const auto sar = sample_quotient(pr.s, xs, true, ar, opt);
  RegimeReports out;
  out.sc = finish("regime_SC", ssc, limit_zero(ssc.trend, opt), pr.note);
  add_note(out.sc, to_string(tag.kind) + ": " + sc_text);
  out.sc.parameters = {{"p", p}, {"N", dim}, {"r", r}, {"regime_value", tag.value}};
  out.ar = finish("regime_AR", sar, limit_above(sar.trend, bound, opt), pr.note);
  add_note(out.ar, to_string(tag.kind) + ": " + ar_text);
  out.ar.parameters = {{"p", p}, {"bound", bound}, {"regime_value", tag.value}};
  out.ar_equivalent = out.ar;
  if (tag.kind == RegimeKind::g_to_zero_sg_to_c) {
    out.ar_equivalent = finish("regime_AR_equivalent", sar, limit_above(sar.trend, p - 1.0, opt),
                               pr.note);
    add_note(out.ar_equivalent, to_string(tag.kind) + ": s f'/f -> limit > p - 1");
    out.ar_equivalent.parameters = {{"p", p}, {"bound", p - 1.0}, {"regime_value", tag.value}};
  }
  return out;
}

CrossValidation cross_validate(const NonlinearityG& g, const SourceF& f, double p, int dim,
                               double r, const TrendOptions& opt) {
  CrossValidation cv;
  cv.tag = classify_regime(g, opt);
  if (cv.tag.kind == RegimeKind::unclassified) {
    throw ParameterError("cross validation needs a classified g: " + cv.tag.note);
  }
  const auto sc = check_subcritical(g, f, p, dim, r, opt);
  const auto ar = check_ar_prime(g, f, p, opt);
  const auto reg = check_regime_conditions(g, f, p, dim, cv.tag, r, opt);
  cv.general = {sc, ar};
  cv.regime = {reg.sc, reg.ar};
  if (reg.ar_equivalent.condition != reg.ar.condition) cv.regime.push_back(reg.ar_equivalent);
  auto clash = [](const HypothesisReport& a, const HypothesisReport& b) {
    return a.verdict != Verdict::inconclusive && b.verdict != Verdict::inconclusive &&
           a.verdict != b.verdict;
  };
  if (clash(sc, reg.sc)) {
    cv.disagreements.push_back("H_SC " + to_string(sc.verdict) + " vs regime_SC " +
                               to_string(reg.sc.verdict));
  }
  if (clash(ar, reg.ar)) {
    cv.disagreements.push_back("H_AR_prime " + to_string(ar.verdict) + " vs regime_AR " +
                               to_string(reg.ar.verdict));
  }
  return cv;
}

}  // namespace natgrad
