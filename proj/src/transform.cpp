#include "natgrad/transform.hpp"

#include <algorithm>
#include <cfloat>
#include <cmath>
#include <sstream>

#include "natgrad/errors.hpp"
#include "natgrad/quadrature.hpp"

namespace natgrad {

namespace {

const double kLogMax = std::log(DBL_MAX);
constexpr double kGrowthRatio = 1.05;
constexpr double kMaxRelativeChange = 0.05;
constexpr std::size_t kMaxNodes = 2'000'000;

double hermite(double x0, double x1, double y0, double y1, double d0, double d1, double t) {
  const double h = x1 - x0;
  const double u = (t - x0) / h;
  const double u2 = u * u, u3 = u2 * u;
  return y0 * (2 * u3 - 3 * u2 + 1) + h * d0 * (u3 - 2 * u2 + u) + y1 * (-2 * u3 + 3 * u2) +
         h * d1 * (u3 - u2);
}

double hermite_slope(double x0, double x1, double y0, double y1, double d0, double d1, double t) {
  const double h = x1 - x0;
  const double u = (t - x0) / h;
  const double u2 = u * u;
  return (y0 * (6 * u2 - 6 * u) + y1 * (-6 * u2 + 6 * u)) / h + d0 * (3 * u2 - 4 * u + 1) +
         d1 * (3 * u2 - 2 * u);
}

std::size_t locate(const std::vector<double>& grid, double t) {
  auto it = std::upper_bound(grid.begin(), grid.end(), t);
  std::size_t c = it == grid.begin() ? 0 : static_cast<std::size_t>(it - grid.begin()) - 1;
  return std::min(c, grid.size() - 2);
}

struct Node {
  double s, big_g, a, aprime, g;
};

// Quadrature of g and of exp(G/(p-1)) from a known node to t.
Node advance(const NonlinearityG& g, double p, const Node& from, double t, double tol) {
  QuadratureOptions og;
  og.rel_tol = 0.01 * tol;
  og.abs_tol = 1e-300;
  const double dg = adaptive_simpson(g.eval, from.s, t, og).value;
  const double big_g = from.big_g + dg;
  if (!std::isfinite(big_g) || big_g / (p - 1.0) > kLogMax) {
    std::ostringstream os;
    os << "exp(G(s)/(p-1)) exceeds the representable range at s = " << t;
    throw OverflowError(os.str(), t);
  }
  QuadratureOptions inner;
  inner.rel_tol = 0.01 * tol;
  inner.abs_tol = 1e-300;
  auto integrand = [&](double tau) {
    const double local = tau > from.s ? adaptive_simpson(g.eval, from.s, tau, inner).value : 0.0;
    return std::exp((from.big_g + local) / (p - 1.0));
  };
  QuadratureOptions oa;
  oa.rel_tol = 0.01 * tol;
  oa.abs_tol = 1e-300;
  const double da = adaptive_simpson(integrand, from.s, t, oa).value;
  Node out{t, big_g, from.a + da, std::exp(big_g / (p - 1.0)), g(t)};
  if (!std::isfinite(out.a)) {
    std::ostringstream os;
    os << "A(s) exceeds the representable range at s = " << t;
    throw OverflowError(os.str(), t);
  }
  return out;
}

bool cell_ok(const Node& lo, const Node& hi, const Node& mid, double tol) {
  if (hi.aprime > lo.aprime * (1.0 + kMaxRelativeChange)) return false;
  const double a_interp = hermite(lo.s, hi.s, lo.a, hi.a, lo.aprime, hi.aprime, mid.s);
  if (std::abs(a_interp - mid.a) > tol * std::abs(mid.a) + 1e-300) return false;
  const double g_interp = hermite(lo.s, hi.s, lo.big_g, hi.big_g, lo.g, hi.g, mid.s);
  return std::abs(g_interp - mid.big_g) <= tol * (1.0 + std::abs(mid.big_g));
}

void check_range(double s, double lo, double hi, const char* what) {
  const double slack = 1e-12 * std::max(1.0, std::abs(hi));
  if (s < lo - slack || s > hi + slack || std::isnan(s)) {
    std::ostringstream os;
    os << what << " = " << s << " outside the tabulated range [" << lo << ", " << hi << "]";
    throw RangeError(os.str(), s < lo ? lo : hi);
  }
}

}  // namespace

double big_g(const NonlinearityG& g, double s, double tol) {
  if (s < 0.0 || std::isnan(s)) throw ParameterError("big_g: s must be nonnegative");
  if (!(tol > 0.0)) throw ParameterError("big_g: tolerance must be positive");
  QuadratureOptions opt;
  opt.abs_tol = tol;
  return integrate_dyadic(g.eval, 0.0, s, opt).value;
}

TransformTable build_transform(const NonlinearityG& g, double p, double s_max, double tol) {
  if (!(p > 1.0)) throw ParameterError("build_transform: p must exceed 1");
  if (!(s_max > 0.0)) throw ParameterError("build_transform: s_max must be positive");
  if (!(tol > 0.0)) throw ParameterError("build_transform: tolerance must be positive");

  std::vector<double> grid{0.0};
  for (double s = std::max(1e-9 * s_max, 1e-14); s < s_max; s *= kGrowthRatio) grid.push_back(s);
  if (grid.back() > s_max * (1.0 - 1e-3) && grid.size() > 1) grid.pop_back();
  grid.push_back(s_max);

  std::vector<Node> nodes;
  nodes.reserve(grid.size());
  nodes.push_back({0.0, 0.0, 0.0, 1.0, g(0.0)});
  for (std::size_t i = 1; i < grid.size(); ++i) nodes.push_back(advance(g, p, nodes.back(), grid[i], tol));

  for (bool changed = true; changed;) {
    changed = false;
    std::vector<Node> next;
    next.reserve(nodes.size() * 2);
    next.push_back(nodes.front());
    for (std::size_t i = 0; i + 1 < nodes.size(); ++i) {
      const Node& lo = nodes[i];
      const Node& hi = nodes[i + 1];
      if (i > 0) {
        const Node mid = advance(g, p, lo, 0.5 * (lo.s + hi.s), tol);
        if (!cell_ok(lo, hi, mid, tol)) {
          next.push_back(mid);
          changed = true;
        }
      }
      next.push_back(hi);
    }
    if (next.size() > kMaxNodes) throw QuadratureError("build_transform: grid refinement did not settle");
    nodes = std::move(next);
  }

  TransformTable t;
  t.p = p;
  t.quad_tol = tol;
  for (const Node& n : nodes) {
    t.s_grid.push_back(n.s);
    t.a_values.push_back(n.a);
    t.aprime_values.push_back(n.aprime);
    t.big_g_values.push_back(n.big_g);
    t.g_values.push_back(n.g);
  }
  return t;
}

double usable_range(const NonlinearityG& g, double p, double s_cap) {
  const double limit = 0.999 * kLogMax * (p - 1.0) / p;
  auto big = [&](double s) { return big_g(g, s, 1e-9); };
  if (big(s_cap) <= limit) return s_cap;
  double lo = 0.0, hi = s_cap;
  for (int it = 0; it < 200 && hi - lo > 1e-12 * hi; ++it) {
    const double mid = 0.5 * (lo + hi);
    (big(mid) <= limit ? lo : hi) = mid;
  }
  return lo;
}

double eval_A(const TransformTable& t, double s) {
  check_range(s, 0.0, t.s_max(), "s");
  s = std::clamp(s, 0.0, t.s_max());
  const std::size_t c = locate(t.s_grid, s);
  return hermite(t.s_grid[c], t.s_grid[c + 1], t.a_values[c], t.a_values[c + 1],
                 t.aprime_values[c], t.aprime_values[c + 1], s);
}

double eval_G(const TransformTable& t, double s) {
  check_range(s, 0.0, t.s_max(), "s");
  s = std::clamp(s, 0.0, t.s_max());
  const std::size_t c = locate(t.s_grid, s);
  return hermite(t.s_grid[c], t.s_grid[c + 1], t.big_g_values[c], t.big_g_values[c + 1],
                 t.g_values[c], t.g_values[c + 1], s);
}

double eval_A_prime(const TransformTable& t, double s) {
  return std::exp(eval_G(t, s) / (t.p - 1.0));
}

double invert_A(const TransformTable& t, double v) {
  check_range(v, 0.0, t.a_max(), "v");
  v = std::clamp(v, 0.0, t.a_max());
  if (v == 0.0) return 0.0;
  const std::size_t c = locate(t.a_values, v);
  const double x0 = t.s_grid[c], x1 = t.s_grid[c + 1];
  const double y0 = t.a_values[c], y1 = t.a_values[c + 1];
  const double d0 = t.aprime_values[c], d1 = t.aprime_values[c + 1];
  if (v == y0) return x0;
  if (v == y1) return x1;
  double lo = x0, hi = x1;
  double x = x0 + (v - y0) / (y1 - y0) * (x1 - x0);
  for (int it = 0; it < 100; ++it) {
    const double r = hermite(x0, x1, y0, y1, d0, d1, x) - v;
    if (r == 0.0) break;
    (r > 0.0 ? hi : lo) = x;
    const double slope = hermite_slope(x0, x1, y0, y1, d0, d1, x);
    double next = x - r / slope;
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    if (std::abs(next - x) <= 1e-16 * std::max(std::abs(x), x1)) {
      x = next;
      break;
    }
    x = next;
  }
  return x;
}

TransformedProblem::TransformedProblem(NonlinearityG g, SourceF f, TablePtr table)
    : g_(std::move(g)), f_(std::move(f)), table_(std::move(table)) {
  if (!table_) throw ParameterError("transformed problem without table");
  const auto& t = *table_;
  for (std::size_t i = 0; i < t.size(); i += std::max<std::size_t>(1, t.size() / 16)) {
    const double expect = g_(t.s_grid[i]);
    if (std::abs(expect - t.g_values[i]) > 1e-12 * (1.0 + std::abs(expect))) {
      throw ParameterError("transform table was built from a different g");
    }
  }
  if (!f_.x_samples.empty()) return;

  // Tabulate Phi on the transform grid, refining where the Hermite
  // interpolant misses the midpoint quadrature.
  const double tol = t.quad_tol;
  struct P {
    double t, value, rate;
  };
  auto rate_at = [&](double s) { return phi_integrand(0.0, s); };
  auto cell = [&](double a, double b) {
    QuadratureOptions o;
    o.rel_tol = 0.01 * tol;
    o.abs_tol = 1e-300;
    return adaptive_simpson([&](double s) { return rate_at(s); }, a, b, o).value;
  };
  std::vector<P> pts{{0.0, 0.0, rate_at(0.0)}};
  for (std::size_t i = 1; i < t.size(); ++i) {
    const double r = rate_at(t.s_grid[i]);
    if (!std::isfinite(r)) break;
    const double v = pts.back().value + cell(pts.back().t, t.s_grid[i]);
    if (!std::isfinite(v)) break;
    pts.push_back({t.s_grid[i], v, r});
  }
  for (bool changed = true; changed;) {
    changed = false;
    std::vector<P> next{pts.front()};
    for (std::size_t i = 0; i + 1 < pts.size(); ++i) {
      const P& lo = pts[i];
      const P& hi = pts[i + 1];
      if (i > 0) {
        const double m = 0.5 * (lo.t + hi.t);
        const double truth = lo.value + cell(lo.t, m);
        const double interp = hermite(lo.t, hi.t, lo.value, hi.value, lo.rate, hi.rate, m);
        if (std::abs(interp - truth) > tol * std::abs(truth) + 1e-300) {
          next.push_back({m, truth, rate_at(m)});
          changed = true;
        }
      }
      next.push_back(hi);
    }
    if (next.size() > kMaxNodes) throw QuadratureError("primitive of h: refinement did not settle");
    pts = std::move(next);
  }
  for (const P& q : pts) {
    phi_t_.push_back(q.t);
    phi_values_.push_back(q.value);
    phi_rates_.push_back(q.rate);
  }
}

double TransformedProblem::phi_integrand(double x, double t) const {
  const double p = table_->p;
  const double fx = f_(x, t);
  if (fx == 0.0) return 0.0;
  return std::exp(p * eval_G(*table_, t) / (p - 1.0)) * fx;
}

double TransformedProblem::primitive(double x, double t) const {
  if (phi_t_.empty()) {
    QuadratureOptions o;
    o.abs_tol = 1e-300;
    o.rel_tol = table_->quad_tol;
    return integrate_dyadic([&](double s) { return phi_integrand(x, s); }, 0.0, t, o).value;
  }
  if (phi_t_.size() < 2 || t > phi_t_.back() * (1.0 + 1e-12)) {
    std::ostringstream os;
    os << "H exceeds the representable range at A^{-1}(v) = " << t;
    throw OverflowError(os.str(), t);
  }
  t = std::min(t, phi_t_.back());
  const std::size_t c = locate(phi_t_, t);
  return hermite(phi_t_[c], phi_t_[c + 1], phi_values_[c], phi_values_[c + 1], phi_rates_[c],
                 phi_rates_[c + 1], t);
}

double TransformedProblem::h(double x, double v) const {
  if (v < 0.0) return 0.0;
  if (v == 0.0) return f_(x, 0.0);
  const double t = invert_A(*table_, v);
  const double fx = f_(x, t);
  if (fx == 0.0) return 0.0;
  const double out = std::exp(eval_G(*table_, t)) * fx;
  if (!std::isfinite(out)) {
    std::ostringstream os;
    os << "h(x, v) exceeds the representable range at v = " << v;
    throw OverflowError(os.str(), v);
  }
  return out;
}

double TransformedProblem::dh(double x, double v) const {
  if (v < 0.0) return 0.0;
  const double p = table_->p;
  if (f_.has_deriv()) {
    const double t = invert_A(*table_, v);
    const double big = eval_G(*table_, t);
    return std::exp((p - 2.0) * big / (p - 1.0)) * (g_(t) * f_(x, t) + f_.derivative(x, t));
  }
  const double step = 1e-7 * (1.0 + v);
  const double lo = std::max(0.0, v - step);
  const double hi = std::min(table_->a_max(), v + step);
  return (h(x, hi) - h(x, lo)) / (hi - lo);
}

double TransformedProblem::big_h(double x, double v) const {
  if (v <= 0.0) return 0.0;
  return primitive(x, invert_A(*table_, v));
}

TransformedProblem transformed_nonlinearity(const NonlinearityG& g, const SourceF& f,
                                            TablePtr table) {
  return TransformedProblem(g, f, std::move(table));
}

Field push_forward(const TransformTable& table, const Field& u) {
  Field out = u;
  for (double& x : out.values) x = x == 0.0 ? 0.0 : eval_A(table, x);
  return out;
}

Field pull_back(const TransformTable& table, const Field& v) {
  Field out = v;
  for (double& x : out.values) x = x == 0.0 ? 0.0 : invert_A(table, x);
  return out;
}

}  // namespace natgrad
