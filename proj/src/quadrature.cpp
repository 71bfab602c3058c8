#include "natgrad/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <vector>

#include "natgrad/errors.hpp"

namespace natgrad {

namespace {

struct Segment {
  double a, b, fa, fm, fb, whole, tol;
  int depth;
};

double checked(const ScalarFn& f, double t) {
  const double v = f(t);
  if (!std::isfinite(v)) {
    std::ostringstream os;
    os << "non-finite integrand value at t = " << t;
    throw QuadratureError(os.str());
  }
  return v;
}

}  // namespace

QuadratureResult adaptive_simpson(const ScalarFn& f, double a, double b,
                                  const QuadratureOptions& opt) {
  QuadratureResult out;
  if (a == b) return out;
  const double sign = b > a ? 1.0 : -1.0;
  if (b < a) std::swap(a, b);

  const double m = 0.5 * (a + b);
  const double fa = checked(f, a), fm = checked(f, m), fb = checked(f, b);
  out.evaluations = 3;
  const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
  const double tol = opt.abs_tol + opt.rel_tol * std::abs(whole);

  std::vector<Segment> stack;
  stack.reserve(128);
  stack.push_back({a, b, fa, fm, fb, whole, tol, 0});
  double unresolved = 0.0;
  std::size_t processed = 0;

  while (!stack.empty()) {
    const Segment s = stack.back();
    stack.pop_back();
    if (++processed > opt.max_intervals) {
      throw QuadratureError("adaptive Simpson exceeded its interval budget");
    }
    const double mid = 0.5 * (s.a + s.b);
    const double lm = 0.5 * (s.a + mid), rm = 0.5 * (mid + s.b);
    const double flm = checked(f, lm), frm = checked(f, rm);
    out.evaluations += 2;
    const double left = (mid - s.a) / 6.0 * (s.fa + 4.0 * flm + s.fm);
    const double right = (s.b - mid) / 6.0 * (s.fm + 4.0 * frm + s.fb);
    const double delta = left + right - s.whole;
    const bool at_floor = (mid <= s.a || mid >= s.b);
    if (std::abs(delta) <= 15.0 * s.tol || s.depth >= opt.max_depth || at_floor) {
      if (std::abs(delta) > 15.0 * s.tol) unresolved += std::abs(delta) / 15.0;
      out.value += left + right + delta / 15.0;
      out.error += std::abs(delta) / 15.0;
      continue;
    }
    stack.push_back({mid, s.b, s.fm, frm, s.fb, right, 0.5 * s.tol, s.depth + 1});
    stack.push_back({s.a, mid, s.fa, flm, s.fm, left, 0.5 * s.tol, s.depth + 1});
  }
  if (unresolved > tol) {
    std::ostringstream os;
    os << "adaptive Simpson did not converge on [" << a << ", " << b
       << "]: unresolved error " << unresolved << " exceeds tolerance " << tol
       << " (non-integrable integrand?)";
    throw QuadratureError(os.str());
  }
  out.value *= sign;
  return out;
}

QuadratureResult integrate_dyadic(const ScalarFn& f, double a, double b,
                                  const QuadratureOptions& opt) {
  QuadratureResult out;
  if (a == b) return out;
  if (b < a) {
    auto r = integrate_dyadic(f, b, a, opt);
    r.value = -r.value;
    return r;
  }
  const double span = b - a;
  double lo = a;
  double width = std::min(1.0, span);
  while (lo < b) {
    const double hi = (b - lo <= width * 1.5) ? b : lo + width;
    QuadratureOptions local = opt;
    local.abs_tol = opt.abs_tol * (hi - lo) / span;
    local.rel_tol = std::max(opt.rel_tol, 1e-15);
    const auto r = adaptive_simpson(f, lo, hi, local);
    out.value += r.value;
    out.error += r.error;
    out.evaluations += r.evaluations;
    lo = hi;
    width *= 2.0;
  }
  return out;
}

QuadratureResult integrate_below(const ScalarFn& g, double s, const TailKernel& kernel,
                                 double first_width, double rel_tol) {
  QuadratureResult out;
  if (s <= 0.0) return out;
  double width = std::clamp(first_width, s * 1e-15, s);
  double hi = s;
  double tail_at_hi = 0.0;
  int quiet = 0;
  QuadratureOptions inner;
  inner.rel_tol = 1e-13;
  inner.abs_tol = 0.0;
  inner.max_depth = 40;

  while (hi > 0.0) {
    const double lo = (hi - width <= 0.5 * width) ? 0.0 : hi - width;
    const double base = tail_at_hi;
    const double panel_hi = hi;
    auto integrand = [&](double t) {
      double tail = base;
      if (t < panel_hi) tail += adaptive_simpson(g, t, panel_hi, inner).value;
      return kernel(t, tail);
    };
    QuadratureOptions outer;
    outer.rel_tol = rel_tol;
    outer.abs_tol = rel_tol * std::abs(out.value) + 1e-300;
    outer.max_depth = 45;
    const auto r = adaptive_simpson(integrand, lo, hi, outer);
    out.value += r.value;
    out.error += r.error;
    out.evaluations += r.evaluations;
    tail_at_hi += adaptive_simpson(g, lo, hi, inner).value;
    if (std::abs(r.value) <= 1e-17 * std::abs(out.value)) {
      if (++quiet >= 2) break;
    } else {
      quiet = 0;
    }
    hi = lo;
    width *= 2.0;
  }
  return out;
}

}  // namespace natgrad
