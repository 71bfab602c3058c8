#pragma once

#include <cstddef>
#include <functional>

namespace natgrad {

using ScalarFn = std::function<double(double)>;

struct QuadratureOptions {
  double abs_tol = 1e-12;
  /// Added to abs_tol, scaled by the magnitude of a coarse first estimate.
  double rel_tol = 0.0;
  int max_depth = 50;
  std::size_t max_intervals = 4'000'000;
};

struct QuadratureResult {
  double value = 0.0;
  double error = 0.0;
  std::size_t evaluations = 0;
};

/// Adaptive Simpson rule driven by an explicit interval stack.
///
/// Intervals that hit max_depth are accepted with their local error estimate;
/// if the accumulated unresolved error exceeds the tolerance the integrand is
/// treated as non-integrable and QuadratureError is thrown. Non-finite
/// integrand values also throw.
QuadratureResult adaptive_simpson(const ScalarFn& f, double a, double b,
                                  const QuadratureOptions& opt = {});

/// Integral over [a, b] split into panels of doubling width ([a, a+1],
/// [a+1, a+2], [a+2, a+4], ...). Suited to long ranges with slowly varying
/// integrands. The tolerance is shared among panels in proportion to width,
/// floored at double precision relative to each panel.
QuadratureResult integrate_dyadic(const ScalarFn& f, double a, double b,
                                  const QuadratureOptions& opt = {});

/// Integrand of integrate_below: kernel(t, tail) where tail = \int_t^s g.
using TailKernel = std::function<double(double t, double tail)>;

/// Computes \int_0^s kernel(t, \int_t^s g) dt scanning panels downward from s.
///
/// The first panel is [s - first_width, s]; widths double afterwards. The
/// tail integral of g is accumulated panel by panel, so the exponent
/// differences G(t) - G(s) never suffer cancellation against a huge G(s).
/// The scan stops early once two consecutive panels contribute less than
/// 1e-17 of the running sum.
QuadratureResult integrate_below(const ScalarFn& g, double s, const TailKernel& kernel,
                                 double first_width, double rel_tol);

}  // namespace natgrad
