#pragma once

#include <functional>

namespace oracle {

/// Radial shooting for -(r^(N-1) |u'|^(p-2) u')' = r^(N-1) F(u), u(0) = a, u'(0) = 0.
/// Returns the first zero of u, or +inf if u stays positive up to r_max.
double first_zero(double p, int dim, const std::function<double(double)>& F, double a, double r_max = 50.0);

/// (p-1) (pi_p / L)^p, pi_p = 2 pi / (p sin(pi/p)).
double eigen_interval_closed(double p, double length);

/// First radial Dirichlet eigenvalue of -Delta_p on B_R in R^N by shooting and scaling.
double eigen_radial(double p, int dim, double radius);

}  // namespace oracle

namespace oracle {

/// lambda at which the solution of -Delta_p u = lambda F(u) on B_R with u(0) = a exists:
/// (T(a) / R)^p with T(a) the first zero for lambda = 1.
double lambda_of_amplitude(double p, int dim, const std::function<double(double)>& F, double a, double radius);

struct Fold {
  double lambda;
  double amplitude;
};
/// Maximum of lambda_of_amplitude over a in [a_lo, a_hi] (log grid, then golden refinement).
Fold fold(double p, int dim, const std::function<double(double)>& F, double radius, double a_lo, double a_hi);

}  // namespace oracle
