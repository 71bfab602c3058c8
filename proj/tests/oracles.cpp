#include "oracles.hpp"

#include <array>
#include <cmath>
#include <limits>

#include <boost/numeric/odeint.hpp>

namespace oracle {

namespace ode = boost::numeric::odeint;
using State = std::array<double, 2>;  // u, |u'|^(p-2) u'

double first_zero(double p, int dim, const std::function<double(double)>& F, double a, double r_max) {
  const double n = dim;
  auto rhs = [&](const State& y, State& dy, double r) {
    dy[0] = std::copysign(std::pow(std::abs(y[1]), 1.0 / (p - 1.0)), y[1]);
    dy[1] = -(n - 1.0) / r * y[1] - F(y[0]);
  };
  const double r0 = 1e-6;
  const double fa = F(a);
  State y{a - (p - 1.0) / p * std::pow(std::abs(fa) / n, 1.0 / (p - 1.0)) * std::pow(r0, p / (p - 1.0)),
          -fa * r0 / n};
  auto stepper = ode::make_dense_output(1e-13, 1e-13, ode::runge_kutta_dopri5<State>());
  stepper.initialize(y, r0, 1e-6);
  while (stepper.current_time() < r_max) {
    stepper.do_step(rhs);
    if (stepper.current_state()[0] <= 0.0) {
      double lo = stepper.previous_time(), hi = stepper.current_time();
      State mid;
      for (int k = 0; k < 200 && hi - lo > 1e-15 * hi; ++k) {
        const double m = 0.5 * (lo + hi);
        stepper.calc_state(m, mid);
        (mid[0] > 0.0 ? lo : hi) = m;
      }
      return 0.5 * (lo + hi);
    }
  }
  return std::numeric_limits<double>::infinity();
}

double eigen_interval_closed(double p, double length) {
  const double pi_p = 2.0 * M_PI / (p * std::sin(M_PI / p));
  return (p - 1.0) * std::pow(pi_p / length, p);
}

double eigen_radial(double p, int dim, double radius) {
  const double z = first_zero(p, dim, [p](double u) { return std::copysign(std::pow(std::abs(u), p - 1.0), u); },
                              1.0);
  return std::pow(z / radius, p);
}

}  // namespace oracle

namespace oracle {

double lambda_of_amplitude(double p, int dim, const std::function<double(double)>& F, double a, double radius) {
  return std::pow(first_zero(p, dim, F, a) / radius, p);
}

Fold fold(double p, int dim, const std::function<double(double)>& F, double radius, double a_lo, double a_hi) {
  const int n = 200;
  auto lam = [&](double la) { return lambda_of_amplitude(p, dim, F, std::exp(la), radius); };
  const double l0 = std::log(a_lo), l1 = std::log(a_hi);
  int best = 0;
  double best_val = -1.0;
  for (int k = 0; k <= n; ++k) {
    const double v = lam(l0 + (l1 - l0) * k / n);
    if (v > best_val) {
      best_val = v;
      best = k;
    }
  }
  double lo = l0 + (l1 - l0) * std::max(best - 1, 0) / n, hi = l0 + (l1 - l0) * std::min(best + 1, n) / n;
  const double gr = 0.5 * (std::sqrt(5.0) - 1.0);
  double x1 = hi - gr * (hi - lo), x2 = lo + gr * (hi - lo);
  double f1 = lam(x1), f2 = lam(x2);
  for (int it = 0; it < 80; ++it) {
    if (f1 > f2) {
      hi = x2;
      x2 = x1;
      f2 = f1;
      x1 = hi - gr * (hi - lo);
      f1 = lam(x1);
    } else {
      lo = x1;
      x1 = x2;
      f1 = f2;
      x2 = lo + gr * (hi - lo);
      f2 = lam(x2);
    }
  }
  return {std::max(f1, f2), std::exp(0.5 * (lo + hi))};
}

}  // namespace oracle
