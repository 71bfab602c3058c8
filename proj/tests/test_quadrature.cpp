#include <doctest.h>

#include <cmath>

#include "natgrad/errors.hpp"
#include "natgrad/quadrature.hpp"
#include "natgrad/transform.hpp"

using namespace natgrad;

TEST_CASE("adaptive Simpson reaches the requested absolute tolerance") {
  QuadratureOptions opt;
  opt.abs_tol = 1e-12;
  const auto r = adaptive_simpson([](double t) { return std::exp(t); }, 0.0, 2.0, opt);
  CHECK(std::abs(r.value - (std::exp(2.0) - 1.0)) <= 1e-12);
  CHECK(adaptive_simpson([](double t) { return t; }, 1.0, 0.0, opt).value == doctest::Approx(-0.5));
}

TEST_CASE("integrable endpoint singularities converge, non-integrable ones throw") {
  QuadratureOptions opt;
  opt.abs_tol = 1e-6;
  const auto r = adaptive_simpson([](double t) { return t > 0 ? 1.0 / std::sqrt(t) : 0.0; }, 0.0, 1.0, opt);
  CHECK(r.value == doctest::Approx(2.0).epsilon(1e-5));
  CHECK_THROWS_AS(adaptive_simpson([](double t) { return t > 0 ? 1.0 / t : 0.0; }, 0.0, 1.0, opt),
                  QuadratureError);
  CHECK_THROWS_AS(adaptive_simpson([](double) { return NAN; }, 0.0, 1.0, opt), QuadratureError);
}

TEST_CASE("dyadic panels cover long ranges") {
  QuadratureOptions opt;
  opt.abs_tol = 1e-10;
  const double s = 1e6;
  const auto r = integrate_dyadic([](double t) { return 1.0 / (1.0 + t); }, 0.0, s, opt);
  CHECK(r.value == doctest::Approx(std::log1p(s)).epsilon(1e-12));
}

TEST_CASE("integrate_below resolves integrands peaked at the top end") {
  // \int_0^s exp(-(s - t)) dt with g == 1, at a huge s.
  const double s = 1e12;
  auto one = [](double) { return 1.0; };
  const auto r = integrate_below(one, s, [](double, double tail) { return std::exp(-tail); }, 1.0, 1e-12);
  CHECK(r.value == doctest::Approx(1.0).epsilon(1e-10));
  // Flat integrand over the whole range.
  const auto flat = integrate_below([](double) { return 0.0; }, 1e3, [](double, double) { return 1.0; }, 1.0, 1e-12);
  CHECK(flat.value == doctest::Approx(1e3).epsilon(1e-12));
}

TEST_CASE("big_g examples") {
  CHECK(big_g(builtin::g_zero(), 5.0) == 0.0);
  CHECK(big_g(builtin::g_constant(2.0), 3.0) == doctest::Approx(6.0).epsilon(1e-14));
  // Closed-form antiderivative oracle: \int_0^1 dt/(1+t) = ln 2.
  const auto g = builtin::g_power_decay(1.0, 1.0);
  CHECK(std::abs(big_g(g, 1.0, 1e-12) - std::log(2.0)) <= 1e-12);
  CHECK_THROWS_AS(big_g(g, -1.0), ParameterError);
}
