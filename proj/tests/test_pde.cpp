#include <doctest.h>

#include <cmath>
#include <random>
#include <sstream>

#include "natgrad/errors.hpp"
#include "natgrad/pde.hpp"
#include "oracles.hpp"

using namespace natgrad;

namespace {

MeshPtr interval(double L, std::size_t n, double p) { return std::make_shared<const Mesh>(Mesh::interval(L, n, p)); }
MeshPtr ball(double R, int N, std::size_t n, double p) { return std::make_shared<const Mesh>(Mesh::ball(R, N, n, p)); }

DiscreteProblem zero_source(MeshPtr m) {
  return DiscreteProblem::direct(std::move(m), builtin::f_zero());
}

Field sampled(MeshPtr m, const std::function<double(double)>& fn) {
  Field v = Field::zeros(m);
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = m->is_dirichlet(i) ? 0.0 : fn(m->node(i));
  return v;
}

}  // namespace

TEST_CASE("energy of simple fields") {
  auto m = interval(1.0, 101, 2.0);
  CHECK(functional_eval(zero_source(m), Field::zeros(m)) == 0.0);
  const Field hat = sampled(m, [](double x) { return 1.0 - std::abs(2.0 * x - 1.0); });
  CHECK(functional_eval(zero_source(m), hat) == doctest::Approx(2.0).epsilon(1e-12));
  const auto with_mass = DiscreteProblem::direct(m, builtin::f_power(3.0));
  CHECK(functional_eval(with_mass, hat) < functional_eval(zero_source(m), hat));
}

TEST_CASE("gradient at the origin and stiffness action") {
  auto m = interval(1.0, 41, 2.0);
  const auto prob = DiscreteProblem::direct(m, builtin::f_power(4.0));
  for (double x : functional_gradient(prob, Field::zeros(m)).values) CHECK(x == 0.0);

  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  const Field v = sampled(m, [&](double) { return u(rng); });
  const Field g = functional_gradient(zero_source(m), v);
  const double h = 1.0 / 40.0;
  for (std::size_t i = 1; i + 1 < m->size(); ++i) {
    CHECK(g[i] == doctest::Approx((2 * v[i] - v[i - 1] - v[i + 1]) / h).epsilon(1e-12));
  }
  CHECK(g[0] == 0.0);
  CHECK(g[40] == 0.0);
}

TEST_CASE("gradient agrees with central differences") {
  SUBCASE("quadratic case") {
    auto m = interval(1.0, 51, 2.0);
    const auto prob = DiscreteProblem::direct(m, builtin::f_power(2.0, 3.0));
    const Field v = sampled(m, [](double x) { return std::sin(M_PI * x) + 0.3 * x; });
    const auto rep = gradient_check(prob, v, {1e-4}, 8, 5);
    CHECK(rep.max_rel_err[0] < 1e-6);
  }
  SUBCASE("p = 3 with a cubic source, radial") {
    auto m = ball(1.0, 3, 61, 3.0);
    const auto prob = DiscreteProblem::direct(m, builtin::f_power(4.0));
    std::mt19937_64 rng(2);
    std::uniform_real_distribution<double> u(0.1, 1.0);
    const Field v = sampled(m, [&](double) { return u(rng); });
    const auto rep = gradient_check(prob, v, {1e-3, 5e-4, 1e-4}, 8, 9);
    CHECK(rep.max_rel_err[2] < 1e-4);
    const double ratio = rep.max_rel_err[0] / rep.max_rel_err[1];
    CHECK(ratio > 3.0);
    CHECK(ratio < 5.0);
  }
}

TEST_CASE("residual of the sampled sine converges at second order") {
  std::vector<double> res;
  for (std::size_t n : {51, 101, 201, 401}) {
    auto m = interval(1.0, n, 2.0);
    const auto prob = DiscreteProblem::direct(m, builtin::f_power(2.0, M_PI * M_PI));
    res.push_back(residual(prob, sampled(m, [](double x) { return std::sin(M_PI * x); })));
  }
  for (std::size_t k = 1; k < res.size(); ++k) {
    const double order = std::log2(res[k - 1] / res[k]);
    CHECK(order > 1.9);
    CHECK(order < 2.1);
  }
  auto m = interval(1.0, 201, 2.0);
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const Field noise = sampled(m, [&](double) { return u(rng); });
  const double r = residual(DiscreteProblem::direct(m, builtin::f_power(2.0, M_PI * M_PI)), noise);
  MESSAGE("noise residual: " << r);
  CHECK(r > 1e-7);
}

TEST_CASE("tridiagonal solver") {
  Tridiagonal a(4);
  a.diag = {4, 4, 4, 4};
  a.lower = {0, 1, 1, 1};
  a.upper = {1, 1, 1, 0};
  const std::vector<double> x{1, -2, 3, 0.5};
  std::vector<double> b(4);
  for (int i = 0; i < 4; ++i) {
    b[i] = a.diag[i] * x[i] + (i > 0 ? a.lower[i] * x[i - 1] : 0) + (i < 3 ? a.upper[i] * x[i + 1] : 0);
  }
  const auto y = solve_tridiagonal(a, b);
  for (int i = 0; i < 4; ++i) CHECK(y[i] == doctest::Approx(x[i]).epsilon(1e-14));
  Tridiagonal z(2);
  CHECK_THROWS_AS(solve_tridiagonal(z, {1, 1}), ConvergenceError);
}

TEST_CASE("p-Poisson solves") {
  auto m2 = interval(1.0, 101, 2.0);
  const Field w2 = solve_p_poisson(m2, std::vector<double>(101, 1.0));
  for (std::size_t i = 0; i < 101; ++i) {
    const double x = m2->node(i);
    CHECK(w2[i] == doctest::Approx(0.5 * x * (1 - x)).epsilon(1e-10));
  }
  auto m3 = interval(1.0, 401, 3.0);
  const Field w3 = solve_p_poisson(m3, std::vector<double>(401, 1.0));
  for (std::size_t i = 0; i < 401; i += 20) {
    const double x = m3->node(i);
    const double exact = 2.0 / 3.0 * (std::pow(0.5, 1.5) - std::pow(std::abs(x - 0.5), 1.5));
    CHECK(std::abs(w3[i] - exact) < 1e-3);
  }
  auto mb = ball(1.0, 3, 201, 3.0);
  const Field wb = solve_p_poisson(mb, std::vector<double>(201, 1.0), 2.0);
  CHECK(is_positive(wb));
  // Exact integration path for p < 2 without the zero-order term.
  auto m15 = ball(1.0, 3, 201, 1.5);
  const Field w15 = solve_p_poisson(m15, std::vector<double>(201, 1.0));
  const auto load_free = DiscreteProblem::direct(m15, builtin::f_power(1.0));
  CHECK(residual(load_free, w15) < 1e-12);
}

TEST_CASE("first eigenvalue") {
  SUBCASE("p = 2 interval") {
    const auto e = lambda1_estimate(interval(1.0, 400, 2.0));
    CHECK(std::abs(e.lambda - M_PI * M_PI) / (M_PI * M_PI) < 1e-3);
    CHECK(is_positive(e.phi));
    CHECK(e.phi.sup_norm() == doctest::Approx(1.0));
    CHECK(boundary_slope(e.phi) < 0.0);
    CHECK(rayleigh_quotient(*e.phi.mesh, e.phi.values) == doctest::Approx(e.lambda).epsilon(1e-12));
  }
  SUBCASE("p = 2 ball in R^3") {
    const double ref = oracle::eigen_radial(2.0, 3, 1.0);
    CHECK(ref == doctest::Approx(M_PI * M_PI).epsilon(1e-9));
    const auto e = lambda1_estimate(ball(1.0, 3, 401, 2.0));
    CHECK(std::abs(e.lambda - ref) / ref < 1e-3);
    CHECK(is_positive(e.phi));
  }
  SUBCASE("p = 1.5 and p = 3 intervals against closed form and shooting") {
    for (double p : {1.5, 3.0}) {
      const double closed = oracle::eigen_interval_closed(p, 1.0);
      CHECK(oracle::eigen_radial(p, 1, 0.5) == doctest::Approx(closed).epsilon(1e-8));
      const auto e = lambda1_estimate(interval(1.0, 401, p));
      CHECK(std::abs(e.lambda - closed) / closed < 5e-3);
    }
  }
  SUBCASE("scaling in the length") {
    const double p = 1.5;
    const auto e1 = lambda1_estimate(interval(1.0, 401, p));
    const auto e2 = lambda1_estimate(interval(2.0, 401, p));
    CHECK(e2.lambda == doctest::Approx(e1.lambda / std::pow(2.0, p)).epsilon(1e-10));
  }
  SUBCASE("refinement order") {
    const double ref = oracle::eigen_radial(3.0, 2, 1.0);
    const double e1 = std::abs(lambda1_estimate(ball(1.0, 2, 101, 3.0)).lambda - ref);
    const double e2 = std::abs(lambda1_estimate(ball(1.0, 2, 201, 3.0)).lambda - ref);
    CHECK(std::log2(e1 / e2) >= 1.5);
  }
}

TEST_CASE("quasilinear residual reduces to the semilinear one when g vanishes") {
  auto m = ball(1.0, 3, 81, 2.5);
  const auto f = builtin::f_power(3.5, 2.0);
  const Field u = sampled(m, [](double r) { return std::cos(M_PI * r / 2) + 0.1; });
  Field v = u;
  v[80] = 0.0;
  const double a = quasilinear_residual(builtin::g_zero(), f, 1.5, v);
  const double b = residual(DiscreteProblem::direct(m, f, 1.5), v);
  CHECK(a == doctest::Approx(b).epsilon(1e-10));
}

TEST_CASE("field csv") {
  auto m = interval(1.0, 3, 2.0);
  Field v(m, {0.0, 1.0 / 3.0, 0.0});
  std::ostringstream os;
  write_field_csv(os, v);
  CHECK(os.str() == "node,value\n0,0\n0.5,0.33333333333333331\n1,0\n");
}
