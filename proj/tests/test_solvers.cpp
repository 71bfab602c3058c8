#include <doctest.h>

#include <cmath>
#include <sstream>

#include "natgrad/errors.hpp"
#include "natgrad/solvers.hpp"
#include "oracles.hpp"

using namespace natgrad;

namespace {

MeshPtr interval(std::size_t n, double p = 2.0) { return std::make_shared<const Mesh>(Mesh::interval(1.0, n, p)); }

double cube(double u) { return u * u * u; }
double root(double u) { return std::sqrt(std::max(u, 0.0)); }
double concave_convex(double u) { return std::sqrt(std::max(u, 0.0)) + u * u * u; }

SourceF concave_convex_source() {
  return builtin::f_sum({builtin::f_power(1.5), builtin::f_power(4.0)});
}

}  // namespace

TEST_CASE("mountain pass for -u'' = u^3 matches shooting") {
  auto m = interval(401);
  const auto prob = DiscreteProblem::direct(m, builtin::f_power(4.0));
  const double amplitude = oracle::first_zero(2.0, 1, cube, 1.0) / 0.5;
  const MPResult r = solve_mountain_pass(prob);
  CHECK(std::abs(r.v.sup_norm() - amplitude) / amplitude < 5e-3);
  CHECK(r.residual <= 1e-6);
  CHECK(is_positive(r.v));
  CHECK(r.v.satisfies_dirichlet());
  CHECK(r.energy > 0.0);
  CHECK(r.endpoint_energy < 0.0);
  CHECK(r.energy >= r.path_max - 1e-6);
  CHECK(boundary_slope(r.v) < 0.0);
  CHECK(gradient_check(prob, r.v, {1e-4}).max_rel_err[0] <= 1e-4);
}

TEST_CASE("mountain pass without superlinear growth has no descent direction") {
  auto m = interval(101);
  CHECK_THROWS_AS(solve_mountain_pass(DiscreteProblem::direct(m, builtin::f_zero())), NoDescentDirection);
}

TEST_CASE("monotone iteration for -u'' = sqrt(u)") {
  auto m = interval(401);
  const auto prob = DiscreteProblem::direct(m, builtin::f_power(1.5));
  const double amplitude = std::pow(0.5 / oracle::first_zero(2.0, 1, root, 1.0), 4.0);
  const Field phi = lambda1_estimate(m).phi;
  Field sub = phi;
  for (double& x : sub.values) x *= 1e-3;
  Field super = Field::zeros(m);
  for (std::size_t i = 0; i < m->size(); ++i) super[i] = 5.0 * m->node(i) * (1.0 - m->node(i));
  const auto r = solve_sub_super(prob, sub, &super);
  CHECK(std::abs(r.v.sup_norm() - amplitude) / amplitude < 5e-3);
  CHECK(r.residual <= 1e-9);
  for (std::size_t i = 0; i < m->size(); ++i) {
    CHECK(r.v[i] >= sub[i]);
    CHECK(r.v[i] <= super[i]);
  }

  SUBCASE("an exact discrete solution is a fixed point") {
    SubSuperOptions opt;
    opt.probe_tol = 1e-6;
    const auto again = solve_sub_super(prob, r.v, &r.v, opt);
    CHECK(again.iterations == 1);
    for (std::size_t i = 0; i < m->size(); ++i) CHECK(std::abs(again.v[i] - r.v[i]) <= 1e-9);
  }
  SUBCASE("invalid brackets are rejected") {
    Field big = super;
    for (double& x : big.values) x *= 100.0;
    CHECK_THROWS_AS(solve_sub_super(prob, big, nullptr), ParameterError);
    Field tiny = sub;
    CHECK_THROWS_AS(solve_sub_super(prob, sub, &tiny), ParameterError);
  }
}

TEST_CASE("a decreasing source needs the monotonicity shift") {
  // h(v) = 1 / (1 + v): -u'' = 1/(1+u) has a unique solution.
  auto m = interval(201);
  SourceF f;
  f.eval = [](double, double s) { return 1.0 / (1.0 + s); };
  f.deriv_s = [](double, double s) { return -1.0 / ((1.0 + s) * (1.0 + s)); };
  f.label = "1/(1+s)";
  const auto prob = DiscreteProblem::direct(m, f);
  const auto r = solve_sub_super(prob, Field::zeros(m), nullptr);
  CHECK(r.shift > 0.0);
  CHECK(r.residual <= 1e-9);
}

TEST_CASE("continuation on a concave-convex source") {
  auto m = interval(401);
  const auto family = DiscreteProblem::direct(m, concave_convex_source());
  const auto ref = oracle::fold(2.0, 1, concave_convex, 0.5, 1e-3, 1e2);
  MESSAGE("oracle Lambda " << ref.lambda);

  ContinuationParams params;
  const auto d = continuation_lambda(family, 0.25, 8.0, 32, Verdict::holds, params);
  REQUIRE(d.lambda_hi);
  const double width = *d.lambda_hi - d.lambda_lo;
  CHECK(width <= 0.02 * ref.lambda);
  CHECK(d.lambda_lo <= ref.lambda * (1 + 1e-3));
  CHECK(*d.lambda_hi >= ref.lambda * (1 - 1e-3));
  for (std::size_t k = 0; k < d.lambda_grid.size(); ++k) {
    const double lam = d.lambda_grid[k];
    if (std::abs(lam - ref.lambda) > 1e-3 * ref.lambda) CHECK(d.minimal_found[k] == (lam < ref.lambda));
  }
  double prev = 0.0;
  for (const auto& b : d.points) {
    if (b.branch != Branch::minimal) continue;
    CHECK(b.sup_norm >= prev);
    prev = b.sup_norm;
  }
  int pairs = 0;
  for (std::size_t k = 0; k < d.minimal_solutions.size(); ++k) {
    if (!d.mp_solutions[k]) continue;
    ++pairs;
    const Field& lo = d.minimal_solutions[k];
    const Field& hi = *d.mp_solutions[k];
    for (std::size_t i = 0; i < lo.size(); ++i) CHECK(lo[i] <= hi[i] + 1e-12);
    CHECK(hi[200] - lo[200] > 0.0);
  }
  CHECK(pairs >= 10);
  std::ostringstream os;
  write_diagram_csv(os, d);
  CHECK(os.str().rfind("lambda,branch,sup_norm,energy\n", 0) == 0);

  CHECK_THROWS_AS(continuation_lambda(family, 0.25, 8.0, 8, Verdict::fails), ParameterError);
}
