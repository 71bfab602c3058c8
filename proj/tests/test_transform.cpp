#include <doctest.h>

#include <cmath>
#include <memory>
#include <random>

#include "natgrad/errors.hpp"
#include "natgrad/transform.hpp"

using namespace natgrad;

namespace {

TablePtr make_table(const NonlinearityG& g, double p, double s_max) {
  return std::make_shared<const TransformTable>(build_transform(g, p, s_max));
}

std::vector<NonlinearityG> sample_gs(double p) {
  return {builtin::g_zero(), builtin::g_constant(1.0), builtin::g_shifted_ratio(p),
          builtin::g_power(0.5), builtin::g_power_decay(2.0, 0.5), builtin::g_affine_ratio(p)};
}

}  // namespace

TEST_CASE("identity transform when g vanishes") {
  const auto t = build_transform(builtin::g_zero(), 2.5, 10.0);
  for (std::size_t i = 0; i < t.size(); ++i) {
    CHECK(t.a_values[i] == doctest::Approx(t.s_grid[i]).epsilon(1e-13));
  }
  CHECK(eval_A(t, 3.3) == doctest::Approx(3.3).epsilon(1e-13));
}

TEST_CASE("closed-form transforms") {
  // g == 1, p = 2: A(s) = e^s - 1.
  const auto t1 = build_transform(builtin::g_constant(1.0), 2.0, 5.0);
  CHECK(eval_A(t1, 1.0) == doctest::Approx(std::exp(1.0) - 1.0).epsilon(1e-10));
  CHECK(invert_A(t1, std::exp(1.0) - 1.0) == doctest::Approx(1.0).epsilon(1e-10));
  // g = (p-1)/(1+t): exp(G/(p-1)) = 1 + t, A(s) = s + s^2/2.
  for (double p : {1.5, 2.0, 3.0}) {
    const auto t2 = build_transform(builtin::g_shifted_ratio(p), p, 5.0);
    CHECK(eval_A(t2, 2.0) == doctest::Approx(4.0).epsilon(1e-10));
    CHECK(eval_A_prime(t2, 2.0) == doctest::Approx(3.0).epsilon(1e-10));
  }
}

TEST_CASE("table invariants") {
  for (double p : {1.5, 2.0, 3.0}) {
    for (const auto& g : sample_gs(p)) {
      const auto t = build_transform(g, p, 8.0);
      REQUIRE(t.a_values.front() == 0.0);
      for (std::size_t i = 0; i + 1 < t.size(); ++i) {
        CHECK(t.a_values[i + 1] > t.a_values[i]);
        CHECK(t.aprime_values[i] >= 1.0);
        // A' is nondecreasing for g >= 0, so cell bounds are the endpoint values.
        const double h = t.s_grid[i + 1] - t.s_grid[i];
        const double da = t.a_values[i + 1] - t.a_values[i];
        const double slack = t.quad_tol * t.a_values[i + 1] + 1e-300;
        CHECK(da >= t.aprime_values[i] * h - slack);
        CHECK(da <= t.aprime_values[i + 1] * h + slack);
      }
    }
  }
}

TEST_CASE("inverse round trip on random queries") {
  std::mt19937_64 rng(7);
  for (double p : {1.5, 2.0, 3.0}) {
    for (const auto& g : sample_gs(p)) {
      const auto t = build_transform(g, p, 6.0);
      std::uniform_real_distribution<double> pick(0.0, t.s_max());
      for (int k = 0; k < 200; ++k) {
        const double s = pick(rng);
        CHECK(std::abs(invert_A(t, eval_A(t, s)) - s) <= 1e-10 * (1.0 + s));
      }
      CHECK(invert_A(t, 0.0) == 0.0);
    }
  }
}

TEST_CASE("range and overflow errors") {
  const auto t = build_transform(builtin::g_constant(1.0), 2.0, 3.0);
  CHECK_THROWS_AS(eval_A(t, 3.5), RangeError);
  CHECK_THROWS_AS(eval_A(t, -0.1), RangeError);
  CHECK_THROWS_AS(invert_A(t, t.a_max() * 1.01), RangeError);
  try {
    build_transform(builtin::g_constant(1.0), 2.0, 1000.0);
    FAIL("expected overflow");
  } catch (const OverflowError& e) {
    CHECK(e.at() > 700.0);
    CHECK(e.at() < 730.0);
  }
  CHECK(usable_range(builtin::g_constant(1.0), 2.0, 1000.0) == doctest::Approx(0.999 * 709.78 / 2).epsilon(1e-3));
  CHECK(usable_range(builtin::g_zero(), 2.0, 1000.0) == 1000.0);
}

TEST_CASE("small-s limit of t A'(t) / A(t)") {
  for (double p : {1.5, 2.0, 3.0}) {
    for (const auto& g : sample_gs(p)) {
      const auto t = build_transform(g, p, 4.0);
      double prev_err = INFINITY;
      for (int k = 1; k <= 6; ++k) {
        const double s = std::pow(10.0, -k);
        const double q = s * eval_A_prime(t, s) / eval_A(t, s);
        const double err = std::abs(q - 1.0);
        CHECK(err <= prev_err + 1e-12);
        prev_err = err;
      }
      CHECK(prev_err < 1e-3);
    }
  }
}

TEST_CASE("transformed nonlinearity examples") {
  SUBCASE("g == 0 gives h == f") {
    const auto f = builtin::f_power(3.5);
    const auto tp = transformed_nonlinearity(builtin::g_zero(), f, make_table(builtin::g_zero(), 2.0, 10.0));
    for (double v : {0.0, 0.3, 1.0, 4.0, 9.0}) {
      CHECK(tp.h(0.0, v) == doctest::Approx(f(0.0, v)).epsilon(1e-12));
      CHECK(tp.big_h(0.0, v) == doctest::Approx(std::pow(v, 3.5) / 3.5).epsilon(1e-9));
    }
  }
  SUBCASE("p = 2, g == 1: h(v) = (1+v) f(log(1+v))") {
    const auto g = builtin::g_constant(1.0);
    const auto f = builtin::f_power(3.0);  // f = s^2
    const auto tp = transformed_nonlinearity(g, f, make_table(g, 2.0, 6.0));
    for (double v : {0.1, 1.0, 10.0, 100.0}) {
      const double l = std::log1p(v);
      CHECK(tp.h(0.0, v) == doctest::Approx((1 + v) * l * l).epsilon(1e-9));
      // H(v) = \int_0^t e^{2s} s^2 ds at t = log(1+v).
      const double expect = std::exp(2 * l) * (l * l / 2 - l / 2 + 0.25) - 0.25;
      CHECK(tp.big_h(0.0, v) == doctest::Approx(expect).epsilon(1e-8));
      // dh/dv of (1+v) log^2(1+v).
      CHECK(tp.dh(0.0, v) == doctest::Approx(l * l + 2 * l).epsilon(1e-8));
    }
  }
  SUBCASE("g = (p-1)/(1+t), f = t^(p-1): h(v) = (t(1+t))^(p-1), t = -1 + sqrt(1+2v)") {
    for (double p : {1.5, 2.0, 3.0}) {
      const auto g = builtin::g_shifted_ratio(p);
      const auto tp = transformed_nonlinearity(g, builtin::f_power(p), make_table(g, p, 6.0));
      for (double v : {0.01, 0.5, 3.0, 12.0}) {
        const double t = -1.0 + std::sqrt(1.0 + 2.0 * v);
        CHECK(tp.h(0.0, v) == doctest::Approx(std::pow(t * (1 + t), p - 1)).epsilon(1e-9));
      }
    }
  }
  SUBCASE("zero extension and h(0) = f(0)") {
    const auto g = builtin::g_constant(1.0);
    const auto f = builtin::f_power_exp(0.0, 1.0);
    const auto tp = transformed_nonlinearity(g, f, make_table(g, 2.0, 4.0));
    CHECK(tp.h(0.0, 0.0) == doctest::Approx(1.0));
    CHECK(tp.h(0.0, -1.0) == 0.0);
    CHECK(tp.big_h(0.0, -1.0) == 0.0);
  }
  SUBCASE("table from a different g is rejected") {
    CHECK_THROWS_AS(transformed_nonlinearity(builtin::g_constant(2.0), builtin::f_power(3.0),
                                             make_table(builtin::g_constant(1.0), 2.0, 2.0)),
                    ParameterError);
  }
}

TEST_CASE("h dominates f composed with the inverse transform") {
  for (const auto& g : sample_gs(2.0)) {
    const auto f = builtin::f_power_log(1.0, 2.0);
    const auto tp = transformed_nonlinearity(g, f, make_table(g, 2.0, 5.0));
    for (double v = 0.05; v < tp.table().a_max(); v *= 1.7) {
      CHECK(tp.h(0.0, v) >= f(0.0, invert_A(tp.table(), v)) * (1 - 1e-14));
    }
  }
}

TEST_CASE("h/s^(p-1) near zero matches f/t^(p-1)") {
  // f with f(s)/s^(p-1) -> L = 3 as s -> 0.
  for (double p : {1.5, 2.0, 3.0}) {
    for (const auto& g : sample_gs(p)) {
      const auto f = builtin::f_sum({builtin::f_power(p, 3.0), builtin::f_power(p + 1.0)});
      const auto tp = transformed_nonlinearity(g, f, make_table(g, p, 3.0));
      const double t = 1e-6;
      const double s = eval_A(tp.table(), t);
      const double ratio = tp.h(0.0, s) / std::pow(s, p - 1.0);
      CHECK(std::abs(ratio - 3.0) / 3.0 < 1e-3);
    }
  }
}

TEST_CASE("push forward and pull back") {
  const auto g = builtin::g_constant(1.0);
  const auto table = build_transform(g, 2.0, 5.0);
  auto mesh = std::make_shared<const Mesh>(Mesh::interval(1.0, 11, 2.0));
  Field ones(mesh, std::vector<double>(11, 1.0));
  const Field v = push_forward(table, ones);
  for (double x : v.values) CHECK(x == doctest::Approx(std::exp(1.0) - 1.0).epsilon(1e-10));
  const Field zero = push_forward(table, Field::zeros(mesh));
  for (double x : zero.values) CHECK(x == 0.0);

  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> pick(0.0, 4.0);
  Field u = Field::zeros(mesh);
  for (std::size_t i = 1; i + 1 < u.size(); ++i) u[i] = pick(rng);
  const Field back = pull_back(table, push_forward(table, u));
  for (std::size_t i = 0; i < u.size(); ++i) CHECK(back[i] == doctest::Approx(u[i]).epsilon(1e-10));
  CHECK(back.satisfies_dirichlet());
}
