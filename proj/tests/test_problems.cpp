#include <doctest.h>

#include <cmath>
#include <set>
#include <string>

#include "natgrad/errors.hpp"
#include "natgrad/problem_io.hpp"
#include "natgrad/problems.hpp"

using namespace natgrad;

namespace {

std::string error_of(const std::string& id, const Params& m) {
  try {
    instantiate(id, m);
  } catch (const ConstraintError& e) {
    return e.what();
  }
  return "";
}

const HypothesisReport& report(const EntryOutcome& o, const std::string& name) {
  for (const auto& r : o.reports) {
    if (r.condition == name) return r;
  }
  FAIL("missing report " << name);
  return o.reports.front();
}

}  // namespace

TEST_CASE("catalogue completeness") {
  std::set<std::string> ids;
  for (const auto& e : catalog()) ids.insert(e.id);
  for (const char* id : {"i", "ii", "iii", "iv", "v", "vi", "vii", "viii", "ix", "e2.6-lin", "e2.6-log", "e2.7-pow",
                         "e2.7-log", "e2.7-lin", "e2.7-loglin", "e2.8-pow", "e2.8-log"}) {
    CHECK(ids.count(id) == 1);
  }
  CHECK(ids.size() == catalog().size());
  CHECK_THROWS_AS(find_entry("x"), ParameterError);
}

TEST_CASE("instantiate validates constraints") {
  const Problem i = instantiate("i", {{"C1", 1.0}, {"C2", 2.0}, {"q", 2.0}});
  CHECK(i.p == 2.0);
  CHECK(i.g == nlohmann::json{{"kind", "constant"}, {"C", 1.0}});
  CHECK(i.f.at("C2") == 2.0);
  CHECK(i.domain.dim == 3);

  CHECK_NOTHROW(instantiate("iii", {{"C", 1.0}, {"alpha", 1.0}, {"r", 4.0}}));
  const std::string msg = error_of("iii", {{"C", 3.0}, {"alpha", 1.0}, {"r", 4.0}});
  CHECK(msg.find("C < r - p if alpha = 1") != std::string::npos);
  CHECK(msg.find("example (iii)") != std::string::npos);
  CHECK_NOTHROW(instantiate("iii", {{"C", 3.0}, {"alpha", 2.0}}));

  CHECK(error_of("i", {{"C2", 4.0}}).find("C2 < C1 (p*-p)/(p-1)") != std::string::npos);
  CHECK_NOTHROW(instantiate("i", {{"C2", 3.99}}));
  CHECK(error_of("i", {{"q", 1.0}}).find("q > p-1") != std::string::npos);
  CHECK(error_of("iii", {{"r", 6.0}}).find("p < r < p*") != std::string::npos);
  CHECK(error_of("ix", {{"q", 2.0}}).find("1 < q < p") != std::string::npos);
  CHECK(error_of("viii", {{"q", 1.0}}).find("0 <= q < p-1") != std::string::npos);
  CHECK_THROWS_AS(instantiate("i", {{"C3", 1.0}}), ParameterError);
}

TEST_CASE("lambda1-dependent defaults") {
  const double pi2 = M_PI * M_PI;
  const Problem ii = instantiate("ii");
  CHECK(ii.f.at("mu").get<double>() == doctest::Approx(0.5 * pi2).epsilon(1e-3));
  const Problem iv = instantiate("iv");
  CHECK(iv.f.at("mu").get<double>() == doctest::Approx(0.5 * pi2 * std::exp(-1.0)).epsilon(1e-3));
  // The stricter bound lambda1 e^(-beta) is enforced.
  CHECK(error_of("iv", {{"mu", 0.5 * pi2}}).find("lambda1 e^(-beta)") != std::string::npos);
  CHECK(error_of("e2.6-lin", {{"mu", 1.01 * pi2}}).find("mu < lambda1") != std::string::npos);
}

TEST_CASE("problem documents") {
  const Problem ix = instantiate("ix");
  const std::string text = to_json(ix).dump();
  const Problem back = parse_problem(text);
  CHECK(to_json(back).dump() == text);
  CHECK(back.lambda.value() == 1.0);
  CHECK(back.conditions.size() == 5);

  const Problem d = parse_problem(R"({"p":1.5,"g":{"kind":"zero"},"f":{"kind":"power","r":3},
                                      "domain":{"kind":"interval","L":2},"nodes":101})");
  CHECK(d.domain.kind == DomainKind::interval);
  CHECK(d.domain.extent == 2.0);
  CHECK(d.nodes == 101);
  const Setup s = make_setup(d);
  CHECK(s.mesh->size() == 101);
  CHECK(s.f(0.0, 2.0) == doctest::Approx(4.0));

  try {
    parse_problem("{\n  \"p\": 2,\n  \"g\": {\"kind\" \"zero\"}\n}");
    FAIL("no error");
  } catch (const InputError& e) {
    const std::string w = e.what();
    CHECK(w.find("line 3") != std::string::npos);
    CHECK(w.find("column") != std::string::npos);
  }
  CHECK_THROWS_AS(parse_problem(R"({"p":2,"g":{"kind":"zero"}})"), ParameterError);
  CHECK_THROWS_AS(parse_problem(R"({"p":2,"g":{"kind":"zero"},"f":{"kind":"zero"},"extra":1})"), ParameterError);
  CHECK_THROWS_AS(parse_problem(R"({"p":1,"g":{"kind":"zero"},"f":{"kind":"zero"}})"), ParameterError);
  CHECK_THROWS_AS(make_setup(parse_problem(R"({"p":2,"g":{"kind":"cubic"},"f":{"kind":"zero"}})")), ParameterError);
  CHECK_THROWS_AS(load_problem("/nonexistent/problem.json"), InputError);
}

TEST_CASE("condition evaluation") {
  const Setup s = make_setup(instantiate("i"));
  const auto reps = evaluate_conditions(s, {"H_SC", "H_AR_1", "regime_SC"});
  REQUIRE(reps.size() == 3);
  CHECK(reps[0].condition == "H_SC");
  CHECK(reps[1].parameters.at("theta") == 3.0);
  CHECK(reps[2].verdict == Verdict::holds);
  CHECK_THROWS_AS(evaluate_conditions(s, {"H_5"}), ParameterError);

  Problem no_theta = s.problem;
  no_theta.theta.reset();
  CHECK_THROWS_AS(evaluate_conditions(make_setup(no_theta), {"H_AR_2"}), ParameterError);

  const auto v = evaluate_conditions(make_setup(instantiate("v")), {"regime_AR"});
  CHECK(v[0].verdict == Verdict::fails);
}

TEST_CASE("catalogue entries at defaults") {
  CatalogOptions opt;
  opt.solve = false;
  SUBCASE("vi: AR fails while the monotone condition holds") {
    const auto o = run_entry(find_entry("vi"), opt);
    CHECK(o.ok());
    CHECK(report(o, "H_AR_prime").verdict == Verdict::fails);
    CHECK(report(o, "H_m_prime").verdict == Verdict::holds);
  }
  SUBCASE("v: the monotone condition holds") {
    const auto o = run_entry(find_entry("v"), opt);
    CHECK(o.ok());
    CHECK(report(o, "H_m_prime").verdict == Verdict::holds);
  }
  SUBCASE("viii solves for small lambda") {
    const auto o = run_entry(find_entry("viii"), CatalogOptions{});
    CHECK(o.ok());
    REQUIRE(o.pulled_residual);
    CHECK(*o.pulled_residual <= 1e-5);
  }
  SUBCASE("a violated expectation is reported") {
    CatalogEntry e = find_entry("vi");
    e.expected.push_back({"H_AR_prime", Verdict::holds});
    const auto o = run_entry(e, opt);
    CHECK_FALSE(o.ok());
    REQUIRE(o.mismatches.size() == 1);
    CHECK(o.mismatches[0] == "H_AR_prime: expected holds, got fails");
  }
}
