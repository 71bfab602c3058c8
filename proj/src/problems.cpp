#include "natgrad/problems.hpp"

#include <cmath>
#include <sstream>

#include "natgrad/errors.hpp"
#include "natgrad/pde.hpp"
#include "natgrad/solvers.hpp"
#include "natgrad/transform.hpp"

namespace natgrad {

namespace {

using nlohmann::json;

double at(const Params& m, const char* key) { return m.at(key); }

double sc_factor(const EntryContext& c) { return (c.pstar - c.p) / (c.p - 1.0); }

Constraint positive(const char* key, std::string cite) {
  return {std::string(key) + " > 0", std::move(cite),
          [key](const Params& m, const EntryContext&) { return at(m, key) > 0.0; }};
}

Constraint r_between_p_and_pstar(std::string cite) {
  return {"p < r < p*", std::move(cite),
          [](const Params& m, const EntryContext& c) { return at(m, "r") > c.p && at(m, "r") < c.pstar; }};
}

Constraint r_above_p(std::string cite) {
  return {"r > p", std::move(cite), [](const Params& m, const EntryContext& c) { return at(m, "r") > c.p; }};
}

Constraint c_below_r_minus_p(std::string cite) {
  return {"C < r - p if alpha = 1", std::move(cite), [](const Params& m, const EntryContext& c) {
            return at(m, "alpha") != 1.0 || at(m, "C") < at(m, "r") - c.p;
          }};
}

Constraint mu_below_lambda1(std::string cite) {
  return {"0 < mu < lambda1", std::move(cite), [](const Params& m, const EntryContext& c) {
            return at(m, "mu") > 0.0 && at(m, "mu") < c.lambda1;
          }};
}

json g_constant(double c) { return {{"kind", "constant"}, {"C", c}}; }
json g_power_decay(double c, double alpha) { return {{"kind", "power_decay"}, {"C", c}, {"alpha", alpha}}; }
json f_power(double r, double mu = 1.0) { return {{"kind", "power"}, {"r", r}, {"mu", mu}}; }
json f_log_power(double r, double mu = 1.0) { return {{"kind", "log_power"}, {"r", r}, {"mu", mu}}; }
json f_power_exp(double q, double c2, double mu, double gamma) {
  return {{"kind", "power_exp"}, {"q", q}, {"C2", c2}, {"mu", mu}, {"gamma", gamma}};
}

std::vector<ExpectedVerdict> holds(std::initializer_list<const char*> names) {
  std::vector<ExpectedVerdict> v;
  for (const char* n : names) v.push_back({n, Verdict::holds});
  return v;
}

std::vector<ExpectedVerdict> ar_pattern() {
  return holds({"H_SC", "H_AR_prime", "H_AR_1", "H_AR_2", "H_lambda1"});
}

std::vector<ExpectedVerdict> monotone_pattern(bool ar_fails) {
  auto v = holds({"H_SC", "H_lambda1", "H_m", "H_inf", "H_m_prime"});
  if (ar_fails) v.push_back({"H_AR_prime", Verdict::fails});
  return v;
}

std::vector<ExpectedVerdict> sublinear_pattern() {
  return holds({"H_1", "H_SC", "H_AR_prime", "H_3", "H_4"});
}

Params with_domain(Params m) {
  m.emplace("p", 2.0);
  m.emplace("N", 3.0);
  m.emplace("R", 1.0);
  return m;
}

std::vector<CatalogEntry> build_catalog() {
  std::vector<CatalogEntry> c;

  {
    CatalogEntry e;
    e.id = "i";
    e.title = "-Delta_p u = C1 |grad u|^p + u^q e^(C2 u)";
    e.citation = "example (i)";
    e.defaults = with_domain({{"C1", 1.0}, {"C2", 2.0}, {"q", 2.0}});
    e.constraints = {positive("C1", e.citation),
                     {"0 < C2 < C1 (p*-p)/(p-1)", e.citation,
                      [](const Params& m, const EntryContext& x) {
                        return at(m, "C2") > 0.0 && at(m, "C2") < at(m, "C1") * sc_factor(x);
                      }},
                     {"q > p-1", e.citation, [](const Params& m, const EntryContext& x) { return at(m, "q") > x.p - 1.0; }}};
    e.g_spec = [](const Params& m) { return g_constant(at(m, "C1")); };
    e.f_spec = [](const Params& m) { return f_power_exp(at(m, "q"), at(m, "C2"), 1.0, 1.0); };
    e.expected = ar_pattern();
    e.theta = 3.0;
    e.solve = SolveKind::mountain_pass;
    c.push_back(std::move(e));
  }
  {
    CatalogEntry e;
    e.id = "ii";
    e.title = "-Delta_p u = C (1+u)^-alpha |grad u|^p + mu u^(p-1) e^(beta u^(1-alpha))";
    e.citation = "example (ii)";
    e.defaults = with_domain({{"C", 1.0}, {"alpha", 0.5}, {"beta", 4.0}});
    e.derived = {"mu", [](const Params&, const EntryContext& x) { return 0.5 * x.lambda1; }};
    e.constraints = {positive("C", e.citation),
                     {"0 < alpha < 1", e.citation,
                      [](const Params& m, const EntryContext&) { return at(m, "alpha") > 0.0 && at(m, "alpha") < 1.0; }},
                     {"0 < beta < (p*-p)/((p-1)(1-alpha))", e.citation,
                      [](const Params& m, const EntryContext& x) {
                        return at(m, "beta") > 0.0 && at(m, "beta") < sc_factor(x) / (1.0 - at(m, "alpha"));
                      }},
                     mu_below_lambda1(e.citation)};
    e.g_spec = [](const Params& m) { return g_power_decay(at(m, "C"), at(m, "alpha")); };
    e.f_spec = [](const Params& m) {
      return f_power_exp(at(m, "p") - 1.0, at(m, "beta"), at(m, "mu"), 1.0 - at(m, "alpha"));
    };
    e.expected = ar_pattern();
    e.theta = 3.0;
    c.push_back(std::move(e));
  }
  {
    CatalogEntry e;
    e.id = "iii";
    e.title = "-Delta_p u = C (1+u)^-alpha |grad u|^p + u^(r-1)";
    e.citation = "example (iii)";
    e.defaults = with_domain({{"C", 1.0}, {"alpha", 1.0}, {"r", 4.0}});
    e.constraints = {positive("C", e.citation),
                     {"alpha >= 1", e.citation, [](const Params& m, const EntryContext&) { return at(m, "alpha") >= 1.0; }},
                     r_between_p_and_pstar(e.citation), c_below_r_minus_p(e.citation)};
    e.g_spec = [](const Params& m) { return g_power_decay(at(m, "C"), at(m, "alpha")); };
    e.f_spec = [](const Params& m) { return f_power(at(m, "r")); };
    e.expected = ar_pattern();
    e.theta = 2.5;
    c.push_back(std::move(e));
  }
  {
    CatalogEntry e;
    e.id = "iv";
    e.title = "-Delta_p u = u^q |grad u|^p + mu u^(p-1) e^(beta u^(q+1))";
    e.citation = "example (iv)";
    e.defaults = with_domain({{"q", 1.0}, {"beta", 1.0}});
    e.derived = {"mu", [](const Params& m, const EntryContext& x) { return 0.5 * x.lambda1 * std::exp(-at(m, "beta")); }};
    e.constraints = {positive("q", e.citation),
                     {"0 < beta < (p*-p)/((p-1)(q+1))", e.citation,
                      [](const Params& m, const EntryContext& x) {
                        return at(m, "beta") > 0.0 && at(m, "beta") < sc_factor(x) / (at(m, "q") + 1.0);
                      }},
                     {"0 < mu < lambda1 e^(-beta)", e.citation, [](const Params& m, const EntryContext& x) {
                        return at(m, "mu") > 0.0 && at(m, "mu") < x.lambda1 * std::exp(-at(m, "beta"));
                      }}};
    e.g_spec = [](const Params& m) { return json{{"kind", "power"}, {"q", at(m, "q")}}; };
    e.f_spec = [](const Params& m) {
      return f_power_exp(at(m, "p") - 1.0, at(m, "beta"), at(m, "mu"), at(m, "q") + 1.0);
    };
    e.expected = ar_pattern();
    e.theta = 3.0;
    c.push_back(std::move(e));
  }
  {
    CatalogEntry e;
    e.id = "v";
    e.title = "-Delta_p u = (p-1)/(u+1) |grad u|^p + u^(p-1) log(u+1)^q";
    e.citation = "example (v)";
    e.defaults = with_domain({{"q", 2.0}});
    e.constraints = {positive("q", e.citation)};
    e.g_spec = [](const Params&) { return json{{"kind", "shifted_ratio"}}; };
    e.f_spec = [](const Params& m) {
      return json{{"kind", "power_log"}, {"k", at(m, "p") - 1.0}, {"q", at(m, "q")}};
    };
    e.expected = monotone_pattern(true);
    c.push_back(std::move(e));
  }
  for (const bool log_source : {false, true}) {
    CatalogEntry e;
    e.id = log_source ? "vii" : "vi";
    e.title = log_source ? "-Delta_p u = C |grad u|^p + log(u+1)^(r-1)" : "-Delta_p u = C |grad u|^p + u^(r-1)";
    e.citation = "example (" + e.id + ")";
    e.defaults = with_domain({{"C", 1.0}, {"r", 4.0}});
    e.constraints = {positive("C", e.citation), r_above_p(e.citation)};
    e.g_spec = [](const Params& m) { return g_constant(at(m, "C")); };
    e.f_spec = [log_source](const Params& m) { return log_source ? f_log_power(at(m, "r")) : f_power(at(m, "r")); };
    e.expected = monotone_pattern(true);
    c.push_back(std::move(e));
  }
  {
    CatalogEntry e;
    e.id = "viii";
    e.title = "-Delta_p u = C1 |grad u|^p + lambda u^q e^(C2 u)";
    e.citation = "example (viii)";
    e.defaults = with_domain({{"C1", 1.0}, {"C2", 2.0}, {"q", 0.5}, {"lambda", 1.0}});
    e.constraints = {positive("C1", e.citation),
                     {"0 < C2 < C1 (p*-p)/(p-1)", e.citation,
                      [](const Params& m, const EntryContext& x) {
                        return at(m, "C2") > 0.0 && at(m, "C2") < at(m, "C1") * sc_factor(x);
                      }},
                     {"0 <= q < p-1", e.citation,
                      [](const Params& m, const EntryContext& x) { return at(m, "q") >= 0.0 && at(m, "q") < x.p - 1.0; }},
                     positive("lambda", e.citation)};
    e.g_spec = [](const Params& m) { return g_constant(at(m, "C1")); };
    e.f_spec = [](const Params& m) { return f_power_exp(at(m, "q"), at(m, "C2"), 1.0, 1.0); };
    e.expected = sublinear_pattern();
    e.has_lambda = true;
    e.lambda_min = 0.25;
    e.lambda_max = 8.0;
    e.solve = SolveKind::minimal;
    c.push_back(std::move(e));
  }
  {
    CatalogEntry e;
    e.id = "ix";
    e.title = "-Delta_p u = C (1+u)^-alpha |grad u|^p + lambda (u^(r-1) + u^(q-1))";
    e.citation = "example (ix)";
    e.defaults = with_domain({{"C", 1.0}, {"alpha", 1.0}, {"q", 1.5}, {"r", 4.0}, {"lambda", 1.0}});
    e.constraints = {positive("C", e.citation),
                     {"alpha >= 1", e.citation, [](const Params& m, const EntryContext&) { return at(m, "alpha") >= 1.0; }},
                     {"1 < q < p", e.citation,
                      [](const Params& m, const EntryContext& x) { return at(m, "q") > 1.0 && at(m, "q") < x.p; }},
                     r_between_p_and_pstar(e.citation), c_below_r_minus_p(e.citation), positive("lambda", e.citation)};
    e.g_spec = [](const Params& m) { return g_power_decay(at(m, "C"), at(m, "alpha")); };
    e.f_spec = [](const Params& m) {
      return json{{"kind", "sum"}, {"terms", json::array({f_power(at(m, "r")), f_power(at(m, "q"))})}};
    };
    e.expected = sublinear_pattern();
    e.has_lambda = true;
    e.lambda_min = 0.25;
    e.lambda_max = 8.0;
    c.push_back(std::move(e));
  }

  // Variants of the monotone-condition examples.
  struct Variant {
    const char* id;
    const char* g;  // "constant", "affine_ratio", "power"
    const char* f;  // "power", "log_power", "linear", "log_linear"
  };
  const Variant variants[] = {
      {"e2.6-lin", "constant", "linear"},       {"e2.6-log", "constant", "log_linear"},
      {"e2.7-pow", "affine_ratio", "power"},    {"e2.7-log", "affine_ratio", "log_power"},
      {"e2.7-lin", "affine_ratio", "linear"},   {"e2.7-loglin", "affine_ratio", "log_linear"},
      {"e2.8-pow", "power", "power"},           {"e2.8-log", "power", "log_power"},
  };
  for (const Variant& v : variants) {
    CatalogEntry e;
    e.id = v.id;
    e.citation = std::string("example ") + std::string(v.id).substr(1, 3);
    const std::string gk = v.g, fk = v.f;
    Params d;
    if (gk == "constant") d["C"] = 1.0;
    if (gk == "power") d["q"] = 1.0;
    const bool linear = fk == "linear" || fk == "log_linear";
    if (!linear) d["r"] = 4.0;
    e.defaults = with_domain(d);
    if (gk == "constant") e.constraints.push_back(positive("C", e.citation));
    if (gk == "power") e.constraints.push_back(positive("q", e.citation));
    if (linear) {
      e.derived = {"mu", [](const Params&, const EntryContext& x) { return 0.5 * x.lambda1; }};
      e.constraints.push_back(mu_below_lambda1(e.citation));
    } else {
      e.constraints.push_back(r_above_p(e.citation));
    }
    e.g_spec = [gk](const Params& m) {
      if (gk == "constant") return g_constant(at(m, "C"));
      if (gk == "power") return json{{"kind", "power"}, {"q", at(m, "q")}};
      return json{{"kind", "affine_ratio"}};
    };
    e.f_spec = [fk](const Params& m) {
      if (fk == "power") return f_power(at(m, "r"));
      if (fk == "log_power") return f_log_power(at(m, "r"));
      if (fk == "linear") return json{{"kind", "linear"}, {"mu", at(m, "mu")}};
      return f_log_power(at(m, "p"), at(m, "mu"));
    };
    const std::string gs = gk == "constant" ? "C" : gk == "power" ? "s^q" : "(p-1)(s+2)/(s+1)";
    const std::string fs = fk == "power"        ? "u^(r-1)"
                           : fk == "log_power"  ? "log(u+1)^(r-1)"
                           : fk == "linear"     ? "mu u^(p-1)"
                                                : "mu log(u+1)^(p-1)";
    e.title = "-Delta_p u = g(u) |grad u|^p + " + fs + ", g = " + gs;
    e.expected = monotone_pattern(false);
    c.push_back(std::move(e));
  }
  return c;
}

EntryContext context_for(const Params& m, bool need_lambda1) {
  EntryContext x;
  x.p = at(m, "p");
  x.dim = static_cast<int>(at(m, "N"));
  if (!(x.p > 1.0) || x.dim < 1 || static_cast<double>(x.dim) != at(m, "N") || !(at(m, "R") > 0.0)) {
    throw ParameterError("catalogue domain needs p > 1, integer N >= 1 and R > 0");
  }
  x.pstar = compute_pstar(x.p, x.dim);
  if (need_lambda1) {
    const auto mesh = std::make_shared<const Mesh>(Mesh::ball(at(m, "R"), x.dim, 401, x.p));
    x.lambda1 = lambda1_estimate(mesh).lambda;
  }
  return x;
}

bool needs_lambda1(const CatalogEntry& e) {
  for (const auto& c : e.constraints) {
    if (c.text.find("lambda1") != std::string::npos) return true;
  }
  return e.derived.has_value();
}

}  // namespace

const std::vector<CatalogEntry>& catalog() {
  static const std::vector<CatalogEntry> entries = build_catalog();
  return entries;
}

const CatalogEntry& find_entry(const std::string& id) {
  for (const auto& e : catalog()) {
    if (e.id == id) return e;
  }
  throw ParameterError("unknown catalogue id '" + id + "'");
}

Problem instantiate(const std::string& id, const Params& overrides) {
  const CatalogEntry& e = find_entry(id);
  Params m = e.defaults;
  for (const auto& [key, value] : overrides) {
    const bool known = m.count(key) || (e.derived && e.derived->first == key);
    if (!known) throw ParameterError("entry '" + id + "' has no parameter '" + key + "'");
    m[key] = value;
  }
  const EntryContext x = context_for(m, needs_lambda1(e));
  if (e.derived && !m.count(e.derived->first)) m[e.derived->first] = e.derived->second(m, x);
  for (const auto& c : e.constraints) {
    if (!c.holds(m, x)) {
      std::ostringstream os;
      os << "constraint violated: " << c.text << " (" << c.citation << ")";
      throw ConstraintError(os.str());
    }
  }
  Problem pr;
  pr.id = e.id;
  pr.p = x.p;
  pr.g = e.g_spec(m);
  pr.f = e.f_spec(m);
  if (e.has_lambda) pr.lambda = at(m, "lambda");
  pr.domain = DomainSpec{DomainKind::ball, at(m, "R"), x.dim};
  pr.theta = e.theta;
  for (const auto& v : e.expected) pr.conditions.push_back(v.condition);
  if (e.solve == SolveKind::mountain_pass) pr.method = "mountain_pass";
  if (e.solve == SolveKind::minimal) pr.method = "minimal";
  return pr;
}

const std::vector<std::string>& condition_names() {
  static const std::vector<std::string> names = {
      "H_SC",  "H_AR_prime", "H_AR_1", "H_AR_2", "H_lambda1", "H_1",       "H_m",       "H_inf",
      "H_m_prime", "H_2",    "H_3",    "H_4",    "regime_SC", "regime_AR", "regime_AR_equivalent"};
  return names;
}

std::vector<HypothesisReport> evaluate_conditions(const Setup& s, const std::vector<std::string>& names,
                                                  const TrendOptions& opt) {
  const Problem& pr = s.problem;
  const double p = pr.p;
  const int dim = pr.domain.dim;
  const double r = pr.r.value_or(default_r(p, dim));

  std::optional<double> lambda1;
  auto lam1 = [&] {
    if (!lambda1) lambda1 = lambda1_estimate(s.mesh).lambda;
    return *lambda1;
  };
  std::optional<ArIntegralReports> ar;
  std::optional<ZeroBehavior> zero;
  std::optional<MonotoneReports> mono;
  std::optional<RegimeTag> tag;
  std::optional<RegimeReports> regime;

  auto regime_report = [&](const std::string& name) -> HypothesisReport {
    if (!tag) tag = classify_regime(s.g, opt);
    if (tag->kind == RegimeKind::unclassified) {
      HypothesisReport rep;
      rep.condition = name;
      rep.notes = "g is not in a classified regime";
      return rep;
    }
    if (!regime) regime = check_regime_conditions(s.g, s.f, p, dim, *tag, r, opt);
    if (name == "regime_SC") return regime->sc;
    if (name == "regime_AR") return regime->ar;
    return regime->ar_equivalent;
  };

  std::vector<HypothesisReport> out;
  for (const std::string& name : names) {
    if (name == "H_SC") {
      out.push_back(check_subcritical(s.g, s.f, p, dim, r, opt));
    } else if (name == "H_AR_prime") {
      out.push_back(check_ar_prime(s.g, s.f, p, opt));
    } else if (name == "H_AR_1" || name == "H_AR_2") {
      if (!pr.theta) throw ParameterError(name + " needs the exponent 'theta'");
      if (!ar) ar = check_ar_integral(s.g, s.f, p, *pr.theta, {}, opt);
      out.push_back(name == "H_AR_1" ? ar->ar1 : ar->ar2);
    } else if (name == "H_lambda1" || name == "H_1") {
      if (!zero) zero = check_behavior_at_zero(s.f, p, lam1(), opt);
      out.push_back(name == "H_1" ? zero->h1 : zero->h_lambda1);
    } else if (name == "H_m" || name == "H_inf" || name == "H_m_prime") {
      if (!mono) mono = check_monotone_and_superlinear(s.g, s.f, p, opt);
      out.push_back(name == "H_m" ? mono->h_m : name == "H_inf" ? mono->h_inf : mono->h_m_prime);
    } else if (name == "H_2") {
      const auto laplace = std::make_shared<const Mesh>(s.mesh->with_p(2.0));
      out.push_back(check_h2(s.f, p, lambda1_estimate(laplace).lambda, lam1(), opt));
    } else if (name == "H_3") {
      out.push_back(check_h3(s.f, p, 10.0, opt));
    } else if (name == "H_4") {
      out.push_back(check_h4(s.f, opt));
    } else if (name == "regime_SC" || name == "regime_AR" || name == "regime_AR_equivalent") {
      out.push_back(regime_report(name));
    } else {
      std::string valid;
      for (const auto& n : condition_names()) valid += (valid.empty() ? "" : ", ") + n;
      throw ParameterError("unknown condition '" + name + "' (valid: " + valid + ")");
    }
  }
  return out;
}

EntryOutcome run_entry(const CatalogEntry& e, const CatalogOptions& opt) {
  EntryOutcome o;
  o.id = e.id;
  const Setup s = make_setup(instantiate(e.id));
  std::vector<std::string> names;
  for (const auto& v : e.expected) names.push_back(v.condition);
  o.reports = evaluate_conditions(s, names, opt.trend);
  for (std::size_t k = 0; k < e.expected.size(); ++k) {
    if (o.reports[k].verdict != e.expected[k].verdict) {
      o.mismatches.push_back(e.expected[k].condition + ": expected " + to_string(e.expected[k].verdict) + ", got " +
                             to_string(o.reports[k].verdict));
    }
  }
  if (classify_regime(s.g, opt.trend).kind != RegimeKind::unclassified) {
    o.disagreements = cross_validate(s.g, s.f, s.problem.p, s.problem.domain.dim,
                                     s.problem.r.value_or(default_r(s.problem.p, s.problem.domain.dim)), opt.trend)
                          .disagreements;
  }
  if (opt.solve && e.solve != SolveKind::none) {
    try {
      const TablePtr table = make_table(s);
      const DiscreteProblem prob = make_discrete(s, table);
      Field v;
      if (e.solve == SolveKind::mountain_pass) {
        MPParams mp;
        mp.tol = opt.tol;
        const MPResult res = solve_mountain_pass(prob, mp);
        v = res.v;
        o.solve_residual = res.residual;
      } else {
        SubSuperOptions so;
        so.tol = opt.tol;
        const SubSuperResult res = solve_minimal(prob, so);
        v = res.v;
        o.solve_residual = res.residual;
      }
      const Field u = pull_back(*table, v);
      o.pulled_residual = quasilinear_residual(s.g, s.f, s.lambda(), u);
      if (!(*o.solve_residual <= opt.tol)) o.mismatches.push_back("solve: residual above tolerance");
      if (!(*o.pulled_residual <= opt.pulled_tol)) o.mismatches.push_back("solve: pulled-back residual above tolerance");
      if (!is_positive(u)) o.mismatches.push_back("solve: solution not positive");
    } catch (const Error& err) {
      o.mismatches.push_back(std::string("solve: ") + err.what());
    }
  }
  return o;
}

CatalogSummary run_catalog(const CatalogOptions& opt) {
  CatalogSummary s;
  for (const auto& e : catalog()) {
    s.entries.push_back(run_entry(e, opt));
    if (!s.entries.back().ok()) s.failing_ids.push_back(e.id);
  }
  return s;
}

void to_json(nlohmann::json& j, const EntryOutcome& o) {
  j = json{{"id", o.id}, {"ok", o.ok()}, {"reports", o.reports}, {"mismatches", o.mismatches},
           {"disagreements", o.disagreements}};
  if (o.solve_residual) j["solve_residual"] = *o.solve_residual;
  if (o.pulled_residual) j["pulled_residual"] = *o.pulled_residual;
}

void to_json(nlohmann::json& j, const CatalogSummary& s) {
  j = json{{"ok", s.ok()}, {"failing_ids", s.failing_ids}, {"entries", s.entries}};
}

}  // namespace natgrad
