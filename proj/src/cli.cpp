#include "natgrad/cli.hpp"

#include <cmath>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "natgrad/errors.hpp"
#include "natgrad/hypotheses.hpp"
#include "natgrad/pde.hpp"
#include "natgrad/problem_io.hpp"
#include "natgrad/problems.hpp"
#include "natgrad/solvers.hpp"
#include "natgrad/transform.hpp"

namespace natgrad {

namespace {

using nlohmann::json;

struct RunConfig {
  std::string input;
  std::string out;
  std::optional<double> tol;
  std::optional<std::size_t> nodes;
  std::uint64_t seed = 1;
  std::vector<std::string> conditions;
  double lambda_min = 0.25;
  double lambda_max = 8.0;
  int lambda_steps = 16;
  double s_max = 0.0;
  int points = 101;
  std::string id;
  std::vector<std::string> overrides;
};

class Output {
public:
  Output(const std::string& path, std::ostream& fallback) : path_(path), fallback_(fallback) {}
  std::ostream& stream() { return buffer_; }
  void flush() {
    if (path_.empty()) {
      fallback_ << buffer_.str();
      return;
    }
    std::ofstream f(path_, std::ios::binary);
    if (!(f << buffer_.str())) throw InputError("cannot write '" + path_ + "'");
  }

private:
  std::string path_;
  std::ostream& fallback_;
  std::ostringstream buffer_;
};

std::string dump(const json& j) { return j.dump(2) + "\n"; }

Setup load_setup(const RunConfig& cfg) {
  Problem pr = load_problem(cfg.input);
  if (cfg.nodes) pr.nodes = *cfg.nodes;
  return make_setup(pr);
}

int cmd_transform(const RunConfig& cfg, std::ostream& out) {
  const Setup s = load_setup(cfg);
  const double p = s.problem.p;
  const double s_max = cfg.s_max > 0.0 ? cfg.s_max : std::min(10.0, usable_range(s.g, p, 10.0));
  if (cfg.points < 2) throw ParameterError("--points must be at least 2");
  const TransformTable table = build_transform(s.g, p, s_max, cfg.tol.value_or(1e-10));
  const double x0 = s.f.sample_points().front();
  Output o(cfg.out, out);
  auto& os = o.stream();
  os.precision(17);
  os << "s,G,A,A_prime,h\n";
  for (int k = 0; k < cfg.points; ++k) {
    const double t = s_max * k / (cfg.points - 1);
    const double big_g = eval_G(table, t);
    os << t << ',' << big_g << ',' << eval_A(table, t) << ',' << eval_A_prime(table, t) << ','
       << std::exp(big_g) * s.f(x0, t) << '\n';
  }
  o.flush();
  return exit_ok;
}

int cmd_check(const RunConfig& cfg, std::ostream& out) {
  const Setup s = load_setup(cfg);
  std::vector<std::string> names = cfg.conditions;
  if (names.empty()) names = s.problem.conditions;
  if (names.empty()) {
    for (const auto& n : condition_names()) {
      if ((n == "H_AR_1" || n == "H_AR_2") && !s.problem.theta) continue;
      names.push_back(n);
    }
  }
  const auto reports = evaluate_conditions(s, names);
  Output o(cfg.out, out);
  o.stream() << dump(json(reports));
  o.flush();
  bool fails = false, inconclusive = false;
  for (const auto& r : reports) {
    fails |= r.verdict == Verdict::fails;
    inconclusive |= r.verdict == Verdict::inconclusive;
  }
  return fails ? exit_fails : inconclusive ? exit_inconclusive : exit_ok;
}

int cmd_eigen(const RunConfig& cfg, std::ostream& out) {
  const Setup s = load_setup(cfg);
  EigenOptions opt;
  if (cfg.tol) opt.tol = *cfg.tol;
  const EigenResult e = lambda1_estimate(s.mesh, opt);
  const json summary{{"lambda1", e.lambda}, {"iterations", e.iterations}, {"nodes", s.mesh->size()}};
  if (cfg.out.empty()) {
    out << dump(summary);
    write_field_csv(out, e.phi);
  } else {
    Output o(cfg.out, out);
    write_field_csv(o.stream(), e.phi);
    o.flush();
    out << dump(summary);
  }
  return exit_ok;
}

int cmd_solve(const RunConfig& cfg, std::ostream& out) {
  const Setup s = load_setup(cfg);
  const double tol = cfg.tol.value_or(1e-9);
  if (!(tol > 0.0)) throw ParameterError("--tol must be positive");
  std::string method = s.problem.method;
  if (method.empty()) {
    const auto zero = check_behavior_at_zero(s.f, s.problem.p, lambda1_estimate(s.mesh).lambda);
    method = zero.h1.verdict == Verdict::holds ? "minimal" : "mountain_pass";
  }
  const TablePtr table = make_table(s);
  const DiscreteProblem prob = make_discrete(s, table);
  Field v;
  double res = 0.0;
  if (method == "minimal") {
    SubSuperOptions opt;
    opt.tol = tol;
    const auto r = solve_minimal(prob, opt);
    v = r.v;
    res = r.residual;
  } else {
    MPParams opt;
    opt.tol = tol;
    const auto r = solve_mountain_pass(prob, opt);
    v = r.v;
    res = r.residual;
  }
  const Field u = pull_back(*table, v);
  const auto gc = gradient_check(prob, v, {1e-4, 1e-6}, 8, cfg.seed);
  const json summary{{"method", method},
                     {"lambda", s.lambda()},
                     {"residual", res},
                     {"pulled_residual", quasilinear_residual(s.g, s.f, s.lambda(), u)},
                     {"sup_norm", u.sup_norm()},
                     {"transformed_sup_norm", v.sup_norm()},
                     {"energy", functional_eval(prob, v)},
                     {"boundary_slope", boundary_slope(u)},
                     {"positive", is_positive(u)},
                     {"gradient_check", {{"eps", gc.eps}, {"max_rel_err", gc.max_rel_err}, {"seed", cfg.seed}}}};
  if (cfg.out.empty()) {
    out << dump(summary);
    write_field_csv(out, u);
  } else {
    Output o(cfg.out, out);
    write_field_csv(o.stream(), u);
    o.flush();
    out << dump(summary);
  }
  return exit_ok;
}

int cmd_bifurcate(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  const Setup s = load_setup(cfg);
  const auto zero = check_behavior_at_zero(s.f, s.problem.p, lambda1_estimate(s.mesh).lambda);
  const TablePtr table = make_table(s);
  ContinuationParams params;
  if (cfg.tol) {
    params.monotone.tol = *cfg.tol;
    params.mountain_pass.tol = *cfg.tol;
  }
  const auto d = continuation_lambda(make_discrete(s, table), cfg.lambda_min, cfg.lambda_max, cfg.lambda_steps,
                                     zero.h1.verdict, params);
  Output o(cfg.out, out);
  write_diagram_csv(o.stream(), d);
  o.flush();
  std::ostringstream bracket;
  bracket.precision(17);
  bracket << "Lambda in [" << d.lambda_lo << ", ";
  if (d.lambda_hi) bracket << *d.lambda_hi << "]";
  else bracket << ">= " << cfg.lambda_max << "]";
  err << bracket.str() << "\n";
  return exit_ok;
}

int cmd_catalog(const RunConfig& cfg, std::ostream& out) {
  Output o(cfg.out, out);
  auto& os = o.stream();
  if (cfg.id.empty()) {
    if (!cfg.overrides.empty()) throw ParameterError("--set needs --id");
    for (const auto& e : catalog()) {
      os << e.id << ": " << e.title << "\n";
      os << "  defaults:";
      for (const auto& [k, v] : e.defaults) os << ' ' << k << '=' << v;
      if (e.derived) os << ' ' << e.derived->first << "=<from lambda1>";
      os << "\n";
      for (const auto& c : e.constraints) os << "  constraint: " << c.text << " (" << c.citation << ")\n";
      os << "  expected:";
      for (const auto& v : e.expected) os << ' ' << v.condition << '=' << to_string(v.verdict);
      os << "\n";
    }
  } else {
    Params m;
    for (const auto& kv : cfg.overrides) {
      const auto eq = kv.find('=');
      if (eq == std::string::npos) throw ParameterError("--set expects key=value, got '" + kv + "'");
      std::size_t used = 0;
      double value = 0.0;
      try {
        value = std::stod(kv.substr(eq + 1), &used);
      } catch (const std::exception&) {
        used = 0;
      }
      if (used == 0 || used != kv.size() - eq - 1) throw ParameterError("--set value is not a number: '" + kv + "'");
      m[kv.substr(0, eq)] = value;
    }
    os << dump(to_json(instantiate(cfg.id, m)));
  }
  o.flush();
  return exit_ok;
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Natural gradient growth problems: transform, hypothesis checks and solvers", "natgrad"};
  app.require_subcommand(1);
  RunConfig cfg;

  auto input = [&](CLI::App* sub) {
    sub->add_option("problem", cfg.input, "Problem JSON document")->required();
  };
  auto common = [&](CLI::App* sub) {
    sub->add_option("--out", cfg.out, "Write the main output to this file");
    sub->add_option("--tol", cfg.tol, "Tolerance")->check(CLI::PositiveNumber);
    sub->add_option("--nodes", cfg.nodes, "Number of mesh nodes")->check(CLI::Range(5, 1000000));
  };

  auto* transform = app.add_subcommand("transform", "Tabulate G, A, A' and h on [0, s_max]");
  input(transform);
  common(transform);
  transform->add_option("--s-max", cfg.s_max, "Right end of the table (default min(10, usable range))");
  transform->add_option("--points", cfg.points, "Number of output rows");

  auto* check = app.add_subcommand("check", "Evaluate hypotheses and emit a JSON report array");
  input(check);
  common(check);
  check->add_option("--condition", cfg.conditions, "Conditions to check (repeatable, comma separated)")
      ->delimiter(',');

  auto* eigen = app.add_subcommand("eigen", "First eigenvalue of -Delta_p and its eigenfunction");
  input(eigen);
  common(eigen);

  auto* solve = app.add_subcommand("solve", "Solve the transformed problem and pull back");
  input(solve);
  common(solve);
  solve->add_option("--seed", cfg.seed, "Seed of the random gradient-check directions");

  auto* bifurcate = app.add_subcommand("bifurcate", "Trace the lambda bifurcation diagram");
  input(bifurcate);
  common(bifurcate);
  bifurcate->add_option("--seed", cfg.seed, "Accepted for symmetry; the sweep is deterministic");
  bifurcate->add_option("--lambda-min", cfg.lambda_min, "Smallest lambda");
  bifurcate->add_option("--lambda-max", cfg.lambda_max, "Largest lambda");
  bifurcate->add_option("--lambda-steps", cfg.lambda_steps, "Number of grid points");

  auto* cat = app.add_subcommand("catalog", "List catalogue entries or print one resolved problem");
  cat->add_option("--out", cfg.out, "Write the output to this file");
  cat->add_option("--id", cfg.id, "Entry to instantiate");
  cat->add_option("--set", cfg.overrides, "Parameter override key=value (repeatable)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    std::ostringstream o, eo;
    const int code = app.exit(e, o, eo);
    out << o.str();
    err << eo.str();
    return code == 0 ? exit_ok : exit_usage;
  }

  try {
    if (transform->parsed()) return cmd_transform(cfg, out);
    if (check->parsed()) return cmd_check(cfg, out);
    if (eigen->parsed()) return cmd_eigen(cfg, out);
    if (solve->parsed()) return cmd_solve(cfg, out);
    if (bifurcate->parsed()) return cmd_bifurcate(cfg, out, err);
    return cmd_catalog(cfg, out);
  } catch (const InputError& e) {
    err << "error: " << e.what() << "\n";
    return exit_usage;
  } catch (const ParameterError& e) {
    err << "error: " << e.what() << "\n";
    return exit_usage;
  } catch (const ConstraintError& e) {
    err << "error: " << e.what() << "\n";
    return exit_usage;
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return solve->parsed() || bifurcate->parsed() || eigen->parsed() ? exit_no_convergence : exit_usage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return exit_usage;
  }
}

}  // namespace natgrad
