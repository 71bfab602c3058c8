#include "natgrad/problem_io.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include "natgrad/errors.hpp"

namespace natgrad {

namespace {

using nlohmann::json;

double number(const json& j, const char* key) {
  const auto& v = j.at(key);
  if (!v.is_number()) throw ParameterError(std::string("field '") + key + "' must be a number");
  return v.get<double>();
}

void check_builtin(const json& j, const char* key) {
  if (!j.is_object() || !j.contains("kind") || !j.at("kind").is_string()) {
    throw ParameterError(std::string("field '") + key + "' must be an object with a string 'kind'");
  }
}

DomainSpec parse_domain(const json& j) {
  if (!j.is_object() || !j.contains("kind")) throw ParameterError("field 'domain' must be an object with 'kind'");
  const std::string kind = j.at("kind").get<std::string>();
  DomainSpec d;
  if (kind == "interval") {
    d.kind = DomainKind::interval;
    d.extent = j.contains("L") ? number(j, "L") : 1.0;
    d.dim = 1;
  } else if (kind == "ball") {
    d.kind = DomainKind::ball;
    d.extent = j.contains("R") ? number(j, "R") : 1.0;
    d.dim = j.contains("N") ? j.at("N").get<int>() : 3;
    if (d.dim < 1) throw ParameterError("domain: N must be at least 1");
  } else {
    throw ParameterError("unknown domain kind '" + kind + "'");
  }
  if (!(d.extent > 0.0)) throw ParameterError("domain: extent must be positive");
  return d;
}

Problem from_document(const json& j) {
  static const std::set<std::string> known = {"id", "p", "g", "f", "lambda", "domain", "nodes",
                                              "r", "theta", "conditions", "method"};
  if (!j.is_object()) throw ParameterError("problem document must be a JSON object");
  for (const auto& [key, value] : j.items()) {
    if (!known.count(key)) throw ParameterError("unknown field '" + key + "'");
  }
  for (const char* key : {"p", "g", "f"}) {
    if (!j.contains(key)) throw ParameterError(std::string("missing field '") + key + "'");
  }
  Problem pr;
  if (j.contains("id")) pr.id = j.at("id").get<std::string>();
  pr.p = number(j, "p");
  if (!(pr.p > 1.0)) throw ParameterError("p must exceed 1");
  check_builtin(j.at("g"), "g");
  check_builtin(j.at("f"), "f");
  pr.g = j.at("g");
  pr.f = j.at("f");
  if (j.contains("lambda")) {
    pr.lambda = number(j, "lambda");
    if (!(*pr.lambda > 0.0)) throw ParameterError("lambda must be positive");
  }
  if (j.contains("domain")) pr.domain = parse_domain(j.at("domain"));
  if (j.contains("nodes")) {
    const auto n = j.at("nodes").get<long long>();
    if (n < 5) throw ParameterError("nodes must be at least 5");
    pr.nodes = static_cast<std::size_t>(n);
  }
  if (j.contains("r")) pr.r = number(j, "r");
  if (j.contains("theta")) pr.theta = number(j, "theta");
  if (j.contains("conditions")) pr.conditions = j.at("conditions").get<std::vector<std::string>>();
  if (j.contains("method")) {
    pr.method = j.at("method").get<std::string>();
    if (pr.method != "mountain_pass" && pr.method != "minimal") {
      throw ParameterError("method must be 'mountain_pass' or 'minimal'");
    }
  }
  return pr;
}

}  // namespace

Problem parse_problem(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw InputError(e.what());
  }
  try {
    return from_document(j);
  } catch (const json::exception& e) {
    throw ParameterError(e.what());
  }
}

Problem load_problem(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  try {
    return parse_problem(ss.str());
  } catch (const InputError& e) {
    throw InputError(path + ": " + e.what());
  }
}

nlohmann::json to_json(const Problem& pr) {
  json j;
  if (!pr.id.empty()) j["id"] = pr.id;
  j["p"] = pr.p;
  j["g"] = pr.g;
  j["f"] = pr.f;
  if (pr.lambda) j["lambda"] = *pr.lambda;
  if (pr.domain.kind == DomainKind::interval) {
    j["domain"] = {{"kind", "interval"}, {"L", pr.domain.extent}};
  } else {
    j["domain"] = {{"kind", "ball"}, {"R", pr.domain.extent}, {"N", pr.domain.dim}};
  }
  j["nodes"] = pr.nodes;
  if (pr.r) j["r"] = *pr.r;
  if (pr.theta) j["theta"] = *pr.theta;
  if (!pr.conditions.empty()) j["conditions"] = pr.conditions;
  if (!pr.method.empty()) j["method"] = pr.method;
  return j;
}

MeshPtr make_mesh(const Problem& pr) {
  if (pr.domain.kind == DomainKind::interval) {
    return std::make_shared<const Mesh>(Mesh::interval(pr.domain.extent, pr.nodes, pr.p));
  }
  return std::make_shared<const Mesh>(Mesh::ball(pr.domain.extent, pr.domain.dim, pr.nodes, pr.p));
}

Setup make_setup(const Problem& pr) {
  try {
    return Setup{pr, g_from_json(pr.g, pr.p), f_from_json(pr.f, pr.p), make_mesh(pr)};
  } catch (const json::exception& e) {
    throw ParameterError(e.what());
  }
}

TablePtr make_table(const Setup& s, double cap) {
  const double s_max = usable_range(s.g, s.problem.p, cap);
  return std::make_shared<const TransformTable>(build_transform(s.g, s.problem.p, s_max));
}

DiscreteProblem make_discrete(const Setup& s, const TablePtr& table) {
  auto tp = std::make_shared<const TransformedProblem>(s.g, s.f, table);
  return DiscreteProblem::from_transformed(s.mesh, tp, s.lambda());
}

}  // namespace natgrad
