#pragma once

#include <cstddef>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "natgrad/mesh.hpp"
#include "natgrad/nonlinearity.hpp"
#include "natgrad/pde.hpp"
#include "natgrad/transform.hpp"

namespace natgrad {

struct DomainSpec {
  DomainKind kind = DomainKind::ball;
  double extent = 1.0;  ///< L for the interval, R for the ball
  int dim = 3;          ///< N for the ball, 1 for the interval
};

/// Problem document. `g` and `f` are named-builtin descriptions; the optional
/// fields configure `check` and `solve`.
struct Problem {
  std::string id;
  double p = 2.0;
  nlohmann::json g;
  nlohmann::json f;
  std::optional<double> lambda;
  DomainSpec domain;
  std::size_t nodes = 401;
  std::optional<double> r;                  ///< exponent of (H_SC); default_r when absent
  std::optional<double> theta;              ///< exponent of (H_AR)_1, (H_AR)_2
  std::vector<std::string> conditions;      ///< conditions checked by default
  std::string method;                       ///< "mountain_pass", "minimal" or empty (automatic)
};

/// Parses a problem document. Throws InputError with line and column on
/// malformed JSON and ParameterError on invalid fields.
Problem parse_problem(const std::string& text);
Problem load_problem(const std::string& path);
nlohmann::json to_json(const Problem& pr);

/// Cap on the tabulated range of the transform used by solvers.
inline constexpr double default_table_cap = 40.0;

/// Evaluable objects of a problem.
struct Setup {
  Problem problem;
  NonlinearityG g;
  SourceF f;
  MeshPtr mesh;

  double lambda() const { return problem.lambda.value_or(1.0); }
};

Setup make_setup(const Problem& pr);
MeshPtr make_mesh(const Problem& pr);
TablePtr make_table(const Setup& s, double cap = default_table_cap);
/// -Delta_p v = lambda h(x, v) for the transformed right side.
DiscreteProblem make_discrete(const Setup& s, const TablePtr& table);

}  // namespace natgrad
