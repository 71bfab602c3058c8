#pragma once

#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "natgrad/hypotheses.hpp"
#include "natgrad/problem_io.hpp"
#include "natgrad/verdict.hpp"

namespace natgrad {

using Params = std::map<std::string, double>;

/// Quantities constraints may refer to besides the entry parameters.
struct EntryContext {
  double p = 2.0;
  int dim = 3;
  double pstar = 6.0;
  double lambda1 = 0.0;  ///< first eigenvalue of -Delta_p on the entry domain
};

struct Constraint {
  std::string text;
  std::string citation;
  std::function<bool(const Params&, const EntryContext&)> holds;
};

struct ExpectedVerdict {
  std::string condition;
  Verdict verdict = Verdict::holds;
};

enum class SolveKind { none, mountain_pass, minimal };

struct CatalogEntry {
  std::string id;
  std::string title;
  std::string citation;
  /// Defaults at the center of the constraint region. Keys "p", "N", "R"
  /// select the ball domain.
  Params defaults;
  std::vector<Constraint> constraints;
  std::function<nlohmann::json(const Params&)> g_spec;
  std::function<nlohmann::json(const Params&)> f_spec;
  /// Parameter whose default depends on λ₁, with its default value.
  std::optional<std::pair<std::string, std::function<double(const Params&, const EntryContext&)>>> derived;
  std::vector<ExpectedVerdict> expected;
  std::optional<double> theta;
  bool has_lambda = false;  ///< (P_λ) family: "lambda" is a parameter
  double lambda_min = 0.0, lambda_max = 0.0;
  SolveKind solve = SolveKind::none;
};

const std::vector<CatalogEntry>& catalog();
/// Throws ParameterError for unknown ids.
const CatalogEntry& find_entry(const std::string& id);

/// Resolves parameters (defaults overridden by `overrides`), validates every
/// constraint and returns the problem document. Throws ConstraintError naming
/// the violated inequality and its citation.
Problem instantiate(const std::string& id, const Params& overrides = {});

/// Every condition name accepted by evaluate_conditions.
const std::vector<std::string>& condition_names();

/// Evaluates the named conditions. (H_AR)_1 and (H_AR)_2 need `theta`.
std::vector<HypothesisReport> evaluate_conditions(const Setup& s, const std::vector<std::string>& names,
                                                  const TrendOptions& opt = {});

struct EntryOutcome {
  std::string id;
  std::vector<HypothesisReport> reports;
  std::vector<std::string> mismatches;
  std::vector<std::string> disagreements;
  std::optional<double> solve_residual;   ///< residual of (Q)
  std::optional<double> pulled_residual;  ///< residual of (P) after pull back
  bool ok() const { return mismatches.empty() && disagreements.empty(); }
};

struct CatalogSummary {
  std::vector<EntryOutcome> entries;
  std::vector<std::string> failing_ids;
  bool ok() const { return failing_ids.empty(); }
};

struct CatalogOptions {
  bool solve = true;   ///< run the designated solves
  double tol = 1e-9;           ///< residual tolerance of (Q)
  double pulled_tol = 1e-5;    ///< residual tolerance of (P) after pull back
  TrendOptions trend;
};

EntryOutcome run_entry(const CatalogEntry& e, const CatalogOptions& opt = {});
CatalogSummary run_catalog(const CatalogOptions& opt = {});

void to_json(nlohmann::json& j, const EntryOutcome& o);
void to_json(nlohmann::json& j, const CatalogSummary& s);

}  // namespace natgrad
