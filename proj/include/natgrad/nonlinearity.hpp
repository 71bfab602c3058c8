#pragma once

#include <functional>
#include <string>
#include <vector>

#include <json.hpp>

namespace natgrad {

/// Gradient coefficient g : [0, inf) -> [0, inf) of the term g(u)|grad u|^p.
struct NonlinearityG {
  std::function<double(double)> eval;
  std::function<double(double)> deriv;  ///< optional g'
  std::string label;

  double operator()(double s) const { return eval(s); }
  bool has_deriv() const { return static_cast<bool>(deriv); }
};

/// Source f(x, s) >= 0. `x` is the radial or interval coordinate.
struct SourceF {
  std::function<double(double x, double s)> eval;
  std::function<double(double x, double s)> deriv_s;   ///< optional df/ds
  std::function<double(double x, double s)> log_eval;  ///< optional log f, finite where f overflows
  std::function<double(double x, double s)> log_deriv; ///< optional f'/f
  std::function<double(double x, double s)> primitive; ///< optional int_0^s f
  std::vector<double> x_samples;                       ///< empty: x-independent
  std::string label;

  double operator()(double x, double s) const { return eval(x, s); }
  bool has_deriv() const { return static_cast<bool>(deriv_s) || static_cast<bool>(log_deriv); }
  double log_value(double x, double s) const;
  /// f'/f; falls back to deriv_s / eval.
  double log_derivative(double x, double s) const;
  double derivative(double x, double s) const;
  /// Spatial points used for worst-case evaluation (a single 0 when x-independent).
  std::vector<double> sample_points() const;
};

/// Validates (H_g) on a sample set and, when g' is supplied, checks it against
/// central differences. Throws ConstraintError on violation.
NonlinearityG make_g(std::function<double(double)> eval, std::function<double(double)> deriv,
                     std::string label);

/// Validates (H_f) (nonnegativity, boundedness on bounded ranges) at sampled
/// (x, s) points. Throws ConstraintError on violation.
SourceF make_f(SourceF f);

namespace builtin {

NonlinearityG g_zero();
NonlinearityG g_constant(double c);
/// C (1 + s)^(-alpha)
NonlinearityG g_power_decay(double c, double alpha);
/// s^q
NonlinearityG g_power(double q);
/// (p - 1) / (1 + s)
NonlinearityG g_shifted_ratio(double p);
/// (p - 1) (s + 2) / (s + 1)
NonlinearityG g_affine_ratio(double p);

SourceF f_zero();
/// mu s^(r-1)
SourceF f_power(double r, double mu = 1.0);
/// mu s^q exp(c2 s^gamma)
SourceF f_power_exp(double q, double c2, double mu = 1.0, double gamma = 1.0);
/// mu (log(1 + s))^(r-1)
SourceF f_log_power(double r, double mu = 1.0);
/// mu s^k (log(1 + s))^q
SourceF f_power_log(double k, double q, double mu = 1.0);
/// sum of terms
SourceF f_sum(std::vector<SourceF> terms);

}  // namespace builtin

/// Builds g from a named-builtin JSON description such as
/// {"kind":"power_decay","C":1.0,"alpha":0.5}. `p` resolves p-dependent kinds.
NonlinearityG g_from_json(const nlohmann::json& j, double p);
SourceF f_from_json(const nlohmann::json& j, double p);

}  // namespace natgrad
