#pragma once

#include <memory>
#include <vector>

#include "natgrad/mesh.hpp"
#include "natgrad/nonlinearity.hpp"

namespace natgrad {

/// G(s) = \int_0^s g by adaptive Simpson. Throws ParameterError for s < 0 and
/// QuadratureError when the integral cannot be resolved.
double big_g(const NonlinearityG& g, double s, double tol = 1e-12);

/// Tabulated change of variable A(s) = \int_0^s exp(G(t)/(p-1)) dt on [0, s_max].
///
/// Between nodes, A and G are cubic Hermite interpolants built from the exact
/// nodal derivatives A' = exp(G/(p-1)) and G' = g. The grid starts geometric
/// (ratio 1.05) and is refined until every cell midpoint agrees with direct
/// quadrature to quad_tol and A' changes by at most 5% per cell.
struct TransformTable {
  double p = 2.0;
  std::vector<double> s_grid;
  std::vector<double> a_values;
  std::vector<double> aprime_values;
  std::vector<double> big_g_values;
  std::vector<double> g_values;
  double quad_tol = 1e-10;

  double s_max() const { return s_grid.back(); }
  double a_max() const { return a_values.back(); }
  std::size_t size() const { return s_grid.size(); }
};

using TablePtr = std::shared_ptr<const TransformTable>;

/// Tolerances are relative: each tabulated value carries error at most
/// quad_tol * max(|value|, 1) (absolute for G). Throws OverflowError naming
/// the s where exp(G/(p-1)) leaves the double range.
TransformTable build_transform(const NonlinearityG& g, double p, double s_max, double tol = 1e-10);

/// Largest s <= s_cap at which exp(p G(s)/(p-1)) stays representable, i.e.
/// the usable working range of the transform and of H.
double usable_range(const NonlinearityG& g, double p, double s_cap);

double eval_A(const TransformTable& table, double s);
double eval_A_prime(const TransformTable& table, double s);
double eval_G(const TransformTable& table, double s);
/// Unique t in [0, s_max] with A(t) = v.
double invert_A(const TransformTable& table, double v);

/// Right-hand side h(x, v) = exp(G(t)) f(x, t), t = A^{-1}(v), of the
/// gradient-free problem, with H(x, v) = \int_0^v h. Both are zero-extended
/// to v < 0.
class TransformedProblem {
public:
  TransformedProblem(NonlinearityG g, SourceF f, TablePtr table);

  double p() const { return table_->p; }
  const TransformTable& table() const { return *table_; }
  TablePtr table_ptr() const { return table_; }
  const NonlinearityG& g() const { return g_; }
  const SourceF& f() const { return f_; }

  double h(double x, double v) const;
  /// dh/dv = exp((p-2) G(t)/(p-1)) (g f + f') at t = A^{-1}(v).
  double dh(double x, double v) const;
  double big_h(double x, double v) const;

private:
  double phi_integrand(double x, double t) const;
  double primitive(double x, double t) const;

  NonlinearityG g_;
  SourceF f_;
  TablePtr table_;
  // Primitive Phi(t) = \int_0^t exp(p G/(p-1)) f, so that H(v) = Phi(A^{-1}(v)).
  std::vector<double> phi_t_, phi_values_, phi_rates_;
};

TransformedProblem transformed_nonlinearity(const NonlinearityG& g, const SourceF& f,
                                            TablePtr table);

/// Nodewise v = A(u).
Field push_forward(const TransformTable& table, const Field& u);
/// Nodewise u = A^{-1}(v).
Field pull_back(const TransformTable& table, const Field& v);

}  // namespace natgrad
