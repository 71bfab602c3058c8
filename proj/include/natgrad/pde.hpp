#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <memory>
#include <string>
#include <vector>

#include "natgrad/mesh.hpp"
#include "natgrad/nonlinearity.hpp"
#include "natgrad/transform.hpp"

namespace natgrad {

using PointFn = std::function<double(double x, double s)>;

/// -Delta_p v = lambda h(x, v) on a mesh. h and H are taken as zero for v < 0.
struct DiscreteProblem {
  MeshPtr mesh;
  PointFn h;
  PointFn dh;     ///< optional dh/dv
  PointFn big_h;  ///< primitive of h in v
  double lambda = 1.0;
  std::string label;

  double p() const { return mesh->p(); }
  double h_at(double x, double v) const { return v > 0.0 ? h(x, v) : 0.0; }
  double dh_at(double x, double v) const;
  double big_h_at(double x, double v) const { return v > 0.0 ? big_h(x, v) : 0.0; }

  static DiscreteProblem from_transformed(MeshPtr mesh, std::shared_ptr<const TransformedProblem> tp,
                                          double lambda = 1.0);
  /// h(x, v) = f(x, v) with H computed by quadrature.
  static DiscreteProblem direct(MeshPtr mesh, const SourceF& f, double lambda = 1.0);
};

/// Tridiagonal matrix: lower[i] couples i to i-1, upper[i] couples i to i+1.
struct Tridiagonal {
  std::vector<double> lower, diag, upper;
  explicit Tridiagonal(std::size_t n = 0) : lower(n, 0.0), diag(n, 0.0), upper(n, 0.0) {}
  std::size_t size() const { return diag.size(); }
};

/// Thomas algorithm. Throws ConvergenceError on a vanishing pivot.
std::vector<double> solve_tridiagonal(const Tridiagonal& a, const std::vector<double>& rhs);

/// w_c |D_c|^(p-2) D_c for each cell, D_c the forward difference.
std::vector<double> cell_fluxes(const Mesh& mesh, const std::vector<double>& v);
/// (1/p) sum w_c h_c |D_c|^p.
double gradient_energy(const Mesh& mesh, const std::vector<double>& v);
/// sum m_i |v_i|^p.
double mass_p(const Mesh& mesh, const std::vector<double>& v);

/// J(v) = (1/p) int |grad v|^p - lambda int H(x, v).
double functional_eval(const DiscreteProblem& prob, const Field& v);
/// dJ/dv_i; zero at Dirichlet nodes.
Field functional_gradient(const DiscreteProblem& prob, const Field& v);
/// sqrt(sum over free nodes of grad_i^2 / m_i).
double residual(const DiscreteProblem& prob, const Field& v);
/// Weighted norm used by `residual`, applied to any nodal gradient.
double dual_norm(const Mesh& mesh, const std::vector<double>& grad);

/// Jacobian of functional_gradient on the free nodes, with |D|^(p-2)
/// regularized as (D^2 + delta^2)^((p-2)/2).
Tridiagonal functional_hessian(const DiscreteProblem& prob, const Field& v, double delta = 1e-10);

/// Weighted p = 2 stiffness (plus mass * shift) on the free nodes.
Tridiagonal stiffness_matrix(const Mesh& mesh, double shift = 0.0);

/// Damped Newton iteration on the free nodes: v <- v - step * H^{-1} grad.
/// Returns the polished field when the residual reaches tol; throws
/// ConvergenceError otherwise. The result is checked for positivity only by callers.
struct NewtonOptions {
  double tol = 1e-10;
  int max_iter = 60;
  double delta = 1e-10;
};
Field newton_polish(const DiscreteProblem& prob, const Field& start, const NewtonOptions& opt = {});

/// Minimizer of the strictly convex energy
///   (1/p) int |grad w|^p + (shift/p) int |w|^p - int rhs w,
/// i.e. -Delta_p w + shift |w|^(p-2) w = rhs, with rhs given nodally.
struct ConvexSolveOptions {
  double tol = 1e-11;  ///< relative to the dual norm of rhs
  int max_iter = 200;
};
Field solve_p_poisson(const MeshPtr& mesh, const std::vector<double>& rhs, double shift = 0.0,
                      const Field* start = nullptr, const ConvexSolveOptions& opt = {});

struct EigenResult {
  double lambda = 0.0;
  Field phi;  ///< positive, sup norm 1
  int iterations = 0;
};
struct EigenOptions {
  double tol = 1e-11;  ///< relative change of the Rayleigh quotient
  int max_iter = 500;
};
/// First eigenvalue of -Delta_p by nonlinear inverse iteration.
EigenResult lambda1_estimate(const MeshPtr& mesh, const EigenOptions& opt = {});
/// int |grad v|^p / int |v|^p.
double rayleigh_quotient(const Mesh& mesh, const std::vector<double>& v);

struct GradientCheckReport {
  std::vector<double> eps;
  std::vector<double> max_rel_err;
  int directions = 0;
};
GradientCheckReport gradient_check(const DiscreteProblem& prob, const Field& v,
                                   const std::vector<double>& eps, int directions = 8,
                                   std::uint64_t seed = 1);

/// Residual of -div(e^G |grad u|^(p-2) grad u) = lambda e^G f, the divergence
/// form of -Delta_p u = g(u)|grad u|^p + lambda f(x, u). Cell coefficients are
/// the cell averages of e^(G/(p-1)) over [u_i, u_(i+1)] raised to p-1; nodal
/// residuals are divided by e^(G(u_i)).
double quasilinear_residual(const NonlinearityG& g, const SourceF& f, double lambda, const Field& u);

/// One-sided difference (v_n - v_(n-1)) / dx at the outer boundary.
double boundary_slope(const Field& v);
/// v_i > 0 at every free node.
bool is_positive(const Field& v);

/// CSV with header "node,value", 17 significant digits.
void write_field_csv(std::ostream& os, const Field& v);

}  // namespace natgrad
