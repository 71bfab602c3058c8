#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "natgrad/pde.hpp"
#include "natgrad/verdict.hpp"

namespace natgrad {

/// Mountain pass by ray deformation: the energy is maximized along the ray
/// base + t w, the maximizer is moved along the negative Sobolev gradient, and
/// the ray is re-formed through the moved point. A Newton polish finishes the
/// iteration once the residual has dropped by `polish_after`.
struct MPParams {
  int path_points = 24;          ///< samples on each ray before refinement
  double descent_step = 1.0;     ///< initial step for the Sobolev gradient
  int max_outer = 4000;
  double tol = 1e-9;             ///< residual tolerance
  double polish_after = 1e-3;    ///< relative residual drop that triggers a Newton polish
  bool polish = true;
  std::optional<Field> endpoint;   ///< J(endpoint) < J(base); default scales `direction`
  std::optional<Field> base;       ///< default 0
  std::optional<Field> direction;  ///< default phi_1
};

struct MPResult {
  Field v;
  double energy = 0.0;
  double residual = 0.0;
  double endpoint_energy = 0.0;
  double path_max = 0.0;  ///< max of J on the final ray
  int iterations = 0;
  bool polished = false;
};

MPResult solve_mountain_pass(const DiscreteProblem& prob, const MPParams& params = {});

struct SubSuperOptions {
  int max_iter = 20000;
  double tol = 1e-9;             ///< residual tolerance of the returned field
  double blowup = 1e6;           ///< sup norm treated as blow-up
  double probe_tol = 1e-9;       ///< relative slack of the sub/super sign probes
  bool polish = true;
};

struct SubSuperResult {
  Field v;
  double residual = 0.0;
  double shift = 0.0;  ///< monotonicity shift B
  int iterations = 0;
  bool polished = false;
};

/// Monotone iteration from `sub`, optionally bounded by `super`:
///   -Delta_p v_{k+1} + B |v_{k+1}|^{p-2} v_{k+1} = lambda h(v_k) + B v_k^{p-1}.
/// Throws ParameterError when a probe rejects the bracket and ConvergenceError
/// on ordering violations, blow-up or max_iter.
SubSuperResult solve_sub_super(const DiscreteProblem& prob, const Field& sub, const Field* super = nullptr,
                               const SubSuperOptions& opt = {});

/// Minimal positive solution by monotone iteration from the largest
/// subsolution eps * phi_1 found by halving eps. Throws ConvergenceError when
/// no start converges.
SubSuperResult solve_minimal(const DiscreteProblem& prob, const SubSuperOptions& opt = {});

/// Largest free-node value of dJ/dv relative to the term scale; <= 0 for subsolutions.
double subsolution_defect(const DiscreteProblem& prob, const Field& v);
/// Largest free-node value of -dJ/dv relative to the term scale; <= 0 for supersolutions.
double supersolution_defect(const DiscreteProblem& prob, const Field& v);

enum class Branch { minimal, mountain_pass };
std::string to_string(Branch b);

struct BranchPoint {
  double lambda = 0.0;
  Branch branch = Branch::minimal;
  double sup_norm = 0.0;
  double energy = 0.0;
  double residual = 0.0;
};

struct BifurcationDiagram {
  std::vector<double> lambda_grid;     ///< every lambda attempted, increasing
  std::vector<bool> minimal_found;     ///< per lambda_grid entry
  std::vector<BranchPoint> points;
  double lambda_lo = 0.0;              ///< last success
  std::optional<double> lambda_hi;     ///< first persistent failure; empty means >= lambda_max
  std::vector<Field> minimal_solutions;  ///< per successful lambda, grid order
  std::vector<std::optional<Field>> mp_solutions;
};

struct ContinuationParams {
  SubSuperOptions monotone;
  MPParams mountain_pass;
  bool second_branch = true;
  double min_step_fraction = 1e-4;
};

/// Sweeps lambda over an even grid of `steps` points in [lambda_min, lambda_max].
/// `sublinear_at_zero` is the verdict of the (H_1) check and must hold.
BifurcationDiagram continuation_lambda(const DiscreteProblem& family, double lambda_min, double lambda_max,
                                       int steps, Verdict sublinear_at_zero, const ContinuationParams& params = {});

/// CSV with header "lambda,branch,sup_norm,energy".
void write_diagram_csv(std::ostream& os, const BifurcationDiagram& d);

}  // namespace natgrad
