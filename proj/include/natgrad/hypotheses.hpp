#pragma once

#include <map>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "natgrad/nonlinearity.hpp"
#include "natgrad/verdict.hpp"

namespace natgrad {

/// Grid and decision thresholds of the trend test. Quotients are sampled at
/// s_k = s_base * rho^k (or rho^-k toward zero), k = 0..K.
struct TrendOptions {
  double s_base = 1.0;
  double rho = 2.0;
  int k_max = 40;
  int tail = 8;
  double margin = 0.05;
  double eps_zero = 1e-6;
};

enum class TrendKind { stationary, geometric, diverging, unresolved, insufficient };

std::string to_string(TrendKind k);

/// Classification of the tail of a sampled sequence.
struct Trend {
  std::vector<double> s;
  std::vector<double> q;
  bool overflow = false;  ///< sampling stopped because q left the double range upward
  TrendKind kind = TrendKind::insufficient;
  double limit = 0.0;     ///< extrapolated limit for stationary / geometric
  int direction = 0;      ///< +1 increasing, -1 decreasing, 0 flat or mixed
  bool nondecreasing = false;
  bool nonincreasing = false;
};

Trend analyze_trend(std::vector<double> s, std::vector<double> q, bool overflow,
                    const TrendOptions& opt = {});

Verdict limit_above(const Trend& t, double bound, const TrendOptions& opt = {});
Verdict limit_below(const Trend& t, double bound, const TrendOptions& opt = {});
Verdict limit_zero(const Trend& t, const TrendOptions& opt = {});
Verdict limit_infinite(const Trend& t);
/// Nondecreasing over the tail; `s0` receives the first grid point from which
/// the sequence is nondecreasing.
Verdict eventually_nondecreasing(const Trend& t, double* s0 = nullptr);

struct HypothesisReport {
  std::string condition;
  Verdict verdict = Verdict::inconclusive;
  std::vector<std::pair<double, double>> witness;
  std::map<std::string, double> parameters;
  std::string notes;
};

void to_json(nlohmann::json& j, const HypothesisReport& r);

enum class RegimeKind {
  g_inf_positive,
  g_to_zero_sg_to_inf,
  g_to_zero_sg_to_c,
  g_to_inf_log_deriv_bounded,
  unclassified
};

std::string to_string(RegimeKind k);

struct RegimeTag {
  RegimeKind kind = RegimeKind::unclassified;
  double value = 0.0;  ///< g_inf or c when applicable
  std::string note;
};

void to_json(nlohmann::json& j, const RegimeTag& t);

/// Np/(N-p) for p < N, +inf otherwise.
double compute_pstar(double p, int dim);
/// Exponent used when none is given: p + 0.9 (p* - p), or p + 10 when p* is infinite.
double default_r(double p, int dim);

/// (H_SC) with exponent r, p < r < p*.
HypothesisReport check_subcritical(const NonlinearityG& g, const SourceF& f, double p, int dim,
                                   double r, const TrendOptions& opt = {});

/// (H_AR)': limit of A(s) e^{-G/(p-1)} (g + f'/f) exceeds p - 1.
HypothesisReport check_ar_prime(const NonlinearityG& g, const SourceF& f, double p,
                                const TrendOptions& opt = {});

struct ArIntegralReports {
  HypothesisReport ar1;
  HypothesisReport ar2;
};

/// (H_AR)_1 and (H_AR)_2 by direct quadrature at the probe points. An empty
/// probe set uses the trend grid.
ArIntegralReports check_ar_integral(const NonlinearityG& g, const SourceF& f, double p,
                                    double theta, std::vector<double> probes = {},
                                    const TrendOptions& opt = {});

enum class ZeroClass { sub_lambda1, sublinear, neither };

std::string to_string(ZeroClass c);

struct ZeroBehavior {
  HypothesisReport h_lambda1;
  HypothesisReport h1;
  ZeroClass cls = ZeroClass::neither;
};

/// (H_lambda1) and (H_1) from f/s^(p-1) on s_k = s_base rho^-k.
ZeroBehavior check_behavior_at_zero(const SourceF& f, double p, double lambda1,
                                    const TrendOptions& opt = {});

struct MonotoneReports {
  HypothesisReport h_m;
  HypothesisReport h_inf;
  HypothesisReport h_m_prime;
};

/// (H_m), (H_inf) and (H_m)'. (H_m)' is inconclusive when f has no derivative.
MonotoneReports check_monotone_and_superlinear(const NonlinearityG& g, const SourceF& f,
                                               double p, const TrendOptions& opt = {});

/// (H_2) as a sampled assertion: inf_s f/s^(p-1) > 0 at some sample point.
/// Both eigenvalues are recorded in the report; neither enters the verdict.
HypothesisReport check_h2(const SourceF& f, double p, double lambda1_laplace,
                          double lambda1_plaplace, const TrendOptions& opt = {});
/// (H_3) as a sampled assertion on (0, s0].
HypothesisReport check_h3(const SourceF& f, double p, double s0 = 10.0,
                          const TrendOptions& opt = {});
/// (H_4) as a sampled positivity probe.
HypothesisReport check_h4(const SourceF& f, const TrendOptions& opt = {});

RegimeTag classify_regime(const NonlinearityG& g, const TrendOptions& opt = {});

struct RegimeReports {
  HypothesisReport sc;
  HypothesisReport ar;
  /// For g_to_zero_sg_to_c, `ar` uses the bound p - 1 + c and this report the
  /// bound p - 1; otherwise a copy of `ar`. Informational only.
  HypothesisReport ar_equivalent;
};

/// Simplified growth conditions of the regime `tag` with exponent r.
RegimeReports check_regime_conditions(const NonlinearityG& g, const SourceF& f, double p,
                                      int dim, const RegimeTag& tag, double r,
                                      const TrendOptions& opt = {});

struct CrossValidation {
  RegimeTag tag;
  std::vector<HypothesisReport> general;  ///< H_SC, H_AR_prime
  std::vector<HypothesisReport> regime;   ///< regime_SC, regime_AR[, regime_AR_equivalent]
  /// H_SC vs regime_SC and H_AR_prime vs regime_AR.
  std::vector<std::string> disagreements;
  bool consistent() const { return disagreements.empty(); }
};

CrossValidation cross_validate(const NonlinearityG& g, const SourceF& f, double p, int dim,
                               double r, const TrendOptions& opt = {});

}  // namespace natgrad
