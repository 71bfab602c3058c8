#include "natgrad/nonlinearity.hpp"

#include <cmath>
#include <limits>
#include <sstream>

#include "natgrad/errors.hpp"

namespace natgrad {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

std::vector<double> probe_points(double lo, double hi, int count) {
  std::vector<double> pts{0.0};
  const double ratio = std::pow(hi / lo, 1.0 / (count - 1));
  double s = lo;
  for (int i = 0; i < count; ++i, s *= ratio) pts.push_back(s);
  return pts;
}

double log_sum_exp(const std::vector<double>& logs) {
  double mx = -kInf;
  for (double l : logs) mx = std::max(mx, l);
  if (!std::isfinite(mx)) return mx;
  double acc = 0.0;
  for (double l : logs) acc += std::exp(l - mx);
  return mx + std::log(acc);
}

}  // namespace

double SourceF::log_value(double x, double s) const {
  if (log_eval) return log_eval(x, s);
  return std::log(eval(x, s));
}

double SourceF::log_derivative(double x, double s) const {
  if (log_deriv) return log_deriv(x, s);
  if (!deriv_s) throw ParameterError("source '" + label + "' has no s-derivative");
  return deriv_s(x, s) / eval(x, s);
}

double SourceF::derivative(double x, double s) const {
  if (deriv_s) return deriv_s(x, s);
  if (log_deriv) return log_deriv(x, s) * eval(x, s);
  throw ParameterError("source '" + label + "' has no s-derivative");
}

std::vector<double> SourceF::sample_points() const {
  if (x_samples.empty()) return {0.0};
  return x_samples;
}

NonlinearityG make_g(std::function<double(double)> eval, std::function<double(double)> deriv,
                     std::string label) {
  NonlinearityG g{std::move(eval), std::move(deriv), std::move(label)};
  for (double s : probe_points(1e-6, 1e4, 60)) {
    const double v = g(s);
    if (!(v >= 0.0)) {
      std::ostringstream os;
      os << "(H_g) violated: g(" << s << ") = " << v << " for '" << g.label
         << "' (g must map [0,inf) into [0,inf))";
      throw ConstraintError(os.str());
    }
    if (g.has_deriv() && s >= 1e-2 && s < 1e3) {
      const double d = 1e-5 * (1.0 + s);
      const double fd = (g(s + d) - g(std::max(0.0, s - d))) / (s + d - std::max(0.0, s - d));
      const double an = g.deriv(s);
      if (std::abs(fd - an) > 1e-4 * (1.0 + std::abs(an) + std::abs(g(s)))) {
        std::ostringstream os;
        os << "g' for '" << g.label << "' disagrees with finite differences at s = " << s
           << " (" << an << " vs " << fd << ")";
        throw ConstraintError(os.str());
      }
    }
  }
  return g;
}

SourceF make_f(SourceF f) {
  for (double x : f.sample_points()) {
    for (double s : probe_points(1e-6, 1e3, 50)) {
      const double v = f(x, s);
      if (std::isnan(v) || v < 0.0) {
        std::ostringstream os;
        os << "(H_f) violated: f(" << x << ", " << s << ") = " << v << " for '" << f.label
           << "' (f must be nonnegative)";
        throw ConstraintError(os.str());
      }
      if (s <= 10.0 && !std::isfinite(v)) {
        std::ostringstream os;
        os << "(H_f) violated: f(" << x << ", " << s << ") is unbounded for '" << f.label << "'";
        throw ConstraintError(os.str());
      }
    }
  }
  return f;
}

namespace builtin {

NonlinearityG g_zero() {
  return make_g([](double) { return 0.0; }, [](double) { return 0.0; }, "0");
}

NonlinearityG g_constant(double c) {
  std::ostringstream os;
  os << c;
  return make_g([c](double) { return c; }, [](double) { return 0.0; }, os.str());
}

NonlinearityG g_power_decay(double c, double alpha) {
  std::ostringstream os;
  os << c << "(1+s)^-" << alpha;
  return make_g([c, alpha](double s) { return c * std::pow(1.0 + s, -alpha); },
                [c, alpha](double s) { return -alpha * c * std::pow(1.0 + s, -alpha - 1.0); },
                os.str());
}

NonlinearityG g_power(double q) {
  std::ostringstream os;
  os << "s^" << q;
  return make_g([q](double s) { return std::pow(s, q); },
                [q](double s) { return s > 0.0 ? q * std::pow(s, q - 1.0) : (q == 1.0 ? 1.0 : (q > 1.0 ? 0.0 : kInf)); },
                os.str());
}

NonlinearityG g_shifted_ratio(double p) {
  std::ostringstream os;
  os << (p - 1.0) << "/(1+s)";
  return make_g([p](double s) { return (p - 1.0) / (1.0 + s); },
                [p](double s) { return -(p - 1.0) / ((1.0 + s) * (1.0 + s)); }, os.str());
}

NonlinearityG g_affine_ratio(double p) {
  std::ostringstream os;
  os << (p - 1.0) << "(s+2)/(s+1)";
  return make_g([p](double s) { return (p - 1.0) * (s + 2.0) / (s + 1.0); },
                [p](double s) { return -(p - 1.0) / ((1.0 + s) * (1.0 + s)); }, os.str());
}

SourceF f_zero() {
  SourceF f;
  f.eval = [](double, double) { return 0.0; };
  f.deriv_s = [](double, double) { return 0.0; };
  f.log_eval = [](double, double) { return -kInf; };
  f.primitive = [](double, double) { return 0.0; };
  f.label = "0";
  return make_f(std::move(f));
}

SourceF f_power(double r, double mu) {
  if (mu < 0.0) throw ConstraintError("f_power: mu must be nonnegative");
  SourceF f;
  f.eval = [r, mu](double, double s) { return mu * std::pow(s, r - 1.0); };
  f.deriv_s = [r, mu](double, double s) {
    if (r == 2.0) return mu;
    if (r == 1.0) return 0.0;
    return mu * (r - 1.0) * std::pow(s, r - 2.0);
  };
  f.log_eval = [r, mu](double, double s) { return std::log(mu) + (r - 1.0) * std::log(s); };
  f.log_deriv = [r](double, double s) { return (r - 1.0) / s; };
  f.primitive = [r, mu](double, double s) { return mu * std::pow(s, r) / r; };
  std::ostringstream os;
  os << mu << "*s^" << (r - 1.0);
  f.label = os.str();
  return make_f(std::move(f));
}

SourceF f_power_exp(double q, double c2, double mu, double gamma) {
  if (mu < 0.0) throw ConstraintError("f_power_exp: mu must be nonnegative");
  SourceF f;
  f.eval = [=](double, double s) {
    const double e = c2 * std::pow(s, gamma);
    return q == 0.0 ? mu * std::exp(e) : mu * std::pow(s, q) * std::exp(e);
  };
  f.deriv_s = [=](double, double s) {
    const double e = std::exp(c2 * std::pow(s, gamma));
    double d = 0.0;
    if (q != 0.0) d += q * std::pow(s, q - 1.0);
    d += c2 * gamma * std::pow(s, q + gamma - 1.0);
    return mu * e * d;
  };
  f.log_eval = [=](double, double s) {
    return std::log(mu) + (q == 0.0 ? 0.0 : q * std::log(s)) + c2 * std::pow(s, gamma);
  };
  f.log_deriv = [=](double, double s) {
    return (q == 0.0 ? 0.0 : q / s) + c2 * gamma * std::pow(s, gamma - 1.0);
  };
  std::ostringstream os;
  os << mu << "*s^" << q << "*exp(" << c2 << "*s^" << gamma << ")";
  f.label = os.str();
  return make_f(std::move(f));
}

SourceF f_log_power(double r, double mu) {
  SourceF f;
  f.eval = [r, mu](double, double s) { return mu * std::pow(std::log1p(s), r - 1.0); };
  f.deriv_s = [r, mu](double, double s) {
    return mu * (r - 1.0) * std::pow(std::log1p(s), r - 2.0) / (1.0 + s);
  };
  f.log_eval = [r, mu](double, double s) {
    return std::log(mu) + (r - 1.0) * std::log(std::log1p(s));
  };
  f.log_deriv = [r](double, double s) { return (r - 1.0) / ((1.0 + s) * std::log1p(s)); };
  std::ostringstream os;
  os << mu << "*log(1+s)^" << (r - 1.0);
  f.label = os.str();
  return make_f(std::move(f));
}

SourceF f_power_log(double k, double q, double mu) {
  SourceF f;
  f.eval = [=](double, double s) { return mu * std::pow(s, k) * std::pow(std::log1p(s), q); };
  f.deriv_s = [=](double, double s) {
    if (s <= 0.0) return k + q > 1.0 ? 0.0 : (k + q == 1.0 ? mu : kInf);
    const double l = std::log1p(s);
    return mu * (k * std::pow(s, k - 1.0) * std::pow(l, q) +
                 q * std::pow(s, k) * std::pow(l, q - 1.0) / (1.0 + s));
  };
  f.log_eval = [=](double, double s) {
    return std::log(mu) + k * std::log(s) + q * std::log(std::log1p(s));
  };
  f.log_deriv = [=](double, double s) { return k / s + q / ((1.0 + s) * std::log1p(s)); };
  std::ostringstream os;
  os << mu << "*s^" << k << "*log(1+s)^" << q;
  f.label = os.str();
  return make_f(std::move(f));
}

SourceF f_sum(std::vector<SourceF> terms) {
  if (terms.empty()) throw ParameterError("f_sum needs at least one term");
  SourceF f;
  std::string label;
  for (std::size_t i = 0; i < terms.size(); ++i) {
    if (i) label += " + ";
    label += terms[i].label;
  }
  f.label = label;
  f.eval = [terms](double x, double s) {
    double acc = 0.0;
    for (const auto& t : terms) acc += t(x, s);
    return acc;
  };
  bool all_deriv = true;
  for (const auto& t : terms) all_deriv = all_deriv && t.has_deriv();
  if (all_deriv) {
    f.deriv_s = [terms](double x, double s) {
      double acc = 0.0;
      for (const auto& t : terms) acc += t.derivative(x, s);
      return acc;
    };
    f.log_deriv = [terms](double x, double s) {
      std::vector<double> logs;
      for (const auto& t : terms) logs.push_back(t.log_value(x, s));
      const double total = log_sum_exp(logs);
      double acc = 0.0;
      for (std::size_t i = 0; i < terms.size(); ++i) {
        if (std::isfinite(logs[i])) acc += std::exp(logs[i] - total) * terms[i].log_derivative(x, s);
      }
      return acc;
    };
  }
  f.log_eval = [terms](double x, double s) {
    std::vector<double> logs;
    for (const auto& t : terms) logs.push_back(t.log_value(x, s));
    return log_sum_exp(logs);
  };
  bool all_primitive = true;
  for (const auto& t : terms) all_primitive = all_primitive && static_cast<bool>(t.primitive);
  if (all_primitive) {
    f.primitive = [terms](double x, double s) {
      double acc = 0.0;
      for (const auto& t : terms) acc += t.primitive(x, s);
      return acc;
    };
  }
  return make_f(std::move(f));
}

}  // namespace builtin

namespace {

double req(const nlohmann::json& j, const char* key) {
  if (!j.contains(key) || !j.at(key).is_number()) {
    throw ParameterError(std::string("missing numeric field '") + key + "' in " + j.dump());
  }
  return j.at(key).get<double>();
}

double opt(const nlohmann::json& j, const char* key, double fallback) {
  return j.contains(key) ? j.at(key).get<double>() : fallback;
}

}  // namespace

NonlinearityG g_from_json(const nlohmann::json& j, double p) {
  const std::string kind = j.at("kind").get<std::string>();
  if (kind == "zero") return builtin::g_zero();
  if (kind == "constant") return builtin::g_constant(req(j, "C"));
  if (kind == "power_decay") return builtin::g_power_decay(req(j, "C"), req(j, "alpha"));
  if (kind == "power") return builtin::g_power(req(j, "q"));
  if (kind == "shifted_ratio") return builtin::g_shifted_ratio(p);
  if (kind == "affine_ratio") return builtin::g_affine_ratio(p);
  throw ParameterError("unknown g kind '" + kind + "'");
}

SourceF f_from_json(const nlohmann::json& j, double p) {
  const std::string kind = j.at("kind").get<std::string>();
  const double mu = opt(j, "mu", 1.0);
  if (kind == "zero") return builtin::f_zero();
  if (kind == "power") return builtin::f_power(req(j, "r"), mu);
  if (kind == "linear") return builtin::f_power(p, mu);
  if (kind == "power_exp") {
    return builtin::f_power_exp(req(j, "q"), req(j, "C2"), mu, opt(j, "gamma", 1.0));
  }
  if (kind == "log_power") return builtin::f_log_power(req(j, "r"), mu);
  if (kind == "power_log") return builtin::f_power_log(opt(j, "k", p - 1.0), req(j, "q"), mu);
  if (kind == "sum") {
    std::vector<SourceF> terms;
    for (const auto& t : j.at("terms")) terms.push_back(f_from_json(t, p));
    return builtin::f_sum(std::move(terms));
  }
  throw ParameterError("unknown f kind '" + kind + "'");
}

}  // namespace natgrad
