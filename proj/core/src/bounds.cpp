#include "covstein/bounds.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "covstein/errors.hpp"

namespace covstein {

namespace {

double ipow(double base, int e) {
  double r = 1.0;
  for (int i = 0; i < e; ++i) r *= base;
  return r;
}

// (2n - c phi) / (n - c phi); tends to 2 as n grows.
double crowding_ratio(double n, double c, double phi) {
  return (2.0 * n - c * phi) / (n - c * phi);
}

// Rational factors of eta_V that depend on n, gathered so the finite-n value
// and the limit share one transcription.
struct EtaVFactors {
  double ratio_six;    // (2n - 6^d phi) / (n - 6^d phi)
  double ratio_three;  // (2n - 3(2^d) phi) / (n - 3(2^d) phi)
  double tail;         // 4 + 2/n
};

double eta_V_formula(double phi, int d, const EtaVFactors& f) {
  const double p3 = ipow(3.0, d);
  const double p6 = ipow(6.0, d);
  const double p2 = ipow(2.0, d);
  const double p4 = ipow(4.0, d);
  const double phi2 = phi * phi;

  const double outer = (p3 + 1.0) * phi + 1.0;
  const double first = 2.0 * phi2 * outer * outer *
                       (1.0 + (p2 + 1.0) * p6 * phi + f.ratio_six * p6 * p6 * phi2);
  const double second =
      2.0 * phi2 * phi2 *
      (3.0 * (p4 + p2) * phi + 3.0 * p4 * phi2 * f.ratio_three + f.tail);
  return first + second;
}

struct EtaSFactors {
  double ratio_three;  // (2n - 3^d phi) / (n - 3^d phi)
  double ratio_pair;   // (2n - (2^(d+1)+1) phi) / (n - (2^(d+1)+1) phi)
  double tail;         // (4n - 2) / (n - 1)
};

double eta_S_formula(double phi, int d, const EtaSFactors& f) {
  const auto [kappa, kappa_plus] = kissing_constants(d);
  const double p2 = ipow(2.0, d);
  const double p3 = ipow(3.0, d);
  const double p9 = ipow(9.0, d);
  const double pair = 2.0 * p2 + 1.0;  // 2^(d+1) + 1
  const double phi2 = phi * phi;

  const double spread = 1.0 + 2.0 * kappa;
  const double first = 2.0 * spread * spread *
                       (1.0 + (p2 + 1.0) * p3 * phi + f.ratio_three * p9 * phi2);
  const double kp2 = static_cast<double>(kappa_plus) * kappa_plus;
  const double second =
      0.5 * kp2 *
      ((p2 + 2.0 * p3 + 3.0) * phi + pair * f.ratio_pair * phi2 + f.tail);
  return first + second;
}

double asymptotic_bound(double phi, double g, double B, double eta) {
  const double lead = -std::expm1(-phi) / (5.0 * g);
  const double root =
      std::sqrt(11.0 * B * B / std::sqrt(g) + 5.0 * std::sqrt(eta)) +
      2.0 * B / std::pow(g, 0.25);
  return lead * root * root;
}

void require_same_params(const ModelParams& params, const MomentSet& m) {
  if (!(params == m.params)) {
    throw DomainError("moments were computed for different parameters");
  }
}

}  // namespace

KissingConstants kissing_constants(int d) {
  switch (d) {
    // Two disjoint closed unit intervals can each meet [-1, 1] (one on each
    // side); a third cannot.
    case 1: return {2, 3};
    case 2: return {5, 6};
    case 3: return {12, 13};
    default:
      throw UnsupportedDimension("kissing constant kappa_d is not available for d = " +
                                 std::to_string(d));
  }
}

double eta_V(const ModelParams& params) {
  params.require_theorem_V();
  const double n = static_cast<double>(params.n());
  const double phi = params.phi();
  const int d = params.dim();
  return eta_V_formula(phi, d,
                       {crowding_ratio(n, ipow(6.0, d), phi),
                        crowding_ratio(n, 3.0 * ipow(2.0, d), phi),
                        4.0 + 2.0 / n});
}

double eta_S(const ModelParams& params) {
  kissing_constants(params.dim());
  params.require_theorem_S();
  const double n = static_cast<double>(params.n());
  const double phi = params.phi();
  const int d = params.dim();
  return eta_S_formula(phi, d,
                       {crowding_ratio(n, ipow(3.0, d), phi),
                        crowding_ratio(n, 2.0 * ipow(2.0, d) + 1.0, phi),
                        (4.0 * n - 2.0) / (n - 1.0)});
}

double eta_V_limit(double rho, int d) {
  if (!(rho > 0.0)) throw DomainError("rho must be > 0");
  const double phi = unit_ball_volume(d) * std::pow(rho, d);
  return eta_V_formula(phi, d, {2.0, 2.0, 4.0});
}

double eta_S_limit(double rho, int d) {
  if (!(rho > 0.0)) throw DomainError("rho must be > 0");
  const double phi = unit_ball_volume(d) * std::pow(rho, d);
  return eta_S_formula(phi, d, {2.0, 2.0, 4.0});
}

double size_bias_ks_bound(double mu, double sigma2, double B, double Delta) {
  if (!(mu > 0.0)) throw DomainError("size_bias_ks_bound: mu must be > 0");
  if (!(sigma2 > 0.0)) throw DomainError("size_bias_ks_bound: sigma^2 must be > 0");
  if (!(B > 0.0)) throw DomainError("size_bias_ks_bound: B must be > 0");
  if (!(Delta >= 0.0)) throw DomainError("size_bias_ks_bound: Delta must be >= 0");
  const double sigma = std::sqrt(sigma2);
  const double root =
      std::sqrt(11.0 * B * B / sigma + 5.0 * Delta) + 2.0 * B / std::sqrt(sigma);
  return mu / (5.0 * sigma2) * root * root;
}

double theorem_bound_V(const ModelParams& params, const MomentSet& moments) {
  require_same_params(params, moments);
  const double n = static_cast<double>(params.n());
  const double Delta = std::sqrt(eta_V(params) / n);
  return size_bias_ks_bound(moments.mu_V, moments.var_V, params.phi(), Delta);
}

double theorem_bound_S(const ModelParams& params, const MomentSet& moments) {
  require_same_params(params, moments);
  const double n = static_cast<double>(params.n());
  const double Delta = std::sqrt(eta_S(params) / n);
  const double B = kissing_constants(params.dim()).kappa_plus;
  return size_bias_ks_bound(n - moments.mu_S, moments.var_S, B, Delta);
}

double delta_V(double rho, int d, const QuadratureSpec& spec) {
  if (!(rho > 0.0)) throw DomainError("rho must be > 0");
  if (d > kDefaultMaxDimension) {
    throw UnsupportedDimension("delta_V supports d <= " +
                               std::to_string(kDefaultMaxDimension));
  }
  const double phi = unit_ball_volume(d) * std::pow(rho, d);
  return asymptotic_bound(phi, g_V(rho, d, spec), phi, eta_V_limit(rho, d));
}

double delta_S(double rho, int d, const QuadratureSpec& spec) {
  if (!(rho > 0.0)) throw DomainError("rho must be > 0");
  const double kappa_plus = kissing_constants(d).kappa_plus;
  const double phi = unit_ball_volume(d) * std::pow(rho, d);
  return asymptotic_bound(phi, g_S(rho, d, spec), kappa_plus, eta_S_limit(rho, d));
}

double lower_bound_S(double rho, int d, const QuadratureSpec& spec) {
  return 1.0 / std::sqrt(8.0 * std::numbers::pi * g_S(rho, d, spec));
}

double finite_n_lower_bound_S(const ModelParams& params, const MomentSet& moments) {
  require_same_params(params, moments);
  params.require_variance_formulas();
  const double inv_sigma = 1.0 / std::sqrt(moments.var_S);
  return 0.5 * inv_sigma * std_normal_pdf(inv_sigma);
}

BoundReport make_bound_report(const ModelParams& params, const QuadratureSpec& spec) {
  const int d = params.dim();
  const double rho = params.rho();
  const bool s_supported = d <= 3;

  BoundReport report{.params = params};
  report.eta_V_limit = eta_V_limit(rho, d);
  report.delta_V = delta_V(rho, d, spec);
  report.lower_S = lower_bound_S(rho, d, spec);
  if (s_supported) {
    report.eta_S_limit = eta_S_limit(rho, d);
    report.delta_S = delta_S(rho, d, spec);
  }

  const Validity& v = params.validity();
  if (!v.variance_formulas) return report;
  const MomentSet moments = compute_moments(params, spec);
  report.D_S_finite_lower = finite_n_lower_bound_S(params, moments);
  if (v.theorem_V) {
    report.eta_V = eta_V(params);
    report.D_V_bound = theorem_bound_V(params, moments);
  }
  if (v.theorem_S && s_supported) {
    report.eta_S = eta_S(params);
    report.D_S_bound = theorem_bound_S(params, moments);
  }
  return report;
}

}  // namespace covstein
