#include "covstein/moments.hpp"

#include <cmath>
#include <string>

#include "covstein/errors.hpp"

namespace covstein {

namespace {

// d pi_d rho^d int_{lo}^{2} (1 - rho^d omega_d(s)/n)^m s^(d-1) ds, i.e. the
// integral over the ball (or annulus) of radius 2 rho after the radial
// substitution |y| = rho s.
double radial_power_integral(const ModelParams& params, double lo, double m,
                             const QuadratureSpec& spec) {
  const int d = params.dim();
  const double n = static_cast<double>(params.n());
  const double scale = std::pow(params.rho(), d);
  const auto integrand = [&](double s) {
    const double radial = d == 1 ? 1.0 : std::pow(s, d - 1);
    return power_one_minus(scale * omega(d, s, spec), n, m) * radial;
  };
  return d * unit_ball_volume(d) * scale * integrate(integrand, lo, 2.0, spec).value;
}

double check_variance(double value, double n, const char* name) {
  if (!std::isfinite(value) || value < -1e-6 * n) {
    throw NumericalError(std::string(name) +
                         ": catastrophic cancellation, result " +
                         std::to_string(value));
  }
  if (!(value > 0.0)) {
    throw NumericalError(std::string(name) + " evaluated to a nonpositive value " +
                         std::to_string(value));
  }
  return value;
}

}  // namespace

double power_one_minus(double x, double n, double m) {
  return std::exp(m * std::log1p(-x / n));
}

namespace detail {

double volume_variance_tail(double n, double phi, int d) {
  const double x = phi / n;
  const double ratio = x / (1.0 - x);
  const double a = power_one_minus(2.0 * phi, n, n);      // (1 - 2x)^n
  const double b = power_one_minus(phi, n, 2.0 * n);      // (1 - x)^(2n)
  // a / b = (1 - ratio^2)^n exactly, so a - b = b * expm1(n log1p(-ratio^2)).
  const double a_minus_b = b * std::expm1(n * std::log1p(-ratio * ratio));
  return n * n * a_minus_b - n * std::ldexp(phi, d) * a;
}

double isolated_variance_tail(double n, double phi, int d) {
  const double x = phi / n;
  const double ratio = x / (1.0 - x);
  const double a = power_one_minus(2.0 * phi, n, n - 2.0);     // (1 - 2x)^(n-2)
  const double b = power_one_minus(phi, n, 2.0 * n - 2.0);     // (1 - x)^(2n-2)
  const double log_ratio =
      (n - 2.0) * std::log1p(-ratio * ratio) - 2.0 * std::log1p(-x);
  const double a_minus_b = b * std::expm1(log_ratio);
  return n * (n - 1.0) * a_minus_b - (n - 1.0) * std::ldexp(phi, d) * a;
}

}  // namespace detail

double mean_V(const ModelParams& params) {
  params.require_mean_formulas();
  const double n = static_cast<double>(params.n());
  return -n * std::expm1(n * std::log1p(-params.phi() / n));
}

double mean_S(const ModelParams& params) {
  params.require_mean_formulas();
  const double n = static_cast<double>(params.n());
  return n * power_one_minus(params.phi(), n, n - 1.0);
}

double variance_V(const ModelParams& params, const QuadratureSpec& spec) {
  params.require_variance_formulas();
  const double n = static_cast<double>(params.n());
  const double ball = n * radial_power_integral(params, 0.0, n, spec);
  const double tail =
      detail::volume_variance_tail(n, params.phi(), params.dim());
  return check_variance(ball + tail, n, "variance_V");
}

double variance_S(const ModelParams& params, const QuadratureSpec& spec) {
  params.require_variance_formulas();
  const double n = static_cast<double>(params.n());
  const double phi = params.phi();
  const double log_q = (n - 1.0) * std::log1p(-phi / n);
  const double single = n * std::exp(log_q) * -std::expm1(log_q);
  const double annulus =
      (n - 1.0) * radial_power_integral(params, 1.0, n - 2.0, spec);
  const double tail = detail::isolated_variance_tail(n, phi, params.dim());
  return check_variance(single + annulus + tail, n, "variance_S");
}

MomentSet compute_moments(const ModelParams& params, const QuadratureSpec& spec) {
  params.require_variance_formulas();
  return MomentSet{params,
                   mean_V(params),
                   mean_S(params),
                   variance_V(params, spec),
                   variance_S(params, spec),
                   params.validity()};
}

}  // namespace covstein
