#include "covstein/analytic.hpp"

#include <gsl/gsl_errno.h>
#include <gsl/gsl_integration.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <memory>
#include <mutex>
#include <numbers>
#include <string>

#include "covstein/errors.hpp"

namespace covstein {

namespace {

void disable_gsl_abort() {
  static std::once_flag once;
  std::call_once(once, [] { gsl_set_error_handler_off(); });
}

struct WorkspaceDeleter {
  void operator()(gsl_integration_workspace* w) const {
    gsl_integration_workspace_free(w);
  }
};

double trampoline(double x, void* params) {
  return (*static_cast<const std::function<double(double)>*>(params))(x);
}

void require_dimension(int d) {
  if (d < 1) {
    throw DomainError("dimension must be >= 1, got " + std::to_string(d));
  }
}

}  // namespace

void QuadratureSpec::validate() const {
  if (!(absolute_tolerance > 0.0) || !(relative_tolerance > 0.0)) {
    throw DomainError("quadrature tolerances must be strictly positive");
  }
  if (max_subdivisions < 1) {
    throw DomainError("max_subdivisions must be >= 1");
  }
}

QuadratureResult integrate(const std::function<double(double)>& f, double a,
                           double b, const QuadratureSpec& spec) {
  spec.validate();
  if (a == b) return {};
  disable_gsl_abort();

  const auto limit = static_cast<std::size_t>(spec.max_subdivisions);
  std::unique_ptr<gsl_integration_workspace, WorkspaceDeleter> ws(
      gsl_integration_workspace_alloc(limit));
  if (!ws) throw NumericalError("cannot allocate quadrature workspace");

  gsl_function fn;
  fn.function = &trampoline;
  fn.params = const_cast<std::function<double(double)>*>(&f);

  QuadratureResult out;
  const int status =
      gsl_integration_qags(&fn, a, b, spec.absolute_tolerance,
                           spec.relative_tolerance, limit, ws.get(),
                           &out.value, &out.abs_error);
  out.subdivisions = static_cast<int>(ws->size);

  const double target = std::max(spec.absolute_tolerance,
                                 spec.relative_tolerance * std::abs(out.value));
  // GSL_EROUND means roundoff prevented reaching the tolerance; the estimate
  // is still usable when the reported error is at the target scale.
  if (status != GSL_SUCCESS &&
      !(status == GSL_EROUND && out.abs_error <= 100.0 * target)) {
    char detail[64];
    std::snprintf(detail, sizeof detail, ", achieved error %.3g, target %.3g",
                  out.abs_error, target);
    throw NumericalError(std::string("quadrature did not converge: ") +
                             gsl_strerror(status) + detail,
                         out.abs_error);
  }
  if (!std::isfinite(out.value)) {
    throw NumericalError("quadrature produced a non-finite value",
                         out.abs_error);
  }
  return out;
}

double unit_ball_volume(int d) {
  require_dimension(d);
  const double half = 0.5 * d;
  return std::exp(half * std::log(std::numbers::pi) - std::lgamma(1.0 + half));
}

double omega(int d, double u, const QuadratureSpec& spec) {
  require_dimension(d);
  if (!(u >= 0.0 && u <= 2.0)) {
    throw DomainError("omega: center distance must lie in [0, 2]");
  }
  if (d == 1) return 2.0 + u;
  const double ball = unit_ball_volume(d);
  if (u == 0.0) return ball;
  const double exponent = 0.5 * (d - 1);
  // Cross-sections of the lens; the integrand has a square-root type
  // endpoint singularity at t = 2 for even d.
  const auto section = [exponent](double t) {
    const double s = 1.0 - 0.25 * t * t;
    return s <= 0.0 ? 0.0 : std::pow(s, exponent);
  };
  return ball + unit_ball_volume(d - 1) * integrate(section, 0.0, u, spec).value;
}

double integral_J(double r, int d, double rho, const QuadratureSpec& spec) {
  require_dimension(d);
  if (!(r >= 0.0 && r <= 2.0)) {
    throw DomainError("integral_J: r must lie in [0, 2]");
  }
  if (!(rho >= 0.0) || !std::isfinite(rho)) {
    throw DomainError("integral_J: rho must be finite and >= 0");
  }
  if (r == 0.0) return 0.0;
  const double scale = std::pow(rho, d);
  const auto integrand = [&](double t) {
    const double radial = d == 1 ? 1.0 : std::pow(t, d - 1);
    if (scale == 0.0) return radial;
    return std::exp(-scale * omega(d, t, spec)) * radial;
  };
  return d * unit_ball_volume(d) * integrate(integrand, 0.0, r, spec).value;
}

double g_V(double rho, int d, const QuadratureSpec& spec) {
  if (!(rho > 0.0)) throw DomainError("g_V: rho must be > 0");
  const double scale = std::pow(rho, d);
  const double phi = unit_ball_volume(d) * scale;
  const double value = scale * integral_J(2.0, d, rho, spec) -
                       (std::ldexp(phi, d) + phi * phi) * std::exp(-2.0 * phi);
  if (!(value > 0.0)) {
    throw NumericalError("g_V evaluated to a nonpositive value " +
                         std::to_string(value));
  }
  return value;
}

double g_S(double rho, int d, const QuadratureSpec& spec) {
  if (!(rho > 0.0)) throw DomainError("g_S: rho must be > 0");
  const double scale = std::pow(rho, d);
  const double phi = unit_ball_volume(d) * scale;
  const double annulus =
      integral_J(2.0, d, rho, spec) - integral_J(1.0, d, rho, spec);
  const double value =
      std::exp(-phi) -
      (1.0 + (std::ldexp(1.0, d) - 2.0) * phi + phi * phi) *
          std::exp(-2.0 * phi) +
      scale * annulus;
  if (!(value > 0.0)) {
    throw NumericalError("g_S evaluated to a nonpositive value " +
                         std::to_string(value));
  }
  return value;
}

double std_normal_cdf(double t) {
  return 0.5 * std::erfc(-t / std::numbers::sqrt2);
}

double std_normal_pdf(double t) {
  return std::exp(-0.5 * t * t) / std::sqrt(2.0 * std::numbers::pi);
}

}  // namespace covstein
