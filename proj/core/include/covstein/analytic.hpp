#pragma once

// Special functions and radial quadrature for the germ-grain model:
// unit-ball volumes, the two-ball union volume omega_d, the J integral,
// the limiting variance functions g_V / g_S and the standard normal law.

#include <functional>

namespace covstein {

struct QuadratureSpec {
  double absolute_tolerance = 1e-12;
  double relative_tolerance = 1e-12;
  int max_subdivisions = 2000;

  /// Throws DomainError if a tolerance is not strictly positive or
  /// max_subdivisions < 1.
  void validate() const;
};

struct QuadratureResult {
  double value = 0.0;
  double abs_error = 0.0;
  int subdivisions = 0;
};

/// Globally adaptive Gauss-Kronrod quadrature on [a, b] with endpoint
/// singularity handling. Throws NumericalError (carrying the achieved error)
/// when the tolerance is not met within spec.max_subdivisions.
QuadratureResult integrate(const std::function<double(double)>& f, double a,
                           double b, const QuadratureSpec& spec = {});

/// pi^(d/2) / Gamma(1 + d/2).
double unit_ball_volume(int d);

/// Volume of the union of two unit d-balls whose centers are u apart,
/// 0 <= u <= 2.
double omega(int d, double u, const QuadratureSpec& spec = {});

/// d * pi_d * int_0^r exp(-rho^d omega_d(t)) t^(d-1) dt, for r in [0, 2].
/// rho = 0 is accepted (the integrand is then t^(d-1)).
double integral_J(double r, int d, double rho, const QuadratureSpec& spec = {});

/// Limiting value of Var(V)/n.
double g_V(double rho, int d, const QuadratureSpec& spec = {});

/// Limiting value of Var(S)/n.
double g_S(double rho, int d, const QuadratureSpec& spec = {});

double std_normal_cdf(double t);
double std_normal_pdf(double t);

}  // namespace covstein
