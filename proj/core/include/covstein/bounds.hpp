#pragma once

// Berry-Esseen constants for V and S: the eta functions and their limits,
// the generic size-bias Kolmogorov bound, the finite-n bounds, the
// asymptotic bounds delta_V / delta_S and the lower bounds for S.

#include <optional>

#include "covstein/analytic.hpp"
#include "covstein/geometry.hpp"
#include "covstein/moments.hpp"

namespace covstein {

/// kappa: the largest number of pairwise disjoint closed unit balls that all
/// intersect a closed unit ball at the origin. kappa_plus = kappa + 1.
struct KissingConstants {
  int kappa;
  int kappa_plus;
};

/// Known for d <= 3; throws UnsupportedDimension otherwise.
KissingConstants kissing_constants(int d);

/// Requires n > 6^d phi.
double eta_V(const ModelParams& params);

/// Requires n > max(3^d, 2^(d+1) + 1) phi and d <= 3.
double eta_S(const ModelParams& params);

/// n -> infinity limits of eta_V / eta_S at fixed rho.
double eta_V_limit(double rho, int d);
double eta_S_limit(double rho, int d);

/// Kolmogorov-distance bound for a nonnegative Y with mean mu, variance
/// sigma2, a size-biased coupling with |Y^s - Y| <= B, and
/// Delta = SD(E[Y^s - Y | Y]):
///   (mu / (5 sigma^2)) (sqrt(11 B^2 / sigma + 5 Delta) + 2 B / sqrt(sigma))^2
double size_bias_ks_bound(double mu, double sigma2, double B, double Delta);

/// Finite-n bound on D_V; moments must be for the same params.
double theorem_bound_V(const ModelParams& params, const MomentSet& moments);

/// Finite-n bound on D_S. The coupling size-biases W = n - S, so the mean
/// entering the generic bound is n - mu_S.
double theorem_bound_S(const ModelParams& params, const MomentSet& moments);

/// Asymptotic bounds on limsup sqrt(n) D_V and limsup sqrt(n) D_S.
double delta_V(double rho, int d, const QuadratureSpec& spec = {});
double delta_S(double rho, int d, const QuadratureSpec& spec = {});

/// (8 pi g_S(rho))^(-1/2), the asymptotic lower bound on sqrt(n) D_S.
double lower_bound_S(double rho, int d, const QuadratureSpec& spec = {});

/// (1/2) sigma_S^(-1) f_Z(sigma_S^(-1)): the finite-n lower bound on D_S
/// with the slack epsilon taken to 0.
double finite_n_lower_bound_S(const ModelParams& params, const MomentSet& moments);

struct BoundReport {
  ModelParams params;
  std::optional<double> eta_V{};
  std::optional<double> eta_S{};
  std::optional<double> D_V_bound{};
  std::optional<double> D_S_bound{};
  std::optional<double> D_S_finite_lower{};
  double eta_V_limit = 0.0;
  std::optional<double> eta_S_limit{};
  double delta_V = 0.0;
  std::optional<double> delta_S{};
  double lower_S = 0.0;
};

/// Everything that applies to params. Entries whose validity condition fails
/// are left empty; the asymptotic entries depend only on (d, rho).
BoundReport make_bound_report(const ModelParams& params,
                              const QuadratureSpec& spec = {});

}  // namespace covstein
