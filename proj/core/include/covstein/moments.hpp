#pragma once

// Exact finite-n means and variances of the covered volume V and the
// isolated-point count S.

#include "covstein/analytic.hpp"
#include "covstein/geometry.hpp"

namespace covstein {

struct MomentSet {
  ModelParams params;
  double mu_V = 0.0;
  double mu_S = 0.0;
  double var_V = 0.0;
  double var_S = 0.0;
  Validity validity;
};

/// n (1 - (1 - phi/n)^n). Requires 2 rho < n^(1/d).
double mean_V(const ModelParams& params);

/// n (1 - phi/n)^(n-1). Requires 2 rho < n^(1/d).
double mean_S(const ModelParams& params);

/// Exact Var(V). Requires 4 rho < n^(1/d).
double variance_V(const ModelParams& params, const QuadratureSpec& spec = {});

/// Exact Var(S). Requires 4 rho < n^(1/d).
double variance_S(const ModelParams& params, const QuadratureSpec& spec = {});

/// All four moments; requires the variance formulas to be valid.
MomentSet compute_moments(const ModelParams& params,
                          const QuadratureSpec& spec = {});

/// (1 - x/n)^m evaluated as exp(m log1p(-x/n)).
double power_one_minus(double x, double n, double m);

namespace detail {

/// n (n - 2^d phi)(1 - 2phi/n)^n - n^2 (1 - phi/n)^(2n), computed without
/// differencing the two O(n^2) terms.
double volume_variance_tail(double n, double phi, int d);

/// n (n-1) ((1 - 2^d phi/n)(1 - 2phi/n)^(n-2) - (1 - phi/n)^(2n-2)), same
/// treatment.
double isolated_variance_tail(double n, double phi, int d);

}  // namespace detail

}  // namespace covstein
