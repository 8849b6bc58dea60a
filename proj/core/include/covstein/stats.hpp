#pragma once

// Kolmogorov distance to the standard normal and the Berry-Esseen sandwich test.

#include <cstdint>
#include <optional>
#include <span>

#include "covstein/analytic.hpp"
#include "covstein/geometry.hpp"
#include "covstein/simulate.hpp"

namespace covstein {

struct KolmogorovResult {
  double statistic = 0.0;    // in [0, 1]
  std::int64_t sample_size = 0;
  double dkw_band = 0.0;     // 95% DKW half-width, sqrt(ln(40) / (2 R))
};

/// 95% Dvoretzky-Kiefer-Wolfowitz half-width for R samples.
double dkw_band(std::int64_t R);

/// sup_t |F_R(t) - Phi(t)| for the samples standardized by the supplied
/// (mu, sigma). Ties are handled: the empirical CDF jumps once per distinct
/// value. Requires >= 2 samples and sigma > 0.
KolmogorovResult ks_distance(std::span<const double> samples, double mu, double sigma);

enum class Statistic { V, S };

struct SandwichReport {
  Statistic which = Statistic::V;
  ModelParams params;
  std::int64_t replicates = 0;
  double D_empirical = 0.0;
  double dkw_band = 0.0;
  std::optional<double> upper_bound{};  // theorem bound, when its condition holds
  std::optional<double> lower_bound{};  // S only: finite-n lower bound
  double lower_factor = 0.8;
  bool pass_upper = true;
  bool pass_lower = true;
  bool inconclusive = false;  // dkw band >= 1
};

/// Empirical D of a batch against the exact moments, checked against
///   lower (S only):  D >= lower_factor * finite_n_lower_bound_S - dkw
///   upper:           D <= theorem bound + dkw.
/// Throws DomainError if the batch was generated for other parameters and
/// ValidityError if the variance formulas do not apply.
SandwichReport sandwich_test(const ModelParams& params, const ReplicateBatch& batch,
                             Statistic which, double lower_factor = 0.8,
                             const QuadratureSpec& spec = {});

/// Empirical check of E[Y'] = E[Y^2] / E[Y]. With `paired` the two samples
/// come from the same draws and the standard error accounts for their
/// correlation (delta method on the joint mean); otherwise they are treated
/// as independent.
struct SizeBiasCheck {
  double mean_y = 0.0;
  double mean_y_prime = 0.0;
  double size_biased_mean = 0.0;  // mean(y^2) / mean(y)
  double std_error = 0.0;         // of mean_y_prime - size_biased_mean
  double z = 0.0;
};

SizeBiasCheck size_bias_check(std::span<const double> y,
                              std::span<const double> y_prime, bool paired);

const char* to_string(Statistic s) noexcept;

}  // namespace covstein
