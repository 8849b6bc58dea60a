#pragma once

// Covered volume V and isolated-point count S of a configuration, and
// batches of independent replicates.

#include <cstdint>
#include <iosfwd>
#include <vector>

#include "covstein/geometry.hpp"

namespace covstein {

enum class VolumeMode { exact_1d, exact_2d, monte_carlo };

struct VolumeMethod {
  VolumeMode mode = VolumeMode::exact_1d;
  std::uint64_t mc_samples = 0;  // monte_carlo only
  std::uint64_t mc_seed = 0;     // monte_carlo only
  // exact_2d only: cross-check against a 10^5-sample estimate and throw
  // NumericalError when the two differ by more than 6 standard errors.
  bool self_check = false;

  static VolumeMethod exact_1d() { return {VolumeMode::exact_1d}; }
  static VolumeMethod exact_2d() { return {VolumeMode::exact_2d}; }
  static VolumeMethod monte_carlo(std::uint64_t samples, std::uint64_t seed = 0) {
    return {VolumeMode::monte_carlo, samples, seed};
  }
  /// Exact for d <= 2, 10^6-sample Monte Carlo otherwise.
  static VolumeMethod automatic(int d);

  /// Throws DomainError if the mode does not fit dimension d.
  void validate(int d) const;
};

struct VolumeEstimate {
  double value = 0.0;
  double std_error = 0.0;  // zero for the exact modes
};

/// Volume of the union of closed rho-balls around the configuration points.
/// Exact modes require 2 rho < side and rho <= config.index_radius().
/// The Monte Carlo estimate stratifies the first coordinate; its std_error is
/// the (conservative) binomial value.
VolumeEstimate covered_volume(const PointConfiguration& config, double rho,
                              const VolumeMethod& method);

/// Points with no other point within closed distance rho.
std::int64_t isolated_count(const PointConfiguration& config, double rho);

/// Points with at least one other point within closed distance rho.
std::int64_t nonisolated_count(const PointConfiguration& config, double rho);

struct ReplicateBatch {
  ModelParams params;
  std::uint64_t seed = 0;
  std::vector<double> samples_V{};
  std::vector<std::int64_t> samples_S{};

  std::size_t size() const noexcept { return samples_S.size(); }

  /// Header `replicate,V,S`; V with 17 significant digits.
  void write_csv(std::ostream& out) const;
};

/// Seed of the configuration used for replicate r of a run seeded with seed.
std::uint64_t replicate_seed(std::uint64_t seed, std::uint64_t r) noexcept;

/// R independent replicates; identical output for every parallelism level.
ReplicateBatch run_replicates(const ModelParams& params, std::int64_t R,
                              std::uint64_t seed, const VolumeMethod& method,
                              unsigned parallelism);

namespace detail {

// Building blocks exposed for testing.
double union_length_on_circle(std::vector<double> centers, double rho,
                              double circumference);
double disk_union_area_2d(const PointConfiguration& config, double rho);
VolumeEstimate monte_carlo_volume(const PointConfiguration& config, double rho,
                                  std::uint64_t samples, std::uint64_t seed);

}  // namespace detail

}  // namespace covstein
