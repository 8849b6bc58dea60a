#pragma once

// Size-biased couplings.
//
// Both V and W = n - S can be written as n P[A | configuration] for an event
// A = {N > 0}, where N counts configuration points in a rho-ball around an
// extra anchor point U0. Size-biasing then amounts to conditioning the
// binomial count N on being positive, which is achieved by moving at most one
// point: with probability pi_N a uniformly chosen point is moved to a uniform
// location in the anchor ball.

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <vector>

#include "covstein/geometry.hpp"
#include "covstein/rng.hpp"
#include "covstein/simulate.hpp"

namespace covstein {

/// Probability that the coupling adds a point when N = k, N ~ Bin(m, p):
///   pi_k = (P[N > k | N > 0] - P[N > k]) / (P[N = k] (1 - k/m)),  pi_m = 0.
/// Throws DomainError for k outside [0, m] or p outside (0, 1), and
/// NumericalError if the value leaves [0, 1] by more than 1e-9.
double pi_k(std::int64_t m, double p, std::int64_t k);

/// Exact check (rational arithmetic) of the stochastic ordering
///   P[N >= k] <= P[N' >= k] <= P[N'' >= k],  k = 1..m,
/// with N ~ Bin(m, p), N' ~ (N | N > 0), N'' - 1 ~ Bin(m - 1, p).
/// Requires 1 <= m <= 60.
bool dominance_check(int m, double p);

struct BinomialCouplingDraw {
  std::int64_t N = 0;
  std::int64_t M = 0;
  bool bernoulli = false;
  std::int64_t index = 0;  // I, in [0, m)
};

/// N as a sum of m Bernoulli(p) indicators, M = N + (1 - xi_I) B with
/// P[B = 1 | N] = pi_N; M has the law of N conditioned on N > 0.
BinomialCouplingDraw couple_binomial(std::int64_t m, double p, std::uint64_t seed);

enum class CouplingVariant { V, W };

struct CouplingDraw {
  CouplingVariant variant = CouplingVariant::V;
  double y = 0.0;
  double y_prime = 0.0;
  TorusPoint anchor;                      // U0
  TorusPoint target;                      // U, uniform in the anchor ball
  bool bernoulli = false;                 // B
  std::optional<std::size_t> moved_index; // I, present iff B
  std::int64_t count_before = 0;          // N: points of the base set in B_rho(U0)
  std::int64_t count_after = 0;           // same count for the coupled set
};

/// Coupled (V, V') with V' size-biased; |V' - V| <= phi.
CouplingDraw size_biased_pair_V(const ModelParams& params, std::uint64_t seed,
                                const VolumeMethod& method);

/// Coupled (W, W') for the nonisolated count W = n - S; |W' - W| <= kappa_d + 1.
CouplingDraw size_biased_pair_W(const ModelParams& params, std::uint64_t seed);

/// Uniform point of the closed ball of radius r around center, wrapped.
TorusPoint uniform_in_ball(const TorusPoint& center, double r, double side,
                           CounterRng& rng);

struct DeltaEstimate {
  CouplingVariant variant = CouplingVariant::V;
  double delta_hat = 0.0;
  double std_error = 0.0;
  bool degenerate = false;  // bias-corrected variance was negative
  double raw_variance = 0.0;
  double inner_noise = 0.0;  // mean inner variance / M
};

/// Nested Monte Carlo estimate of Delta = SD(E[Y' - Y | configuration]).
/// Conditioning on the full configuration rather than on Y can only increase
/// the variance, so this is an upper-biased estimate of the Delta in the
/// Kolmogorov bound. Requires outer >= 100 and inner >= 100.
DeltaEstimate estimate_delta(const ModelParams& params, CouplingVariant variant,
                             std::int64_t outer, std::int64_t inner,
                             std::uint64_t seed, unsigned parallelism = 1,
                             int bootstrap_resamples = 200);

/// Header `y,y_prime,bernoulli`, 17 significant digits.
void write_coupling_csv(const std::vector<CouplingDraw>& draws, std::ostream& out);

const char* to_string(CouplingVariant v) noexcept;

}  // namespace covstein
