#include "covstein/coupling.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ostream>
#include <string>

#include <boost/multiprecision/cpp_int.hpp>

#include "covstein/bounds.hpp"
#include "covstein/errors.hpp"
#include "covstein/parallel.hpp"
#include "covstein/rng.hpp"

namespace covstein {

namespace {

constexpr double kClampSlack = 1e-9;

double log_binomial_pmf(std::int64_t m, std::int64_t k, double log_p, double log_q) {
  const double md = static_cast<double>(m);
  const double kd = static_cast<double>(k);
  return std::lgamma(md + 1.0) - std::lgamma(kd + 1.0) - std::lgamma(md - kd + 1.0) +
         kd * log_p + (md - kd) * log_q;
}

// log P[N > k]: positive terms only, accumulated relative to the largest.
double log_upper_tail(std::int64_t m, std::int64_t k, double log_p, double log_q) {
  const double mode = std::floor(static_cast<double>(m + 1) * std::exp(log_p));
  const auto start = k + 1;
  const auto peak = std::max<std::int64_t>(start, static_cast<std::int64_t>(mode));
  const double log_ref = log_binomial_pmf(m, std::min(peak, m), log_p, log_q);
  double sum = 0.0;
  for (std::int64_t j = start; j <= m; ++j) {
    const double term = std::exp(log_binomial_pmf(m, j, log_p, log_q) - log_ref);
    sum += term;
    if (j > peak && term < 1e-18 * sum) break;
  }
  return log_ref + std::log(sum);
}

void check_binomial_args(std::int64_t m, double p) {
  if (m < 1) throw DomainError("binomial size m must be >= 1");
  if (!(p > 0.0 && p < 1.0)) throw DomainError("binomial p must lie in (0, 1)");
}

using boost::multiprecision::cpp_rational;

// Exact P[Bin(m, p) >= k] for k = 0..m+1.
std::vector<cpp_rational> exact_tails(int m, const cpp_rational& p) {
  const cpp_rational q = 1 - p;
  std::vector<cpp_rational> pmf(static_cast<std::size_t>(m) + 1);
  cpp_rational binom = 1;
  for (int k = 0; k <= m; ++k) {
    if (k > 0) binom = binom * (m - k + 1) / k;
    cpp_rational term = binom;
    for (int i = 0; i < k; ++i) term *= p;
    for (int i = 0; i < m - k; ++i) term *= q;
    pmf[static_cast<std::size_t>(k)] = term;
  }
  std::vector<cpp_rational> tail(static_cast<std::size_t>(m) + 2, cpp_rational(0));
  for (int k = m; k >= 0; --k) {
    tail[static_cast<std::size_t>(k)] =
        tail[static_cast<std::size_t>(k) + 1] + pmf[static_cast<std::size_t>(k)];
  }
  return tail;
}

cpp_rational exact_from_double(double x) {
  int exponent = 0;
  const double mantissa = std::frexp(x, &exponent);
  const auto scaled = static_cast<std::int64_t>(std::ldexp(mantissa, 53));
  cpp_rational r(scaled);
  const int shift = exponent - 53;
  cpp_rational two_pow = 1;
  for (int i = 0; i < std::abs(shift); ++i) two_pow *= 2;
  return shift >= 0 ? cpp_rational(r * two_pow) : cpp_rational(r / two_pow);
}

// Count of points of config within closed distance rho of center, skipping `skip`.
std::int64_t count_in_ball(const PointConfiguration& config,
                           std::span<const double> center, double rho,
                           std::size_t skip = static_cast<std::size_t>(-1)) {
  std::int64_t count = 0;
  config.visit_within(center, rho, [&](std::size_t j, double) {
    if (j != skip) ++count;
    return true;
  });
  return count;
}

TorusPoint uniform_point(int d, double side, CounterRng& rng) {
  TorusPoint p;
  std::array<double, kMaxDimension> c{};
  for (int a = 0; a < d; ++a) c[static_cast<std::size_t>(a)] = side * rng.uniform01();
  return TorusPoint(std::span<const double>(c.data(), static_cast<std::size_t>(d)));
}

double success_probability(const ModelParams& params) {
  const double p = params.phi() / static_cast<double>(params.n());
  if (!(p < 1.0)) throw DomainError("coupling requires phi < n");
  return p;
}

// One redraw of (B, I, U) given the anchor and the count N.
struct Move {
  bool bernoulli = false;
  std::size_t index = 0;
  TorusPoint target;
};

Move draw_move(std::int64_t m, double p, std::int64_t N, const TorusPoint& anchor,
               double rho, double side, CounterRng& rng) {
  Move mv;
  mv.bernoulli = rng.bernoulli(pi_k(m, p, N));
  mv.target = uniform_in_ball(anchor, rho, side, rng);
  mv.index = static_cast<std::size_t>(rng.below(static_cast<std::uint64_t>(m)));
  return mv;
}

}  // namespace

double pi_k(std::int64_t m, double p, std::int64_t k) {
  check_binomial_args(m, p);
  if (k < 0 || k > m) throw DomainError("pi_k requires 0 <= k <= m");
  if (k == m) return 0.0;
  if (k == 0) return 1.0;

  // P[N > k | N > 0] - P[N > k] = P[N > k] q^m / (1 - q^m).
  const double log_p = std::log(p);
  const double log_q = std::log1p(-p);
  const double md = static_cast<double>(m);
  const double log_qm = md * log_q;
  const double log_one_minus_qm = std::log(-std::expm1(log_qm));
  const double log_value = log_upper_tail(m, k, log_p, log_q) + log_qm -
                           log_one_minus_qm - log_binomial_pmf(m, k, log_p, log_q) -
                           std::log1p(-static_cast<double>(k) / md);
  const double value = std::exp(log_value);
  if (!(value <= 1.0)) {
    if (value <= 1.0 + kClampSlack) return 1.0;
    throw NumericalError("pi_k left [0, 1]: " + std::to_string(value), value - 1.0);
  }
  return value;
}

bool dominance_check(int m, double p) {
  if (m < 1 || m > 60) throw DomainError("dominance_check requires 1 <= m <= 60");
  if (!(p > 0.0 && p < 1.0)) throw DomainError("binomial p must lie in (0, 1)");
  const cpp_rational pr = exact_from_double(p);
  const auto tail = exact_tails(m, pr);
  const auto tail_minus = exact_tails(m - 1, pr);
  const cpp_rational positive = tail[1];
  for (int k = 1; k <= m; ++k) {
    const cpp_rational& plain = tail[static_cast<std::size_t>(k)];
    const cpp_rational conditioned = plain / positive;
    const cpp_rational shifted = tail_minus[static_cast<std::size_t>(k - 1)];
    if (plain > conditioned || conditioned > shifted) return false;
  }
  return true;
}

BinomialCouplingDraw couple_binomial(std::int64_t m, double p, std::uint64_t seed) {
  check_binomial_args(m, p);
  CounterRng rng(seed);
  const auto index = static_cast<std::int64_t>(rng.below(static_cast<std::uint64_t>(m)));
  bool xi_index = false;
  std::int64_t N = 0;
  for (std::int64_t i = 0; i < m; ++i) {
    const bool xi = rng.bernoulli(p);
    N += xi ? 1 : 0;
    if (i == index) xi_index = xi;
  }
  BinomialCouplingDraw draw;
  draw.N = N;
  draw.index = index;
  draw.bernoulli = rng.bernoulli(pi_k(m, p, N));
  draw.M = N + ((draw.bernoulli && !xi_index) ? 1 : 0);
  return draw;
}

TorusPoint uniform_in_ball(const TorusPoint& center, double r, double side,
                           CounterRng& rng) {
  const int d = center.dim();
  std::array<double, kMaxDimension> off{};
  for (;;) {
    double norm2 = 0.0;
    for (int a = 0; a < d; ++a) {
      const double x = rng.uniform(-1.0, 1.0);
      off[static_cast<std::size_t>(a)] = x;
      norm2 += x * x;
    }
    if (norm2 <= 1.0) break;
  }
  TorusPoint p = center;
  for (int a = 0; a < d; ++a) {
    p[a] = wrap_coordinate(center[a] + r * off[static_cast<std::size_t>(a)], side);
  }
  return p;
}

CouplingDraw size_biased_pair_V(const ModelParams& params, std::uint64_t seed,
                                const VolumeMethod& method) {
  method.validate(params.dim());
  const double p = success_probability(params);
  const double rho = params.rho();
  const double side = params.side();
  CounterRng rng(seed);

  CouplingDraw draw;
  draw.variant = CouplingVariant::V;
  draw.anchor = uniform_point(params.dim(), side, rng);
  const PointConfiguration base = sample_configuration(params, derive_seed(seed, 1));
  const std::int64_t m = params.n();
  draw.count_before = count_in_ball(base, draw.anchor.coords(), rho);

  const Move mv = draw_move(m, p, draw.count_before, draw.anchor, rho, side, rng);
  draw.bernoulli = mv.bernoulli;
  draw.target = mv.target;

  VolumeMethod vm = method;
  vm.mc_seed = derive_seed(seed, 2);  // common random numbers for V and V'
  draw.y = covered_volume(base, rho, vm).value;
  if (!mv.bernoulli) {
    draw.y_prime = draw.y;
    draw.count_after = draw.count_before;
    return draw;
  }
  draw.moved_index = mv.index;
  const PointConfiguration moved = base.with_point_moved(mv.index, mv.target);
  draw.y_prime = covered_volume(moved, rho, vm).value;
  draw.count_after = count_in_ball(moved, draw.anchor.coords(), rho);
  return draw;
}

CouplingDraw size_biased_pair_W(const ModelParams& params, std::uint64_t seed) {
  kissing_constants(params.dim());
  const double p = success_probability(params);
  const double rho = params.rho();
  const double side = params.side();
  CounterRng rng(seed);

  CouplingDraw draw;
  draw.variant = CouplingVariant::W;
  draw.anchor = uniform_point(params.dim(), side, rng);

  // U_{m,1} with m = n - 1 in slots [0, m), then U0 in slot m.
  const std::int64_t m = params.n() - 1;
  std::vector<double> coords =
      sample_configuration(params, derive_seed(seed, 1)).coordinates();
  const auto d = static_cast<std::size_t>(params.dim());
  std::copy(draw.anchor.coords().begin(), draw.anchor.coords().end(),
            coords.begin() + static_cast<std::ptrdiff_t>(static_cast<std::size_t>(m) * d));
  const PointConfiguration base(params.dim(), side, std::move(coords), rho);
  const auto anchor_slot = static_cast<std::size_t>(m);
  draw.count_before = count_in_ball(base, draw.anchor.coords(), rho, anchor_slot);

  const Move mv = draw_move(m, p, draw.count_before, draw.anchor, rho, side, rng);
  draw.bernoulli = mv.bernoulli;
  draw.target = mv.target;
  draw.y = static_cast<double>(nonisolated_count(base, rho));
  if (!mv.bernoulli) {
    draw.y_prime = draw.y;
    draw.count_after = draw.count_before;
    return draw;
  }
  draw.moved_index = mv.index;
  const PointConfiguration moved = base.with_point_moved(mv.index, mv.target);
  draw.y_prime = static_cast<double>(nonisolated_count(moved, rho));
  draw.count_after = count_in_ball(moved, draw.anchor.coords(), rho, anchor_slot);
  return draw;
}

namespace {

struct InnerStats {
  double mean = 0.0;
  double variance = 0.0;  // unbiased
};

InnerStats inner_loop(const ModelParams& params, CouplingVariant variant,
                      const PointConfiguration& config, std::int64_t inner,
                      std::uint64_t seed) {
  const double rho = params.rho();
  const double side = params.side();
  const double p = success_probability(params);
  CounterRng rng(seed);
  VolumeMethod vm = VolumeMethod::automatic(params.dim());
  vm.mc_seed = derive_seed(seed, 0x5eed);
  const double base_value = variant == CouplingVariant::V
                                ? covered_volume(config, rho, vm).value
                                : static_cast<double>(nonisolated_count(config, rho));

  double mean = 0.0;
  double m2 = 0.0;
  for (std::int64_t t = 0; t < inner; ++t) {
    double diff = 0.0;
    if (variant == CouplingVariant::V) {
      const TorusPoint anchor = uniform_point(params.dim(), side, rng);
      const std::int64_t N = count_in_ball(config, anchor.coords(), rho);
      const Move mv = draw_move(params.n(), p, N, anchor, rho, side, rng);
      if (mv.bernoulli) {
        diff = covered_volume(config.with_point_moved(mv.index, mv.target), rho, vm)
                   .value -
               base_value;
      }
    } else {
      // U0 is a uniformly chosen point; the other n - 1 points form U_{m,1}.
      const auto a = static_cast<std::size_t>(
          rng.below(static_cast<std::uint64_t>(config.size())));
      const TorusPoint anchor = config.point_at(a);
      const std::int64_t m = params.n() - 1;
      const std::int64_t N = count_in_ball(config, anchor.coords(), rho, a);
      Move mv = draw_move(m, p, N, anchor, rho, side, rng);
      if (mv.index >= a) ++mv.index;  // skip the anchor slot
      if (mv.bernoulli) {
        diff = static_cast<double>(
                   nonisolated_count(config.with_point_moved(mv.index, mv.target), rho)) -
               base_value;
      }
    }
    const double delta = diff - mean;
    mean += delta / static_cast<double>(t + 1);
    m2 += delta * (diff - mean);
  }
  return {mean, m2 / static_cast<double>(inner - 1)};
}

double corrected_sd(const std::vector<double>& means, const std::vector<double>& vars,
                    const std::vector<std::size_t>& pick, double inner, bool* degenerate) {
  const double R = static_cast<double>(pick.size());
  double mean = 0.0;
  for (const std::size_t i : pick) mean += means[i];
  mean /= R;
  double outer = 0.0;
  double noise = 0.0;
  for (const std::size_t i : pick) {
    outer += (means[i] - mean) * (means[i] - mean);
    noise += vars[i];
  }
  outer /= R - 1.0;
  noise /= R * inner;
  const double corrected = outer - noise;
  if (degenerate != nullptr) *degenerate = corrected < 0.0;
  return corrected > 0.0 ? std::sqrt(corrected) : 0.0;
}

}  // namespace

DeltaEstimate estimate_delta(const ModelParams& params, CouplingVariant variant,
                             std::int64_t outer, std::int64_t inner, std::uint64_t seed,
                             unsigned parallelism, int bootstrap_resamples) {
  if (outer < 100) throw DomainError("estimate_delta requires outer >= 100");
  if (inner < 100) throw DomainError("estimate_delta requires inner >= 100");
  if (bootstrap_resamples < 200) {
    throw DomainError("estimate_delta requires >= 200 bootstrap resamples");
  }
  if (parallelism < 1) throw DomainError("parallelism must be >= 1");
  if (variant == CouplingVariant::W) kissing_constants(params.dim());
  success_probability(params);

  const auto R = static_cast<std::size_t>(outer);
  std::vector<double> means(R);
  std::vector<double> vars(R);
  parallel_for(R, parallelism, [&](std::size_t r) {
    const std::uint64_t config_seed = derive_seed(seed, r);
    const PointConfiguration config = sample_configuration(params, config_seed);
    const InnerStats s =
        inner_loop(params, variant, config, inner, derive_seed(config_seed, 7));
    means[r] = s.mean;
    vars[r] = s.variance;
  });

  DeltaEstimate est;
  est.variant = variant;
  std::vector<std::size_t> all(R);
  for (std::size_t i = 0; i < R; ++i) all[i] = i;
  const double M = static_cast<double>(inner);
  est.delta_hat = corrected_sd(means, vars, all, M, &est.degenerate);
  {
    double mean = 0.0;
    for (const double x : means) mean += x;
    mean /= static_cast<double>(R);
    double outer_var = 0.0;
    double noise = 0.0;
    for (std::size_t i = 0; i < R; ++i) {
      outer_var += (means[i] - mean) * (means[i] - mean);
      noise += vars[i];
    }
    est.raw_variance = outer_var / static_cast<double>(R - 1);
    est.inner_noise = noise / (static_cast<double>(R) * M);
  }

  CounterRng boot(derive_seed(seed, 0xb007b007ULL));
  std::vector<std::size_t> pick(R);
  double bsum = 0.0;
  double bsum2 = 0.0;
  for (int b = 0; b < bootstrap_resamples; ++b) {
    for (std::size_t i = 0; i < R; ++i) pick[i] = static_cast<std::size_t>(boot.below(R));
    const double v = corrected_sd(means, vars, pick, M, nullptr);
    bsum += v;
    bsum2 += v * v;
  }
  const double B = static_cast<double>(bootstrap_resamples);
  const double bmean = bsum / B;
  est.std_error = std::sqrt(std::max(0.0, (bsum2 - B * bmean * bmean) / (B - 1.0)));
  return est;
}

void write_coupling_csv(const std::vector<CouplingDraw>& draws, std::ostream& out) {
  out << "y,y_prime,bernoulli\n";
  char buf[96];
  for (const CouplingDraw& d : draws) {
    std::snprintf(buf, sizeof buf, "%.17g,%.17g,%d\n", d.y, d.y_prime,
                  d.bernoulli ? 1 : 0);
    out << buf;
  }
}

const char* to_string(CouplingVariant v) noexcept {
  return v == CouplingVariant::V ? "V" : "W";
}

}  // namespace covstein
