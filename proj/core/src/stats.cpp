#include "covstein/stats.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "covstein/bounds.hpp"
#include "covstein/errors.hpp"
#include "covstein/moments.hpp"

namespace covstein {

double dkw_band(std::int64_t R) {
  if (R < 1) throw DomainError("dkw_band requires R >= 1");
  return std::sqrt(std::log(2.0 / 0.05) / (2.0 * static_cast<double>(R)));
}

KolmogorovResult ks_distance(std::span<const double> samples, double mu, double sigma) {
  if (!(sigma > 0.0) || !std::isfinite(sigma)) {
    throw DomainError("ks_distance requires sigma > 0");
  }
  if (samples.size() < 2) throw DomainError("ks_distance requires >= 2 samples");
  std::vector<double> w(samples.begin(), samples.end());
  for (double& x : w) {
    if (!std::isfinite(x)) throw DomainError("ks_distance: non-finite sample");
    x = (x - mu) / sigma;
  }
  std::sort(w.begin(), w.end());

  const double R = static_cast<double>(w.size());
  double sup = 0.0;
  std::size_t i = 0;
  while (i < w.size()) {
    std::size_t j = i;
    while (j < w.size() && w[j] == w[i]) ++j;
    // F jumps from i/R to j/R at w[i].
    const double phi = std_normal_cdf(w[i]);
    sup = std::max({sup, std::abs(static_cast<double>(i) / R - phi),
                    std::abs(static_cast<double>(j) / R - phi)});
    i = j;
  }
  return {std::min(sup, 1.0), static_cast<std::int64_t>(w.size()),
          dkw_band(static_cast<std::int64_t>(w.size()))};
}

SandwichReport sandwich_test(const ModelParams& params, const ReplicateBatch& batch,
                             Statistic which, double lower_factor,
                             const QuadratureSpec& spec) {
  if (!(batch.params == params)) {
    throw DomainError("replicate batch was generated for different parameters");
  }
  if (!(lower_factor >= 0.0)) throw DomainError("lower factor must be >= 0");
  params.require_variance_formulas();
  const MomentSet moments = compute_moments(params, spec);

  std::vector<double> values;
  double mu = 0.0;
  double var = 0.0;
  if (which == Statistic::V) {
    values = batch.samples_V;
    mu = moments.mu_V;
    var = moments.var_V;
  } else {
    values.assign(batch.samples_S.begin(), batch.samples_S.end());
    mu = moments.mu_S;
    var = moments.var_S;
  }
  const KolmogorovResult ks = ks_distance(values, mu, std::sqrt(var));

  SandwichReport report{.which = which, .params = params};
  report.replicates = ks.sample_size;
  report.D_empirical = ks.statistic;
  report.dkw_band = ks.dkw_band;
  report.lower_factor = lower_factor;
  report.inconclusive = ks.dkw_band >= 1.0;

  const Validity& v = params.validity();
  if (which == Statistic::V) {
    if (v.theorem_V) report.upper_bound = theorem_bound_V(params, moments);
  } else {
    if (v.theorem_S && params.dim() <= 3) {
      report.upper_bound = theorem_bound_S(params, moments);
    }
    report.lower_bound = finite_n_lower_bound_S(params, moments);
  }
  if (report.upper_bound) {
    report.pass_upper = ks.statistic <= *report.upper_bound + ks.dkw_band;
  }
  if (report.lower_bound) {
    report.pass_lower = ks.statistic >= lower_factor * *report.lower_bound - ks.dkw_band;
  }
  return report;
}

SizeBiasCheck size_bias_check(std::span<const double> y,
                              std::span<const double> y_prime, bool paired) {
  if (y.size() < 2 || y_prime.size() < 2) {
    throw DomainError("size_bias_check requires >= 2 samples of each");
  }
  if (paired && y.size() != y_prime.size()) {
    throw DomainError("paired size_bias_check requires equal sample sizes");
  }
  const auto mean_of = [](std::span<const double> v, auto f) {
    double s = 0.0;
    for (const double x : v) s += f(x);
    return s / static_cast<double>(v.size());
  };
  SizeBiasCheck c;
  c.mean_y = mean_of(y, [](double x) { return x; });
  if (!(c.mean_y > 0.0)) throw DomainError("size_bias_check requires mean(y) > 0");
  const double mean_y2 = mean_of(y, [](double x) { return x * x; });
  c.mean_y_prime = mean_of(y_prime, [](double x) { return x; });
  c.size_biased_mean = mean_y2 / c.mean_y;
  const double r = c.size_biased_mean;

  // Influence of one draw of y on the ratio.
  const auto ratio_influence = [&](double x) { return (x * x - r * x) / c.mean_y; };
  const auto variance = [](const std::vector<double>& v) {
    double m = 0.0;
    for (const double x : v) m += x;
    m /= static_cast<double>(v.size());
    double s = 0.0;
    for (const double x : v) s += (x - m) * (x - m);
    return s / static_cast<double>(v.size() - 1);
  };

  if (paired) {
    std::vector<double> h(y.size());
    for (std::size_t i = 0; i < y.size(); ++i) h[i] = y_prime[i] - ratio_influence(y[i]);
    c.std_error = std::sqrt(variance(h) / static_cast<double>(h.size()));
  } else {
    std::vector<double> a(y.size());
    for (std::size_t i = 0; i < y.size(); ++i) a[i] = ratio_influence(y[i]);
    const std::vector<double> b(y_prime.begin(), y_prime.end());
    c.std_error = std::sqrt(variance(a) / static_cast<double>(a.size()) +
                            variance(b) / static_cast<double>(b.size()));
  }
  const double gap = c.mean_y_prime - r;
  if (c.std_error > 0.0) {
    c.z = gap / c.std_error;
  } else {
    c.z = gap == 0.0 ? 0.0 : std::copysign(std::numeric_limits<double>::infinity(), gap);
  }
  return c;
}

const char* to_string(Statistic s) noexcept { return s == Statistic::V ? "V" : "S"; }

}  // namespace covstein
