// Acceptance criteria A1..A10. `covstein_acceptance A3` runs one criterion;
// no argument runs all. Each prints one PASS/FAIL line; the exit status is
// nonzero when any selected criterion fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <tuple>
#include <sstream>
#include <string>
#include <vector>

#include <boost/math/distributions/chi_squared.hpp>
#include <json.hpp>

#include "covstein/analytic.hpp"
#include "covstein/bounds.hpp"
#include "covstein/cli.hpp"
#include "covstein/coupling.hpp"
#include "covstein/moments.hpp"
#include "covstein/parallel.hpp"
#include "covstein/simulate.hpp"
#include "covstein/stats.hpp"

using namespace covstein;

namespace {

struct Outcome {
  bool pass = true;
  std::string detail;

  void require(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      if (!detail.empty()) detail += "; ";
      detail += what;
    }
  }
};

std::string fmt(const char* f, double a, double b = 0.0, double c = 0.0) {
  char buf[256];
  std::snprintf(buf, sizeof buf, f, a, b, c);
  return buf;
}

double rel(double a, double b) { return std::abs(a - b) / std::max(std::abs(a), std::abs(b)); }

unsigned workers() { return hardware_parallelism(); }

// ---------------------------------------------------------------------------

Outcome a1() {
  Outcome o;
  std::ostringstream out;
  std::ostringstream err;
  const auto t0 = std::chrono::steady_clock::now();
  const int code = cli::run({"table", "--rho", "1", "--dims", "1,2,3", "--format", "json"}, out, err);
  const double secs =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  o.require(code == 0, "table exited " + std::to_string(code));
  if (code != 0) return o;
  const auto doc = nlohmann::json::parse(out.str());
  const char* expected_V[] = {"6.4252e+03", "8.6212e+05", "1.4451e+08"};
  const char* expected_S[] = {"2.1024e+03", "4.6833e+04", "1.0578e+06"};
  for (int i = 0; i < 3; ++i) {
    const auto& row = doc["rows"][static_cast<std::size_t>(i)];
    for (const auto& [key, want] : {std::pair{"delta_V", expected_V[i]},
                                    std::pair{"delta_S", expected_S[i]}}) {
      const std::string got = row[std::string(key) + "_5sf"];
      const double value = row[key];
      const double dev = rel(value, std::stod(want));
      std::printf("  A1 d=%d %s computed %.8e (5sf %s) expected %s rel.dev %.2e\n",
                  i + 1, key, value, got.c_str(), want, dev);
      o.require(got == want, "d=" + std::to_string(i + 1) + " " + key + " " + got +
                                 " != " + want);
    }
  }
  o.require(secs < 5.0, fmt("runtime %.2f s >= 5 s", secs));
  return o;
}

Outcome a2() {
  Outcome o;
  constexpr double tol = 1e-10;
  double worst = 0.0;
  for (double u = 0.0; u <= 2.0; u += 0.0625) worst = std::max(worst, std::abs(omega(1, u) - (2.0 + u)));
  for (const double rho : {0.1, 0.5, 1.0, 2.0}) {
    for (const double r : {0.25, 1.0, 2.0}) {
      const double closed = 2.0 * std::exp(-2.0 * rho) * -std::expm1(-rho * r) / rho;
      worst = std::max(worst, rel(integral_J(r, 1, rho), closed));
    }
    const double gv = 2.0 * std::exp(-2.0 * rho) * -std::expm1(-2.0 * rho) -
                      (4.0 * rho + 4.0 * rho * rho) * std::exp(-4.0 * rho);
    const double gs = std::exp(-2.0 * rho) - (1.0 + 4.0 * rho * rho) * std::exp(-4.0 * rho) +
                      2.0 * std::exp(-2.0 * rho) * (std::exp(-rho) - std::exp(-2.0 * rho));
    worst = std::max({worst, rel(g_V(rho, 1), gv), rel(g_S(rho, 1), gs)});
  }
  o.require(worst <= tol, fmt("worst relative deviation %.3e", worst));
  std::printf("  A2 worst relative deviation %.3e\n", worst);
  return o;
}

Outcome a3() {
  Outcome o;
  const ModelParams cases[] = {ModelParams(1, 200, 1.0), ModelParams(2, 500, 1.0)};
  constexpr std::int64_t R = 20000;
  for (const ModelParams& p : cases) {
    const MomentSet m = compute_moments(p);
    const auto batch =
        run_replicates(p, R, 3 + static_cast<std::uint64_t>(p.dim()), VolumeMethod::automatic(p.dim()),
                       workers());
    auto check = [&](const char* name, std::vector<double> x, double mu, double var) {
      double s = 0.0;
      for (double v : x) s += v;
      const double mean = s / static_cast<double>(x.size());
      double ss = 0.0;
      for (double v : x) ss += (v - mean) * (v - mean);
      const double n = static_cast<double>(x.size());
      const double sample_var = ss / (n - 1.0);
      const double se = std::sqrt(sample_var / n);
      const double z = (mean - mu) / se;
      const double rel_var = std::abs(sample_var - var) / var;
      std::printf("  A3 d=%d %s mean %.6f (exact %.6f, z %+.2f) var %.6f (exact %.6f, rel %.4f)\n",
                  p.dim(), name, mean, mu, z, sample_var, var, rel_var);
      o.require(std::abs(z) <= 4.0, fmt("d=%g mean z %.2f", p.dim(), z));
      o.require(rel_var <= 0.05, fmt("d=%g variance rel %.4f", p.dim(), rel_var));
    };
    check("V", batch.samples_V, m.mu_V, m.var_V);
    check("S", std::vector<double>(batch.samples_S.begin(), batch.samples_S.end()), m.mu_S,
          m.var_S);
  }
  return o;
}

Outcome a4() {
  Outcome o;
  for (int d = 1; d <= 3; ++d) {
    const ModelParams small(d, 10'000, 1.0);
    const ModelParams large(d, 1'000'000, 1.0);
    const double gv = g_V(1.0, d);
    const double gs = g_S(1.0, d);
    const double eV4 = std::abs(variance_V(small) / 1e4 - gv);
    const double eV6 = std::abs(variance_V(large) / 1e6 - gv);
    const double eS4 = std::abs(variance_S(small) / 1e4 - gs);
    const double eS6 = std::abs(variance_S(large) / 1e6 - gs);
    std::printf("  A4 d=%d V gap %.3e -> %.3e, S gap %.3e -> %.3e\n", d, eV4, eV6, eS4, eS6);
    o.require(eV6 < eV4, "V gap did not shrink at d=" + std::to_string(d));
    o.require(eS6 < eS4, "S gap did not shrink at d=" + std::to_string(d));
  }
  return o;
}

// Pearson statistic with adjacent bins merged until each expected count is
// at least 5; returns (statistic, degrees of freedom).
std::pair<double, int> chi_square(const std::vector<double>& expected_prob,
                                  const std::vector<std::int64_t>& counts, double total) {
  std::vector<std::pair<double, double>> bins;  // (expected, observed)
  double e_acc = 0.0;
  double o_acc = 0.0;
  for (std::size_t k = 0; k < expected_prob.size(); ++k) {
    e_acc += expected_prob[k] * total;
    o_acc += static_cast<double>(counts[k]);
    if (e_acc >= 5.0) {
      bins.emplace_back(e_acc, o_acc);
      e_acc = 0.0;
      o_acc = 0.0;
    }
  }
  if (e_acc > 0.0 || o_acc > 0.0) {
    bins.back().first += e_acc;
    bins.back().second += o_acc;
  }
  double stat = 0.0;
  for (const auto& [e, obs] : bins) stat += (obs - e) * (obs - e) / e;
  return {stat, static_cast<int>(bins.size()) - 1};
}

Outcome a5() {
  Outcome o;
  int pi_failures = 0;
  for (int m = 1; m <= 60; ++m) {
    for (int step = 1; step <= 99; ++step) {
      const double p = step / 100.0;
      for (int k = 0; k <= m; ++k) {
        const double v = pi_k(m, p, k);
        if (!(v >= 0.0 && v <= 1.0)) ++pi_failures;
      }
    }
  }
  o.require(pi_failures == 0, std::to_string(pi_failures) + " pi_k values outside [0,1]");

  int dominance_failures = 0;
  for (int m = 1; m <= 30; ++m) {
    for (int step = 1; step <= 19; ++step) {
      if (!dominance_check(m, step / 20.0)) ++dominance_failures;
    }
  }
  o.require(dominance_failures == 0,
            std::to_string(dominance_failures) + " dominance violations");

  constexpr int m = 10;
  constexpr double p = 0.3;
  constexpr std::int64_t draws = 1'000'000;
  std::vector<std::int64_t> cN(m + 1, 0);
  std::vector<std::int64_t> cM(m + 1, 0);
  for (std::int64_t i = 0; i < draws; ++i) {
    const auto d = couple_binomial(m, p, derive_seed(0xa5, static_cast<std::uint64_t>(i)));
    ++cN[static_cast<std::size_t>(d.N)];
    ++cM[static_cast<std::size_t>(d.M)];
  }
  std::vector<double> pmf(m + 1);
  double binom = 1.0;
  for (int k = 0; k <= m; ++k) {
    if (k > 0) binom = binom * (m - k + 1) / k;
    pmf[static_cast<std::size_t>(k)] = binom * std::pow(p, k) * std::pow(1.0 - p, m - k);
  }
  std::vector<double> cond = pmf;
  cond[0] = 0.0;
  for (int k = 1; k <= m; ++k) cond[static_cast<std::size_t>(k)] /= 1.0 - pmf[0];
  o.require(cM[0] == 0, "M took the value 0");

  auto test = [&](const char* name, const std::vector<double>& prob,
                  const std::vector<std::int64_t>& counts, std::size_t first) {
    const std::vector<double> pr(prob.begin() + static_cast<std::ptrdiff_t>(first), prob.end());
    const std::vector<std::int64_t> ct(counts.begin() + static_cast<std::ptrdiff_t>(first),
                                       counts.end());
    const auto [stat, dof] = chi_square(pr, ct, static_cast<double>(draws));
    const double critical =
        boost::math::quantile(boost::math::chi_squared(dof), 0.999);
    std::printf("  A5 %s chi-square %.3f on %d dof (critical %.3f)\n", name, stat, dof, critical);
    o.require(stat <= critical, std::string(name) + fmt(" chi-square %.3f > %.3f", stat, critical));
  };
  test("N", pmf, cN, 0);
  test("M", cond, cM, 1);
  return o;
}

Outcome a6() {
  Outcome o;
  constexpr std::uint64_t draws = 10'000;
  for (const int d : {1, 2}) {
    const ModelParams p(d, 50, 1.0);
    const VolumeMethod vm = VolumeMethod::automatic(d);
    std::vector<double> diff(draws);
    parallel_for(draws, workers(), [&](std::size_t i) {
      const auto c = size_biased_pair_V(p, derive_seed(0xa6, i), vm);
      diff[i] = std::abs(c.y_prime - c.y);
    });
    const double worst = *std::max_element(diff.begin(), diff.end());
    std::printf("  A6 V d=%d max|V'-V| %.6f (bound %.6f)\n", d, worst, p.phi());
    o.require(worst <= p.phi() + 1e-9, fmt("d=%g |V'-V| %.6f", d, worst));
  }
  for (const int d : {1, 2, 3}) {
    const ModelParams p(d, 50, 1.0);
    const int bound = kissing_constants(d).kappa_plus;
    std::vector<double> diff(draws);
    parallel_for(draws, workers(), [&](std::size_t i) {
      const auto c = size_biased_pair_W(p, derive_seed(0xa6, i));
      diff[i] = std::abs(c.y_prime - c.y);
    });
    const double worst = *std::max_element(diff.begin(), diff.end());
    std::printf("  A6 W d=%d max|W'-W| %.0f (bound %d)\n", d, worst, bound);
    o.require(worst <= bound, fmt("d=%g |W'-W| %.0f", d, worst));
  }

  // Size-bias identity: Y from independent replicates, Y' from coupling draws.
  constexpr std::int64_t n_identity = 100'000;
  const ModelParams p(1, 50, 1.0);
  const auto batch = run_replicates(p, n_identity, 0x5b, VolumeMethod::exact_1d(), workers());
  std::vector<double> yV = batch.samples_V;
  std::vector<double> yW(batch.samples_S.size());
  for (std::size_t i = 0; i < yW.size(); ++i) {
    yW[i] = static_cast<double>(p.n() - batch.samples_S[i]);
  }
  std::vector<double> ypV(static_cast<std::size_t>(n_identity));
  std::vector<double> ypW(static_cast<std::size_t>(n_identity));
  parallel_for(ypV.size(), workers(), [&](std::size_t i) {
    ypV[i] = size_biased_pair_V(p, derive_seed(0x5c, i), VolumeMethod::exact_1d()).y_prime;
    ypW[i] = size_biased_pair_W(p, derive_seed(0x5d, i)).y_prime;
  });
  for (const auto& [name, y, yp] :
       {std::tuple{"V", &yV, &ypV}, std::tuple{"W", &yW, &ypW}}) {
    const SizeBiasCheck c = size_bias_check(*y, *yp, false);
    std::printf("  A6 %s E[Y'] %.5f vs E[Y^2]/E[Y] %.5f (se %.5f, z %+.2f)\n", name,
                c.mean_y_prime, c.size_biased_mean, c.std_error, c.z);
    o.require(std::abs(c.z) <= 4.0, std::string(name) + fmt(" identity z %.2f", c.z));
  }
  return o;
}

Outcome a7() {
  Outcome o;
  const ModelParams p(1, 2000, 1.0);
  const auto batch = run_replicates(p, 50'000, 0xa7, VolumeMethod::exact_1d(), workers());
  const SandwichReport s = sandwich_test(p, batch, Statistic::S);
  const SandwichReport v = sandwich_test(p, batch, Statistic::V);
  std::printf("  A7 D_S %.5f, dkw %.5f, lower 0.8*%.5f, upper %.3f\n", s.D_empirical, s.dkw_band,
              s.lower_bound.value_or(NAN), s.upper_bound.value_or(NAN));
  std::printf("  A7 D_V %.5f, upper %.3f\n", v.D_empirical, v.upper_bound.value_or(NAN));
  o.require(s.lower_bound.has_value() && s.upper_bound.has_value() && v.upper_bound.has_value(),
            "bounds unavailable");
  o.require(!s.inconclusive, "inconclusive");
  o.require(s.pass_lower, "D_S below the lower clause");
  o.require(s.pass_upper, "D_S above the upper clause");
  o.require(v.pass_upper, "D_V above the upper clause");
  return o;
}

Outcome a8() {
  Outcome o;
  const ModelParams p(1, 100, 1.0);
  for (const CouplingVariant variant : {CouplingVariant::V, CouplingVariant::W}) {
    const DeltaEstimate e = estimate_delta(p, variant, 400, 400, 0xa8, workers());
    const double eta = variant == CouplingVariant::V ? eta_V(p) : eta_S(p);
    const double bound = std::sqrt(eta / 100.0);
    std::printf("  A8 %s delta_hat %.5f se %.5f bound %.5f%s\n", to_string(variant), e.delta_hat,
                e.std_error, bound, e.degenerate ? " (degenerate)" : "");
    o.require(e.delta_hat - 2.0 * e.std_error <= bound,
              std::string(to_string(variant)) + " exceeds bound");
  }
  return o;
}

Outcome a9() {
  Outcome o;
  const ModelParams p(1, 100'000'000, 1.0);
  const MomentSet m = compute_moments(p);
  const double sv = std::sqrt(1e8) * theorem_bound_V(p, m);
  const double ss = std::sqrt(1e8) * theorem_bound_S(p, m);
  const double dv = delta_V(1.0, 1);
  const double ds = delta_S(1.0, 1);
  std::printf("  A9 sqrt(n) D_V bound %.4f vs %.4f (rel %.2e); sqrt(n) D_S bound %.4f vs %.4f (rel %.2e)\n",
              sv, dv, rel(sv, dv), ss, ds, rel(ss, ds));
  o.require(rel(sv, dv) <= 0.01, fmt("V rel %.3e", rel(sv, dv)));
  o.require(rel(ss, ds) <= 0.01, fmt("S rel %.3e", rel(ss, ds)));
  return o;
}

Outcome a10() {
  Outcome o;
  int mismatches = 0;
  for (std::uint64_t c = 0; c < 1000; ++c) {
    CounterRng rng(derive_seed(0xa10, c));
    const int d = 1 + static_cast<int>(rng.below(3));
    const std::int64_t n = 4 + static_cast<std::int64_t>(rng.below(47));
    const double rho = rng.uniform(0.2, 1.2);
    const double side = std::max(3.0 * rho + 0.1, std::pow(static_cast<double>(n), 1.0 / d));
    std::vector<double> coords(static_cast<std::size_t>(n * d));
    for (double& x : coords) x = side * rng.uniform01();
    const PointConfiguration cfg(d, side, coords, rho);
    std::int64_t brute = 0;
    for (std::size_t i = 0; i < cfg.size(); ++i) {
      bool alone = true;
      for (std::size_t j = 0; j < cfg.size() && alone; ++j) {
        if (j != i && toroidal_distance2(cfg.point(i), cfg.point(j), side) <= rho * rho) {
          alone = false;
        }
      }
      brute += alone ? 1 : 0;
    }
    if (isolated_count(cfg, rho) != brute) ++mismatches;
  }
  std::printf("  A10 isolated-count mismatches %d / 1000\n", mismatches);
  o.require(mismatches == 0, std::to_string(mismatches) + " isolated-count mismatches");

  double worst_z = 0.0;
  for (std::uint64_t c = 0; c < 20; ++c) {
    CounterRng rng(derive_seed(0xa11, c));
    const std::int64_t n = 2 + static_cast<std::int64_t>(rng.below(19));
    const double rho = rng.uniform(0.5, 1.2);
    const double side = 4.0;
    std::vector<double> coords(static_cast<std::size_t>(2 * n));
    for (double& x : coords) x = side * rng.uniform01();
    const PointConfiguration cfg(2, side, coords, rho);
    const double exact = covered_volume(cfg, rho, VolumeMethod::exact_2d()).value;
    const auto mc = covered_volume(cfg, rho, VolumeMethod::monte_carlo(10'000'000, c));
    worst_z = std::max(worst_z, std::abs(exact - mc.value) / mc.std_error);
  }
  std::printf("  A10 exact-2d vs Monte Carlo worst |z| %.2f over 20 configurations\n", worst_z);
  o.require(worst_z <= 4.0, fmt("exact vs MC |z| %.2f", worst_z));
  return o;
}

}  // namespace

int main(int argc, char** argv) {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
      {"A1", a1}, {"A2", a2}, {"A3", a3}, {"A4", a4}, {"A5", a5},
      {"A6", a6}, {"A7", a7}, {"A8", a8}, {"A9", a9}, {"A10", a10},
  };
  std::vector<std::string> selected(argv + 1, argv + argc);
  bool all_pass = true;
  int ran = 0;
  for (const auto& [name, fn] : criteria) {
    if (!selected.empty() && std::find(selected.begin(), selected.end(), name) == selected.end()) {
      continue;
    }
    ++ran;
    Outcome o;
    const auto t0 = std::chrono::steady_clock::now();
    try {
      o = fn();
    } catch (const std::exception& e) {
      o.pass = false;
      o.detail = std::string("exception: ") + e.what();
    }
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::printf("%s %s (%.1f s)%s%s\n", o.pass ? "PASS" : "FAIL", name.c_str(), secs,
                o.detail.empty() ? "" : ": ", o.detail.c_str());
    std::fflush(stdout);
    all_pass = all_pass && o.pass;
  }
  if (ran == 0) {
    std::fprintf(stderr, "unknown criterion; expected A1..A10\n");
    return 2;
  }
  return all_pass ? 0 : 1;
}
