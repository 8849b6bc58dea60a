#include "covstein/cli.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <ctime>
#include <limits>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "covstein/bounds.hpp"
#include "covstein/coupling.hpp"
#include "covstein/errors.hpp"
#include "covstein/moments.hpp"
#include "covstein/parallel.hpp"
#include "covstein/rng.hpp"
#include "covstein/simulate.hpp"
#include "covstein/stats.hpp"

namespace covstein::cli {

namespace {

using Json = nlohmann::ordered_json;

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

std::string iso_timestamp() {
  const auto now = std::chrono::system_clock::now();
  const std::time_t t = std::chrono::system_clock::to_time_t(now);
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

Json manifest(const std::string& command, Json params, std::optional<std::uint64_t> seed) {
  Json m;
  m["command"] = command;
  m["params"] = std::move(params);
  m["seed"] = seed ? Json(*seed) : Json(nullptr);
  m["tool_version"] = kToolVersion;
  m["timestamp"] = iso_timestamp();
  return m;
}

Json params_json(const ModelParams& p) {
  return Json{{"d", p.dim()}, {"n", p.n()}, {"rho", p.rho()}};
}

Json opt(const std::optional<double>& v) { return v ? Json(*v) : Json(nullptr); }

void emit(std::ostream& out, const Json& j) { out << j.dump() << '\n'; }

std::string format_sig(double x, int digits) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*e", digits - 1, x);
  return buf;
}

// Options shared by the commands that take a model triple.
struct ModelOptions {
  int d = 1;
  std::int64_t n = 100;
  double rho = 1.0;
  bool allow_high_dimension = false;

  void attach(CLI::App* app) {
    app->add_option("--d,-d", d, "dimension")->required();
    app->add_option("--n,-n", n, "number of points")->required();
    app->add_option("--rho", rho, "ball radius")->required();
    app->add_flag("--allow-high-dimension", allow_high_dimension,
                  "permit d up to 8 where formulas allow");
  }
  ModelParams build() const { return ModelParams(d, n, rho, allow_high_dimension); }
};

QuadratureSpec quadrature(double tolerance) {
  QuadratureSpec spec;
  spec.absolute_tolerance = tolerance;
  spec.relative_tolerance = tolerance;
  spec.validate();
  return spec;
}

VolumeMethod volume_method(const std::string& name, int d, std::uint64_t mc_samples,
                           bool self_check) {
  VolumeMethod m;
  if (name == "auto") {
    m = VolumeMethod::automatic(d);
    if (m.mode == VolumeMode::monte_carlo) m.mc_samples = mc_samples;
  } else if (name == "exact") {
    if (d == 1) {
      m = VolumeMethod::exact_1d();
    } else if (d == 2) {
      m = VolumeMethod::exact_2d();
    } else {
      throw UsageError("exact volume is available for d <= 2 only");
    }
  } else {
    m = VolumeMethod::monte_carlo(mc_samples);
  }
  m.self_check = self_check;
  return m;
}

Json sandwich_json(const SandwichReport& r) {
  Json j;
  j["which"] = to_string(r.which);
  j["n"] = r.params.n();
  j["d"] = r.params.dim();
  j["rho"] = r.params.rho();
  j["R"] = r.replicates;
  j["D_empirical"] = r.D_empirical;
  j["dkw_band"] = r.dkw_band;
  j["upper_bound"] = opt(r.upper_bound);
  j["lower_bound"] = opt(r.lower_bound);
  j["lower_factor"] = r.lower_factor;
  j["pass_upper"] = r.pass_upper;
  j["pass_lower"] = r.pass_lower;
  j["inconclusive"] = r.inconclusive;
  return j;
}

std::vector<int> parse_dims(const std::string& text) {
  std::vector<int> dims;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    std::size_t used = 0;
    int d = 0;
    try {
      d = std::stoi(item, &used);
    } catch (const std::exception&) {
      throw UsageError("invalid dimension '" + item + "'");
    }
    if (used != item.size()) throw UsageError("invalid dimension '" + item + "'");
    if (d < 1 || d > 3) {
      throw UsageError("unsupported dimension " + std::to_string(d) +
                       " (table supports d in {1,2,3})");
    }
    dims.push_back(d);
  }
  if (dims.empty()) throw UsageError("--dims must list at least one dimension");
  return dims;
}

// ---------------------------------------------------------------------------

struct TableCommand {
  double rho = 1.0;
  std::string dims = "1,2,3";
  double tolerance = 1e-12;
  std::string format = "text";

  int operator()(std::ostream& out) const {
    const std::vector<int> ds = parse_dims(dims);
    if (!(rho > 0.0)) throw UsageError("--rho must be > 0");
    const QuadratureSpec spec = quadrature(tolerance);
    Json rows = Json::array();
    std::ostringstream text;
    text << "d  delta_V      delta_S\n";
    for (const int d : ds) {
      const double dv = delta_V(rho, d, spec);
      const double dsv = delta_S(rho, d, spec);
      rows.push_back(Json{{"d", d}, {"delta_V", dv}, {"delta_S", dsv},
                          {"delta_V_5sf", format_sig(dv, 5)},
                          {"delta_S_5sf", format_sig(dsv, 5)}});
      text << d << "  " << format_sig(dv, 5) << "   " << format_sig(dsv, 5) << '\n';
    }
    if (format == "json") {
      Json j;
      j["manifest"] = manifest("table", Json{{"rho", rho}, {"dims", ds}}, std::nullopt);
      j["rows"] = rows;
      emit(out, j);
    } else {
      out << text.str();
    }
    return kSuccess;
  }
};

struct BoundsCommand {
  ModelOptions model;
  double tolerance = 1e-12;
  bool partial = false;

  int operator()(std::ostream& out) const {
    const ModelParams params = model.build();
    if (!partial) {
      params.require_variance_formulas();
      params.require_theorem_V();
      if (params.dim() <= 3) params.require_theorem_S();
    }
    const BoundReport r = make_bound_report(params, quadrature(tolerance));
    Json j;
    j["manifest"] = manifest("bounds", params_json(params), std::nullopt);
    const Validity& v = params.validity();
    j["validity"] = Json{{"mean_formulas", v.mean_formulas},
                         {"variance_formulas", v.variance_formulas},
                         {"theorem_V", v.theorem_V},
                         {"theorem_S", v.theorem_S}};
    j["eta_V"] = opt(r.eta_V);
    j["eta_S"] = opt(r.eta_S);
    j["D_V_bound"] = opt(r.D_V_bound);
    j["D_S_bound"] = opt(r.D_S_bound);
    j["D_S_finite_lower"] = opt(r.D_S_finite_lower);
    j["eta_V_limit"] = r.eta_V_limit;
    j["eta_S_limit"] = opt(r.eta_S_limit);
    j["delta_V"] = r.delta_V;
    j["delta_S"] = opt(r.delta_S);
    j["lower_S"] = r.lower_S;
    emit(out, j);
    return kSuccess;
  }
};

struct MomentsCommand {
  ModelOptions model;
  double tolerance = 1e-12;

  int operator()(std::ostream& out) const {
    const ModelParams params = model.build();
    params.require_mean_formulas();
    const QuadratureSpec spec = quadrature(tolerance);
    Json j;
    j["manifest"] = manifest("moments", params_json(params), std::nullopt);
    j["mu_V"] = mean_V(params);
    j["mu_S"] = mean_S(params);
    if (params.validity().variance_formulas) {
      j["var_V"] = variance_V(params, spec);
      j["var_S"] = variance_S(params, spec);
    } else {
      j["var_V"] = nullptr;
      j["var_S"] = nullptr;
    }
    j["phi"] = params.phi();
    j["side"] = params.side();
    emit(out, j);
    return kSuccess;
  }
};

struct SimulateCommand {
  ModelOptions model;
  std::int64_t R = 1000;
  std::uint64_t seed = 1;
  unsigned parallelism = 0;
  std::string method = "auto";
  std::uint64_t mc_samples = 1'000'000;
  bool self_check = false;
  std::string format = "both";
  double lower_factor = 0.8;
  double tolerance = 1e-12;

  int operator()(std::ostream& out, std::ostream& err) const {
    const ModelParams params = model.build();
    const bool want_json = format != "csv";
    if (want_json) params.require_variance_formulas();
    const VolumeMethod vm = volume_method(method, params.dim(), mc_samples, self_check);
    const unsigned workers = resolve_parallelism(parallelism);
    err << "simulate: " << R << " replicates on " << workers << " worker(s)\n";
    const ReplicateBatch batch = run_replicates(params, R, seed, vm, workers);
    if (format != "json") batch.write_csv(out);
    if (!want_json) return kSuccess;

    const QuadratureSpec spec = quadrature(tolerance);
    Json mj = params_json(params);
    mj["R"] = R;
    mj["volume_method"] = method;
    Json j;
    j["manifest"] = manifest("simulate", std::move(mj), seed);
    j["sandwich"] = Json::array(
        {sandwich_json(sandwich_test(params, batch, Statistic::V, lower_factor, spec)),
         sandwich_json(sandwich_test(params, batch, Statistic::S, lower_factor, spec))});
    emit(out, j);
    return kSuccess;
  }
};

struct CoupleCommand {
  ModelOptions model;
  std::string variant = "V";
  std::int64_t draws = 1000;
  std::uint64_t seed = 1;
  unsigned parallelism = 0;
  std::string method = "auto";
  std::uint64_t mc_samples = 1'000'000;
  std::string format = "both";

  int operator()(std::ostream& out) const {
    const ModelParams params = model.build();
    if (draws < 2) throw UsageError("--draws must be >= 2");
    const bool is_v = variant == "V";
    const VolumeMethod vm = volume_method(method, params.dim(), mc_samples, false);
    std::vector<CouplingDraw> batch(static_cast<std::size_t>(draws));
    parallel_for(batch.size(), resolve_parallelism(parallelism), [&](std::size_t i) {
      const std::uint64_t s = derive_seed(seed, i);
      batch[i] = is_v ? size_biased_pair_V(params, s, vm) : size_biased_pair_W(params, s);
    });
    if (format != "json") write_coupling_csv(batch, out);
    if (format == "csv") return kSuccess;

    const double bound =
        is_v ? params.phi() : kissing_constants(params.dim()).kappa_plus;
    std::vector<double> y;
    std::vector<double> yp;
    double max_diff = 0.0;
    std::int64_t moved = 0;
    std::int64_t min_after = std::numeric_limits<std::int64_t>::max();
    for (const CouplingDraw& d : batch) {
      y.push_back(d.y);
      yp.push_back(d.y_prime);
      max_diff = std::max(max_diff, std::abs(d.y_prime - d.y));
      moved += d.bernoulli ? 1 : 0;
      min_after = std::min(min_after, d.count_after);
    }
    const SizeBiasCheck c = size_bias_check(y, yp, true);
    Json mj = params_json(params);
    mj["variant"] = variant;
    mj["draws"] = draws;
    Json j;
    j["manifest"] = manifest("couple", std::move(mj), seed);
    j["variant"] = variant;
    j["mean_y"] = c.mean_y;
    j["mean_y_prime"] = c.mean_y_prime;
    j["size_biased_mean"] = c.size_biased_mean;
    j["std_error"] = c.std_error;
    j["z"] = c.z;
    j["max_abs_diff"] = max_diff;
    j["diff_bound"] = bound;
    j["bound_holds"] = max_diff <= bound + (is_v ? 1e-9 : 0.0);
    j["bernoulli_rate"] = static_cast<double>(moved) / static_cast<double>(draws);
    j["min_count_after"] = min_after;
    emit(out, j);
    return kSuccess;
  }
};

struct DeltaCommand {
  ModelOptions model;
  std::string variant = "V";
  std::int64_t outer = 400;
  std::int64_t inner = 400;
  std::uint64_t seed = 1;
  unsigned parallelism = 0;
  int bootstrap = 200;

  int operator()(std::ostream& out) const {
    const ModelParams params = model.build();
    const CouplingVariant v = variant == "V" ? CouplingVariant::V : CouplingVariant::W;
    const double n = static_cast<double>(params.n());
    const double eta = v == CouplingVariant::V ? eta_V(params) : eta_S(params);
    const DeltaEstimate e = estimate_delta(params, v, outer, inner, seed,
                                           resolve_parallelism(parallelism), bootstrap);
    Json mj = params_json(params);
    mj["variant"] = variant;
    mj["outer"] = outer;
    mj["inner"] = inner;
    Json j;
    j["manifest"] = manifest("delta", std::move(mj), seed);
    j["variant"] = variant;
    j["n"] = params.n();
    j["d"] = params.dim();
    j["rho"] = params.rho();
    j["delta_hat"] = e.delta_hat;
    j["std_error"] = e.std_error;
    j["bound"] = std::sqrt(eta / n);
    j["degenerate"] = e.degenerate;
    j["raw_variance"] = e.raw_variance;
    j["inner_noise"] = e.inner_noise;
    emit(out, j);
    return kSuccess;
  }
};

void add_seed_options(CLI::App* app, std::uint64_t& seed, unsigned& parallelism) {
  app->add_option("--seed", seed, "random seed");
  app->add_option("--parallelism", parallelism,
                  "worker threads (default: all cores; COVERAGE_STEIN_THREADS overrides)");
}

}  // namespace

unsigned resolve_parallelism(unsigned requested) {
  if (const char* env = std::getenv("COVERAGE_STEIN_THREADS"); env != nullptr && *env) {
    char* end = nullptr;
    const unsigned long v = std::strtoul(env, &end, 10);
    if (end == nullptr || *end != '\0' || v < 1 || v > 4096) {
      throw UsageError("COVERAGE_STEIN_THREADS must be a positive integer");
    }
    return static_cast<unsigned>(v);
  }
  return requested > 0 ? requested : hardware_parallelism();
}

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Germ-grain coverage on the torus: moments, bounds and couplings",
               "covstein"};
  app.set_version_flag("--version", kToolVersion);
  app.require_subcommand(1);

  TableCommand table;
  auto* table_cmd = app.add_subcommand("table", "asymptotic Berry-Esseen constants");
  table_cmd->add_option("--rho", table.rho, "ball radius");
  table_cmd->add_option("--dims", table.dims, "comma-separated dimensions in {1,2,3}");
  table_cmd->add_option("--tolerance", table.tolerance, "quadrature tolerance");
  table_cmd->add_option("--format", table.format)->check(CLI::IsMember({"text", "json"}));

  BoundsCommand bounds;
  auto* bounds_cmd = app.add_subcommand("bounds", "finite-n and limiting bounds");
  bounds.model.attach(bounds_cmd);
  bounds_cmd->add_option("--tolerance", bounds.tolerance);
  bounds_cmd->add_flag("--partial", bounds.partial,
                       "report what applies instead of failing on a validity condition");

  MomentsCommand moments;
  auto* moments_cmd = app.add_subcommand("moments", "exact means and variances");
  moments.model.attach(moments_cmd);
  moments_cmd->add_option("--tolerance", moments.tolerance);

  SimulateCommand sim;
  auto* sim_cmd = app.add_subcommand("simulate", "replicates of (V, S) plus sandwich test");
  sim.model.attach(sim_cmd);
  sim_cmd->add_option("--R,-R", sim.R, "replicates")->check(CLI::PositiveNumber);
  add_seed_options(sim_cmd, sim.seed, sim.parallelism);
  sim_cmd->add_option("--volume-method", sim.method)
      ->check(CLI::IsMember({"auto", "exact", "monte-carlo"}));
  sim_cmd->add_option("--mc-samples", sim.mc_samples)->check(CLI::PositiveNumber);
  sim_cmd->add_flag("--self-check", sim.self_check, "cross-check exact-2d volumes");
  sim_cmd->add_option("--format", sim.format)
      ->check(CLI::IsMember({"csv", "json", "both"}));
  sim_cmd->add_option("--lower-factor", sim.lower_factor,
                      "safety factor on the lower-bound clause");
  sim_cmd->add_option("--tolerance", sim.tolerance);

  CoupleCommand couple;
  auto* couple_cmd = app.add_subcommand("couple", "size-biased coupling draws");
  couple.model.attach(couple_cmd);
  couple_cmd->add_option("--variant", couple.variant)->check(CLI::IsMember({"V", "W"}));
  couple_cmd->add_option("--draws", couple.draws);
  add_seed_options(couple_cmd, couple.seed, couple.parallelism);
  couple_cmd->add_option("--volume-method", couple.method)
      ->check(CLI::IsMember({"auto", "exact", "monte-carlo"}));
  couple_cmd->add_option("--mc-samples", couple.mc_samples)->check(CLI::PositiveNumber);
  couple_cmd->add_option("--format", couple.format)
      ->check(CLI::IsMember({"csv", "json", "both"}));

  DeltaCommand delta;
  auto* delta_cmd = app.add_subcommand("delta", "nested estimate of Delta");
  delta.model.attach(delta_cmd);
  delta_cmd->add_option("--variant", delta.variant)->check(CLI::IsMember({"V", "W"}));
  delta_cmd->add_option("--outer", delta.outer);
  delta_cmd->add_option("--inner", delta.inner);
  delta_cmd->add_option("--bootstrap", delta.bootstrap);
  add_seed_options(delta_cmd, delta.seed, delta.parallelism);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kSuccess : kUsageError;
  }

  try {
    if (*table_cmd) return table(out);
    if (*bounds_cmd) return bounds(out);
    if (*moments_cmd) return moments(out);
    if (*sim_cmd) return sim(out, err);
    if (*couple_cmd) return couple(out);
    if (*delta_cmd) return delta(out);
  } catch (const ValidityError& e) {
    err << "covstein: " << e.what() << '\n';
    return kValidityError;
  } catch (const NumericalError& e) {
    err << "covstein: numerical error: " << e.what() << '\n';
    return kNumericalError;
  } catch (const UsageError& e) {
    err << "covstein: " << e.what() << '\n';
    return kUsageError;
  } catch (const DomainError& e) {
    err << "covstein: " << e.what() << '\n';
    return kUsageError;
  } catch (const std::exception& e) {
    err << "covstein: " << e.what() << '\n';
    return 1;
  }
  return kUsageError;
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  std::vector<const char*> argv;
  argv.push_back("covstein");
  for (const std::string& a : args) argv.push_back(a.c_str());
  return run(static_cast<int>(argv.size()), argv.data(), out, err);
}

}  // namespace covstein::cli
