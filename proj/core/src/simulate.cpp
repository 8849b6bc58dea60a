#include "covstein/simulate.hpp"

#include <cstdio>
#include <new>
#include <ostream>
#include <stdexcept>
#include <string>

#include "covstein/errors.hpp"
#include "covstein/parallel.hpp"
#include "covstein/rng.hpp"

namespace covstein {

std::int64_t isolated_count(const PointConfiguration& config, double rho) {
  if (!(rho >= 0.0)) throw DomainError("rho must be >= 0");
  std::int64_t isolated = 0;
  for (std::size_t i = 0; i < config.size(); ++i) {
    const bool alone = config.visit_within(
        config.point(i), rho, [i](std::size_t j, double) { return j == i; });
    isolated += alone ? 1 : 0;
  }
  return isolated;
}

std::int64_t nonisolated_count(const PointConfiguration& config, double rho) {
  return static_cast<std::int64_t>(config.size()) - isolated_count(config, rho);
}

void ReplicateBatch::write_csv(std::ostream& out) const {
  out << "replicate,V,S\n";
  char buf[64];
  for (std::size_t r = 0; r < size(); ++r) {
    std::snprintf(buf, sizeof buf, "%.17g", samples_V[r]);
    out << r << ',' << buf << ',' << samples_S[r] << '\n';
  }
}

std::uint64_t replicate_seed(std::uint64_t seed, std::uint64_t r) noexcept {
  return derive_seed(seed, r);
}

ReplicateBatch run_replicates(const ModelParams& params, std::int64_t R,
                              std::uint64_t seed, const VolumeMethod& method,
                              unsigned parallelism) {
  if (R < 1) throw DomainError("replicate count must be >= 1");
  if (parallelism < 1) throw DomainError("parallelism must be >= 1");
  method.validate(params.dim());

  ReplicateBatch batch{params, seed};
  const auto count = static_cast<std::size_t>(R);
  try {
    batch.samples_V.resize(count);
    batch.samples_S.resize(count);
  } catch (const std::bad_alloc&) {
    throw std::runtime_error("cannot allocate a batch of " + std::to_string(R) +
                             " replicates");
  }

  parallel_for(count, parallelism, [&](std::size_t r) {
    const std::uint64_t config_seed = replicate_seed(seed, r);
    const PointConfiguration config = sample_configuration(params, config_seed);
    VolumeMethod local = method;
    local.mc_seed = derive_seed(config_seed, 1);
    batch.samples_V[r] = covered_volume(config, params.rho(), local).value;
    batch.samples_S[r] = isolated_count(config, params.rho());
  });
  return batch;
}

}  // namespace covstein
