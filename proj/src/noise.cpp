#include "critfield/noise.hpp"

#include <stdexcept>

namespace critfield {

std::mt19937_64 replica_engine(std::uint64_t seed, std::uint64_t replica_index, std::uint32_t stream) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(replica_index),
                    static_cast<std::uint32_t>(replica_index >> 32), stream};
  return std::mt19937_64(seq);
}

NoiseRealization sample_white_noise(const TorusGrid& grid, std::uint64_t seed, std::uint64_t replica_index) {
  auto engine = replica_engine(seed, replica_index);
  std::normal_distribution<double> normal(0.0, 1.0 / grid.spacing());
  Field values(grid.size(), grid.size());
  for (Index k = 0; k < values.size(); ++k) values.data()[k] = normal(engine);
  return {grid, RealField(grid, std::move(values)), seed, replica_index};
}

RealField mollify(const RealField& eta, double eps) {
  if (!(eps > 0.0 && eps < 1.0)) throw std::invalid_argument("mollification scale must lie in (0, 1)");
  return apply_semigroup(eta, eps * eps, 0.0);
}

RealField mollify(const NoiseRealization& noise, double eps) { return mollify(noise.eta, eps); }

}  // namespace critfield
