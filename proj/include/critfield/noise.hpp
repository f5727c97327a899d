#pragma once

#include <cstdint>
#include <random>
#include <string_view>

#include "critfield/grid.hpp"

namespace critfield {

/// Cellwise discretization of spatial white noise: each cell is an
/// independent N(0, 1/h^2) draw, so h^2 * sum f(x_i) eta(x_i) has variance
/// close to ||f||_2^2 for resolved f.
struct NoiseRealization {
  TorusGrid grid;
  RealField eta;
  std::uint64_t seed;
  std::uint64_t replica_index;
};

/// Name of the generator family, recorded in experiment metadata.
inline constexpr std::string_view kGeneratorName = "mt19937_64/seed_seq(seed,replica,stream)";

/// Independent engine for one (seed, replica, stream) triple. Streams let one
/// replica draw several independent quantities without touching the noise.
std::mt19937_64 replica_engine(std::uint64_t seed, std::uint64_t replica_index, std::uint32_t stream = 0);

NoiseRealization sample_white_noise(const TorusGrid& grid, std::uint64_t seed, std::uint64_t replica_index);

/// eta_eps = G_{eps^2} * eta. Requires 0 < eps < 1.
RealField mollify(const NoiseRealization& noise, double eps);
RealField mollify(const RealField& eta, double eps);

}  // namespace critfield
