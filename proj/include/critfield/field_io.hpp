#pragma once

#include <filesystem>
#include <iosfwd>

#include "critfield/grid.hpp"

namespace critfield {

/// CRITFLD1 raster: 32-byte little-endian header
///   bytes  0..7   magic "CRITFLD1"
///   bytes  8..11  u32 n
///   bytes 12..15  u32 reserved (0)
///   bytes 16..23  f64 L
///   bytes 24..31  f64 t
/// followed by n*n f64 samples, row-major with x varying fastest.
struct RasterSnapshot {
  RealField field;
  double time;
};

void write_raster(std::ostream& out, const RealField& field, double time);
void write_raster(const std::filesystem::path& path, const RealField& field, double time);
RasterSnapshot read_raster(std::istream& in);
RasterSnapshot read_raster(const std::filesystem::path& path);

}  // namespace critfield
