#include "critfield/field_io.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <stdexcept>

namespace critfield {
namespace {

constexpr std::array<char, 8> kMagic = {'C', 'R', 'I', 'T', 'F', 'L', 'D', '1'};

template <typename T>
void put_le(std::ostream& out, T value) {
  std::array<char, sizeof(T)> bytes;
  std::memcpy(bytes.data(), &value, sizeof(T));
  if constexpr (std::endian::native == std::endian::big) std::reverse(bytes.begin(), bytes.end());
  out.write(bytes.data(), bytes.size());
}

template <typename T>
T get_le(std::istream& in) {
  std::array<char, sizeof(T)> bytes;
  if (!in.read(bytes.data(), bytes.size())) throw std::runtime_error("truncated CRITFLD1 stream");
  if constexpr (std::endian::native == std::endian::big) std::reverse(bytes.begin(), bytes.end());
  T value;
  std::memcpy(&value, bytes.data(), sizeof(T));
  return value;
}

}  // namespace

void write_raster(std::ostream& out, const RealField& field, double time) {
  out.write(kMagic.data(), kMagic.size());
  put_le<std::uint32_t>(out, static_cast<std::uint32_t>(field.size()));
  put_le<std::uint32_t>(out, 0);
  put_le<double>(out, field.grid.side_length());
  put_le<double>(out, time);
  // column-major (i, j) storage is exactly row-major in (y, x)
  for (Index k = 0; k < field.values.size(); ++k) put_le<double>(out, field.values.data()[k]);
  if (!out) throw std::runtime_error("failed writing CRITFLD1 stream");
}

void write_raster(const std::filesystem::path& path, const RealField& field, double time) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open " + path.string());
  write_raster(out, field, time);
}

RasterSnapshot read_raster(std::istream& in) {
  std::array<char, 8> magic;
  if (!in.read(magic.data(), magic.size()) || magic != kMagic) {
    throw std::runtime_error("not a CRITFLD1 stream");
  }
  const auto n = get_le<std::uint32_t>(in);
  get_le<std::uint32_t>(in);
  const double L = get_le<double>(in);
  const double t = get_le<double>(in);
  TorusGrid grid(L, static_cast<Index>(n));
  Field values(grid.size(), grid.size());
  for (Index k = 0; k < values.size(); ++k) values.data()[k] = get_le<double>(in);
  return {RealField(grid, std::move(values)), t};
}

RasterSnapshot read_raster(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  return read_raster(in);
}

}  // namespace critfield
