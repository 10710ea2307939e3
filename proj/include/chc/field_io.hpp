#pragma once

#include <cstdint>
#include <filesystem>
#include <string>

#include "chc/grid.hpp"

namespace chc::io {

// Binary field dump: 16-byte header followed by little-endian float64 values.
//   bytes 0..3   magic "CHCF"
//   bytes 4..7   uint32 format version (currently 1)
//   bytes 8..15  uint64 value count
inline constexpr char kFieldMagic[4] = {'C', 'H', 'C', 'F'};
inline constexpr std::uint32_t kFieldVersion = 1;

void write_binary(const std::filesystem::path& path, const Vector& values);
Vector read_binary(const std::filesystem::path& path);

// CSV: one row per node, "index,x,value" (Interval1D) or "index,x,y,value".
void write_csv(const std::filesystem::path& path, const InteriorField& f);
void write_csv(const std::filesystem::path& path, const BoundaryField& g);
// Reads the value column of a field CSV, checking indices are 0..n-1 in order.
Vector read_csv_values(const std::filesystem::path& path);

// Reads a .bin or .csv dump (by extension) into an interior field on g.
InteriorField load_interior(const std::filesystem::path& path, GeometryPtr g);

}  // namespace chc::io
