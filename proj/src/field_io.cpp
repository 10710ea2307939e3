#include "chc/field_io.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>
#include <vector>

#include "chc/errors.hpp"

namespace chc::io {

namespace {

template <typename T>
void put_le(std::ostream& os, T value) {
  auto raw = std::bit_cast<std::array<unsigned char, sizeof(T)>>(value);
  if constexpr (std::endian::native == std::endian::big) std::reverse(raw.begin(), raw.end());
  os.write(reinterpret_cast<const char*>(raw.data()), sizeof(T));
}

template <typename T>
T get_le(std::istream& is) {
  std::array<unsigned char, sizeof(T)> raw{};
  is.read(reinterpret_cast<char*>(raw.data()), sizeof(T));
  if (!is) throw Error("truncated field file");
  if constexpr (std::endian::native == std::endian::big) std::reverse(raw.begin(), raw.end());
  return std::bit_cast<T>(raw);
}

std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

void write_rows(const std::filesystem::path& path, const Geometry& g, const Vector& values, bool boundary) {
  std::ofstream os(path);
  if (!os) throw Error("cannot open " + path.string() + " for writing");
  const bool two_d = g.mode() == GeometryMode::Strip2D;
  os << (two_d ? "index,x,y,value\n" : "index,x,value\n");
  for (int k = 0; k < values.size(); ++k) {
    const auto c = boundary ? g.boundary_coordinate(k) : g.coordinate(k);
    os << k << ',' << format_double(c[0]);
    if (two_d) os << ',' << format_double(c[1]);
    os << ',' << format_double(values(k)) << '\n';
  }
}

}  // namespace

void write_binary(const std::filesystem::path& path, const Vector& values) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw Error("cannot open " + path.string() + " for writing");
  os.write(kFieldMagic, 4);
  put_le<std::uint32_t>(os, kFieldVersion);
  put_le<std::uint64_t>(os, static_cast<std::uint64_t>(values.size()));
  for (int k = 0; k < values.size(); ++k) put_le<double>(os, values(k));
}

Vector read_binary(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw Error("cannot open " + path.string());
  char magic[4];
  is.read(magic, 4);
  if (!is || std::memcmp(magic, kFieldMagic, 4) != 0) throw Error(path.string() + ": bad magic");
  const auto version = get_le<std::uint32_t>(is);
  if (version != kFieldVersion) throw Error(path.string() + ": unsupported version " + std::to_string(version));
  const auto n = get_le<std::uint64_t>(is);
  Vector out(static_cast<Eigen::Index>(n));
  for (std::uint64_t k = 0; k < n; ++k) out(static_cast<Eigen::Index>(k)) = get_le<double>(is);
  return out;
}

void write_csv(const std::filesystem::path& path, const InteriorField& f) {
  validate(f);
  write_rows(path, *f.geometry, f.values, false);
}

void write_csv(const std::filesystem::path& path, const BoundaryField& g) {
  validate(g);
  write_rows(path, *g.geometry, g.values, true);
}

Vector read_csv_values(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw Error("cannot open " + path.string());
  std::string line;
  std::getline(is, line);  // header
  std::vector<double> values;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    std::stringstream row(line);
    std::string cell;
    std::vector<std::string> cells;
    while (std::getline(row, cell, ',')) cells.push_back(cell);
    if (cells.size() < 2) throw Error(path.string() + ": malformed row '" + line + "'");
    if (std::stol(cells.front()) != static_cast<long>(values.size())) {
      throw Error(path.string() + ": node indices must be consecutive from 0");
    }
    values.push_back(std::stod(cells.back()));
  }
  return Eigen::Map<const Vector>(values.data(), static_cast<Eigen::Index>(values.size()));
}

InteriorField load_interior(const std::filesystem::path& path, GeometryPtr g) {
  Vector v = path.extension() == ".csv" ? read_csv_values(path) : read_binary(path);
  InteriorField f{std::move(g), std::move(v)};
  validate(f);
  return f;
}

}  // namespace chc::io
