#pragma once

// Field snapshots: one JSON header line, '\n', then raw little-endian f64
// values in row-major order.

#include <algorithm>
#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>
#include <string>
#include <vector>

#include <json.hpp>

#include "fracpm/errors.hpp"
#include "fracpm/spectral.hpp"

namespace fracpm {

struct Snapshot {
  GridField field;
  double t = 0.0;
};

namespace detail {

inline std::uint64_t to_little(std::uint64_t v) {
  if constexpr (std::endian::native == std::endian::little) return v;
  std::uint64_t r = 0;
  for (int i = 0; i < 8; ++i) r |= ((v >> (8 * i)) & 0xffu) << (8 * (7 - i));
  return r;
}

}  // namespace detail

inline void write_snapshot(std::ostream& os, const GridField& f, double t) {
  const Domain& d = f.domain();
  nlohmann::json h;
  h["dims"] = std::vector<std::size_t>(static_cast<std::size_t>(d.dim), d.n);
  h["L"] = d.length;
  h["t"] = t;
  h["dtype"] = "f64le";
  os << h.dump() << '\n';
  std::vector<std::uint64_t> raw(f.size());
  for (std::size_t i = 0; i < f.size(); ++i) raw[i] = detail::to_little(std::bit_cast<std::uint64_t>(f[i]));
  os.write(reinterpret_cast<const char*>(raw.data()), static_cast<std::streamsize>(raw.size() * sizeof(std::uint64_t)));
  if (!os) throw UsageError("write_snapshot: stream error");
}

inline Snapshot read_snapshot(std::istream& is) {
  std::string line;
  if (!std::getline(is, line)) throw UsageError("read_snapshot: missing header line");
  nlohmann::json h;
  try {
    h = nlohmann::json::parse(line);
  } catch (const nlohmann::json::exception& e) {
    throw UsageError(std::string("read_snapshot: malformed header: ") + e.what());
  }
  if (!h.contains("dims") || !h.contains("L") || !h.contains("t") || h.value("dtype", "") != "f64le")
    throw UsageError("read_snapshot: header must carry dims, L, t and dtype f64le");
  const auto dims = h["dims"].get<std::vector<std::size_t>>();
  if (dims.empty() || std::any_of(dims.begin(), dims.end(), [&](std::size_t v) { return v != dims[0]; }))
    throw UsageError("read_snapshot: only cubic grids are supported");
  Domain d{static_cast<int>(dims.size()), dims[0], h["L"].get<double>()};
  d.validate();
  std::vector<std::uint64_t> raw(d.size());
  is.read(reinterpret_cast<char*>(raw.data()), static_cast<std::streamsize>(raw.size() * sizeof(std::uint64_t)));
  if (static_cast<std::size_t>(is.gcount()) != raw.size() * sizeof(std::uint64_t))
    throw UsageError("read_snapshot: truncated payload");
  std::vector<double> v(raw.size());
  for (std::size_t i = 0; i < raw.size(); ++i) v[i] = std::bit_cast<double>(detail::to_little(raw[i]));
  return {GridField(d, std::move(v)), h["t"].get<double>()};
}

inline void write_snapshot(const std::string& path, const GridField& f, double t) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw UsageError("cannot open " + path + " for writing");
  write_snapshot(os, f, t);
}

inline Snapshot read_snapshot(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw UsageError("cannot open " + path);
  return read_snapshot(is);
}

}  // namespace fracpm
