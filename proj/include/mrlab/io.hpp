#pragma once

#include <bit>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "mrlab/trajectory.hpp"

namespace mrlab {

// Field container format: fixed header (magic, version, dim, role, per-axis
// cell count / length / boundary tags, exponent p) followed by the physical
// samples of each component as little-endian 64-bit reals, axis-major with
// x fastest.  Ghost layers are never serialized.  LE hosts only (asserted).

namespace io_detail {

template <class T>
void put(std::ofstream& os, const T& v) {
  os.write(reinterpret_cast<const char*>(&v), sizeof(T));
}
template <class T>
T get(std::ifstream& is) {
  T v{};
  is.read(reinterpret_cast<char*>(&v), sizeof(T));
  if (!is) throw std::runtime_error("field read: truncated stream");
  return v;
}

}  // namespace io_detail

inline void write_field(const Field& f, const std::string& path) {
  static_assert(std::endian::native == std::endian::little, "field format is little-endian");
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("write_field: cannot open " + path);
  os.write("MRLF", 4);
  io_detail::put<std::uint32_t>(os, 1u);
  io_detail::put<std::uint32_t>(os, static_cast<std::uint32_t>(f.grid.dim));
  io_detail::put<std::uint32_t>(os, static_cast<std::uint32_t>(f.role));
  for (int a = 0; a < f.grid.dim; ++a) {
    io_detail::put<std::uint64_t>(os, static_cast<std::uint64_t>(f.grid.n_cells[a]));
    io_detail::put<double>(os, f.grid.lengths[a]);
    io_detail::put<std::uint8_t>(os, static_cast<std::uint8_t>(f.grid.bc[a][0]));
    io_detail::put<std::uint8_t>(os, static_cast<std::uint8_t>(f.grid.bc[a][1]));
  }
  io_detail::put<double>(os, f.grid.p);
  for (const Lattice& L : f.comps) {
    io_detail::put<std::uint64_t>(os, static_cast<std::uint64_t>(L.size()));
    for (int k = 0; k < L.n[2]; ++k)
      for (int j = 0; j < L.n[1]; ++j)
        os.write(reinterpret_cast<const char*>(&L.data[L.index(0, j, k)]),
                 static_cast<std::streamsize>(L.n[0] * sizeof(double)));
  }
  if (!os) throw std::runtime_error("write_field: short write to " + path);
}

inline Field read_field(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("read_field: cannot open " + path);
  char magic[4];
  is.read(magic, 4);
  if (!is || std::string(magic, 4) != "MRLF") throw std::runtime_error("read_field: bad magic");
  const auto version = io_detail::get<std::uint32_t>(is);
  if (version != 1u) throw std::runtime_error("read_field: unsupported version");
  GridSpec g;
  g.dim = static_cast<int>(io_detail::get<std::uint32_t>(is));
  const Role role = static_cast<Role>(io_detail::get<std::uint32_t>(is));
  for (int a = 0; a < g.dim; ++a) {
    g.n_cells[a] = static_cast<int>(io_detail::get<std::uint64_t>(is));
    g.lengths[a] = io_detail::get<double>(is);
    g.bc[a][0] = static_cast<Bc>(io_detail::get<std::uint8_t>(is));
    g.bc[a][1] = static_cast<Bc>(io_detail::get<std::uint8_t>(is));
  }
  g.p = io_detail::get<double>(is);
  Field f = Field::make(g, role);
  for (Lattice& L : f.comps) {
    const auto count = io_detail::get<std::uint64_t>(is);
    if (count != L.size()) throw std::runtime_error("read_field: component size mismatch");
    for (int k = 0; k < L.n[2]; ++k)
      for (int j = 0; j < L.n[1]; ++j) {
        is.read(reinterpret_cast<char*>(&L.data[L.index(0, j, k)]),
                static_cast<std::streamsize>(L.n[0] * sizeof(double)));
        if (!is) throw std::runtime_error("read_field: truncated payload");
      }
  }
  f.sync_ghosts();
  return f;
}

/// Plain-text inspection dump: one row per physical sample with coordinates.
inline void write_field_csv(const Field& f, const std::string& path) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("write_field_csv: cannot open " + path);
  os << "component,i,j,k,x,y,z,value\n";
  os.precision(17);
  for (int c = 0; c < f.n_comps(); ++c) {
    const Lattice& L = f.comps[c];
    for (int k = 0; k < L.n[2]; ++k)
      for (int j = 0; j < L.n[1]; ++j)
        for (int i = 0; i < L.n[0]; ++i)
          os << c << ',' << i << ',' << j << ',' << k << ',' << f.coord(c, 0, i) << ','
             << f.coord(c, 1, j) << ',' << (f.grid.dim == 3 ? f.coord(c, 2, k) : 0.0) << ','
             << L.at(i, j, k) << '\n';
  }
}

/// Checkpoint directory: manifest.json with the uniform time grid and status
/// plus one field file per retained state.
inline void write_checkpoint(const Trajectory<Field>& tr, const std::string& dir) {
  namespace fs = std::filesystem;
  fs::create_directories(dir);
  nlohmann::json m;
  m["format"] = "mrlab-trajectory-1";
  m["t0"] = tr.t0;
  m["dt"] = tr.dt;
  m["count"] = tr.states.size();
  m["status"] = tr.status == RunStatus::completed ? "completed" : "blowup";
  if (tr.status == RunStatus::blowup) m["blowup_time"] = tr.blowup_time;
  std::vector<std::string> files;
  for (std::size_t k = 0; k < tr.states.size(); ++k) {
    char name[32];
    std::snprintf(name, sizeof(name), "state_%06zu.bin", k);
    files.emplace_back(name);
    write_field(tr.states[k], (fs::path(dir) / name).string());
  }
  m["files"] = files;
  std::ofstream os(fs::path(dir) / "manifest.json");
  os << m.dump(2) << '\n';
}

inline Trajectory<Field> read_checkpoint(const std::string& dir) {
  namespace fs = std::filesystem;
  std::ifstream is(fs::path(dir) / "manifest.json");
  if (!is) throw std::runtime_error("read_checkpoint: missing manifest in " + dir);
  nlohmann::json m = nlohmann::json::parse(is);
  Trajectory<Field> tr;
  tr.t0 = m.at("t0").get<double>();
  tr.dt = m.at("dt").get<double>();
  tr.status = m.at("status").get<std::string>() == "blowup" ? RunStatus::blowup : RunStatus::completed;
  if (tr.status == RunStatus::blowup) tr.blowup_time = m.at("blowup_time").get<double>();
  for (const auto& name : m.at("files")) {
    tr.states.push_back(read_field((fs::path(dir) / name.get<std::string>()).string()));
  }
  if (tr.states.size() != m.at("count").get<std::size_t>())
    throw std::runtime_error("read_checkpoint: state count mismatch");
  return tr;
}

}  // namespace mrlab
