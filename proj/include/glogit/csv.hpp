#pragma once

#include <charconv>
#include <filesystem>
#include <fstream>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

#include "glogit/field.hpp"
#include "glogit/graphon.hpp"
#include "glogit/grid.hpp"

namespace glogit {

// Shortest decimal that parses back to the same double.
inline std::string format_double(double v) {
  char buf[40];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  if (res.ec != std::errc())
    throw std::runtime_error("format_double: conversion failed");
  return std::string(buf, res.ptr);
}

inline double parse_double(std::string_view s) {
  double v = 0.0;
  auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size())
    throw std::runtime_error("parse_double: bad number '" + std::string(s) + "'");
  return v;
}

inline long parse_long(std::string_view s) {
  long v = 0;
  auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size())
    throw std::runtime_error("parse_long: bad integer '" + std::string(s) + "'");
  return v;
}

namespace detail {

inline std::vector<std::string_view> split_csv_line(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    std::size_t pos = line.find(',', start);
    if (pos == std::string_view::npos) {
      out.push_back(line.substr(start));
      break;
    }
    out.push_back(line.substr(start, pos - start));
    start = pos + 1;
  }
  return out;
}

inline std::ifstream open_input(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open for reading: " + path.string());
  return in;
}

inline std::ofstream open_output(const std::filesystem::path& path) {
  if (path.has_parent_path())
    std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open for writing: " + path.string());
  return out;
}

inline std::string read_line(std::istream& in, const std::string& context) {
  std::string line;
  if (!std::getline(in, line))
    throw std::runtime_error(context + ": unexpected end of file");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  return line;
}

}  // namespace detail

// Surface over the grid as "x,y,<name>" rows, type column j outer and action
// cell i inner. Values are written in round-trip form, so reloading
// reproduces the in-memory doubles bitwise.
inline void write_surface_csv(const std::filesystem::path& path,
                              const std::string& value_name, const Field& f,
                              const Grid& g) {
  if (f.nx() != g.nx || f.ny() != g.ny)
    throw std::invalid_argument("write_surface_csv: field/grid mismatch");
  auto out = detail::open_output(path);
  out << "x,y," << value_name << "\n";
  for (int j = 0; j < g.ny; ++j)
    for (int i = 0; i < g.nx; ++i)
      out << format_double(g.x[i]) << ',' << format_double(g.y[j]) << ','
          << format_double(f(i, j)) << "\n";
  if (!out) throw std::runtime_error("write failed: " + path.string());
}

// Loads a surface written by write_surface_csv; validates the header name,
// row count, and that coordinates match the grid centers bitwise.
inline Field load_surface_csv(const std::filesystem::path& path, const Grid& g,
                              const std::string& value_name = "") {
  auto in = detail::open_input(path);
  std::string header = detail::read_line(in, path.string());
  auto cols = detail::split_csv_line(header);
  if (cols.size() != 3 || cols[0] != "x" || cols[1] != "y")
    throw std::runtime_error("bad surface header in " + path.string());
  if (!value_name.empty() && cols[2] != value_name)
    throw std::runtime_error("expected value column '" + value_name + "' in " +
                             path.string());
  Field f(g.nx, g.ny);
  for (int j = 0; j < g.ny; ++j)
    for (int i = 0; i < g.nx; ++i) {
      std::string line = detail::read_line(in, path.string());
      auto row = detail::split_csv_line(line);
      if (row.size() != 3)
        throw std::runtime_error("bad surface row in " + path.string());
      if (parse_double(row[0]) != g.x[i] || parse_double(row[1]) != g.y[j])
        throw std::runtime_error("surface coordinates do not match grid in " +
                                 path.string());
      f(i, j) = parse_double(row[2]);
    }
  std::string tail;
  if (std::getline(in, tail) && !tail.empty())
    throw std::runtime_error("trailing data in " + path.string());
  return f;
}

// Per-type aggregate table "y,alpha,alpha_nash".
inline void write_alpha_csv(const std::filesystem::path& path, const Grid& g,
                            std::span<const double> alpha,
                            std::span<const double> alpha_nash) {
  if (static_cast<int>(alpha.size()) != g.ny ||
      static_cast<int>(alpha_nash.size()) != g.ny)
    throw std::invalid_argument("write_alpha_csv: size mismatch");
  auto out = detail::open_output(path);
  out << "y,alpha,alpha_nash\n";
  for (int j = 0; j < g.ny; ++j)
    out << format_double(g.y[j]) << ',' << format_double(alpha[j]) << ','
        << format_double(alpha_nash[j]) << "\n";
  if (!out) throw std::runtime_error("write failed: " + path.string());
}

struct AlphaTable {
  std::vector<double> y;
  std::vector<double> alpha;
  std::vector<double> alpha_nash;
};

inline AlphaTable load_alpha_csv(const std::filesystem::path& path) {
  auto in = detail::open_input(path);
  std::string header = detail::read_line(in, path.string());
  if (header != "y,alpha,alpha_nash")
    throw std::runtime_error("bad alpha header in " + path.string());
  AlphaTable t;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    auto row = detail::split_csv_line(line);
    if (row.size() != 3)
      throw std::runtime_error("bad alpha row in " + path.string());
    t.y.push_back(parse_double(row[0]));
    t.alpha.push_back(parse_double(row[1]));
    t.alpha_nash.push_back(parse_double(row[2]));
  }
  return t;
}

// Initial-measure input: same "x,y,p" layout as emitted measures. Returns
// the raw field; the caller renormalizes columns.
inline Field load_measure_csv(const std::filesystem::path& path, const Grid& g) {
  return load_surface_csv(path, g, "p");
}

// Sparse kernel table "l,j,w" with 1-based indices, j outer and l inner
// ascending; entries not listed are zero.
inline void write_kernel_csv(const std::filesystem::path& path,
                             const GraphonKernel& k, const Grid& g) {
  if (k.ny != g.ny)
    throw std::invalid_argument("write_kernel_csv: kernel/grid mismatch");
  auto out = detail::open_output(path);
  out << "l,j,w\n";
  for (int j = 0; j < g.ny; ++j)
    for (int l = 0; l < g.ny; ++l) {
      double v = k.w[detail::kernel_index(l, j, g.ny)];
      if (v != 0.0)
        out << (l + 1) << ',' << (j + 1) << ',' << format_double(v) << "\n";
    }
  if (!out) throw std::runtime_error("write failed: " + path.string());
}

inline GraphonKernel load_kernel_csv(const std::filesystem::path& path,
                                     const Grid& g, bool normalize) {
  auto in = detail::open_input(path);
  std::string header = detail::read_line(in, path.string());
  if (header != "l,j,w")
    throw std::runtime_error("bad kernel header in " + path.string());
  std::vector<double> w(static_cast<std::size_t>(g.ny) * g.ny, 0.0);
  std::vector<bool> seen(w.size(), false);
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    auto row = detail::split_csv_line(line);
    if (row.size() != 3)
      throw std::runtime_error("bad kernel row in " + path.string());
    long l = parse_long(row[0]);
    long j = parse_long(row[1]);
    if (l < 1 || l > g.ny || j < 1 || j > g.ny)
      throw std::runtime_error("kernel index out of range in " + path.string());
    std::size_t idx =
        detail::kernel_index(static_cast<int>(l - 1), static_cast<int>(j - 1), g.ny);
    if (seen[idx])
      throw std::runtime_error("duplicate kernel entry in " + path.string());
    seen[idx] = true;
    w[idx] = parse_double(row[2]);
  }
  return make_custom(std::move(w), g, normalize);
}

inline void write_text_file(const std::filesystem::path& path,
                            const std::string& text) {
  auto out = detail::open_output(path);
  out << text;
  if (!out) throw std::runtime_error("write failed: " + path.string());
}

}  // namespace glogit
