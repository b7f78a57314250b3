#pragma once

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "contour.hpp"
#include "diagnostics.hpp"
#include "grid.hpp"

namespace reconnect2d {

struct IoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

namespace fs = std::filesystem;

inline constexpr char snapshot_magic[4] = {'R', '2', 'D', 'F'};
inline constexpr std::uint32_t snapshot_version = 1;
inline constexpr std::size_t snapshot_header_bytes = 32;

namespace detail {

inline void put_u32(std::string& out, std::uint32_t v) {
  for (int b = 0; b < 4; ++b) out.push_back(static_cast<char>((v >> (8 * b)) & 0xffu));
}

inline void put_f64(std::string& out, double x) {
  const auto v = std::bit_cast<std::uint64_t>(x);
  for (int b = 0; b < 8; ++b) out.push_back(static_cast<char>((v >> (8 * b)) & 0xffu));
}

inline std::uint64_t get_le(const unsigned char* p, int bytes) {
  std::uint64_t v = 0;
  for (int b = bytes - 1; b >= 0; --b) v = (v << 8) | p[b];
  return v;
}

inline std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline void write_file(const fs::path& path, const std::string& bytes) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoError("write failed: " + path.string());
}

// Shortest text that reads back to the same double.
inline std::string exact(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

}  // namespace detail

// Little-endian header (magic, version, nx, ny, box, t) then nx*ny f64 values,
// row-major with x fastest.
inline std::string encode_snapshot(const ScalarField& f, double t) {
  std::string out(snapshot_magic, 4);
  detail::put_u32(out, snapshot_version);
  detail::put_u32(out, static_cast<std::uint32_t>(f.grid.n));
  detail::put_u32(out, static_cast<std::uint32_t>(f.grid.n));
  detail::put_f64(out, f.grid.box);
  detail::put_f64(out, t);
  out.reserve(out.size() + 8 * f.data.size());
  for (double v : f.data) detail::put_f64(out, v);
  return out;
}

struct Snapshot {
  ScalarField field;
  double t = 0.0;
};

inline Snapshot decode_snapshot(const std::string& bytes) {
  if (bytes.size() < snapshot_header_bytes || bytes.compare(0, 4, snapshot_magic, 4) != 0)
    throw IoError("snapshot: bad magic");
  const auto* p = reinterpret_cast<const unsigned char*>(bytes.data());
  const auto version = static_cast<std::uint32_t>(detail::get_le(p + 4, 4));
  if (version != snapshot_version) throw IoError("snapshot: unsupported version " + std::to_string(version));
  const auto nx = static_cast<std::uint32_t>(detail::get_le(p + 8, 4));
  const auto ny = static_cast<std::uint32_t>(detail::get_le(p + 12, 4));
  if (nx != ny) throw IoError("snapshot: only square grids are supported");
  const double box = std::bit_cast<double>(detail::get_le(p + 16, 8));
  const double t = std::bit_cast<double>(detail::get_le(p + 24, 8));
  const std::size_t count = static_cast<std::size_t>(nx) * ny;
  if (bytes.size() != snapshot_header_bytes + 8 * count) throw IoError("snapshot: size does not match header");
  ScalarField f(TorusGrid{static_cast<int>(nx), box});
  for (std::size_t k = 0; k < count; ++k)
    f.data[k] = std::bit_cast<double>(detail::get_le(p + snapshot_header_bytes + 8 * k, 8));
  return {std::move(f), t};
}

inline void write_snapshot(const fs::path& path, const ScalarField& f, double t) {
  detail::write_file(path, encode_snapshot(f, t));
}

inline Snapshot read_snapshot(const fs::path& path) { return decode_snapshot(detail::read_file(path)); }

inline void write_contour_csv(const fs::path& path, const PatchContour& c) {
  std::string out = "alpha,x,y\n";
  for (int j = 0; j < c.size(); ++j)
    out += detail::exact(node_alpha(j, c.size())) + "," + detail::exact(c.nodes[j].real()) + "," +
           detail::exact(c.nodes[j].imag()) + "\n";
  detail::write_file(path, out);
}

inline PatchContour read_contour_csv(const fs::path& path, int strength) {
  std::istringstream in(detail::read_file(path));
  std::string line;
  if (!std::getline(in, line) || line != "alpha,x,y") throw IoError(path.string() + ": bad contour header");
  PatchContour c{{}, strength};
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    double a, x, y;
    if (std::sscanf(line.c_str(), "%lf,%lf,%lf", &a, &x, &y) != 3) throw IoError(path.string() + ": bad row");
    c.nodes.emplace_back(x, y);
  }
  return c;
}

inline constexpr const char* diagnostics_header =
    "t,l1_plus,l2_plus,linf_plus,l1_minus,l2_minus,linf_minus,E1,E2,overlap,components_F,symmetry_defect";

inline std::string diagnostics_row(const DiagnosticsRecord& r) {
  using detail::exact;
  return exact(r.t) + "," + exact(r.l1_plus) + "," + exact(r.l2_plus) + "," + exact(r.linf_plus) + "," +
         exact(r.l1_minus) + "," + exact(r.l2_minus) + "," + exact(r.linf_minus) + "," + exact(r.E1) + "," +
         exact(r.E2) + "," + exact(r.overlap) + "," + std::to_string(r.components_F) + "," +
         exact(r.symmetry_defect);
}

inline std::vector<DiagnosticsRecord> read_diagnostics_csv(const fs::path& path) {
  std::istringstream in(detail::read_file(path));
  std::string line;
  if (!std::getline(in, line) || line != diagnostics_header) throw IoError(path.string() + ": bad diagnostics header");
  std::vector<DiagnosticsRecord> out;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    DiagnosticsRecord r;
    if (std::sscanf(line.c_str(), "%lf,%lf,%lf,%lf,%lf,%lf,%lf,%lf,%lf,%lf,%d,%lf", &r.t, &r.l1_plus, &r.l2_plus,
                    &r.linf_plus, &r.l1_minus, &r.l2_minus, &r.linf_minus, &r.E1, &r.E2, &r.overlap,
                    &r.components_F, &r.symmetry_defect) != 12)
      throw IoError(path.string() + ": bad row");
    out.push_back(r);
  }
  return out;
}

// Appends rows as they are produced so a partial run keeps its history.
class DiagnosticsWriter {
 public:
  explicit DiagnosticsWriter(const fs::path& path) : out_(path, std::ios::trunc) {
    if (!out_) throw IoError("cannot write " + path.string());
    out_ << diagnostics_header << "\n";
  }
  void add(const DiagnosticsRecord& r) {
    out_ << diagnostics_row(r) << "\n";
    out_.flush();
  }

 private:
  std::ofstream out_;
};

// Grayscale image, row 0 at the top.
struct Image {
  int width = 0, height = 0;
  std::vector<unsigned char> pixels;
};

// Linear map [-max|F|, max|F|] -> [0, 255], +x2 up.
inline Image heatmap(const ScalarField& f) {
  const int n = f.grid.n;
  const double m = max_abs(f.data);
  Image img{n, n, std::vector<unsigned char>(static_cast<std::size_t>(n) * n)};
  for (int iy = 0; iy < n; ++iy)
    for (int ix = 0; ix < n; ++ix) {
      const double u = m > 0.0 ? 0.5 * (f(ix, iy) / m + 1.0) : 0.5;
      const long v = std::lround(255.0 * std::clamp(u, 0.0, 1.0));
      img.pixels[static_cast<std::size_t>(n - 1 - iy) * n + ix] = static_cast<unsigned char>(v);
    }
  return img;
}

inline void write_pgm(const fs::path& path, const Image& img) {
  std::string out = "P5\n" + std::to_string(img.width) + " " + std::to_string(img.height) + "\n255\n";
  out.append(reinterpret_cast<const char*>(img.pixels.data()), img.pixels.size());
  detail::write_file(path, out);
}

inline Image read_pgm(const fs::path& path) {
  const std::string bytes = detail::read_file(path);
  std::istringstream in(bytes);
  std::string magic;
  int w = 0, h = 0, maxv = 0;
  in >> magic >> w >> h >> maxv;
  if (magic != "P5" || maxv != 255 || w <= 0 || h <= 0) throw IoError(path.string() + ": not an 8-bit P5 image");
  const auto start = static_cast<std::size_t>(in.tellg()) + 1;
  if (bytes.size() != start + static_cast<std::size_t>(w) * h) throw IoError(path.string() + ": truncated image");
  Image img{w, h, std::vector<unsigned char>(bytes.begin() + static_cast<std::ptrdiff_t>(start), bytes.end())};
  return img;
}

// Canonical momentum of a patch pair, (1_plus + 1_minus) / 2, rasterized on a
// square window around both contours with the contour nodes drawn in white.
inline Image contour_overlay(const PatchContour& plus, const PatchContour& minus, int size = 256) {
  BoundingBox bb = bounding_box(plus.nodes);
  const BoundingBox bm = bounding_box(minus.nodes);
  bb = {std::min(bb.x0, bm.x0), std::max(bb.x1, bm.x1), std::min(bb.y0, bm.y0), std::max(bb.y1, bm.y1)};
  const double span = 1.1 * std::max(bb.x1 - bb.x0, bb.y1 - bb.y0);
  const Point center(0.5 * (bb.x0 + bb.x1), 0.5 * (bb.y0 + bb.y1));
  const double h = span / size;
  Image img{size, size, std::vector<unsigned char>(static_cast<std::size_t>(size) * size)};
  for (int r = 0; r < size; ++r)
    for (int c = 0; c < size; ++c) {
      const Point z = center + Point((c + 0.5) * h - 0.5 * span, 0.5 * span - (r + 0.5) * h);
      const double F = 0.5 * (point_in_polygon(z, plus.nodes) + point_in_polygon(z, minus.nodes));
      img.pixels[static_cast<std::size_t>(r) * size + c] = static_cast<unsigned char>(std::lround(40.0 + 160.0 * F));
    }
  for (const auto* p : {&plus, &minus})
    for (auto z : p->nodes) {
      const auto c = static_cast<int>(std::floor((z.real() - center.real() + 0.5 * span) / h));
      const auto r = static_cast<int>(std::floor((center.imag() + 0.5 * span - z.imag()) / h));
      if (r >= 0 && r < size && c >= 0 && c < size) img.pixels[static_cast<std::size_t>(r) * size + c] = 255;
    }
  return img;
}

}  // namespace reconnect2d
