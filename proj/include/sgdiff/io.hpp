#pragma once

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "sgdiff/denoiser.hpp"
#include "sgdiff/errors.hpp"
#include "sgdiff/field.hpp"
#include "sgdiff/solver.hpp"

// Binary dataset (SGFD) and model (SGFM) formats, both little-endian and
// bit-exact on round trip, plus CSV and PGM helpers.
//
// SGFD: magic "SGFD" | version u16=1 | dtype u16 (1 = f64 LE) |
//       frame_count u32 | ny u32 | nx u32 | dt_record f64 | Lx f64 |
//       Ly f64 | Re f64 | payload (frame-major, row-major f64)
// SGFM: magic "SGFM" | version u16=1 | time_bins u32 | radial_bins u32 |
//       n u32 | Lx f64 | Ly f64 | data_scale f64 | gains (row-major f64)

namespace sgdiff::io {

namespace detail {

inline void put_u16(std::string& out, std::uint16_t v) {
  out.push_back(static_cast<char>(v & 0xff));
  out.push_back(static_cast<char>((v >> 8) & 0xff));
}

inline void put_u32(std::string& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

inline void put_f64(std::string& out, double v) {
  const auto bits = std::bit_cast<std::uint64_t>(v);
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<char>((bits >> (8 * i)) & 0xff));
}

class Reader {
 public:
  Reader(const std::string& bytes, const std::string& what) : bytes_(bytes), what_(what) {}

  std::size_t offset() const { return pos_; }
  std::size_t remaining() const { return bytes_.size() - pos_; }

  void expect_magic(const char* magic) {
    need(4, "magic");
    if (std::memcmp(bytes_.data() + pos_, magic, 4) != 0)
      throw FormatError(what_ + ": bad magic", pos_);
    pos_ += 4;
  }

  std::uint16_t u16() {
    need(2, "u16 field");
    std::uint16_t v = 0;
    for (int i = 0; i < 2; ++i)
      v |= static_cast<std::uint16_t>(static_cast<unsigned char>(bytes_[pos_ + i])) << (8 * i);
    pos_ += 2;
    return v;
  }

  std::uint32_t u32() {
    need(4, "u32 field");
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i)
      v |= static_cast<std::uint32_t>(static_cast<unsigned char>(bytes_[pos_ + i])) << (8 * i);
    pos_ += 4;
    return v;
  }

  double f64() {
    need(8, "f64 field");
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i)
      v |= static_cast<std::uint64_t>(static_cast<unsigned char>(bytes_[pos_ + i])) << (8 * i);
    pos_ += 8;
    return std::bit_cast<double>(v);
  }

 private:
  void need(std::size_t count, const char* field) {
    if (pos_ + count > bytes_.size())
      throw LengthError(what_ + ": truncated " + field + " at byte offset " +
                        std::to_string(pos_));
  }

  const std::string& bytes_;
  std::string what_;
  std::size_t pos_ = 0;
};

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline void write_file(const std::string& path, const std::string& bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open " + path + " for writing");
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw std::runtime_error("write to " + path + " failed");
}

}  // namespace detail

struct SgfdContents {
  std::vector<VorticityField> frames;
  double dt_record = 0.0;
  double Lx = 0.0;
  double Ly = 0.0;
  double Re = 0.0;
};

inline std::string encode_sgfd(const std::vector<Field>& frames, double dt_record, double Lx,
                               double Ly, double Re) {
  if (frames.empty()) throw std::invalid_argument("encode_sgfd: no frames");
  const int ny = frames.front().rows();
  const int nx = frames.front().cols();
  for (const Field& f : frames)
    if (f.rows() != ny || f.cols() != nx)
      throw std::invalid_argument("encode_sgfd: inconsistent frame shapes");

  std::string out;
  out.reserve(52 + frames.size() * frames.front().size() * 8);
  out += "SGFD";
  detail::put_u16(out, 1);  // version
  detail::put_u16(out, 1);  // dtype f64 little-endian
  detail::put_u32(out, static_cast<std::uint32_t>(frames.size()));
  detail::put_u32(out, static_cast<std::uint32_t>(ny));
  detail::put_u32(out, static_cast<std::uint32_t>(nx));
  detail::put_f64(out, dt_record);
  detail::put_f64(out, Lx);
  detail::put_f64(out, Ly);
  detail::put_f64(out, Re);
  for (const Field& f : frames)
    for (std::size_t i = 0; i < f.size(); ++i) detail::put_f64(out, f[i]);
  return out;
}

inline SgfdContents decode_sgfd(const std::string& bytes, const std::string& what = "SGFD") {
  detail::Reader r(bytes, what);
  r.expect_magic("SGFD");
  const std::size_t version_offset = r.offset();
  if (const auto version = r.u16(); version != 1)
    throw FormatError(what + ": unsupported version " + std::to_string(version), version_offset);
  const std::size_t dtype_offset = r.offset();
  if (const auto dtype = r.u16(); dtype != 1)
    throw FormatError(what + ": unsupported dtype " + std::to_string(dtype), dtype_offset);
  const std::uint32_t frame_count = r.u32();
  const std::uint32_t ny = r.u32();
  const std::uint32_t nx = r.u32();

  SgfdContents c;
  c.dt_record = r.f64();
  c.Lx = r.f64();
  c.Ly = r.f64();
  c.Re = r.f64();

  const std::size_t expected = static_cast<std::size_t>(frame_count) * ny * nx * 8;
  if (r.remaining() != expected)
    throw LengthError(what + ": payload holds " + std::to_string(r.remaining()) +
                      " bytes, header declares " + std::to_string(expected));

  c.frames.reserve(frame_count);
  for (std::uint32_t fi = 0; fi < frame_count; ++fi) {
    Field f(static_cast<int>(ny), static_cast<int>(nx));
    for (std::size_t i = 0; i < f.size(); ++i) f[i] = r.f64();
    c.frames.push_back(VorticityField{std::move(f), c.Lx, c.Ly, fi * c.dt_record});
  }
  return c;
}

inline void write_sgfd(const std::string& path, const std::vector<Field>& frames,
                       double dt_record, double Lx, double Ly, double Re) {
  detail::write_file(path, encode_sgfd(frames, dt_record, Lx, Ly, Re));
}

inline void write_sgfd(const std::string& path, const Trajectory& traj) {
  std::vector<Field> frames;
  frames.reserve(traj.frames.size());
  for (const auto& f : traj.frames) frames.push_back(f.data);
  write_sgfd(path, frames, traj.config.dt_record, traj.config.Lx, traj.config.Ly, traj.config.Re);
}

inline SgfdContents read_sgfd(const std::string& path) {
  return decode_sgfd(detail::read_file(path), path);
}

inline std::string encode_sgfm(const SpectralGainDenoiser& d) {
  std::string out;
  out += "SGFM";
  detail::put_u16(out, 1);
  detail::put_u32(out, static_cast<std::uint32_t>(d.time_bins()));
  detail::put_u32(out, static_cast<std::uint32_t>(d.radial_bins()));
  detail::put_u32(out, static_cast<std::uint32_t>(d.grid().n));
  detail::put_f64(out, d.grid().Lx);
  detail::put_f64(out, d.grid().Ly);
  detail::put_f64(out, d.data_scale());
  for (double g : d.gains()) detail::put_f64(out, g);
  return out;
}

inline SpectralGainDenoiser decode_sgfm(const std::string& bytes,
                                        const std::string& what = "SGFM") {
  detail::Reader r(bytes, what);
  r.expect_magic("SGFM");
  const std::size_t version_offset = r.offset();
  if (const auto version = r.u16(); version != 1)
    throw FormatError(what + ": unsupported version " + std::to_string(version), version_offset);
  const std::uint32_t time_bins = r.u32();
  const std::uint32_t radial_bins = r.u32();
  const std::uint32_t n = r.u32();
  const double Lx = r.f64();
  const double Ly = r.f64();
  const double data_scale = r.f64();

  const std::size_t expected = static_cast<std::size_t>(time_bins) * radial_bins * 8;
  if (r.remaining() != expected)
    throw LengthError(what + ": gains payload holds " + std::to_string(r.remaining()) +
                      " bytes, header declares " + std::to_string(expected));

  SpectralGainDenoiser d(wavenumber_grid(static_cast<int>(n), Lx, Ly),
                         static_cast<int>(time_bins), static_cast<int>(radial_bins));
  d.set_data_scale(data_scale);
  for (double& g : d.gains()) g = r.f64();
  return d;
}

inline void write_sgfm(const std::string& path, const SpectralGainDenoiser& d) {
  detail::write_file(path, encode_sgfm(d));
}

inline SpectralGainDenoiser read_sgfm(const std::string& path) {
  return decode_sgfm(detail::read_file(path), path);
}

/// Minimal CSV support for the report files: header plus rows of fields.
inline void write_csv(const std::string& path, const std::string& header,
                      const std::vector<std::string>& rows) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open " + path + " for writing");
  out << header << '\n';
  for (const auto& row : rows) out << row << '\n';
}

inline std::vector<std::string> split_csv_row(const std::string& line) {
  std::vector<std::string> fields;
  std::string cur;
  for (char ch : line) {
    if (ch == ',') {
      fields.push_back(cur);
      cur.clear();
    } else {
      cur.push_back(ch);
    }
  }
  fields.push_back(cur);
  return fields;
}

struct CsvTable {
  std::vector<std::string> columns;
  std::vector<std::vector<std::string>> rows;

  int column(const std::string& name) const {
    for (std::size_t i = 0; i < columns.size(); ++i)
      if (columns[i] == name) return static_cast<int>(i);
    throw std::invalid_argument("CsvTable: no column " + name);
  }
};

inline CsvTable read_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  CsvTable table;
  std::string line;
  if (std::getline(in, line)) table.columns = split_csv_row(line);
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    table.rows.push_back(split_csv_row(line));
  }
  return table;
}

/// 8-bit binary PGM, min/max normalized per frame.
inline void write_pgm(const std::string& path, const Field& f) {
  const double lo = field_min(f), hi = field_max(f);
  const double scale = hi > lo ? 255.0 / (hi - lo) : 0.0;
  std::string bytes;
  bytes.reserve(f.size());
  for (int iy = 0; iy < f.rows(); ++iy)
    for (int ix = 0; ix < f.cols(); ++ix)
      bytes.push_back(static_cast<char>(static_cast<int>((f(iy, ix) - lo) * scale + 0.5)));
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open " + path + " for writing");
  out << "P5\n" << f.cols() << ' ' << f.rows() << "\n255\n";
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
}

}  // namespace sgdiff::io
