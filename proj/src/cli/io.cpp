#include "sinit/cli/io.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "sinit/error.hpp"

namespace sinit::cli {

namespace {

std::ofstream open_for_write(const std::filesystem::path& path, std::ios::openmode mode = {}) {
  std::error_code ec;
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path(), ec);
  require(!ec, Errc::io, "cannot create directory " + path.parent_path().string());
  std::ofstream out(path, std::ios::out | std::ios::trunc | mode);
  require(static_cast<bool>(out), Errc::io, "cannot write " + path.string());
  return out;
}

void finish(std::ofstream& out, const std::filesystem::path& path) {
  out.flush();
  require(static_cast<bool>(out), Errc::io, "write failed for " + path.string());
}

void write_line(std::ostream& out, const std::vector<std::string>& cells) {
  for (std::size_t i = 0; i < cells.size(); ++i) {
    if (i) out << ',';
    out << cells[i];
  }
  out << '\n';
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> cells;
  std::string cell;
  std::istringstream in(line);
  while (std::getline(in, cell, ',')) cells.push_back(cell);
  if (!line.empty() && line.back() == ',') cells.emplace_back();
  return cells;
}

}  // namespace

std::string format_real(double x) {
  char buf[32];
  const int len = std::snprintf(buf, sizeof buf, "%.17g", x);
  return std::string(buf, static_cast<std::size_t>(len));
}

std::string format_short(double x) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, res.ptr);
}

void write_csv(const std::filesystem::path& path, const CsvTable& table) {
  auto out = open_for_write(path);
  write_line(out, table.header);
  for (const auto& row : table.rows) {
    require(row.size() == table.header.size(), Errc::shape_mismatch,
            "csv row width does not match header in " + path.string());
    write_line(out, row);
  }
  finish(out, path);
}

CsvTable read_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  require(static_cast<bool>(in), Errc::io, "cannot read " + path.string());
  CsvTable table;
  std::string line;
  require(static_cast<bool>(std::getline(in, line)), Errc::io, "empty csv " + path.string());
  table.header = split_csv_line(line);
  while (std::getline(in, line))
    if (!line.empty()) table.rows.push_back(split_csv_line(line));
  return table;
}

void write_matrix_csv(const std::filesystem::path& path, const Matrix& m) {
  CsvTable table;
  for (std::size_t c = 0; c < m.cols(); ++c) table.header.push_back("w" + std::to_string(c + 1));
  for (std::size_t r = 0; r < m.rows(); ++r) {
    std::vector<std::string> row;
    row.reserve(m.cols());
    for (double x : m.row(r)) row.push_back(format_real(x));
    table.rows.push_back(std::move(row));
  }
  write_csv(path, table);
}

void write_pgm(const std::filesystem::path& path, const GrayImage& image) {
  auto out = open_for_write(path, std::ios::binary);
  out << "P5\n" << image.width << ' ' << image.height << "\n255\n";
  out.write(reinterpret_cast<const char*>(image.pixels.data()),
            static_cast<std::streamsize>(image.pixels.size()));
  finish(out, path);
}

GrayImage read_pgm(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  require(static_cast<bool>(in), Errc::io, "cannot read " + path.string());
  std::string magic;
  GrayImage img;
  int maxval = 0;
  in >> magic >> img.width >> img.height >> maxval;
  require(magic == "P5" && maxval == 255 && static_cast<bool>(in), Errc::io,
          "not a binary 8-bit PGM: " + path.string());
  in.get();
  img.pixels.resize(img.width * img.height);
  in.read(reinterpret_cast<char*>(img.pixels.data()),
          static_cast<std::streamsize>(img.pixels.size()));
  require(static_cast<std::size_t>(in.gcount()) == img.pixels.size(), Errc::io,
          "truncated PGM: " + path.string());
  return img;
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  auto out = open_for_write(path);
  out << text;
  finish(out, path);
}

}  // namespace sinit::cli
