#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "sinit/diagnostics.hpp"
#include "sinit/matrix.hpp"

namespace sinit::cli {

/// 17 significant digits (exact round trip for doubles), '.' decimal point.
std::string format_real(double x);
/// Shortest text that reads back as x; used for parameter labels like alpha.
std::string format_short(double x);

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
};

/// Comma separated, header row first, '\n' line endings.
void write_csv(const std::filesystem::path& path, const CsvTable& table);
CsvTable read_csv(const std::filesystem::path& path);

/// One row per neuron, header w1..wn.
void write_matrix_csv(const std::filesystem::path& path, const Matrix& m);

/// Binary P5, maxval 255.
void write_pgm(const std::filesystem::path& path, const GrayImage& image);
GrayImage read_pgm(const std::filesystem::path& path);

void write_text(const std::filesystem::path& path, const std::string& text);

}  // namespace sinit::cli
