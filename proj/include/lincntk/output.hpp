#pragma once

#include <lincntk/linalg.hpp>

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

namespace lincntk {

/// %.17g: round-trips every double.
std::string format_g17(double v);

/// Writes to `path.tmp` then renames over `path`.
void write_file_atomic(const std::filesystem::path& path, const std::string& contents);

/// Min-max scaling to 0..255 (rounded). A vector whose range is below
/// 1e-9 of its largest magnitude counts as constant and maps to 128.
std::vector<std::uint8_t> to_gray(const Vector& v);

/// Binary PGM: "P5\n{w} {h}\n255\n" then w*h bytes.
std::string pgm_bytes(const std::vector<std::uint8_t>& pixels, std::size_t width, std::size_t height);

/// Inverse of write_matrix_csv: comma-separated rows, no header.
Matrix read_matrix_csv(std::istream& in);
Matrix read_matrix_csv(const std::filesystem::path& path);

}  // namespace lincntk
