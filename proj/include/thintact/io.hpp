#pragma once

#include <filesystem>
#include <string>

#include "thintact/mat.hpp"

namespace thintact {

// "LTM1" matrix format: 8-byte magic "LTMAT1\n\0", u32le rows, u32le cols,
// then rows*cols IEEE-754 binary32 little-endian values, row-major.
void save_mat(const std::filesystem::path& path, const Mat& m);
Mat load_mat(const std::filesystem::path& path);

// Portable pixmaps, maxval 65535, big-endian samples. Values clamped to [0, 1].
void save_pgm(const std::filesystem::path& path, const Mat& m);
Mat load_pgm(const std::filesystem::path& path);
void save_ppm(const std::filesystem::path& path, const ImageRGB& img);
ImageRGB load_ppm(const std::filesystem::path& path);

std::string sha256_file(const std::filesystem::path& path);

}  // namespace thintact
