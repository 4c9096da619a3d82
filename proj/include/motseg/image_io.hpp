#pragma once

#include <cstdint>
#include <filesystem>

#include "motseg/image.hpp"

namespace motseg {

// 8-bit RGB PNG. Gray, palette and alpha inputs are converted to RGB on read.
Frame read_png(const std::filesystem::path& path);
void write_png(const std::filesystem::path& path, const Frame& frame);

// Binary PGM (P5, maxval 255). Masks are written as 0/255; on read any
// nonzero value is a set bit.
BinaryMask read_mask_pgm(const std::filesystem::path& path);
void write_mask_pgm(const std::filesystem::path& path, const BinaryMask& mask);

Raster<std::uint8_t> read_pgm(const std::filesystem::path& path);
void write_pgm(const std::filesystem::path& path, const Raster<std::uint8_t>& gray);

// 32-bit float raster: width and height as little-endian uint32, then
// width*height little-endian floats, row-major.
Raster<float> read_float_raster(const std::filesystem::path& path);
void write_float_raster(const std::filesystem::path& path, const Raster<float>& raster);

}  // namespace motseg
