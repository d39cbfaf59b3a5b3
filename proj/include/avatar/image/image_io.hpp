#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "avatar/image/grid.hpp"

namespace avatar {

// 8-bit PNG. Gray and gray-alpha inputs are expanded to RGB, alpha is dropped.
RgbImage read_png(const std::filesystem::path& path);
void write_png(const std::filesystem::path& path, const RgbImage& image);

// Masks are 8-bit gray PNGs: 0 background, 255 foreground. Reading
// thresholds at 128 on the first channel.
BinaryMask read_mask_png(const std::filesystem::path& path);
void write_mask_png(const std::filesystem::path& path, const BinaryMask& mask);

/// Float grid binary format, shared by depth maps and flow fields.
///
///   offset  size  field
///   0       4     magic "FGRD"
///   4       4     width    (uint32, little-endian)
///   8       4     height   (uint32, little-endian)
///   12      4     channels (uint32, little-endian)
///   16      4*w*h*c  IEEE-754 binary32 little-endian, row-major, channels interleaved
///
/// Depth maps use one channel with +inf marking background pixels.
struct FloatGrid {
    int width = 0;
    int height = 0;
    int channels = 1;
    std::vector<float> values;
};

void write_float_grid(const std::filesystem::path& path, const FloatGrid& grid);
FloatGrid read_float_grid(const std::filesystem::path& path);

void write_depth(const std::filesystem::path& path, const DepthMap& depth);
DepthMap read_depth(const std::filesystem::path& path);

// Foreground depth normalized to [0, 255] (near = bright); background black.
void write_depth_png(const std::filesystem::path& path, const DepthMap& depth, double depth_sign);

}  // namespace avatar
