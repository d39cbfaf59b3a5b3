#include "avatar/image/image_io.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>

#include <png.h>

namespace avatar {

namespace {

std::vector<std::uint8_t> read_png_bytes(const std::filesystem::path& path, png_uint_32 format, int& w, int& h) {
    png_image image;
    std::memset(&image, 0, sizeof(image));
    image.version = PNG_IMAGE_VERSION;
    if (!png_image_begin_read_from_file(&image, path.string().c_str())) {
        throw FormatError("cannot read PNG " + path.string() + ": " + image.message, 0);
    }
    image.format = format;
    std::vector<std::uint8_t> buffer(PNG_IMAGE_SIZE(image));
    if (!png_image_finish_read(&image, nullptr, buffer.data(), 0, nullptr)) {
        png_image_free(&image);
        throw FormatError("cannot decode PNG " + path.string() + ": " + image.message, 0);
    }
    w = static_cast<int>(image.width);
    h = static_cast<int>(image.height);
    return buffer;
}

void write_png_bytes(const std::filesystem::path& path, const std::vector<std::uint8_t>& bytes, int w, int h,
                     png_uint_32 format) {
    png_image image;
    std::memset(&image, 0, sizeof(image));
    image.version = PNG_IMAGE_VERSION;
    image.width = static_cast<png_uint_32>(w);
    image.height = static_cast<png_uint_32>(h);
    image.format = format;
    if (!png_image_write_to_file(&image, path.string().c_str(), 0, bytes.data(), 0, nullptr)) {
        throw Error("cannot write PNG " + path.string() + ": " + image.message);
    }
}

std::uint8_t to_byte(float v) {
    const float c = std::clamp(v, 0.0f, 1.0f);
    return static_cast<std::uint8_t>(std::lround(c * 255.0f));
}

void put_u32(std::ostream& out, std::uint32_t v) {
    const char b[4] = {static_cast<char>(v & 0xff), static_cast<char>((v >> 8) & 0xff),
                       static_cast<char>((v >> 16) & 0xff), static_cast<char>((v >> 24) & 0xff)};
    out.write(b, 4);
}

std::uint32_t get_u32(const unsigned char* p) {
    return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
           (static_cast<std::uint32_t>(p[2]) << 16) | (static_cast<std::uint32_t>(p[3]) << 24);
}

}  // namespace

RgbImage read_png(const std::filesystem::path& path) {
    int w = 0, h = 0;
    const auto bytes = read_png_bytes(path, PNG_FORMAT_RGB, w, h);
    RgbImage img(w, h, Rgb::Zero());
    for (std::size_t i = 0; i < img.size(); ++i) {
        img[i] = Rgb(bytes[3 * i] / 255.0f, bytes[3 * i + 1] / 255.0f, bytes[3 * i + 2] / 255.0f);
    }
    return img;
}

void write_png(const std::filesystem::path& path, const RgbImage& image) {
    std::vector<std::uint8_t> bytes(image.size() * 3);
    for (std::size_t i = 0; i < image.size(); ++i) {
        for (int c = 0; c < 3; ++c) bytes[3 * i + c] = to_byte(image[i][c]);
    }
    write_png_bytes(path, bytes, image.width(), image.height(), PNG_FORMAT_RGB);
}

BinaryMask read_mask_png(const std::filesystem::path& path) {
    int w = 0, h = 0;
    const auto bytes = read_png_bytes(path, PNG_FORMAT_GRAY, w, h);
    BinaryMask mask(w, h, 0);
    for (std::size_t i = 0; i < mask.size(); ++i) mask[i] = bytes[i] >= 128 ? 1 : 0;
    return mask;
}

void write_mask_png(const std::filesystem::path& path, const BinaryMask& mask) {
    std::vector<std::uint8_t> bytes(mask.size());
    for (std::size_t i = 0; i < mask.size(); ++i) bytes[i] = mask[i] ? 255 : 0;
    write_png_bytes(path, bytes, mask.width(), mask.height(), PNG_FORMAT_GRAY);
}

void write_float_grid(const std::filesystem::path& path, const FloatGrid& grid) {
    const std::size_t expected = static_cast<std::size_t>(grid.width) * grid.height * grid.channels;
    if (grid.values.size() != expected) throw ParameterError("float grid payload size mismatch");
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot write " + path.string());
    out.write("FGRD", 4);
    put_u32(out, static_cast<std::uint32_t>(grid.width));
    put_u32(out, static_cast<std::uint32_t>(grid.height));
    put_u32(out, static_cast<std::uint32_t>(grid.channels));
    for (float v : grid.values) put_u32(out, std::bit_cast<std::uint32_t>(v));
}

FloatGrid read_float_grid(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw FormatError("cannot open float grid " + path.string(), 0);
    std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    if (bytes.size() < 16 || std::memcmp(bytes.data(), "FGRD", 4) != 0) {
        throw FormatError("not a float grid file: " + path.string(), 0);
    }
    FloatGrid grid;
    grid.width = static_cast<int>(get_u32(bytes.data() + 4));
    grid.height = static_cast<int>(get_u32(bytes.data() + 8));
    grid.channels = static_cast<int>(get_u32(bytes.data() + 12));
    const std::size_t n = static_cast<std::size_t>(grid.width) * grid.height * grid.channels;
    if (bytes.size() != 16 + 4 * n) throw FormatError("float grid payload truncated: " + path.string(), 0);
    grid.values.resize(n);
    for (std::size_t i = 0; i < n; ++i) grid.values[i] = std::bit_cast<float>(get_u32(bytes.data() + 16 + 4 * i));
    return grid;
}

void write_depth(const std::filesystem::path& path, const DepthMap& depth) {
    FloatGrid grid{depth.width(), depth.height(), 1, {}};
    grid.values.resize(depth.values.size());
    for (std::size_t i = 0; i < depth.values.size(); ++i) grid.values[i] = static_cast<float>(depth.values[i]);
    write_float_grid(path, grid);
}

DepthMap read_depth(const std::filesystem::path& path) {
    const FloatGrid grid = read_float_grid(path);
    if (grid.channels != 1) throw FormatError("depth grid must have one channel", 0);
    DepthMap depth(grid.width, grid.height);
    for (std::size_t i = 0; i < grid.values.size(); ++i) {
        const float v = grid.values[i];
        depth.values[i] = std::isfinite(v) ? static_cast<double>(v) : kBackgroundDepth;
    }
    return depth;
}

void write_depth_png(const std::filesystem::path& path, const DepthMap& depth, double depth_sign) {
    double lo = kBackgroundDepth, hi = -kBackgroundDepth;
    for (double v : depth.values.data()) {
        if (!std::isfinite(v)) continue;
        lo = std::min(lo, depth_sign * v);
        hi = std::max(hi, depth_sign * v);
    }
    RgbImage img(depth.width(), depth.height(), Rgb::Zero());
    const double span = hi > lo ? hi - lo : 1.0;
    for (std::size_t i = 0; i < depth.values.size(); ++i) {
        const double v = depth.values[i];
        if (!std::isfinite(v)) continue;
        const float g = static_cast<float>(0.2 + 0.8 * (depth_sign * v - lo) / span);
        img[i] = Rgb(g, g, g);
    }
    write_png(path, img);
}

}  // namespace avatar
