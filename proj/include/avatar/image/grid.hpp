#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <vector>

#include <Eigen/Core>

#include "avatar/error.hpp"

namespace avatar {

/// Row-major 2D grid; `at(x, y)` addresses column x of row y.
template <typename T>
class Grid {
public:
    Grid() = default;
    Grid(int width, int height, const T& fill = T()) : width_(width), height_(height) {
        if (width < 0 || height < 0) throw ParameterError("negative grid size");
        data_.assign(static_cast<std::size_t>(width) * height, fill);
    }

    int width() const { return width_; }
    int height() const { return height_; }
    std::size_t size() const { return data_.size(); }
    bool empty() const { return data_.empty(); }
    bool in_bounds(int x, int y) const { return x >= 0 && y >= 0 && x < width_ && y < height_; }
    bool same_size(int w, int h) const { return w == width_ && h == height_; }
    template <typename U>
    bool same_size(const Grid<U>& other) const {
        return other.width() == width_ && other.height() == height_;
    }

    T& at(int x, int y) { return data_[index(x, y)]; }
    const T& at(int x, int y) const { return data_[index(x, y)]; }
    T& operator[](std::size_t i) { return data_[i]; }
    const T& operator[](std::size_t i) const { return data_[i]; }

    std::size_t index(int x, int y) const { return static_cast<std::size_t>(y) * width_ + x; }

    std::vector<T>& data() { return data_; }
    const std::vector<T>& data() const { return data_; }

    void fill(const T& value) { std::fill(data_.begin(), data_.end(), value); }

    friend bool operator==(const Grid& a, const Grid& b) {
        return a.width_ == b.width_ && a.height_ == b.height_ && a.data_ == b.data_;
    }

private:
    int width_ = 0;
    int height_ = 0;
    std::vector<T> data_;
};

using Rgb = Eigen::Vector3f;

/// Per-pixel boolean stored as 0/1 bytes.
using BinaryMask = Grid<std::uint8_t>;
using GrayImage = Grid<double>;
using RgbImage = Grid<Rgb>;

inline constexpr double kBackgroundDepth = std::numeric_limits<double>::infinity();

/// Camera-space depth (the z coordinate, meters). Background pixels hold
/// kBackgroundDepth; foreground pixels are finite.
struct DepthMap {
    Grid<double> values;

    DepthMap() = default;
    DepthMap(int width, int height) : values(width, height, kBackgroundDepth) {}

    int width() const { return values.width(); }
    int height() const { return values.height(); }
    bool is_foreground(int x, int y) const { return std::isfinite(values.at(x, y)); }
    BinaryMask foreground() const;
};

/// Per-pixel unit normals; `valid` marks pixels that carry one.
struct NormalMap {
    Grid<Eigen::Vector3d> normals;
    BinaryMask valid;

    NormalMap() = default;
    NormalMap(int width, int height) : normals(width, height, Eigen::Vector3d::Zero()), valid(width, height, 0) {}

    int width() const { return normals.width(); }
    int height() const { return normals.height(); }
};

std::size_t count_true(const BinaryMask& mask);

// Rec. 601 luma of an RGB image.
GrayImage luminance(const RgbImage& image);

BinaryMask mask_and(const BinaryMask& a, const BinaryMask& b);

// Shifts a grid by an integer offset; vacated cells take `fill`.
template <typename T>
Grid<T> shifted(const Grid<T>& g, int dx, int dy, const T& fill) {
    Grid<T> out(g.width(), g.height(), fill);
    for (int y = 0; y < g.height(); ++y) {
        for (int x = 0; x < g.width(); ++x) {
            const int sx = x - dx;
            const int sy = y - dy;
            if (g.in_bounds(sx, sy)) out.at(x, y) = g.at(sx, sy);
        }
    }
    return out;
}

}  // namespace avatar
