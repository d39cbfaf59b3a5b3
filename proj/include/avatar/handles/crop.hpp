#pragma once

#include <cmath>
#include <vector>

#include "avatar/error.hpp"
#include "avatar/geometry/mesh.hpp"
#include "avatar/image/grid.hpp"

namespace avatar {

/// Square window x window crops; the crop for pixel p covers columns
/// [round(p.x) - window/2, round(p.x) + window/2) and likewise rows. Cells
/// outside the image take `fill`. Throws ParameterError for odd or
/// non-positive windows.
template <typename T>
std::vector<Grid<T>> crop_windows(const Grid<T>& image, const std::vector<Vec2>& pixels, int window,
                                  const T& fill = T()) {
    if (window <= 0 || window % 2 != 0) throw ParameterError("crop window must be positive and even");
    std::vector<Grid<T>> out;
    out.reserve(pixels.size());
    for (const Vec2& p : pixels) {
        const int x0 = static_cast<int>(std::lround(p.x())) - window / 2;
        const int y0 = static_cast<int>(std::lround(p.y())) - window / 2;
        Grid<T> patch(window, window, fill);
        for (int y = 0; y < window; ++y) {
            for (int x = 0; x < window; ++x) {
                if (image.in_bounds(x0 + x, y0 + y)) patch.at(x, y) = image.at(x0 + x, y0 + y);
            }
        }
        out.push_back(std::move(patch));
    }
    return out;
}

}  // namespace avatar
