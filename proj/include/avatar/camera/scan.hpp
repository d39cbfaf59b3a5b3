#pragma once

#include <algorithm>
#include <cmath>

#include "avatar/geometry/mesh.hpp"

namespace avatar {

namespace detail {

// Edge function cross(b - a, p - a), always evaluated with the
// lexicographically smaller endpoint first so that two triangles sharing an
// edge get bit-identical magnitudes.
inline double edge_function(const Vec2& a, const Vec2& b, const Vec2& p) {
    const bool swap = (b.x() < a.x()) || (b.x() == a.x() && b.y() < a.y());
    const Vec2& s = swap ? b : a;
    const Vec2& e = swap ? a : b;
    const double v = (e.x() - s.x()) * (p.y() - s.y()) - (e.y() - s.y()) * (p.x() - s.x());
    return swap ? -v : v;
}

// Top-left style ownership for points exactly on an edge; `d` is the edge
// direction after orienting the triangle to positive area. Opposite
// directions always disagree, so a shared edge belongs to exactly one side.
inline bool owns_edge(const Vec2& d) { return d.y() < 0.0 || (d.y() == 0.0 && d.x() > 0.0); }

}  // namespace detail

/// Visits every pixel center (x + 0.5, y + 0.5) inside the 2D triangle
/// (p0, p1, p2) within [0, width) x [0, height), calling
/// `visit(x, y, b0, b1, b2)` with barycentric weights that sum to one.
/// Pixel centers on a shared edge are owned by exactly one triangle.
/// Zero-area triangles visit nothing. Returns the signed doubled area.
template <typename Visit>
double scan_triangle(const Vec2& p0, const Vec2& p1, const Vec2& p2, int width, int height, Visit&& visit) {
    const double area2 = detail::edge_function(p0, p1, p2);
    if (area2 == 0.0 || !std::isfinite(area2)) return 0.0;
    const double orient = area2 > 0.0 ? 1.0 : -1.0;

    const double min_x = std::min({p0.x(), p1.x(), p2.x()});
    const double max_x = std::max({p0.x(), p1.x(), p2.x()});
    const double min_y = std::min({p0.y(), p1.y(), p2.y()});
    const double max_y = std::max({p0.y(), p1.y(), p2.y()});
    const int x0 = std::max(0, static_cast<int>(std::ceil(min_x - 0.5)));
    const int x1 = std::min(width - 1, static_cast<int>(std::floor(max_x - 0.5)));
    const int y0 = std::max(0, static_cast<int>(std::ceil(min_y - 0.5)));
    const int y1 = std::min(height - 1, static_cast<int>(std::floor(max_y - 0.5)));
    if (x0 > x1 || y0 > y1) return area2;

    const bool own12 = detail::owns_edge(orient * (p2 - p1));
    const bool own20 = detail::owns_edge(orient * (p0 - p2));
    const bool own01 = detail::owns_edge(orient * (p1 - p0));

    for (int y = y0; y <= y1; ++y) {
        for (int x = x0; x <= x1; ++x) {
            const Vec2 p(x + 0.5, y + 0.5);
            const double e12 = orient * detail::edge_function(p1, p2, p);
            const double e20 = orient * detail::edge_function(p2, p0, p);
            const double e01 = orient * detail::edge_function(p0, p1, p);
            if (e12 < 0.0 || e20 < 0.0 || e01 < 0.0) continue;
            if ((e12 == 0.0 && !own12) || (e20 == 0.0 && !own20) || (e01 == 0.0 && !own01)) continue;
            const double inv = 1.0 / (orient * area2);
            visit(x, y, e12 * inv, e20 * inv, e01 * inv);
        }
    }
    return area2;
}

}  // namespace avatar
