#pragma once

#include <filesystem>

#include "avatar/geometry/mesh.hpp"

namespace avatar {

/// Weak-perspective (scaled orthographic) camera.
///
/// A point (x, y, z) lands at pixel s*(x, y) + t regardless of depth.
/// Pixel (i, j) covers [i, i+1) x [j, j+1); its center is (i + 0.5, j + 0.5).
/// `depth_sign` picks the z direction that faces the camera: a surface with
/// normal (0, 0, depth_sign) is front-facing, and the nearer of two points is
/// the one with the larger depth_sign * z.
struct WeakPerspectiveCamera {
    double scale = 1.0;
    Vec2 translation = Vec2::Zero();
    int width = 1;
    int height = 1;
    int depth_sign = -1;

    // Throws ParameterError unless scale > 0, sizes > 0 and depth_sign is +-1.
    void validate() const;

    Vec2 project(const Vec3& p) const { return scale * p.head<2>() + translation; }

    // Image-plane image of a 3D direction (no translation).
    Vec2 project_direction(const Vec3& d) const { return scale * d.head<2>(); }

    double meters_per_pixel() const { return 1.0 / scale; }

    // Unit vector pointing from the scene toward the camera.
    Vec3 view_vector() const { return Vec3(0.0, 0.0, static_cast<double>(depth_sign)); }

    WeakPerspectiveCamera shifted(double dx, double dy) const {
        WeakPerspectiveCamera c = *this;
        c.translation += Vec2(dx, dy);
        return c;
    }
};

inline Vec2 project(const WeakPerspectiveCamera& camera, const Vec3& point) { return camera.project(point); }

/// Chooses s and t so the x/y extent of `box` fills the frame minus a
/// `margin` fraction on every side, centered.
WeakPerspectiveCamera fit_camera(const Bounds3& box, int width, int height, double margin = 0.05,
                                 int depth_sign = -1);

// {"scale": s, "translation": [tx, ty], "image_size": [w, h], "depth_sign": -1}
void save_camera(const std::filesystem::path& path, const WeakPerspectiveCamera& camera);
WeakPerspectiveCamera load_camera(const std::filesystem::path& path);

}  // namespace avatar
