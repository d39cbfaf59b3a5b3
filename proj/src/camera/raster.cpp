#include "avatar/camera/raster.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "avatar/camera/scan.hpp"

namespace avatar {

std::vector<std::uint8_t> front_facing(const WeakPerspectiveCamera& camera, const TriMesh& mesh) {
    const auto normals = face_area_normals(mesh);
    std::vector<std::uint8_t> out(normals.size(), 0);
    for (std::size_t f = 0; f < normals.size(); ++f) out[f] = camera.depth_sign * normals[f].z() > 0.0 ? 1 : 0;
    return out;
}

RasterResult rasterize(const WeakPerspectiveCamera& camera, const TriMesh& mesh) {
    camera.validate();
    const int w = camera.width;
    const int h = camera.height;
    RasterResult r;
    r.mask = BinaryMask(w, h, 0);
    r.depth = DepthMap(w, h);
    r.face_index = Grid<std::int32_t>(w, h, -1);
    r.barycentric = Grid<Eigen::Vector3d>(w, h, Eigen::Vector3d::Zero());
    r.face_visible.assign(mesh.faces.size(), 0);

    std::vector<Vec2> projected(mesh.vertices.size());
    for (std::size_t v = 0; v < mesh.vertices.size(); ++v) projected[v] = camera.project(mesh.vertices[v]);

    const double sign = camera.depth_sign;
    Grid<double> key(w, h, -std::numeric_limits<double>::infinity());
    for (int f = 0; f < mesh.face_count(); ++f) {
        const Face& face = mesh.faces[f];
        const double z0 = mesh.vertices[face[0]].z();
        const double z1 = mesh.vertices[face[1]].z();
        const double z2 = mesh.vertices[face[2]].z();
        scan_triangle(projected[face[0]], projected[face[1]], projected[face[2]], w, h,
                      [&](int x, int y, double b0, double b1, double b2) {
                          const double z = b0 * z0 + b1 * z1 + b2 * z2;
                          r.mask.at(x, y) = 1;
                          if (sign * z > key.at(x, y)) {
                              key.at(x, y) = sign * z;
                              r.depth.values.at(x, y) = z;
                              r.face_index.at(x, y) = f;
                              r.barycentric.at(x, y) = Eigen::Vector3d(b0, b1, b2);
                          }
                      });
    }

    const auto facing = front_facing(camera, mesh);
    for (std::int32_t f : r.face_index.data()) {
        if (f >= 0 && facing[f]) r.face_visible[f] = 1;
    }
    r.empty_render = count_true(r.mask) == 0;
    return r;
}

NormalMap render_normal_map(const RasterResult& raster, const TriMesh& mesh) {
    const int w = raster.mask.width();
    const int h = raster.mask.height();
    NormalMap out(w, h);
    if (raster.empty_render) return out;
    const auto vn = vertex_normals(mesh);
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            const int f = raster.face_index.at(x, y);
            if (f < 0) continue;
            const Face& face = mesh.faces[f];
            const Eigen::Vector3d& b = raster.barycentric.at(x, y);
            Vec3 n = b[0] * vn[face[0]] + b[1] * vn[face[1]] + b[2] * vn[face[2]];
            const double len = n.norm();
            if (!(len > 0.0)) continue;
            out.normals.at(x, y) = n / len;
            out.valid.at(x, y) = 1;
        }
    }
    return out;
}

NormalMap render_normal_map(const WeakPerspectiveCamera& camera, const TriMesh& mesh) {
    return render_normal_map(rasterize(camera, mesh), mesh);
}

NormalMap depth_to_normals(const DepthMap& depth, const WeakPerspectiveCamera& camera) {
    const int w = depth.width();
    const int h = depth.height();
    NormalMap out(w, h);
    const double s = camera.scale;
    const double sign = camera.depth_sign;

    // Derivative of depth per pixel step along one axis; false when undefined.
    auto derivative = [&](int x, int y, int dx, int dy, double& g) {
        const bool fwd = depth.values.in_bounds(x + dx, y + dy) && depth.is_foreground(x + dx, y + dy);
        const bool back = depth.values.in_bounds(x - dx, y - dy) && depth.is_foreground(x - dx, y - dy);
        const double c = depth.values.at(x, y);
        if (fwd && back) {
            g = 0.5 * (depth.values.at(x + dx, y + dy) - depth.values.at(x - dx, y - dy));
        } else if (fwd) {
            g = depth.values.at(x + dx, y + dy) - c;
        } else if (back) {
            g = c - depth.values.at(x - dx, y - dy);
        } else {
            return false;
        }
        return true;
    };

    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            if (!depth.is_foreground(x, y)) continue;
            double gx = 0.0, gy = 0.0;
            if (!derivative(x, y, 1, 0, gx) || !derivative(x, y, 0, 1, gy)) continue;
            const Vec3 m(-sign * gx * s, -sign * gy * s, sign);
            out.normals.at(x, y) = m.normalized();
            out.valid.at(x, y) = 1;
        }
    }
    return out;
}

double angle_deg(const Vec3& a, const Vec3& b) {
    const double c = std::clamp(a.dot(b) / (a.norm() * b.norm()), -1.0, 1.0);
    return std::acos(c) * 180.0 / std::numbers::pi;
}

std::vector<std::uint8_t> vertex_visibility(const TriMesh& mesh, const std::vector<std::uint8_t>& face_visible) {
    if (face_visible.size() != mesh.faces.size()) throw ParameterError("one visibility flag per face required");
    std::vector<std::uint8_t> out(mesh.vertex_count(), 0);
    for (int f = 0; f < mesh.face_count(); ++f) {
        if (!face_visible[f]) continue;
        for (int v : mesh.faces[f]) out[v] = 1;
    }
    return out;
}

}  // namespace avatar
