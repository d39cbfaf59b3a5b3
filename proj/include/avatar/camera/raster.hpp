#pragma once

#include <cstdint>
#include <vector>

#include "avatar/camera/camera.hpp"
#include "avatar/geometry/mesh.hpp"
#include "avatar/image/grid.hpp"

namespace avatar {

/// Output of the z-buffered rasterizer.
///
/// `mask` is the silhouette (pixels covered by any face, front or back).
/// `face_index` holds the nearest face per pixel (-1 on background) and
/// `barycentric` its weights at the pixel center. A face is visible when it is
/// front-facing and owns at least one pixel of `face_index`.
struct RasterResult {
    BinaryMask mask;
    DepthMap depth;
    Grid<std::int32_t> face_index;
    Grid<Eigen::Vector3d> barycentric;
    std::vector<std::uint8_t> face_visible;
    bool empty_render = false;  // nothing landed in frame; all outputs are valid but empty
};

/// Deterministic pixel-center rasterization with a z-buffer. The nearer
/// fragment (larger depth_sign * z) wins; equal depths keep the lower face index.
RasterResult rasterize(const WeakPerspectiveCamera& camera, const TriMesh& mesh);

// Vertex visible iff any incident face is visible.
std::vector<std::uint8_t> vertex_visibility(const TriMesh& mesh, const std::vector<std::uint8_t>& face_visible);

// True when the face normal points toward the camera.
std::vector<std::uint8_t> front_facing(const WeakPerspectiveCamera& camera, const TriMesh& mesh);

/// Interpolated, renormalized vertex normals at every foreground pixel.
NormalMap render_normal_map(const WeakPerspectiveCamera& camera, const TriMesh& mesh);

// Same, reusing an existing raster of `mesh`.
NormalMap render_normal_map(const RasterResult& raster, const TriMesh& mesh);

/// Normals of the depth surface z(x, y) from central differences (one-sided at
/// the foreground boundary). Pixel steps convert to meters through 1/s. Pixels
/// lacking a foreground neighbor along x or along y stay invalid.
NormalMap depth_to_normals(const DepthMap& depth, const WeakPerspectiveCamera& camera);

// Angle in degrees between two unit vectors.
double angle_deg(const Vec3& a, const Vec3& b);

}  // namespace avatar
