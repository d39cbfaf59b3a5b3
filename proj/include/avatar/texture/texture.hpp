#pragma once

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <type_traits>
#include <vector>

#include "avatar/camera/camera.hpp"
#include "avatar/camera/raster.hpp"
#include "avatar/error.hpp"
#include "avatar/geometry/mesh.hpp"
#include "avatar/image/grid.hpp"

namespace avatar {

/// Texel (x, y) has its center at UV ((x + 0.5) / W, (y + 0.5) / H), so the
/// continuous texel coordinate of a UV point is uv * size - 0.5 and integer
/// coordinates land on texel centers. Values are RGB in [0, 1].
using UVTexture = RgbImage;
using UVMask = BinaryMask;

inline constexpr int kDefaultTextureSize = 256;

inline Vec2 uv_to_texel(const Vec2& uv, int width, int height) {
    return Vec2(uv.x() * width - 0.5, uv.y() * height - 0.5);
}

namespace detail {
template <typename T>
struct WeightOf {
    using type = typename T::Scalar;
};
template <typename T>
    requires std::is_arithmetic_v<T>
struct WeightOf<T> {
    using type = T;
};
}  // namespace detail

/// Four-neighbor bilinear interpolation at a continuous grid position with
/// integers on cell centers. Throws BoundsError unless the position lies in
/// [0, W-1] x [0, H-1]. Integer positions return the stored value exactly.
template <typename T>
T bilinear_sample(const Grid<T>& grid, const Vec2& pos) {
    using W = typename detail::WeightOf<T>::type;
    const double x = pos.x(), y = pos.y();
    if (grid.empty() || !(x >= 0.0 && y >= 0.0 && x <= grid.width() - 1 && y <= grid.height() - 1)) {
        throw BoundsError("bilinear sample outside the grid");
    }
    const int x0 = std::min(static_cast<int>(std::floor(x)), grid.width() - 1);
    const int y0 = std::min(static_cast<int>(std::floor(y)), grid.height() - 1);
    const int x1 = std::min(x0 + 1, grid.width() - 1);
    const int y1 = std::min(y0 + 1, grid.height() - 1);
    const W fx = static_cast<W>(x - x0), fy = static_cast<W>(y - y0);
    // Lerp form: constant neighborhoods and integer positions are reproduced exactly.
    const T top = grid.at(x0, y0) + fx * (grid.at(x1, y0) - grid.at(x0, y0));
    const T bottom = grid.at(x0, y1) + fx * (grid.at(x1, y1) - grid.at(x0, y1));
    return top + fy * (bottom - top);
}

// Clamps a continuous position into [0, W-1] x [0, H-1].
Vec2 clamp_to_grid(const Vec2& pos, int width, int height);

struct TextureProjectionReport {
    int faces_projected = 0;
    int zero_area_faces = 0;  // visible faces skipped for a degenerate UV triangle
    int occluded_texels = 0;  // texels of visible faces hidden behind another surface
};

struct TextureProjection {
    UVTexture texture;
    UVMask mask;
    TextureProjectionReport report;
};

/// Rasterizes every visible face of `raster` in UV space. For each covered
/// texel the barycentric 3D point is projected and the image is sampled
/// bilinearly (pixel centers at +0.5). A texel whose pixel is owned by another
/// face lying more than `occlusion_tolerance` meters nearer is left unwritten.
/// The mask is true exactly at written texels. Throws AtlasError when the mesh
/// has no UVs and AlignmentError when the image does not match the camera.
TextureProjection project_visible_texture(const TriMesh& mesh, const WeakPerspectiveCamera& camera,
                                          const RgbImage& image, const RasterResult& raster,
                                          int texture_width = kDefaultTextureSize,
                                          int texture_height = kDefaultTextureSize,
                                          double occlusion_tolerance = 0.01);

/// Renders the mesh with a UV texture through the rasterizer: each foreground
/// pixel samples the texture bilinearly at its interpolated UV. Background
/// pixels take `background`. Throws AtlasError when the mesh has no UVs.
RgbImage render_textured(const TriMesh& mesh, const WeakPerspectiveCamera& camera, const UVTexture& texture,
                         const Rgb& background = Rgb::Zero());
RgbImage render_textured(const RasterResult& raster, const TriMesh& mesh, const UVTexture& texture,
                         const Rgb& background = Rgb::Zero());

}  // namespace avatar
