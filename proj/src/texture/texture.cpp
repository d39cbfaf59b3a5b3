#include "avatar/texture/texture.hpp"

#include <algorithm>

#include "avatar/camera/scan.hpp"

namespace avatar {

Vec2 clamp_to_grid(const Vec2& pos, int width, int height) {
    return Vec2(std::clamp(pos.x(), 0.0, static_cast<double>(width - 1)),
                std::clamp(pos.y(), 0.0, static_cast<double>(height - 1)));
}

namespace {

std::array<Vec2, 3> texel_corners(const FaceUV& uv, int w, int h) {
    return {Vec2(uv[0].x() * w, uv[0].y() * h), Vec2(uv[1].x() * w, uv[1].y() * h),
            Vec2(uv[2].x() * w, uv[2].y() * h)};
}

}  // namespace

TextureProjection project_visible_texture(const TriMesh& mesh, const WeakPerspectiveCamera& camera,
                                          const RgbImage& image, const RasterResult& raster, int texture_width,
                                          int texture_height, double occlusion_tolerance) {
    if (!mesh.has_uvs()) throw AtlasError("texture projection needs a UV atlas");
    if (texture_width <= 0 || texture_height <= 0) throw ParameterError("texture size must be positive");
    if (!image.same_size(camera.width, camera.height) || !raster.face_index.same_size(image)) {
        throw AlignmentError("image, camera and raster sizes differ");
    }
    if (raster.face_visible.size() != mesh.faces.size()) throw AlignmentError("raster belongs to another mesh");

    TextureProjection out;
    out.texture = UVTexture(texture_width, texture_height, Rgb::Zero());
    out.mask = UVMask(texture_width, texture_height, 0);
    const double sign = camera.depth_sign;
    for (int f = 0; f < mesh.face_count(); ++f) {
        if (!raster.face_visible[f]) continue;
        const auto c = texel_corners(mesh.uvs[f], texture_width, texture_height);
        const Vec3& p0 = mesh.vertices[mesh.faces[f][0]];
        const Vec3& p1 = mesh.vertices[mesh.faces[f][1]];
        const Vec3& p2 = mesh.vertices[mesh.faces[f][2]];
        const double area = scan_triangle(c[0], c[1], c[2], texture_width, texture_height,
                                          [&](int x, int y, double b0, double b1, double b2) {
                                              const Vec3 p = b0 * p0 + b1 * p1 + b2 * p2;
                                              const Vec2 q = camera.project(p);
                                              const int px = static_cast<int>(std::floor(q.x()));
                                              const int py = static_cast<int>(std::floor(q.y()));
                                              if (raster.face_index.in_bounds(px, py)) {
                                                  const int owner = raster.face_index.at(px, py);
                                                  if (owner >= 0 && owner != f &&
                                                      sign * (raster.depth.values.at(px, py) - p.z()) >
                                                          occlusion_tolerance) {
                                                      ++out.report.occluded_texels;
                                                      return;
                                                  }
                                              }
                                              const Vec2 s = clamp_to_grid(q - Vec2(0.5, 0.5), image.width(),
                                                                           image.height());
                                              out.texture.at(x, y) = bilinear_sample(image, s);
                                              out.mask.at(x, y) = 1;
                                          });
        if (area == 0.0) ++out.report.zero_area_faces;
        else ++out.report.faces_projected;
    }
    return out;
}

RgbImage render_textured(const RasterResult& raster, const TriMesh& mesh, const UVTexture& texture,
                         const Rgb& background) {
    if (!mesh.has_uvs()) throw AtlasError("textured rendering needs a UV atlas");
    RgbImage out(raster.face_index.width(), raster.face_index.height(), background);
    for (std::size_t i = 0; i < out.size(); ++i) {
        const int f = raster.face_index[i];
        if (f < 0) continue;
        const Eigen::Vector3d& b = raster.barycentric[i];
        const FaceUV& uv = mesh.uvs[f];
        const Vec2 u = b[0] * uv[0] + b[1] * uv[1] + b[2] * uv[2];
        out[i] = bilinear_sample(texture, clamp_to_grid(uv_to_texel(u, texture.width(), texture.height()),
                                                        texture.width(), texture.height()));
    }
    return out;
}

RgbImage render_textured(const TriMesh& mesh, const WeakPerspectiveCamera& camera, const UVTexture& texture,
                         const Rgb& background) {
    return render_textured(rasterize(camera, mesh), mesh, texture, background);
}

}  // namespace avatar
