#include "avatar/pipeline/synthetic.hpp"

#include <cmath>
#include <fstream>
#include <numbers>

#include "avatar/camera/raster.hpp"
#include "avatar/deform/laplacian.hpp"
#include "avatar/error.hpp"
#include "avatar/geometry/obj_io.hpp"
#include "avatar/image/image_io.hpp"
#include "avatar/random.hpp"

namespace avatar {

std::vector<ViewAngles> view_grid() {
    std::vector<ViewAngles> out;
    for (double elevation : {-10.0, 0.0, 10.0}) {
        for (int a = 0; a <= 340; a += 20) out.push_back({static_cast<double>(a), elevation});
    }
    return out;
}

TriMesh rotate_view(const TriMesh& mesh, const ViewAngles& view, const Vec3& center) {
    const double deg = std::numbers::pi / 180.0;
    const Mat3 r = (Eigen::AngleAxisd(view.elevation_deg * deg, Vec3::UnitX()) *
                    Eigen::AngleAxisd(view.azimuth_deg * deg, Vec3::UnitY()))
                       .toRotationMatrix();
    TriMesh out = mesh;
    for (auto& v : out.vertices) v = center + r * (v - center);
    return out;
}

namespace {

TriMesh deform_template(const TriMesh& mesh, const JointHandleSet& handles, const std::vector<int>& anchors,
                        const DeformSpec& spec, Rng& rng) {
    if (spec.joint_magnitude < 0.0 || spec.shape_magnitude < 0.0 || spec.shape_controls < 0) {
        throw ParameterError("deform magnitudes and control count must be nonnegative");
    }
    DeformProblem problem{mesh, {}, std::nullopt};
    for (int j = 0; j < handles.size(); ++j) {
        const Vec3 offset(rng.normal(), rng.normal(), rng.normal());
        for (int v : handles.vertices[j]) {
            problem.constraints.push_back(
                HandleConstraint::at_position(v, mesh.vertices[v] + spec.joint_magnitude * offset, 1.0));
        }
    }
    if (spec.shape_controls > 0 && anchors.empty()) throw ParameterError("shape controls need anchors");
    const auto normals = vertex_normals(mesh);
    for (int k = 0; k < spec.shape_controls; ++k) {
        const int v = anchors[rng.index(anchors.size())];
        const double s = spec.shape_magnitude * rng.normal();
        problem.constraints.push_back(HandleConstraint::at_position(v, mesh.vertices[v] + s * normals[v], 1.0));
    }
    if (spec.joint_magnitude == 0.0 && spec.shape_magnitude == 0.0) return mesh;
    return solve_deform(problem);
}

// Smooth seeded color pattern over the UV square, values in [0.25, 0.9].
UVTexture make_albedo_texture(Rng& rng, int size) {
    const double tau = 2.0 * std::numbers::pi;
    std::array<double, 3> fu, fv, phase;
    for (int c = 0; c < 3; ++c) {
        fu[c] = 1.0 + static_cast<double>(rng.index(4));
        fv[c] = 1.0 + static_cast<double>(rng.index(4));
        phase[c] = rng.uniform(0.0, tau);
    }
    UVTexture tex(size, size, Rgb::Zero());
    for (int y = 0; y < size; ++y) {
        for (int x = 0; x < size; ++x) {
            const double u = (x + 0.5) / size, v = (y + 0.5) / size;
            Rgb c;
            for (int k = 0; k < 3; ++k) {
                c[k] = static_cast<float>(0.575 + 0.325 * std::sin(tau * fu[k] * u + phase[k]) * std::cos(tau * fv[k] * v));
            }
            tex.at(x, y) = c;
        }
    }
    return tex;
}

SHLighting make_lighting(Rng& rng, int depth_sign) {
    SHLighting l;
    l.coeffs.setZero();
    l.coeffs[0] = 2.0;
    l.coeffs[2] = 0.8 * depth_sign;  // brightest toward the camera
    for (int k = 1; k < 9; ++k) l.coeffs[k] += 0.15 * rng.normal();
    return l;
}

}  // namespace

SyntheticCase make_synthetic_case(const BodyTemplate& body, const JointHandleSet& handles,
                                  const std::vector<int>& anchors, const DeformSpec& spec, const ViewAngles& view,
                                  std::uint64_t seed, int image_size) {
    if (image_size < 16) throw ParameterError("image size must be at least 16");
    Rng rng(seed);
    SyntheticCase c;
    c.view = view;
    const Vec3 center = vertex_centroid(body.mesh);
    const TriMesh deformed = deform_template(body.mesh, handles, anchors, spec, rng);
    c.initial = rotate_view(body.mesh, view, center);
    c.gt_mesh = rotate_view(deformed, view, center);
    c.camera = fit_camera(bounding_box(c.gt_mesh), image_size, image_size, 0.1);
    c.albedo_texture = make_albedo_texture(rng, kDefaultTextureSize);
    c.lighting = make_lighting(rng, c.camera.depth_sign);

    const RasterResult raster = rasterize(c.camera, c.gt_mesh);
    c.silhouette = raster.mask;
    c.depth = raster.depth;
    const NormalMap normals = render_normal_map(raster, c.gt_mesh);
    const RgbImage albedo = render_textured(raster, c.gt_mesh, c.albedo_texture);
    c.image = RgbImage(image_size, image_size, Rgb::Zero());
    for (std::size_t i = 0; i < c.image.size(); ++i) {
        if (raster.face_index[i] < 0 || !normals.valid[i]) continue;
        const double shade = std::max(0.0, c.lighting.shade(normals.normals[i]));
        c.image[i] = (albedo[i] * static_cast<float>(shade)).cwiseMin(1.0f);
    }
    c.joints = joint_annotations(c.gt_mesh, handles, c.camera);
    return c;
}

void save_synthetic_case(const std::filesystem::path& dir, const SyntheticCase& c) {
    std::filesystem::create_directories(dir);
    save_mesh(dir / "initial.obj", c.initial);
    save_mesh(dir / "gt.obj", c.gt_mesh);
    save_camera(dir / "camera.json", c.camera);
    write_mask_png(dir / "silhouette.png", c.silhouette);
    write_depth(dir / "depth.bin", c.depth);
    write_png(dir / "image.png", c.image);
    write_png(dir / "albedo.png", c.albedo_texture);
    save_joint_annotations(dir / "joints.json", c.joints);
    save_lighting(dir / "lighting.json", c.lighting);
    std::ofstream cfg(dir / "case.cfg");
    if (!cfg) throw Error("cannot write " + (dir / "case.cfg").string());
    cfg << "# synthetic case, azimuth " << c.view.azimuth_deg << " elevation " << c.view.elevation_deg << "\n"
        << "mesh = \"initial.obj\"\n"
        << "camera = \"camera.json\"\n"
        << "image = \"image.png\"\n"
        << "joints = \"joints.json\"\n"
        << "silhouette = \"silhouette.png\"\n"
        << "gt-mesh = \"gt.obj\"\n"
        << "output-dir = \"" << dir.filename().string() << "\"\n";
}

std::vector<SyntheticCase> make_harness_suite(const BodyTemplate& body, const JointHandleSet& handles,
                                              const std::vector<int>& anchors, int count, std::uint64_t seed,
                                              const DeformSpec& spec, int image_size) {
    if (count < 0) throw ParameterError("case count must be nonnegative");
    const auto grid = view_grid();
    Rng rng(seed);
    std::vector<SyntheticCase> out;
    out.reserve(count);
    for (int i = 0; i < count; ++i) {
        const ViewAngles view = grid[rng.index(grid.size())];
        out.push_back(make_synthetic_case(body, handles, anchors, spec, view, seed * 1000 + i, image_size));
    }
    return out;
}

namespace {

// Cyclic axis permutation k (a proper rotation) that moves axis k onto z.
Vec3 permute_to_z(const Vec3& p, int k) {
    if (k == 0) return Vec3(p.y(), p.z(), p.x());
    if (k == 1) return Vec3(p.z(), p.x(), p.y());
    return p;
}

}  // namespace

TriMesh remove_inner_surface(const TriMesh& mesh, int resolution) {
    if (resolution < 8) throw ParameterError("visibility resolution must be at least 8");
    std::vector<std::uint8_t> keep(mesh.faces.size(), 0);
    for (int axis = 0; axis < 3; ++axis) {
        TriMesh view = mesh;
        for (auto& v : view.vertices) v = permute_to_z(v, axis);
        for (int sign : {-1, 1}) {
            const auto cam = fit_camera(bounding_box(view), resolution, resolution, 0.02, sign);
            const auto vis = rasterize(cam, view).face_visible;
            for (std::size_t f = 0; f < keep.size(); ++f) keep[f] |= vis[f];
        }
    }
    std::vector<int> remap(mesh.vertices.size(), -1);
    for (std::size_t f = 0; f < keep.size(); ++f) {
        if (!keep[f]) continue;
        for (int v : mesh.faces[f]) remap[v] = 0;
    }
    TriMesh out;
    for (std::size_t v = 0; v < remap.size(); ++v) {
        if (remap[v] < 0) continue;
        remap[v] = out.vertex_count();
        out.vertices.push_back(mesh.vertices[v]);
        if (mesh.has_tags()) out.vertex_tags.push_back(mesh.vertex_tags[v]);
    }
    for (std::size_t f = 0; f < keep.size(); ++f) {
        if (!keep[f]) continue;
        const Face& face = mesh.faces[f];
        out.faces.push_back({remap[face[0]], remap[face[1]], remap[face[2]]});
        if (mesh.has_uvs()) out.uvs.push_back(mesh.uvs[f]);
    }
    return out;
}

}  // namespace avatar
