#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include "avatar/camera/camera.hpp"
#include "avatar/geometry/body_template.hpp"
#include "avatar/handles/anchors.hpp"
#include "avatar/handles/joints.hpp"
#include "avatar/image/grid.hpp"
#include "avatar/shading/sh.hpp"
#include "avatar/texture/texture.hpp"

namespace avatar {

struct ViewAngles {
    double azimuth_deg = 0.0;
    double elevation_deg = 0.0;
};

// Azimuth 0..340 step 20 for each elevation -10, 0, +10: 54 views, elevation-major.
std::vector<ViewAngles> view_grid();

/// Rotation about the vertical (y) axis by the azimuth, then about x by the
/// elevation, applied around `center`.
TriMesh rotate_view(const TriMesh& mesh, const ViewAngles& view, const Vec3& center);

/// Seeded smooth deformation: every joint handle set is offset by a random
/// 3D vector (per-axis normal, sigma `joint_magnitude` m), `shape_controls`
/// random anchors move along their normals (sigma `shape_magnitude` m), and
/// the Laplacian solver spreads the offsets over the body.
struct DeformSpec {
    double joint_magnitude = 0.05;
    double shape_magnitude = 0.02;
    int shape_controls = 24;
};

/// Everything the pipeline consumes for one synthetic view, plus the ground truth.
struct SyntheticCase {
    TriMesh initial;  // undeformed template in the view
    TriMesh gt_mesh;  // deformed template in the view
    WeakPerspectiveCamera camera;
    BinaryMask silhouette;
    DepthMap depth;
    RgbImage image;
    JointAnnotations joints;
    SHLighting lighting;
    UVTexture albedo_texture;
    ViewAngles view;
};

/// Builds one case: deforms the template, rotates initial and GT meshes into
/// the view, fits the camera to the GT bounding box, and renders the
/// silhouette, depth and a Lambertian image (seeded UV albedo times seeded
/// SH shading, clamped to [0, 1]). GT joints are joint_positions of the GT
/// mesh. Equal arguments give identical cases.
SyntheticCase make_synthetic_case(const BodyTemplate& body, const JointHandleSet& handles,
                                  const std::vector<int>& anchors, const DeformSpec& spec, const ViewAngles& view,
                                  std::uint64_t seed, int image_size = 224);

/// Writes initial.obj, gt.obj, camera.json, silhouette.png, depth.bin,
/// image.png, joints.json, lighting.json, albedo.png and a case.cfg pipeline
/// config that references them (output into `output/<case dir name>`).
void save_synthetic_case(const std::filesystem::path& dir, const SyntheticCase& c);

/// The seeded harness: case i uses seed `seed * 1000 + i` and a view drawn from
/// view_grid() by the same stream.
std::vector<SyntheticCase> make_harness_suite(const BodyTemplate& body, const JointHandleSet& handles,
                                              const std::vector<int>& anchors, int count, std::uint64_t seed,
                                              const DeformSpec& spec = {}, int image_size = 224);

/// Keeps exactly the faces visible (per the rasterizer) from at least one of
/// the six axis-aligned orthogonal views, rendered at `resolution` px, and
/// drops vertices no kept face references.
TriMesh remove_inner_surface(const TriMesh& mesh, int resolution = 512);

}  // namespace avatar
