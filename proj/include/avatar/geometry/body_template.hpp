#pragma once

#include <string>
#include <utility>
#include <vector>

#include "avatar/geometry/mesh.hpp"
#include "avatar/geometry/symmetry.hpp"

namespace avatar {

inline constexpr int kTemplateVertexCount = 6890;
inline constexpr int kTemplateFaceCount = 13776;

/// Procedural T-pose humanoid with the vertex and face counts of the SMPL
/// topology (6890 / 13776, closed genus 0), exactly mirror-symmetric about
/// x = 0 and carrying a per-corner UV atlas.
///
/// Coordinates are meters in the camera frame: y grows downward (feet at
/// y = 0, head near y = -1.8) and the body faces -z, so a weak-perspective
/// camera with depth_sign = -1 sees the front.
struct BodyTemplate {
    TriMesh mesh;
    VertexLabels labels;  // "face", "fingers", "toes"
    SymmetryMap symmetry;
    // Ten joint centers inside the body, in the canonical joint order.
    std::vector<std::pair<std::string, Vec3>> joint_centers;
};

BodyTemplate make_body_template();

// Canonical joint order shared by handle sets and annotations.
const std::vector<std::string>& joint_names();

/// Splits edges in mirror pairs (longest first) until the mesh has
/// `target_vertices` vertices; an odd deficit first splits one edge lying on
/// the symmetry plane. The mesh must be exactly symmetric about x = 0.
void split_to_vertex_count(TriMesh& mesh, int target_vertices);

}  // namespace avatar
