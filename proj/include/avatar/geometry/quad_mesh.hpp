#pragma once

#include <array>
#include <functional>
#include <map>
#include <vector>

#include "avatar/geometry/mesh.hpp"

namespace avatar {

using Quad = std::array<int, 4>;

/// Closed quad mesh used to model the body cage. Every quad remembers the
/// cage patch it descends from and the patch parameter (s, t) in [0,1]^2 of
/// each corner, so refinement keeps a per-patch parameterization.
struct QuadMesh {
    std::vector<Vec3> vertices;
    std::vector<Quad> quads;
    std::vector<std::array<Vec2, 4>> params;
    std::vector<int> patch;

    int vertex_count() const { return static_cast<int>(vertices.size()); }
    int quad_count() const { return static_cast<int>(quads.size()); }
    // Appends a quad that is its own patch with unit-square corner parameters.
    int add_patch_quad(const Quad& q);
};

// Surface of the box [lo, hi] split into nx * ny * nz cells, outward winding.
QuadMesh make_box_grid(const Vec3& lo, const Vec3& hi, int nx, int ny, int nz);

/// Extrudes a connected set of quads. Region vertices are duplicated, the new
/// copy placed at place(old_index, old_position); region quads are rewired to
/// the copies in place and every region boundary edge gets a side quad.
/// Returns the old -> new vertex map.
std::map<int, int> extrude_region(QuadMesh& mesh, const std::vector<int>& region,
                                  const std::function<Vec3(int, const Vec3&)>& place);

// Drops vertices no quad references (interior vertices left behind by
// extrusion), keeping the relative order of the rest.
void remove_unreferenced_vertices(QuadMesh& mesh);

Vec3 quad_centroid(const QuadMesh& mesh, int q);
// Unnormalized quad normal (sum of the two corner-triangle cross products).
Vec3 quad_normal(const QuadMesh& mesh, int q);

/// One Catmull-Clark step on a closed manifold quad mesh: V' = V + E + F,
/// Q' = 4Q. Throws TopologyError on open or non-manifold edges.
QuadMesh catmull_clark(const QuadMesh& mesh);

}  // namespace avatar
