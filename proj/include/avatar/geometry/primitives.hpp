#pragma once

#include "avatar/geometry/mesh.hpp"

namespace avatar {

// Regular tetrahedron with vertices on the unit sphere, centered at the origin.
TriMesh make_tetrahedron();

// Axis-aligned cube [-h, h]^3, 8 vertices and 12 outward triangles.
TriMesh make_cube(double half_extent = 0.5);

// Icosahedron refined `levels` times by midpoint subdivision, projected to the sphere.
TriMesh make_icosphere(int levels, double radius = 1.0, const Vec3& center = Vec3::Zero());

/// Latitude/longitude sphere around the y axis with `rings` interior latitude
/// rings, `segments` vertices per ring and two poles: V = rings*segments + 2,
/// F = 2*rings*segments. Carries an equirectangular per-corner UV atlas.
TriMesh make_uv_sphere(int rings, int segments, double radius = 1.0);

/// Flat grid in the z = `z` plane spanning [-w/2, w/2] x [-h/2, h/2] with
/// nx by ny cells. Faces wind so their normal is (0, 0, normal_sign) and UVs
/// map the grid onto the unit square.
TriMesh make_grid(int nx, int ny, double width, double height, double z = 0.0, double normal_sign = 1.0);

}  // namespace avatar
