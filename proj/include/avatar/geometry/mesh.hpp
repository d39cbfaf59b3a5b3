#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Core>
#include <Eigen/Geometry>

namespace avatar {

using Vec2 = Eigen::Vector2d;
using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;
using Face = std::array<int, 3>;
using FaceUV = std::array<Vec2, 3>;

/// Indexed triangle mesh. Counter-clockwise winding faces outward.
///
/// `uvs` is either empty or holds one UV triple per face (per-corner atlas
/// coordinates in [0,1]^2). `vertex_tags` is either empty or holds one label
/// per vertex; the empty string means "untagged".
struct TriMesh {
    std::vector<Vec3> vertices;
    std::vector<Face> faces;
    std::vector<FaceUV> uvs;
    std::vector<std::string> vertex_tags;

    int vertex_count() const { return static_cast<int>(vertices.size()); }
    int face_count() const { return static_cast<int>(faces.size()); }
    bool has_uvs() const { return !uvs.empty(); }
    bool has_tags() const { return !vertex_tags.empty(); }

    // Throws TopologyError when an invariant is broken.
    void validate() const;
};

// Undirected edge stored with a < b.
struct Edge {
    int a;
    int b;
    friend bool operator==(const Edge&, const Edge&) = default;
};

inline std::uint64_t edge_key(int a, int b) {
    if (a > b) std::swap(a, b);
    return (static_cast<std::uint64_t>(static_cast<std::uint32_t>(a)) << 32) |
           static_cast<std::uint32_t>(b);
}

// Unique edges in order of first appearance (face order, then corner order).
std::vector<Edge> unique_edges(const TriMesh& mesh);

// Sorted one-ring vertex neighbors.
std::vector<std::vector<int>> vertex_neighbors(const TriMesh& mesh);

// Incident faces per vertex, ascending.
std::vector<std::vector<int>> vertex_faces(const TriMesh& mesh);

// Unnormalized face normals; the length equals twice the face area.
std::vector<Vec3> face_area_normals(const TriMesh& mesh);

/// Area-weighted unit vertex normals.
///
/// Each vertex normal is the normalized sum of incident face cross products,
/// which weights every face by its area. Throws DegenerateNormalError when the
/// summed umbrella has zero length (including unreferenced vertices).
std::vector<Vec3> vertex_normals(const TriMesh& mesh);

/// Midpoint 1-to-4 subdivision: V' = V + E, F' = 4F.
///
/// Original vertices keep their indices and positions; edge midpoints are
/// appended in order of first edge appearance. UVs are split per corner and
/// a midpoint inherits a tag only when both edge endpoints share it.
/// Throws TopologyError for edges with more than two incident faces.
TriMesh subdivide_1to4(const TriMesh& mesh);

Vec3 vertex_centroid(const TriMesh& mesh);

struct Bounds3 {
    Vec3 min;
    Vec3 max;
    Vec3 extent() const { return max - min; }
    Vec3 center() const { return 0.5 * (min + max); }
};

Bounds3 bounding_box(const TriMesh& mesh);

// Returns a copy with every vertex mapped through x -> R x + t.
TriMesh transformed(const TriMesh& mesh, const Mat3& rotation, const Vec3& translation);

// Rotation about the vertical (y) axis by `azimuth_deg`, followed by a
// rotation about the x axis by `elevation_deg`.
Mat3 view_rotation(double azimuth_deg, double elevation_deg);

// Concatenates two meshes; UVs and tags are kept only when both carry them.
TriMesh merge_meshes(const TriMesh& a, const TriMesh& b);

}  // namespace avatar
