#include "avatar/geometry/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <unordered_map>

#include "avatar/error.hpp"

namespace avatar {

void TriMesh::validate() const {
    const int n = vertex_count();
    for (std::size_t f = 0; f < faces.size(); ++f) {
        const Face& face = faces[f];
        for (int idx : face) {
            if (idx < 0 || idx >= n) {
                throw TopologyError("face " + std::to_string(f) + " references vertex " +
                                    std::to_string(idx) + " outside [0, " + std::to_string(n) + ")");
            }
        }
        if (face[0] == face[1] || face[1] == face[2] || face[0] == face[2]) {
            throw TopologyError("face " + std::to_string(f) + " is degenerate (repeated index)");
        }
    }
    if (!uvs.empty() && uvs.size() != faces.size()) {
        throw TopologyError("uv table has " + std::to_string(uvs.size()) + " entries for " +
                            std::to_string(faces.size()) + " faces");
    }
    if (!vertex_tags.empty() && vertex_tags.size() != vertices.size()) {
        throw TopologyError("vertex tag table size does not match vertex count");
    }
}

std::vector<Edge> unique_edges(const TriMesh& mesh) {
    std::vector<Edge> edges;
    edges.reserve(mesh.faces.size() * 3 / 2 + 3);
    std::unordered_map<std::uint64_t, int> seen;
    seen.reserve(mesh.faces.size() * 2);
    for (const Face& f : mesh.faces) {
        for (int c = 0; c < 3; ++c) {
            int a = f[c];
            int b = f[(c + 1) % 3];
            if (seen.emplace(edge_key(a, b), static_cast<int>(edges.size())).second) {
                edges.push_back({std::min(a, b), std::max(a, b)});
            }
        }
    }
    return edges;
}

std::vector<std::vector<int>> vertex_neighbors(const TriMesh& mesh) {
    std::vector<std::vector<int>> nbrs(mesh.vertices.size());
    for (const Face& f : mesh.faces) {
        for (int c = 0; c < 3; ++c) {
            nbrs[f[c]].push_back(f[(c + 1) % 3]);
            nbrs[f[c]].push_back(f[(c + 2) % 3]);
        }
    }
    for (auto& list : nbrs) {
        std::sort(list.begin(), list.end());
        list.erase(std::unique(list.begin(), list.end()), list.end());
    }
    return nbrs;
}

std::vector<std::vector<int>> vertex_faces(const TriMesh& mesh) {
    std::vector<std::vector<int>> result(mesh.vertices.size());
    for (int f = 0; f < mesh.face_count(); ++f) {
        for (int idx : mesh.faces[f]) result[idx].push_back(f);
    }
    return result;
}

std::vector<Vec3> face_area_normals(const TriMesh& mesh) {
    std::vector<Vec3> normals(mesh.faces.size());
    for (std::size_t f = 0; f < mesh.faces.size(); ++f) {
        const Vec3& a = mesh.vertices[mesh.faces[f][0]];
        const Vec3& b = mesh.vertices[mesh.faces[f][1]];
        const Vec3& c = mesh.vertices[mesh.faces[f][2]];
        normals[f] = (b - a).cross(c - a);
    }
    return normals;
}

std::vector<Vec3> vertex_normals(const TriMesh& mesh) {
    const auto fn = face_area_normals(mesh);
    std::vector<Vec3> normals(mesh.vertices.size(), Vec3::Zero());
    for (std::size_t f = 0; f < mesh.faces.size(); ++f) {
        for (int idx : mesh.faces[f]) normals[idx] += fn[f];
    }
    for (std::size_t v = 0; v < normals.size(); ++v) {
        const double len = normals[v].norm();
        if (!(len > 0.0) || !std::isfinite(len)) {
            throw DegenerateNormalError("vertex " + std::to_string(v) + " has a zero-area umbrella",
                                        static_cast<int>(v));
        }
        normals[v] /= len;
    }
    return normals;
}

TriMesh subdivide_1to4(const TriMesh& mesh) {
    TriMesh out;
    out.vertices = mesh.vertices;
    if (mesh.has_tags()) out.vertex_tags = mesh.vertex_tags;

    std::unordered_map<std::uint64_t, int> midpoint;
    std::unordered_map<std::uint64_t, int> incidence;
    midpoint.reserve(mesh.faces.size() * 2);
    incidence.reserve(mesh.faces.size() * 2);

    for (const Face& f : mesh.faces) {
        for (int c = 0; c < 3; ++c) {
            if (++incidence[edge_key(f[c], f[(c + 1) % 3])] > 2) {
                throw TopologyError("non-manifold edge (" + std::to_string(f[c]) + ", " +
                                    std::to_string(f[(c + 1) % 3]) + ") has more than two faces");
            }
        }
    }

    auto mid = [&](int a, int b) {
        auto [it, inserted] = midpoint.emplace(edge_key(a, b), static_cast<int>(out.vertices.size()));
        if (inserted) {
            out.vertices.push_back(0.5 * (mesh.vertices[a] + mesh.vertices[b]));
            if (mesh.has_tags()) {
                out.vertex_tags.push_back(mesh.vertex_tags[a] == mesh.vertex_tags[b] ? mesh.vertex_tags[a]
                                                                                      : std::string());
            }
        }
        return it->second;
    };

    out.faces.reserve(mesh.faces.size() * 4);
    if (mesh.has_uvs()) out.uvs.reserve(mesh.faces.size() * 4);
    for (std::size_t fi = 0; fi < mesh.faces.size(); ++fi) {
        const Face& f = mesh.faces[fi];
        const int ab = mid(f[0], f[1]);
        const int bc = mid(f[1], f[2]);
        const int ca = mid(f[2], f[0]);
        out.faces.push_back({f[0], ab, ca});
        out.faces.push_back({ab, f[1], bc});
        out.faces.push_back({ca, bc, f[2]});
        out.faces.push_back({ab, bc, ca});
        if (mesh.has_uvs()) {
            const FaceUV& t = mesh.uvs[fi];
            const Vec2 tab = 0.5 * (t[0] + t[1]);
            const Vec2 tbc = 0.5 * (t[1] + t[2]);
            const Vec2 tca = 0.5 * (t[2] + t[0]);
            out.uvs.push_back({t[0], tab, tca});
            out.uvs.push_back({tab, t[1], tbc});
            out.uvs.push_back({tca, tbc, t[2]});
            out.uvs.push_back({tab, tbc, tca});
        }
    }
    return out;
}

Vec3 vertex_centroid(const TriMesh& mesh) {
    Vec3 sum = Vec3::Zero();
    for (const Vec3& v : mesh.vertices) sum += v;
    return mesh.vertices.empty() ? sum : Vec3(sum / static_cast<double>(mesh.vertices.size()));
}

Bounds3 bounding_box(const TriMesh& mesh) {
    Bounds3 box{Vec3::Constant(0.0), Vec3::Constant(0.0)};
    if (mesh.vertices.empty()) return box;
    box.min = box.max = mesh.vertices.front();
    for (const Vec3& v : mesh.vertices) {
        box.min = box.min.cwiseMin(v);
        box.max = box.max.cwiseMax(v);
    }
    return box;
}

TriMesh transformed(const TriMesh& mesh, const Mat3& rotation, const Vec3& translation) {
    TriMesh out = mesh;
    for (Vec3& v : out.vertices) v = rotation * v + translation;
    return out;
}

Mat3 view_rotation(double azimuth_deg, double elevation_deg) {
    const double az = azimuth_deg * std::numbers::pi / 180.0;
    const double el = elevation_deg * std::numbers::pi / 180.0;
    const Mat3 yaw = Eigen::AngleAxisd(az, Vec3::UnitY()).toRotationMatrix();
    const Mat3 pitch = Eigen::AngleAxisd(el, Vec3::UnitX()).toRotationMatrix();
    return pitch * yaw;
}

TriMesh merge_meshes(const TriMesh& a, const TriMesh& b) {
    TriMesh out = a;
    const int offset = a.vertex_count();
    out.vertices.insert(out.vertices.end(), b.vertices.begin(), b.vertices.end());
    for (const Face& f : b.faces) out.faces.push_back({f[0] + offset, f[1] + offset, f[2] + offset});
    if (a.has_uvs() && b.has_uvs()) {
        out.uvs.insert(out.uvs.end(), b.uvs.begin(), b.uvs.end());
    } else {
        out.uvs.clear();
    }
    if (a.has_tags() && b.has_tags()) {
        out.vertex_tags.insert(out.vertex_tags.end(), b.vertex_tags.begin(), b.vertex_tags.end());
    } else {
        out.vertex_tags.clear();
    }
    return out;
}

}  // namespace avatar
