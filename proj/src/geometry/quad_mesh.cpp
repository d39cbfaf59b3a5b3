#include "avatar/geometry/quad_mesh.hpp"

#include <unordered_map>

#include "avatar/error.hpp"

namespace avatar {

namespace {

const std::array<Vec2, 4> kUnitParams{Vec2(0, 0), Vec2(1, 0), Vec2(1, 1), Vec2(0, 1)};

}  // namespace

int QuadMesh::add_patch_quad(const Quad& q) {
    quads.push_back(q);
    params.push_back(kUnitParams);
    patch.push_back(static_cast<int>(quads.size()) - 1);
    return static_cast<int>(quads.size()) - 1;
}

Vec3 quad_centroid(const QuadMesh& mesh, int q) {
    Vec3 c = Vec3::Zero();
    for (int v : mesh.quads[q]) c += mesh.vertices[v];
    return 0.25 * c;
}

Vec3 quad_normal(const QuadMesh& mesh, int q) {
    const auto& v = mesh.vertices;
    const Quad& f = mesh.quads[q];
    return (v[f[1]] - v[f[0]]).cross(v[f[2]] - v[f[0]]) + (v[f[2]] - v[f[0]]).cross(v[f[3]] - v[f[0]]);
}

QuadMesh make_box_grid(const Vec3& lo, const Vec3& hi, int nx, int ny, int nz) {
    if (nx < 1 || ny < 1 || nz < 1) throw ParameterError("box grid needs at least one cell per axis");
    QuadMesh m;
    const std::array<int, 3> n{nx, ny, nz};
    std::map<std::array<int, 3>, int> index;
    auto vertex = [&](std::array<int, 3> c) {
        auto it = index.find(c);
        if (it != index.end()) return it->second;
        Vec3 p;
        for (int a = 0; a < 3; ++a) p[a] = lo[a] + (hi[a] - lo[a]) * c[a] / n[a];
        m.vertices.push_back(p);
        const int id = static_cast<int>(m.vertices.size()) - 1;
        index.emplace(c, id);
        return id;
    };
    const Vec3 center = 0.5 * (lo + hi);
    for (int axis = 0; axis < 3; ++axis) {
        const int a1 = (axis + 1) % 3;
        const int a2 = (axis + 2) % 3;
        for (int side = 0; side < 2; ++side) {
            for (int i = 0; i < n[a1]; ++i) {
                for (int j = 0; j < n[a2]; ++j) {
                    std::array<int, 3> c00{}, c10{}, c11{}, c01{};
                    for (auto* c : {&c00, &c10, &c11, &c01}) (*c)[axis] = side ? n[axis] : 0;
                    c00[a1] = i, c00[a2] = j;
                    c10[a1] = i + 1, c10[a2] = j;
                    c11[a1] = i + 1, c11[a2] = j + 1;
                    c01[a1] = i, c01[a2] = j + 1;
                    Quad q{vertex(c00), vertex(c10), vertex(c11), vertex(c01)};
                    const int id = m.add_patch_quad(q);
                    if (quad_normal(m, id).dot(quad_centroid(m, id) - center) < 0.0) {
                        std::swap(m.quads[id][1], m.quads[id][3]);
                    }
                }
            }
        }
    }
    return m;
}

std::map<int, int> extrude_region(QuadMesh& mesh, const std::vector<int>& region,
                                  const std::function<Vec3(int, const Vec3&)>& place) {
    // Directed edges of the region; a boundary edge has no reversed twin.
    std::map<std::pair<int, int>, int> directed;
    std::map<int, int> remap;
    for (int q : region) {
        for (int k = 0; k < 4; ++k) {
            const int a = mesh.quads[q][k];
            const int b = mesh.quads[q][(k + 1) % 4];
            directed[{a, b}] = q;
            remap.emplace(a, -1);
        }
    }
    for (auto& [old, fresh] : remap) {
        fresh = mesh.vertex_count();
        mesh.vertices.push_back(place(old, mesh.vertices[old]));
    }
    std::vector<std::pair<int, int>> boundary;
    for (int q : region) {
        for (int k = 0; k < 4; ++k) {
            const int a = mesh.quads[q][k];
            const int b = mesh.quads[q][(k + 1) % 4];
            if (!directed.count({b, a})) boundary.emplace_back(a, b);
        }
    }
    for (int q : region) {
        for (int& v : mesh.quads[q]) v = remap.at(v);
    }
    for (const auto& [a, b] : boundary) mesh.add_patch_quad({a, b, remap.at(b), remap.at(a)});
    return remap;
}

void remove_unreferenced_vertices(QuadMesh& mesh) {
    std::vector<int> remap(mesh.vertices.size(), -1);
    for (const Quad& q : mesh.quads) {
        for (int v : q) remap[v] = 0;
    }
    std::vector<Vec3> kept;
    for (std::size_t v = 0; v < remap.size(); ++v) {
        if (remap[v] < 0) continue;
        remap[v] = static_cast<int>(kept.size());
        kept.push_back(mesh.vertices[v]);
    }
    for (Quad& q : mesh.quads) {
        for (int& v : q) v = remap[v];
    }
    mesh.vertices = std::move(kept);
}

QuadMesh catmull_clark(const QuadMesh& mesh) {
    const int nv = mesh.vertex_count();
    const int nq = mesh.quad_count();

    // Edge table: edge id per undirected edge, with its (up to two) quads.
    std::unordered_map<std::uint64_t, int> edge_id;
    std::vector<std::array<int, 2>> edge_verts;
    std::vector<std::array<int, 2>> edge_quads;
    std::vector<std::array<int, 4>> quad_edges(nq);
    for (int q = 0; q < nq; ++q) {
        for (int k = 0; k < 4; ++k) {
            const int a = mesh.quads[q][k];
            const int b = mesh.quads[q][(k + 1) % 4];
            auto [it, inserted] = edge_id.emplace(edge_key(a, b), static_cast<int>(edge_verts.size()));
            if (inserted) {
                edge_verts.push_back({a, b});
                edge_quads.push_back({q, -1});
            } else {
                auto& eq = edge_quads[it->second];
                if (eq[1] >= 0) throw TopologyError("non-manifold edge in quad mesh");
                eq[1] = q;
            }
            quad_edges[q][k] = it->second;
        }
    }
    const int ne = static_cast<int>(edge_verts.size());
    for (const auto& eq : edge_quads) {
        if (eq[1] < 0) throw TopologyError("open edge in quad mesh");
    }

    std::vector<Vec3> face_pt(nq);
    for (int q = 0; q < nq; ++q) face_pt[q] = quad_centroid(mesh, q);
    std::vector<Vec3> edge_pt(ne);
    for (int e = 0; e < ne; ++e) {
        edge_pt[e] = 0.25 * (mesh.vertices[edge_verts[e][0]] + mesh.vertices[edge_verts[e][1]] +
                             face_pt[edge_quads[e][0]] + face_pt[edge_quads[e][1]]);
    }

    std::vector<Vec3> face_sum(nv, Vec3::Zero()), mid_sum(nv, Vec3::Zero());
    std::vector<int> face_n(nv, 0), edge_n(nv, 0);
    for (int q = 0; q < nq; ++q) {
        for (int v : mesh.quads[q]) {
            face_sum[v] += face_pt[q];
            ++face_n[v];
        }
    }
    for (int e = 0; e < ne; ++e) {
        const Vec3 mid = 0.5 * (mesh.vertices[edge_verts[e][0]] + mesh.vertices[edge_verts[e][1]]);
        for (int v : edge_verts[e]) {
            mid_sum[v] += mid;
            ++edge_n[v];
        }
    }

    QuadMesh out;
    out.vertices.resize(nv + ne + nq);
    for (int v = 0; v < nv; ++v) {
        if (face_n[v] == 0) throw TopologyError("unreferenced vertex in quad mesh");
        const double n = edge_n[v];
        const Vec3 f = face_sum[v] / face_n[v];
        const Vec3 r = mid_sum[v] / n;
        out.vertices[v] = (f + 2.0 * r + (n - 3.0) * mesh.vertices[v]) / n;
    }
    for (int e = 0; e < ne; ++e) out.vertices[nv + e] = edge_pt[e];
    for (int q = 0; q < nq; ++q) out.vertices[nv + ne + q] = face_pt[q];

    out.quads.reserve(4 * nq);
    for (int q = 0; q < nq; ++q) {
        const auto& p = mesh.params[q];
        const Vec2 center = 0.25 * (p[0] + p[1] + p[2] + p[3]);
        for (int k = 0; k < 4; ++k) {
            const int prev = (k + 3) % 4;
            out.quads.push_back({mesh.quads[q][k], nv + quad_edges[q][k], nv + ne + q, nv + quad_edges[q][prev]});
            out.params.push_back({p[k], 0.5 * (p[k] + p[(k + 1) % 4]), center, 0.5 * (p[k] + p[prev])});
            out.patch.push_back(mesh.patch[q]);
        }
    }
    return out;
}

}  // namespace avatar
