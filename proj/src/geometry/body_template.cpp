#include "avatar/geometry/body_template.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "avatar/error.hpp"
#include "avatar/geometry/quad_mesh.hpp"

namespace avatar {

namespace {

// Cross-section ring of one extrusion step: center plus half extents along
// the region's two in-plane axes.
struct Ring {
    Vec3 center;
    double r1;
    double r2;
};

// Square [-1,1]^2 to unit disk, so extruded limbs get round cross-sections.
Vec2 square_to_disk(double u, double w) {
    return Vec2(u * std::sqrt(1.0 - 0.5 * w * w), w * std::sqrt(1.0 - 0.5 * u * u));
}

std::vector<int> select_quads(const QuadMesh& m, const std::function<bool(const Vec3&, const Vec3&)>& pred,
                              int first = 0) {
    std::vector<int> out;
    for (int q = first; q < m.quad_count(); ++q) {
        if (pred(quad_centroid(m, q), quad_normal(m, q).normalized())) out.push_back(q);
    }
    return out;
}

// Extrudes `region` through successive rings. Each region vertex keeps its
// normalized in-plane coordinates, so every ring reshapes the same layout.
void extrude_chain(QuadMesh& m, const std::vector<int>& region, const Vec3& e1, const Vec3& e2,
                   const std::vector<Ring>& rings) {
    std::map<int, Vec2> local;
    Vec2 lo(1e300, 1e300), hi(-1e300, -1e300);
    for (int q : region) {
        for (int v : m.quads[q]) {
            const Vec2 p(m.vertices[v].dot(e1), m.vertices[v].dot(e2));
            lo = lo.cwiseMin(p);
            hi = hi.cwiseMax(p);
            local[v] = p;
        }
    }
    const Vec2 c = 0.5 * (lo + hi);
    const Vec2 h = 0.5 * (hi - lo);
    for (auto& [v, p] : local) p = Vec2((p.x() - c.x()) / h.x(), (p.y() - c.y()) / h.y());

    for (const Ring& ring : rings) {
        const auto remap = extrude_region(m, region, [&](int old, const Vec3&) {
            const Vec2& p = local.at(old);
            const Vec2 d = square_to_disk(p.x(), p.y());
            return Vec3(ring.center + ring.r1 * d.x() * e1 + ring.r2 * d.y() * e2);
        });
        std::map<int, Vec2> next;
        for (const auto& [old, fresh] : remap) next[fresh] = local.at(old);
        local = std::move(next);
    }
}

struct Cage {
    QuadMesh mesh;
    std::vector<std::pair<std::string, Vec3>> joints;
};

// T-pose cage in the construction frame: y up, feet at y = 0, facing +z.
Cage build_cage() {
    Cage cage;
    QuadMesh& m = cage.mesh;
    m = make_box_grid(Vec3(-0.16, 0.88, -0.10), Vec3(0.16, 1.46, 0.10), 4, 4, 2);
    const Vec3 ex = Vec3::UnitX(), ey = Vec3::UnitY(), ez = Vec3::UnitZ();

    // Neck and head from the middle of the top face.
    const auto head = select_quads(m, [](const Vec3& c, const Vec3& n) { return n.y() > 0.9 && std::abs(c.x()) < 0.08; });
    extrude_chain(m, head, ex, ez,
                  {{Vec3(0, 1.50, 0.000), 0.050, 0.050},
                   {Vec3(0, 1.56, 0.000), 0.048, 0.050},
                   {Vec3(0, 1.60, 0.010), 0.070, 0.085},
                   {Vec3(0, 1.68, 0.010), 0.085, 0.100},
                   {Vec3(0, 1.75, 0.000), 0.080, 0.095},
                   {Vec3(0, 1.80, 0.000), 0.050, 0.060}});

    for (double s : {1.0, -1.0}) {
        // Leg from the bottom face half, then a foot from the ankle front.
        const auto leg = select_quads(m, [s](const Vec3& c, const Vec3& n) {
            return n.y() < -0.9 && c.y() < 0.9 && s * c.x() > 0.0;
        });
        extrude_chain(m, leg, ex, ez,
                      {{Vec3(s * 0.095, 0.80, 0.000), 0.075, 0.085},
                       {Vec3(s * 0.095, 0.66, 0.005), 0.068, 0.075},
                       {Vec3(s * 0.095, 0.52, 0.010), 0.055, 0.060},
                       {Vec3(s * 0.095, 0.47, 0.012), 0.050, 0.055},
                       {Vec3(s * 0.095, 0.26, -0.005), 0.042, 0.045},
                       {Vec3(s * 0.095, 0.12, 0.000), 0.032, 0.035},
                       {Vec3(s * 0.095, 0.07, 0.000), 0.032, 0.035},
                       {Vec3(s * 0.095, 0.00, -0.010), 0.035, 0.045}});
        const auto foot = select_quads(m, [s](const Vec3& c, const Vec3& n) {
            return n.z() > 0.5 && c.y() < 0.05 && s * c.x() > 0.0;
        });
        extrude_chain(m, foot, ex, ey,
                      {{Vec3(s * 0.095, 0.03, 0.10), 0.038, 0.030},
                       {Vec3(s * 0.097, 0.02, 0.17), 0.036, 0.018}});

        // Arm from the upper half of the side face, ending in a flat hand.
        const auto arm = select_quads(m, [s](const Vec3& c, const Vec3& n) {
            return s * n.x() > 0.9 && c.y() > 1.17 && s * c.x() > 0.15 && s * c.x() < 0.17;
        });
        extrude_chain(m, arm, ey, ez,
                      {{Vec3(s * 0.22, 1.36, 0.0), 0.075, 0.075},
                       {Vec3(s * 0.30, 1.36, 0.0), 0.058, 0.058},
                       {Vec3(s * 0.40, 1.36, 0.0), 0.050, 0.050},
                       {Vec3(s * 0.46, 1.36, 0.0), 0.044, 0.046},
                       {Vec3(s * 0.54, 1.36, 0.0), 0.042, 0.044},
                       {Vec3(s * 0.64, 1.36, 0.0), 0.033, 0.036},
                       {Vec3(s * 0.70, 1.36, 0.0), 0.028, 0.033},
                       {Vec3(s * 0.76, 1.36, 0.0), 0.022, 0.045},
                       {Vec3(s * 0.81, 1.36, 0.0), 0.018, 0.045},
                       {Vec3(s * 0.88, 1.36, 0.0), 0.012, 0.035}});
    }

    cage.joints = {{"head", Vec3(0, 1.68, 0.01)},           {"waist", Vec3(0, 0.95, 0)},
                   {"left_shoulder", Vec3(0.20, 1.36, 0)},  {"right_shoulder", Vec3(-0.20, 1.36, 0)},
                   {"left_elbow", Vec3(0.46, 1.36, 0)},     {"right_elbow", Vec3(-0.46, 1.36, 0)},
                   {"left_knee", Vec3(0.095, 0.47, 0.012)}, {"right_knee", Vec3(-0.095, 0.47, 0.012)},
                   {"left_ankle", Vec3(0.095, 0.07, 0)},    {"right_ankle", Vec3(-0.095, 0.07, 0)}};
    remove_unreferenced_vertices(m);
    return cage;
}

// Dense mirror map of a point set that is symmetric up to rounding; snaps the
// points to exact symmetry.
std::vector<int> symmetrize(std::vector<Vec3>& points) {
    TriMesh tmp;
    tmp.vertices = points;
    const SymmetryMap map = mirror_correspondence(tmp, Axis::X, 1e-7);
    for (const auto& [l, r] : map.vertex_pairs) points[r] = reflect(points[l], Axis::X);
    for (int f : map.fixed) points[f].x() = 0.0;
    return map.dense(static_cast<int>(points.size()));
}

std::vector<int> sorted_quad(const Quad& q) {
    std::vector<int> s(q.begin(), q.end());
    std::sort(s.begin(), s.end());
    return s;
}

struct Atlas {
    int columns = 0;
    int rows = 0;
    std::vector<Vec2> tile;        // per patch: (column, row)
    std::vector<char> flipped;     // per patch: parameters mirrored in u
    static constexpr double kMargin = 0.04;

    Vec2 uv(int patch, const Vec2& st) const {
        const double s = kMargin + st.x() * (1.0 - 2.0 * kMargin);
        const double t = kMargin + st.y() * (1.0 - 2.0 * kMargin);
        const double u = (tile[patch].x() + (flipped[patch] ? 1.0 - s : s)) / columns;
        return Vec2(u, (tile[patch].y() + t) / rows);
    }
};

// Pairs every cage quad with its mirror image, copies the primary's corner
// parameters onto the mirror and lays pairs out in mirrored atlas columns.
Atlas build_atlas(QuadMesh& cage, const std::vector<int>& mirror) {
    std::map<std::vector<int>, int> by_set;
    for (int q = 0; q < cage.quad_count(); ++q) by_set[sorted_quad(cage.quads[q])] = q;
    std::vector<std::pair<int, int>> pairs;
    for (int q = 0; q < cage.quad_count(); ++q) {
        Quad mq;
        for (int k = 0; k < 4; ++k) mq[k] = mirror[cage.quads[q][k]];
        const int other = by_set.at(sorted_quad(mq));
        if (other == q) throw TopologyError("cage quad straddles the symmetry plane");
        if (quad_centroid(cage, q).x() > 0.0) pairs.emplace_back(q, other);
    }
    for (const auto& [p, q] : pairs) {
        for (int i = 0; i < 4; ++i) {
            const int target = mirror[cage.quads[q][i]];
            for (int j = 0; j < 4; ++j) {
                if (cage.quads[p][j] == target) cage.params[q][i] = cage.params[p][j];
            }
        }
    }
    Atlas atlas;
    const int half = static_cast<int>(std::ceil(std::sqrt(pairs.size() / 2.0)));
    atlas.columns = 2 * half;
    atlas.rows = static_cast<int>((pairs.size() + half - 1) / half);
    atlas.tile.assign(cage.quad_count(), Vec2::Zero());
    atlas.flipped.assign(cage.quad_count(), 0);
    for (std::size_t k = 0; k < pairs.size(); ++k) {
        const int col = static_cast<int>(k % half);
        const int row = static_cast<int>(k / half);
        atlas.tile[pairs[k].first] = Vec2(col, row);
        atlas.tile[pairs[k].second] = Vec2(atlas.columns - 1 - col, row);
        atlas.flipped[pairs[k].second] = 1;
    }
    return atlas;
}

// Splits each quad along its shorter diagonal; exact ties pick the diagonal
// whose mirror-invariant vertex keys compare smaller, so mirrored quads
// always get mirrored diagonals.
TriMesh triangulate(const QuadMesh& m, const std::vector<int>& mirror, const Atlas& atlas) {
    TriMesh out;
    out.vertices = m.vertices;
    auto key = [&](int v) { return std::min(v, mirror[v]); };
    auto diag_key = [&](int a, int b) {
        return std::pair<int, int>(std::min(key(a), key(b)), std::max(key(a), key(b)));
    };
    for (int q = 0; q < m.quad_count(); ++q) {
        const Quad& f = m.quads[q];
        const double ac = (m.vertices[f[0]] - m.vertices[f[2]]).squaredNorm();
        const double bd = (m.vertices[f[1]] - m.vertices[f[3]]).squaredNorm();
        const bool use_ac = ac < bd || (ac == bd && diag_key(f[0], f[2]) < diag_key(f[1], f[3]));
        std::array<Vec2, 4> uv;
        for (int k = 0; k < 4; ++k) uv[k] = atlas.uv(m.patch[q], m.params[q][k]);
        const std::array<std::array<int, 3>, 2> corners =
            use_ac ? std::array<std::array<int, 3>, 2>{{{0, 1, 2}, {0, 2, 3}}}
                   : std::array<std::array<int, 3>, 2>{{{0, 1, 3}, {1, 2, 3}}};
        for (const auto& c : corners) {
            out.faces.push_back({f[c[0]], f[c[1]], f[c[2]]});
            out.uvs.push_back({uv[c[0]], uv[c[1]], uv[c[2]]});
        }
    }
    return out;
}

// Splits edge (a, b) at its midpoint in both incident faces.
void split_edge(TriMesh& mesh, int a, int b) {
    const int m = mesh.vertex_count();
    mesh.vertices.push_back(0.5 * (mesh.vertices[a] + mesh.vertices[b]));
    const int nf = mesh.face_count();
    for (int f = 0; f < nf; ++f) {
        for (int k = 0; k < 3; ++k) {
            const int p = mesh.faces[f][k];
            const int q = mesh.faces[f][(k + 1) % 3];
            if (!((p == a && q == b) || (p == b && q == a))) continue;
            const int r = mesh.faces[f][(k + 2) % 3];
            mesh.faces[f] = {p, m, r};
            mesh.faces.push_back({m, q, r});
            if (mesh.has_uvs()) {
                const FaceUV uv = mesh.uvs[f];
                const Vec2 um = 0.5 * (uv[k] + uv[(k + 1) % 3]);
                mesh.uvs[f] = {uv[k], um, uv[(k + 2) % 3]};
                mesh.uvs.push_back({um, uv[(k + 1) % 3], uv[(k + 2) % 3]});
            }
            break;
        }
    }
}

}  // namespace

const std::vector<std::string>& joint_names() {
    static const std::vector<std::string> names{"head",          "waist",          "left_shoulder", "right_shoulder",
                                                "left_elbow",    "right_elbow",    "left_knee",     "right_knee",
                                                "left_ankle",    "right_ankle"};
    return names;
}

void split_to_vertex_count(TriMesh& mesh, int target_vertices) {
    if (mesh.vertex_count() > target_vertices) throw ParameterError("mesh already exceeds the target vertex count");
    std::vector<int> mirror = mirror_correspondence(mesh, Axis::X, 1e-12).dense(mesh.vertex_count());
    auto key = [&](int v) { return std::min(v, mirror[v]); };
    while (mesh.vertex_count() < target_vertices) {
        const int deficit = target_vertices - mesh.vertex_count();
        int best_a = -1, best_b = -1;
        double best_len = -1.0;
        std::pair<int, int> best_key{0, 0};
        for (const Edge& e : unique_edges(mesh)) {
            const bool self_mirror = edge_key(mirror[e.a], mirror[e.b]) == edge_key(e.a, e.b);
            if (deficit == 1 && !self_mirror) continue;
            const double len = (mesh.vertices[e.a] - mesh.vertices[e.b]).squaredNorm();
            const std::pair<int, int> k(std::min(key(e.a), key(e.b)), std::max(key(e.a), key(e.b)));
            if (len > best_len || (len == best_len && k < best_key)) {
                best_len = len;
                best_key = k;
                best_a = e.a;
                best_b = e.b;
            }
        }
        if (best_a < 0) throw TopologyError("no edge on the symmetry plane to split");
        const int ma = mirror[best_a];
        const int mb = mirror[best_b];
        const bool self_mirror = edge_key(ma, mb) == edge_key(best_a, best_b);
        split_edge(mesh, best_a, best_b);
        if (self_mirror) {
            mirror.push_back(mesh.vertex_count() - 1);
        } else {
            split_edge(mesh, ma, mb);
            const int n = mesh.vertex_count();
            mirror.push_back(n - 1);
            mirror.push_back(n - 2);
        }
    }
}

BodyTemplate make_body_template() {
    Cage cage = build_cage();
    QuadMesh q = cage.mesh;
    std::vector<int> mirror = symmetrize(q.vertices);
    const Atlas atlas = build_atlas(q, mirror);
    for (int level = 0; level < 2; ++level) {
        q = catmull_clark(q);
        mirror = symmetrize(q.vertices);
    }
    if (q.vertex_count() > kTemplateVertexCount) throw TopologyError("body cage is too fine for the template");

    BodyTemplate out;
    out.mesh = triangulate(q, mirror, atlas);
    split_to_vertex_count(out.mesh, kTemplateVertexCount);
    if (out.mesh.face_count() != kTemplateFaceCount) throw TopologyError("template face count mismatch");

    for (int v = 0; v < out.mesh.vertex_count(); ++v) {
        const Vec3& p = out.mesh.vertices[v];
        if (std::abs(p.x()) > 0.79) out.labels["fingers"].push_back(v);
        if (p.z() > 0.12 && p.y() < 0.08) out.labels["toes"].push_back(v);
        if (p.y() > 1.59 && p.z() > 0.04) out.labels["face"].push_back(v);
    }

    // Construction frame (y up, facing +z) to camera frame (y down, facing -z).
    const Mat3 flip = Vec3(1.0, -1.0, -1.0).asDiagonal();
    out.mesh = transformed(out.mesh, flip, Vec3::Zero());
    for (auto& [name, c] : cage.joints) out.joint_centers.emplace_back(name, flip * c);
    out.symmetry = mirror_correspondence(out.mesh, Axis::X, 1e-9);
    out.mesh.validate();
    return out;
}

}  // namespace avatar
