#include "avatar/geometry/primitives.hpp"

#include <cmath>
#include <numbers>

namespace avatar {

TriMesh make_tetrahedron() {
    TriMesh m;
    const double s = 1.0 / std::sqrt(3.0);
    m.vertices = {Vec3(s, s, s), Vec3(s, -s, -s), Vec3(-s, s, -s), Vec3(-s, -s, s)};
    m.faces = {{0, 1, 2}, {0, 3, 1}, {0, 2, 3}, {1, 3, 2}};
    return m;
}

TriMesh make_cube(double h) {
    TriMesh m;
    for (int i = 0; i < 8; ++i) {
        m.vertices.emplace_back((i & 1) ? h : -h, (i & 2) ? h : -h, (i & 4) ? h : -h);
    }
    // Two triangles per side, counter-clockwise seen from outside. Every
    // diagonal joins the even-parity corners 0, 3, 5, 6, so all corners see
    // equal face areas and area-weighted normals stay diagonal.
    m.faces = {{0, 2, 3}, {0, 3, 1},   // z = -h
               {4, 5, 6}, {5, 7, 6},   // z = +h
               {0, 1, 5}, {0, 5, 4},   // y = -h
               {2, 6, 3}, {6, 7, 3},   // y = +h
               {0, 4, 6}, {0, 6, 2},   // x = -h
               {1, 3, 5}, {3, 7, 5}};  // x = +h
    return m;
}

TriMesh make_icosphere(int levels, double radius, const Vec3& center) {
    TriMesh m;
    const double t = (1.0 + std::sqrt(5.0)) / 2.0;
    m.vertices = {Vec3(-1, t, 0), Vec3(1, t, 0),  Vec3(-1, -t, 0), Vec3(1, -t, 0),
                  Vec3(0, -1, t), Vec3(0, 1, t),  Vec3(0, -1, -t), Vec3(0, 1, -t),
                  Vec3(t, 0, -1), Vec3(t, 0, 1),  Vec3(-t, 0, -1), Vec3(-t, 0, 1)};
    m.faces = {{0, 11, 5}, {0, 5, 1},  {0, 1, 7},   {0, 7, 10}, {0, 10, 11}, {1, 5, 9}, {5, 11, 4},
               {11, 10, 2}, {10, 7, 6}, {7, 1, 8},  {3, 9, 4},  {3, 4, 2},   {3, 2, 6}, {3, 6, 8},
               {3, 8, 9},  {4, 9, 5},  {2, 4, 11},  {6, 2, 10}, {8, 6, 7},   {9, 8, 1}};
    for (Vec3& v : m.vertices) v.normalize();
    for (int l = 0; l < levels; ++l) {
        m = subdivide_1to4(m);
        for (Vec3& v : m.vertices) v.normalize();
    }
    for (Vec3& v : m.vertices) v = center + radius * v;
    return m;
}

TriMesh make_uv_sphere(int rings, int segments, double radius) {
    TriMesh m;
    const double pi = std::numbers::pi;
    m.vertices.emplace_back(0.0, radius, 0.0);  // north pole
    for (int r = 0; r < rings; ++r) {
        const double theta = pi * (r + 1) / (rings + 1);
        for (int s = 0; s < segments; ++s) {
            const double phi = 2.0 * pi * s / segments;
            m.vertices.emplace_back(radius * std::sin(theta) * std::cos(phi), radius * std::cos(theta),
                                    -radius * std::sin(theta) * std::sin(phi));
        }
    }
    m.vertices.emplace_back(0.0, -radius, 0.0);  // south pole
    const int south = static_cast<int>(m.vertices.size()) - 1;
    auto idx = [&](int r, int s) { return 1 + r * segments + (s % segments); };
    auto uv = [&](int r, int s) { return Vec2(static_cast<double>(s) / segments, (r + 1.0) / (rings + 1)); };

    for (int s = 0; s < segments; ++s) {
        m.faces.push_back({0, idx(0, s), idx(0, s + 1)});
        m.uvs.push_back({Vec2((s + 0.5) / segments, 0.0), uv(0, s), uv(0, s + 1)});
    }
    for (int r = 0; r + 1 < rings; ++r) {
        for (int s = 0; s < segments; ++s) {
            m.faces.push_back({idx(r, s), idx(r + 1, s), idx(r + 1, s + 1)});
            m.uvs.push_back({uv(r, s), uv(r + 1, s), uv(r + 1, s + 1)});
            m.faces.push_back({idx(r, s), idx(r + 1, s + 1), idx(r, s + 1)});
            m.uvs.push_back({uv(r, s), uv(r + 1, s + 1), uv(r, s + 1)});
        }
    }
    for (int s = 0; s < segments; ++s) {
        m.faces.push_back({south, idx(rings - 1, s + 1), idx(rings - 1, s)});
        m.uvs.push_back({Vec2((s + 0.5) / segments, 1.0), uv(rings - 1, s + 1), uv(rings - 1, s)});
    }
    return m;
}

TriMesh make_grid(int nx, int ny, double width, double height, double z, double normal_sign) {
    TriMesh m;
    for (int j = 0; j <= ny; ++j) {
        for (int i = 0; i <= nx; ++i) {
            m.vertices.emplace_back(-0.5 * width + width * i / nx, -0.5 * height + height * j / ny, z);
        }
    }
    auto id = [&](int i, int j) { return j * (nx + 1) + i; };
    auto uv = [&](int i, int j) { return Vec2(static_cast<double>(i) / nx, static_cast<double>(j) / ny); };
    for (int j = 0; j < ny; ++j) {
        for (int i = 0; i < nx; ++i) {
            if (normal_sign >= 0.0) {
                m.faces.push_back({id(i, j), id(i + 1, j), id(i + 1, j + 1)});
                m.uvs.push_back({uv(i, j), uv(i + 1, j), uv(i + 1, j + 1)});
                m.faces.push_back({id(i, j), id(i + 1, j + 1), id(i, j + 1)});
                m.uvs.push_back({uv(i, j), uv(i + 1, j + 1), uv(i, j + 1)});
            } else {
                m.faces.push_back({id(i, j), id(i + 1, j + 1), id(i + 1, j)});
                m.uvs.push_back({uv(i, j), uv(i + 1, j + 1), uv(i + 1, j)});
                m.faces.push_back({id(i, j), id(i, j + 1), id(i + 1, j + 1)});
                m.uvs.push_back({uv(i, j), uv(i, j + 1), uv(i + 1, j + 1)});
            }
        }
    }
    return m;
}

}  // namespace avatar
