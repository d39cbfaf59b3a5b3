#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstring>
#include <filesystem>

#include "avatar/camera/camera.hpp"
#include "avatar/camera/raster.hpp"
#include "avatar/camera/scan.hpp"
#include "avatar/error.hpp"
#include "avatar/geometry/primitives.hpp"
#include "avatar/image/image_io.hpp"
#include "avatar/random.hpp"

using namespace avatar;

namespace {

WeakPerspectiveCamera make_camera(double s, double tx, double ty, int w, int h, int sign = -1) {
    WeakPerspectiveCamera c;
    c.scale = s;
    c.translation = Vec2(tx, ty);
    c.width = w;
    c.height = h;
    c.depth_sign = sign;
    return c;
}

TriMesh single_triangle(const Vec3& a, const Vec3& b, const Vec3& c) {
    TriMesh m;
    m.vertices = {a, b, c};
    m.faces = {Face{0, 1, 2}};
    return m;
}

// Brute-force pixel-center coverage oracle for one triangle (strict interior).
bool strictly_inside(const Vec2& p, const Vec2& a, const Vec2& b, const Vec2& c) {
    auto cross = [](const Vec2& u, const Vec2& v) { return u.x() * v.y() - u.y() * v.x(); };
    const double d0 = cross(b - a, p - a);
    const double d1 = cross(c - b, p - b);
    const double d2 = cross(a - c, p - c);
    return (d0 > 0 && d1 > 0 && d2 > 0) || (d0 < 0 && d1 < 0 && d2 < 0);
}

}  // namespace

TEST_CASE("projection formula") {
    const auto cam = make_camera(2.0, 10.0, 20.0, 64, 64);
    CHECK(project(cam, Vec3(1, 2, 3)) == Vec2(12, 24));
    const auto unit = make_camera(1.0, 0.0, 0.0, 8, 8);
    CHECK(project(unit, Vec3(0, 0, -7.5)) == Vec2(0, 0));
    CHECK(project(unit, Vec3(0, 0, 42.0)) == Vec2(0, 0));
}

TEST_CASE("camera validation and json") {
    auto cam = make_camera(0.0, 0, 0, 8, 8);
    CHECK_THROWS_AS(cam.validate(), ParameterError);
    cam = make_camera(3.5, 1.25, -2.0, 32, 16);
    const auto path = std::filesystem::temp_directory_path() / "avatar_camera.json";
    save_camera(path, cam);
    const auto r = load_camera(path);
    CHECK(r.scale == cam.scale);
    CHECK(r.translation == cam.translation);
    CHECK(r.width == 32);
    CHECK(r.height == 16);
    CHECK(r.depth_sign == -1);
}

TEST_CASE("fitted camera keeps every vertex in a 224 frame") {
    Rng rng(21);
    for (int trial = 0; trial < 10; ++trial) {
        TriMesh m = make_icosphere(2, rng.uniform(0.2, 2.0), Vec3(rng.uniform(-3, 3), rng.uniform(-3, 3), 0));
        for (auto& v : m.vertices) v.x() *= rng.uniform(0.3, 1.0);
        const auto cam = fit_camera(bounding_box(m), 224, 224);
        for (const Vec3& v : m.vertices) {
            const Vec2 p = cam.project(v);
            CHECK(p.x() >= 0.0);
            CHECK(p.y() >= 0.0);
            CHECK(p.x() <= 224.0);
            CHECK(p.y() <= 224.0);
        }
    }
}

TEST_CASE("single triangle coverage matches pixel-center oracle") {
    Rng rng(8);
    for (int trial = 0; trial < 50; ++trial) {
        const auto cam = make_camera(1.0, 0.0, 0.0, 24, 20);
        Vec3 a(rng.uniform(-2, 26), rng.uniform(-2, 22), -1.0);
        Vec3 b(rng.uniform(-2, 26), rng.uniform(-2, 22), -1.0);
        Vec3 c(rng.uniform(-2, 26), rng.uniform(-2, 22), -1.0);
        const TriMesh m = single_triangle(a, b, c);
        const auto r = rasterize(cam, m);
        for (int y = 0; y < 20; ++y) {
            for (int x = 0; x < 24; ++x) {
                const Vec2 p(x + 0.5, y + 0.5);
                // Random real-valued corners never put a center exactly on an edge.
                CHECK(static_cast<bool>(r.mask.at(x, y)) == strictly_inside(p, a.head<2>(), b.head<2>(), c.head<2>()));
            }
        }
    }
}

TEST_CASE("front-facing triangle is visible, back-facing is not") {
    const auto cam = make_camera(1.0, 0.0, 0.0, 8, 8, -1);
    // Counter-clockwise in (x, y) gives a +z normal; depth_sign -1 wants -z.
    const TriMesh ccw = single_triangle(Vec3(1, 1, 0), Vec3(7, 1, 0), Vec3(1, 7, 0));
    const TriMesh cw = single_triangle(Vec3(1, 1, 0), Vec3(1, 7, 0), Vec3(7, 1, 0));
    const auto r1 = rasterize(cam, cw);
    const auto r2 = rasterize(cam, ccw);
    CHECK(r1.face_visible[0] == 1);
    CHECK(r2.face_visible[0] == 0);
    CHECK(r1.mask == r2.mask);
    CHECK(count_true(r1.mask) > 0);
}

TEST_CASE("z-buffer: nearer face owns overlapping pixels") {
    for (int sign : {-1, 1}) {
        const auto cam = make_camera(1.0, 0.0, 0.0, 16, 16, sign);
        TriMesh m;
        // Face 0 at depth 1, face 1 at depth 2, identical footprint.
        m.vertices = {Vec3(1, 1, 1), Vec3(1, 14, 1), Vec3(14, 1, 1), Vec3(1, 1, 2), Vec3(1, 14, 2), Vec3(14, 1, 2)};
        m.faces = {Face{0, 1, 2}, Face{3, 4, 5}};
        const auto r = rasterize(cam, m);
        const int nearer = sign > 0 ? 1 : 0;
        const double nearer_depth = sign > 0 ? 2.0 : 1.0;
        int covered = 0;
        for (int y = 0; y < 16; ++y) {
            for (int x = 0; x < 16; ++x) {
                if (!r.mask.at(x, y)) continue;
                ++covered;
                CHECK(r.face_index.at(x, y) == nearer);
                CHECK(std::abs(r.depth.values.at(x, y) - nearer_depth) < 1e-12);
            }
        }
        CHECK(covered > 50);
    }
}

TEST_CASE("equal depths keep the lower face index") {
    const auto cam = make_camera(1.0, 0.0, 0.0, 12, 12);
    TriMesh m;
    m.vertices = {Vec3(1, 1, 0), Vec3(1, 11, 0), Vec3(11, 1, 0)};
    m.faces = {Face{0, 1, 2}, Face{0, 1, 2}};
    const auto r = rasterize(cam, m);
    for (int f : r.face_index.data()) CHECK(f <= 0);
}

TEST_CASE("shared edges are covered exactly once") {
    // A grid whose vertices land exactly on pixel centers exercises every tie.
    const auto cam = make_camera(1.0, 0.5, 0.5, 12, 12);
    const TriMesh g = make_grid(10, 10, 10.0, 10.0, 0.0, -1.0);
    const TriMesh moved = transformed(g, Mat3::Identity(), Vec3(5.0, 5.0, 0.0));
    const auto project2 = [&](int v) { return cam.project(moved.vertices[v]); };
    Grid<int> hits(12, 12, 0);
    for (const Face& f : moved.faces) {
        scan_triangle(project2(f[0]), project2(f[1]), project2(f[2]), 12, 12,
                      [&](int x, int y, double, double, double) { ++hits.at(x, y); });
    }
    int covered = 0;
    for (int h : hits.data()) {
        CHECK(h <= 1);
        covered += h;
    }
    // Half-open ownership covers a 10 x 10 block of centers for a 10-unit square.
    CHECK(covered == 100);
}

TEST_CASE("sphere: about half the faces are visible") {
    const TriMesh s = make_uv_sphere(64, 128, 1.0);
    const auto cam = fit_camera(bounding_box(s), 512, 512);
    const auto r = rasterize(cam, s);
    int visible = 0;
    for (auto v : r.face_visible) visible += v;
    const double frac = static_cast<double>(visible) / s.face_count();
    CHECK(frac >= 0.45);
    CHECK(frac <= 0.55);
    // Against the normal-based back-face count.
    const auto facing = front_facing(cam, s);
    int front = 0;
    for (auto f : facing) front += f;
    CHECK(std::abs(visible - front) <= 0.05 * s.face_count());
}

TEST_CASE("rasterizer is deterministic") {
    const TriMesh s = make_icosphere(3);
    const auto cam = fit_camera(bounding_box(s), 96, 80);
    const auto a = rasterize(cam, s);
    const auto b = rasterize(cam, s);
    CHECK(a.mask == b.mask);
    CHECK(a.face_index == b.face_index);
    CHECK(a.face_visible == b.face_visible);
    for (std::size_t i = 0; i < a.depth.values.data().size(); ++i) {
        const double x = a.depth.values.data()[i];
        const double y = b.depth.values.data()[i];
        CHECK(std::memcmp(&x, &y, sizeof(double)) == 0);
    }
}

TEST_CASE("integer translation shifts mask and depth") {
    Rng rng(4);
    const TriMesh s = make_icosphere(3, 1.0);
    for (int trial = 0; trial < 6; ++trial) {
        const auto cam = make_camera(20.0, 40.0 + rng.uniform(-0.4, 0.4), 35.0 + rng.uniform(-0.4, 0.4), 80, 70);
        const int dx = static_cast<int>(rng.index(9)) - 4;
        const int dy = static_cast<int>(rng.index(9)) - 4;
        const auto a = rasterize(cam, s);
        const auto b = rasterize(cam.shifted(dx, dy), s);
        CHECK(shifted(a.mask, dx, dy, std::uint8_t{0}) == b.mask);
        for (int y = 0; y < 70; ++y) {
            for (int x = 0; x < 80; ++x) {
                if (!b.mask.at(x, y)) continue;
                CHECK(std::abs(b.depth.values.at(x, y) - a.depth.values.at(x - dx, y - dy)) < 1e-12);
            }
        }
    }
}

TEST_CASE("subdivision leaves the silhouette unchanged") {
    Rng rng(17);
    for (int trial = 0; trial < 5; ++trial) {
        TriMesh m = make_icosphere(2, 1.0);
        for (auto& v : m.vertices) v *= rng.uniform(0.8, 1.2);
        const auto cam = fit_camera(bounding_box(m), 128, 128);
        const auto a = rasterize(cam, m);
        const auto b = rasterize(cam, subdivide_1to4(m));
        std::size_t inter = count_true(mask_and(a.mask, b.mask));
        std::size_t uni = count_true(a.mask) + count_true(b.mask) - inter;
        CHECK(inter == uni);
    }
}

TEST_CASE("out-of-frame mesh gives a valid empty render") {
    const auto cam = make_camera(1.0, 500.0, 500.0, 32, 32);
    const TriMesh s = make_icosphere(1);
    const auto r = rasterize(cam, s);
    CHECK(r.empty_render);
    CHECK(count_true(r.mask) == 0);
    const auto n = render_normal_map(cam, s);
    CHECK(count_true(n.valid) == 0);
}

TEST_CASE("flat square normals face the camera") {
    for (int sign : {-1, 1}) {
        const TriMesh g = make_grid(4, 4, 2.0, 2.0, 0.0, sign);
        const auto cam = fit_camera(bounding_box(g), 40, 40, 0.1, sign);
        const auto n = render_normal_map(cam, g);
        CHECK(count_true(n.valid) > 0);
        for (int y = 0; y < 40; ++y) {
            for (int x = 0; x < 40; ++x) {
                if (n.valid.at(x, y)) CHECK((n.normals.at(x, y) - Vec3(0, 0, sign)).norm() < 1e-12);
            }
        }
    }
}

TEST_CASE("sphere normal map matches the analytic sphere within 5 degrees") {
    const TriMesh s = make_uv_sphere(48, 96, 1.0);
    const auto cam = fit_camera(bounding_box(s), 160, 160);
    const auto r = rasterize(cam, s);
    const auto n = render_normal_map(r, s);
    double worst = 0.0;
    for (int y = 0; y < 160; ++y) {
        for (int x = 0; x < 160; ++x) {
            if (!n.valid.at(x, y)) continue;
            const int f = r.face_index.at(x, y);
            const Vec3& b = r.barycentric.at(x, y);
            const Face& face = s.faces[f];
            const Vec3 p = b[0] * s.vertices[face[0]] + b[1] * s.vertices[face[1]] + b[2] * s.vertices[face[2]];
            worst = std::max(worst, angle_deg(n.normals.at(x, y), p.normalized()));
        }
    }
    CHECK(worst < 5.0);
}

TEST_CASE("depth_to_normals on planes") {
    for (int sign : {-1, 1}) {
        const auto cam = make_camera(4.0, 0.0, 0.0, 10, 8, sign);
        DepthMap flat(10, 8);
        DepthMap ramp(10, 8);
        for (int y = 0; y < 8; ++y) {
            for (int x = 0; x < 10; ++x) {
                flat.values.at(x, y) = 2.5;
                ramp.values.at(x, y) = x / cam.scale;  // one pixel step raises z by 1/s meters
            }
        }
        const auto nf = depth_to_normals(flat, cam);
        const auto nr = depth_to_normals(ramp, cam);
        const Vec3 ramp_normal = Vec3(-sign, 0.0, sign).normalized();
        for (int y = 0; y < 8; ++y) {
            for (int x = 0; x < 10; ++x) {
                REQUIRE(nf.valid.at(x, y));
                CHECK((nf.normals.at(x, y) - Vec3(0, 0, sign)).norm() < 1e-12);
                CHECK((nr.normals.at(x, y) - ramp_normal).norm() < 1e-12);
            }
        }
    }
}

TEST_CASE("isolated foreground pixels have invalid normals") {
    const auto cam = make_camera(1.0, 0.0, 0.0, 6, 6);
    DepthMap d(6, 6);
    d.values.at(1, 1) = 1.0;
    d.values.at(4, 2) = 1.0;
    d.values.at(5, 2) = 1.0;  // neighbor along x only
    const auto n = depth_to_normals(d, cam);
    CHECK(count_true(n.valid) == 0);
}

TEST_CASE("depth normals agree with rendered normals away from the limb") {
    const TriMesh s = make_uv_sphere(64, 128, 1.0);
    const auto cam = fit_camera(bounding_box(s), 200, 200);
    const auto r = rasterize(cam, s);
    const auto rendered = render_normal_map(r, s);
    const auto from_depth = depth_to_normals(r.depth, cam);
    double worst = 0.0;
    int checked = 0;
    for (int y = 0; y < 200; ++y) {
        for (int x = 0; x < 200; ++x) {
            if (!rendered.valid.at(x, y) || !from_depth.valid.at(x, y)) continue;
            // Away from the limb: the view-facing component stays large.
            if (std::abs(rendered.normals.at(x, y).z()) < 0.5) continue;
            worst = std::max(worst, angle_deg(rendered.normals.at(x, y), from_depth.normals.at(x, y)));
            ++checked;
        }
    }
    CHECK(checked > 10000);
    CHECK(worst < 10.0);
}

TEST_CASE("mask png and depth grid round trip") {
    const auto dir = std::filesystem::temp_directory_path() / "avatar_camera_test";
    std::filesystem::create_directories(dir);
    const TriMesh s = make_icosphere(2);
    const auto cam = fit_camera(bounding_box(s), 33, 21);
    const auto r = rasterize(cam, s);
    write_mask_png(dir / "mask.png", r.mask);
    CHECK(read_mask_png(dir / "mask.png") == r.mask);
    write_depth(dir / "depth.fgrd", r.depth);
    const DepthMap d = read_depth(dir / "depth.fgrd");
    REQUIRE(d.width() == 33);
    for (int y = 0; y < 21; ++y) {
        for (int x = 0; x < 33; ++x) {
            CHECK(d.is_foreground(x, y) == r.depth.is_foreground(x, y));
            if (d.is_foreground(x, y))
                CHECK(d.values.at(x, y) == static_cast<double>(static_cast<float>(r.depth.values.at(x, y))));
        }
    }
    CHECK(std::filesystem::file_size(dir / "depth.fgrd") == 16 + 4 * 33 * 21);
}
