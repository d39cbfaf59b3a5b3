#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <set>

#include "avatar/camera/raster.hpp"
#include "avatar/deform/laplacian.hpp"
#include "avatar/error.hpp"
#include "avatar/geometry/body_template.hpp"
#include "avatar/geometry/primitives.hpp"
#include "avatar/handles/anchors.hpp"
#include "avatar/handles/crop.hpp"
#include "avatar/handles/joints.hpp"
#include "avatar/handles/predictor.hpp"
#include "avatar/random.hpp"

using namespace avatar;

namespace {

const BodyTemplate& body() {
    static const BodyTemplate t = make_body_template();
    return t;
}

const JointHandleSet& body_joints() {
    static const JointHandleSet h = make_joint_handles(body().mesh, body().joint_centers);
    return h;
}

WeakPerspectiveCamera body_camera() { return fit_camera(bounding_box(body().mesh), 224, 224, 0.1); }

double iou(const BinaryMask& a, const BinaryMask& b) {
    std::size_t inter = 0, uni = 0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        inter += a[i] && b[i];
        uni += a[i] || b[i];
    }
    return uni ? static_cast<double>(inter) / uni : 1.0;
}

double mean_joint_error(const TriMesh& mesh, const JointAnnotations& gt, const WeakPerspectiveCamera& cam) {
    const auto pos = joint_positions(mesh, body_joints(), cam);
    double sum = 0.0;
    for (int j = 0; j < body_joints().size(); ++j) sum += (pos[j] - gt.at(body_joints().names[j])).norm();
    return sum / body_joints().size();
}

// Template posed by moving every joint's handles by a random 3D offset.
TriMesh random_pose(Rng& rng, double magnitude) {
    DeformProblem p{body().mesh, {}, std::nullopt};
    for (const auto& set : body_joints().vertices) {
        const Vec3 d = magnitude * Vec3(rng.normal(), rng.normal(), rng.normal());
        for (int v : set) p.constraints.push_back(HandleConstraint::at_position(v, body().mesh.vertices[v] + d, 10.0));
    }
    return solve_deform(p);
}

TriMesh offset_along_normals(const TriMesh& mesh, double distance) {
    TriMesh out = mesh;
    const auto n = vertex_normals(mesh);
    for (int v = 0; v < mesh.vertex_count(); ++v) out.vertices[v] += distance * n[v];
    return out;
}

double max_vertex_distance(const TriMesh& a, const TriMesh& b) {
    double d = 0.0;
    for (int v = 0; v < a.vertex_count(); ++v) d = std::max(d, (a.vertices[v] - b.vertices[v]).norm());
    return d;
}

BinaryMask disk_mask(int w, int h, const Vec2& c, double r) {
    BinaryMask m(w, h, 0);
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) m.at(x, y) = (Vec2(x + 0.5, y + 0.5) - c).norm() <= r;
    }
    return m;
}

}  // namespace

TEST_CASE("joint position is the projected centroid") {
    TriMesh m;
    m.vertices = {Vec3(0, 0, 0), Vec3(2, 0, 0), Vec3(5, 7, 1)};
    JointHandleSet h{{"a", "b"}, {{0, 1}, {2}}};
    WeakPerspectiveCamera cam;
    cam.width = cam.height = 16;
    const auto pos = joint_positions(m, h, cam);
    CHECK(pos[0] == Vec2(1, 0));
    cam.scale = 3.0;
    cam.translation = Vec2(1, -2);
    CHECK((joint_positions(m, h, cam)[1] - cam.project(m.vertices[2])).norm() == 0.0);
}

TEST_CASE("template joint handles are ten disjoint non-empty sets") {
    const JointHandleSet& h = body_joints();
    CHECK_NOTHROW(h.validate(body().mesh.vertex_count()));
    CHECK(h.names == joint_names());
    // Each centroid lies near its joint center.
    const auto c = joint_centroids(body().mesh, h);
    for (int j = 0; j < h.size(); ++j) CHECK((c[j] - body().joint_centers[j].second).norm() < 0.06);
    JointHandleSet bad = h;
    bad.vertices[1].push_back(bad.vertices[0][0]);
    CHECK_THROWS_AS(bad.validate(body().mesh.vertex_count()), ParameterError);
}

TEST_CASE("joint handle and annotation files round trip") {
    const auto dir = std::filesystem::temp_directory_path();
    save_joint_handles(dir / "joints_rt.json", body_joints());
    const JointHandleSet back = load_joint_handles(dir / "joints_rt.json");
    CHECK(back.names == body_joints().names);
    CHECK(back.vertices == body_joints().vertices);
    const auto ann = joint_annotations(body().mesh, body_joints(), body_camera());
    save_joint_annotations(dir / "ann_rt.json", ann);
    const auto ann_back = load_joint_annotations(dir / "ann_rt.json");
    for (const auto& [name, p] : ann) CHECK((ann_back.at(name) - p).norm() < 1e-9);
}

TEST_CASE("oracle joint motion") {
    const auto cam = body_camera();
    const auto& m = body().mesh;
    auto gt = joint_annotations(m, body_joints(), cam);
    for (const Vec2& d : oracle_joint_motion(m, body_joints(), cam, gt).motion) CHECK(d.norm() == 0.0);

    auto shifted = gt;
    for (auto& [name, p] : shifted) p += Vec2(5, 0);
    for (const Vec2& d : oracle_joint_motion(m, body_joints(), cam, shifted).motion) CHECK((d - Vec2(5, 0)).norm() < 1e-12);

    SUBCASE("bent elbow matches a per-vertex projection average") {
        Rng rng(11);
        const TriMesh posed = random_pose(rng, 0.05);
        const auto target = joint_annotations(posed, body_joints(), cam);
        const auto motion = oracle_joint_motion(m, body_joints(), cam, target);
        for (int j = 0; j < body_joints().size(); ++j) {
            Vec2 a = Vec2::Zero(), b = Vec2::Zero();
            for (int v : body_joints().vertices[j]) {
                a += cam.project(posed.vertices[v]);
                b += cam.project(m.vertices[v]);
            }
            const Vec2 expected = (a - b) / static_cast<double>(body_joints().vertices[j].size());
            CHECK((motion.motion[j] - expected).norm() < 1e-9);
        }
    }

    SUBCASE("missing joint names the joint") {
        gt.erase("left_knee");
        try {
            oracle_joint_motion(m, body_joints(), cam, gt);
            FAIL("expected AnnotationError");
        } catch (const AnnotationError& e) {
            CHECK(std::string(e.what()).find("left_knee") != std::string::npos);
        }
    }
}

TEST_CASE("joint stage with zero motion is a fixed point") {
    const auto cam = body_camera();
    JointMotion zero{std::vector<Vec2>(10, Vec2::Zero())};
    CHECK(max_vertex_distance(apply_joint_stage(body().mesh, body_joints(), cam, zero), body().mesh) < 1e-9);
}

TEST_CASE("uniform joint motion shifts the silhouette") {
    const auto cam = body_camera();
    JointMotion shift{std::vector<Vec2>(10, Vec2(4, 0))};
    const TriMesh moved = apply_joint_stage(body().mesh, body_joints(), cam, shift);
    const BinaryMask expected = shifted(rasterize(cam, body().mesh).mask, 4, 0, std::uint8_t{0});
    CHECK(iou(rasterize(cam, moved).mask, expected) == 1.0);
}

TEST_CASE("a single moved joint reaches its target") {
    const auto cam = body_camera();
    JointMotion motion{std::vector<Vec2>(10, Vec2::Zero())};
    const int elbow = 4;
    motion.motion[elbow] = Vec2(6, -8);
    const auto before = joint_positions(body().mesh, body_joints(), cam);
    const TriMesh moved = apply_joint_stage(body().mesh, body_joints(), cam, motion);
    const auto after = joint_positions(moved, body_joints(), cam);
    CHECK((after[elbow] - (before[elbow] + motion.motion[elbow])).norm() < 0.5);
}

TEST_CASE("joint stage reduces 2D joint error on random poses") {
    const auto cam = body_camera();
    Rng rng(2024);
    int tried = 0;
    for (int trial = 0; trial < 8; ++trial) {
        const TriMesh posed = random_pose(rng, 0.04);
        const auto gt = joint_annotations(posed, body_joints(), cam);
        const double before = mean_joint_error(body().mesh, gt, cam);
        if (before <= 1.0) continue;
        ++tried;
        OracleJointPredictor predictor(gt);
        const RgbImage none;
        const auto motion = predictor.predict({body().mesh, cam, none}, body_joints());
        const TriMesh fitted = apply_joint_stage(body().mesh, body_joints(), cam, motion);
        CHECK(mean_joint_error(fitted, gt, cam) < before);
    }
    CHECK(tried >= 6);
}

TEST_CASE("anchor selection covers trivial cases") {
    TriMesh pts;
    // Centrally symmetric set; every normal is (0, 0, 1) and the center point is a vertex.
    pts = make_grid(2, 2, 2.0, 2.0);
    const VertexLabels none;
    SUBCASE("k equals the eligible count") {
        const AnchorSet all = select_anchors(pts, pts.vertex_count(), 0.1, none, {}, 3);
        std::vector<int> s = all.anchors;
        std::sort(s.begin(), s.end());
        std::vector<int> expected(pts.vertex_count());
        for (int i = 0; i < pts.vertex_count(); ++i) expected[i] = i;
        CHECK(s == expected);
    }
    SUBCASE("one cluster picks the vertex nearest the centroid") {
        const AnchorSet one = select_anchors(pts, 1, 0.1, none, {}, 3);
        REQUIRE(one.size() == 1);
        CHECK(pts.vertices[one.anchors[0]].head<2>().norm() == 0.0);
    }
    SUBCASE("too many clusters") {
        CHECK_THROWS_AS(select_anchors(pts, pts.vertex_count() + 1, 0.1, none, {}, 3), ParameterError);
        VertexLabels labels{{"face", {0, 1, 2}}};
        CHECK_THROWS_AS(select_anchors(pts, pts.vertex_count() - 2, 0.1, labels, {"face"}, 3), ParameterError);
        CHECK_THROWS_AS(select_anchors(pts, 0, 0.1, none, {}, 3), ParameterError);
    }
}

TEST_CASE("template anchors are deterministic, distinct, unlabeled and spread out") {
    const std::set<std::string> excluded{"face", "fingers", "toes"};
    const AnchorSet a = select_anchors(body().mesh, 200, 0.1, body().labels, excluded, 7);
    const AnchorSet b = select_anchors(body().mesh, 200, 0.1, body().labels, excluded, 7);
    CHECK(a.anchors == b.anchors);
    REQUIRE(a.size() == 200);
    CHECK(std::set<int>(a.anchors.begin(), a.anchors.end()).size() == 200);
    std::set<int> labeled;
    for (const auto& name : excluded) labeled.insert(body().labels.at(name).begin(), body().labels.at(name).end());
    for (int v : a.anchors) CHECK(!labeled.count(v));
    CHECK(a.features.size() == body().mesh.vertex_count() - labeled.size());

    double worst = 0.0;
    for (int i : a.anchors) {
        double nn = 1e300;
        for (int j : a.anchors) {
            if (i != j) nn = std::min(nn, (body().mesh.vertices[i] - body().mesh.vertices[j]).norm());
        }
        worst = std::max(worst, nn);
    }
    MESSAGE("largest nearest-anchor distance " << worst);
    CHECK(worst < 0.15);

    const AnchorSet c = select_anchors(body().mesh, 200, 0.1, body().labels, excluded, 8);
    CHECK(c.anchors != a.anchors);

    const auto path = std::filesystem::temp_directory_path() / "anchors_rt.json";
    save_anchor_set(path, a);
    CHECK(load_anchor_set(path).anchors == a.anchors);
}

TEST_CASE("ray distance to a silhouette") {
    const BinaryMask disk = disk_mask(200, 200, Vec2(100, 100), 50);
    SUBCASE("outside boundary ahead") {
        const auto d = silhouette_normal_distance(Vec2(130, 100), Vec2(1, 0), disk, 40);
        REQUIRE(d);
        CHECK(std::abs(*d - 20.0) <= 0.5);
    }
    SUBCASE("boundary behind gives a negative distance") {
        const auto d = silhouette_normal_distance(Vec2(170, 100), Vec2(1, 0), disk, 40);
        REQUIRE(d);
        CHECK(std::abs(*d + 20.0) <= 0.5);
    }
    SUBCASE("diagonal ray") {
        const Vec2 n = Vec2(1, 1).normalized();
        const auto d = silhouette_normal_distance(Vec2(100, 100) + 30.0 * n, n, disk, 40);
        REQUIRE(d);
        CHECK(std::abs(*d - 20.0) <= 0.75);
    }
    SUBCASE("on the boundary") {
        const auto d = silhouette_normal_distance(Vec2(150, 100), Vec2(1, 0), disk, 16);
        REQUIRE(d);
        CHECK(std::abs(*d) <= 0.5);
    }
    SUBCASE("empty mask and short range") {
        CHECK(!silhouette_normal_distance(Vec2(50, 50), Vec2(1, 0), BinaryMask(200, 200, 0), 16));
        CHECK(!silhouette_normal_distance(Vec2(100, 100), Vec2(1, 0), disk, 16));
    }
    SUBCASE("out of frame") {
        CHECK_THROWS_AS(silhouette_normal_distance(Vec2(-1, 5), Vec2(1, 0), disk, 16), OutOfFrameError);
        CHECK_THROWS_AS(silhouette_normal_distance(Vec2(5, 200), Vec2(1, 0), disk, 16), OutOfFrameError);
    }
}

TEST_CASE("self-rendered silhouette gives zero anchor motion") {
    const auto cam = body_camera();
    const std::vector<int> anchors = select_anchors(body().mesh, 200, 0.1, body().labels, {"face"}, 1).anchors;
    Rng rng(5);
    for (int trial = 0; trial < 3; ++trial) {
        const TriMesh mesh = trial == 0 ? body().mesh : random_pose(rng, 0.05);
        const auto motion = oracle_anchor_motion(mesh, anchors, cam, rasterize(cam, mesh).mask);
        CHECK(motion.participating_count() > 20);
        for (int a = 0; a < static_cast<int>(anchors.size()); ++a) {
            if (motion.participating(a)) CHECK(std::abs(motion.scalar[a]) <= 0.5 / cam.scale);
        }
    }
}

TEST_CASE("inflated mesh against the original silhouette moves inward") {
    const auto count_inward = [](const AnchorMotion& m) {
        int n = 0;
        for (int a = 0; a < static_cast<int>(m.scalar.size()); ++a) n += m.participating(a) && m.scalar[a] < 0.0;
        return n;
    };
    SUBCASE("sphere scaled by 5%") {
        const TriMesh sphere = make_icosphere(3, 0.8);
        WeakPerspectiveCamera cam = fit_camera(bounding_box(sphere), 224, 224, 0.2);
        const std::vector<int> anchors = select_anchors(sphere, 200, 0.1, {}, {}, 2).anchors;
        const TriMesh inflated = transformed(sphere, 1.05 * Mat3::Identity(), Vec3::Zero());
        const auto motion = oracle_anchor_motion(inflated, anchors, cam, rasterize(cam, sphere).mask);
        CHECK(motion.participating_count() > 20);
        CHECK(count_inward(motion) == motion.participating_count());
    }
    SUBCASE("template offset 2 cm along its normals") {
        const auto cam = body_camera();
        const std::vector<int> anchors = select_anchors(body().mesh, 200, 0.1, body().labels, {"face"}, 1).anchors;
        const auto motion = oracle_anchor_motion(offset_along_normals(body().mesh, 0.02), anchors, cam,
                                                 rasterize(cam, body().mesh).mask);
        MESSAGE("participating " << motion.participating_count() << ", inward " << count_inward(motion));
        CHECK(motion.participating_count() > 20);
        CHECK(count_inward(motion) >= 0.9 * motion.participating_count());
    }
}

TEST_CASE("far silhouette exceeds the exclusion distance") {
    WeakPerspectiveCamera cam;
    cam.scale = 100.0;
    cam.translation = Vec2(100, 100);
    cam.width = cam.height = 200;
    // Tetrahedron whose vertex 0 has the outward normal (1, 0, 0).
    TriMesh m;
    m.vertices = {Vec3(0.2, 0, 0), Vec3(-0.2, -0.1, 0.1), Vec3(-0.2, 0.1, 0.1), Vec3(-0.2, 0, -0.1)};
    m.faces = {{0, 2, 1}, {0, 3, 2}, {0, 1, 3}, {1, 2, 3}};
    REQUIRE((vertex_normals(m)[0] - Vec3(1, 0, 0)).norm() < 1e-12);
    // Target silhouette: the mesh's own, 15 px (0.15 m) further right.
    const BinaryMask gt = shifted(rasterize(cam, m).mask, 15, 0, std::uint8_t{0});
    AnchorMotionOptions opt;
    opt.max_search = 40.0;
    const auto motion = oracle_anchor_motion(m, {0}, cam, gt, opt);
    CHECK(motion.scalar[0] == doctest::Approx(0.15).epsilon(1e-12));
    CHECK(motion.status[0] == AnchorStatus::TooFar);
    opt.exclusion_distance = 0.2;
    CHECK(oracle_anchor_motion(m, {0}, cam, gt, opt).participating(0));
}

TEST_CASE("anchor stage with zero scalars is a fixed point") {
    const std::vector<int> anchors{0, 100, 2000, 5000};
    AnchorMotion zero{std::vector<double>(4, 0.0), std::vector<AnchorStatus>(4, AnchorStatus::Participating)};
    CHECK(max_vertex_distance(apply_anchor_stage(body().mesh, anchors, zero), body().mesh) < 1e-9);
    AnchorMotion off{std::vector<double>(4, 0.01), std::vector<AnchorStatus>(4, AnchorStatus::NoCrossing)};
    CHECK_THROWS_AS(apply_anchor_stage(body().mesh, anchors, off), NoConstraintsError);
}

TEST_CASE("anchor stage inflates a sphere") {
    const double r = 1.0;
    const TriMesh sphere = make_icosphere(3, r);
    const std::vector<int> anchors = select_anchors(sphere, 200, 0.1, {}, {}, 9).anchors;
    AnchorMotion grow{std::vector<double>(anchors.size(), 0.1 * r),
                      std::vector<AnchorStatus>(anchors.size(), AnchorStatus::Participating)};
    const TriMesh out = apply_anchor_stage(sphere, anchors, grow);
    double err = 0.0;
    for (const Vec3& v : out.vertices) err += std::abs(v.norm() - 1.1 * r);
    err /= out.vertex_count();
    MESSAGE("mean radial error " << err / (1.1 * r));
    CHECK(err / (1.1 * r) < 0.01);
}

TEST_CASE("anchor stage improves silhouette overlap on an inflated target") {
    const auto cam = body_camera();
    const std::vector<int> anchors =
        select_anchors(body().mesh, 200, 0.1, body().labels, {"face", "fingers", "toes"}, 7).anchors;
    const BinaryMask gt = rasterize(cam, offset_along_normals(body().mesh, 0.02)).mask;
    const double before = iou(rasterize(cam, body().mesh).mask, gt);
    OracleAnchorPredictor predictor(gt, {});
    const RgbImage none;
    const auto motion = predictor.predict({body().mesh, cam, none}, anchors);
    const double after = iou(rasterize(cam, apply_anchor_stage(body().mesh, anchors, motion)).mask, gt);
    MESSAGE("IoU " << before << " -> " << after);
    CHECK(after > before);
}

TEST_CASE("crop windows") {
    Grid<int> img(224, 224);
    for (int y = 0; y < 224; ++y) {
        for (int x = 0; x < 224; ++x) img.at(x, y) = 1 + x + 1000 * y;
    }
    SUBCASE("center crop") {
        const auto p = crop_windows(img, {Vec2(112, 112)}, 64);
        REQUIRE(p.size() == 1);
        bool same = true;
        for (int y = 0; y < 64; ++y) {
            for (int x = 0; x < 64; ++x) same &= p[0].at(x, y) == img.at(80 + x, 80 + y);
        }
        CHECK(same);
    }
    SUBCASE("corner crop is zero padded") {
        const auto p = crop_windows(img, {Vec2(0, 0)}, 32);
        for (int y = 0; y < 32; ++y) {
            for (int x = 0; x < 32; ++x) {
                const int expected = (x < 16 || y < 16) ? 0 : img.at(x - 16, y - 16);
                REQUIRE(p[0].at(x, y) == expected);
            }
        }
    }
    SUBCASE("ten joint crops") {
        const auto p = crop_windows(img, joint_positions(body().mesh, body_joints(), body_camera()), 64);
        CHECK(p.size() == 10);
        for (const auto& g : p) CHECK((g.width() == 64 && g.height() == 64));
    }
    CHECK_THROWS_AS(crop_windows(img, {Vec2(0, 0)}, 33), ParameterError);
}
