// One PASS/FAIL line per primary acceptance criterion; exit status 1 if any fails.
// Usage: acceptance [work_dir]

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "avatar/error.hpp"
#include "avatar/eval/metrics.hpp"
#include "avatar/geometry/body_template.hpp"
#include "avatar/geometry/primitives.hpp"
#include "avatar/pipeline/pipeline.hpp"
#include "avatar/pipeline/synthetic.hpp"
#include "avatar/random.hpp"
#include "avatar/shading/refine.hpp"
#include "avatar/texture/completion.hpp"
#include "support/files.hpp"
#include "support/oracles.hpp"

using namespace avatar;
using namespace avatar::oracle;
namespace fs = std::filesystem;

namespace {

using Clock = std::chrono::steady_clock;

// Accumulates failed checks with a short reason each; `detail` collects measured values.
struct Verdict {
    std::vector<std::string> failures;
    std::ostringstream detail;

    void check(bool ok, const std::string& what) {
        if (!ok) failures.push_back(what);
    }
};

const BodyTemplate& body() {
    static const BodyTemplate b = make_body_template();
    return b;
}

const PipelineAssets& assets() {
    static const PipelineAssets a = template_assets();
    return a;
}

// Closed meshes of varied topology: perturbed icospheres and UV spheres, boxes,
// tetrahedra and disjoint unions of two of them.
TriMesh random_closed_mesh(Rng& rng) {
    const auto single = [&rng]() {
        TriMesh m;
        switch (rng.index(4)) {
            case 0: m = make_icosphere(static_cast<int>(rng.index(3)), rng.uniform(0.5, 2.0)); break;
            case 1: m = make_uv_sphere(3 + static_cast<int>(rng.index(8)), 4 + static_cast<int>(rng.index(10))); break;
            case 2: m = make_cube(rng.uniform(0.2, 1.0)); break;
            default: m = make_tetrahedron(); break;
        }
        for (auto& v : m.vertices) v += 0.02 * Vec3(rng.normal(), rng.normal(), rng.normal());
        return m;
    };
    TriMesh m = single();
    if (rng.uniform() < 0.3) {
        TriMesh other = single();
        for (auto& v : other.vertices) v += Vec3(5.0, 0.0, 0.0);
        m = merge_meshes(m, other);
    }
    return m;
}

double max_abs_diff(const std::vector<Vec3>& a, const std::vector<Vec3>& b, const Vec3& shift = Vec3::Zero()) {
    double worst = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) worst = std::max(worst, (a[i] - b[i] - shift).cwiseAbs().maxCoeff());
    return worst;
}

void subdivision(Verdict& v) {
    const auto t0 = Clock::now();
    const TriMesh s = subdivide_1to4(body().mesh);
    const double secs = seconds_since(t0);
    v.check(body().mesh.vertex_count() == 6890 && body().mesh.face_count() == 13776, "template counts");
    v.check(s.vertex_count() == 27554, "template subdivides to " + std::to_string(s.vertex_count()));
    v.check(s.face_count() == 4 * 13776, "template face count");
    v.check(secs < 1.0, "runtime");
    Rng rng(101);
    int bad = 0;
    for (int t = 0; t < 50; ++t) {
        const TriMesh m = random_closed_mesh(rng);
        const TriMesh r = subdivide_1to4(m);
        const int e = static_cast<int>(unique_edges(m).size());
        if (r.vertex_count() != m.vertex_count() + e || r.face_count() != 4 * m.face_count()) ++bad;
    }
    v.check(bad == 0, std::to_string(bad) + " random meshes violate V'=V+E, F'=4F");
    v.detail << "V'=" << s.vertex_count() << " in " << secs << " s; 50 random meshes, " << bad << " violations";
}

void laplacian(Verdict& v) {
    Rng rng(202);
    double equivariance = 0.0, dense = 0.0, fixed = 0.0;
    for (int t = 0; t < 20; ++t) {
        const TriMesh m = random_closed_mesh(rng);
        // Every connected component needs a handle; the generator places at most two.
        auto cons = random_constraints(rng, m, 3 + static_cast<int>(rng.index(5)), 0.2);
        cons.push_back(HandleConstraint::at_position(0, m.vertices[0], 1.0));
        cons.push_back(HandleConstraint::at_position(m.vertex_count() - 1, m.vertices.back(), 1.0));
        const TriMesh a = solve_deform({m, cons, std::nullopt});
        const Vec3 shift(rng.uniform(-3, 3), rng.uniform(-3, 3), rng.uniform(-3, 3));
        TriMesh moved = transformed(m, Mat3::Identity(), shift);
        auto moved_cons = cons;
        for (auto& c : moved_cons) c.position += shift;
        const TriMesh b = solve_deform({moved, moved_cons, std::nullopt});
        equivariance = std::max(equivariance, max_abs_diff(b.vertices, a.vertices, shift));

        if (m.vertex_count() <= 20) {
            const auto o = dense_oracle(m.vertices, vertex_neighbors(m), cons);
            dense = std::max(dense, max_abs_diff(a.vertices, o));
        }
        std::vector<HandleConstraint> still;
        for (const auto& c : cons) still.push_back(HandleConstraint::at_position(c.vertex, m.vertices[c.vertex], c.weight));
        fixed = std::max(fixed, max_abs_diff(solve_deform({m, still, std::nullopt}).vertices, m.vertices));
    }
    // The dense comparison also runs on every small primitive so it never goes untested.
    int small = 0;
    for (int t = 0; t < 30; ++t) {
        TriMesh m = t % 3 == 0 ? make_tetrahedron() : t % 3 == 1 ? make_cube(0.5) : make_icosphere(0);
        for (auto& p : m.vertices) p += 0.1 * Vec3(rng.normal(), rng.normal(), rng.normal());
        const auto cons = random_constraints(rng, m, 1 + static_cast<int>(rng.index(4)), 0.3);
        const TriMesh r = solve_deform({m, cons, std::nullopt});
        dense = std::max(dense, max_abs_diff(r.vertices, dense_oracle(m.vertices, vertex_neighbors(m), cons)));
        ++small;
    }
    const TriMesh& tm = body().mesh;
    std::vector<HandleConstraint> still;
    for (int i = 0; i < tm.vertex_count(); i += 97) still.push_back(HandleConstraint::at_position(i, tm.vertices[i], 1.0));
    fixed = std::max(fixed, max_abs_diff(solve_deform({tm, still, std::nullopt}).vertices, tm.vertices));

    v.check(equivariance <= 1e-9, "translation equivariance");
    v.check(dense <= 1e-8, "dense equivalence");
    v.check(fixed <= 1e-9, "zero-displacement fixed point");
    v.detail << "equivariance " << equivariance << ", dense " << dense << " (" << small << "+ small meshes), fixed point "
             << fixed;
}

void sh_round_trip(Verdict& v) {
    const int size = 256;
    const NormalMap normals = sphere_normals(size);
    const GrayImage ones(size, size, 1.0);
    Rng rng(303);
    double worst = 0.0, slowest = 0.0;
    for (int t = 0; t < 5; ++t) {
        SHLighting truth;
        for (int k = 0; k < 9; ++k) truth.coeffs[k] = rng.uniform(-1.0, 1.0);
        const auto t0 = Clock::now();
        const GrayImage image = render_shading(truth, ones, normals);
        const SHLighting est = estimate_lighting(image, ones, normals, normals.valid, 0.0);
        slowest = std::max(slowest, seconds_since(t0));
        worst = std::max(worst, (est.coeffs - truth.coeffs).norm() / truth.coeffs.norm());
    }
    v.check(worst <= 1e-6, "relative error");
    v.check(slowest < 1.0, "runtime");
    v.detail << "relative error " << worst << ", " << slowest << " s";
}

void shading_oracle(Verdict& v) {
    const int size = 128;
    const auto cam = plane_camera(size);
    const DepthMap gt = bumpy_plane(size, 2024, 0.006);
    const DepthMap coarse = gaussian_blur(gt, 4.0);
    const GrayImage rho(size, size, 1.0);
    const SHLighting light = test_lighting();
    const BinaryMask mask(size, size, 1);
    const GrayImage image = render_shading(light, rho, depth_to_normals(gt, cam));
    const auto t0 = Clock::now();
    const DepthMap refined = refine_depth({coarse, image, rho, light, mask, cam, RefineConfig{}});
    const double secs = seconds_since(t0);
    const double photo0 = photometric_residual(coarse, image, rho, light, mask, cam);
    const double photo1 = photometric_residual(refined, image, rho, light, mask, cam);
    const double rmse0 = rmse(coarse, gt), rmse1 = rmse(refined, gt);

    // Central differences against the analytic gradient on random small patches.
    Rng rng(404);
    double grad = 0.0;
    for (int trial = 0; trial < 5; ++trial) {
        const int n = 8;
        WeakPerspectiveCamera pc = plane_camera(n);
        pc.scale = 30.0;
        pc.depth_sign = trial % 2 ? 1 : -1;
        DepthMap c(n, n), d(n, n);
        GrayImage img(n, n), alb(n, n);
        BinaryMask m(n, n, 0);
        for (std::size_t i = 0; i < c.values.size(); ++i) {
            if (rng.uniform() < 0.1) continue;
            c.values[i] = 1.0 + 0.02 * rng.uniform();
            d.values[i] = c.values[i] + 0.01 * rng.normal();
            img[i] = rng.uniform(0.2, 1.5);
            alb[i] = rng.uniform(0.5, 1.2);
            m[i] = rng.uniform() < 0.9;
        }
        const RefineProblem p{c, img, alb, light, m, pc, RefineConfig{}};
        std::vector<double> g;
        refine_objective(p, d, &g);
        double num = 0.0, den = 0.0;
        for (std::size_t i : refine_variables(p)) {
            const double h = 1e-6;
            DepthMap a = d, b = d;
            a.values[i] += h;
            b.values[i] -= h;
            const double fd = (refine_objective(p, a) - refine_objective(p, b)) / (2 * h);
            num += (g[i] - fd) * (g[i] - fd);
            den += fd * fd;
        }
        grad = std::max(grad, std::sqrt(num / den));
    }
    v.check(photo1 <= 0.5 * photo0, "photometric residual");
    v.check(rmse1 <= 0.7 * rmse0, "depth RMSE");
    v.check(grad <= 1e-4, "gradient check");
    v.check(secs < 30.0, "runtime");
    v.detail << "photometric -" << 100.0 * (1.0 - photo1 / photo0) << "%, depth RMSE -" << 100.0 * (1.0 - rmse1 / rmse0)
             << "%, gradient rel. error " << grad << ", " << secs << " s";
}

// One full harness run: writes every case and runs the file-based pipeline on it.
struct HarnessRun {
    std::vector<std::vector<double>> iou;  // [stage][case]
    std::vector<double> vertex_delta;      // IoU(vertex) - IoU(subdivide) per case
    double seconds = 0.0;
};

HarnessRun run_harness(const fs::path& root) {
    const auto t0 = Clock::now();
    fs::remove_all(root);
    HarnessRun run;
    run.iou.resize(stage_names().size());
    const auto suite = make_harness_suite(body(), assets().handles, assets().anchors, 20, 1);
    for (std::size_t i = 0; i < suite.size(); ++i) {
        const fs::path dir = root / ("case_" + std::to_string(100 + i).substr(1));
        save_synthetic_case(dir, suite[i]);
        PipelineConfig cfg = load_pipeline_config(dir / "case.cfg");
        cfg.output_dir = dir / "out";
        const PipelineResult r = run_pipeline(cfg);
        for (std::size_t s = 0; s < r.records.size(); ++s) run.iou[s].push_back(*r.records[s].metrics.sil_iou);
        run.vertex_delta.push_back(*r.records[4].metrics.sil_iou - *r.records[3].metrics.sil_iou);
    }
    run.seconds = seconds_since(t0);
    return run;
}

fs::path g_work;
HarnessRun g_first;

void pipeline_trend(Verdict& v) {
    g_first = run_harness(g_work / "run_a");
    std::vector<double> med;
    for (const auto& s : g_first.iou) med.push_back(median(s));
    double worst_delta = 0.0;
    for (double d : g_first.vertex_delta) worst_delta = std::max(worst_delta, std::abs(d));
    v.check(med[1] > med[0] && med[2] > med[1], "median IoU not strictly increasing initial -> joint -> anchor");
    v.check(med.back() >= 0.90, "final median IoU");
    v.check(worst_delta == 0.0, "vertex stage changed IoU");
    v.check(g_first.seconds < 300.0, "runtime");
    v.detail << "median IoU";
    for (std::size_t s = 0; s < med.size(); ++s) v.detail << ' ' << stage_names()[s] << '=' << med[s];
    v.detail << "; vertex max |dIoU| " << worst_delta << "; " << g_first.seconds << " s";
}

void chamfer(Verdict& v) {
    Rng rng(606);
    bool identity = chamfer_gt_to_pred(body().mesh, body().mesh) == 0.0;
    int mismatches = 0;
    for (int t = 0; t < 20; ++t) {
        const TriMesh gt = random_cloud(rng, 500, 1.0), pred = random_cloud(rng, 500, 1.0);
        identity = identity && chamfer_gt_to_pred(gt, gt) == 0.0;
        if (chamfer_gt_to_pred(gt, pred) != brute_chamfer(gt, pred, nullptr)) ++mismatches;
    }
    v.check(identity, "identical meshes");
    v.check(mismatches == 0, "accelerated differs from brute force");
    v.detail << "identity 0; " << mismatches << " of 20 pairs differ from brute force";
}

void texture(Verdict& v) {
    const int n = 256;
    const UVSymmetry sym = derive_uv_symmetry(body().mesh, body().symmetry, n, n);
    Rng rng(707);
    UVTexture tex(n, n, Rgb::Zero());
    for (auto& c : tex.data()) {
        c = Rgb(static_cast<float>(rng.uniform()), static_cast<float>(rng.uniform()), static_cast<float>(rng.uniform()));
    }
    // Blocky random visibility hiding about 60% of the texels.
    UVMask mask(n, n, 0);
    for (int by = 0; by < n / 16; ++by)
        for (int bx = 0; bx < n / 16; ++bx) {
            const bool vis = rng.uniform() >= 0.6;
            for (int y = 0; y < 16; ++y)
                for (int x = 0; x < 16; ++x) mask.at(bx * 16 + x, by * 16 + y) = vis;
        }
    const double hidden = 1.0 - static_cast<double>(count_true(mask)) / (n * n);

    const auto t0 = Clock::now();
    const UVTexture out = complete_texture(tex, mask, &sym, CompletionConfig{});
    const double secs = seconds_since(t0);
    std::size_t undefined = 0, altered = 0;
    for (std::size_t i = 0; i < out.size(); ++i) {
        if (!out[i].allFinite() || (out[i].array() < 0.0f).any() || (out[i].array() > 1.0f).any()) ++undefined;
        if (mask[i] && out[i] != tex[i]) ++altered;
    }

    const auto [ct, cm] = symmetric_composite(tex, mask, sym);
    const auto [ct2, cm2] = symmetric_composite(ct, cm, sym);
    const bool idempotent = ct2 == ct && cm2 == cm;
    std::size_t invisible_sources = 0;
    for (const UVMask* m : std::vector<const UVMask*>{&mask, &cm}) {
        for (const bool pref : {false, true}) {
            const FlowField flow = nearest_visible_flow(*m, &sym, {pref, 1.5});
            for (std::size_t i = 0; i < flow.size(); ++i) {
                const Vec2 s = flow[i];
                const bool integral = s.x() == std::round(s.x()) && s.y() == std::round(s.y());
                if (!integral || !m->at(static_cast<int>(s.x()), static_cast<int>(s.y()))) ++invisible_sources;
            }
        }
    }
    v.check(hidden >= 0.55 && hidden <= 0.65, "mask fraction");
    v.check(undefined == 0, "undefined texels");
    v.check(altered == 0, "visible texels altered");
    v.check(invisible_sources == 0, "flow sources not visible");
    v.check(idempotent, "composite not idempotent");
    v.check(secs < 2.0, "runtime");
    v.detail << 100.0 * hidden << "% hidden; undefined " << undefined << ", altered " << altered
             << ", invisible sources " << invisible_sources << ", idempotent " << (idempotent ? "yes" : "no") << ", "
             << secs << " s";
}

void determinism(Verdict& v) {
    run_harness(g_work / "run_b");
    const auto files = list_files(g_work / "run_a");
    const auto diff = tree_differences(g_work / "run_a", g_work / "run_b", {"timings.json"});
    v.check(files.size() > 20 * 30, "too few artifacts");
    v.check(diff.empty(), std::to_string(diff.size()) + " files differ" + (diff.empty() ? "" : ", first " + diff[0]));
    v.detail << files.size() << " files compared, " << diff.size() << " differ";
}

}  // namespace

int main(int argc, char** argv) {
    g_work = argc > 1 ? fs::path(argv[1]) : fs::temp_directory_path() / "avatar_acceptance";
    const std::vector<std::pair<std::string, std::function<void(Verdict&)>>> criteria{
        {"subdivision count", subdivision},
        {"laplacian solver", laplacian},
        {"SH round trip", sh_round_trip},
        {"shading refinement oracle", shading_oracle},
        {"oracle pipeline trend", pipeline_trend},
        {"chamfer", chamfer},
        {"texture completion", texture},
        {"determinism", determinism},
    };
    int failed = 0;
    for (const auto& [name, run] : criteria) {
        Verdict v;
        try {
            run(v);
        } catch (const std::exception& e) {
            v.failures.push_back(std::string("exception: ") + e.what());
        }
        std::string reasons;
        for (const auto& f : v.failures) reasons += (reasons.empty() ? "" : "; ") + f;
        std::cout << (v.failures.empty() ? "PASS " : "FAIL ") << name << ": " << v.detail.str()
                  << (reasons.empty() ? "" : " [" + reasons + "]") << std::endl;
        failed += !v.failures.empty();
    }
    std::cout << (failed ? "FAILED " : "ALL PASSED ") << criteria.size() - failed << "/" << criteria.size()
              << std::endl;
    return failed ? EXIT_FAILURE : EXIT_SUCCESS;
}
