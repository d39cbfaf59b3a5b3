// Command-line front end. Exit codes: 0 success, 2 configuration or usage
// error, 3 stage or runtime failure.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "avatar/camera/raster.hpp"
#include "avatar/error.hpp"
#include "avatar/geometry/obj_io.hpp"
#include "avatar/image/image_io.hpp"
#include "avatar/pipeline/pipeline.hpp"
#include "avatar/pipeline/synthetic.hpp"
#include "avatar/texture/completion.hpp"

using namespace avatar;
namespace fs = std::filesystem;

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitFailure = 3;

// Relative output directories resolve under $AVATAR_OUTPUT_ROOT when it is set.
fs::path output_path(const fs::path& p) {
    const char* root = std::getenv("AVATAR_OUTPUT_ROOT");
    if (p.is_relative() && root && *root) return fs::path(root) / p;
    return p;
}

// Value of `--config` (or `--config=`) in argv, if any.
std::optional<fs::path> config_argument(int argc, char** argv) {
    for (int i = 1; i < argc; ++i) {
        const std::string a = argv[i];
        if (a == "--config" && i + 1 < argc) return fs::path(argv[i + 1]);
        if (a.rfind("--config=", 0) == 0) return fs::path(a.substr(9));
    }
    return std::nullopt;
}

void print_records(const PipelineResult& r) {
    for (const auto& rec : r.records) {
        std::cout << rec.stage;
        if (rec.metrics.sil_iou) std::cout << "  iou " << *rec.metrics.sil_iou;
        if (rec.metrics.joint_err_px) std::cout << "  joint_px " << *rec.metrics.joint_err_px;
        if (rec.metrics.chamfer_full_mm) std::cout << "  chamfer_mm " << *rec.metrics.chamfer_full_mm;
        if (rec.metrics.chamfer_visible_mm) std::cout << "  chamfer_vis_mm " << *rec.metrics.chamfer_visible_mm;
        std::cout << '\n';
    }
}

SymmetryMap template_symmetry_for(const TriMesh& mesh, const fs::path& file) {
    if (!file.empty()) return load_symmetry(file);
    if (mesh.vertex_count() != kTemplateVertexCount) {
        throw ConfigError("no symmetry file given and the mesh does not have the template topology");
    }
    return template_assets(1).symmetry;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Single-image human body recovery: hierarchical mesh deformation and texture completion"};
    app.require_subcommand(1);

    // recover and stage share the pipeline options; a --config file supplies the
    // base values and explicit flags override it.
    PipelineConfig config;
    const auto config_file = config_argument(argc, argv);
    try {
        if (config_file) config = load_pipeline_config(*config_file);
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return kExitConfig;
    }
    std::string config_path_unused;
    bool print_config = false;

    auto* recover = app.add_subcommand("recover", "run every enabled stage");
    recover->add_option("--config", config_path_unused, "key = value config file");
    recover->add_flag("--print-config", print_config, "print the effective config and exit");
    add_pipeline_options(*recover, config);

    std::string stage_name;
    auto* stage = app.add_subcommand("stage", "run one stage (vertex also runs subdivide)");
    stage->add_option("name", stage_name, "joint, anchor, subdivide, vertex or texture")
        ->required()
        ->check(CLI::IsMember({"joint", "anchor", "subdivide", "vertex", "texture"}));
    stage->add_option("--config", config_path_unused, "key = value config file");
    add_pipeline_options(*stage, config);

    fs::path tex_mesh, tex_camera, tex_image, tex_symmetry, tex_out = "texture.png", tex_mask_out;
    int tex_size = kDefaultTextureSize;
    bool tex_no_symmetry = false;
    auto* texture = app.add_subcommand("texture", "project and complete the UV texture of a mesh");
    texture->add_option("--mesh", tex_mesh)->required();
    texture->add_option("--camera", tex_camera)->required();
    texture->add_option("--image", tex_image)->required();
    texture->add_option("--symmetry", tex_symmetry, "vertex symmetry JSON (template default)");
    texture->add_flag("--no-symmetry", tex_no_symmetry);
    texture->add_option("--size", tex_size)->check(CLI::Range(8, 8192));
    texture->add_option("--out", tex_out);
    texture->add_option("--mask-out", tex_mask_out, "visible-texel mask PNG");

    fs::path ev_mesh, ev_camera, ev_silhouette, ev_joints, ev_gt, ev_handles, ev_out;
    auto* eval = app.add_subcommand("eval", "metrics of a mesh against the given ground truth");
    eval->add_option("--mesh", ev_mesh)->required();
    eval->add_option("--camera", ev_camera)->required();
    eval->add_option("--silhouette", ev_silhouette);
    eval->add_option("--joints", ev_joints);
    eval->add_option("--gt-mesh", ev_gt);
    eval->add_option("--joint-handles", ev_handles, "joint handle JSON (template default)");
    eval->add_option("--out", ev_out, "metrics JSON");

    int syn_count = 20, syn_size = 224;
    std::uint64_t syn_seed = 1;
    fs::path syn_out = "harness";
    DeformSpec syn_spec;
    auto* synth = app.add_subcommand("synth", "write seeded synthetic cases");
    synth->add_option("--count", syn_count)->check(CLI::NonNegativeNumber);
    synth->add_option("--seed", syn_seed);
    synth->add_option("--size", syn_size)->check(CLI::Range(16, 4096));
    synth->add_option("--joint-magnitude", syn_spec.joint_magnitude);
    synth->add_option("--shape-magnitude", syn_spec.shape_magnitude);
    synth->add_option("--shape-controls", syn_spec.shape_controls);
    synth->add_option("--out", syn_out);

    fs::path rd_mesh, rd_texture, rd_out = "render.png";
    ViewAngles rd_view;
    int rd_size = 512;
    auto* render = app.add_subcommand("render", "render a textured mesh from a novel view");
    render->add_option("--mesh", rd_mesh)->required();
    render->add_option("--texture", rd_texture)->required();
    render->add_option("--azimuth", rd_view.azimuth_deg);
    render->add_option("--elevation", rd_view.elevation_deg);
    render->add_option("--size", rd_size)->check(CLI::Range(16, 8192));
    render->add_option("--out", rd_out);

    fs::path as_out = "assets";
    int as_count = 200;
    double as_normal_weight = 0.1;
    std::uint64_t as_seed = 7;
    auto* assets = app.add_subcommand("assets", "write the template mesh and its assets");
    assets->add_option("--out", as_out);
    assets->add_option("--anchor-count", as_count)->check(CLI::PositiveNumber);
    assets->add_option("--normal-weight", as_normal_weight);
    assets->add_option("--seed", as_seed);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : kExitConfig;
    }

    try {
        if (recover->parsed() || stage->parsed()) {
            if (stage->parsed()) {
                config.stages = StageToggles{false, false, false, false, false};
                if (stage_name == "joint") config.stages.joint = true;
                if (stage_name == "anchor") config.stages.anchor = true;
                if (stage_name == "subdivide") config.stages.subdivide = true;
                if (stage_name == "vertex") config.stages.subdivide = config.stages.vertex = true;
                if (stage_name == "texture") config.stages.texture = true;
            }
            config.output_dir = output_path(config.output_dir);
            if (print_config) {
                std::cout << format_pipeline_config(config);
                return 0;
            }
            const PipelineResult r = run_pipeline(config);
            print_records(r);
            std::cout << "outputs in " << config.output_dir.string() << '\n';
        } else if (texture->parsed()) {
            const TriMesh mesh = load_mesh(tex_mesh);
            const WeakPerspectiveCamera cam = load_camera(tex_camera);
            const RgbImage image = read_png(tex_image);
            const TextureProjection proj =
                project_visible_texture(mesh, cam, image, rasterize(cam, mesh), tex_size, tex_size);
            std::optional<UVSymmetry> sym;
            if (!tex_no_symmetry) {
                sym = derive_uv_symmetry(mesh, template_symmetry_for(mesh, tex_symmetry), tex_size, tex_size);
            }
            CompletionConfig cfg;
            cfg.use_symmetry = sym.has_value();
            const UVTexture out = complete_texture(proj.texture, proj.mask, sym ? &*sym : nullptr, cfg);
            write_png(output_path(tex_out), out);
            if (!tex_mask_out.empty()) write_mask_png(output_path(tex_mask_out), proj.mask);
            std::cout << count_true(proj.mask) << " visible texels of " << proj.mask.size() << '\n';
        } else if (eval->parsed()) {
            PipelineInputs in;
            in.mesh = load_mesh(ev_mesh);
            in.camera = load_camera(ev_camera);
            if (!ev_silhouette.empty()) in.silhouette = read_mask_png(ev_silhouette);
            if (!ev_joints.empty()) in.joints = load_joint_annotations(ev_joints);
            if (!ev_gt.empty()) in.gt_mesh = load_mesh(ev_gt);
            JointHandleSet handles;
            if (!ev_handles.empty()) handles = load_joint_handles(ev_handles);
            else if (in.joints) handles = template_assets(1).handles;
            const StageMetrics m = evaluate_stage("eval", in.mesh, in, handles);
            MetricsReport report;
            report.sil_iou = m.sil_iou;
            report.joint_err_px = m.joint_err_px;
            report.chamfer_full_mm = m.chamfer_full_mm;
            report.chamfer_visible_mm = m.chamfer_visible_mm;
            report.stages.push_back(m);
            std::cout << to_json(report).dump(2) << '\n';
            if (!ev_out.empty()) save_metrics(output_path(ev_out), report);
        } else if (synth->parsed()) {
            const BodyTemplate body = make_body_template();
            const PipelineAssets a = template_assets();
            const auto suite = make_harness_suite(body, a.handles, a.anchors, syn_count, syn_seed, syn_spec, syn_size);
            const fs::path root = output_path(syn_out);
            nlohmann::json index = nlohmann::json::array();
            for (std::size_t i = 0; i < suite.size(); ++i) {
                std::string name = std::to_string(i);
                name = "case_" + std::string(name.size() < 2 ? 2 - name.size() : 0, '0') + name;
                save_synthetic_case(root / name, suite[i]);
                index.push_back({{"case", name},
                                 {"azimuth", suite[i].view.azimuth_deg},
                                 {"elevation", suite[i].view.elevation_deg}});
            }
            std::ofstream(root / "suite.json") << index.dump(2) << '\n';
            std::cout << suite.size() << " cases in " << root.string() << '\n';
        } else if (render->parsed()) {
            const TriMesh mesh = load_mesh(rd_mesh);
            const UVTexture tex = read_png(rd_texture);
            const TriMesh turned = rotate_view(mesh, rd_view, vertex_centroid(mesh));
            const WeakPerspectiveCamera cam = fit_camera(bounding_box(turned), rd_size, rd_size);
            write_png(output_path(rd_out), render_textured(turned, cam, tex));
        } else if (assets->parsed()) {
            const BodyTemplate body = make_body_template();
            const PipelineAssets a = template_assets(as_count, as_normal_weight, as_seed);
            const fs::path root = output_path(as_out);
            fs::create_directories(root);
            save_mesh(root / "template.obj", body.mesh);
            save_labels(root / "labels.json", body.labels);
            save_symmetry(root / "symmetry.json", a.symmetry);
            save_joint_handles(root / "joint_handles.json", a.handles);
            AnchorSet anchors;
            anchors.anchors = a.anchors;
            save_anchor_set(root / "anchors.json", anchors);
            std::cout << "template assets in " << root.string() << '\n';
        }
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return kExitConfig;
    } catch (const StageError& e) {
        std::cerr << e.what() << '\n';
        return kExitFailure;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitFailure;
    }
    return 0;
}
