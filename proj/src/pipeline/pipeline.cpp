#include "avatar/pipeline/pipeline.hpp"

#include <chrono>
#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <map>
#include <sstream>

#include <sys/wait.h>

#include "avatar/camera/raster.hpp"
#include "avatar/error.hpp"
#include "avatar/geometry/body_template.hpp"
#include "avatar/geometry/obj_io.hpp"
#include "avatar/handles/crop.hpp"
#include "avatar/image/image_io.hpp"
#include "avatar/shading/refine.hpp"
#include "avatar/texture/completion.hpp"

namespace avatar {

namespace {

const BodyTemplate& cached_template() {
    static const BodyTemplate body = make_body_template();
    return body;
}

const std::set<std::string>& excluded_anchor_labels() {
    static const std::set<std::string> labels{"face", "fingers", "toes"};
    return labels;
}

void write_json(const std::filesystem::path& path, const nlohmann::json& j) {
    std::ofstream out(path);
    if (!out) throw Error("cannot write " + path.string());
    out << j.dump(2) << '\n';
}

RgbImage gray_to_rgb(const GrayImage& g) {
    RgbImage out(g.width(), g.height(), Rgb::Zero());
    for (std::size_t i = 0; i < g.size(); ++i) out[i] = Rgb::Constant(static_cast<float>(std::clamp(g[i], 0.0, 1.0)));
    return out;
}

std::string shell_quote(const std::string& s) {
    std::string out = "'";
    for (char c : s) {
        if (c == '\'') out += "'\\''";
        else out += c;
    }
    return out + "'";
}

nlohmann::json run_external(const std::string& command, const std::filesystem::path& workdir,
                            const nlohmann::json& request) {
    const auto req = workdir / "request.json";
    const auto resp = workdir / "response.json";
    std::filesystem::remove(resp);
    write_json(req, request);
    const std::string line = command + " " + shell_quote(req.string()) + " " + shell_quote(resp.string());
    const int status = std::system(line.c_str());
    if (status != 0) {
        const std::string why = WIFEXITED(status) ? "exit code " + std::to_string(WEXITSTATUS(status))
                                                  : "status " + std::to_string(status);
        throw Error("external predictor failed with " + why + ": " + command);
    }
    std::ifstream in(resp);
    if (!in) throw FormatError("external predictor wrote no response " + resp.string(), 0);
    try {
        return nlohmann::json::parse(in);
    } catch (const nlohmann::json::exception& e) {
        throw FormatError("invalid predictor response " + resp.string() + ": " + e.what(), 0);
    }
}

// Writes the image and mesh-silhouette crops around `pixels` and returns the request body.
nlohmann::json crop_request(const StageInput& input, const std::vector<Vec2>& pixels, int window,
                            const std::filesystem::path& workdir, const std::string& kind) {
    std::filesystem::create_directories(workdir);
    const BinaryMask mesh_mask = rasterize(input.camera, input.mesh).mask;
    const auto mask_patches = crop_windows(mesh_mask, pixels, window, std::uint8_t{0});
    std::vector<RgbImage> image_patches;
    if (!input.image.empty()) image_patches = crop_windows(input.image, pixels, window, Rgb(Rgb::Zero()));
    nlohmann::json req{{"kind", kind}, {"window", window}, {"image_size", {input.camera.width, input.camera.height}}};
    nlohmann::json px = nlohmann::json::array(), img = nlohmann::json::array(), msk = nlohmann::json::array();
    for (std::size_t i = 0; i < pixels.size(); ++i) {
        px.push_back({pixels[i].x(), pixels[i].y()});
        std::ostringstream name;
        name << kind << '_' << std::setw(3) << std::setfill('0') << i;
        write_mask_png(workdir / (name.str() + "_mask.png"), mask_patches[i]);
        msk.push_back(name.str() + "_mask.png");
        if (!image_patches.empty()) {
            write_png(workdir / (name.str() + "_image.png"), image_patches[i]);
            img.push_back(name.str() + "_image.png");
        }
    }
    req["pixels"] = px;
    req["mask_patches"] = msk;
    req["image_patches"] = img;
    return req;
}

}  // namespace

ExternalJointPredictor::ExternalJointPredictor(std::string command, std::filesystem::path workdir, int window)
    : command_(std::move(command)), workdir_(std::move(workdir)), window_(window) {}

JointMotion ExternalJointPredictor::predict(const StageInput& input, const JointHandleSet& handles) {
    auto req = crop_request(input, joint_positions(input.mesh, handles, input.camera), window_, workdir_, "joint");
    req["names"] = handles.names;
    const auto resp = run_external(command_, workdir_, req);
    JointMotion out;
    try {
        for (const auto& m : resp.at("motion")) out.motion.emplace_back(m.at(0).get<double>(), m.at(1).get<double>());
    } catch (const nlohmann::json::exception& e) {
        throw FormatError(std::string("invalid joint predictor response: ") + e.what(), 0);
    }
    if (static_cast<int>(out.motion.size()) != handles.size()) throw AnnotationError("joint predictor returned the wrong motion count");
    return out;
}

ExternalAnchorPredictor::ExternalAnchorPredictor(std::string command, std::filesystem::path workdir, int window)
    : command_(std::move(command)), workdir_(std::move(workdir)), window_(window) {}

AnchorMotion ExternalAnchorPredictor::predict(const StageInput& input, const std::vector<int>& anchors) {
    std::vector<Vec2> pixels;
    for (int a : anchors) pixels.push_back(input.camera.project(input.mesh.vertices.at(a)));
    auto req = crop_request(input, pixels, window_, workdir_, "anchor");
    req["anchors"] = anchors;
    const auto resp = run_external(command_, workdir_, req);
    AnchorMotion out;
    try {
        out.scalar = resp.at("scalar").get<std::vector<double>>();
        const auto part = resp.at("participating").get<std::vector<bool>>();
        if (out.scalar.size() != anchors.size() || part.size() != anchors.size()) {
            throw FormatError("anchor predictor returned the wrong count", 0);
        }
        for (std::size_t i = 0; i < part.size(); ++i) {
            if (!std::isfinite(out.scalar[i])) throw FormatError("anchor predictor returned a non-finite scalar", 0);
            out.status.push_back(part[i] ? AnchorStatus::Participating : AnchorStatus::NoCrossing);
        }
    } catch (const nlohmann::json::exception& e) {
        throw FormatError(std::string("invalid anchor predictor response: ") + e.what(), 0);
    }
    return out;
}

PipelineAssets template_assets(int anchor_count, double normal_weight, std::uint64_t seed) {
    const BodyTemplate& body = cached_template();
    PipelineAssets a;
    a.handles = make_joint_handles(body.mesh, body.joint_centers);
    a.anchors = select_anchors(body.mesh, anchor_count, normal_weight, body.labels, excluded_anchor_labels(), seed).anchors;
    a.symmetry = body.symmetry;
    return a;
}

PipelineInputs load_inputs(const PipelineConfig& config) {
    PipelineInputs in;
    in.mesh = load_mesh(config.mesh);
    in.camera = load_camera(config.camera);
    if (!config.image.empty()) {
        in.image = read_png(config.image);
        if (!in.image.same_size(in.camera.width, in.camera.height)) {
            throw ConfigError("image size does not match the camera: " + config.image.string());
        }
    }
    if (!config.silhouette.empty()) {
        in.silhouette = read_mask_png(config.silhouette);
        if (!in.silhouette->same_size(in.camera.width, in.camera.height)) {
            throw ConfigError("silhouette size does not match the camera: " + config.silhouette.string());
        }
    }
    if (!config.joints.empty()) in.joints = load_joint_annotations(config.joints);
    if (!config.gt_mesh.empty()) in.gt_mesh = load_mesh(config.gt_mesh);
    return in;
}

PipelineAssets load_assets(const PipelineConfig& config, int vertex_count) {
    const bool builtin = config.joint_handles.empty() || config.anchors.empty() || config.symmetry.empty();
    if (builtin && vertex_count != kTemplateVertexCount) {
        throw ConfigError("built-in assets need a template-topology mesh (" + std::to_string(kTemplateVertexCount) +
                          " vertices); pass joint-handles, anchors and symmetry");
    }
    PipelineAssets a;
    const BodyTemplate* body = builtin ? &cached_template() : nullptr;
    a.handles = config.joint_handles.empty() ? make_joint_handles(body->mesh, body->joint_centers)
                                             : load_joint_handles(config.joint_handles);
    a.anchors = config.anchors.empty()
                    ? select_anchors(body->mesh, config.anchor_count, config.normal_weight, body->labels,
                                     excluded_anchor_labels(), config.seed)
                          .anchors
                    : load_anchor_set(config.anchors).anchors;
    a.symmetry = config.symmetry.empty() ? body->symmetry : load_symmetry(config.symmetry);
    try {
        a.handles.validate(vertex_count);
    } catch (const Error& e) {
        throw ConfigError(std::string("joint handles do not fit the mesh: ") + e.what());
    }
    for (int v : a.anchors) {
        if (v < 0 || v >= vertex_count) throw ConfigError("anchor index out of range: " + std::to_string(v));
    }
    return a;
}

StageMetrics evaluate_stage(const std::string& stage, const TriMesh& mesh, const PipelineInputs& inputs,
                            const JointHandleSet& handles) {
    StageMetrics m;
    m.stage = stage;
    if (inputs.silhouette) m.sil_iou = silhouette_iou(rasterize(inputs.camera, mesh).mask, *inputs.silhouette);
    if (inputs.joints) {
        std::vector<Vec2> gt;
        for (const auto& name : handles.names) {
            const auto it = inputs.joints->find(name);
            if (it == inputs.joints->end()) throw AnnotationError("missing annotation for joint '" + name + "'");
            gt.push_back(it->second);
        }
        m.joint_err_px = joint_error(joint_positions(mesh, handles, inputs.camera), gt);
    }
    if (inputs.gt_mesh) {
        m.chamfer_full_mm = chamfer_gt_to_pred(*inputs.gt_mesh, mesh);
        m.chamfer_visible_mm =
            chamfer_gt_to_pred(*inputs.gt_mesh, mesh, visible_vertex_filter(*inputs.gt_mesh, inputs.camera));
    }
    return m;
}

namespace {

nlohmann::json stage_metrics_json(const StageMetrics& s) {
    MetricsReport r;
    r.stages.push_back(s);
    return to_json(r)["stages"][0];
}

}  // namespace

nlohmann::json records_to_json(const std::vector<StageRecord>& records) {
    nlohmann::json out = nlohmann::json::array();
    for (const auto& r : records) {
        out.push_back({{"stage", r.stage}, {"snapshot", r.snapshot.generic_string()}, {"metrics", stage_metrics_json(r.metrics)}});
    }
    return out;
}

namespace {

struct StageContext {
    const PipelineConfig& config;
    const PipelineInputs& inputs;
    const PipelineAssets& assets;
    std::optional<std::filesystem::path> out;
    PipelineResult result;
    std::vector<double> times;

    std::optional<std::filesystem::path> stage_dir(const std::string& stage) const {
        if (!out) return std::nullopt;
        const auto& names = stage_names();
        const auto idx = std::find(names.begin(), names.end(), stage) - names.begin();
        std::ostringstream name;
        name << std::setw(2) << std::setfill('0') << idx << '_' << stage;
        const auto dir = *out / name.str();
        std::filesystem::create_directories(dir);
        return dir;
    }

    void write_summary() {
        if (!out) return;
        write_json(*out / "records.json", records_to_json(result.records));
        write_json(*out / "metrics.json", to_json(result.report));
        nlohmann::json t = nlohmann::json::array();
        for (std::size_t i = 0; i < result.records.size(); ++i) {
            t.push_back({{"stage", result.records[i].stage}, {"wall_time_s", result.records[i].wall_time_s}});
        }
        write_json(*out / "timings.json", t);
    }

    // Evaluates, persists and records the mesh produced by `stage`.
    void record(const std::string& stage, const TriMesh& mesh, double seconds,
                const std::optional<std::filesystem::path>& dir) {
        StageRecord rec;
        rec.stage = stage;
        rec.wall_time_s = seconds;
        rec.metrics = evaluate_stage(stage, mesh, inputs, assets.handles);
        if (dir) {
            save_mesh(*dir / "mesh.obj", mesh);
            const RasterResult raster = rasterize(inputs.camera, mesh);
            write_mask_png(*dir / "mask.png", raster.mask);
            write_depth_png(*dir / "depth.png", raster.depth, inputs.camera.depth_sign);
            MetricsReport single;
            single.sil_iou = rec.metrics.sil_iou;
            single.joint_err_px = rec.metrics.joint_err_px;
            single.chamfer_full_mm = rec.metrics.chamfer_full_mm;
            single.chamfer_visible_mm = rec.metrics.chamfer_visible_mm;
            write_json(*dir / "metrics.json", to_json(single));
            rec.snapshot = std::filesystem::relative(*dir / "mesh.obj", *out);
        }
        auto& rep = result.report;
        rep.sil_iou = rec.metrics.sil_iou;
        rep.joint_err_px = rec.metrics.joint_err_px;
        rep.chamfer_full_mm = rec.metrics.chamfer_full_mm;
        rep.chamfer_visible_mm = rec.metrics.chamfer_visible_mm;
        rep.per_joint_err_px.clear();
        if (inputs.joints) {
            std::vector<Vec2> gt;
            for (const auto& name : assets.handles.names) gt.push_back(inputs.joints->at(name));
            rep.per_joint_err_px = per_joint_error(joint_positions(mesh, assets.handles, inputs.camera), gt);
        }
        rep.stages.push_back(rec.metrics);
        result.records.push_back(std::move(rec));
        write_summary();
    }
};

nlohmann::json anchor_motion_json(const std::vector<int>& anchors, const AnchorMotion& m) {
    nlohmann::json list = nlohmann::json::array();
    for (std::size_t i = 0; i < anchors.size(); ++i) {
        list.push_back({{"vertex", anchors[i]}, {"scalar", m.scalar[i]}, {"status", static_cast<int>(m.status[i])}});
    }
    return {{"participating", m.participating_count()}, {"anchors", list}};
}

TriMesh vertex_stage(const PipelineConfig& config, const PipelineInputs& inputs, const TriMesh& mesh,
                     const std::optional<std::filesystem::path>& dir) {
    if (inputs.image.empty()) throw ConfigError("the vertex stage needs an input image");
    const auto& cam = inputs.camera;
    const RasterResult raster = rasterize(cam, mesh);
    const DepthMap& coarse = raster.depth;
    const BinaryMask mask = coarse.foreground();
    const GrayImage lum = luminance(inputs.image);
    const NormalMap normals = depth_to_normals(coarse, cam);
    const GrayImage ones(lum.width(), lum.height(), 1.0);
    const SHLighting bootstrap = estimate_lighting(lum, ones, normals, mask, config.refine.ridge);
    const GrayImage albedo = estimate_albedo(lum, normals, mask, bootstrap, config.refine.albedo_blur_radius,
                                             config.refine.shading_floor);
    const SHLighting lighting = estimate_lighting(lum, albedo, normals, mask, config.refine.ridge);
    const RefineProblem problem{coarse, lum, albedo, lighting, mask, cam, config.refine};
    RefineReport report;
    const DepthMap refined = refine_depth(problem, &report);
    const DepthMap magnified = magnify_details(coarse, refined, config.refine.beta);
    DisplacementReport disp;
    TriMesh out = depth_to_vertex_displacement(mesh, cam, magnified, vertex_visibility(mesh, raster.face_visible),
                                               &disp, config.min_view_cosine);
    if (dir) {
        write_depth(*dir / "coarse_depth.bin", coarse);
        write_depth(*dir / "refined_depth.bin", refined);
        write_depth(*dir / "magnified_depth.bin", magnified);
        write_png(*dir / "albedo.png", gray_to_rgb(albedo));
        save_lighting(*dir / "lighting.json", lighting);
        write_json(*dir / "refine.json", {{"initial_objective", report.initial_objective},
                                          {"final_objective", report.final_objective},
                                          {"iterations", report.iterations},
                                          {"moved_vertices", disp.moved},
                                          {"skipped_vertices", disp.skipped},
                                          {"grazing_vertices", disp.grazing}});
    }
    return out;
}

void texture_stage(const PipelineConfig& config, const PipelineInputs& inputs, const PipelineAssets& assets,
                   const TriMesh& mesh, PipelineResult& result, const std::optional<std::filesystem::path>& dir) {
    if (inputs.image.empty()) throw ConfigError("the texture stage needs an input image");
    const int n = config.texture_size;
    const RasterResult raster = rasterize(inputs.camera, mesh);
    const TextureProjection proj = project_visible_texture(mesh, inputs.camera, inputs.image, raster, n, n);
    // Subdivision keeps the atlas, so the input topology carries the texel mirror.
    std::optional<UVSymmetry> sym;
    if (config.completion.use_symmetry) sym = derive_uv_symmetry(inputs.mesh, assets.symmetry, n, n);
    result.texture = complete_texture(proj.texture, proj.mask, sym ? &*sym : nullptr, config.completion);
    result.texture_mask = proj.mask;
    if (dir) {
        write_png(*dir / "partial_texture.png", proj.texture);
        write_mask_png(*dir / "texture_mask.png", proj.mask);
        write_png(*dir / "texture.png", result.texture);
        write_png(*dir / "render.png", render_textured(raster, mesh, result.texture));
        write_json(*dir / "texture.json", {{"visible_texels", count_true(proj.mask)},
                                           {"faces_projected", proj.report.faces_projected},
                                           {"zero_area_faces", proj.report.zero_area_faces},
                                           {"occluded_texels", proj.report.occluded_texels}});
    }
}

}  // namespace

PipelineResult run_pipeline(const PipelineConfig& config, const PipelineInputs& inputs, const PipelineAssets& assets,
                            const std::optional<std::filesystem::path>& output_dir,
                            const PipelinePredictors& predictors) {
    StageContext ctx{config, inputs, assets, output_dir, {}, {}};
    if (output_dir) std::filesystem::create_directories(*output_dir);
    TriMesh mesh = inputs.mesh;
    const auto run = [&](const std::string& stage, auto&& body) {
        const auto t0 = std::chrono::steady_clock::now();
        const auto dir = ctx.stage_dir(stage);
        try {
            mesh = body(dir);
            const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
            ctx.record(stage, mesh, secs, dir);
        } catch (const std::exception& e) {
            if (output_dir) {
                write_json(*output_dir / "failure.json", {{"stage", stage}, {"error", e.what()}});
                ctx.write_summary();
            }
            throw StageError(stage, e.what());
        }
    };

    run("initial", [&](const auto&) { return mesh; });
    if (config.stages.joint) {
        run("joint", [&](const auto& dir) {
            if (!inputs.joints && !predictors.joint) throw ConfigError("the joint stage needs joint annotations");
            OracleJointPredictor oracle(inputs.joints ? *inputs.joints : JointAnnotations{});
            JointPredictor& p = predictors.joint ? *predictors.joint : oracle;
            const JointMotion motion = p.predict({mesh, inputs.camera, inputs.image}, assets.handles);
            if (dir) {
                nlohmann::json m = nlohmann::json::array();
                for (std::size_t j = 0; j < motion.motion.size(); ++j) {
                    m.push_back({{"name", assets.handles.names[j]}, {"dx", motion.motion[j].x()}, {"dy", motion.motion[j].y()}});
                }
                write_json(*dir / "motion.json", m);
            }
            return apply_joint_stage(mesh, assets.handles, inputs.camera, motion, config.joint_weight);
        });
    }
    if (config.stages.anchor) {
        run("anchor", [&](const auto& dir) {
            if (!inputs.silhouette && !predictors.anchor) throw ConfigError("the anchor stage needs a silhouette");
            OracleAnchorPredictor oracle(inputs.silhouette ? *inputs.silhouette : BinaryMask(), config.anchor_motion);
            AnchorPredictor& p = predictors.anchor ? *predictors.anchor : oracle;
            TriMesh current = mesh;
            nlohmann::json log = nlohmann::json::array();
            for (int it = 0; it < config.anchor_iterations; ++it) {
                const AnchorMotion motion = p.predict({current, inputs.camera, inputs.image}, assets.anchors);
                log.push_back(anchor_motion_json(assets.anchors, motion));
                current = apply_anchor_stage(current, assets.anchors, motion, config.anchor_weight);
            }
            if (dir) write_json(*dir / "motion.json", log);
            return current;
        });
    }
    if (config.stages.subdivide) {
        run("subdivide", [&](const auto&) { return subdivide_1to4(mesh); });
    }
    if (config.stages.vertex) {
        run("vertex", [&](const auto& dir) { return vertex_stage(config, inputs, mesh, dir); });
    }
    if (config.stages.texture) {
        run("texture", [&](const auto& dir) {
            texture_stage(config, inputs, assets, mesh, ctx.result, dir);
            return mesh;
        });
    }
    ctx.result.mesh = mesh;
    return std::move(ctx.result);
}

PipelineResult run_pipeline(const PipelineConfig& config) {
    config.validate();
    const PipelineInputs inputs = load_inputs(config);
    const PipelineAssets assets = load_assets(config, inputs.mesh.vertex_count());
    std::unique_ptr<JointPredictor> joint;
    std::unique_ptr<AnchorPredictor> anchor;
    if (config.joint_predictor != "oracle") {
        joint = std::make_unique<ExternalJointPredictor>(config.joint_predictor.substr(9),
                                                         config.output_dir / "predictor_joint", config.joint_window);
    }
    if (config.anchor_predictor != "oracle") {
        anchor = std::make_unique<ExternalAnchorPredictor>(config.anchor_predictor.substr(9),
                                                           config.output_dir / "predictor_anchor", config.anchor_window);
    }
    return run_pipeline(config, inputs, assets, config.output_dir, {joint.get(), anchor.get()});
}

}  // namespace avatar
