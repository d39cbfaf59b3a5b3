#include "avatar/pipeline/config.hpp"

#include <CLI11.hpp>

#include "avatar/error.hpp"

namespace avatar {

namespace {

bool is_external(const std::string& predictor) { return predictor.rfind("external:", 0) == 0; }

void require_file(const std::filesystem::path& path, const char* key, const char* stage) {
    if (path.empty()) throw ConfigError(std::string(key) + " is required by the " + stage + " stage");
    if (!std::filesystem::is_regular_file(path)) {
        throw ConfigError(std::string(key) + " file does not exist: " + path.string());
    }
}

void optional_file(const std::filesystem::path& path, const char* key) {
    if (!path.empty() && !std::filesystem::is_regular_file(path)) {
        throw ConfigError(std::string(key) + " file does not exist: " + path.string());
    }
}

}  // namespace

void PipelineConfig::validate() const {
    require_file(mesh, "mesh", "initial");
    require_file(camera, "camera", "initial");
    if (stages.joint) require_file(joints, "joints", "joint");
    else optional_file(joints, "joints");
    if (stages.anchor) require_file(silhouette, "silhouette", "anchor");
    else optional_file(silhouette, "silhouette");
    if (stages.vertex || stages.texture) require_file(image, "image", stages.vertex ? "vertex" : "texture");
    else optional_file(image, "image");
    optional_file(gt_mesh, "gt-mesh");
    optional_file(joint_handles, "joint-handles");
    optional_file(anchors, "anchors");
    optional_file(symmetry, "symmetry");
    if (stages.vertex && !stages.subdivide) throw ConfigError("the vertex stage needs the subdivide stage");
    if (output_dir.empty()) throw ConfigError("output-dir must not be empty");
    if (!(joint_weight > 0.0) || !(anchor_weight > 0.0)) throw ConfigError("handle weights must be positive");
    if (anchor_iterations < 1) throw ConfigError("anchor-iterations must be at least 1");
    if (anchor_count < 1) throw ConfigError("anchor-count must be at least 1");
    if (!(normal_weight >= 0.0)) throw ConfigError("normal-weight must be nonnegative");
    if (!(anchor_motion.max_search > 0.0) || !(anchor_motion.contour_band > 0.0) ||
        !(anchor_motion.exclusion_distance > 0.0) || !(anchor_motion.min_normal_projection >= 0.0)) {
        throw ConfigError("anchor motion thresholds must be positive");
    }
    try {
        refine.validate();
    } catch (const ParameterError& e) {
        throw ConfigError(e.what());
    }
    if (refine.max_iterations < 1 || refine.albedo_blur_radius < 0) throw ConfigError("invalid refine settings");
    if (!(min_view_cosine >= 0.0 && min_view_cosine < 1.0)) throw ConfigError("min-view-cosine must lie in [0, 1)");
    if (texture_size < 8) throw ConfigError("texture-size must be at least 8");
    if (!(completion.flow.gamma > 0.0) || completion.smoothing_iterations < 0 || !(completion.smoothing_sigma > 0.0)) {
        throw ConfigError("invalid texture completion settings");
    }
    for (const auto* p : {&joint_predictor, &anchor_predictor}) {
        if (*p != "oracle" && !(is_external(*p) && p->size() > 9)) {
            throw ConfigError("predictor must be 'oracle' or 'external:<command>', got '" + *p + "'");
        }
    }
    if (joint_window <= 0 || joint_window % 2 || anchor_window <= 0 || anchor_window % 2) {
        throw ConfigError("crop windows must be positive and even");
    }
}

void PipelineConfig::resolve_paths(const std::filesystem::path& base) {
    for (auto* p : {&image, &mesh, &camera, &joints, &silhouette, &gt_mesh, &joint_handles, &anchors, &symmetry}) {
        if (!p->empty() && p->is_relative()) *p = base / *p;
    }
}

void add_pipeline_options(CLI::App& app, PipelineConfig& c) {
    // CLI11 keeps no default for flags, so the current value is recorded for config_to_str.
    const auto toggle = [&app](const std::string& name, bool& value, const std::string& description = "") {
        app.add_flag("--" + name + ",!--no-" + name, value, description)->default_str(value ? "true" : "false");
    };
    app.option_defaults()->always_capture_default();
    app.add_option("--image", c.image, "input RGB image (PNG)");
    app.add_option("--mesh", c.mesh, "initial mesh (OBJ)");
    app.add_option("--camera", c.camera, "weak-perspective camera (JSON)");
    app.add_option("--joints", c.joints, "2D joint annotations (JSON)");
    app.add_option("--silhouette", c.silhouette, "target silhouette mask (PNG)");
    app.add_option("--gt-mesh", c.gt_mesh, "ground-truth mesh for 3D metrics (OBJ)");
    app.add_option("--joint-handles", c.joint_handles, "joint handle asset (JSON)");
    app.add_option("--anchors", c.anchors, "anchor asset (JSON)");
    app.add_option("--symmetry", c.symmetry, "vertex symmetry asset (JSON)");
    app.add_option("--output-dir", c.output_dir, "output directory");
    app.add_option("--seed", c.seed, "seed for anchor selection when no anchor asset is given");
    toggle("stage-joint", c.stages.joint, "run the joint stage");
    toggle("stage-anchor", c.stages.anchor, "run the anchor stage");
    toggle("stage-subdivide", c.stages.subdivide, "run the subdivision stage");
    toggle("stage-vertex", c.stages.vertex, "run the vertex stage");
    toggle("stage-texture", c.stages.texture, "run the texture stage");
    app.add_option("--joint-weight", c.joint_weight);
    app.add_option("--anchor-weight", c.anchor_weight);
    app.add_option("--anchor-iterations", c.anchor_iterations);
    app.add_option("--anchor-count", c.anchor_count);
    app.add_option("--normal-weight", c.normal_weight);
    app.add_option("--max-search", c.anchor_motion.max_search, "px");
    app.add_option("--contour-band", c.anchor_motion.contour_band, "px");
    app.add_option("--exclusion-distance", c.anchor_motion.exclusion_distance, "m");
    app.add_option("--min-normal-projection", c.anchor_motion.min_normal_projection);
    app.add_option("--lambda-photo", c.refine.lambda_photo);
    app.add_option("--lambda-data", c.refine.lambda_data);
    app.add_option("--lambda-smooth", c.refine.lambda_smooth);
    app.add_option("--beta", c.refine.beta, "detail magnification");
    app.add_option("--lighting-ridge", c.refine.ridge);
    app.add_option("--shading-floor", c.refine.shading_floor);
    app.add_option("--albedo-blur-radius", c.refine.albedo_blur_radius);
    app.add_option("--refine-iterations", c.refine.max_iterations);
    app.add_option("--min-view-cosine", c.min_view_cosine);
    app.add_option("--texture-size", c.texture_size);
    toggle("texture-symmetry", c.completion.use_symmetry);
    toggle("symmetry-preference", c.completion.flow.symmetry_preference);
    app.add_option("--symmetry-gamma", c.completion.flow.gamma);
    app.add_option("--smoothing-iterations", c.completion.smoothing_iterations);
    app.add_option("--smoothing-sigma", c.completion.smoothing_sigma);
    app.add_option("--joint-predictor", c.joint_predictor);
    app.add_option("--anchor-predictor", c.anchor_predictor);
    app.add_option("--joint-window", c.joint_window, "px");
    app.add_option("--anchor-window", c.anchor_window, "px");
}

PipelineConfig load_pipeline_config(const std::filesystem::path& path) {
    if (!std::filesystem::is_regular_file(path)) throw ConfigError("config file does not exist: " + path.string());
    PipelineConfig config;
    CLI::App app;
    add_pipeline_options(app, config);
    app.set_config("--config");
    app.allow_config_extras(false);
    try {
        // CLI11 takes a vector argument list in reverse order.
        app.parse(std::vector<std::string>{path.string(), "--config"});
    } catch (const CLI::ParseError& e) {
        throw ConfigError("invalid config " + path.string() + ": " + e.what());
    }
    config.resolve_paths(std::filesystem::absolute(path).parent_path());
    return config;
}

std::string format_pipeline_config(const PipelineConfig& config) {
    PipelineConfig copy = config;
    CLI::App app;
    add_pipeline_options(app, copy);
    app.parse(std::vector<std::string>{});
    return app.config_to_str(true, false);
}

}  // namespace avatar
