#pragma once

#include <cstdint>
#include <filesystem>
#include <string>

#include "avatar/handles/anchors.hpp"
#include "avatar/shading/refine.hpp"
#include "avatar/texture/completion.hpp"

namespace CLI {
class App;
}

namespace avatar {

struct StageToggles {
    bool joint = true;
    bool anchor = true;
    bool subdivide = true;
    bool vertex = true;
    bool texture = true;
};

/// Everything a pipeline run needs. Empty asset paths fall back to the
/// built-in template assets (valid only for template-topology meshes).
struct PipelineConfig {
    std::filesystem::path image;
    std::filesystem::path mesh;
    std::filesystem::path camera;
    std::filesystem::path joints;      // JSON list of {name, x, y}
    std::filesystem::path silhouette;  // mask PNG
    std::filesystem::path gt_mesh;     // optional, enables the Chamfer metrics
    std::filesystem::path joint_handles;
    std::filesystem::path anchors;
    std::filesystem::path symmetry;
    std::filesystem::path output_dir = "out";
    std::uint64_t seed = 7;

    StageToggles stages;
    double joint_weight = 10.0;
    double anchor_weight = 1.0;
    int anchor_iterations = 1;
    int anchor_count = 200;
    double normal_weight = 0.1;
    AnchorMotionOptions anchor_motion;
    RefineConfig refine;
    double min_view_cosine = 0.5;
    int texture_size = kDefaultTextureSize;
    CompletionConfig completion;
    std::string joint_predictor = "oracle";   // "oracle" or "external:<command>"
    std::string anchor_predictor = "oracle";  // "oracle" or "external:<command>"
    int joint_window = 64;
    int anchor_window = 32;

    /// Throws ConfigError for out-of-range values or a missing input required
    /// by an enabled stage; the message names the key and, for files, the path.
    void validate() const;

    // Resolves relative input paths against `base` (output_dir excluded).
    void resolve_paths(const std::filesystem::path& base);
};

/// Registers one option per config key on `app` (for example --joint-weight,
/// --stage-anchor / --no-stage-anchor); a config file uses the same keys
/// without dashes: `joint-weight = 10`.
void add_pipeline_options(CLI::App& app, PipelineConfig& config);

/// Reads a key-value config file (`key = value`, `#` comments). Relative
/// paths resolve against the file's directory. Unknown keys and malformed
/// values throw ConfigError.
PipelineConfig load_pipeline_config(const std::filesystem::path& path);

// Every key with its current value, in the load format.
std::string format_pipeline_config(const PipelineConfig& config);

}  // namespace avatar
