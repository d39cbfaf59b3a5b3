#pragma once

#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "avatar/eval/metrics.hpp"
#include "avatar/geometry/symmetry.hpp"
#include "avatar/handles/predictor.hpp"
#include "avatar/pipeline/config.hpp"

namespace avatar {

// Fixed stage order; "initial" records the input mesh.
inline const std::vector<std::string>& stage_names() {
    static const std::vector<std::string> names{"initial", "joint", "anchor", "subdivide", "vertex", "texture"};
    return names;
}

struct StageRecord {
    std::string stage;
    std::filesystem::path snapshot;  // mesh OBJ relative to the output directory; empty when not persisted
    StageMetrics metrics;
    double wall_time_s = 0.0;
};

/// Loaded inputs of one run. Optional members disable the metrics or stages
/// that need them.
struct PipelineInputs {
    TriMesh mesh;
    WeakPerspectiveCamera camera;
    RgbImage image;                           // empty when unused
    std::optional<BinaryMask> silhouette;
    std::optional<JointAnnotations> joints;
    std::optional<TriMesh> gt_mesh;
};

/// Template-topology assets: joint handles, anchor indices and the vertex
/// symmetry (texture stage).
struct PipelineAssets {
    JointHandleSet handles;
    std::vector<int> anchors;
    SymmetryMap symmetry;
};

struct PipelineResult {
    std::vector<StageRecord> records;
    MetricsReport report;  // final values plus one breakdown entry per record
    TriMesh mesh;          // final mesh
    UVTexture texture;     // completed texture (texture stage only)
    UVMask texture_mask;   // visible texels before completion
};

/// Predictors used by the handle stages; null members fall back to the
/// oracles built from the inputs.
struct PipelinePredictors {
    JointPredictor* joint = nullptr;
    AnchorPredictor* anchor = nullptr;
};

/// Runs the enabled stages in order joint, anchor, subdivide, vertex,
/// texture. When `output_dir` is set, each stage writes its snapshot, depth,
/// silhouette, metrics and stage-specific products into `NN_<stage>/`, then
/// `records.json` and `metrics.json` are rewritten; wall times go only to
/// `timings.json` so the other artifacts are reproducible byte for byte. A
/// failing stage throws StageError naming it after writing `failure.json`.
PipelineResult run_pipeline(const PipelineConfig& config, const PipelineInputs& inputs, const PipelineAssets& assets,
                            const std::optional<std::filesystem::path>& output_dir,
                            const PipelinePredictors& predictors = {});

/// File-based entry: validates the config (ConfigError), loads inputs and
/// assets, builds the configured predictors and runs with persistence into
/// config.output_dir.
PipelineResult run_pipeline(const PipelineConfig& config);

PipelineInputs load_inputs(const PipelineConfig& config);

/// Loads the asset files named by the config; empty paths use the built-in
/// template assets (anchors selected with config.seed). Throws ConfigError
/// when an asset does not fit the mesh.
PipelineAssets load_assets(const PipelineConfig& config, int vertex_count);

// Built-in template assets with anchors selected by K-means from `seed`.
PipelineAssets template_assets(int anchor_count = 200, double normal_weight = 0.1, std::uint64_t seed = 7);

/// Metrics of `mesh` against whatever ground truth the inputs carry.
StageMetrics evaluate_stage(const std::string& stage, const TriMesh& mesh, const PipelineInputs& inputs,
                            const JointHandleSet& handles);

nlohmann::json records_to_json(const std::vector<StageRecord>& records);

/// Predictors that exchange files with an external command, invoked as
/// `<command> <request.json> <response.json>`. The request lists the handle
/// pixels and the crop patches (image and mesh silhouette PNGs) written next
/// to it. Joint responses hold {"motion": [[dx, dy], ...]} in handle order;
/// anchor responses hold {"scalar": [...], "participating": [...]}.
class ExternalJointPredictor : public JointPredictor {
public:
    ExternalJointPredictor(std::string command, std::filesystem::path workdir, int window = 64);
    JointMotion predict(const StageInput& input, const JointHandleSet& handles) override;

private:
    std::string command_;
    std::filesystem::path workdir_;
    int window_;
};

class ExternalAnchorPredictor : public AnchorPredictor {
public:
    ExternalAnchorPredictor(std::string command, std::filesystem::path workdir, int window = 32);
    AnchorMotion predict(const StageInput& input, const std::vector<int>& anchors) override;

private:
    std::string command_;
    std::filesystem::path workdir_;
    int window_;
};

}  // namespace avatar
