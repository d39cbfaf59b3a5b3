#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "avatar/camera/camera.hpp"
#include "avatar/geometry/mesh.hpp"
#include "avatar/image/grid.hpp"

namespace avatar {

/// |a and b| / |a or b|; 1 when both masks are empty. Throws AlignmentError on
/// a size mismatch.
double silhouette_iou(const BinaryMask& a, const BinaryMask& b);

// Euclidean distance per joint. Throws AnnotationError on a count mismatch.
std::vector<double> per_joint_error(const std::vector<Vec2>& pred, const std::vector<Vec2>& gt);

// Mean of per_joint_error; 0 for empty sets.
double joint_error(const std::vector<Vec2>& pred, const std::vector<Vec2>& gt);

/// Exact nearest-vertex search over a fixed point set (k-d tree). The
/// reported squared distance equals (p - q).squaredNorm() for the returned
/// point, so results match exhaustive search bit for bit.
class NearestVertex {
public:
    explicit NearestVertex(std::vector<Vec3> points);
    // Index of a nearest point and its squared distance. Throws ParameterError when empty.
    std::pair<int, double> query(const Vec3& p) const;

private:
    void build(int lo, int hi, int depth);
    void search(int lo, int hi, int depth, const Vec3& p, int& best, double& best_d2) const;

    std::vector<Vec3> points_;
    std::vector<int> order_;
};

/// Mean distance in millimeters from each GT vertex (restricted to
/// `visible_filter` when given) to its nearest predicted vertex. Meshes are in
/// meters. Throws ParameterError for empty meshes or a filter of the wrong
/// length and EmptySelectionError when the filter selects nothing.
double chamfer_gt_to_pred(const TriMesh& gt, const TriMesh& pred,
                          const std::optional<std::vector<std::uint8_t>>& visible_filter = std::nullopt);

// Vertex visible iff any incident face is visible in the rasterizer output.
std::vector<std::uint8_t> visible_vertex_filter(const TriMesh& mesh, const WeakPerspectiveCamera& camera);

struct StageMetrics {
    std::string stage;
    std::optional<double> sil_iou;
    std::optional<double> joint_err_px;
    std::optional<double> chamfer_full_mm;
    std::optional<double> chamfer_visible_mm;
};

/// Final metrics plus the per-stage breakdown. Absent values (no silhouette,
/// no ground-truth mesh, no joint annotation) serialize as null.
struct MetricsReport {
    std::optional<double> sil_iou;
    std::optional<double> joint_err_px;
    std::optional<double> chamfer_full_mm;
    std::optional<double> chamfer_visible_mm;
    std::vector<double> per_joint_err_px;
    std::vector<StageMetrics> stages;

    // Throws ParameterError when a value is negative or sil_iou is outside [0, 1].
    void validate() const;
};

nlohmann::json to_json(const MetricsReport& report);
MetricsReport metrics_from_json(const nlohmann::json& j);
void save_metrics(const std::filesystem::path& path, const MetricsReport& report);
MetricsReport load_metrics(const std::filesystem::path& path);

}  // namespace avatar
