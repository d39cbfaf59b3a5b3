#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "avatar/camera/camera.hpp"
#include "avatar/geometry/mesh.hpp"
#include "avatar/geometry/symmetry.hpp"
#include "avatar/image/grid.hpp"

namespace avatar {

using Feature6 = Eigen::Matrix<double, 6, 1>;

/// Distinct anchor vertices, none carrying an excluded label. `features`
/// holds the clustered vectors [position; normal_weight * normal] of the
/// eligible vertices listed in `feature_vertices` (empty after loading).
struct AnchorSet {
    std::vector<int> anchors;
    std::vector<int> feature_vertices;
    std::vector<Feature6> features;

    int size() const { return static_cast<int>(anchors.size()); }
};

/// K-means anchor selection. k-means++ seeding from `seed`, then Lloyd
/// iterations until the assignment is stable or 100 iterations. A cluster that
/// empties is re-seeded at the point farthest from its own centroid (lowest
/// index on ties) that is not already a singleton cluster. Per cluster the
/// member nearest the centroid becomes the anchor.
/// Throws ParameterError when k is not in [1, eligible vertex count].
AnchorSet select_anchors(const TriMesh& mesh, int k, double normal_weight, const VertexLabels& labels,
                         const std::set<std::string>& excluded_labels, std::uint64_t seed);

// {"anchors": [...]}
void save_anchor_set(const std::filesystem::path& path, const AnchorSet& anchors);
AnchorSet load_anchor_set(const std::filesystem::path& path);

/// Signed distance along `normal_2d` from `pixel` to the nearest boundary
/// crossing of `mask`, sampled every 0.25 px over [-max_search, max_search].
/// A sample at point q reads pixel floor(q); outside the image is background.
/// A crossing sits midway between the two samples that disagree; on equal
/// distance the positive side wins. Throws OutOfFrameError when `pixel` is
/// outside the image.
std::optional<double> silhouette_normal_distance(const Vec2& pixel, const Vec2& normal_2d, const BinaryMask& mask,
                                                 double max_search);

struct AnchorMotionOptions {
    double max_search = 16.0;          // px, ray search on the target silhouette
    double contour_band = 12.0;        // px, max distance to the mesh's own contour
    double exclusion_distance = 0.1;   // m
    double min_normal_projection = 0.3;
};

enum class AnchorStatus : std::uint8_t {
    Participating,
    OutOfFrame,
    DegenerateNormal,
    FarFromContour,
    NoCrossing,
    TooFar,
};

/// Per-anchor displacement along the vertex normal in meters; only
/// participating anchors constrain the anchor stage.
struct AnchorMotion {
    std::vector<double> scalar;
    std::vector<AnchorStatus> status;

    bool participating(int a) const { return status[a] == AnchorStatus::Participating; }
    int participating_count() const;
};

/// Oracle anchor motion. Each anchor first walks along its image-plane normal
/// to the mesh's own silhouette (within the contour band); the signed distance
/// from that contour point to the target silhouette, divided by the camera
/// scale, is the anchor's scalar. A self-rendered target therefore yields zero.
AnchorMotion oracle_anchor_motion(const TriMesh& mesh, const std::vector<int>& anchors,
                                  const WeakPerspectiveCamera& camera, const BinaryMask& gt_mask,
                                  const AnchorMotionOptions& options = {});

/// Moves participating anchors to v + s * n (3D constraints of the given
/// weight, n the vertex normal). Throws NoConstraintsError when no anchor
/// participates.
TriMesh apply_anchor_stage(const TriMesh& mesh, const std::vector<int>& anchors, const AnchorMotion& motion,
                           double weight = 1.0);

}  // namespace avatar
