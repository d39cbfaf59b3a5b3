#include "avatar/handles/anchors.hpp"

#include <cmath>
#include <fstream>
#include <limits>

#include <json.hpp>

#include "avatar/camera/raster.hpp"
#include "avatar/deform/laplacian.hpp"
#include "avatar/error.hpp"
#include "avatar/random.hpp"

namespace avatar {

using nlohmann::json;

namespace {

// Index of the nearest center; ties keep the lower index.
int nearest(const Feature6& x, const std::vector<Feature6>& centers) {
    int best = 0;
    double best_d = std::numeric_limits<double>::infinity();
    for (std::size_t c = 0; c < centers.size(); ++c) {
        const double d = (x - centers[c]).squaredNorm();
        if (d < best_d) {
            best_d = d;
            best = static_cast<int>(c);
        }
    }
    return best;
}

std::vector<Feature6> kmeans_pp_seed(const std::vector<Feature6>& x, int k, Rng& rng) {
    const int n = static_cast<int>(x.size());
    std::vector<Feature6> centers{x[rng.index(n)]};
    std::vector<double> d2(n);
    for (int i = 0; i < n; ++i) d2[i] = (x[i] - centers[0]).squaredNorm();
    while (static_cast<int>(centers.size()) < k) {
        double total = 0.0;
        for (double d : d2) total += d;
        int pick = -1;
        if (total > 0.0) {
            const double r = rng.uniform() * total;
            double acc = 0.0;
            for (int i = 0; i < n && pick < 0; ++i) {
                acc += d2[i];
                if (d2[i] > 0.0 && acc > r) pick = i;
            }
            // Rounding can leave r beyond the last partial sum.
            for (int i = n - 1; pick < 0 && i >= 0; --i) {
                if (d2[i] > 0.0) pick = i;
            }
        } else {
            pick = 0;  // all points coincide with a center
        }
        centers.push_back(x[pick]);
        for (int i = 0; i < n; ++i) d2[i] = std::min(d2[i], (x[i] - x[pick]).squaredNorm());
    }
    return centers;
}

}  // namespace

AnchorSet select_anchors(const TriMesh& mesh, int k, double normal_weight, const VertexLabels& labels,
                         const std::set<std::string>& excluded_labels, std::uint64_t seed) {
    std::vector<char> excluded(mesh.vertex_count(), 0);
    for (const auto& [name, verts] : labels) {
        if (!excluded_labels.count(name)) continue;
        for (int v : verts) {
            if (v < 0 || v >= mesh.vertex_count()) throw ParameterError("label index outside the mesh");
            excluded[v] = 1;
        }
    }
    const auto normals = vertex_normals(mesh);
    AnchorSet out;
    for (int v = 0; v < mesh.vertex_count(); ++v) {
        if (excluded[v]) continue;
        Feature6 f;
        f << mesh.vertices[v], normal_weight * normals[v];
        out.feature_vertices.push_back(v);
        out.features.push_back(f);
    }
    const int n = static_cast<int>(out.features.size());
    if (k < 1 || k > n) throw ParameterError("anchor count must be in [1, eligible vertex count]");

    const auto& x = out.features;
    Rng rng(seed);
    std::vector<Feature6> centers = kmeans_pp_seed(x, k, rng);
    std::vector<int> assign(n, -1);
    for (int iter = 0; iter < 100; ++iter) {
        bool changed = false;
        for (int i = 0; i < n; ++i) {
            const int c = nearest(x[i], centers);
            changed |= c != assign[i];
            assign[i] = c;
        }
        std::vector<Feature6> sum(k, Feature6::Zero());
        std::vector<int> count(k, 0);
        for (int i = 0; i < n; ++i) {
            sum[assign[i]] += x[i];
            ++count[assign[i]];
        }
        for (int c = 0; c < k; ++c) {
            if (count[c] > 0) {
                centers[c] = sum[c] / count[c];
                continue;
            }
            int far = -1;
            double far_d = -1.0;
            for (int i = 0; i < n; ++i) {
                if (count[assign[i]] < 2) continue;
                const double d = (x[i] - centers[assign[i]]).squaredNorm();
                if (d > far_d) {
                    far_d = d;
                    far = i;
                }
            }
            --count[assign[far]];
            assign[far] = c;
            count[c] = 1;
            centers[c] = x[far];
            changed = true;
        }
        if (!changed) break;
    }

    std::vector<int> best(k, -1);
    std::vector<double> best_d(k, std::numeric_limits<double>::infinity());
    for (int i = 0; i < n; ++i) {
        const int c = assign[i];
        const double d = (x[i] - centers[c]).squaredNorm();
        if (d < best_d[c]) {
            best_d[c] = d;
            best[c] = i;
        }
    }
    for (int c = 0; c < k; ++c) out.anchors.push_back(out.feature_vertices[best[c]]);
    return out;
}

void save_anchor_set(const std::filesystem::path& path, const AnchorSet& anchors) {
    std::ofstream out(path);
    if (!out) throw Error("cannot write " + path.string());
    out << json{{"anchors", anchors.anchors}}.dump() << '\n';
}

AnchorSet load_anchor_set(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw FormatError("cannot open anchor file " + path.string(), 0);
    try {
        AnchorSet out;
        out.anchors = json::parse(in).at("anchors").get<std::vector<int>>();
        return out;
    } catch (const json::exception& e) {
        throw FormatError("invalid anchor file " + path.string() + ": " + e.what(), 0);
    }
}

namespace {

constexpr double kRayStep = 0.25;

// Signed positions of every mask boundary crossing on the ray pixel + d * dir,
// d in [-range, range], in ascending order.
std::vector<double> ray_crossings(const Vec2& pixel, const Vec2& dir, const BinaryMask& mask, double range) {
    auto sample = [&](int k) {
        const Vec2 q = pixel + (k * kRayStep) * dir;
        const int x = static_cast<int>(std::floor(q.x()));
        const int y = static_cast<int>(std::floor(q.y()));
        return mask.in_bounds(x, y) && mask.at(x, y) != 0;
    };
    const int steps = static_cast<int>(std::floor(range / kRayStep));
    std::vector<double> out;
    bool prev = sample(-steps);
    for (int k = -steps + 1; k <= steps; ++k) {
        const bool cur = sample(k);
        if (cur != prev) out.push_back((k - 0.5) * kRayStep);
        prev = cur;
    }
    return out;
}

// Crossing nearest to `origin` within `radius`; the larger one wins ties.
std::optional<double> nearest_crossing(const std::vector<double>& crossings, double origin, double radius) {
    std::optional<double> best;
    for (double c : crossings) {
        const double d = std::abs(c - origin);
        if (d > radius) continue;
        if (!best || d < std::abs(*best - origin) || (d == std::abs(*best - origin) && c > *best)) best = c;
    }
    return best;
}

bool in_frame(const Vec2& p, int width, int height) {
    return p.x() >= 0.0 && p.y() >= 0.0 && p.x() < width && p.y() < height;
}

}  // namespace

std::optional<double> silhouette_normal_distance(const Vec2& pixel, const Vec2& normal_2d, const BinaryMask& mask,
                                                 double max_search) {
    if (!in_frame(pixel, mask.width(), mask.height())) throw OutOfFrameError("anchor pixel outside the image");
    return nearest_crossing(ray_crossings(pixel, normal_2d, mask, max_search), 0.0, max_search);
}

int AnchorMotion::participating_count() const {
    int n = 0;
    for (AnchorStatus s : status) n += s == AnchorStatus::Participating;
    return n;
}

AnchorMotion oracle_anchor_motion(const TriMesh& mesh, const std::vector<int>& anchors,
                                  const WeakPerspectiveCamera& camera, const BinaryMask& gt_mask,
                                  const AnchorMotionOptions& options) {
    if (!gt_mask.same_size(camera.width, camera.height)) throw AlignmentError("mask size differs from the camera frame");
    const BinaryMask own = rasterize(camera, mesh).mask;
    const auto normals = vertex_normals(mesh);
    AnchorMotion out;
    out.scalar.assign(anchors.size(), 0.0);
    out.status.assign(anchors.size(), AnchorStatus::Participating);
    for (std::size_t a = 0; a < anchors.size(); ++a) {
        const int v = anchors[a];
        const Vec2 p = camera.project(mesh.vertices.at(v));
        const Vec2 n2 = normals[v].head<2>();
        AnchorStatus& status = out.status[a];
        if (!in_frame(p, camera.width, camera.height)) {
            status = AnchorStatus::OutOfFrame;
            continue;
        }
        if (n2.norm() < options.min_normal_projection) {
            status = AnchorStatus::DegenerateNormal;
            continue;
        }
        const Vec2 dir = n2.normalized();
        // Both silhouettes are probed on one sample lattice, so identical
        // masks give exactly zero.
        const auto d_own = nearest_crossing(ray_crossings(p, dir, own, options.contour_band), 0.0, options.contour_band);
        if (!d_own) {
            status = AnchorStatus::FarFromContour;
            continue;
        }
        const auto gt_cross = ray_crossings(p, dir, gt_mask, options.contour_band + options.max_search);
        const auto c_gt = nearest_crossing(gt_cross, *d_own, options.max_search);
        if (!c_gt) {
            status = AnchorStatus::NoCrossing;
            continue;
        }
        const double s = (*c_gt - *d_own) / camera.scale;
        out.scalar[a] = s;
        if (std::abs(s) > options.exclusion_distance) status = AnchorStatus::TooFar;
    }
    return out;
}

TriMesh apply_anchor_stage(const TriMesh& mesh, const std::vector<int>& anchors, const AnchorMotion& motion,
                           double weight) {
    if (motion.scalar.size() != anchors.size() || motion.status.size() != anchors.size()) {
        throw ParameterError("one motion scalar per anchor required");
    }
    const auto normals = vertex_normals(mesh);
    DeformProblem problem{mesh, {}, std::nullopt};
    for (std::size_t a = 0; a < anchors.size(); ++a) {
        if (!motion.participating(static_cast<int>(a))) continue;
        const int v = anchors[a];
        problem.constraints.push_back(
            HandleConstraint::at_position(v, mesh.vertices[v] + motion.scalar[a] * normals[v], weight));
    }
    if (problem.constraints.empty()) throw NoConstraintsError("no anchor participates in the anchor stage");
    return solve_deform(problem);
}

}  // namespace avatar
