#include "avatar/eval/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>

#include "avatar/camera/raster.hpp"
#include "avatar/error.hpp"

namespace avatar {

double silhouette_iou(const BinaryMask& a, const BinaryMask& b) {
    if (!a.same_size(b)) throw AlignmentError("silhouette masks differ in size");
    std::size_t inter = 0, uni = 0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        inter += (a[i] && b[i]);
        uni += (a[i] || b[i]);
    }
    return uni == 0 ? 1.0 : static_cast<double>(inter) / static_cast<double>(uni);
}

std::vector<double> per_joint_error(const std::vector<Vec2>& pred, const std::vector<Vec2>& gt) {
    if (pred.size() != gt.size()) {
        throw AnnotationError("joint count mismatch: " + std::to_string(pred.size()) + " predicted, " +
                              std::to_string(gt.size()) + " annotated");
    }
    std::vector<double> out(pred.size());
    for (std::size_t j = 0; j < pred.size(); ++j) out[j] = (pred[j] - gt[j]).norm();
    return out;
}

double joint_error(const std::vector<Vec2>& pred, const std::vector<Vec2>& gt) {
    const auto e = per_joint_error(pred, gt);
    if (e.empty()) return 0.0;
    return std::accumulate(e.begin(), e.end(), 0.0) / static_cast<double>(e.size());
}

NearestVertex::NearestVertex(std::vector<Vec3> points) : points_(std::move(points)), order_(points_.size()) {
    std::iota(order_.begin(), order_.end(), 0);
    build(0, static_cast<int>(order_.size()), 0);
}

// order_[lo, hi) is a subtree; its median element order_[mid] splits on axis depth % 3.
void NearestVertex::build(int lo, int hi, int depth) {
    if (hi - lo <= 1) return;
    const int mid = lo + (hi - lo) / 2;
    const int axis = depth % 3;
    std::nth_element(order_.begin() + lo, order_.begin() + mid, order_.begin() + hi,
                     [&](int a, int b) { return points_[a][axis] < points_[b][axis]; });
    build(lo, mid, depth + 1);
    build(mid + 1, hi, depth + 1);
}

void NearestVertex::search(int lo, int hi, int depth, const Vec3& p, int& best, double& best_d2) const {
    if (lo >= hi) return;
    const int mid = lo + (hi - lo) / 2;
    const int idx = order_[mid];
    const double d2 = (p - points_[idx]).squaredNorm();
    if (d2 < best_d2 || (d2 == best_d2 && idx < best)) {
        best_d2 = d2;
        best = idx;
    }
    const int axis = depth % 3;
    const double diff = p[axis] - points_[idx][axis];
    const bool left_first = diff < 0.0;
    if (left_first) search(lo, mid, depth + 1, p, best, best_d2);
    else search(mid + 1, hi, depth + 1, p, best, best_d2);
    // The far side can only hold points at least |diff| away.
    if (diff * diff <= best_d2) {
        if (left_first) search(mid + 1, hi, depth + 1, p, best, best_d2);
        else search(lo, mid, depth + 1, p, best, best_d2);
    }
}

std::pair<int, double> NearestVertex::query(const Vec3& p) const {
    if (points_.empty()) throw ParameterError("nearest-vertex query on an empty set");
    int best = -1;
    double best_d2 = std::numeric_limits<double>::infinity();
    search(0, static_cast<int>(order_.size()), 0, p, best, best_d2);
    return {best, best_d2};
}

double chamfer_gt_to_pred(const TriMesh& gt, const TriMesh& pred,
                          const std::optional<std::vector<std::uint8_t>>& visible_filter) {
    if (gt.vertices.empty() || pred.vertices.empty()) throw ParameterError("Chamfer needs non-empty meshes");
    if (visible_filter && visible_filter->size() != gt.vertices.size()) {
        throw ParameterError("visibility filter needs one flag per ground-truth vertex");
    }
    const NearestVertex tree(pred.vertices);
    double sum = 0.0;
    std::size_t count = 0;
    for (std::size_t i = 0; i < gt.vertices.size(); ++i) {
        if (visible_filter && !(*visible_filter)[i]) continue;
        sum += std::sqrt(tree.query(gt.vertices[i]).second);
        ++count;
    }
    if (count == 0) throw EmptySelectionError("visibility filter selects no ground-truth vertex");
    return sum / static_cast<double>(count) * 1000.0;
}

std::vector<std::uint8_t> visible_vertex_filter(const TriMesh& mesh, const WeakPerspectiveCamera& camera) {
    return vertex_visibility(mesh, rasterize(camera, mesh).face_visible);
}

namespace {

void check_nonnegative(const std::optional<double>& v, const char* name) {
    if (v && !(*v >= 0.0)) throw ParameterError(std::string(name) + " must be nonnegative");
}

void check_iou(const std::optional<double>& v) {
    if (v && !(*v >= 0.0 && *v <= 1.0)) throw ParameterError("sil_iou must lie in [0, 1]");
}

nlohmann::json opt(const std::optional<double>& v) { return v ? nlohmann::json(*v) : nlohmann::json(nullptr); }

std::optional<double> read_opt(const nlohmann::json& j, const char* key) {
    if (!j.contains(key) || j.at(key).is_null()) return std::nullopt;
    return j.at(key).get<double>();
}

}  // namespace

void MetricsReport::validate() const {
    check_iou(sil_iou);
    check_nonnegative(joint_err_px, "joint_err_px");
    check_nonnegative(chamfer_full_mm, "chamfer_full_mm");
    check_nonnegative(chamfer_visible_mm, "chamfer_visible_mm");
    for (double e : per_joint_err_px) check_nonnegative(e, "per-joint error");
    for (const auto& s : stages) {
        check_iou(s.sil_iou);
        check_nonnegative(s.joint_err_px, "joint_err_px");
        check_nonnegative(s.chamfer_full_mm, "chamfer_full_mm");
        check_nonnegative(s.chamfer_visible_mm, "chamfer_visible_mm");
    }
}

nlohmann::json to_json(const MetricsReport& r) {
    nlohmann::json stages = nlohmann::json::array();
    for (const auto& s : r.stages) {
        stages.push_back({{"stage", s.stage},
                          {"sil_iou", opt(s.sil_iou)},
                          {"joint_err_px", opt(s.joint_err_px)},
                          {"chamfer_full_mm", opt(s.chamfer_full_mm)},
                          {"chamfer_visible_mm", opt(s.chamfer_visible_mm)}});
    }
    return {{"sil_iou", opt(r.sil_iou)},
            {"joint_err_px", opt(r.joint_err_px)},
            {"chamfer_full_mm", opt(r.chamfer_full_mm)},
            {"chamfer_visible_mm", opt(r.chamfer_visible_mm)},
            {"per_joint_err_px", r.per_joint_err_px},
            {"stages", stages}};
}

MetricsReport metrics_from_json(const nlohmann::json& j) {
    try {
        MetricsReport r;
        r.sil_iou = read_opt(j, "sil_iou");
        r.joint_err_px = read_opt(j, "joint_err_px");
        r.chamfer_full_mm = read_opt(j, "chamfer_full_mm");
        r.chamfer_visible_mm = read_opt(j, "chamfer_visible_mm");
        if (j.contains("per_joint_err_px")) r.per_joint_err_px = j.at("per_joint_err_px").get<std::vector<double>>();
        if (j.contains("stages")) {
            for (const auto& s : j.at("stages")) {
                StageMetrics m;
                m.stage = s.at("stage").get<std::string>();
                m.sil_iou = read_opt(s, "sil_iou");
                m.joint_err_px = read_opt(s, "joint_err_px");
                m.chamfer_full_mm = read_opt(s, "chamfer_full_mm");
                m.chamfer_visible_mm = read_opt(s, "chamfer_visible_mm");
                r.stages.push_back(std::move(m));
            }
        }
        r.validate();
        return r;
    } catch (const nlohmann::json::exception& e) {
        throw FormatError(std::string("invalid metrics report: ") + e.what(), 0);
    }
}

void save_metrics(const std::filesystem::path& path, const MetricsReport& report) {
    report.validate();
    std::ofstream out(path);
    if (!out) throw Error("cannot write " + path.string());
    out << to_json(report).dump(2) << '\n';
}

MetricsReport load_metrics(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw FormatError("cannot open metrics file " + path.string(), 0);
    try {
        return metrics_from_json(nlohmann::json::parse(in));
    } catch (const nlohmann::json::parse_error& e) {
        throw FormatError("invalid metrics file " + path.string() + ": " + e.what(), 0);
    }
}

}  // namespace avatar
