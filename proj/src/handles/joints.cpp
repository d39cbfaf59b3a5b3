#include "avatar/handles/joints.hpp"

#include <fstream>
#include <set>

#include <json.hpp>

#include "avatar/deform/laplacian.hpp"
#include "avatar/error.hpp"

namespace avatar {

using nlohmann::json;

void JointHandleSet::validate(int vertex_count) const {
    if (names.size() != 10 || vertices.size() != 10) throw ParameterError("joint handle set needs exactly 10 joints");
    std::set<int> seen;
    for (std::size_t j = 0; j < vertices.size(); ++j) {
        if (vertices[j].empty()) throw ParameterError("joint " + names[j] + " has no vertices");
        for (int v : vertices[j]) {
            if (v < 0 || v >= vertex_count) throw ParameterError("joint " + names[j] + " has an invalid vertex index");
            if (!seen.insert(v).second) throw ParameterError("joint " + names[j] + " overlaps another joint");
        }
    }
}

JointHandleSet make_joint_handles(const TriMesh& mesh, const std::vector<std::pair<std::string, Vec3>>& centers,
                                  double band) {
    JointHandleSet out;
    for (const auto& [name, c] : centers) {
        double d_min = std::numeric_limits<double>::infinity();
        for (const Vec3& v : mesh.vertices) d_min = std::min(d_min, (v - c).norm());
        std::vector<int> set;
        for (int v = 0; v < mesh.vertex_count(); ++v) {
            if ((mesh.vertices[v] - c).norm() <= d_min + band) set.push_back(v);
        }
        out.names.push_back(name);
        out.vertices.push_back(std::move(set));
    }
    std::set<int> seen;
    for (std::size_t j = 0; j < out.vertices.size(); ++j) {
        for (int v : out.vertices[j]) {
            if (!seen.insert(v).second) throw ParameterError("joint " + out.names[j] + " overlaps another joint");
        }
    }
    return out;
}

void save_joint_handles(const std::filesystem::path& path, const JointHandleSet& handles) {
    json j;
    j["joints"] = json::array();
    for (int k = 0; k < handles.size(); ++k) j["joints"].push_back({{"name", handles.names[k]}, {"vertices", handles.vertices[k]}});
    std::ofstream out(path);
    if (!out) throw Error("cannot write " + path.string());
    out << j.dump() << '\n';
}

JointHandleSet load_joint_handles(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw FormatError("cannot open joint handle file " + path.string(), 0);
    try {
        const json j = json::parse(in);
        JointHandleSet out;
        for (const auto& e : j.at("joints")) {
            out.names.push_back(e.at("name").get<std::string>());
            out.vertices.push_back(e.at("vertices").get<std::vector<int>>());
        }
        return out;
    } catch (const json::exception& e) {
        throw FormatError("invalid joint handle file " + path.string() + ": " + e.what(), 0);
    }
}

void save_joint_annotations(const std::filesystem::path& path, const JointAnnotations& joints) {
    json j = json::array();
    for (const auto& [name, p] : joints) j.push_back({{"name", name}, {"x", p.x()}, {"y", p.y()}});
    std::ofstream out(path);
    if (!out) throw Error("cannot write " + path.string());
    out << j.dump(2) << '\n';
}

JointAnnotations load_joint_annotations(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw FormatError("cannot open joint annotation file " + path.string(), 0);
    try {
        const json j = json::parse(in);
        JointAnnotations out;
        for (const auto& e : j) out[e.at("name").get<std::string>()] = Vec2(e.at("x").get<double>(), e.at("y").get<double>());
        return out;
    } catch (const json::exception& e) {
        throw FormatError("invalid joint annotation file " + path.string() + ": " + e.what(), 0);
    }
}

std::vector<Vec3> joint_centroids(const TriMesh& mesh, const JointHandleSet& handles) {
    std::vector<Vec3> out;
    for (const auto& set : handles.vertices) {
        Vec3 c = Vec3::Zero();
        for (int v : set) c += mesh.vertices.at(v);
        out.push_back(c / static_cast<double>(set.size()));
    }
    return out;
}

std::vector<Vec2> joint_positions(const TriMesh& mesh, const JointHandleSet& handles,
                                  const WeakPerspectiveCamera& camera) {
    std::vector<Vec2> out;
    for (const Vec3& c : joint_centroids(mesh, handles)) out.push_back(camera.project(c));
    return out;
}

JointAnnotations joint_annotations(const TriMesh& mesh, const JointHandleSet& handles,
                                   const WeakPerspectiveCamera& camera) {
    const auto pos = joint_positions(mesh, handles, camera);
    JointAnnotations out;
    for (int j = 0; j < handles.size(); ++j) out[handles.names[j]] = pos[j];
    return out;
}

JointMotion oracle_joint_motion(const TriMesh& mesh, const JointHandleSet& handles,
                                const WeakPerspectiveCamera& camera, const JointAnnotations& gt) {
    const auto pos = joint_positions(mesh, handles, camera);
    JointMotion out;
    for (int j = 0; j < handles.size(); ++j) {
        auto it = gt.find(handles.names[j]);
        if (it == gt.end()) throw AnnotationError("missing annotation for joint " + handles.names[j]);
        out.motion.push_back(it->second - pos[j]);
    }
    return out;
}

TriMesh apply_joint_stage(const TriMesh& mesh, const JointHandleSet& handles, const WeakPerspectiveCamera& camera,
                          const JointMotion& motion, double weight) {
    if (motion.motion.size() != handles.vertices.size()) throw ParameterError("one motion vector per joint required");
    DeformProblem problem{mesh, {}, camera};
    for (int j = 0; j < handles.size(); ++j) {
        for (int v : handles.vertices[j]) {
            problem.constraints.push_back(
                HandleConstraint::at_pixel(v, camera.project(mesh.vertices[v]) + motion.motion[j], weight));
        }
    }
    return solve_deform(problem);
}

}  // namespace avatar
