#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "avatar/camera/camera.hpp"
#include "avatar/geometry/mesh.hpp"

namespace avatar {

/// Ten named joints, each a non-empty vertex set disjoint from the others.
/// A joint's position is the centroid of its vertices.
struct JointHandleSet {
    std::vector<std::string> names;
    std::vector<std::vector<int>> vertices;

    int size() const { return static_cast<int>(names.size()); }
    // Throws ParameterError unless there are 10 joints with valid, disjoint sets.
    void validate(int vertex_count) const;
};

/// Per joint, the vertices within `band` meters of the closest vertex
/// distance to the joint center. Throws ParameterError when sets overlap.
JointHandleSet make_joint_handles(const TriMesh& mesh, const std::vector<std::pair<std::string, Vec3>>& centers,
                                  double band = 0.015);

// {"joints": [{"name": ..., "vertices": [...]}, ...]}
void save_joint_handles(const std::filesystem::path& path, const JointHandleSet& handles);
JointHandleSet load_joint_handles(const std::filesystem::path& path);

// Pixel positions keyed by joint name.
using JointAnnotations = std::map<std::string, Vec2>;

// JSON list of {"name", "x", "y"}.
void save_joint_annotations(const std::filesystem::path& path, const JointAnnotations& joints);
JointAnnotations load_joint_annotations(const std::filesystem::path& path);

// 3D centroid of each joint's handle vertices.
std::vector<Vec3> joint_centroids(const TriMesh& mesh, const JointHandleSet& handles);

/// Projected joint centroids, in handle-set order.
std::vector<Vec2> joint_positions(const TriMesh& mesh, const JointHandleSet& handles,
                                  const WeakPerspectiveCamera& camera);

// Joint positions keyed by name.
JointAnnotations joint_annotations(const TriMesh& mesh, const JointHandleSet& handles,
                                   const WeakPerspectiveCamera& camera);

/// Per-joint 2D motion in pixels, in handle-set order.
struct JointMotion {
    std::vector<Vec2> motion;
};

/// gt[name] - current projected joint for every joint. Throws AnnotationError
/// naming the first joint without an annotation.
JointMotion oracle_joint_motion(const TriMesh& mesh, const JointHandleSet& handles,
                                const WeakPerspectiveCamera& camera, const JointAnnotations& gt);

/// Pulls every handle vertex of joint j toward its own projection plus
/// motion[j] with image-plane constraints of the given weight; depth is free.
TriMesh apply_joint_stage(const TriMesh& mesh, const JointHandleSet& handles, const WeakPerspectiveCamera& camera,
                          const JointMotion& motion, double weight = 10.0);

}  // namespace avatar
