#pragma once

#include <array>
#include <optional>
#include <ostream>
#include <vector>

#include <Eigen/Sparse>

#include "avatar/camera/camera.hpp"
#include "avatar/geometry/mesh.hpp"

namespace avatar {

/// Soft handle: pulls one vertex toward a 3D position, or toward an
/// image-plane pixel through the camera with its depth left free.
struct HandleConstraint {
    enum class Kind { Position, ImagePlane };

    int vertex = 0;
    Kind kind = Kind::Position;
    Vec3 position = Vec3::Zero();  // meters, Kind::Position
    Vec2 pixel = Vec2::Zero();     // pixels, Kind::ImagePlane
    double weight = 1.0;

    static HandleConstraint at_position(int vertex, const Vec3& target, double weight) {
        return {vertex, Kind::Position, target, Vec2::Zero(), weight};
    }
    static HandleConstraint at_pixel(int vertex, const Vec2& target, double weight) {
        return {vertex, Kind::ImagePlane, Vec3::Zero(), target, weight};
    }
};

struct DeformProblem {
    TriMesh mesh;
    std::vector<HandleConstraint> constraints;
    std::optional<WeakPerspectiveCamera> camera;  // required by image-plane handles
};

struct DeformOptions {
    double tolerance = 1e-8;  // relative residual of the normal equations
    int max_cg_iterations = 20000;
    // Coordinates to solve; the others keep their input values.
    std::array<bool, 3> solve_axes{true, true, true};
};

struct DeformReport {
    std::array<double, 3> relative_residual{0.0, 0.0, 0.0};
    bool used_iterative = false;
};

// Sorted neighbor lists of an arbitrary vertex graph.
using Adjacency = std::vector<std::vector<int>>;

/// Uniform graph Laplacian delta_i = v_i - mean(neighbors of v_i).
/// Throws ConnectivityError when a vertex has no neighbor.
std::vector<Vec3> differential_coords(const TriMesh& mesh);
std::vector<Vec3> differential_coords(const std::vector<Vec3>& vertices, const Adjacency& neighbors);

// Sparse matrix L with L_ii = 1 and L_ij = -1/deg(i) for neighbors j.
Eigen::SparseMatrix<double> uniform_laplacian(const Adjacency& neighbors);

/// Minimizes ||L V' - delta||^2 + sum_i w_i^2 ||C_i(v'_i) - target_i||^2 with
/// delta taken from the input mesh and C_i the identity (position handles) or
/// the camera projection (image-plane handles). Topology, UVs and tags are
/// carried over unchanged.
///
/// An axis whose rows receive no handle term is translation-free; it is pinned
/// by holding the first handled vertex of each connected component at its
/// input coordinate, which selects one minimizer without changing the optimum.
/// Throws RankDeficiencyError when no handle has positive weight or a
/// component has no handle, SolverError when the residual tolerance is missed.
TriMesh solve_deform(const DeformProblem& problem, const DeformOptions& options = {},
                     DeformReport* report = nullptr);

// Same solve on a bare vertex graph (polylines, point graphs); returns positions.
std::vector<Vec3> solve_deform(const std::vector<Vec3>& vertices, const Adjacency& neighbors,
                               const std::vector<HandleConstraint>& constraints,
                               const std::optional<WeakPerspectiveCamera>& camera,
                               const DeformOptions& options = {}, DeformReport* report = nullptr);

// Objective of solve_deform evaluated at arbitrary vertex positions.
double deform_objective(const DeformProblem& problem, const std::vector<Vec3>& vertices);
double deform_objective(const std::vector<Vec3>& input, const Adjacency& neighbors,
                        const std::vector<HandleConstraint>& constraints,
                        const std::optional<WeakPerspectiveCamera>& camera, const std::vector<Vec3>& vertices);

/// Writes the normal equations as text:
///   matrix <axis> <n> <nnz>      followed by nnz lines "<row> <col> <value>"
///   rhs <axis> <n>               followed by n lines "<row> <value>"
/// for each solved axis (0 = x, 1 = y, 2 = z), values in shortest round-trip form.
void dump_system(const DeformProblem& problem, std::ostream& out, const DeformOptions& options = {});

}  // namespace avatar
