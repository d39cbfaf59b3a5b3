#pragma once

#include <cstdint>
#include <vector>

#include "avatar/camera/camera.hpp"
#include "avatar/geometry/mesh.hpp"
#include "avatar/image/grid.hpp"
#include "avatar/shading/sh.hpp"

namespace avatar {

struct RefineConfig {
    double lambda_photo = 1.0;
    double lambda_data = 5.0;
    double lambda_smooth = 2.0;
    double beta = 10.0;             // detail magnification
    double ridge = 1e-6;            // lighting estimation
    double shading_floor = 0.05;    // albedo division guard
    int albedo_blur_radius = 2;     // px, box low-pass of the albedo ratio
    int max_iterations = 300;
    double function_tolerance = 1e-12;
    double gradient_tolerance = 1e-14;

    // Throws ParameterError for negative weights or beta <= 0.
    void validate() const;
};

/// Baseline albedo: box low-pass (radius in px) of I / max(shading, floor)
/// over `mask` pixels with a valid normal, using the bootstrap lighting.
/// Mask pixels with no valid neighbor get 1; outside the mask 0.
GrayImage estimate_albedo(const GrayImage& image, const NormalMap& normals, const BinaryMask& mask,
                          const SHLighting& bootstrap, int blur_radius, double floor = 0.05);

/// Shading energy over the optimized pixels (foreground of `coarse` inside
/// `mask`):
///   lambda_photo  * sum over pixels with a normal of (rho * l.H(n(D)) - I)^2
/// + lambda_data   * sum (D - D_coarse)^2
/// + lambda_smooth * sum (Laplacian of (D - D_coarse))^2
/// where n(D) follows depth_to_normals. The smoothness term acts on the
/// detail layer so the coarse body curvature is not penalized.
struct RefineProblem {
    const DepthMap& coarse;
    const GrayImage& image;
    const GrayImage& albedo;
    const SHLighting& lighting;
    const BinaryMask& mask;
    const WeakPerspectiveCamera& camera;
    RefineConfig config;
};

// Pixel indices of the optimized depths, row-major.
std::vector<std::size_t> refine_variables(const RefineProblem& problem);

/// Objective at `depth` (same foreground as coarse). When `gradient` is set it
/// receives dE/dD per pixel of the grid (zero off the variables).
double refine_objective(const RefineProblem& problem, const DepthMap& depth, std::vector<double>* gradient = nullptr);

// Photometric sum of squares (rho * l.H(n(D)) - I)^2 over `mask`.
double photometric_residual(const DepthMap& depth, const GrayImage& image, const GrayImage& albedo,
                            const SHLighting& lighting, const BinaryMask& mask, const WeakPerspectiveCamera& camera);

struct RefineReport {
    double initial_objective = 0.0;
    double final_objective = 0.0;
    int iterations = 0;
    std::vector<double> trace;
};

/// L-BFGS minimization of the shading energy starting from the coarse depth.
/// The output objective never exceeds the input one; a run that ends higher
/// throws OptimizerError carrying the objective trace.
DepthMap refine_depth(const RefineProblem& problem, RefineReport* report = nullptr);

/// D_coarse + beta * (D_refined - D_coarse) per foreground pixel. Throws
/// AlignmentError when grids or foregrounds differ.
DepthMap magnify_details(const DepthMap& coarse, const DepthMap& refined, double beta);

struct DisplacementReport {
    int moved = 0;
    int skipped = 0;  // visible vertices that landed on background
    int grazing = 0;  // visible vertices left to the back-fill (see below)
};

/// Sets each visible vertex's z to the target depth sampled bilinearly at its
/// projection (nearest foreground pixel where a bilinear tap is background),
/// then back-fills every vertex z by a Laplacian solve with the moved vertices
/// as weight-1 handles. x and y never change. Visible vertices whose normal
/// makes a view cosine below `min_view_cosine` sit where the depth map is too
/// steep to sample and are back-filled like hidden ones.
TriMesh depth_to_vertex_displacement(const TriMesh& mesh, const WeakPerspectiveCamera& camera,
                                     const DepthMap& target_depth, const std::vector<std::uint8_t>& vertex_visible,
                                     DisplacementReport* report = nullptr, double min_view_cosine = 0.5);

}  // namespace avatar
