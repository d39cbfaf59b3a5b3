#pragma once

#include <array>
#include <filesystem>

#include <Eigen/Core>

#include "avatar/image/grid.hpp"

namespace avatar {

using SHVector = Eigen::Matrix<double, 9, 1>;

/// Second-order real spherical-harmonics lighting. Coefficient order:
/// Y00, Y1-1, Y10, Y11, Y2-2, Y2-1, Y20, Y21, Y22.
struct SHLighting {
    SHVector coeffs = SHVector::Zero();

    // l . H(n) for a unit normal.
    double shade(const Eigen::Vector3d& normal) const;
};

/// Real SH basis at a unit normal with the standard orthonormal constants.
/// Throws NormalizationError unless |n| = 1 within 1e-6.
SHVector sh_basis(const Eigen::Vector3d& normal);

// d(l . H(n))/dn of the polynomial basis, without renormalizing n.
Eigen::Vector3d sh_shade_gradient(const SHLighting& lighting, const Eigen::Vector3d& normal);

/// Least-squares lighting: min_l sum (rho * l.H(n) - I)^2 + ridge * |l|^2 over
/// pixels that are in `mask` and carry a valid normal.
/// Throws ParameterError with fewer than 9 such pixels and ConditioningError
/// when the normal matrix is numerically singular (use ridge > 0).
SHLighting estimate_lighting(const GrayImage& image, const GrayImage& albedo, const NormalMap& normals,
                             const BinaryMask& mask, double ridge);

// rho * l.H(n) at valid normals, 0 elsewhere.
GrayImage render_shading(const SHLighting& lighting, const GrayImage& albedo, const NormalMap& normals);

// {"sh": [9 values]}
void save_lighting(const std::filesystem::path& path, const SHLighting& lighting);
SHLighting load_lighting(const std::filesystem::path& path);

}  // namespace avatar
