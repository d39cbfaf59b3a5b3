#include "avatar/shading/sh.hpp"

#include <cmath>
#include <fstream>
#include <numbers>

#include <Eigen/Dense>
#include <json.hpp>

#include "avatar/error.hpp"

namespace avatar {

namespace {

const double kC0 = 0.5 * std::sqrt(1.0 / std::numbers::pi);
const double kC1 = std::sqrt(3.0 / (4.0 * std::numbers::pi));
const double kC2 = 0.5 * std::sqrt(15.0 / std::numbers::pi);
const double kC20 = 0.25 * std::sqrt(5.0 / std::numbers::pi);
const double kC22 = 0.25 * std::sqrt(15.0 / std::numbers::pi);

SHVector basis_unchecked(const Eigen::Vector3d& n) {
    const double x = n.x(), y = n.y(), z = n.z();
    SHVector h;
    h << kC0, kC1 * y, kC1 * z, kC1 * x, kC2 * x * y, kC2 * y * z, kC20 * (3.0 * z * z - 1.0), kC2 * x * z,
        kC22 * (x * x - y * y);
    return h;
}

}  // namespace

SHVector sh_basis(const Eigen::Vector3d& normal) {
    if (!(std::abs(normal.norm() - 1.0) <= 1e-6)) throw NormalizationError("SH basis needs a unit normal");
    return basis_unchecked(normal);
}

double SHLighting::shade(const Eigen::Vector3d& normal) const { return coeffs.dot(basis_unchecked(normal)); }

Eigen::Vector3d sh_shade_gradient(const SHLighting& lighting, const Eigen::Vector3d& n) {
    const auto& l = lighting.coeffs;
    const double x = n.x(), y = n.y(), z = n.z();
    return Eigen::Vector3d(kC1 * l[3] + kC2 * (l[4] * y + l[7] * z) + 2.0 * kC22 * l[8] * x,
                           kC1 * l[1] + kC2 * (l[4] * x + l[5] * z) - 2.0 * kC22 * l[8] * y,
                           kC1 * l[2] + kC2 * (l[5] * y + l[7] * x) + 6.0 * kC20 * l[6] * z);
}

SHLighting estimate_lighting(const GrayImage& image, const GrayImage& albedo, const NormalMap& normals,
                             const BinaryMask& mask, double ridge) {
    if (!image.same_size(albedo) || !image.same_size(normals.normals) || !image.same_size(mask)) {
        throw AlignmentError("lighting inputs differ in size");
    }
    if (ridge < 0.0) throw ParameterError("ridge must be nonnegative");
    Eigen::Matrix<double, 9, 9> M = Eigen::Matrix<double, 9, 9>::Zero();
    SHVector rhs = SHVector::Zero();
    int count = 0;
    for (std::size_t i = 0; i < image.size(); ++i) {
        if (!mask[i] || !normals.valid[i]) continue;
        const SHVector h = albedo[i] * sh_basis(normals.normals[i]);
        M.noalias() += h * h.transpose();
        rhs += image[i] * h;
        ++count;
    }
    if (count < 9) throw ParameterError("lighting estimation needs at least 9 foreground pixels");
    M.diagonal().array() += ridge;
    const Eigen::SelfAdjointEigenSolver<Eigen::Matrix<double, 9, 9>> eig(M);
    const double lo = eig.eigenvalues().minCoeff();
    const double hi = eig.eigenvalues().maxCoeff();
    if (!(hi > 0.0) || lo <= 1e-12 * hi) {
        throw ConditioningError("lighting normal matrix is singular; use a positive ridge");
    }
    SHLighting out;
    out.coeffs = M.ldlt().solve(rhs);
    // One refinement step keeps the round trip at machine precision.
    out.coeffs += M.ldlt().solve(rhs - M * out.coeffs);
    return out;
}

GrayImage render_shading(const SHLighting& lighting, const GrayImage& albedo, const NormalMap& normals) {
    if (!albedo.same_size(normals.normals)) throw AlignmentError("albedo and normal map differ in size");
    GrayImage out(albedo.width(), albedo.height(), 0.0);
    for (std::size_t i = 0; i < out.size(); ++i) {
        if (normals.valid[i]) out[i] = albedo[i] * lighting.shade(normals.normals[i]);
    }
    return out;
}

void save_lighting(const std::filesystem::path& path, const SHLighting& lighting) {
    std::ofstream out(path);
    if (!out) throw Error("cannot write " + path.string());
    std::vector<double> c(lighting.coeffs.data(), lighting.coeffs.data() + 9);
    out << nlohmann::json{{"sh", c}}.dump() << '\n';
}

SHLighting load_lighting(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw FormatError("cannot open lighting file " + path.string(), 0);
    try {
        const auto c = nlohmann::json::parse(in).at("sh").get<std::vector<double>>();
        if (c.size() != 9) throw FormatError("lighting needs 9 coefficients", 0);
        SHLighting out;
        for (int k = 0; k < 9; ++k) out.coeffs[k] = c[k];
        return out;
    } catch (const nlohmann::json::exception& e) {
        throw FormatError("invalid lighting file " + path.string() + ": " + e.what(), 0);
    }
}

}  // namespace avatar
