#pragma once

// Independent oracles shared by the unit tests and the acceptance binary.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <limits>
#include <vector>

#include <Eigen/Dense>

#include "avatar/camera/camera.hpp"
#include "avatar/deform/laplacian.hpp"
#include "avatar/geometry/mesh.hpp"
#include "avatar/image/grid.hpp"
#include "avatar/random.hpp"
#include "avatar/shading/sh.hpp"

namespace avatar::oracle {

// Dense oracle: stacks the Laplacian rows and the weighted handle rows of one
// coordinate and solves the overdetermined system by column-pivoting QR.
inline std::vector<Vec3> dense_oracle(const std::vector<Vec3>& v, const Adjacency& nb,
                               const std::vector<HandleConstraint>& cons) {
    const int n = static_cast<int>(v.size());
    std::vector<Vec3> out(n);
    for (int a = 0; a < 3; ++a) {
        Eigen::MatrixXd M = Eigen::MatrixXd::Zero(n + static_cast<int>(cons.size()), n);
        Eigen::VectorXd rhs = Eigen::VectorXd::Zero(M.rows());
        for (int i = 0; i < n; ++i) {
            M(i, i) = 1.0;
            double mean = 0.0;
            for (int j : nb[i]) {
                M(i, j) -= 1.0 / nb[i].size();
                mean += v[j][a];
            }
            rhs[i] = v[i][a] - mean / nb[i].size();
        }
        for (std::size_t k = 0; k < cons.size(); ++k) {
            M(n + k, cons[k].vertex) = cons[k].weight;
            rhs[n + k] = cons[k].weight * cons[k].position[a];
        }
        const Eigen::VectorXd x = M.colPivHouseholderQr().solve(rhs);
        for (int i = 0; i < n; ++i) out[i][a] = x[i];
    }
    return out;
}

inline std::vector<HandleConstraint> random_constraints(Rng& rng, const TriMesh& m, int count, double scale) {
    std::vector<HandleConstraint> c;
    for (int k = 0; k < count; ++k) {
        const int v = static_cast<int>(rng.index(m.vertex_count()));
        const Vec3 t = m.vertices[v] + scale * Vec3(rng.normal(), rng.normal(), rng.normal());
        c.push_back(HandleConstraint::at_position(v, t, rng.uniform(0.5, 10.0)));
    }
    return c;
}

inline double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

inline WeakPerspectiveCamera plane_camera(int size) {
    WeakPerspectiveCamera cam;
    cam.scale = size;  // the plane spans one meter
    cam.translation = Vec2(size / 2.0, size / 2.0);
    cam.width = cam.height = size;
    cam.depth_sign = -1;
    return cam;
}

// Seeded sum of Gaussian bumps (meters) on a plane 2 m from the origin.
inline DepthMap bumpy_plane(int size, std::uint64_t seed, double amplitude) {
    Rng rng(seed);
    struct Bump {
        double x, y, sigma, a;
    };
    std::vector<Bump> bumps;
    for (int k = 0; k < 24; ++k) {
        bumps.push_back({rng.uniform(0, size), rng.uniform(0, size), rng.uniform(3.0, 7.0),
                         amplitude * rng.uniform(-1.0, 1.0)});
    }
    DepthMap d(size, size);
    for (int y = 0; y < size; ++y) {
        for (int x = 0; x < size; ++x) {
            double z = 2.0;
            for (const Bump& b : bumps) {
                const double r2 = (x + 0.5 - b.x) * (x + 0.5 - b.x) + (y + 0.5 - b.y) * (y + 0.5 - b.y);
                z += b.a * std::exp(-r2 / (2.0 * b.sigma * b.sigma));
            }
            d.values.at(x, y) = z;
        }
    }
    return d;
}

// Separable Gaussian blur with clamped borders.
inline DepthMap gaussian_blur(const DepthMap& d, double sigma) {
    const int r = static_cast<int>(std::ceil(3 * sigma));
    std::vector<double> k(2 * r + 1);
    double sum = 0.0;
    for (int i = -r; i <= r; ++i) sum += k[i + r] = std::exp(-i * i / (2 * sigma * sigma));
    for (double& v : k) v /= sum;
    const int w = d.width(), h = d.height();
    DepthMap tmp = d, out = d;
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            double acc = 0.0;
            for (int i = -r; i <= r; ++i) acc += k[i + r] * d.values.at(std::clamp(x + i, 0, w - 1), y);
            tmp.values.at(x, y) = acc;
        }
    }
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            double acc = 0.0;
            for (int i = -r; i <= r; ++i) acc += k[i + r] * tmp.values.at(x, std::clamp(y + i, 0, h - 1));
            out.values.at(x, y) = acc;
        }
    }
    return out;
}

inline SHLighting test_lighting() {
    SHLighting l;
    l.coeffs << 1.6, 0.35, -0.55, 0.4, 0.08, -0.05, 0.06, 0.04, -0.07;
    return l;
}

inline double rmse(const DepthMap& a, const DepthMap& b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.values.size(); ++i) s += std::pow(a.values[i] - b.values[i], 2);
    return std::sqrt(s / a.values.size());
}

// Analytic sphere normals facing the camera (depth_sign -1) inside a disk.
inline NormalMap sphere_normals(int size) {
    NormalMap n(size, size);
    const double c = size / 2.0, r = 0.45 * size;
    for (int y = 0; y < size; ++y) {
        for (int x = 0; x < size; ++x) {
            const double u = (x + 0.5 - c) / r, v = (y + 0.5 - c) / r;
            const double q = 1.0 - u * u - v * v;
            if (q <= 0.0) continue;
            n.normals.at(x, y) = Vec3(u, v, -std::sqrt(q)).normalized();
            n.valid.at(x, y) = 1;
        }
    }
    return n;
}

// Exhaustive oracle; sums in GT order like the library so the means are comparable bit for bit.
inline double brute_chamfer(const TriMesh& gt, const TriMesh& pred, const std::vector<std::uint8_t>* filter) {
    double sum = 0.0;
    std::size_t n = 0;
    for (std::size_t i = 0; i < gt.vertices.size(); ++i) {
        if (filter && !(*filter)[i]) continue;
        double best = std::numeric_limits<double>::infinity();
        for (const auto& q : pred.vertices) best = std::min(best, (gt.vertices[i] - q).squaredNorm());
        sum += std::sqrt(best);
        ++n;
    }
    return sum / static_cast<double>(n) * 1000.0;
}

// Uniform point cloud in the cube [-extent, extent]^3 (no faces).
inline TriMesh random_cloud(Rng& rng, int n, double extent) {
    TriMesh m;
    for (int i = 0; i < n; ++i) {
        m.vertices.emplace_back(rng.uniform(-extent, extent), rng.uniform(-extent, extent), rng.uniform(-extent, extent));
    }
    return m;
}

}  // namespace avatar::oracle
