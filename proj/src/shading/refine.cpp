#include "avatar/shading/refine.hpp"

#include <array>
#include <cmath>

#include <ceres/gradient_problem.h>
#include <ceres/gradient_problem_solver.h>

#include "avatar/deform/laplacian.hpp"
#include "avatar/error.hpp"

namespace avatar {

namespace {

struct Tap {
    std::size_t index;
    double coeff;
};

// Finite-difference stencil of depth_to_normals along (dx, dy): central where
// both neighbors are foreground, one-sided otherwise. False when undefined.
bool derivative_stencil(const DepthMap& d, int x, int y, int dx, int dy, std::array<Tap, 2>& taps) {
    const auto& g = d.values;
    const bool fwd = g.in_bounds(x + dx, y + dy) && d.is_foreground(x + dx, y + dy);
    const bool back = g.in_bounds(x - dx, y - dy) && d.is_foreground(x - dx, y - dy);
    const std::size_t c = g.index(x, y);
    if (fwd && back) {
        taps = {Tap{g.index(x + dx, y + dy), 0.5}, Tap{g.index(x - dx, y - dy), -0.5}};
    } else if (fwd) {
        taps = {Tap{g.index(x + dx, y + dy), 1.0}, Tap{c, -1.0}};
    } else if (back) {
        taps = {Tap{c, 1.0}, Tap{g.index(x - dx, y - dy), -1.0}};
    } else {
        return false;
    }
    return true;
}

double stencil_value(const std::array<Tap, 2>& taps, const DepthMap& d) {
    return taps[0].coeff * d.values[taps[0].index] + taps[1].coeff * d.values[taps[1].index];
}

// Photometric term; adds lambda * dE/dD into `grad` when given.
double photometric(const DepthMap& depth, const GrayImage& image, const GrayImage& albedo,
                   const SHLighting& lighting, const BinaryMask& mask, const WeakPerspectiveCamera& camera,
                   double lambda, std::vector<double>* grad) {
    const double s = camera.scale;
    const double sign = camera.depth_sign;
    double e = 0.0;
    for (int y = 0; y < depth.height(); ++y) {
        for (int x = 0; x < depth.width(); ++x) {
            const std::size_t i = depth.values.index(x, y);
            if (!mask[i] || !depth.is_foreground(x, y)) continue;
            std::array<Tap, 2> tx, ty;
            if (!derivative_stencil(depth, x, y, 1, 0, tx) || !derivative_stencil(depth, x, y, 0, 1, ty)) continue;
            const Vec3 m(-sign * stencil_value(tx, depth) * s, -sign * stencil_value(ty, depth) * s, sign);
            const double r = m.norm();
            const Vec3 n = m / r;
            const double f = albedo[i] * lighting.shade(n) - image[i];
            e += f * f;
            if (!grad) continue;
            const Vec3 gn = sh_shade_gradient(lighting, n);
            const Vec3 dm = (gn - n * n.dot(gn)) / r;
            const double c = 2.0 * lambda * f * albedo[i] * (-sign * s);
            for (const Tap& t : tx) (*grad)[t.index] += c * dm.x() * t.coeff;
            for (const Tap& t : ty) (*grad)[t.index] += c * dm.y() * t.coeff;
        }
    }
    return lambda * e;
}

std::vector<std::uint8_t> variable_mask(const RefineProblem& p) {
    std::vector<std::uint8_t> var(p.coarse.values.size(), 0);
    for (int y = 0; y < p.coarse.height(); ++y) {
        for (int x = 0; x < p.coarse.width(); ++x) {
            const std::size_t i = p.coarse.values.index(x, y);
            var[i] = p.mask[i] && p.coarse.is_foreground(x, y);
        }
    }
    return var;
}

void check_inputs(const RefineProblem& p) {
    p.config.validate();
    const int w = p.coarse.width(), h = p.coarse.height();
    if (!p.image.same_size(w, h) || !p.albedo.same_size(w, h) || !p.mask.same_size(w, h)) {
        throw AlignmentError("refinement inputs differ in size");
    }
}

class ShadingEnergy : public ceres::FirstOrderFunction {
public:
    ShadingEnergy(const RefineProblem& problem, std::vector<std::size_t> vars)
        : problem_(problem), vars_(std::move(vars)), depth_(problem.coarse) {}

    bool Evaluate(const double* offsets, double* cost, double* gradient) const override {
        for (std::size_t k = 0; k < vars_.size(); ++k) depth_.values[vars_[k]] = problem_.coarse.values[vars_[k]] + offsets[k];
        std::vector<double> g;
        *cost = refine_objective(problem_, depth_, gradient ? &g : nullptr);
        if (gradient) {
            for (std::size_t k = 0; k < vars_.size(); ++k) gradient[k] = g[vars_[k]];
        }
        return std::isfinite(*cost);
    }
    int NumParameters() const override { return static_cast<int>(vars_.size()); }

private:
    const RefineProblem& problem_;
    std::vector<std::size_t> vars_;
    mutable DepthMap depth_;
};

}  // namespace

void RefineConfig::validate() const {
    if (lambda_photo < 0.0 || lambda_data < 0.0 || lambda_smooth < 0.0) throw ParameterError("refine weights must be nonnegative");
    if (!(beta > 0.0)) throw ParameterError("magnification must be positive");
    if (ridge < 0.0) throw ParameterError("ridge must be nonnegative");
}

GrayImage estimate_albedo(const GrayImage& image, const NormalMap& normals, const BinaryMask& mask,
                          const SHLighting& bootstrap, int blur_radius, double floor) {
    if (!image.same_size(normals.normals) || !image.same_size(mask)) throw AlignmentError("albedo inputs differ in size");
    if (blur_radius < 0 || !(floor > 0.0)) throw ParameterError("invalid albedo blur radius or floor");
    const int w = image.width(), h = image.height();
    GrayImage ratio(w, h, 0.0);
    BinaryMask defined(w, h, 0);
    for (std::size_t i = 0; i < image.size(); ++i) {
        if (!mask[i] || !normals.valid[i]) continue;
        ratio[i] = image[i] / std::max(bootstrap.shade(normals.normals[i]), floor);
        defined[i] = 1;
    }
    GrayImage out(w, h, 0.0);
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            if (!mask.at(x, y)) continue;
            double sum = 0.0;
            int n = 0;
            for (int v = std::max(0, y - blur_radius); v <= std::min(h - 1, y + blur_radius); ++v) {
                for (int u = std::max(0, x - blur_radius); u <= std::min(w - 1, x + blur_radius); ++u) {
                    if (!defined.at(u, v)) continue;
                    sum += ratio.at(u, v);
                    ++n;
                }
            }
            out.at(x, y) = n ? sum / n : 1.0;
        }
    }
    return out;
}

std::vector<std::size_t> refine_variables(const RefineProblem& problem) {
    const auto var = variable_mask(problem);
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < var.size(); ++i) {
        if (var[i]) out.push_back(i);
    }
    return out;
}

double refine_objective(const RefineProblem& p, const DepthMap& depth, std::vector<double>* gradient) {
    check_inputs(p);
    if (!depth.values.same_size(p.coarse.values)) throw AlignmentError("depth grid differs from the coarse depth");
    const auto& cfg = p.config;
    const auto var = variable_mask(p);
    if (gradient) gradient->assign(depth.values.size(), 0.0);

    double e = 0.0;
    if (cfg.lambda_photo > 0.0) {
        e += photometric(depth, p.image, p.albedo, p.lighting, p.mask, p.camera, cfg.lambda_photo, gradient);
    }
    const int w = depth.width(), h = depth.height();
    auto detail = [&](std::size_t i) { return depth.values[i] - p.coarse.values[i]; };
    for (std::size_t i = 0; i < var.size(); ++i) {
        if (!var[i]) continue;
        const double d = detail(i);
        e += cfg.lambda_data * d * d;
        if (gradient) (*gradient)[i] += 2.0 * cfg.lambda_data * d;
    }
    if (cfg.lambda_smooth > 0.0) {
        for (int y = 0; y < h; ++y) {
            for (int x = 0; x < w; ++x) {
                const std::size_t i = depth.values.index(x, y);
                if (!var[i]) continue;
                std::array<std::size_t, 4> nb{};
                int k = 0;
                for (auto [dx, dy] : {std::pair{1, 0}, std::pair{-1, 0}, std::pair{0, 1}, std::pair{0, -1}}) {
                    if (depth.values.in_bounds(x + dx, y + dy) && depth.is_foreground(x + dx, y + dy)) {
                        nb[k++] = depth.values.index(x + dx, y + dy);
                    }
                }
                double lap = -k * detail(i);
                for (int j = 0; j < k; ++j) lap += detail(nb[j]);
                e += cfg.lambda_smooth * lap * lap;
                if (!gradient) continue;
                const double c = 2.0 * cfg.lambda_smooth * lap;
                (*gradient)[i] -= c * k;
                for (int j = 0; j < k; ++j) (*gradient)[nb[j]] += c;
            }
        }
    }
    if (gradient) {
        for (std::size_t i = 0; i < var.size(); ++i) {
            if (!var[i]) (*gradient)[i] = 0.0;
        }
    }
    return e;
}

double photometric_residual(const DepthMap& depth, const GrayImage& image, const GrayImage& albedo,
                            const SHLighting& lighting, const BinaryMask& mask, const WeakPerspectiveCamera& camera) {
    return photometric(depth, image, albedo, lighting, mask, camera, 1.0, nullptr);
}

DepthMap refine_depth(const RefineProblem& problem, RefineReport* report) {
    check_inputs(problem);
    const auto vars = refine_variables(problem);
    RefineReport rep;
    rep.initial_objective = refine_objective(problem, problem.coarse);
    DepthMap out = problem.coarse;
    if (vars.empty()) {
        rep.final_objective = rep.initial_objective;
        if (report) *report = rep;
        return out;
    }
    std::vector<double> offsets(vars.size(), 0.0);
    ceres::GradientProblem gp(new ShadingEnergy(problem, vars));
    ceres::GradientProblemSolver::Options opt;
    opt.line_search_direction_type = ceres::LBFGS;
    opt.max_num_iterations = problem.config.max_iterations;
    opt.function_tolerance = problem.config.function_tolerance;
    opt.gradient_tolerance = problem.config.gradient_tolerance;
    opt.parameter_tolerance = 1e-16;
    opt.logging_type = ceres::SILENT;
    opt.minimizer_progress_to_stdout = false;
    ceres::GradientProblemSolver::Summary summary;
    ceres::Solve(opt, gp, offsets.data(), &summary);
    for (const auto& it : summary.iterations) rep.trace.push_back(it.cost);

    for (std::size_t k = 0; k < vars.size(); ++k) out.values[vars[k]] = problem.coarse.values[vars[k]] + offsets[k];
    rep.final_objective = refine_objective(problem, out);
    rep.iterations = static_cast<int>(summary.iterations.size());
    if (!(rep.final_objective <= rep.initial_objective)) {
        throw OptimizerError("depth refinement increased the objective", rep.trace);
    }
    if (report) *report = rep;
    return out;
}

DepthMap magnify_details(const DepthMap& coarse, const DepthMap& refined, double beta) {
    if (!coarse.values.same_size(refined.values)) throw AlignmentError("depth grids differ in size");
    DepthMap out = coarse;
    for (std::size_t i = 0; i < out.values.size(); ++i) {
        const bool a = std::isfinite(coarse.values[i]);
        const bool b = std::isfinite(refined.values[i]);
        if (a != b) throw AlignmentError("depth foregrounds differ");
        if (a) out.values[i] = coarse.values[i] + beta * (refined.values[i] - coarse.values[i]);
    }
    return out;
}

TriMesh depth_to_vertex_displacement(const TriMesh& mesh, const WeakPerspectiveCamera& camera,
                                     const DepthMap& target, const std::vector<std::uint8_t>& vertex_visible,
                                     DisplacementReport* report, double min_view_cosine) {
    if (vertex_visible.size() != mesh.vertices.size()) throw ParameterError("one visibility flag per vertex required");
    if (!target.values.same_size(camera.width, camera.height)) throw AlignmentError("depth grid differs from the camera frame");
    auto foreground = [&](int x, int y) { return target.values.in_bounds(x, y) && target.is_foreground(x, y); };
    DisplacementReport rep;
    DeformProblem problem{mesh, {}, std::nullopt};
    const auto normals = vertex_normals(mesh);
    for (int v = 0; v < mesh.vertex_count(); ++v) {
        if (!vertex_visible[v]) continue;
        if (normals[v].dot(camera.view_vector()) < min_view_cosine) {
            ++rep.grazing;
            continue;
        }
        const Vec2 p = camera.project(mesh.vertices[v]);
        // Pixel centers sit at integer + 0.5.
        const double u = p.x() - 0.5, w = p.y() - 0.5;
        const int x0 = static_cast<int>(std::floor(u)), y0 = static_cast<int>(std::floor(w));
        double z;
        if (foreground(x0, y0) && foreground(x0 + 1, y0) && foreground(x0, y0 + 1) && foreground(x0 + 1, y0 + 1)) {
            const double fx = u - x0, fy = w - y0;
            const auto& g = target.values;
            z = (1 - fy) * ((1 - fx) * g.at(x0, y0) + fx * g.at(x0 + 1, y0)) +
                fy * ((1 - fx) * g.at(x0, y0 + 1) + fx * g.at(x0 + 1, y0 + 1));
        } else if (foreground(static_cast<int>(std::floor(p.x())), static_cast<int>(std::floor(p.y())))) {
            z = target.values.at(static_cast<int>(std::floor(p.x())), static_cast<int>(std::floor(p.y())));
        } else {
            ++rep.skipped;
            continue;
        }
        Vec3 t = mesh.vertices[v];
        t.z() = z;
        problem.constraints.push_back(HandleConstraint::at_position(v, t, 1.0));
        ++rep.moved;
    }
    if (report) *report = rep;
    if (problem.constraints.empty()) return mesh;
    DeformOptions options;
    options.solve_axes = {false, false, true};
    return solve_deform(problem, options);
}

}  // namespace avatar
