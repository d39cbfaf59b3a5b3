#include "avatar/deform/laplacian.hpp"

#include <numeric>

#include <Eigen/IterativeLinearSolvers>
#include <Eigen/SparseCholesky>

#include "avatar/error.hpp"
#include "avatar/geometry/obj_io.hpp"

namespace avatar {

namespace {

using SpMat = Eigen::SparseMatrix<double>;

void check_connected(const Adjacency& neighbors) {
    for (std::size_t i = 0; i < neighbors.size(); ++i) {
        if (neighbors[i].empty()) throw ConnectivityError("vertex " + std::to_string(i) + " has no neighbor");
    }
}

void check_constraints(std::size_t n, const std::vector<HandleConstraint>& constraints,
                       const std::optional<WeakPerspectiveCamera>& camera) {
    bool any = false;
    for (const auto& c : constraints) {
        if (c.vertex < 0 || static_cast<std::size_t>(c.vertex) >= n)
            throw ParameterError("constraint vertex " + std::to_string(c.vertex) + " out of range");
        if (!(c.weight >= 0.0) || !std::isfinite(c.weight)) throw ParameterError("constraint weight must be >= 0");
        if (c.kind == HandleConstraint::Kind::ImagePlane && !camera)
            throw ParameterError("image-plane constraint requires a camera");
        any = any || c.weight > 0.0;
    }
    if (camera) camera->validate();
    if (!any) throw RankDeficiencyError("no constraint with positive weight");
}

std::vector<int> component_labels(const Adjacency& neighbors) {
    const int n = static_cast<int>(neighbors.size());
    std::vector<int> label(n, -1);
    std::vector<int> stack;
    int next = 0;
    for (int s = 0; s < n; ++s) {
        if (label[s] >= 0) continue;
        label[s] = next;
        stack.push_back(s);
        while (!stack.empty()) {
            const int v = stack.back();
            stack.pop_back();
            for (int u : neighbors[v]) {
                if (label[u] < 0) {
                    label[u] = next;
                    stack.push_back(u);
                }
            }
        }
        ++next;
    }
    return label;
}

// Normal equations of one coordinate axis: A = L^T L + D, b = L^T delta + r.
// `handle_rhs` is r alone and `delta` the differential coordinates.
struct AxisSystem {
    Eigen::VectorXd diagonal;
    Eigen::VectorXd rhs;
    Eigen::VectorXd handle_rhs;
    Eigen::VectorXd delta;
};

struct Assembly {
    SpMat L;
    SpMat ltl;
    std::array<AxisSystem, 3> axes;
};

Assembly assemble(const std::vector<Vec3>& vertices, const Adjacency& neighbors,
                  const std::vector<HandleConstraint>& constraints,
                  const std::optional<WeakPerspectiveCamera>& camera, const DeformOptions& options) {
    const int n = static_cast<int>(vertices.size());
    check_connected(neighbors);
    check_constraints(vertices.size(), constraints, camera);

    Assembly out;
    const SpMat& L = out.L = uniform_laplacian(neighbors);
    out.ltl = SpMat(L.transpose()) * L;

    const auto comp = component_labels(neighbors);
    const int ncomp = comp.empty() ? 0 : *std::max_element(comp.begin(), comp.end()) + 1;

    for (int a = 0; a < 3; ++a) {
        AxisSystem& sys = out.axes[a];
        sys.diagonal = Eigen::VectorXd::Zero(n);
        sys.handle_rhs = Eigen::VectorXd::Zero(n);
        Eigen::VectorXd x(n);
        for (int i = 0; i < n; ++i) x[i] = vertices[i][a];
        // delta = L x evaluated exactly as the residual evaluates L x, so an
        // unconstrained-motion problem has a residual of exactly zero.
        sys.delta = L * x;
        if (!options.solve_axes[a]) {
            sys.rhs = L.transpose() * sys.delta;
            continue;
        }

        std::vector<char> axis_handled(ncomp, 0);
        std::vector<int> first_handle(ncomp, -1);
        for (const auto& c : constraints) {
            if (c.weight <= 0.0) continue;
            const int i = c.vertex;
            const double w2 = c.weight * c.weight;
            if (first_handle[comp[i]] < 0 || i < first_handle[comp[i]]) first_handle[comp[i]] = i;
            if (c.kind == HandleConstraint::Kind::Position) {
                sys.diagonal[i] += w2;
                sys.handle_rhs[i] += w2 * c.position[a];
                axis_handled[comp[i]] = 1;
            } else if (a < 2) {
                const double s = camera->scale;
                sys.diagonal[i] += w2 * s * s;
                sys.handle_rhs[i] += w2 * s * (c.pixel[a] - camera->translation[a]);
                axis_handled[comp[i]] = 1;
            }
        }
        for (int k = 0; k < ncomp; ++k) {
            if (axis_handled[k]) continue;
            if (first_handle[k] < 0) throw RankDeficiencyError("mesh component without any handle");
            const int g = first_handle[k];
            sys.diagonal[g] += 1.0;
            sys.handle_rhs[g] += vertices[g][a];
        }
        sys.rhs = L.transpose() * sys.delta + sys.handle_rhs;
    }
    return out;
}

SpMat with_diagonal(const SpMat& ltl, const Eigen::VectorXd& diagonal) {
    SpMat A = ltl;
    for (int i = 0; i < diagonal.size(); ++i) A.coeffRef(i, i) += diagonal[i];
    A.makeCompressed();
    return A;
}

double relative_residual(const SpMat& A, const Eigen::VectorXd& x, const Eigen::VectorXd& b) {
    const double bn = b.norm();
    const double rn = (A * x - b).norm();
    return bn > 0.0 ? rn / bn : rn;
}

}  // namespace

std::vector<Vec3> differential_coords(const std::vector<Vec3>& vertices, const Adjacency& neighbors) {
    if (neighbors.size() != vertices.size()) throw ParameterError("adjacency size mismatch");
    check_connected(neighbors);
    std::vector<Vec3> out(vertices.size());
    for (std::size_t i = 0; i < vertices.size(); ++i) {
        Vec3 mean = Vec3::Zero();
        for (int j : neighbors[i]) mean += vertices[j];
        out[i] = vertices[i] - mean / static_cast<double>(neighbors[i].size());
    }
    return out;
}

std::vector<Vec3> differential_coords(const TriMesh& mesh) {
    return differential_coords(mesh.vertices, vertex_neighbors(mesh));
}

SpMat uniform_laplacian(const Adjacency& neighbors) {
    const int n = static_cast<int>(neighbors.size());
    std::vector<Eigen::Triplet<double>> trip;
    for (int i = 0; i < n; ++i) {
        trip.emplace_back(i, i, 1.0);
        if (neighbors[i].empty()) continue;
        const double w = -1.0 / static_cast<double>(neighbors[i].size());
        for (int j : neighbors[i]) trip.emplace_back(i, j, w);
    }
    SpMat L(n, n);
    L.setFromTriplets(trip.begin(), trip.end());
    return L;
}

std::vector<Vec3> solve_deform(const std::vector<Vec3>& vertices, const Adjacency& neighbors,
                               const std::vector<HandleConstraint>& constraints,
                               const std::optional<WeakPerspectiveCamera>& camera, const DeformOptions& options,
                               DeformReport* report) {
    if (neighbors.size() != vertices.size()) throw ParameterError("adjacency size mismatch");
    const Assembly sys = assemble(vertices, neighbors, constraints, camera, options);
    const int n = static_cast<int>(vertices.size());
    std::vector<Vec3> out = vertices;
    DeformReport rep;

    Eigen::SimplicialLLT<SpMat> llt;
    bool analyzed = false;
    int factored_axis = -1;
    for (int a = 0; a < 3; ++a) {
        if (!options.solve_axes[a]) continue;
        const SpMat A = with_diagonal(sys.ltl, sys.axes[a].diagonal);
        const Eigen::VectorXd& b = sys.axes[a].rhs;
        const bool reuse = factored_axis >= 0 && sys.axes[factored_axis].diagonal == sys.axes[a].diagonal;
        if (!reuse) {
            if (!analyzed) {
                llt.analyzePattern(A);
                analyzed = true;
            }
            llt.factorize(A);
            factored_axis = llt.info() == Eigen::Success ? a : -1;
        }
        Eigen::VectorXd x0(n);
        for (int i = 0; i < n; ++i) x0[i] = vertices[i][a];
        // Residual in factored form: L^T (delta - L x) + r - D x.
        const AxisSystem& ax = sys.axes[a];
        auto residual = [&](const Eigen::VectorXd& y) -> Eigen::VectorXd {
            return sys.L.transpose() * (ax.delta - sys.L * y) + ax.handle_rhs - ax.diagonal.cwiseProduct(y);
        };
        Eigen::VectorXd x = x0;
        double res = std::numeric_limits<double>::infinity();
        if (factored_axis >= 0) {
            // Solving for the displacement from the input keeps small edits
            // exact; each pass is one step of iterative refinement.
            for (int it = 0; it < 4; ++it) {
                const Eigen::VectorXd r = residual(x);
                const double bn = b.norm();
                res = bn > 0.0 ? r.norm() / bn : r.norm();
                if (it > 0 && res <= options.tolerance) break;
                if (r.isZero(0.0)) break;
                x += llt.solve(r);
            }
            res = relative_residual(A, x, b);
        }
        if (!(res <= options.tolerance)) {
            Eigen::ConjugateGradient<SpMat, Eigen::Lower | Eigen::Upper, Eigen::DiagonalPreconditioner<double>> cg;
            cg.setMaxIterations(options.max_cg_iterations);
            cg.setTolerance(options.tolerance * 0.5);
            cg.compute(A);
            x = cg.solveWithGuess(b, x0);
            res = relative_residual(A, x, b);
            rep.used_iterative = true;
            if (!(res <= options.tolerance)) {
                if (factored_axis < 0 && llt.info() != Eigen::Success && cg.info() == Eigen::NumericalIssue)
                    throw RankDeficiencyError("normal system is not positive definite");
                throw SolverError("deformation solve did not reach tolerance", res);
            }
        }
        rep.relative_residual[a] = res;
        for (int i = 0; i < n; ++i) out[i][a] = x[i];
    }
    if (report) *report = rep;
    return out;
}

TriMesh solve_deform(const DeformProblem& problem, const DeformOptions& options, DeformReport* report) {
    TriMesh out = problem.mesh;
    out.vertices = solve_deform(problem.mesh.vertices, vertex_neighbors(problem.mesh), problem.constraints,
                                problem.camera, options, report);
    return out;
}

double deform_objective(const std::vector<Vec3>& input, const Adjacency& neighbors,
                        const std::vector<HandleConstraint>& constraints,
                        const std::optional<WeakPerspectiveCamera>& camera, const std::vector<Vec3>& vertices) {
    const auto delta = differential_coords(input, neighbors);
    const auto lv = differential_coords(vertices, neighbors);
    double e = 0.0;
    for (std::size_t i = 0; i < lv.size(); ++i) e += (lv[i] - delta[i]).squaredNorm();
    for (const auto& c : constraints) {
        const double w2 = c.weight * c.weight;
        if (c.kind == HandleConstraint::Kind::Position) {
            e += w2 * (vertices[c.vertex] - c.position).squaredNorm();
        } else {
            if (!camera) throw ParameterError("image-plane constraint requires a camera");
            e += w2 * (camera->project(vertices[c.vertex]) - c.pixel).squaredNorm();
        }
    }
    return e;
}

double deform_objective(const DeformProblem& problem, const std::vector<Vec3>& vertices) {
    return deform_objective(problem.mesh.vertices, vertex_neighbors(problem.mesh), problem.constraints, problem.camera,
                            vertices);
}

void dump_system(const DeformProblem& problem, std::ostream& out, const DeformOptions& options) {
    const Assembly sys = assemble(problem.mesh.vertices, vertex_neighbors(problem.mesh), problem.constraints,
                                  problem.camera, options);
    const int n = static_cast<int>(problem.mesh.vertices.size());
    for (int a = 0; a < 3; ++a) {
        if (!options.solve_axes[a]) continue;
        const SpMat A = with_diagonal(sys.ltl, sys.axes[a].diagonal);
        out << "matrix " << a << ' ' << n << ' ' << A.nonZeros() << '\n';
        for (int k = 0; k < A.outerSize(); ++k) {
            for (SpMat::InnerIterator it(A, k); it; ++it)
                out << it.row() << ' ' << it.col() << ' ' << format_double(it.value()) << '\n';
        }
        out << "rhs " << a << ' ' << n << '\n';
        for (int i = 0; i < n; ++i) out << i << ' ' << format_double(sys.axes[a].rhs[i]) << '\n';
    }
}

}  // namespace avatar
